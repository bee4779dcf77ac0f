use super::Point3;

/// Static kd-tree over 3D points for exact nearest-neighbor, k-NN and radius
/// queries.
///
/// Construction and all tie-breaks are fully deterministic: splits compare
/// `(coordinate, original index)` and query ties prefer the smaller original
/// index, so results do not depend on thread count or insertion order
/// artifacts.
pub struct KdTree {
    // Points in tree order; `order[i]` is the original index of `pts[i]`.
    pts: Vec<[f64; 3]>,
    order: Vec<u32>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Self {
        let n = points.len();
        let mut pts: Vec<[f64; 3]> = points.iter().map(|p| p.coords()).collect();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut axes = vec![0u8; n];
        if n > 0 {
            build_range(&mut pts, &mut order, &mut axes, 0, n);
        }
        Self { pts, order, axes }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Index and squared distance of the nearest point; ties prefer the
    /// smaller original index. Panics on an empty tree.
    pub fn nearest(&self, q: Point3) -> (usize, f64) {
        assert!(!self.is_empty(), "nearest() on empty kd-tree");
        let q = q.coords();
        let mut best = (f64::INFINITY, u32::MAX);
        self.nearest_rec(&q, 0, self.pts.len(), &mut best);
        (best.1 as usize, best.0)
    }

    /// `k` nearest points as `(original index, squared distance)`, ascending
    /// by `(distance, index)`. Returns fewer when the tree is smaller.
    pub fn knn(&self, q: Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let q = q.coords();
        // (sq_dist, index) max-heap via sorted Vec; k is small in practice.
        let mut heap: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.knn_rec(&q, 0, self.pts.len(), k, &mut heap);
        heap.sort_by(cmp_entry);
        heap.into_iter().map(|(d, i)| (i as usize, d)).collect()
    }

    /// All points with squared distance <= `radius_sq`, sorted by original
    /// index.
    pub fn within_radius(&self, q: Point3, radius_sq: f64) -> Vec<(usize, f64)> {
        let q = q.coords();
        let mut out = Vec::new();
        if !self.is_empty() {
            self.radius_rec(&q, 0, self.pts.len(), radius_sq, &mut out);
        }
        out.sort_by_key(|&(i, _)| i);
        out
    }

    fn nearest_rec(&self, q: &[f64; 3], lo: usize, hi: usize, best: &mut (f64, u32)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let node = &self.pts[mid];
        let idx = self.order[mid];
        let d = sq_dist(q, node);
        if d < best.0 || (d == best.0 && idx < best.1) {
            *best = (d, idx);
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - node[axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.nearest_rec(q, near_lo, near_hi, best);
        if delta * delta <= best.0 {
            self.nearest_rec(q, far_lo, far_hi, best);
        }
    }

    fn knn_rec(&self, q: &[f64; 3], lo: usize, hi: usize, k: usize, heap: &mut Vec<(f64, u32)>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let node = &self.pts[mid];
        let idx = self.order[mid];
        let d = sq_dist(q, node);
        let entry = (d, idx);
        if heap.len() < k {
            heap.push(entry);
            if heap.len() == k {
                heap.sort_by(cmp_entry);
            }
        } else if cmp_entry(&entry, heap.last().unwrap()).is_lt() {
            heap.pop();
            let pos = heap.partition_point(|e| cmp_entry(e, &entry).is_lt());
            heap.insert(pos, entry);
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - node[axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.knn_rec(q, near_lo, near_hi, k, heap);
        let worst = if heap.len() < k { f64::INFINITY } else { heap.last().unwrap().0 };
        if delta * delta <= worst {
            self.knn_rec(q, far_lo, far_hi, k, heap);
        }
    }

    fn radius_rec(
        &self,
        q: &[f64; 3],
        lo: usize,
        hi: usize,
        radius_sq: f64,
        out: &mut Vec<(usize, f64)>,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let node = &self.pts[mid];
        let d = sq_dist(q, node);
        if d <= radius_sq {
            out.push((self.order[mid] as usize, d));
        }
        let axis = self.axes[mid] as usize;
        let delta = q[axis] - node[axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.radius_rec(q, near_lo, near_hi, radius_sq, out);
        if delta * delta <= radius_sq {
            self.radius_rec(q, far_lo, far_hi, radius_sq, out);
        }
    }
}

fn cmp_entry(a: &(f64, u32), b: &(f64, u32)) -> std::cmp::Ordering {
    a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1))
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn build_range(pts: &mut [[f64; 3]], order: &mut [u32], axes: &mut [u8], lo: usize, hi: usize) {
    if hi - lo <= 1 {
        return;
    }
    // Split on the widest axis of this range.
    let mut mins = [f64::INFINITY; 3];
    let mut maxs = [f64::NEG_INFINITY; 3];
    for p in &pts[lo..hi] {
        for a in 0..3 {
            mins[a] = mins[a].min(p[a]);
            maxs[a] = maxs[a].max(p[a]);
        }
    }
    let mut axis = 0;
    for a in 1..3 {
        if maxs[a] - mins[a] > maxs[axis] - mins[axis] {
            axis = a;
        }
    }
    let mid = lo + (hi - lo) / 2;
    select_nth(pts, order, lo, hi, mid, axis);
    axes[mid] = axis as u8;
    build_range(pts, order, axes, lo, mid);
    build_range(pts, order, axes, mid + 1, hi);
}

/// Deterministic quickselect by `(coordinate, original index)` using a
/// three-way partition; keys are unique, so each round strictly shrinks the
/// range or lands the pivot on `nth`.
fn select_nth(
    pts: &mut [[f64; 3]],
    order: &mut [u32],
    mut lo: usize,
    mut hi: usize,
    nth: usize,
    axis: usize,
) {
    while hi - lo > 1 {
        let pivot_idx = lo + (hi - lo) / 2;
        let pivot = (pts[pivot_idx][axis], order[pivot_idx]);
        let mut lt = lo;
        let mut gt = hi;
        let mut i = lo;
        while i < gt {
            let key = (pts[i][axis], order[i]);
            if key < pivot {
                pts.swap(i, lt);
                order.swap(i, lt);
                lt += 1;
                i += 1;
            } else if key > pivot {
                gt -= 1;
                pts.swap(i, gt);
                order.swap(i, gt);
            } else {
                i += 1;
            }
        }
        if nth < lt {
            hi = lt;
        } else if nth >= gt {
            lo = gt;
        } else {
            return; // pivot landed on nth
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_cloud() -> Vec<Point3> {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    pts.push(Point3::new(i as f64, j as f64 * 0.7, k as f64 * 1.3));
                }
            }
        }
        pts
    }

    fn pseudo_points(n: usize, salt: u64) -> Vec<Point3> {
        (0..n)
            .map(|i| {
                let t = (i as f64 + salt as f64 * 0.13).sin();
                Point3::new(
                    (t * 7.7).sin() * 3.0,
                    (t * 3.1 + 1.0).cos() * 2.0,
                    (t * 13.9 + 2.0).sin(),
                )
            })
            .collect()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts = pseudo_points(300, 1);
        let tree = KdTree::build(&pts);
        for q in pseudo_points(50, 99) {
            let (bi, bd) = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.distance_squared(q)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            let (ti, td) = tree.nearest(q);
            assert_eq!(ti, bi);
            assert_eq!(td, bd);
        }
    }

    #[test]
    fn knn_matches_brute_force() {
        let pts = grid_cloud();
        let tree = KdTree::build(&pts);
        for q in pseudo_points(20, 5) {
            let mut brute: Vec<(usize, f64)> = pts
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.distance_squared(q)))
                .collect();
            brute.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            brute.truncate(8);
            let got = tree.knn(q, 8);
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn radius_matches_brute_force() {
        let pts = grid_cloud();
        let tree = KdTree::build(&pts);
        let q = Point3::new(2.1, 1.2, 2.0);
        let r2 = 1.75;
        let mut brute: Vec<(usize, f64)> = pts
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let d = p.distance_squared(q);
                (d <= r2).then_some((i, d))
            })
            .collect();
        brute.sort_by_key(|&(i, _)| i);
        assert_eq!(tree.within_radius(q, r2), brute);
    }

    #[test]
    fn handles_duplicates() {
        let pts = vec![Point3::new(1.0, 1.0, 1.0); 7];
        let tree = KdTree::build(&pts);
        let (i, d) = tree.nearest(Point3::new(1.0, 1.0, 1.0));
        assert_eq!(i, 0); // tie broken toward the smallest index
        assert_eq!(d, 0.0);
        assert_eq!(tree.knn(Point3::ORIGIN, 3).len(), 3);
    }
}
