//! Static k-d tree for max-norm (Chebyshev) neighbor queries.
//!
//! Built once over a point cloud, then queried for k-th-neighbor radii and
//! strict-radius counts. Points are repacked in build order and stored
//! axis-major, so a leaf scan is a handful of straight-line elementwise loops
//! the compiler vectorizes; k-NN descent prunes on split planes, counts prune
//! on node bounding boxes and add fully-covered subtrees in one step.
//!
//! Queries are exact: pruning uses true distance lower bounds, so results are
//! identical to an O(n^2) scan, including the smaller-index tie-break on
//! equal distances.

const LEAF_SIZE: usize = 16;
/// Largest neighbor order served from the stack buffer.
const K_INLINE: usize = 16;

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: u32,
    hi: u32,
    left: u32, // u32::MAX marks a leaf
    right: u32,
    axis: u32,
    split: f64, // left subtree coords <= split <= right subtree coords
}

#[derive(Debug)]
pub struct KdTree {
    dim: usize,
    n: usize,
    pts_t: Vec<f64>, // repacked axis-major: axis a of packed point p at [a*n + p]
    orig: Vec<u32>,  // packed position -> original point index
    nodes: Vec<Node>,
    boxes: Vec<f64>, // per node: dim mins then dim maxes
}

/// Sorted best-k candidates (distance, original index), smallest first.
struct BestK {
    len: usize,
    k: usize,
    buf: [(f64, u32); K_INLINE],
    spill: Vec<(f64, u32)>,
}

impl BestK {
    fn new(k: usize) -> BestK {
        BestK {
            len: 0,
            k,
            buf: [(f64::INFINITY, u32::MAX); K_INLINE],
            spill: if k > K_INLINE {
                vec![(f64::INFINITY, u32::MAX); k]
            } else {
                Vec::new()
            },
        }
    }

    #[inline]
    fn slice(&mut self) -> &mut [(f64, u32)] {
        if self.k > K_INLINE {
            &mut self.spill
        } else {
            &mut self.buf[..self.k]
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.len == self.k {
            if self.k > K_INLINE {
                self.spill[self.k - 1].0
            } else {
                self.buf[self.k - 1].0
            }
        } else {
            f64::INFINITY
        }
    }

    #[inline]
    fn offer(&mut self, cand: (f64, u32)) {
        let full = self.len == self.k;
        let k = self.k;
        let len = self.len;
        let s = self.slice();
        if full && cand >= s[k - 1] {
            return;
        }
        let mut pos = if full { k - 1 } else { len };
        while pos > 0 && cand < s[pos - 1] {
            s[pos] = s[pos - 1];
            pos -= 1;
        }
        s[pos] = cand;
        if !full {
            self.len += 1;
        }
    }
}

impl KdTree {
    /// Build over `n` points stored row-major in `data` (`n * dim` entries).
    pub fn build(data: &[f64], n: usize, dim: usize) -> KdTree {
        assert_eq!(data.len(), n * dim);
        assert!(n > 0 && dim > 0);
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut tree = KdTree {
            dim,
            n,
            pts_t: vec![0.0; n * dim],
            orig: Vec::with_capacity(n),
            nodes: Vec::new(),
            boxes: Vec::new(),
        };
        tree.build_range(data, &mut order, 0, n);
        for (p, &o) in tree.orig.iter().enumerate() {
            for a in 0..dim {
                tree.pts_t[a * n + p] = data[o as usize * dim + a];
            }
        }
        tree
    }

    fn build_range(&mut self, data: &[f64], order: &mut [u32], lo: usize, hi: usize) -> u32 {
        let dim = self.dim;
        let node_id = self.nodes.len() as u32;
        self.nodes.push(Node {
            lo: lo as u32,
            hi: hi as u32,
            left: u32::MAX,
            right: u32::MAX,
            axis: u32::MAX,
            split: 0.0,
        });
        let base = self.boxes.len();
        self.boxes.resize(base + 2 * dim, 0.0);
        for a in 0..dim {
            self.boxes[base + a] = f64::INFINITY;
            self.boxes[base + dim + a] = f64::NEG_INFINITY;
        }
        let span = hi - lo;
        let local = &mut order[..span];
        for &o in local.iter() {
            let row = &data[o as usize * dim..(o as usize + 1) * dim];
            for a in 0..dim {
                if row[a] < self.boxes[base + a] {
                    self.boxes[base + a] = row[a];
                }
                if row[a] > self.boxes[base + dim + a] {
                    self.boxes[base + dim + a] = row[a];
                }
            }
        }
        if span <= LEAF_SIZE {
            self.orig.extend_from_slice(local);
            return node_id;
        }
        let mut axis = 0;
        let mut widest = f64::NEG_INFINITY;
        for a in 0..dim {
            let w = self.boxes[base + dim + a] - self.boxes[base + a];
            if w > widest {
                widest = w;
                axis = a;
            }
        }
        let mid = span / 2;
        let (_, pivot, _) = local.select_nth_unstable_by(mid, |&p, &q| {
            data[p as usize * dim + axis].total_cmp(&data[q as usize * dim + axis])
        });
        let split = data[*pivot as usize * dim + axis];
        let (left_slice, right_slice) = local.split_at_mut(mid);
        // Left recursion runs first so `orig` is appended in packed order.
        let left = self.build_range(data, left_slice, lo, lo + mid);
        let right = self.build_range(data, right_slice, lo + mid, hi);
        let node = &mut self.nodes[node_id as usize];
        node.left = left;
        node.right = right;
        node.axis = axis as u32;
        node.split = split;
        node_id
    }

    /// Max-norm distances from `q` to the packed points `[lo, hi)`, written
    /// into `out[..hi-lo]` as elementwise vectorizable column passes.
    #[inline]
    fn leaf_distances<const D: usize>(&self, q: &[f64], lo: usize, hi: usize, out: &mut [f64]) {
        let dim = if D == 0 { self.dim } else { D };
        let n = self.n;
        let m = hi - lo;
        let d = &mut out[..m];
        {
            let q0 = q[0];
            let col = &self.pts_t[lo..hi];
            for (t, &v) in d.iter_mut().zip(col) {
                *t = (q0 - v).abs();
            }
        }
        for a in 1..dim {
            let qa = q[a];
            let col = &self.pts_t[a * n + lo..a * n + hi];
            for (t, &v) in d.iter_mut().zip(col) {
                *t = t.max((qa - v).abs());
            }
        }
    }

    /// Max-norm distance to the k-th nearest point other than `skip`; ties on
    /// distance prefer the smaller original index, which a brute-force scan
    /// sorted by `(distance, index)` reproduces exactly.
    pub fn knn_radius(&self, q: &[f64], k: usize, skip: u32) -> f64 {
        debug_assert_eq!(q.len(), self.dim);
        let mut best = BestK::new(k);
        let mut buf = [0.0f64; LEAF_SIZE];
        match self.dim {
            1 => self.knn_rec::<1>(0, q, skip, &mut best, &mut buf),
            2 => self.knn_rec::<2>(0, q, skip, &mut best, &mut buf),
            3 => self.knn_rec::<3>(0, q, skip, &mut best, &mut buf),
            4 => self.knn_rec::<4>(0, q, skip, &mut best, &mut buf),
            6 => self.knn_rec::<6>(0, q, skip, &mut best, &mut buf),
            _ => self.knn_rec::<0>(0, q, skip, &mut best, &mut buf),
        }
        debug_assert_eq!(best.len, k, "fewer than k other points in the tree");
        best.worst()
    }

    fn knn_rec<const D: usize>(
        &self,
        node_id: u32,
        q: &[f64],
        skip: u32,
        best: &mut BestK,
        buf: &mut [f64; LEAF_SIZE],
    ) {
        let node = self.nodes[node_id as usize];
        if node.left == u32::MAX {
            let (lo, hi) = (node.lo as usize, node.hi as usize);
            self.leaf_distances::<D>(q, lo, hi, buf);
            let cutoff = best.worst();
            for (j, &dist) in buf[..hi - lo].iter().enumerate() {
                // The cutoff is refreshed lazily: offer() re-checks anyway.
                if dist <= cutoff {
                    let idx = self.orig[lo + j];
                    if idx != skip {
                        best.offer((dist, idx));
                    }
                }
            }
            return;
        }
        // Split-plane pruning: every point on the far side differs from q by
        // at least |q[axis] - split| along the split axis, which lower-bounds
        // the max-norm distance. Equality still descends (index tie-break).
        let gap = q[node.axis as usize] - node.split;
        let (near, far) = if gap <= 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.knn_rec::<D>(near, q, skip, best, buf);
        if gap.abs() <= best.worst() {
            self.knn_rec::<D>(far, q, skip, best, buf);
        }
    }

    /// Number of points (including the query point itself when it is in the
    /// tree) at max-norm distance strictly less than `radius`.
    pub fn count_within_strict(&self, q: &[f64], radius: f64) -> usize {
        debug_assert_eq!(q.len(), self.dim);
        if radius <= 0.0 {
            return 0;
        }
        let mut buf = [0.0f64; LEAF_SIZE];
        match self.dim {
            1 => self.count_rec::<1>(0, q, radius, &mut buf),
            2 => self.count_rec::<2>(0, q, radius, &mut buf),
            3 => self.count_rec::<3>(0, q, radius, &mut buf),
            4 => self.count_rec::<4>(0, q, radius, &mut buf),
            6 => self.count_rec::<6>(0, q, radius, &mut buf),
            _ => self.count_rec::<0>(0, q, radius, &mut buf),
        }
    }

    /// Lower and upper bounds of the max-norm distance from `q` to a node box.
    /// `D = 0` is the dynamic-dimension fallback.
    #[inline]
    fn box_bounds<const D: usize>(&self, node: u32, q: &[f64]) -> (f64, f64) {
        let dim = if D == 0 { self.dim } else { D };
        let base = node as usize * 2 * dim;
        let b = &self.boxes[base..base + 2 * dim];
        let (mut lo_d, mut hi_d) = (0.0f64, 0.0f64);
        for a in 0..dim {
            let lo = b[a];
            let hi = b[dim + a];
            let t = (lo - q[a]).max(q[a] - hi).max(0.0);
            if t > lo_d {
                lo_d = t;
            }
            let far = (q[a] - lo).max(hi - q[a]);
            if far > hi_d {
                hi_d = far;
            }
        }
        (lo_d, hi_d)
    }

    fn count_rec<const D: usize>(
        &self,
        node_id: u32,
        q: &[f64],
        radius: f64,
        buf: &mut [f64; LEAF_SIZE],
    ) -> usize {
        let node = self.nodes[node_id as usize];
        let (lo_d, hi_d) = self.box_bounds::<D>(node_id, q);
        if lo_d >= radius {
            return 0;
        }
        if hi_d < radius {
            return (node.hi - node.lo) as usize;
        }
        if node.left == u32::MAX {
            let (lo, hi) = (node.lo as usize, node.hi as usize);
            self.leaf_distances::<D>(q, lo, hi, buf);
            buf[..hi - lo]
                .iter()
                .map(|&d| usize::from(d < radius))
                .sum()
        } else {
            self.count_rec::<D>(node.left, q, radius, buf)
                + self.count_rec::<D>(node.right, q, radius, buf)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::RngStream;

    fn random_cloud(n: usize, dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::derived(seed, "kdtree-test", 0);
        (0..n * dim).map(|_| rng.next_normal()).collect()
    }

    fn brute_radius(data: &[f64], n: usize, dim: usize, i: usize, k: usize) -> f64 {
        let q = &data[i * dim..(i + 1) * dim];
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let row = &data[j * dim..(j + 1) * dim];
                let dist = q
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                (dist, j)
            })
            .collect();
        d.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
        d[k - 1].0
    }

    fn brute_count(data: &[f64], n: usize, dim: usize, i: usize, radius: f64) -> usize {
        let q = &data[i * dim..(i + 1) * dim];
        (0..n)
            .filter(|&j| j != i)
            .filter(|&j| {
                let row = &data[j * dim..(j + 1) * dim];
                q.iter()
                    .zip(row)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
                    < radius
            })
            .count()
    }

    #[test]
    fn matches_brute_force_on_random_clouds() {
        for trial in 0..6 {
            let n = 120 + 17 * trial;
            let dim = 1 + trial % 5;
            let data = random_cloud(n, dim, trial as u64);
            let tree = KdTree::build(&data, n, dim);
            for i in 0..n {
                for k in [1usize, 3, 7, 20] {
                    let fast = tree.knn_radius(&data[i * dim..(i + 1) * dim], k, i as u32);
                    let brute = brute_radius(&data, n, dim, i, k);
                    assert_eq!(fast, brute, "trial {trial}, i {i}, k {k}");
                }
                for radius in [0.0, 0.05, 0.3, 1.0, 10.0] {
                    let fast = tree
                        .count_within_strict(&data[i * dim..(i + 1) * dim], radius)
                        .saturating_sub(usize::from(radius > 0.0));
                    let brute = brute_count(&data, n, dim, i, radius);
                    assert_eq!(fast, brute, "trial {trial}, i {i}, r {radius}");
                }
            }
        }
    }

    #[test]
    fn duplicate_points_counted() {
        // Five copies of the same point: any positive radius sees all of them.
        let data = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let tree = KdTree::build(&data, 5, 2);
        assert_eq!(tree.count_within_strict(&data[0..2], 0.1), 5);
        assert_eq!(tree.count_within_strict(&data[0..2], 0.0), 0);
        assert_eq!(tree.knn_radius(&data[0..2], 3, 0), 0.0);
    }
}
