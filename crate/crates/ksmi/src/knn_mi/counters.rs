//! Dimension-specialized strict-radius counters for the KSG marginal counts.
//!
//! All counters answer the same question as a linear scan — how many stored
//! points sit at max-norm distance strictly less than `radius` from the query
//! (the query point itself included when it is stored) — and agree with the
//! scan exactly. Boundary decisions are made on true point coordinates (cell
//! bounding boxes, predicate-based boundary walks), never on binning
//! arithmetic, so floating-point round-off in the bucketing cannot change a
//! count.

use super::kdtree::KdTree;

pub enum MarginalCounter {
    Sorted1D(Vec<f64>),
    Grid2D(Grid2),
    Tree(KdTree),
}

impl MarginalCounter {
    /// Build a counter over `n` points of dimension `dim` (row-major `flat`).
    /// `radii` are the query radii this counter will serve; the 2-D grid uses
    /// their median as its cell size.
    pub fn build(flat: &[f64], n: usize, dim: usize, radii: &[f64]) -> MarginalCounter {
        match dim {
            1 => {
                let mut v = flat.to_vec();
                v.sort_unstable_by(f64::total_cmp);
                MarginalCounter::Sorted1D(v)
            }
            2 => MarginalCounter::Grid2D(Grid2::build(flat, n, median(radii))),
            _ => MarginalCounter::Tree(KdTree::build(flat, n, dim)),
        }
    }

    /// Points at max-norm distance strictly less than `radius` from `q`,
    /// including the query point itself when it is stored.
    #[inline]
    pub fn count_strict(&self, q: &[f64], radius: f64) -> usize {
        if radius <= 0.0 {
            return 0;
        }
        match self {
            MarginalCounter::Sorted1D(v) => count_sorted(v, q[0], radius),
            MarginalCounter::Grid2D(g) => g.count_strict(q[0], q[1], radius),
            MarginalCounter::Tree(t) => t.count_within_strict(q, radius),
        }
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

/// 1-D strict count: binary-search the sorted array near `q +/- radius`, then
/// walk the boundary with the exact `|q - p| < radius` predicate. The walks
/// absorb any round-off difference between `p < q + radius` and
/// `|q - p| < radius`.
fn count_sorted(v: &[f64], q: f64, radius: f64) -> usize {
    let n = v.len();
    let mut lo = v.partition_point(|&p| p < q - radius);
    while lo > 0 && (q - v[lo - 1]).abs() < radius {
        lo -= 1;
    }
    while lo < n && (q - v[lo]).abs() >= radius {
        lo += 1;
    }
    let mut hi = v.partition_point(|&p| p < q + radius);
    while hi < n && (q - v[hi]).abs() < radius {
        hi += 1;
    }
    while hi > lo && (q - v[hi - 1]).abs() >= radius {
        hi -= 1;
    }
    hi - lo
}

/// Uniform 2-D grid with per-cell point bounding boxes and CSR point storage.
/// Coordinates are kept in separate arrays so cell scans vectorize.
pub struct Grid2 {
    x0: f64,
    y0: f64,
    inv_h: f64,
    ncx: usize,
    ncy: usize,
    start: Vec<u32>,
    xs: Vec<f64>,          // repacked x coordinates in cell order
    ys: Vec<f64>,          // repacked y coordinates in cell order
    cell_bounds: Vec<f64>, // per cell: min_x, max_x, min_y, max_y of actual points
}

impl Grid2 {
    fn build(flat: &[f64], n: usize, cell_hint: f64) -> Grid2 {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let (x, y) = (flat[2 * i], flat[2 * i + 1]);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span_x = (x1 - x0).max(0.0);
        let span_y = (y1 - y0).max(0.0);
        // Cell size near the typical query radius, but never so small that the
        // grid outgrows ~2n cells.
        let floor_h = ((span_x * span_y) / (2.0 * n as f64).max(1.0)).sqrt();
        let h = cell_hint.max(floor_h).max(1e-300);
        let ncx = ((span_x / h).ceil() as usize + 1).max(1);
        let ncy = ((span_y / h).ceil() as usize + 1).max(1);
        let cells = ncx * ncy;

        let inv_h = 1.0 / h;
        let cell_of = |x: f64, y: f64| -> usize {
            let cx = (((x - x0) * inv_h) as usize).min(ncx - 1);
            let cy = (((y - y0) * inv_h) as usize).min(ncy - 1);
            cy * ncx + cx
        };

        let mut counts = vec![0u32; cells + 1];
        for i in 0..n {
            counts[cell_of(flat[2 * i], flat[2 * i + 1]) + 1] += 1;
        }
        for c in 0..cells {
            counts[c + 1] += counts[c];
        }
        let start = counts;
        let mut cursor = start.clone();
        let mut xs = vec![0.0f64; n];
        let mut ys = vec![0.0f64; n];
        let mut cell_bounds = vec![f64::INFINITY; 4 * cells];
        for c in 0..cells {
            cell_bounds[4 * c + 1] = f64::NEG_INFINITY;
            cell_bounds[4 * c + 3] = f64::NEG_INFINITY;
        }
        for i in 0..n {
            let (x, y) = (flat[2 * i], flat[2 * i + 1]);
            let c = cell_of(x, y);
            let slot = cursor[c] as usize;
            cursor[c] += 1;
            xs[slot] = x;
            ys[slot] = y;
            let b = &mut cell_bounds[4 * c..4 * c + 4];
            b[0] = b[0].min(x);
            b[1] = b[1].max(x);
            b[2] = b[2].min(y);
            b[3] = b[3].max(y);
        }
        Grid2 {
            x0,
            y0,
            inv_h,
            ncx,
            ncy,
            start,
            xs,
            ys,
            cell_bounds,
        }
    }

    fn count_strict(&self, qx: f64, qy: f64, radius: f64) -> usize {
        // Candidate cell range, widened by a relative epsilon that dominates
        // the binning round-off (a few ulps); correctness never depends on the
        // range because cells are judged by their actual point bounds.
        const WIDEN: f64 = 1e-9;
        let cell_lo = |v: f64, origin: f64| -> usize {
            let t = (v - origin) * self.inv_h;
            let t = t - t.abs() * WIDEN - WIDEN;
            if t <= 0.0 {
                0
            } else {
                t as usize
            }
        };
        let cell_hi = |v: f64, origin: f64, nc: usize| -> usize {
            let t = (v - origin) * self.inv_h;
            let t = t + t.abs() * WIDEN + WIDEN;
            if t <= 0.0 {
                0
            } else {
                (t as usize).min(nc - 1)
            }
        };
        let cx_lo = cell_lo(qx - radius, self.x0);
        let cx_hi = cell_hi(qx + radius, self.x0, self.ncx);
        let cy_lo = cell_lo(qy - radius, self.y0);
        let cy_hi = cell_hi(qy + radius, self.y0, self.ncy);
        let mut count = 0usize;
        for cy in cy_lo..=cy_hi {
            for cx in cx_lo..=cx_hi {
                let c = cy * self.ncx + cx;
                let b = &self.cell_bounds[4 * c..4 * c + 4];
                // Empty cells carry an inverted box and fail the near test.
                let near = (b[0] - qx)
                    .max(qx - b[1])
                    .max(b[2] - qy)
                    .max(qy - b[3])
                    .max(0.0);
                if near >= radius {
                    continue;
                }
                let far = (qx - b[0]).max(b[1] - qx).max((qy - b[2]).max(b[3] - qy));
                let (lo, hi) = (self.start[c] as usize, self.start[c + 1] as usize);
                if far < radius {
                    count += hi - lo;
                    continue;
                }
                count += self.xs[lo..hi]
                    .iter()
                    .zip(&self.ys[lo..hi])
                    .map(|(&px, &py)| usize::from((qx - px).abs().max((qy - py).abs()) < radius))
                    .sum::<usize>();
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::RngStream;

    fn brute(flat: &[f64], n: usize, dim: usize, q: &[f64], radius: f64) -> usize {
        (0..n)
            .filter(|&j| {
                let row = &flat[j * dim..(j + 1) * dim];
                q.iter()
                    .zip(row)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
                    < radius
            })
            .count()
    }

    #[test]
    fn sorted_counter_matches_brute() {
        let mut rng = RngStream::derived(5, "counter-1d", 0);
        let n = 500;
        let flat: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
        let radii: Vec<f64> = (0..n).map(|_| 0.05 + rng.next_f64() * 0.4).collect();
        let counter = MarginalCounter::build(&flat, n, 1, &radii);
        for i in 0..n {
            let got = counter.count_strict(&flat[i..i + 1], radii[i]);
            let want = brute(&flat, n, 1, &flat[i..i + 1], radii[i]);
            assert_eq!(got, want, "i = {i}");
        }
        // Zero radius and exact-boundary radius.
        assert_eq!(counter.count_strict(&flat[0..1], 0.0), 0);
        let exact = (flat[0] - flat[1]).abs();
        let got = counter.count_strict(&flat[0..1], exact);
        assert_eq!(got, brute(&flat, n, 1, &flat[0..1], exact));
    }

    #[test]
    fn grid_counter_matches_brute() {
        for seed in 0..4 {
            let mut rng = RngStream::derived(seed, "counter-2d", 0);
            let n = 400;
            let flat: Vec<f64> = (0..2 * n).map(|_| rng.next_normal()).collect();
            let radii: Vec<f64> = (0..n).map(|_| 0.02 + rng.next_f64() * 0.6).collect();
            let counter = MarginalCounter::build(&flat, n, 2, &radii);
            for i in 0..n {
                let q = &flat[2 * i..2 * i + 2];
                let got = counter.count_strict(q, radii[i]);
                let want = brute(&flat, n, 2, q, radii[i]);
                assert_eq!(got, want, "seed {seed}, i = {i}");
            }
        }
    }

    #[test]
    fn grid_handles_duplicates_and_degenerate_spans() {
        // All points on a vertical line, with duplicates.
        let flat = vec![1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.5];
        let counter = MarginalCounter::build(&flat, 4, 2, &[0.5]);
        // Strict counts include the query point itself (both duplicates here).
        assert_eq!(counter.count_strict(&[1.0, 1.0], 0.5), 2);
        assert_eq!(counter.count_strict(&[1.0, 1.0], 2.0), 4);
        assert_eq!(counter.count_strict(&[1.0, 1.0], 0.0), 0);
    }
}
