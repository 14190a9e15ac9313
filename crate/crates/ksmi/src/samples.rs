//! Paired sample container: n aligned observations of (X, Y).

use crate::error::{Error, Result};
use crate::matkit::Matrix;

/// `n` paired observations; row `i` of `x` pairs with row `i` of `y`.
#[derive(Debug, Clone)]
pub struct PairedSamples {
    x: Matrix,
    y: Matrix,
}

impl PairedSamples {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.rows() != y.rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} paired rows", x.rows()),
                got: format!("{} y rows", y.rows()),
            });
        }
        if x.rows() == 0 {
            return Err(Error::InvalidShape("need at least one sample".into()));
        }
        if x.cols() == 0 || y.cols() == 0 {
            return Err(Error::InvalidShape("sample dimensions must be >= 1".into()));
        }
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite("sample entries must be finite".into()));
        }
        Ok(PairedSamples { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees n >= 1
    }

    pub fn dim_x(&self) -> usize {
        self.x.cols()
    }

    pub fn dim_y(&self) -> usize {
        self.y.cols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &Matrix {
        &self.y
    }

    /// Joint rows `[x_i | y_i]` as one n x (dx + dy) matrix.
    pub fn joint(&self) -> Matrix {
        let (n, dx, dy) = (self.len(), self.dim_x(), self.dim_y());
        let mut joint = Matrix::zeros(n, dx + dy);
        for i in 0..n {
            for (j, &v) in self.x.row(i).iter().enumerate() {
                joint.set(i, j, v);
            }
            for (j, &v) in self.y.row(i).iter().enumerate() {
                joint.set(i, dx + j, v);
            }
        }
        joint
    }

    /// New pair with the y rows re-indexed by `perm` (x rows untouched).
    /// With a fixed-point-free `perm` this breaks dependence while keeping
    /// both marginals exactly.
    pub fn permute_y(&self, perm: &[usize]) -> Result<PairedSamples> {
        let n = self.len();
        if perm.len() != n {
            return Err(Error::invalid_arg(
                "perm",
                format!("permutation length {} != n = {n}", perm.len()),
            ));
        }
        let mut y = Matrix::zeros(n, self.dim_y());
        for (i, &src) in perm.iter().enumerate() {
            if src >= n {
                return Err(Error::invalid_arg(
                    "perm",
                    format!("index {src} out of range"),
                ));
            }
            for (j, &v) in self.y.row(src).iter().enumerate() {
                y.set(i, j, v);
            }
        }
        PairedSamples::new(self.x.clone(), y)
    }
}
