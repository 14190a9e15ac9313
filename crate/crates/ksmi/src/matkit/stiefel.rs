//! Haar-uniform sampling on the Stiefel manifold St(k, d), the set of d x k
//! matrices with orthonormal columns. The sampler fills a d x k matrix with
//! i.i.d. standard normals and orthonormalizes it with the thin QR; with the
//! non-negative-diagonal-R sign convention the Q factor is exactly
//! Haar-distributed, and the whole draw is deterministic per stream.

use crate::error::{Error, Result};
use crate::matkit::matrix::{qr_orthonormalize, Matrix};
use crate::matkit::rng::RngStream;

/// A sampled projection frame in St(k, d): `cols` is d x k with
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct StiefelFrame {
    d: usize,
    k: usize,
    cols: Matrix,
}

impl StiefelFrame {
    /// Wrap a d x k matrix, checking the orthonormality invariant
    /// (`||A^T A - I||_F < 1e-10`).
    pub fn from_matrix(cols: Matrix) -> Result<Self> {
        let (d, k) = (cols.rows(), cols.cols());
        if k == 0 || k > d {
            return Err(Error::InvalidShape(format!(
                "Stiefel frame needs 1 <= k <= d, got d={d}, k={k}"
            )));
        }
        let err = cols
            .gram()
            .sub(&Matrix::identity(k))
            .expect("gram is k x k")
            .frobenius_norm();
        if err >= 1e-10 {
            return Err(Error::InvalidShape(format!(
                "columns are not orthonormal: ||A^T A - I||_F = {err:e}"
            )));
        }
        Ok(StiefelFrame { d, k, cols })
    }

    /// The d x k frame embedding the first k coordinates (columns of I_d).
    pub fn coordinate(d: usize, k: usize) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::InvalidShape(format!(
                "coordinate frame needs 1 <= k <= d, got d={d}, k={k}"
            )));
        }
        let mut m = Matrix::zeros(d, k);
        for j in 0..k {
            m.set(j, j, 1.0);
        }
        Ok(StiefelFrame { d, k, cols: m })
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn projection_dim(&self) -> usize {
        self.k
    }

    pub fn cols(&self) -> &Matrix {
        &self.cols
    }

    /// `||A^T A - I_k||_F`, for invariant checks.
    pub fn orthonormality_error(&self) -> f64 {
        self.cols
            .gram()
            .sub(&Matrix::identity(self.k))
            .expect("gram is k x k")
            .frobenius_norm()
    }

    /// Frame made of the first `k1 <= k` columns (still orthonormal). Used for
    /// the coupled monotonicity construction, where a k1-frame is read off a
    /// k2-frame.
    pub fn leading_columns(&self, k1: usize) -> Result<StiefelFrame> {
        if k1 == 0 || k1 > self.k {
            return Err(Error::invalid_arg(
                "k1",
                format!("need 1 <= k1 <= {}, got {k1}", self.k),
            ));
        }
        Ok(StiefelFrame {
            d: self.d,
            k: k1,
            cols: self.cols.columns(0, k1),
        })
    }
}

/// Matrix of i.i.d. standard normal draws; deterministic for a fixed stream.
pub fn sample_gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> Result<Matrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidShape(format!(
            "gaussian matrix needs rows, cols >= 1, got {rows}x{cols}"
        )));
    }
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.next_normal()).collect();
    Matrix::new(rows, cols, data)
}

/// Haar-uniform draw from St(k, d).
pub fn sample_stiefel(k: usize, d: usize, rng: &mut RngStream) -> Result<StiefelFrame> {
    if k == 0 || k > d {
        return Err(Error::invalid_arg(
            "k",
            format!("need 1 <= k <= d, got k={k}, d={d}"),
        ));
    }
    let gaussian = sample_gaussian_matrix(d, k, rng)?;
    let q = qr_orthonormalize(&gaussian)?;
    StiefelFrame::from_matrix(q)
}
