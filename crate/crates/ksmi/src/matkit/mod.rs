//! Dense linear algebra, deterministic splittable randomness, and Stiefel
//! manifold sampling. Everything downstream builds on this module.

mod digamma;
mod matrix;
mod rng;
mod stiefel;

pub use digamma::digamma;
pub use matrix::{
    empirical_covariance, matrix_sqrt_psd, operator_norm, qr_orthonormalize, sym_eig, Matrix,
};
pub use rng::{stream_id, RngStream};
pub use stiefel::{sample_gaussian_matrix, sample_stiefel, StiefelFrame};
