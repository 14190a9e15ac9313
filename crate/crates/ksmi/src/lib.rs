//! # ksmi
//!
//! Estimation of k-sliced mutual information (k-SMI) between high-dimensional
//! samples: the average mutual information between random k-dimensional
//! orthonormal projections `A^T X` and `B^T Y`, with `(A, B)` Haar-uniform on
//! Stiefel manifolds.
//!
//! The crate provides:
//!
//! - [`matkit`]: dense linear algebra, deterministic splittable randomness,
//!   and Haar sampling on St(k, d);
//! - [`gaussmodel`]: exact Gaussian oracles (closed-form MI, projected MI,
//!   a zero-sample-noise Monte Carlo oracle, large-d asymptotics) plus
//!   synthetic data generators;
//! - [`knn_mi`]: the Kraskov-Stoegbauer-Grassberger k-nearest-neighbor MI
//!   estimator with a max-norm k-d tree behind it;
//! - [`neural_mi`]: a Donsker-Varadhan neural MI estimator over a
//!   single-hidden-layer ReLU class with hand-written gradients;
//! - [`estimator`]: the sliced-MI estimator (project m times, estimate MI per
//!   projection, average), its Monte Carlo error bound, the Gaussian-residual
//!   decomposition, and a projected-entropy Lipschitz check;
//! - [`bench`](crate::bench): the synthetic experiment harness (dimension
//!   decay, independence-testing ROC/AUC, neural convergence sweeps).
//!
//! All information quantities are in nats. Every random quantity is drawn
//! from seeded counter-based streams, so every result in the crate is
//! bit-reproducible for a fixed seed, independent of thread count.

pub mod bench;
pub mod error;
pub mod estimator;
pub mod gaussmodel;
pub mod knn_mi;
pub mod matkit;
pub mod neural_mi;
pub mod samples;

pub use error::{Error, Result};
pub use samples::PairedSamples;
