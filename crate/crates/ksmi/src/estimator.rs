//! The sliced mutual information estimator: draw `m` Haar frame pairs,
//! project the samples through each pair, run an inner MI estimator per
//! projection, and average. Also houses its diagnostics — the Monte Carlo
//! error bound with the explicit dimension dependence, the Gaussian-surrogate
//! residual decomposition, and a numerical check of the projected-entropy
//! Lipschitz inequality.

use crate::error::{Error, Result};
use crate::gaussmodel::{
    fit_cross_block, frame_pair, gaussian_ksmi_exact_mc, mean_and_std, GaussianJoint,
};
use crate::knn_mi::{ksg_mi, KsgConfig};
use crate::matkit::{empirical_covariance, sym_eig, RngStream, StiefelFrame};
use crate::neural_mi::{train_dv_mi, TrainConfig};
use crate::samples::PairedSamples;
use rayon::prelude::*;

/// Inner per-projection MI estimator choice.
#[derive(Debug, Clone)]
pub enum InnerEstimator {
    Ksg(KsgConfig),
    Neural { hidden: usize, train: TrainConfig },
}

/// Configuration of the sliced-MI estimator.
#[derive(Debug, Clone)]
pub struct KsmiConfig {
    /// Projection dimension, `1 <= k <= min(dx, dy)`.
    pub k: usize,
    /// Number of Monte Carlo projection pairs (`m`).
    pub projections: usize,
    pub inner: InnerEstimator,
    pub seed: u64,
}

/// Estimate plus per-projection diagnostics.
#[derive(Debug, Clone)]
pub struct KsmiReport {
    /// Mean of the per-projection MI estimates, in nats.
    pub estimate: f64,
    pub per_projection_mi: Vec<f64>,
    /// Sample standard deviation (1/(m-1)) of the per-projection values;
    /// zero when m = 1.
    pub empirical_std: f64,
    /// Theorem-style Monte Carlo bound; only populated when the caller has a
    /// Gaussian model (operator norms) to compute it from.
    pub theory_bound: Option<f64>,
    pub k: usize,
    pub projections: usize,
    pub n: usize,
}

/// Gaussian-residual decomposition of an estimate.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// `ksmi_hat - ksmi_gauss`: the non-Gaussianity residual.
    pub residual: f64,
    /// Sliced-MI estimate on the data.
    pub ksmi_hat: f64,
    /// Exact-oracle sliced MI of the moment-matched Gaussian surrogate.
    pub ksmi_gauss: f64,
}

/// Project paired samples through a frame pair; rows stay aligned.
pub fn project_samples(
    samples: &PairedSamples,
    a: &StiefelFrame,
    b: &StiefelFrame,
) -> Result<PairedSamples> {
    if a.ambient_dim() != samples.dim_x() || b.ambient_dim() != samples.dim_y() {
        return Err(Error::DimensionMismatch {
            expected: format!(
                "frames over R^{} and R^{}",
                samples.dim_x(),
                samples.dim_y()
            ),
            got: format!("R^{} and R^{}", a.ambient_dim(), b.ambient_dim()),
        });
    }
    if a.projection_dim() != b.projection_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("matching projection dims (k = {})", a.projection_dim()),
            got: format!("k = {}", b.projection_dim()),
        });
    }
    PairedSamples::new(samples.x().mul(a.cols())?, samples.y().mul(b.cols())?)
}

fn run_inner(projected: &PairedSamples, inner: &InnerEstimator, seed: u64) -> Result<f64> {
    match inner {
        InnerEstimator::Ksg(cfg) => ksg_mi(projected, cfg),
        InnerEstimator::Neural { hidden, train } => {
            // Each projection trains its own network from a seed derived off
            // the projection substream, keeping parallel runs reproducible.
            let cfg = TrainConfig {
                seed,
                ..train.clone()
            };
            train_dv_mi(projected, *hidden, &cfg).map(|(estimate, _)| estimate)
        }
    }
}

/// The sliced-MI estimator: `m` i.i.d. frame pairs, one inner MI estimate per
/// projected dataset, averaged. Deterministic per seed and independent of the
/// parallel schedule; a failed inner estimation aborts the run with its
/// projection index (silently skipping would bias the mean).
pub fn estimate_ksmi(samples: &PairedSamples, cfg: &KsmiConfig) -> Result<KsmiReport> {
    let (dx, dy) = (samples.dim_x(), samples.dim_y());
    if cfg.k == 0 || cfg.k > dx.min(dy) {
        return Err(Error::invalid_arg(
            "k",
            format!("need 1 <= k <= min(dx, dy) = {}, got {}", dx.min(dy), cfg.k),
        ));
    }
    if cfg.projections == 0 {
        return Err(Error::invalid_arg("projections", "need m >= 1"));
    }

    let estimate_one = |j: u64| -> Result<f64> {
        let (a, b) = frame_pair(cfg.seed, "ksmi/frame-a", "ksmi/frame-b", j, cfg.k, dx, dy)?;
        let projected = project_samples(samples, &a, &b)?;
        run_inner(
            &projected,
            &cfg.inner,
            RngStream::derived(cfg.seed, "ksmi/inner", j).stream_id(),
        )
    };

    let m = cfg.projections;
    let results: Vec<Result<f64>> = if rayon::current_num_threads() > 1 {
        (0..m as u64).into_par_iter().map(estimate_one).collect()
    } else {
        (0..m as u64).map(estimate_one).collect()
    };
    let mut per_projection = Vec::with_capacity(m);
    for (j, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => per_projection.push(v),
            Err(e) => {
                return Err(Error::InnerEstimation {
                    index: j,
                    source: Box::new(e),
                })
            }
        }
    }
    let (estimate, empirical_std) = mean_and_std(&per_projection);
    Ok(KsmiReport {
        estimate,
        per_projection_mi: per_projection,
        empirical_std,
        theory_bound: None,
        k: cfg.k,
        projections: m,
        n: samples.len(),
    })
}

/// Monte Carlo error bound with explicit dimension dependence:
/// `21 sqrt(fisher_op * max(sigma_x_op, sigma_y_op))
///  * sqrt(k (dx + dy) / (dx dy)) / sqrt(m)`.
///
/// The inner-estimator error term is not computable and is excluded; callers
/// report it separately as unknown. All inputs must be positive.
pub fn mc_error_bound(
    k: usize,
    dx: usize,
    dy: usize,
    m: usize,
    sigma_x_op: f64,
    sigma_y_op: f64,
    fisher_op: f64,
) -> f64 {
    let constant = 21.0 * (fisher_op * sigma_x_op.max(sigma_y_op)).sqrt();
    let dims = (k as f64 * (dx + dy) as f64 / (dx as f64 * dy as f64)).sqrt();
    constant * dims / (m as f64).sqrt()
}

/// The bound evaluated from a Gaussian model's spectra (with `J = Sigma^{-1}`).
pub fn mc_error_bound_for_model(model: &GaussianJoint, k: usize, m: usize) -> Result<f64> {
    let sx = crate::matkit::operator_norm(model.sigma_x());
    let sy = crate::matkit::operator_norm(model.sigma_y());
    let fisher = crate::gaussmodel::fisher_opnorm(model)?;
    Ok(mc_error_bound(
        k,
        model.dim_x(),
        model.dim_y(),
        m,
        sx,
        sy,
        fisher,
    ))
}

/// Moment-matched Gaussian surrogate: zero-mean joint Gaussian with the
/// empirical covariance of the data (PSD up to the eigenvalue floor applied
/// by consumers). Callers should have `n >= dx + dy + 1` for a well-
/// conditioned fit; the function only requires `n >= 2`.
pub fn fit_gaussian_surrogate(samples: &PairedSamples) -> Result<GaussianJoint> {
    let cov = empirical_covariance(&samples.joint())?;
    let dx = samples.dim_x();
    fit_cross_block(&cov, dx, samples.dim_y())
}

/// Number of oracle projections used for the Gaussian side of the residual
/// decomposition.
const RESIDUAL_ORACLE_PROJECTIONS: usize = 5000;

/// Residual of the Gaussian decomposition: the sliced-MI estimate on the data
/// minus the exact-oracle sliced MI of the moment-matched Gaussian surrogate
/// (same k, large oracle m). Exactly Gaussian data gives a residual within
/// estimator bias of zero; the gap measures average non-Gaussianity over
/// projections.
pub fn residual_vs_gaussian(samples: &PairedSamples, cfg: &KsmiConfig) -> Result<ResidualReport> {
    let report = estimate_ksmi(samples, cfg)?;
    let surrogate = fit_gaussian_surrogate(samples)?;
    let oracle_seed = RngStream::derived(cfg.seed, "residual/oracle", 0).stream_id();
    let (ksmi_gauss, _) =
        gaussian_ksmi_exact_mc(&surrogate, cfg.k, RESIDUAL_ORACLE_PROJECTIONS, oracle_seed)?;
    Ok(ResidualReport {
        residual: report.estimate - ksmi_gauss,
        ksmi_hat: report.estimate,
        ksmi_gauss,
    })
}

/// Numerical check of the projected-entropy Lipschitz inequality on the
/// X-marginal of a Gaussian model, where both sides are exact:
///
/// ```text
/// |h(A^T X) - h(B^T X)| <= sqrt(k ||J||_op ||Sigma_X||_op) ||A - B||_F
/// ```
///
/// with `h(A^T X) = 1/2 ln((2 pi e)^k det(A^T Sigma_X A))` and
/// `J = Sigma_X^{-1}`. Returns the maximum of (left side - right side) over
/// `trials` random frame pairs; the inequality holds iff the result is <= ~0.
pub fn lipschitz_check(model: &GaussianJoint, k: usize, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid_arg("trials", "need trials >= 1"));
    }
    let d = model.dim_x();
    if k == 0 || k > d {
        return Err(Error::invalid_arg("k", format!("need 1 <= k <= {d}")));
    }
    let (eig, _) = sym_eig(model.sigma_x())?;
    let lambda_min = eig.first().copied().unwrap_or(0.0);
    let lambda_max = eig.last().copied().unwrap_or(0.0);
    if lambda_min <= 0.0 {
        return Err(Error::Singular("Sigma_X must be positive definite".into()));
    }
    let lipschitz = (k as f64 * (1.0 / lambda_min) * lambda_max).sqrt();

    let projected_entropy = |f: &StiefelFrame| -> Result<f64> {
        let g = f.cols().transpose().mul(&model.sigma_x().mul(f.cols())?)?;
        let (eig, _) = sym_eig(&g)?;
        let log_det: f64 = eig.iter().map(|&l| l.max(f64::MIN_POSITIVE).ln()).sum();
        let tau = std::f64::consts::TAU; // 2 pi
        Ok(0.5 * (k as f64 * (tau * std::f64::consts::E).ln() + log_det))
    };

    let mut worst = f64::NEG_INFINITY;
    for j in 0..trials as u64 {
        let (a, b) = frame_pair(seed, "lipschitz/frame-a", "lipschitz/frame-b", j, k, d, d)?;
        let lhs = (projected_entropy(&a)? - projected_entropy(&b)?).abs();
        let rhs = lipschitz * a.cols().sub(b.cols())?.frobenius_norm();
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}
