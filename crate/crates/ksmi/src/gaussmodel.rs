//! Exact Gaussian ground truth: closed-form mutual information, projected MI,
//! Monte Carlo sliced-MI oracles with zero sample noise, large-d asymptotics,
//! and the synthetic data generators behind the benchmark harness.
//!
//! For a zero-mean jointly Gaussian pair with marginal covariances `Sigma_X`,
//! `Sigma_Y` and cross-covariance `C`, everything reduces to the correlation
//! matrix `R = Sigma_X^{-1/2} C Sigma_Y^{-1/2}`:
//!
//! - `I(X; Y) = -1/2 log det(I - R R^T)`
//! - `I(A^T X; B^T Y) = -1/2 log det(I_k - Rp Rp^T)` where `Rp` is the
//!   correlation matrix of the projected pair. `Rp` is computed here directly
//!   from the projected covariance blocks, which is algebraically identical to
//!   whitening the frames first but never requires inverting the ambient
//!   covariances.

use crate::error::{Error, Result};
use crate::matkit::{
    matrix_sqrt_psd, operator_norm, sample_gaussian_matrix, sample_stiefel, sym_eig, Matrix,
    RngStream, StiefelFrame,
};
use crate::samples::PairedSamples;

/// Zero-mean joint Gaussian model over (X, Y).
#[derive(Debug, Clone)]
pub struct GaussianJoint {
    sigma_x: Matrix,
    sigma_y: Matrix,
    cross: Matrix,
}

/// Synthetic model selector for the experiment harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticFamily {
    /// `X = P1 V + Z1`, `Y = P2 V + Z2` with a shared rank-`rank` signal V.
    CommonSignal { rank: usize },
    /// `X ~ N(0, I_d)`, `Y` encodes one sinusoidal feature of X plus noise.
    Sinusoidal,
}

/// A d-indexed synthetic model description (family + dimension + seed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticModelSpec {
    pub family: SyntheticFamily,
    pub d: usize,
    pub seed: u64,
}

impl SyntheticModelSpec {
    /// The underlying Gaussian model, when the family has one (the sinusoidal
    /// family is sample-defined and has no closed-form covariance model).
    pub fn gaussian(&self) -> Result<Option<GaussianJoint>> {
        match self.family {
            SyntheticFamily::CommonSignal { rank } => {
                Ok(Some(make_common_signal_model(self.d, rank, self.seed)?))
            }
            SyntheticFamily::Sinusoidal => Ok(None),
        }
    }

    /// Draw `n` dependent samples from the family.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<PairedSamples> {
        match self.family {
            SyntheticFamily::CommonSignal { .. } => {
                let model = self.gaussian()?.expect("common-signal is Gaussian");
                sample_joint(&model, n, rng)
            }
            SyntheticFamily::Sinusoidal => sample_sinusoidal_model(self.d, n, rng),
        }
    }
}

/// Theorem-style regularity diagnostics for the asymptotic formula: marginal
/// condition numbers and the correlation operator norm. These are reported as
/// warnings by callers, never hard errors — the asymptotic value is still a
/// useful diagnostic outside its guarantee zone.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticConditions {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub rho: f64,
    pub satisfied: bool,
}

const SINGULAR_FLOOR: f64 = 1e-12;
const CORRELATION_CLAMP: f64 = 1.0 - 1e-10;

impl GaussianJoint {
    /// Build a model, validating that the assembled joint covariance
    /// `[[Sigma_X, C], [C^T, Sigma_Y]]` is symmetric PSD.
    pub fn new(sigma_x: Matrix, sigma_y: Matrix, cross: Matrix) -> Result<Self> {
        if sigma_x.rows() != sigma_x.cols() || sigma_y.rows() != sigma_y.cols() {
            return Err(Error::InvalidShape(
                "marginal covariances must be square".into(),
            ));
        }
        if cross.rows() != sigma_x.rows() || cross.cols() != sigma_y.rows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} cross block", sigma_x.rows(), sigma_y.rows()),
                got: format!("{}x{}", cross.rows(), cross.cols()),
            });
        }
        let joint = Matrix::block_symmetric(&sigma_x, &cross, &sigma_y)?;
        let (eig, _) = sym_eig(&joint)?;
        let lambda_max = eig.last().copied().unwrap_or(0.0).max(0.0);
        if let Some(&lambda_min) = eig.first() {
            if lambda_min < -1e-8 * lambda_max.max(1e-300) {
                return Err(Error::NotPsd {
                    eigenvalue: lambda_min,
                });
            }
        }
        Ok(GaussianJoint {
            sigma_x,
            sigma_y,
            cross,
        })
    }

    pub fn dim_x(&self) -> usize {
        self.sigma_x.rows()
    }

    pub fn dim_y(&self) -> usize {
        self.sigma_y.rows()
    }

    pub fn sigma_x(&self) -> &Matrix {
        &self.sigma_x
    }

    pub fn sigma_y(&self) -> &Matrix {
        &self.sigma_y
    }

    pub fn cross(&self) -> &Matrix {
        &self.cross
    }

    /// The assembled (dx + dy) x (dx + dy) joint covariance.
    pub fn joint_covariance(&self) -> Matrix {
        Matrix::block_symmetric(&self.sigma_x, &self.cross, &self.sigma_y)
            .expect("blocks validated at construction")
    }

    /// Independent model with the same marginals (cross block zeroed).
    pub fn independent_copy(&self) -> GaussianJoint {
        GaussianJoint {
            sigma_x: self.sigma_x.clone(),
            sigma_y: self.sigma_y.clone(),
            cross: Matrix::zeros(self.dim_x(), self.dim_y()),
        }
    }
}

/// Inverse square root of a symmetric PD matrix; errors when the smallest
/// eigenvalue is below `1e-12` times the largest.
fn inverse_sqrt_pd(m: &Matrix, what: &str) -> Result<Matrix> {
    let (eig, v) = sym_eig(m)?;
    let lambda_max = eig.last().copied().unwrap_or(0.0);
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for (idx, &l) in eig.iter().enumerate() {
        if l <= SINGULAR_FLOOR * lambda_max.max(1e-300) {
            return Err(Error::Singular(format!(
                "{what} is singular (eigenvalue {l:e})"
            )));
        }
        let w = 1.0 / l.sqrt();
        for i in 0..n {
            for j in i..n {
                let add = v.get(i, idx) * w * v.get(j, idx);
                let cur = out.get(i, j) + add;
                out.set(i, j, cur);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = out.get(j, i);
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Squared singular values of `r` (eigenvalues of `r r^T`, using the smaller
/// Gram side), clamped into `[0, 1]`-ish territory by the caller.
fn squared_singular_values(r: &Matrix) -> Result<Vec<f64>> {
    let g = if r.rows() <= r.cols() {
        r.transpose().gram()
    } else {
        r.gram()
    };
    let (eig, _) = sym_eig(&g)?;
    Ok(eig.into_iter().map(|l| l.max(0.0)).collect())
}

/// Exact mutual information in nats: `-1/2 log det(I - R R^T)`.
///
/// Errors when a marginal covariance is singular or the correlation operator
/// norm reaches `1 - 1e-10` (the model is degenerate and MI diverges).
pub fn gaussian_mi(model: &GaussianJoint) -> Result<f64> {
    let isx = inverse_sqrt_pd(&model.sigma_x, "Sigma_X")?;
    let isy = inverse_sqrt_pd(&model.sigma_y, "Sigma_Y")?;
    let r = isx.mul(&model.cross)?.mul(&isy)?;
    let mut mi = 0.0;
    for s2 in squared_singular_values(&r)? {
        if s2.sqrt() >= CORRELATION_CLAMP {
            return Err(Error::DegenerateModel(format!(
                "correlation operator norm {} >= 1; mutual information diverges",
                s2.sqrt()
            )));
        }
        mi -= 0.5 * (1.0 - s2).ln();
    }
    Ok(mi.max(0.0))
}

/// Exact MI between the projections `A^T X` and `B^T Y`, in nats.
///
/// Computed from the projected covariance blocks; singular values of the
/// projected correlation matrix are clamped to `1 - 1e-10` before the
/// log-determinant (round-off can push them to 1 when the projected pair is
/// perfectly correlated).
pub fn projected_gaussian_mi(
    model: &GaussianJoint,
    a: &StiefelFrame,
    b: &StiefelFrame,
) -> Result<f64> {
    if a.ambient_dim() != model.dim_x() || b.ambient_dim() != model.dim_y() {
        return Err(Error::DimensionMismatch {
            expected: format!("frames over R^{} and R^{}", model.dim_x(), model.dim_y()),
            got: format!("R^{} and R^{}", a.ambient_dim(), b.ambient_dim()),
        });
    }
    if a.projection_dim() != b.projection_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("matching projection dims (k = {})", a.projection_dim()),
            got: format!("k = {}", b.projection_dim()),
        });
    }
    projected_mi_from_blocks(
        &a.cols().transpose().mul(&model.sigma_x.mul(a.cols())?)?,
        &b.cols().transpose().mul(&model.sigma_y.mul(b.cols())?)?,
        &a.cols().transpose().mul(&model.cross.mul(b.cols())?)?,
    )
}

/// MI of a k-dimensional Gaussian pair given its covariance blocks.
fn projected_mi_from_blocks(gx: &Matrix, gy: &Matrix, gxy: &Matrix) -> Result<f64> {
    let isx = inverse_sqrt_pd(gx, "projected Sigma_X")?;
    let isy = inverse_sqrt_pd(gy, "projected Sigma_Y")?;
    let corr = isx.mul(gxy)?.mul(&isy)?;
    let mut mi = 0.0;
    for s2 in squared_singular_values(&corr)? {
        let s = s2.sqrt().min(CORRELATION_CLAMP);
        mi -= 0.5 * (1.0 - s * s).ln();
    }
    Ok(mi.max(0.0))
}

/// Haar frame pair for Monte Carlo draw `j`, keyed by distinct purpose tags so
/// the A and B halves come from independent substreams.
pub(crate) fn frame_pair(
    seed: u64,
    tag_a: &str,
    tag_b: &str,
    j: u64,
    k: usize,
    dx: usize,
    dy: usize,
) -> Result<(StiefelFrame, StiefelFrame)> {
    let mut rng_a = RngStream::derived(seed, tag_a, j);
    let mut rng_b = RngStream::derived(seed, tag_b, j);
    Ok((
        sample_stiefel(k, dx, &mut rng_a)?,
        sample_stiefel(k, dy, &mut rng_b)?,
    ))
}

/// Monte Carlo estimate of the population sliced MI with the exact Gaussian
/// integrand (no sample noise): mean and per-projection standard deviation of
/// `projected_gaussian_mi` over `m` independent Haar frame pairs.
///
/// Deterministic per seed and independent of evaluation order.
pub fn gaussian_ksmi_exact_mc(
    model: &GaussianJoint,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if k == 0 || k > model.dim_x().min(model.dim_y()) {
        return Err(Error::invalid_arg(
            "k",
            format!(
                "need 1 <= k <= min(dx, dy) = {}, got {k}",
                model.dim_x().min(model.dim_y())
            ),
        ));
    }
    if m < 2 {
        return Err(Error::invalid_arg("m", format!("need m >= 2, got {m}")));
    }
    let values = exact_projected_mi_draws(model, k, m, seed)?;
    Ok(mean_and_std(&values))
}

/// The individual exact projected-MI draws behind [`gaussian_ksmi_exact_mc`].
pub fn exact_projected_mi_draws(
    model: &GaussianJoint,
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let results: Vec<Result<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|j| {
            let (a, b) = frame_pair(
                seed,
                "gauss-mc/frame-a",
                "gauss-mc/frame-b",
                j,
                k,
                model.dim_x(),
                model.dim_y(),
            )?;
            projected_gaussian_mi(model, &a, &b)
        })
        .collect();
    results.into_iter().collect()
}

pub(crate) fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    let std = if m >= 2 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Leading-order value of the Gaussian sliced MI for large dimensions:
/// `k^2 ||C||_F^2 / (2 Tr(Sigma_X) Tr(Sigma_Y))`.
pub fn gaussian_ksmi_asymptotic(model: &GaussianJoint, k: usize) -> f64 {
    let c2 = model.cross.frobenius_norm().powi(2);
    let tx: f64 = (0..model.dim_x()).map(|i| model.sigma_x.get(i, i)).sum();
    let ty: f64 = (0..model.dim_y()).map(|i| model.sigma_y.get(i, i)).sum();
    (k * k) as f64 * c2 / (2.0 * tx * ty)
}

/// Regularity diagnostics for the asymptotic formula. `satisfied` means both
/// marginals are non-singular and the correlation norm `rho` is below 1.
pub fn asymptotic_conditions(model: &GaussianJoint) -> Result<AsymptoticConditions> {
    let cond = |sigma: &Matrix| -> Result<f64> {
        let (eig, _) = sym_eig(sigma)?;
        let (lo, hi) = (
            eig.first().copied().unwrap_or(0.0),
            eig.last().copied().unwrap_or(0.0),
        );
        Ok(if lo <= 0.0 { f64::INFINITY } else { hi / lo })
    };
    let kappa_x = cond(&model.sigma_x)?;
    let kappa_y = cond(&model.sigma_y)?;
    let rho = if kappa_x.is_finite() && kappa_y.is_finite() {
        let isx = inverse_sqrt_pd(&model.sigma_x, "Sigma_X")?;
        let isy = inverse_sqrt_pd(&model.sigma_y, "Sigma_Y")?;
        // The guarantee is stated for ||Sigma_X^{-1/2} C Sigma_Y^{-1}||_op.
        operator_norm(&isx.mul(&model.cross)?.mul(&isy.mul(&isy)?)?)
    } else {
        f64::INFINITY
    };
    Ok(AsymptoticConditions {
        kappa_x,
        kappa_y,
        rho,
        satisfied: kappa_x.is_finite() && kappa_y.is_finite() && rho < 1.0,
    })
}

/// Operator norm of the Gaussian Fisher information matrix
/// `J = Sigma_XY^{-1}`, i.e. `1 / lambda_min(Sigma_XY)`.
pub fn fisher_opnorm(model: &GaussianJoint) -> Result<f64> {
    let (eig, _) = sym_eig(&model.joint_covariance())?;
    let lambda_max = eig.last().copied().unwrap_or(0.0);
    let lambda_min = eig.first().copied().unwrap_or(0.0);
    if lambda_min <= SINGULAR_FLOOR * lambda_max.max(1e-300) {
        return Err(Error::Singular(format!(
            "joint covariance is singular (lambda_min = {lambda_min:e})"
        )));
    }
    Ok(1.0 / lambda_min)
}

/// Draw `n` i.i.d. joint samples via `Sigma_XY^{1/2} z`.
pub fn sample_joint(model: &GaussianJoint, n: usize, rng: &mut RngStream) -> Result<PairedSamples> {
    if n == 0 {
        return Err(Error::invalid_arg("n", "need n >= 1"));
    }
    let (dx, dy) = (model.dim_x(), model.dim_y());
    let root = matrix_sqrt_psd(&model.joint_covariance())?;
    let z = sample_gaussian_matrix(n, dx + dy, rng)?;
    let w = z.mul(&root)?; // rows are Sigma^{1/2} z since the root is symmetric
    PairedSamples::new(w.columns(0, dx), w.columns(dx, dx + dy))
}

/// Common-signal model: `X = P1 V + Z1`, `Y = P2 V + Z2` with
/// `V ~ N(0, I_rank)` shared, so `Sigma_X = I + P1 P1^T`, `Sigma_Y = I + P2 P2^T`,
/// `C = P1 P2^T`, with the factors drawn i.i.d. standard normal from the seed.
pub fn make_common_signal_model(d: usize, rank: usize, seed: u64) -> Result<GaussianJoint> {
    if rank == 0 || rank > d {
        return Err(Error::invalid_arg(
            "rank",
            format!("need 1 <= rank <= d = {d}, got {rank}"),
        ));
    }
    let mut rng1 = RngStream::derived(seed, "common-signal/p1", 0);
    let mut rng2 = RngStream::derived(seed, "common-signal/p2", 0);
    let p1 = sample_gaussian_matrix(d, rank, &mut rng1)?;
    let p2 = sample_gaussian_matrix(d, rank, &mut rng2)?;
    let sigma_x = p1.mul(&p1.transpose())?.add(&Matrix::identity(d))?;
    let sigma_y = p2.mul(&p2.transpose())?.add(&Matrix::identity(d))?;
    let cross = p1.mul(&p2.transpose())?;
    GaussianJoint::new(sigma_x, sigma_y, cross)
}

/// Split a (dx + dy)-dimensional joint covariance into a model's blocks.
pub(crate) fn fit_cross_block(cov: &Matrix, dx: usize, dy: usize) -> Result<GaussianJoint> {
    if cov.rows() != dx + dy || cov.cols() != dx + dy {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} joint covariance", dx + dy),
            got: format!("{}x{}", cov.rows(), cov.cols()),
        });
    }
    let mut sigma_x = Matrix::zeros(dx, dx);
    let mut sigma_y = Matrix::zeros(dy, dy);
    let mut cross = Matrix::zeros(dx, dy);
    for i in 0..dx {
        for j in 0..dx {
            sigma_x.set(i, j, cov.get(i, j));
        }
        for j in 0..dy {
            cross.set(i, j, cov.get(i, dx + j));
        }
    }
    for i in 0..dy {
        for j in 0..dy {
            sigma_y.set(i, j, cov.get(dx + i, dx + j));
        }
    }
    GaussianJoint::new(sigma_x, sigma_y, cross)
}

/// Isotropic family: `Sigma_X = Sigma_Y = I_d`, `C = corr * I_d`.
pub fn make_isotropic_model(d: usize, corr: f64) -> Result<GaussianJoint> {
    if d == 0 {
        return Err(Error::invalid_arg("d", "need d >= 1"));
    }
    if !(corr.abs() < 1.0) {
        return Err(Error::invalid_arg(
            "corr",
            format!("need |corr| < 1, got {corr}"),
        ));
    }
    GaussianJoint::new(
        Matrix::identity(d),
        Matrix::identity(d),
        Matrix::identity(d).scale(corr),
    )
}

/// Sinusoidal (non-Gaussian) dependent pair: `X ~ N(0, I_d)`, independent
/// `Z ~ N(0, I_d)`, and `Y = (sin(1^T X) 1 / sqrt(d) + Z) / sqrt(2)`.
pub fn sample_sinusoidal_model(d: usize, n: usize, rng: &mut RngStream) -> Result<PairedSamples> {
    if d == 0 || n == 0 {
        return Err(Error::invalid_arg("d", "need d >= 1 and n >= 1"));
    }
    let x = sample_gaussian_matrix(n, d, rng)?;
    let z = sample_gaussian_matrix(n, d, rng)?;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let inv_sqrtd = 1.0 / (d as f64).sqrt();
    let mut y = Matrix::zeros(n, d);
    for i in 0..n {
        let s = x.row(i).iter().sum::<f64>().sin() * inv_sqrtd;
        for j in 0..d {
            y.set(i, j, inv_sqrt2 * (s + z.get(i, j)));
        }
    }
    PairedSamples::new(x, y)
}
