//! Synthetic experiment harness: dimension-decay sweeps of the population
//! sliced MI, independence-testing ROC/AUC curves, and neural-estimator
//! convergence sweeps. Every run is a deterministic function of its spec.

use crate::error::{Error, Result};
use crate::estimator::{estimate_ksmi, mc_error_bound_for_model, InnerEstimator, KsmiConfig};
use crate::gaussmodel::{
    gaussian_ksmi_exact_mc, make_isotropic_model, sample_joint, GaussianJoint, SyntheticFamily,
    SyntheticModelSpec,
};
use crate::matkit::{stream_id, RngStream};
use crate::neural_mi::derangement_shift;
use crate::samples::PairedSamples;
use rayon::prelude::*;

/// Synthetic model family, materialized per ambient dimension `d`.
#[derive(Debug, Clone)]
pub enum BenchModel {
    /// Shared rank-`rank` Gaussian signal.
    CommonSignal { rank: usize },
    /// `Sigma = I_d`, `C = corr I_d`.
    Isotropic { corr: f64 },
    /// Non-Gaussian sinusoidal single-feature dependence.
    Sinusoidal,
    /// A fixed Gaussian model (usable only when the d grid matches its size).
    Fixed(GaussianJoint),
}

impl BenchModel {
    /// The synthetic-family description at dimension `d`, when this selector
    /// is one of the shared synthetic families.
    fn synthetic_at(&self, d: usize, seed: u64) -> Option<SyntheticModelSpec> {
        let family = match self {
            BenchModel::CommonSignal { rank } => SyntheticFamily::CommonSignal { rank: *rank },
            BenchModel::Sinusoidal => SyntheticFamily::Sinusoidal,
            _ => return None,
        };
        Some(SyntheticModelSpec {
            family,
            d,
            seed: stream_id("bench/model", seed ^ d as u64),
        })
    }

    /// Materialize a Gaussian model at dimension `d`, if the family is
    /// Gaussian. Model-construction randomness is keyed by `seed` and `d`.
    fn gaussian_at(&self, d: usize, seed: u64) -> Result<Option<GaussianJoint>> {
        match self {
            BenchModel::CommonSignal { .. } | BenchModel::Sinusoidal => self
                .synthetic_at(d, seed)
                .expect("synthetic family")
                .gaussian(),
            BenchModel::Isotropic { corr } => Ok(Some(make_isotropic_model(d, *corr)?)),
            BenchModel::Fixed(model) => {
                if model.dim_x() != d {
                    return Err(Error::invalid_arg(
                        "d_grid",
                        format!(
                            "fixed model has dx = {}, cannot sweep d = {d}",
                            model.dim_x()
                        ),
                    ));
                }
                Ok(Some(model.clone()))
            }
        }
    }
}

/// One experiment description: model family, grids, and estimator settings.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub model: BenchModel,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    pub d_grid: Vec<usize>,
    /// Projections per sliced-MI estimate (`m`).
    pub projections: usize,
    /// Repetitions per grid cell (dependent and null each).
    pub trials: usize,
    pub inner: InnerEstimator,
    pub seed: u64,
}

impl TrialSpec {
    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.k_grid.is_empty() || self.d_grid.is_empty() {
            return Err(Error::invalid_arg("grids", "all grids must be nonempty"));
        }
        if self.trials == 0 {
            return Err(Error::invalid_arg("trials", "need trials >= 1"));
        }
        if self.projections == 0 {
            return Err(Error::invalid_arg("projections", "need m >= 1"));
        }
        Ok(())
    }
}

/// One point of an ROC curve.
#[derive(Debug, Clone, Copy)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// One cell of the independence benchmark.
#[derive(Debug, Clone, Copy)]
pub struct IndependenceCell {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub auc: f64,
}

/// One cell of the dimension sweep.
#[derive(Debug, Clone, Copy)]
pub struct DimensionCell {
    pub d: usize,
    pub k: usize,
    /// Exact-oracle Monte Carlo mean of the projected MI.
    pub population_ksmi: f64,
    /// Per-projection standard deviation of the exact projected MI.
    pub empirical_std: f64,
    /// The bound constant `C(mu) sqrt(k (dx+dy) / (dx dy))` dominating the
    /// per-projection standard deviation (the m = 1 Monte Carlo bound).
    pub theory_bound: f64,
}

/// One point of the neural-estimation rate sweep (`n = m` grow together).
#[derive(Debug, Clone, Copy)]
pub struct NeuralRateCell {
    pub k: usize,
    pub d: usize,
    /// Common value of the sample count and projection count.
    pub n: usize,
    pub estimate: f64,
    pub truth: f64,
    pub abs_error: f64,
}

/// Exact AUC as the Mann-Whitney statistic:
/// `P(dep > null) + P(dep = null) / 2` over all pairs.
pub fn auc_from_scores(null_scores: &[f64], dep_scores: &[f64]) -> Result<f64> {
    if null_scores.is_empty() || dep_scores.is_empty() {
        return Err(Error::invalid_arg(
            "scores",
            "both score sets must be nonempty",
        ));
    }
    let mut sorted_null = null_scores.to_vec();
    sorted_null.sort_unstable_by(f64::total_cmp);
    let mut acc = 0.0f64;
    for &d in dep_scores {
        // Halves are exact in binary floating point, so the sort-based route
        // matches the O(n^2) pairwise count bit for bit.
        let below = sorted_null.partition_point(|&s| s < d);
        let ties = sorted_null[below..].iter().take_while(|&&s| s == d).count();
        acc += below as f64 + 0.5 * ties as f64;
    }
    Ok(acc / (null_scores.len() as f64 * dep_scores.len() as f64))
}

/// ROC curve from score sets, sweeping a declare-dependent threshold over all
/// observed scores. Points are ordered by non-decreasing false-positive rate;
/// the trapezoid area under this curve equals [`auc_from_scores`].
pub fn roc_curve(null_scores: &[f64], dep_scores: &[f64]) -> Result<Vec<RocPoint>> {
    if null_scores.is_empty() || dep_scores.is_empty() {
        return Err(Error::invalid_arg(
            "scores",
            "both score sets must be nonempty",
        ));
    }
    let mut thresholds: Vec<f64> = null_scores.iter().chain(dep_scores).copied().collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();
    let mut points = Vec::with_capacity(thresholds.len() + 2);
    points.push(RocPoint {
        threshold: f64::INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    });
    // Sweep downward: lower thresholds declare more sets dependent. Ties sit
    // half above, half below their threshold point (midpoint convention),
    // which makes the trapezoid area equal the Mann-Whitney statistic.
    for &t in thresholds.iter().rev() {
        let tp = dep_scores.iter().filter(|&&s| s > t).count() as f64
            + 0.5 * dep_scores.iter().filter(|&&s| s == t).count() as f64;
        let fp = null_scores.iter().filter(|&&s| s > t).count() as f64
            + 0.5 * null_scores.iter().filter(|&&s| s == t).count() as f64;
        points.push(RocPoint {
            threshold: t,
            tpr: tp / dep_scores.len() as f64,
            fpr: fp / null_scores.len() as f64,
        });
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        tpr: 1.0,
        fpr: 1.0,
    });
    Ok(points)
}

/// Dependent-model samples for one trial.
fn sample_dependent(
    model: &BenchModel,
    gaussian: Option<&GaussianJoint>,
    d: usize,
    seed: u64,
    n: usize,
    rng: &mut RngStream,
) -> Result<PairedSamples> {
    match (model, gaussian) {
        (BenchModel::Sinusoidal, _) => model
            .synthetic_at(d, seed)
            .expect("sinusoidal is synthetic")
            .sample(n, rng),
        (_, Some(g)) => sample_joint(g, n, rng),
        _ => unreachable!("non-sinusoidal families always materialize"),
    }
}

/// Null samples with the same marginals, dependence broken: zero cross block
/// for Gaussian families, a fixed-point-free row shift of Y for sample-
/// defined (non-Gaussian) families.
fn sample_null(
    model: &BenchModel,
    gaussian: Option<&GaussianJoint>,
    d: usize,
    seed: u64,
    n: usize,
    rng: &mut RngStream,
) -> Result<PairedSamples> {
    match (model, gaussian) {
        (BenchModel::Sinusoidal, _) => {
            let dependent = sample_dependent(model, gaussian, d, seed, n, rng)?;
            dependent.permute_y(&derangement_shift(n)?)
        }
        (_, Some(g)) => sample_joint(&g.independent_copy(), n, rng),
        _ => unreachable!("non-sinusoidal families always materialize"),
    }
}

/// Independence-testing benchmark: per grid cell, `trials` dependent and
/// `trials` null sliced-MI scores, summarized as an exact AUC. Rows are
/// ordered by (d, k, n); the whole table is deterministic per seed.
pub fn run_independence_benchmark(spec: &TrialSpec) -> Result<Vec<IndependenceCell>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for (ci, (&d, (&k, &n))) in spec
        .d_grid
        .iter()
        .flat_map(|d| {
            spec.k_grid
                .iter()
                .flat_map(move |k| spec.n_grid.iter().map(move |n| (k, n)))
                .map(move |kn| (d, kn))
        })
        .enumerate()
    {
        let gaussian = spec.model.gaussian_at(d, spec.seed)?;
        let cell_tag = stream_id("bench/indep-cell", ci as u64);

        let score = |trial: u64, null: bool| -> Result<f64> {
            let purpose = if null {
                "bench/null-data"
            } else {
                "bench/dep-data"
            };
            let mut data_rng = RngStream::derived(spec.seed ^ cell_tag, purpose, trial);
            let samples = if null {
                sample_null(
                    &spec.model,
                    gaussian.as_ref(),
                    d,
                    spec.seed,
                    n,
                    &mut data_rng,
                )?
            } else {
                sample_dependent(
                    &spec.model,
                    gaussian.as_ref(),
                    d,
                    spec.seed,
                    n,
                    &mut data_rng,
                )?
            };
            let cfg = KsmiConfig {
                k,
                projections: spec.projections,
                inner: spec.inner.clone(),
                seed: stream_id(
                    if null {
                        "bench/null-est"
                    } else {
                        "bench/dep-est"
                    },
                    (spec.seed ^ cell_tag).wrapping_add(trial),
                ),
            };
            Ok(estimate_ksmi(&samples, &cfg)?.estimate)
        };

        let trials = spec.trials as u64;
        let run_scores = |null: bool| -> Result<Vec<f64>> {
            let run = |t: u64| score(t, null);
            if rayon::current_num_threads() > 1 {
                (0..trials).into_par_iter().map(run).collect()
            } else {
                (0..trials).map(run).collect()
            }
        };
        let dep_scores = run_scores(false)?;
        let null_scores = run_scores(true)?;
        cells.push(IndependenceCell {
            d,
            k,
            n,
            auc: auc_from_scores(&null_scores, &dep_scores)?,
        });
    }
    Ok(cells)
}

/// Dimension-decay sweep: per (d, k), the exact-oracle population sliced MI,
/// its per-projection standard deviation, and the bound constant that must
/// dominate that standard deviation. Gaussian families only.
pub fn run_dimension_sweep(spec: &TrialSpec) -> Result<Vec<DimensionCell>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &d in &spec.d_grid {
        let model = spec.model.gaussian_at(d, spec.seed)?.ok_or_else(|| {
            Error::invalid_arg("model", "dimension sweep needs a Gaussian family")
        })?;
        for &k in &spec.k_grid {
            let oracle_seed = stream_id("bench/dim-sweep", spec.seed ^ ((d * 1009 + k) as u64));
            let (population, std) =
                gaussian_ksmi_exact_mc(&model, k, spec.projections, oracle_seed)?;
            cells.push(DimensionCell {
                d,
                k,
                population_ksmi: population,
                empirical_std: std,
                theory_bound: mc_error_bound_for_model(&model, k, 1)?,
            });
        }
    }
    Ok(cells)
}

/// Neural-estimation rate sweep: `n = m` grow together along `n_grid`, with
/// the exact Gaussian oracle as the truth column (fixed large oracle m,
/// independent of the schedule).
pub fn run_neural_rate_sweep(spec: &TrialSpec) -> Result<Vec<NeuralRateCell>> {
    spec.validate()?;
    let InnerEstimator::Neural { hidden, train } = &spec.inner else {
        return Err(Error::invalid_arg(
            "inner",
            "the neural rate sweep needs a neural inner estimator",
        ));
    };
    let mut cells = Vec::new();
    for &d in &spec.d_grid {
        let model = spec.model.gaussian_at(d, spec.seed)?.ok_or_else(|| {
            Error::invalid_arg("model", "the neural rate sweep needs a Gaussian family")
        })?;
        for &k in &spec.k_grid {
            let truth_seed = stream_id("bench/neural-truth", spec.seed ^ ((d * 1009 + k) as u64));
            let (truth, _) = gaussian_ksmi_exact_mc(&model, k, 5000, truth_seed)?;
            for &n in &spec.n_grid {
                let mut data_rng = RngStream::derived(
                    spec.seed,
                    "bench/neural-data",
                    (d * 65_537 + k * 257 + n) as u64,
                );
                let samples = sample_joint(&model, n, &mut data_rng)?;
                let cfg = KsmiConfig {
                    k,
                    projections: n, // n = m schedule
                    inner: InnerEstimator::Neural {
                        hidden: *hidden,
                        train: train.clone(),
                    },
                    seed: stream_id("bench/neural-est", (d * 65_537 + k * 257 + n) as u64),
                };
                let estimate = estimate_ksmi(&samples, &cfg)?.estimate;
                cells.push(NeuralRateCell {
                    k,
                    d,
                    n,
                    estimate,
                    truth,
                    abs_error: (estimate - truth).abs(),
                });
            }
        }
    }
    Ok(cells)
}
