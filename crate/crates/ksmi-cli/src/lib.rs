//! `ksmi` command-line tool: synthetic dataset generation, sliced-MI
//! estimation from CSV, exact Gaussian oracles, error-bound evaluation, the
//! Gaussian-residual decomposition, benchmark sweeps, and a numerical check
//! of the projected-entropy Lipschitz inequality.
//!
//! Exit codes: 0 success, 1 runtime/domain error, 2 usage error.
//! The seed comes from `--seed`, falling back to the `KSMI_SEED` environment
//! variable, then 0.

mod args;
mod io;
mod plot;

pub use args::*;

use clap::Parser;
use io::fmt_sig;
use ksmi::bench::{
    run_dimension_sweep, run_independence_benchmark, run_neural_rate_sweep, BenchModel, TrialSpec,
};
use ksmi::estimator::{
    estimate_ksmi, lipschitz_check, mc_error_bound, residual_vs_gaussian, InnerEstimator,
    KsmiConfig,
};
use ksmi::gaussmodel::{
    asymptotic_conditions, gaussian_ksmi_asymptotic, gaussian_ksmi_exact_mc, gaussian_mi,
    make_common_signal_model, make_isotropic_model, sample_joint, sample_sinusoidal_model,
    GaussianJoint,
};
use ksmi::knn_mi::KsgConfig;
use ksmi::matkit::{stream_id, Matrix, RngStream};
use ksmi::neural_mi::TrainConfig;
use std::path::Path;

enum CliError {
    /// Invalid flag combination or value: exit 2.
    Usage(String),
    /// Domain or I/O failure at run time: exit 1.
    Runtime(String),
}

type CliResult = Result<(), CliError>;

impl From<ksmi::Error> for CliError {
    fn from(e: ksmi::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Best effort; a pool may already exist when run() is called twice.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var("KSMI_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn check_corr(corr: f64) -> Result<(), CliError> {
    if corr.abs() >= 1.0 || !corr.is_finite() {
        return Err(CliError::Usage(format!(
            "--corr must satisfy |corr| < 1, got {corr}"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(CliError::Usage(format!("--{name} must be > 0, got {v}")));
    }
    Ok(())
}

fn gaussian_family(
    family: Family,
    d: usize,
    rank: usize,
    corr: f64,
    seed: u64,
) -> Result<GaussianJoint, CliError> {
    match family {
        Family::CommonSignal => {
            if rank > d {
                return Err(CliError::Usage(format!(
                    "--rank must satisfy rank <= d, got rank = {rank}, d = {d}"
                )));
            }
            Ok(make_common_signal_model(
                d,
                rank,
                stream_id("cli/common-signal", seed),
            )?)
        }
        Family::Isotropic => {
            check_corr(corr)?;
            Ok(make_isotropic_model(d, corr)?)
        }
        Family::Sinusoidal => Err(CliError::Usage(
            "--family sinusoidal has no Gaussian oracle; choose common-signal or isotropic".into(),
        )),
    }
}

fn inner_estimator(args: &InnerArgs) -> Result<InnerEstimator, CliError> {
    check_positive("learning-rate", args.learning_rate)?;
    Ok(match args.inner {
        Inner::Ksg => InnerEstimator::Ksg(KsgConfig {
            k_neighbors: args.k_neighbors as usize,
            ..KsgConfig::default()
        }),
        Inner::Neural => InnerEstimator::Neural {
            hidden: args.ell as usize,
            train: TrainConfig {
                steps: args.steps as usize,
                batch_size: args.batch_size as usize,
                learning_rate: args.learning_rate,
                constraint_projection: args.constrain,
                bound: None,
                seed: 0, // overridden per projection
            },
        },
    })
}

fn bench_model(family: Family, rank: usize, corr: f64) -> Result<BenchModel, CliError> {
    Ok(match family {
        Family::CommonSignal => BenchModel::CommonSignal { rank },
        Family::Isotropic => {
            check_corr(corr)?;
            BenchModel::Isotropic { corr }
        }
        Family::Sinusoidal => BenchModel::Sinusoidal,
    })
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Sample(a) => cmd_sample(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Gaussian(a) => cmd_gaussian(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Residual(a) => cmd_residual(a),
        Command::BenchIndependence(a) => cmd_bench_independence(a),
        Command::BenchDimension(a) => cmd_bench_dimension(a),
        Command::BenchNeural(a) => cmd_bench_neural(a),
        Command::CheckLipschitz(a) => cmd_check_lipschitz(a),
    }
}

fn cmd_sample(a: SampleArgs) -> CliResult {
    let seed = resolve_seed(a.seed);
    let (d, n) = (a.d as usize, a.n as usize);
    let samples = match a.family {
        Family::Sinusoidal => {
            let mut rng = RngStream::derived(seed, "cli/sample", 0);
            sample_sinusoidal_model(d, n, &mut rng)?
        }
        family => {
            let model = gaussian_family(family, d, a.rank as usize, a.corr, seed)?;
            let mut rng = RngStream::derived(seed, "cli/sample", 0);
            sample_joint(&model, n, &mut rng)?
        }
    };
    io::emit(Some(&a.output), &io::samples_to_csv(&samples)).map_err(CliError::Runtime)
}

fn cmd_estimate(a: EstimateArgs) -> CliResult {
    let samples = io::read_paired_csv(&a.input).map_err(CliError::Runtime)?;
    let cfg = KsmiConfig {
        k: a.k as usize,
        projections: a.m as usize,
        inner: inner_estimator(&a.inner)?,
        seed: resolve_seed(a.seed),
    };
    let report = estimate_ksmi(&samples, &cfg)?;
    io::emit(a.output.as_deref(), &io::report_to_csv(&report)).map_err(CliError::Runtime)
}

fn cmd_gaussian(a: GaussianArgs) -> CliResult {
    let seed = resolve_seed(a.seed);
    let d = a.d as usize;
    let k = a.k as usize;
    if k > d {
        return Err(CliError::Usage(format!(
            "--k must satisfy k <= d, got k = {k}, d = {d}"
        )));
    }
    let model = gaussian_family(a.family, d, a.rank as usize, a.corr, seed)?;
    let conditions = asymptotic_conditions(&model)?;
    if !conditions.satisfied {
        eprintln!(
            "warning: asymptotic-regularity conditions not met \
             (kappa_x = {:.3}, kappa_y = {:.3}, rho = {:.3}); \
             the asymptotic value is a diagnostic only",
            conditions.kappa_x, conditions.kappa_y, conditions.rho
        );
    }
    let (exact, std) = gaussian_ksmi_exact_mc(&model, k, a.m as usize, seed)?;
    println!("exact_mc_nats,{}", fmt_sig(exact));
    println!("per_projection_std,{}", fmt_sig(std));
    println!(
        "asymptotic_nats,{}",
        fmt_sig(gaussian_ksmi_asymptotic(&model, k))
    );
    println!("full_mi_nats,{}", fmt_sig(gaussian_mi(&model)?));
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> CliResult {
    check_positive("sigma-x-op", a.sigma_x_op)?;
    check_positive("sigma-y-op", a.sigma_y_op)?;
    check_positive("fisher-op", a.fisher_op)?;
    let bound = mc_error_bound(
        a.k as usize,
        a.dx as usize,
        a.dy as usize,
        a.m as usize,
        a.sigma_x_op,
        a.sigma_y_op,
        a.fisher_op,
    );
    println!("mc_error_bound_nats,{}", fmt_sig(bound));
    println!("inner_estimator_term,unknown");
    Ok(())
}

fn cmd_residual(a: ResidualArgs) -> CliResult {
    let samples = io::read_paired_csv(&a.input).map_err(CliError::Runtime)?;
    if samples.len() < samples.dim_x() + samples.dim_y() + 1 {
        eprintln!(
            "warning: n = {} is small for fitting a {}x{} covariance; \
             the Gaussian surrogate may be poorly conditioned",
            samples.len(),
            samples.dim_x() + samples.dim_y(),
            samples.dim_x() + samples.dim_y()
        );
    }
    let cfg = KsmiConfig {
        k: a.k as usize,
        projections: a.m as usize,
        inner: inner_estimator(&a.inner)?,
        seed: resolve_seed(a.seed),
    };
    let r = residual_vs_gaussian(&samples, &cfg)?;
    println!("residual_nats,{}", fmt_sig(r.residual));
    println!("ksmi_hat_nats,{}", fmt_sig(r.ksmi_hat));
    println!("ksmi_gauss_nats,{}", fmt_sig(r.ksmi_gauss));
    Ok(())
}

fn grid(values: &[u64]) -> Vec<usize> {
    values.iter().map(|&v| v as usize).collect()
}

fn cmd_bench_independence(a: BenchIndependenceArgs) -> CliResult {
    let spec = TrialSpec {
        model: bench_model(a.family, a.rank as usize, a.corr)?,
        n_grid: grid(&a.n_grid),
        k_grid: grid(&a.k_grid),
        d_grid: grid(&a.d_grid),
        projections: a.m as usize,
        trials: a.trials as usize,
        inner: inner_estimator(&a.inner)?,
        seed: resolve_seed(a.seed),
    };
    let cells = run_independence_benchmark(&spec)?;
    io::emit(a.output.as_deref(), &io::independence_to_csv(&cells)).map_err(CliError::Runtime)?;
    if let Some(plot_path) = &a.plot {
        let mut series = Vec::new();
        for &d in &spec.d_grid {
            for &k in &spec.k_grid {
                let points: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|c| c.d == d && c.k == k)
                    .map(|c| (c.n as f64, c.auc))
                    .collect();
                series.push(plot::Series {
                    label: format!("d={d}, k={k}"),
                    points,
                });
            }
        }
        write_plot(plot_path, "independence testing", "n", "auc", &series)?;
    }
    Ok(())
}

fn cmd_bench_dimension(a: BenchDimensionArgs) -> CliResult {
    let spec = TrialSpec {
        model: bench_model(a.family, a.rank as usize, a.corr)?,
        n_grid: vec![1],
        k_grid: grid(&a.k_grid),
        d_grid: grid(&a.d_grid),
        projections: a.m as usize,
        trials: 1,
        inner: InnerEstimator::Ksg(KsgConfig::default()),
        seed: resolve_seed(a.seed),
    };
    let cells = run_dimension_sweep(&spec)?;
    io::emit(a.output.as_deref(), &io::dimension_to_csv(&cells)).map_err(CliError::Runtime)?;
    if let Some(plot_path) = &a.plot {
        let mut series = Vec::new();
        for &k in &spec.k_grid {
            series.push(plot::Series {
                label: format!("population, k={k}"),
                points: cells
                    .iter()
                    .filter(|c| c.k == k)
                    .map(|c| (c.d as f64, c.population_ksmi))
                    .collect(),
            });
            series.push(plot::Series {
                label: format!("mc std, k={k}"),
                points: cells
                    .iter()
                    .filter(|c| c.k == k)
                    .map(|c| (c.d as f64, c.empirical_std))
                    .collect(),
            });
        }
        write_plot(
            plot_path,
            "dimension decay",
            "d",
            "population_ksmi_nats",
            &series,
        )?;
    }
    Ok(())
}

fn cmd_bench_neural(a: BenchNeuralArgs) -> CliResult {
    let inner = InnerArgs {
        inner: Inner::Neural,
        ..a.inner.clone()
    };
    let spec = TrialSpec {
        model: bench_model(a.family, a.rank as usize, a.corr)?,
        n_grid: grid(&a.n_grid),
        k_grid: vec![a.k as usize],
        d_grid: vec![a.d as usize],
        projections: 1, // the sweep sets m = n per point
        trials: 1,
        inner: inner_estimator(&inner)?,
        seed: resolve_seed(a.seed),
    };
    let cells = run_neural_rate_sweep(&spec)?;
    io::emit(a.output.as_deref(), &io::neural_to_csv(&cells)).map_err(CliError::Runtime)?;
    if let Some(plot_path) = &a.plot {
        let series = vec![
            plot::Series {
                label: "estimate".into(),
                points: cells.iter().map(|c| (c.n as f64, c.estimate)).collect(),
            },
            plot::Series {
                label: "truth".into(),
                points: cells.iter().map(|c| (c.n as f64, c.truth)).collect(),
            },
        ];
        write_plot(
            plot_path,
            "neural estimation rate (n = m)",
            "n",
            "estimate_nats",
            &series,
        )?;
    }
    Ok(())
}

fn cmd_check_lipschitz(a: CheckLipschitzArgs) -> CliResult {
    let d = a.d as usize;
    let k = a.k as usize;
    if k > d {
        return Err(CliError::Usage(format!(
            "--k must satisfy k <= d, got k = {k}, d = {d}"
        )));
    }
    let sigma = Matrix::diag(&(1..=d).map(|i| i as f64).collect::<Vec<_>>());
    let model = GaussianJoint::new(sigma.clone(), sigma, Matrix::zeros(d, d))?;
    let worst = lipschitz_check(&model, k, a.trials as usize, resolve_seed(a.seed))?;
    println!("max_violation,{}", fmt_sig(worst));
    println!(
        "inequality_holds,{}",
        if worst <= 1e-9 { "true" } else { "false" }
    );
    Ok(())
}

fn write_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[plot::Series],
) -> CliResult {
    let svg = plot::render(title, x_label, y_label, series);
    std::fs::write(path, svg)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}
