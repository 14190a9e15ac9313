//! Donsker-Varadhan (DV) neural mutual information estimation.
//!
//! The critic class is a single-hidden-layer ReLU network with a linear skip
//! connection,
//!
//! ```text
//! g(z) = sum_i beta_i relu(<w_i, z> + b_i) + <w_0, z> + b_0,
//! ```
//!
//! trained by stochastic gradient ascent on the empirical DV objective
//! `mean(g(pos)) - log(mean(exp(g(neg))))`, where positives are row-aligned
//! `(u_i, v_i)` pairs and negatives pair each `u_i` with the cyclically
//! shifted `v`, a fixed-point-free permutation of the batch. Gradients are
//! written out by hand; no autodiff.
//!
//! The norm-constrained variant of the class (an l1 ball on each hidden row,
//! clamped hidden biases, `a/(2l)`-bounded output weights and an `a`-bounded
//! skip) exists for theory-faithful runs and is enforced by projection after
//! every step when `constraint_projection` is on. Training defaults leave it
//! off.

use crate::error::{Error, Result};
use crate::matkit::{Matrix, RngStream};
use crate::samples::PairedSamples;

/// Single-hidden-layer ReLU critic with a linear skip term.
#[derive(Debug, Clone)]
pub struct ReluNet {
    input_dim: usize,
    hidden: usize,
    /// Output weights, one per hidden neuron.
    pub beta: Vec<f64>,
    /// Hidden weights, row-major `hidden x input_dim`.
    pub w: Vec<f64>,
    /// Hidden biases.
    pub b: Vec<f64>,
    /// Skip weights.
    pub w0: Vec<f64>,
    /// Skip bias.
    pub b0: f64,
    /// Constraint bound `a` used when projection is enabled.
    pub bound: f64,
}

/// Training configuration for [`train_dv_mi`].
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Project parameters back onto the constrained class after every step.
    pub constraint_projection: bool,
    /// Constraint bound `a`; `None` means `max(ln ln l, 1)` for `l` neurons.
    pub bound: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 2000,
            batch_size: 256,
            learning_rate: 5e-3,
            constraint_projection: false,
            bound: None,
            seed: 0,
        }
    }
}

/// SGD momentum coefficient (plain SGD with momentum is the whole optimizer).
const MOMENTUM: f64 = 0.9;

impl ReluNet {
    /// Zero-initialized network.
    pub fn zeros(input_dim: usize, hidden: usize, bound: f64) -> ReluNet {
        ReluNet {
            input_dim,
            hidden,
            beta: vec![0.0; hidden],
            w: vec![0.0; hidden * input_dim],
            b: vec![0.0; hidden],
            w0: vec![0.0; input_dim],
            b0: 0.0,
            bound,
        }
    }

    /// Random initialization: hidden rows at scale `1/sqrt(input_dim)`,
    /// output weights at `1/sqrt(hidden)`, biases and skip at zero.
    pub fn init(input_dim: usize, hidden: usize, bound: f64, rng: &mut RngStream) -> ReluNet {
        let mut net = ReluNet::zeros(input_dim, hidden, bound);
        let ws = 1.0 / (input_dim as f64).sqrt();
        for w in net.w.iter_mut() {
            *w = rng.next_normal() * ws;
        }
        let bs = 1.0 / (hidden as f64).sqrt();
        for v in net.beta.iter_mut() {
            *v = rng.next_normal() * bs;
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Largest violation of the constraint set (0 when inside).
    pub fn constraint_violation(&self) -> f64 {
        let a = self.bound;
        let mut v: f64 = 0.0;
        for i in 0..self.hidden {
            let row = &self.w[i * self.input_dim..(i + 1) * self.input_dim];
            let l1: f64 = row.iter().map(|t| t.abs()).sum();
            v = v.max(l1 - 1.0).max(self.b[i].abs() - 1.0);
            v = v.max(self.beta[i].abs() - a / (2.0 * self.hidden as f64));
        }
        let skip_l1: f64 = self.w0.iter().map(|t| t.abs()).sum();
        v.max(skip_l1 - a).max(self.b0.abs() - a).max(0.0)
    }
}

/// Critic value `g(z)`.
pub fn net_forward(net: &ReluNet, z: &[f64]) -> Result<f64> {
    if z.len() != net.input_dim {
        return Err(Error::DimensionMismatch {
            expected: format!("input of length {}", net.input_dim),
            got: format!("{}", z.len()),
        });
    }
    let mut out = net.b0;
    for (w0, &zi) in net.w0.iter().zip(z) {
        out += w0 * zi;
    }
    for i in 0..net.hidden {
        let row = &net.w[i * net.input_dim..(i + 1) * net.input_dim];
        let mut pre = net.b[i];
        for (w, &zi) in row.iter().zip(z) {
            pre += w * zi;
        }
        if pre > 0.0 {
            out += net.beta[i] * pre;
        }
    }
    Ok(out)
}

fn forward_rows(net: &ReluNet, rows: &Matrix) -> Vec<f64> {
    (0..rows.rows())
        .map(|i| net_forward(net, rows.row(i)).expect("width checked by caller"))
        .collect()
}

/// `log(mean(exp(v)))` with max-shift for stability.
fn log_mean_exp(values: &[f64]) -> f64 {
    let m = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + (sum / values.len() as f64).ln()
}

/// Empirical DV objective: `mean(g(pos)) - log(mean(exp(g(neg))))`, in nats.
pub fn dv_value(net: &ReluNet, pos: &Matrix, neg: &Matrix) -> Result<f64> {
    if pos.rows() == 0 || neg.rows() == 0 {
        return Err(Error::InvalidShape(
            "dv_value needs nonempty batches".into(),
        ));
    }
    if pos.cols() != net.input_dim || neg.cols() != net.input_dim {
        return Err(Error::DimensionMismatch {
            expected: format!("batch width {}", net.input_dim),
            got: format!("{} / {}", pos.cols(), neg.cols()),
        });
    }
    let gp = forward_rows(net, pos);
    let gn = forward_rows(net, neg);
    Ok(gp.iter().sum::<f64>() / gp.len() as f64 - log_mean_exp(&gn))
}

/// Gradient of [`dv_value`] with respect to every parameter, same shapes as
/// the corresponding [`ReluNet`] fields. The ReLU subgradient at 0 is 0.
pub fn net_gradient(net: &ReluNet, pos: &Matrix, neg: &Matrix) -> Result<ReluNet> {
    if pos.rows() == 0 || neg.rows() == 0 {
        return Err(Error::InvalidShape(
            "net_gradient needs nonempty batches".into(),
        ));
    }
    if pos.cols() != net.input_dim || neg.cols() != net.input_dim {
        return Err(Error::DimensionMismatch {
            expected: format!("batch width {}", net.input_dim),
            got: format!("{} / {}", pos.cols(), neg.cols()),
        });
    }
    let mut grad = ReluNet::zeros(net.input_dim, net.hidden, net.bound);

    // d/dtheta mean(g(pos)): weight 1/n_pos per positive row.
    // d/dtheta -log(mean(exp(g(neg)))): weight -softmax(g(neg))_i per row.
    let gn = forward_rows(net, neg);
    let m = gn.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = gn.iter().map(|&v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();

    let accumulate = |row: &[f64], weight: f64, grad: &mut ReluNet| {
        grad.b0 += weight;
        for (g, &zi) in grad.w0.iter_mut().zip(row) {
            *g += weight * zi;
        }
        for i in 0..net.hidden {
            let w_row = &net.w[i * net.input_dim..(i + 1) * net.input_dim];
            let mut pre = net.b[i];
            for (w, &zi) in w_row.iter().zip(row) {
                pre += w * zi;
            }
            if pre > 0.0 {
                grad.beta[i] += weight * pre;
                let coeff = weight * net.beta[i];
                grad.b[i] += coeff;
                let g_row = &mut grad.w[i * net.input_dim..(i + 1) * net.input_dim];
                for (g, &zi) in g_row.iter_mut().zip(row) {
                    *g += coeff * zi;
                }
            }
        }
    };

    let wp = 1.0 / pos.rows() as f64;
    for i in 0..pos.rows() {
        accumulate(pos.row(i), wp, &mut grad);
    }
    for i in 0..neg.rows() {
        accumulate(neg.row(i), -exps[i] / z, &mut grad);
    }
    Ok(grad)
}

/// Fixed-point-free cyclic shift `sigma(i) = i + 1 mod n`, the derangement
/// used to build product-measure (negative) pairs from aligned samples.
pub fn derangement_shift(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::invalid_arg(
            "n",
            format!("a derangement needs n >= 2, got {n}"),
        ));
    }
    Ok((0..n).map(|i| (i + 1) % n).collect())
}

/// Euclidean projection of `v` onto the l1 ball of radius `r` (Duchi et al.
/// sort-based algorithm).
fn project_l1_ball(v: &mut [f64], r: f64) {
    let l1: f64 = v.iter().map(|t| t.abs()).sum();
    if l1 <= r {
        return;
    }
    let mut mags: Vec<f64> = v.iter().map(|t| t.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        acc += m;
        let t = (acc - r) / (j + 1) as f64;
        if j + 1 == mags.len() || mags[j + 1] <= t {
            theta = t;
            break;
        }
    }
    for t in v.iter_mut() {
        *t = t.signum() * (t.abs() - theta).max(0.0);
    }
}

/// Project the parameters onto the constrained class (idempotent; never
/// increases any constrained norm).
pub fn project_constraints(net: &mut ReluNet) {
    let a = net.bound;
    let beta_cap = a / (2.0 * net.hidden as f64);
    for i in 0..net.hidden {
        project_l1_ball(&mut net.w[i * net.input_dim..(i + 1) * net.input_dim], 1.0);
        net.b[i] = net.b[i].clamp(-1.0, 1.0);
        net.beta[i] = net.beta[i].clamp(-beta_cap, beta_cap);
    }
    project_l1_ball(&mut net.w0, a);
    net.b0 = net.b0.clamp(-a, a);
}

/// Full-sample DV objective of `net` on `samples`: positives are the aligned
/// rows, negatives pair `x` with the cyclically shifted `y`.
pub fn full_sample_dv(net: &ReluNet, samples: &PairedSamples) -> Result<f64> {
    let pos = samples.joint();
    let neg = samples
        .permute_y(&derangement_shift(samples.len())?)?
        .joint();
    dv_value(net, &pos, &neg)
}

/// One recorded checkpoint of a training run.
#[derive(Debug, Clone, Copy)]
pub struct TraceStep {
    pub step: usize,
    pub dv_full_sample: f64,
}

/// Training result with optional checkpoint trace.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub estimate: f64,
    pub net: ReluNet,
    pub trace: Vec<TraceStep>,
}

/// Train a DV critic with `hidden` neurons by minibatch stochastic gradient
/// ascent and return the full-sample DV value of the final network.
///
/// Deterministic for a fixed config: batches, initialization, and the
/// negative-pair derangement are all drawn from streams keyed by `cfg.seed`.
pub fn train_dv_mi(
    samples: &PairedSamples,
    hidden: usize,
    cfg: &TrainConfig,
) -> Result<(f64, ReluNet)> {
    let outcome = train_dv_mi_traced(samples, hidden, cfg, 0)?;
    Ok((outcome.estimate, outcome.net))
}

/// [`train_dv_mi`] recording the full-sample DV value every `trace_every`
/// steps (0 disables tracing).
pub fn train_dv_mi_traced(
    samples: &PairedSamples,
    hidden: usize,
    cfg: &TrainConfig,
    trace_every: usize,
) -> Result<TrainOutcome> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid_arg("samples", "training needs n >= 2"));
    }
    if hidden == 0 || cfg.steps == 0 || cfg.batch_size == 0 {
        return Err(Error::invalid_arg(
            "config",
            "hidden, steps, and batch_size must be >= 1",
        ));
    }
    if !(cfg.learning_rate > 0.0) {
        return Err(Error::invalid_arg("learning_rate", "must be > 0"));
    }
    let input_dim = samples.dim_x() + samples.dim_y();
    // a = max(ln ln l, 1) unless given.
    let bound = cfg
        .bound
        .unwrap_or_else(|| (hidden as f64).ln().ln().max(1.0));

    let mut init_rng = RngStream::derived(cfg.seed, "dv/init", 0);
    let mut net = ReluNet::init(input_dim, hidden, bound, &mut init_rng);
    if cfg.constraint_projection {
        project_constraints(&mut net);
    }
    let mut velocity = ReluNet::zeros(input_dim, hidden, bound);
    let mut batch_rng = RngStream::derived(cfg.seed, "dv/batches", 0);

    let bsz = cfg.batch_size.min(n);
    let mut pos = Matrix::zeros(bsz, input_dim);
    let mut neg = Matrix::zeros(bsz, input_dim);
    let mut batch = vec![0usize; bsz];
    let (dx, dy) = (samples.dim_x(), samples.dim_y());

    let mut trace = Vec::new();
    for step in 0..cfg.steps {
        for slot in batch.iter_mut() {
            *slot = batch_rng.next_index(n);
        }
        for (row, &i) in batch.iter().enumerate() {
            // Positive: aligned pair. Negative: same x, y from the cyclically
            // shifted batch slot (fixed-point-free within the batch).
            let j = batch[(row + 1) % bsz];
            for (c, &v) in samples.x().row(i).iter().enumerate() {
                pos.set(row, c, v);
                neg.set(row, c, v);
            }
            for (c, &v) in samples.y().row(i).iter().enumerate() {
                pos.set(row, dx + c, v);
            }
            for (c, &v) in samples.y().row(j).iter().enumerate() {
                neg.set(row, dx + c, v);
            }
        }
        let _ = dy;
        let grad = net_gradient(&net, &pos, &neg)?;

        // Gradient ascent with momentum.
        let lr = cfg.learning_rate;
        for (v, g) in velocity.beta.iter_mut().zip(&grad.beta) {
            *v = MOMENTUM * *v + g;
        }
        for (v, g) in velocity.w.iter_mut().zip(&grad.w) {
            *v = MOMENTUM * *v + g;
        }
        for (v, g) in velocity.b.iter_mut().zip(&grad.b) {
            *v = MOMENTUM * *v + g;
        }
        for (v, g) in velocity.w0.iter_mut().zip(&grad.w0) {
            *v = MOMENTUM * *v + g;
        }
        velocity.b0 = MOMENTUM * velocity.b0 + grad.b0;

        for (p, v) in net.beta.iter_mut().zip(&velocity.beta) {
            *p += lr * v;
        }
        for (p, v) in net.w.iter_mut().zip(&velocity.w) {
            *p += lr * v;
        }
        for (p, v) in net.b.iter_mut().zip(&velocity.b) {
            *p += lr * v;
        }
        for (p, v) in net.w0.iter_mut().zip(&velocity.w0) {
            *p += lr * v;
        }
        net.b0 += lr * velocity.b0;

        if cfg.constraint_projection {
            project_constraints(&mut net);
        }
        if trace_every > 0 && (step + 1) % trace_every == 0 {
            trace.push(TraceStep {
                step: step + 1,
                dv_full_sample: full_sample_dv(&net, samples)?,
            });
        }
    }

    let estimate = full_sample_dv(&net, samples)?;
    Ok(TrainOutcome {
        estimate,
        net,
        trace,
    })
}
