//! Paired-sample CSV input and fixed-layout CSV report output.
//!
//! Dataset format: header `x1,..,x{dx},y1,..,y{dy}`, one sample per row,
//! decimal dot, no NaN/Inf. Report columns are fixed per table kind and every
//! value is printed with 12 significant digits, so a rerun with the same
//! seed produces byte-identical files.

use ksmi::bench::{DimensionCell, IndependenceCell, NeuralRateCell};
use ksmi::estimator::KsmiReport;
use ksmi::matkit::Matrix;
use ksmi::PairedSamples;
use std::fmt::Write as _;
use std::path::Path;

/// 12 significant digits, locale-free.
pub fn fmt_sig(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn read_paired_csv(path: &Path) -> Result<PairedSamples, String> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format!("{}: empty file", path.display()))?;

    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let dx = names.iter().take_while(|n| n.starts_with('x')).count();
    let dy = names.len() - dx;
    if dx == 0 || dy == 0 {
        return Err(format!(
            "{}: header must be x1..x{{dx}},y1..y{{dy}}, got `{header}`",
            path.display()
        ));
    }
    for (i, name) in names.iter().enumerate() {
        let expected = if i < dx {
            format!("x{}", i + 1)
        } else {
            format!("y{}", i + 1 - dx)
        };
        if *name != expected {
            return Err(format!(
                "{}: header column {} is `{name}`, expected `{expected}`",
                path.display(),
                i + 1
            ));
        }
    }

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dx + dy {
            return Err(format!(
                "{}:{}: expected {} fields, got {}",
                path.display(),
                idx + 1,
                dx + dy,
                fields.len()
            ));
        }
        for (c, field) in fields.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                format!(
                    "{}:{}: column {} is not a number: `{field}`",
                    path.display(),
                    idx + 1,
                    c + 1
                )
            })?;
            if !v.is_finite() {
                return Err(format!(
                    "{}:{}: non-finite value `{field}` in column {}",
                    path.display(),
                    idx + 1,
                    c + 1
                ));
            }
            if c < dx {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(format!("{}: no data rows", path.display()));
    }
    let x = Matrix::new(n, dx, xs).map_err(|e| e.to_string())?;
    let y = Matrix::new(n, dy, ys).map_err(|e| e.to_string())?;
    PairedSamples::new(x, y).map_err(|e| e.to_string())
}

pub fn samples_to_csv(samples: &PairedSamples) -> String {
    let (dx, dy) = (samples.dim_x(), samples.dim_y());
    let mut out = String::new();
    let header: Vec<String> = (1..=dx)
        .map(|i| format!("x{i}"))
        .chain((1..=dy).map(|i| format!("y{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..samples.len() {
        let row: Vec<String> = samples
            .x()
            .row(i)
            .iter()
            .chain(samples.y().row(i))
            .map(|&v| fmt_sig(v))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn report_to_csv(report: &KsmiReport) -> String {
    let mut out = String::from("k,m,n,estimate_nats,empirical_std,theory_bound\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        report.k,
        report.projections,
        report.n,
        fmt_sig(report.estimate),
        fmt_sig(report.empirical_std),
        report.theory_bound.map(fmt_sig).unwrap_or_default()
    );
    out
}

pub fn independence_to_csv(cells: &[IndependenceCell]) -> String {
    let mut out = String::from("d,k,n,auc\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.d, c.k, c.n, fmt_sig(c.auc));
    }
    out
}

pub fn dimension_to_csv(cells: &[DimensionCell]) -> String {
    let mut out = String::from("d,k,population_ksmi_nats,empirical_std,theory_bound\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.d,
            c.k,
            fmt_sig(c.population_ksmi),
            fmt_sig(c.empirical_std),
            fmt_sig(c.theory_bound)
        );
    }
    out
}

pub fn neural_to_csv(cells: &[NeuralRateCell]) -> String {
    let mut out = String::from("k,d,n,estimate_nats,truth_nats,abs_error_nats\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.k,
            c.d,
            c.n,
            fmt_sig(c.estimate),
            fmt_sig(c.truth),
            fmt_sig(c.abs_error)
        );
    }
    out
}

/// Write `content`, or print it when `path` is `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
