//! End-to-end tests of the `ksmi` binary: exit codes, CSV formats, seed
//! determinism, and thread-count invariance.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ksmi"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_field(content: &str, name: &str) -> f64 {
    content
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("field {name} in:\n{content}"))
        .parse()
        .unwrap()
}

fn tmpfile(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[test]
fn usage_errors_exit_2() {
    // --k 0 violates the k >= 1 range.
    let out = run(&[
        "estimate", "--input", "x.csv", "--k", "0", "--m", "10", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("--k"), "{}", stderr(&out));

    let out = run(&["estimate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["estimate", "--input", "x.csv", "--k", "2"]); // missing --m
    assert_eq!(out.status.code(), Some(2));

    // Cross-flag usage error: |corr| >= 1.
    let out = run(&[
        "gaussian",
        "--family",
        "isotropic",
        "--d",
        "4",
        "--corr",
        "1.5",
        "--k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--corr"));
}

#[test]
fn runtime_errors_exit_1() {
    let out = run(&[
        "estimate",
        "--input",
        "/nonexistent/data.csv",
        "--k",
        "1",
        "--m",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Malformed CSV: the error names the offending line.
    let dir = tempfile::tempdir().unwrap();
    let bad = tmpfile(dir.path(), "bad.csv");
    std::fs::write(&bad, "x1,y1\n1.0,2.0\n1.0,inf\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        bad.to_str().unwrap(),
        "--k",
        "1",
        "--m",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));

    let empty = tmpfile(dir.path(), "empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        empty.to_str().unwrap(),
        "--k",
        "1",
        "--m",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let ragged = tmpfile(dir.path(), "ragged.csv");
    std::fs::write(&ragged, "x1,x2,y1\n1.0,2.0,3.0\n1.0,2.0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        ragged.to_str().unwrap(),
        "--k",
        "1",
        "--m",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));
}

#[test]
fn header_is_prefix_counted() {
    let dir = tempfile::tempdir().unwrap();
    let data = tmpfile(dir.path(), "dims.csv");
    std::fs::write(
        &data,
        "x1,x2,y1\n1.0,2.0,3.0\n0.5,0.1,0.2\n-1.0,0.3,0.9\n2.0,1.0,0.0\n",
    )
    .unwrap();
    // k = 2 > min(dx, dy) = 1: domain error (not usage) since it depends on
    // the file contents.
    let out = run(&[
        "estimate",
        "--input",
        data.to_str().unwrap(),
        "--k",
        "2",
        "--m",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn sample_then_estimate_roundtrip_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = tmpfile(dir.path(), "data.csv");
    let args = [
        "sample",
        "--family",
        "isotropic",
        "--d",
        "3",
        "--corr",
        "0.0",
        "--n",
        "800",
        "--seed",
        "11",
        "--output",
        data.to_str().unwrap(),
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let first = std::fs::read(&data).unwrap();
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first, std::fs::read(&data).unwrap(), "byte-identical CSV");

    let est = |threads: &str| -> String {
        let out = run(&[
            "--threads",
            threads,
            "estimate",
            "--input",
            data.to_str().unwrap(),
            "--k",
            "1",
            "--m",
            "32",
            "--inner",
            "ksg",
            "--seed",
            "7",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    let single = est("1");
    assert_eq!(single, est("1"), "same seed, same bytes");
    assert_eq!(single, est("2"), "--threads never changes numbers");

    // Independent data: the estimate sits in the KSG zero band.
    let header = single.lines().next().unwrap();
    assert_eq!(header, "k,m,n,estimate_nats,empirical_std,theory_bound");
    let row: Vec<&str> = single.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "32");
    assert_eq!(row[2], "800");
    let estimate: f64 = row[3].parse().unwrap();
    assert!(estimate.abs() < 0.05, "estimate {estimate}");
    assert_eq!(row[5], "", "no theory bound for raw data");
}

#[test]
fn estimate_with_neural_inner() {
    let dir = tempfile::tempdir().unwrap();
    let data = tmpfile(dir.path(), "pair.csv");
    let out = run(&[
        "sample",
        "--family",
        "isotropic",
        "--d",
        "1",
        "--corr",
        "0.8",
        "--n",
        "600",
        "--seed",
        "21",
        "--output",
        data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "estimate",
        "--input",
        data.to_str().unwrap(),
        "--k",
        "1",
        "--m",
        "4",
        "--inner",
        "neural",
        "--ell",
        "16",
        "--steps",
        "200",
        "--batch-size",
        "64",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let estimate: f64 = row[3].parse().unwrap();
    // rho = 0.8 pair: a short training run lands well above zero.
    assert!(estimate > 0.1, "estimate {estimate}");
}

#[test]
fn ksmi_seed_env_fallback_with_flag_priority() {
    let dir = tempfile::tempdir().unwrap();
    let a = tmpfile(dir.path(), "a.csv");
    let b = tmpfile(dir.path(), "b.csv");
    let c = tmpfile(dir.path(), "c.csv");
    let base = ["sample", "--family", "sinusoidal", "--d", "2", "--n", "50"];
    let out = bin()
        .args(base)
        .args(["--output", a.to_str().unwrap()])
        .env("KSMI_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .args(base)
        .args(["--seed", "99", "--output", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // The flag wins over the environment.
    let out = bin()
        .args(base)
        .args(["--seed", "100", "--output", c.to_str().unwrap()])
        .env("KSMI_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_ne!(std::fs::read(&b).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn gaussian_oracle_values() {
    let out = run(&[
        "gaussian",
        "--family",
        "common-signal",
        "--d",
        "10",
        "--rank",
        "2",
        "--k",
        "1",
        "--m",
        "2000",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let exact = csv_field(&text, "exact_mc_nats");
    let asym = csv_field(&text, "asymptotic_nats");
    let full = csv_field(&text, "full_mi_nats");
    assert!(exact > 0.0 && exact.is_finite());
    assert!(asym > 0.0);
    assert!(full >= exact - 1e-9, "projected MI average below full MI");
}

#[test]
fn bound_plug_in_matches_closed_form() {
    let out = run(&[
        "bound",
        "--k",
        "1",
        "--dx",
        "10",
        "--dy",
        "10",
        "--m",
        "1000",
        "--sigma-x-op",
        "1",
        "--sigma-y-op",
        "1",
        "--fisher-op",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bound = csv_field(&stdout(&out), "mc_error_bound_nats");
    assert!((bound - 0.2970).abs() < 5e-4, "bound {bound}");

    let out = run(&[
        "bound",
        "--k",
        "1",
        "--dx",
        "10",
        "--dy",
        "10",
        "--m",
        "1000",
        "--sigma-x-op",
        "-1",
        "--sigma-y-op",
        "1",
        "--fisher-op",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_lipschitz_reports_pass() {
    let out = run(&[
        "check-lipschitz",
        "--d",
        "6",
        "--k",
        "2",
        "--trials",
        "200",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("inequality_holds,true"), "{text}");
    assert!(csv_field(&text, "max_violation") <= 1e-9);
}

#[test]
fn residual_on_gaussian_data_is_small() {
    let dir = tempfile::tempdir().unwrap();
    let data = tmpfile(dir.path(), "gauss.csv");
    let out = run(&[
        "sample",
        "--family",
        "common-signal",
        "--d",
        "4",
        "--rank",
        "1",
        "--n",
        "2000",
        "--seed",
        "5",
        "--output",
        data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&[
        "residual",
        "--input",
        data.to_str().unwrap(),
        "--k",
        "1",
        "--m",
        "48",
        "--seed",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let residual = csv_field(&text, "residual_nats");
    let hat = csv_field(&text, "ksmi_hat_nats");
    let gauss = csv_field(&text, "ksmi_gauss_nats");
    assert!((hat - gauss - residual).abs() < 1e-12);
    assert!(residual.abs() < 0.1, "residual {residual}");
}

#[test]
fn bench_dimension_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let table = tmpfile(dir.path(), "dim.csv");
    let svg = tmpfile(dir.path(), "dim.svg");
    let out = run(&[
        "bench-dimension",
        "--family",
        "isotropic",
        "--corr",
        "0.5",
        "--d-grid",
        "4,8,16",
        "--k-grid",
        "1",
        "--m",
        "400",
        "--seed",
        "2",
        "--output",
        table.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let content = std::fs::read_to_string(&table).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,k,population_ksmi_nats,empirical_std,theory_bound"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    // Sorted by (d, k), population decays with d for the isotropic family.
    let d_values: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(d_values, vec![4, 8, 16]);
    let pops: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(pops[0] > pops[1] && pops[1] > pops[2], "{pops:?}");

    let svg_content = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_content.starts_with("<svg"));
    assert!(svg_content.contains("population_ksmi_nats"));
}

#[test]
fn bench_independence_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let table = tmpfile(dir.path(), "indep.csv");
    let out = run(&[
        "bench-independence",
        "--family",
        "common-signal",
        "--rank",
        "2",
        "--d-grid",
        "5",
        "--k-grid",
        "1",
        "--n-grid",
        "300,600",
        "--m",
        "8",
        "--trials",
        "6",
        "--seed",
        "3",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let content = std::fs::read_to_string(&table).unwrap();
    assert_eq!(content.lines().next().unwrap(), "d,k,n,auc");
    assert_eq!(content.lines().count(), 3);
    for line in content.lines().skip(1) {
        let auc: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&auc));
    }
}

#[test]
fn bench_neural_small_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let table = tmpfile(dir.path(), "neural.csv");
    let out = run(&[
        "bench-neural",
        "--family",
        "isotropic",
        "--corr",
        "0.8",
        "--d",
        "2",
        "--k",
        "1",
        "--n-grid",
        "32,64",
        "--ell",
        "8",
        "--steps",
        "120",
        "--batch-size",
        "32",
        "--seed",
        "9",
        "--output",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let content = std::fs::read_to_string(&table).unwrap();
    assert_eq!(
        content.lines().next().unwrap(),
        "k,d,n,estimate_nats,truth_nats,abs_error_nats"
    );
    assert_eq!(content.lines().count(), 3);
}
