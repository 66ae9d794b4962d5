use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use gva_core::engine::{fit_rng, run_fit, write_fit_result, Algorithm, Estimator, FitConfig, FitResult, Termination};
use gva_core::linalg::SparsityPattern;
use gva_core::models::GaussianTarget;
use tempfile::TempDir;

fn gva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gva")).args(args).env_remove("GVA_OUT_DIR").output().unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read(dir: &Path, file: &str) -> Vec<u8> {
    fs::read(dir.join(file)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(file).display()))
}

fn csv_rows(dir: &Path, file: &str) -> Vec<Vec<String>> {
    let text = String::from_utf8(read(dir, file)).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(code(&gva(&["fit", "--model", "gaussian-test", "--bogus"])), 1);
    assert_eq!(code(&gva(&["fit", "--model", "gaussian-test", "--window", "0", "--out", out])), 1);
    assert_eq!(code(&gva(&["fit", "--model", "toenail", "--out", out])), 1, "missing --data");
    assert_eq!(code(&gva(&["fit", "--model", "toenail", "--data", "/nonexistent.csv", "--out", out])), 2);
    assert_eq!(code(&gva(&["fit", "--model", "sv", "--data", &data("epilepsy.csv"), "--out", out])), 2);
    assert_eq!(code(&gva(&["--help"])), 0);

    let ok = gva(&["gradcheck", "--model", "sv", "--data", &data("gbpusd.csv"), "--out", out]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = gva(&["gradcheck", "--model", "glmm-synth", "--corrupt-gradient", "--out", out]);
    assert_eq!(code(&bad), 3);
}

#[test]
fn gradcheck_reports_every_block() {
    let tmp = TempDir::new().unwrap();
    let out = gva(&["gradcheck", "--model", "epilepsy2", "--data", &data("epilepsy.csv"), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(tmp.path(), "gradcheck.csv");
    let blocks: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(blocks, ["b", "beta", "zeta"]);
}

#[test]
fn fit_outputs_are_byte_identical_across_runs_and_replays() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for dir in [&a, &b] {
        let out = gva(&["fit", "--model", "gaussian-test", "--seed", "3", "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["fit_result.txt", "summary.csv", "lbar_trace.csv", "gaussian_check.csv"] {
        assert_eq!(read(&a, file), read(&b, file), "{file}");
    }
    let manifest = a.join("manifest.txt");
    let replay = gva(&["replay", manifest.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(code(&replay), 0, "{}", String::from_utf8_lossy(&replay.stdout));
    assert_eq!(read(&a, "fit_result.txt"), read(&c, "fit_result.txt"));

    // a tampered artifact is caught
    let text = String::from_utf8(read(&a, "manifest.txt")).unwrap();
    let tampered = text.replacen("summary.csv ", "summary.csv 00", 1);
    fs::write(tmp.path().join("tampered.txt"), tampered).unwrap();
    let replay = gva(&["replay", tmp.path().join("tampered.txt").to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert_eq!(code(&replay), 2);
}

#[test]
fn gaussian_fit_recovers_the_target() {
    let tmp = TempDir::new().unwrap();
    let out = gva(&["fit", "--model", "gaussian-test", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(tmp.path(), "gaussian_check.csv");
    let value = |name: &str| rows.iter().find(|r| r[0] == name).unwrap()[1].parse::<f64>().unwrap();
    assert!(value("mu_max_abs_error") < 0.05);
    assert!(value("precision_rel_frobenius_error") < 0.05);
    let summary = csv_rows(tmp.path(), "summary.csv");
    assert_eq!(summary.len(), 20);
    assert!(summary.iter().all(|r| r[3].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn sv_fit_writes_one_band_row_per_return() {
    let tmp = TempDir::new().unwrap();
    let out = gva(&[
        "fit", "--model", "sv", "--data", &data("gbpusd.csv"), "--max-iter", "5000", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let band = csv_rows(tmp.path(), "volatility_band.csv");
    assert_eq!(band.len(), 945);
    for row in &band {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        assert!(v[2] > 0.0 && (v[3] - (v[1] - v[2])).abs() < 1e-12 && (v[4] - (v[1] + v[2])).abs() < 1e-12);
    }
    let text = String::from_utf8(read(tmp.path(), "fit_result.txt")).unwrap();
    assert!(text.contains("termination = max-iterations\niterations = 5000\n"));
}

fn exact_gaussian_result(dir: &Path) -> PathBuf {
    // same construction as `--model gaussian-test` with its defaults
    let pattern = Arc::new(SparsityPattern::ssm(17, 1, 3).unwrap());
    let target = GaussianTarget::random(pattern, &mut fit_rng(1)).unwrap();
    let template = run_fit(&target, &FitConfig { max_iterations: 10, window: 10, ..FitConfig::new(Algorithm::Alg2Sparse, Estimator::Family2, 0) })
        .unwrap();
    let exact = FitResult {
        mu: target.mean().to_vec(),
        factor: target.factor().clone(),
        termination: Termination::StoppedByCriterion,
        ..template
    };
    let path = dir.join("exact.txt");
    write_fit_result(&exact, fs::File::create(&path).unwrap()).unwrap();
    path
}

#[test]
fn varcompare_at_the_gaussian_optimum() {
    let tmp = TempDir::new().unwrap();
    let result = exact_gaussian_result(tmp.path());
    let out = gva(&[
        "varcompare", "--model", "gaussian-test", "--result", result.to_str().unwrap(), "--components", "1,5,20",
        "--out", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let draws = csv_rows(tmp.path(), "varcompare_draws.csv");
    assert_eq!(draws.len(), 3 * 1000);
    for c in ["1", "5", "20"] {
        assert_eq!(draws.iter().filter(|r| r[0] == c).count(), 1000);
    }
    assert!(draws.iter().all(|r| r[4].parse::<f64>().unwrap().abs() < 1e-12));
    for row in csv_rows(tmp.path(), "varcompare_summary.csv") {
        assert!(row[2].parse::<f64>().unwrap() > 0.1);
        assert!(row[4].parse::<f64>().unwrap() < 1e-20);
    }
}

#[test]
fn bench_writes_linear_touch_counts() {
    let tmp = TempDir::new().unwrap();
    let out = gva(&[
        "bench", "--family", "glmm", "--sizes", "50,100,150", "--iters", "20", "--repeats", "1", "--algorithms",
        "alg1-mf,alg2", "--out", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(tmp.path(), "bench_touches.csv");
    assert_eq!(rows.len(), 6);
    let alg2: Vec<f64> = rows.iter().filter(|r| r[3] == "alg2").map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(alg2[1] - alg2[0], alg2[2] - alg2[1]);
    assert_eq!(csv_rows(tmp.path(), "bench_timing.csv").len(), 6);
}

#[test]
fn synth_reproduces_the_vendored_files() {
    let tmp = TempDir::new().unwrap();
    for name in ["toenail", "polypharmacy"] {
        let out = gva(&["synth", "--dataset", name, "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let file = format!("{name}.csv");
        assert_eq!(read(tmp.path(), &file), fs::read(data(&file)).unwrap(), "{file}");
    }
}
