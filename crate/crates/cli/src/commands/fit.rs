use std::fs;
use std::path::Path;
use std::time::Instant;

use clap::Args;
use gva_core::engine::{run_fit, write_fit_result, Algorithm, Estimator, FitConfig, FitResult, Parameterization};
use gva_core::linalg::CholeskyFactor;
use gva_core::models::GaussianTarget;

use crate::error::CliResult;
use crate::manifest::{strip_out_arg, RunManifest};
use crate::output::{num, write_csv, OutArgs};
use crate::target::{ModelArgs, Target};

pub const RESULT_FILE: &str = "fit_result.txt";

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// alg1-mf, alg1-full or alg2.
    #[arg(long, default_value = "alg2")]
    pub algorithm: Algorithm,
    /// Gradient estimator family, 1 or 2.
    #[arg(long, default_value = "2")]
    pub estimator: Estimator,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "max-iter", default_value_t = 250_000)]
    pub max_iter: usize,
    /// Iterations per lower-bound window.
    #[arg(long, default_value_t = 2500)]
    pub window: usize,
    /// Consecutive windows below the running maximum before stopping.
    #[arg(long, default_value_t = 3)]
    pub patience: usize,
    /// Draws of the standard normal averaged per iteration.
    #[arg(long, default_value_t = 1)]
    pub draws_per_iter: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

impl FitArgs {
    pub fn config(&self) -> FitConfig {
        FitConfig {
            max_iterations: self.max_iter,
            window: self.window,
            patience: self.patience,
            draws_per_iteration: self.draws_per_iter,
            ..FitConfig::new(self.algorithm, self.estimator, self.seed)
        }
    }
}

pub fn run(args: &FitArgs, argv: &[String]) -> CliResult<()> {
    let config = args.config();
    config.validate()?;
    let target = args.model.load()?;
    let model = target.model();
    let started = Instant::now();
    let result = run_fit(model, &config)?;
    let elapsed = started.elapsed().as_secs_f64();

    let dir = args.out.prepare()?;
    let mut manifest = RunManifest::new("fit", strip_out_arg(argv));
    manifest.set("model", args.model.model.name());
    manifest.set_data(args.model.data_path()?)?;
    manifest.set("dim", model.dim());
    manifest.set("algorithm", config.algorithm);
    manifest.set("estimator", config.estimator.tag());
    manifest.set("seed", config.seed);
    manifest.set("max_iter", config.max_iterations);
    manifest.set("window", config.window);
    manifest.set("patience", config.patience);
    manifest.set("draws_per_iter", config.draws_per_iteration);
    manifest.set("out", dir.display());

    let mut files = vec![RESULT_FILE, "summary.csv", "lbar_trace.csv"];
    write_fit_result(&result, fs::File::create(dir.join(RESULT_FILE))?)?;
    write_summary(&dir.join("summary.csv"), &model.param_names(), &result)?;
    write_trace(&dir.join("lbar_trace.csv"), &result)?;
    if let Target::Sv(sv) = &target {
        write_volatility_band(&dir.join("volatility_band.csv"), sv.n(), &result)?;
        files.push("volatility_band.csv");
    }
    if let Some(truth) = target.gaussian() {
        write_gaussian_check(&dir.join("gaussian_check.csv"), truth, &result)?;
        files.push("gaussian_check.csv");
    }
    for f in files {
        manifest.add_artifact(dir, f, false)?;
    }
    manifest.write(dir)?;

    say!(
        "{} {} estimator {}: {} after {} iterations ({:.2} s), final window average {}",
        args.model.model.name(),
        config.algorithm,
        config.estimator.tag(),
        result.termination,
        result.iterations,
        elapsed,
        result.lbar_trace.last().map_or("n/a".to_string(), |v| format!("{v:.4}")),
    );
    say!("outputs in {}", dir.display());
    Ok(())
}

fn write_summary(path: &Path, names: &[String], result: &FitResult) -> CliResult<()> {
    let var = result.marginal_variances()?;
    let rows = names
        .iter()
        .zip(&result.mu)
        .zip(&var)
        .enumerate()
        .map(|(i, ((n, m), v))| vec![(i + 1).to_string(), n.clone(), num(*m), num(v.sqrt())]);
    write_csv(path, &["index", "name", "mean", "sd"], rows)
}

fn write_trace(path: &Path, result: &FitResult) -> CliResult<()> {
    let rows = result
        .lbar_trace
        .iter()
        .enumerate()
        .map(|(k, v)| vec![(k + 1).to_string(), ((k + 1) * result.window).to_string(), num(*v)]);
    write_csv(path, &["window", "iteration", "lbar"], rows)
}

/// Posterior mean and one-standard-deviation band of each log-volatility state.
fn write_volatility_band(path: &Path, n: usize, result: &FitResult) -> CliResult<()> {
    let var = result.marginal_variances()?;
    let rows = (0..n).map(|t| {
        let (m, sd) = (result.mu[t], var[t].sqrt());
        vec![(t + 1).to_string(), num(m), num(sd), num(m - sd), num(m + sd)]
    });
    write_csv(path, &["t", "mean", "sd", "lower", "upper"], rows)
}

/// Dense `T T'` in row-major order.
pub fn precision_dense(factor: &CholeskyFactor) -> Vec<f64> {
    let d = factor.dim();
    let p = factor.pattern();
    let mut omega = vec![0.0; d * d];
    for k in 0..d {
        let range = p.col_ptr()[k]..p.col_ptr()[k + 1];
        for a in range.clone() {
            for b in range.clone() {
                omega[p.row_idx()[a] * d + p.row_idx()[b]] += factor.values()[a] * factor.values()[b];
            }
        }
    }
    omega
}

/// `(max |mu - mu*|, ||T T' - Omega*||_F / ||Omega*||_F)`; the second is
/// only defined for precision-parameterized fits.
pub fn gaussian_errors(truth: &GaussianTarget, result: &FitResult) -> (f64, Option<f64>) {
    let mu_err = result.mu.iter().zip(truth.mean()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let omega_err = (result.parameterization() == Parameterization::Precision).then(|| {
        let fit = precision_dense(&result.factor);
        let star = precision_dense(truth.factor());
        let diff: f64 = fit.iter().zip(&star).map(|(a, b)| (a - b).powi(2)).sum();
        let norm: f64 = star.iter().map(|v| v * v).sum();
        (diff / norm).sqrt()
    });
    (mu_err, omega_err)
}

fn write_gaussian_check(path: &Path, truth: &GaussianTarget, result: &FitResult) -> CliResult<()> {
    let (mu_err, omega_err) = gaussian_errors(truth, result);
    let mut rows = vec![vec!["mu_max_abs_error".to_string(), num(mu_err)]];
    if let Some(e) = omega_err {
        rows.push(vec!["precision_rel_frobenius_error".to_string(), num(e)]);
    }
    write_csv(path, &["metric", "value"], rows)
}
