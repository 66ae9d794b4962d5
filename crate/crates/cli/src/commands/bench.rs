use std::time::Instant;

use clap::{Args, ValueEnum};
use gva_core::data::synthetic::{synthetic_glmm, synthetic_sv};
use gva_core::engine::{run_fit, Algorithm, Estimator, FitConfig};
use gva_core::linalg::{reset_touch_count, touch_count};
use gva_core::models::{GlmmFamily, TargetModel};

use crate::error::{CliError, CliResult};
use crate::manifest::{strip_out_arg, RunManifest};
use crate::output::{num, write_csv, OutArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchFamily {
    /// Logistic random-intercept model, seven observations per subject.
    Glmm,
    /// Stochastic volatility model.
    Ssm,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: BenchFamily,
    /// Subjects (glmm) or series lengths (ssm).
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
    pub sizes: Vec<usize>,
    /// Iterations per timed fit.
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, value_delimiter = ',', default_value = "alg1-mf,alg1-full,alg2")]
    pub algorithms: Vec<Algorithm>,
    /// Timed repetitions; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// One benchmark cell.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub n: usize,
    pub dim: usize,
    pub algorithm: Algorithm,
    pub nnz: usize,
    pub touches_per_iter: f64,
    pub seconds_per_iter: f64,
}

pub fn build_model(family: BenchFamily, n: usize, seed: u64) -> CliResult<Box<dyn TargetModel>> {
    Ok(match family {
        BenchFamily::Glmm => Box::new(synthetic_glmm(GlmmFamily::BernoulliLogit, n, 7, seed)?),
        BenchFamily::Ssm => Box::new(synthetic_sv(n, seed)?),
    })
}

/// Per-iteration time (fastest repetition) and touched values (first
/// repetition). A fit that diverges early is timed over the iterations it ran.
pub fn measure(model: &dyn TargetModel, algorithm: Algorithm, iters: usize, repeats: usize, seed: u64) -> CliResult<(f64, f64)> {
    let config = FitConfig {
        max_iterations: iters,
        window: iters,
        patience: 1,
        ..FitConfig::new(algorithm, Estimator::Family2, seed)
    };
    let mut best = f64::INFINITY;
    let mut touches = 0.0;
    for rep in 0..repeats {
        reset_touch_count();
        let started = Instant::now();
        let result = run_fit(model, &config)?;
        let per_iter = started.elapsed().as_secs_f64() / result.iterations as f64;
        best = best.min(per_iter);
        if rep == 0 {
            touches = touch_count() as f64 / result.iterations as f64;
        }
    }
    Ok((best, touches))
}

pub fn run(args: &BenchArgs, argv: &[String]) -> CliResult<()> {
    if args.sizes.is_empty() || args.sizes.contains(&0) || args.iters == 0 || args.repeats == 0 {
        return Err(CliError::Usage("--sizes, --iters and --repeats must be positive".into()));
    }
    let family = match args.family {
        BenchFamily::Glmm => "glmm",
        BenchFamily::Ssm => "ssm",
    };
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let model = build_model(args.family, n, args.seed)?;
        for &algorithm in &args.algorithms {
            let nnz = algorithm.pattern_for(model.as_ref())?.nnz();
            let (seconds_per_iter, touches_per_iter) =
                measure(model.as_ref(), algorithm, args.iters, args.repeats, args.seed)?;
            say!(
                "{family} n={n:<6} {:<10} {:>10.3e} s/iter {:>14.1} touches/iter",
                algorithm.tag(),
                seconds_per_iter,
                touches_per_iter
            );
            rows.push(BenchRow { n, dim: model.dim(), algorithm, nnz, touches_per_iter, seconds_per_iter });
        }
    }

    let dir = args.out.prepare()?;
    let touches = rows.iter().map(|r| {
        vec![family.to_string(), r.n.to_string(), r.dim.to_string(), r.algorithm.tag().into(), r.nnz.to_string(), num(r.touches_per_iter)]
    });
    write_csv(&dir.join("bench_touches.csv"), &["family", "n", "dim", "algorithm", "nnz", "touches_per_iter"], touches)?;
    let timing = rows.iter().map(|r| {
        vec![family.to_string(), r.n.to_string(), r.algorithm.tag().into(), args.iters.to_string(), num(r.seconds_per_iter)]
    });
    write_csv(&dir.join("bench_timing.csv"), &["family", "n", "algorithm", "iterations", "seconds_per_iter"], timing)?;

    let mut manifest = RunManifest::new("bench", strip_out_arg(argv));
    manifest.set("family", family);
    manifest.set("iters", args.iters);
    manifest.set("repeats", args.repeats);
    manifest.set("seed", args.seed);
    manifest.set("out", dir.display());
    manifest.add_artifact(dir, "bench_touches.csv", false)?;
    manifest.add_artifact(dir, "bench_timing.csv", true)?;
    manifest.write(dir)?;
    Ok(())
}
