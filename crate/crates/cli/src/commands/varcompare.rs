use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use gva_core::engine::{draw_standard_normal, estimate_gradients, fit_rng, read_fit_result, Estimator};

use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_file, strip_out_arg, RunManifest};
use crate::output::{num, write_csv, OutArgs};
use crate::target::ModelArgs;

#[derive(Args, Debug, Clone)]
pub struct VarcompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `fit_result.txt` of a completed fit of the same model.
    #[arg(long)]
    pub result: PathBuf,
    /// Paired draws of both estimators.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// 1-based components of the mean to report (default: all).
    #[arg(long, value_delimiter = ',')]
    pub components: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Unbiased sample variance.
fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

pub fn run(args: &VarcompareArgs, argv: &[String]) -> CliResult<()> {
    if args.draws < 2 {
        return Err(CliError::Usage("--draws must be at least 2".into()));
    }
    let target = args.model.load()?;
    let model = target.model();
    let file = fs::File::open(&args.result).map_err(|e| CliError::Data(format!("{}: {e}", args.result.display())))?;
    let result = read_fit_result(BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", args.result.display())))?;
    let d = model.dim();
    if result.mu.len() != d {
        return Err(CliError::Data(format!("fitted dimension {} does not match model dimension {d}", result.mu.len())));
    }
    let components: Vec<usize> = if args.components.is_empty() {
        (0..d).collect()
    } else {
        args.components
            .iter()
            .map(|&c| if (1..=d).contains(&c) { Ok(c - 1) } else { Err(CliError::Usage(format!("component {c} outside 1..={d}"))) })
            .collect::<CliResult<_>>()?
    };

    let state = result.state()?;
    let mut rng = fit_rng(args.seed);
    let mut g1 = vec![Vec::with_capacity(args.draws); components.len()];
    let mut g2 = vec![Vec::with_capacity(args.draws); components.len()];
    for _ in 0..args.draws {
        let s = draw_standard_normal(&mut rng, d);
        let e1 = estimate_gradients(&state, model, &s, Estimator::Family1)?;
        let e2 = estimate_gradients(&state, model, &s, Estimator::Family2)?;
        for (k, &c) in components.iter().enumerate() {
            g1[k].push(e1.g_mu[c]);
            g2[k].push(e2.g_mu[c]);
        }
    }

    let dir = args.out.prepare()?;
    let names = model.param_names();
    let draws = components.iter().enumerate().flat_map(|(k, &c)| {
        let (g1, g2, name) = (&g1[k], &g2[k], &names[c]);
        (0..args.draws).map(move |j| vec![(c + 1).to_string(), name.clone(), (j + 1).to_string(), num(g1[j]), num(g2[j])])
    });
    write_csv(&dir.join("varcompare_draws.csv"), &["component", "name", "draw", "g1", "g2"], draws)?;

    let summary: Vec<Vec<String>> = components
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let (v1, v2) = (variance(&g1[k]), variance(&g2[k]));
            vec![(c + 1).to_string(), names[c].clone(), num(v1), num(v2), num(v2 / v1)]
        })
        .collect();
    write_csv(&dir.join("varcompare_summary.csv"), &["component", "name", "var1", "var2", "ratio"], summary.clone())?;

    let mut manifest = RunManifest::new("varcompare", strip_out_arg(argv));
    manifest.set("model", args.model.model.name());
    manifest.set_data(args.model.data_path()?)?;
    manifest.set("result", args.result.display());
    manifest.set("result_sha256", sha256_file(&args.result)?);
    manifest.set("draws", args.draws);
    manifest.set("seed", args.seed);
    manifest.set("out", dir.display());
    manifest.add_artifact(dir, "varcompare_draws.csv", false)?;
    manifest.add_artifact(dir, "varcompare_summary.csv", false)?;
    manifest.write(dir)?;

    let ratios: Vec<f64> = summary.iter().map(|r| r[4].parse().unwrap_or(f64::NAN)).collect();
    let below = ratios.iter().filter(|r| **r < 1.0).count();
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    say!(
        "{} components, {} draws: var2/var1 < 1 for {below}, largest ratio {max:.3e}",
        components.len(),
        args.draws
    );
    Ok(())
}
