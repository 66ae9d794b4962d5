use clap::Args;
use gva_core::engine::fit_rng;
use gva_core::gradcheck::{check_gradient, random_points, DEFAULT_STEP};
use gva_core::models::TargetModel;

use crate::error::{CliError, CliResult};
use crate::manifest::{strip_out_arg, RunManifest};
use crate::output::{num, write_csv, OutArgs};
use crate::target::{CorruptedGradient, ModelArgs};

#[derive(Args, Debug, Clone)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of random evaluation points.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Largest acceptable relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Standard deviation of the random points.
    #[arg(long, default_value_t = 0.5)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturb the analytic gradient (negative control).
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &GradcheckArgs, argv: &[String]) -> CliResult<()> {
    if args.points == 0 || !(args.step > 0.0) || !(args.scale > 0.0) {
        return Err(CliError::Usage("--points, --step and --scale must be positive".into()));
    }
    let target = args.model.load()?;
    let corrupted;
    let model: &dyn TargetModel = if args.corrupt_gradient {
        corrupted = CorruptedGradient(target.model());
        &corrupted
    } else {
        target.model()
    };
    let points = random_points(&mut fit_rng(args.seed), model.dim(), args.points, args.scale);
    let report = check_gradient(model, &points, args.step);

    let dir = args.out.prepare()?;
    let names = model.param_names();
    let blocks = model.blocks();
    let rows = report.blocks.iter().zip(&blocks).map(|(r, b)| {
        vec![r.name.clone(), b.range.len().to_string(), num(r.max_rel_error), names[r.worst_index].clone()]
    });
    write_csv(&dir.join("gradcheck.csv"), &["block", "size", "max_rel_error", "worst_coordinate"], rows)?;

    let mut manifest = RunManifest::new("gradcheck", strip_out_arg(argv));
    manifest.set("model", args.model.model.name());
    manifest.set_data(args.model.data_path()?)?;
    manifest.set("dim", model.dim());
    manifest.set("points", args.points);
    manifest.set("step", args.step);
    manifest.set("tolerance", args.tolerance);
    manifest.set("seed", args.seed);
    manifest.set("out", dir.display());
    manifest.add_artifact(dir, "gradcheck.csv", false)?;
    manifest.write(dir)?;

    say!("{:<10} {:>6} {:>14}  worst coordinate", "block", "size", "max rel error");
    for (r, b) in report.blocks.iter().zip(&blocks) {
        say!("{:<10} {:>6} {:>14.3e}  {}", r.name, b.range.len(), r.max_rel_error, names[r.worst_index]);
    }
    if report.passes(args.tolerance) {
        say!("PASS: all blocks below {:e}", args.tolerance);
        Ok(())
    } else {
        Err(CliError::GradcheckFailed { max_error: report.max_rel_error(), tolerance: args.tolerance })
    }
}
