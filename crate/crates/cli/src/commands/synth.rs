use std::fs;

use clap::{Args, ValueEnum};
use gva_core::data::synthetic::{write_synthetic_polypharmacy, write_synthetic_toenail};

use crate::error::CliResult;
use crate::manifest::{strip_out_arg, RunManifest};
use crate::output::OutArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthDataset {
    Toenail,
    Polypharmacy,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub dataset: SynthDataset,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &SynthArgs, argv: &[String]) -> CliResult<()> {
    let dir = args.out.prepare()?;
    let (name, file) = match args.dataset {
        SynthDataset::Toenail => ("toenail", "toenail.csv"),
        SynthDataset::Polypharmacy => ("polypharmacy", "polypharmacy.csv"),
    };
    let out = fs::File::create(dir.join(file))?;
    match args.dataset {
        SynthDataset::Toenail => write_synthetic_toenail(args.seed, out)?,
        SynthDataset::Polypharmacy => write_synthetic_polypharmacy(args.seed, out)?,
    }
    let mut manifest = RunManifest::new("synth", strip_out_arg(argv));
    manifest.set("dataset", name);
    manifest.set("seed", args.seed);
    manifest.set("out", dir.display());
    manifest.add_artifact(dir, file, false)?;
    manifest.write(dir)?;
    say!("wrote {}", dir.join(file).display());
    Ok(())
}
