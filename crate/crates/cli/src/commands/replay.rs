use std::path::PathBuf;

use clap::{Args, Parser};

use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::output::OutArgs;
use crate::{dispatch, Cli, Command};

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

pub fn run(args: &ReplayArgs) -> CliResult<()> {
    let original = RunManifest::read(&args.manifest)?;
    let dir = args.out.prepare()?;
    let mut argv = original.argv.clone();
    argv.push("--out".into());
    argv.push(dir.display().to_string());
    let cli = Cli::try_parse_from(std::iter::once("gva".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Data(format!("manifest command line does not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::Data("a manifest cannot replay another replay".into()));
    }
    let outcome = dispatch(cli.command, &argv);
    if let Err(e @ CliError::GradcheckFailed { .. }) = outcome {
        eprintln!("gva: {e} (reproduced)");
    } else {
        outcome?;
    }

    let replayed = RunManifest::read(&dir.join(MANIFEST_FILE))?;
    let mut mismatches = 0;
    if original.get("data_sha256") != replayed.get("data_sha256") {
        say!("MISMATCH input data checksum");
        mismatches += 1;
    }
    for a in &original.artifacts {
        let new = replayed.artifacts.iter().find(|b| b.file == a.file);
        let status = match new {
            _ if a.volatile => "skipped (timing)",
            Some(b) if b.sha256 == a.sha256 => "identical",
            _ => {
                mismatches += 1;
                "MISMATCH"
            }
        };
        say!("{status:<16} {}", a.file);
    }
    if mismatches > 0 {
        return Err(CliError::Data(format!("{mismatches} artifact(s) differ from the manifest")));
    }
    say!("replay reproduced all recorded artifacts");
    Ok(())
}
