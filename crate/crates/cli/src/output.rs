use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use crate::error::CliResult;

#[derive(Args, Clone, Debug)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "GVA_OUT_DIR", default_value = "gva-out")]
    pub out: PathBuf,
}

impl OutArgs {
    pub fn prepare(&self) -> CliResult<&Path> {
        fs::create_dir_all(&self.out)?;
        Ok(&self.out)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(gva_core::Error::from)?;
    w.write_record(header).map_err(gva_core::Error::from)?;
    for row in rows {
        w.write_record(row).map_err(gva_core::Error::from)?;
    }
    w.flush()?;
    Ok(())
}
