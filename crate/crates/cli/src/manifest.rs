//! Run manifests: what was run, on which data, and checksums of every output.
//!
//! ```text
//! subcommand = fit
//! model = sv
//! data = data/gbpusd.csv
//! data_sha256 = ...
//! ...
//!
//! [argv]
//! fit
//! --model
//! sv
//!
//! [artifacts]
//! fit_result.txt <sha256>
//! bench_timing.csv <sha256> volatile
//! ```
//!
//! `[argv]` holds the command line minus the output directory, one argument
//! per line. Volatile artifacts (wall-clock timings) are not compared on replay.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub volatile: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunManifest {
    /// Ordered `key = value` pairs.
    pub header: Vec<(String, String)>,
    pub argv: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(subcommand: &str, argv: Vec<String>) -> Self {
        let mut m = Self { argv, ..Self::default() };
        m.set("subcommand", subcommand);
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Records the data file path and its checksum.
    pub fn set_data(&mut self, path: Option<&Path>) -> CliResult<()> {
        if let Some(p) = path {
            self.set("data", p.display());
            self.set("data_sha256", sha256_file(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?);
        }
        Ok(())
    }

    pub fn add_artifact(&mut self, dir: &Path, file: &str, volatile: bool) -> CliResult<()> {
        let sha256 = sha256_file(&dir.join(file))?;
        self.artifacts.push(Artifact { file: file.to_string(), sha256, volatile });
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[argv]\n");
        for a in &self.argv {
            out.push_str(a);
            out.push('\n');
        }
        out.push_str("\n[artifacts]\n");
        for a in &self.artifacts {
            out.push_str(&format!("{} {}{}\n", a.file, a.sha256, if a.volatile { " volatile" } else { "" }));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.render())?;
        Ok(path)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |line: &str| CliError::Data(format!("malformed manifest line `{line}`"));
        let mut m = Self::default();
        let mut section = "";
        for line in text.lines() {
            match line {
                "[argv]" => section = "argv",
                "[artifacts]" => section = "artifacts",
                "" if section != "argv" => {}
                _ => match section {
                    "" => {
                        let (k, v) = line.split_once(" = ").ok_or_else(|| bad(line))?;
                        m.header.push((k.to_string(), v.to_string()));
                    }
                    "argv" => {
                        if !line.is_empty() {
                            m.argv.push(line.to_string());
                        }
                    }
                    _ => {
                        let mut parts = line.split(' ');
                        let (Some(file), Some(sha256)) = (parts.next(), parts.next()) else {
                            return Err(bad(line));
                        };
                        let volatile = match parts.next() {
                            None => false,
                            Some("volatile") => true,
                            Some(_) => return Err(bad(line)),
                        };
                        m.artifacts.push(Artifact { file: file.into(), sha256: sha256.into(), volatile });
                    }
                },
            }
        }
        if m.argv.is_empty() {
            return Err(CliError::Data("manifest has no [argv] section".into()));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Drops `--out DIR` / `--out=DIR` so the manifest is independent of where
/// the outputs were written.
pub fn strip_out_arg(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}
