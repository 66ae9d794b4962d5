use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use gva_core::data::{self, synthetic, EpilepsyVariant};
use gva_core::engine::fit_rng;
use gva_core::linalg::SparsityPattern;
use gva_core::models::{GaussianTarget, GlmmFamily, GlmmSpec, ParamBlock, SvSpec, TargetModel};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelTag {
    #[value(name = "epilepsy1")]
    Epilepsy1,
    #[value(name = "epilepsy2")]
    Epilepsy2,
    #[value(name = "toenail")]
    Toenail,
    #[value(name = "polypharmacy")]
    Polypharmacy,
    #[value(name = "sv")]
    Sv,
    /// Gaussian with known mean and sparse precision factor.
    #[value(name = "gaussian-test")]
    GaussianTest,
    /// Simulated logistic random-intercept model.
    #[value(name = "glmm-synth")]
    GlmmSynth,
    /// Simulated stochastic volatility returns.
    #[value(name = "sv-synth")]
    SvSynth,
}

impl ModelTag {
    pub fn name(self) -> &'static str {
        match self {
            ModelTag::Epilepsy1 => "epilepsy1",
            ModelTag::Epilepsy2 => "epilepsy2",
            ModelTag::Toenail => "toenail",
            ModelTag::Polypharmacy => "polypharmacy",
            ModelTag::Sv => "sv",
            ModelTag::GaussianTest => "gaussian-test",
            ModelTag::GlmmSynth => "glmm-synth",
            ModelTag::SvSynth => "sv-synth",
        }
    }

    fn needs_data(self) -> bool {
        matches!(self, ModelTag::Epilepsy1 | ModelTag::Epilepsy2 | ModelTag::Toenail | ModelTag::Polypharmacy | ModelTag::Sv)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PatternKind {
    /// Tridiagonal latent band plus three dense global rows.
    Band,
    /// Diagonal latent block plus three dense global rows.
    Arrow,
}

#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelTag,
    /// CSV file for data-backed models.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Dimension of the gaussian-test target.
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    /// Precision pattern of the gaussian-test target.
    #[arg(long, value_enum, default_value_t = PatternKind::Band)]
    pub pattern: PatternKind,
    /// Subjects for glmm-synth.
    #[arg(long, default_value_t = 50)]
    pub subjects: usize,
    /// Observations per subject for glmm-synth.
    #[arg(long, default_value_t = 6)]
    pub obs_per_subject: usize,
    /// Series length for sv-synth.
    #[arg(long, default_value_t = 945)]
    pub length: usize,
    /// Seed for simulated targets and data.
    #[arg(long, default_value_t = 1)]
    pub data_seed: u64,
}

pub enum Target {
    Glmm(GlmmSpec),
    Sv(SvSpec),
    Gaussian(GaussianTarget),
}

impl Target {
    pub fn model(&self) -> &dyn TargetModel {
        match self {
            Target::Glmm(m) => m,
            Target::Sv(m) => m,
            Target::Gaussian(m) => m,
        }
    }

    pub fn sv(&self) -> Option<&SvSpec> {
        match self {
            Target::Sv(m) => Some(m),
            _ => None,
        }
    }

    pub fn gaussian(&self) -> Option<&GaussianTarget> {
        match self {
            Target::Gaussian(m) => Some(m),
            _ => None,
        }
    }
}

pub fn gaussian_pattern(kind: PatternKind, dim: usize) -> CliResult<SparsityPattern> {
    if dim < 5 {
        return Err(CliError::Usage(format!("--dim must be at least 5, got {dim}")));
    }
    Ok(match kind {
        PatternKind::Band => SparsityPattern::ssm(dim - 3, 1, 3)?,
        PatternKind::Arrow => SparsityPattern::glmm(dim - 3, 1, 3)?,
    })
}

impl ModelArgs {
    pub fn data_path(&self) -> CliResult<Option<&Path>> {
        match (&self.data, self.model.needs_data()) {
            (Some(p), true) => Ok(Some(p.as_path())),
            (None, true) => Err(CliError::Usage(format!("--data is required for --model {}", self.model.name()))),
            (_, false) => Ok(None),
        }
    }

    pub fn load(&self) -> CliResult<Target> {
        let path = self.data_path()?;
        let read_err = |e: gva_core::Error| CliError::Data(format!("{}: {e}", path.map_or(String::new(), |p| p.display().to_string())));
        Ok(match self.model {
            ModelTag::Epilepsy1 | ModelTag::Epilepsy2 => {
                let table = data::load_csv(path.unwrap(), &data::epilepsy_schema()).map_err(read_err)?;
                let variant = if self.model == ModelTag::Epilepsy1 { EpilepsyVariant::I } else { EpilepsyVariant::II };
                Target::Glmm(data::build_epilepsy_model(&table, variant).map_err(read_err)?)
            }
            ModelTag::Toenail => {
                let table = data::load_csv(path.unwrap(), &data::toenail_schema()).map_err(read_err)?;
                Target::Glmm(data::build_toenail_model(&table).map_err(read_err)?)
            }
            ModelTag::Polypharmacy => {
                let table = data::load_csv(path.unwrap(), &data::polypharmacy_schema()).map_err(read_err)?;
                Target::Glmm(data::build_polypharmacy_model(&table).map_err(read_err)?)
            }
            ModelTag::Sv => {
                let series = data::load_returns(path.unwrap()).map_err(read_err)?;
                Target::Sv(SvSpec::new(series.y)?)
            }
            ModelTag::GaussianTest => {
                let pattern = Arc::new(gaussian_pattern(self.pattern, self.dim)?);
                Target::Gaussian(GaussianTarget::random(pattern, &mut fit_rng(self.data_seed))?)
            }
            ModelTag::GlmmSynth => {
                if self.subjects == 0 || self.obs_per_subject == 0 {
                    return Err(CliError::Usage("--subjects and --obs-per-subject must be positive".into()));
                }
                Target::Glmm(synthetic::synthetic_glmm(
                    GlmmFamily::BernoulliLogit,
                    self.subjects,
                    self.obs_per_subject,
                    self.data_seed,
                )?)
            }
            ModelTag::SvSynth => {
                if self.length < 2 {
                    return Err(CliError::Usage("--length must be at least 2".into()));
                }
                Target::Sv(synthetic::synthetic_sv(self.length, self.data_seed)?)
            }
        })
    }
}

/// Wraps a model and shifts the last gradient component; a negative control
/// for the gradient checker.
pub struct CorruptedGradient<'a>(pub &'a dyn TargetModel);

impl TargetModel for CorruptedGradient<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn log_h(&self, theta: &[f64]) -> f64 {
        self.0.log_h(theta)
    }
    fn grad_log_h(&self, theta: &[f64], grad: &mut [f64]) {
        self.0.grad_log_h(theta, grad);
        if let Some(last) = grad.last_mut() {
            *last += 0.01 * (1.0 + last.abs());
        }
    }
    fn recommended_pattern(&self) -> gva_core::Result<SparsityPattern> {
        self.0.recommended_pattern()
    }
    fn blocks(&self) -> Vec<ParamBlock> {
        self.0.blocks()
    }
    fn param_names(&self) -> Vec<String> {
        self.0.param_names()
    }
}
