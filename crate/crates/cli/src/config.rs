//! The TOML config document and its resolution into an [`ExtractionConfig`].
//!
//! ```toml
//! [model]
//! kind = "diode"            # diode | fet | external
//! temperature = 300.0       # diode only
//! command = ["./sim", "-q"] # external only; run as `command... <dir>`
//! timeout = 60.0            # external only, seconds
//!
//! [[parameters]]
//! name = "IS"
//! low = 1e-25
//! high = 1e-22
//! scale = "log"             # linear (default) | log
//!
//! [[experiments]]
//! name = "iv"
//! data = "data/diode_iv.csv" # relative to the config file
//! output = "ID"             # fet only: ID | gm
//! loss = "clipped"          # clipped (default) | squared | log | abs
//! epsilon = 1e-10
//! delta_squared = 0.15      # or `delta`
//! weight = 1.0
//! report_threshold = 1e-10
//!
//! [optimizer]
//! n_trials = 250
//! seed = 0
//! sampler = "tpe"           # tpe | random
//!
//! [workflow]
//! train_fraction = 0.8
//! retrain_trials = 50
//! tighten_factor = 0.4
//!
//! [corruption]              # optional
//! fraction = 0.5
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use dfx_core::loss::{LossKind, LossSpec, ScalarizerSpec};
use dfx_core::models::{Experiment, ExternalCommand, Model};
use dfx_core::sampler::{SamplerConfig, SamplerKind};
use dfx_core::space::{ParamSpec, Scale, SearchSpace};
use dfx_core::workflow::{CorruptionSpec, ExtractionConfig};

use crate::data::read_experiment_csv;
use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub model: ModelSection,
    #[serde(default)]
    pub parameters: Vec<ParameterEntry>,
    #[serde(default)]
    pub experiments: Vec<ExperimentEntry>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub workflow: WorkflowSection,
    pub corruption: Option<CorruptionSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Diode,
    Fet,
    External,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub temperature: Option<f64>,
    pub command: Option<Vec<String>>,
    pub timeout: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScaleName {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterEntry {
    pub name: String,
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub scale: ScaleName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossName {
    Abs,
    Log,
    #[default]
    Clipped,
    Squared,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentEntry {
    pub name: String,
    pub data: PathBuf,
    pub output: Option<String>,
    #[serde(default)]
    pub loss: LossName,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub delta_squared: Option<f64>,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default)]
    pub report_threshold: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerName,
    pub gamma: Option<f64>,
    pub n_startup: Option<usize>,
    pub n_candidates: Option<usize>,
    pub bandwidth_floor: Option<f64>,
}

fn default_trials() -> usize {
    250
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            n_trials: default_trials(),
            seed: 0,
            sampler: SamplerName::Tpe,
            gamma: None,
            n_startup: None,
            n_candidates: None,
            bandwidth_floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplerName {
    #[default]
    Tpe,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowSection {
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_retrain")]
    pub retrain_trials: usize,
    #[serde(default = "default_tighten")]
    pub tighten_factor: f64,
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_retrain() -> usize {
    50
}

fn default_tighten() -> f64 {
    0.4
}

impl Default for WorkflowSection {
    fn default() -> Self {
        Self {
            train_fraction: default_train_fraction(),
            retrain_trials: default_retrain(),
            tighten_factor: default_tighten(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptionSection {
    pub fraction: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_sigma() -> f64 {
    10.0
}

/// A fully resolved config file.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub extraction: ExtractionConfig,
    pub corruption: Option<CorruptionSpec>,
    pub data_paths: Vec<PathBuf>,
    pub path: PathBuf,
}

impl ConfigDocument {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Validation(vec![format!("{}: {e}", origin.display())]))
    }

    pub fn space(&self) -> Result<SearchSpace, Vec<String>> {
        let params = self
            .parameters
            .iter()
            .map(|p| ParamSpec {
                name: p.name.clone(),
                low: p.low,
                high: p.high,
                scale: match p.scale {
                    ScaleName::Linear => Scale::Linear,
                    ScaleName::Log => Scale::Log,
                },
            })
            .collect();
        SearchSpace::new(params).map_err(|violations| {
            violations
                .iter()
                .map(|v| format!("parameters: {v}"))
                .collect()
        })
    }

    pub fn model(&self, base: &Path) -> Result<Model, Vec<String>> {
        let m = &self.model;
        let mut problems = Vec::new();
        let stray = |field: &str, present: bool, problems: &mut Vec<String>| {
            if present {
                problems.push(
                    format!("model: `{field}` does not apply to kind {:?}", m.kind).to_lowercase(),
                );
            }
        };
        let model = match m.kind {
            ModelKind::Diode => {
                stray("command", m.command.is_some(), &mut problems);
                stray("timeout", m.timeout.is_some(), &mut problems);
                let temperature = m.temperature.unwrap_or(300.0);
                if !(temperature > 0.0 && temperature.is_finite()) {
                    problems.push(format!(
                        "model.temperature must be positive, got {temperature}"
                    ));
                }
                Model::Diode { temperature }
            }
            ModelKind::Fet => {
                stray("temperature", m.temperature.is_some(), &mut problems);
                stray("command", m.command.is_some(), &mut problems);
                stray("timeout", m.timeout.is_some(), &mut problems);
                Model::Fet
            }
            ModelKind::External => {
                stray("temperature", m.temperature.is_some(), &mut problems);
                let command = m.command.clone().unwrap_or_default();
                let mut cmd = match command.split_first() {
                    Some((program, args)) => ExternalCommand::new(resolve_program(base, program))
                        .with_args(args.to_vec()),
                    None => {
                        problems.push("model.command is required for kind external".to_string());
                        ExternalCommand::new("")
                    }
                };
                if let Some(t) = m.timeout {
                    if t > 0.0 && t.is_finite() {
                        cmd = cmd.with_timeout(Duration::from_secs_f64(t));
                    } else {
                        problems.push(format!("model.timeout must be positive, got {t}"));
                    }
                }
                Model::External(cmd)
            }
        };
        if problems.is_empty() {
            Ok(model)
        } else {
            Err(problems)
        }
    }

    pub fn sampler(&self) -> SamplerConfig {
        let o = &self.optimizer;
        let mut s = SamplerConfig::default();
        if o.sampler == SamplerName::Random {
            s.kind = SamplerKind::Random;
        }
        if let Some(g) = o.gamma {
            s.gamma = g;
        }
        if let Some(n) = o.n_startup {
            s.n_startup = n;
        }
        if let Some(n) = o.n_candidates {
            s.n_candidates = n;
        }
        if let Some(b) = o.bandwidth_floor {
            s.bandwidth_floor = b;
        }
        s
    }

    pub fn loss(&self, entry: &ExperimentEntry) -> Result<LossSpec, String> {
        let here = format!("experiment `{}`", entry.name);
        let kind = match entry.loss {
            LossName::Abs => LossKind::Abs,
            LossName::Log => LossKind::LogAbs,
            LossName::Clipped => LossKind::ClippedRobust,
            LossName::Squared => LossKind::SquaredLog,
        };
        let delta = match (entry.delta, entry.delta_squared) {
            (Some(_), Some(_)) => {
                return Err(format!(
                    "{here}: give either `delta` or `delta_squared`, not both"
                ))
            }
            (Some(d), None) => Some(d),
            (None, Some(d2)) if d2 >= 0.0 => Some(d2.sqrt()),
            (None, Some(d2)) => {
                return Err(format!("{here}: delta_squared must be positive, got {d2}"))
            }
            (None, None) => None,
        };
        if kind.uses_epsilon() && entry.epsilon.is_none() {
            return Err(
                format!("{here}: `epsilon` is required for loss {:?}", entry.loss).to_lowercase(),
            );
        }
        if kind.uses_delta() && delta.is_none() {
            return Err(format!("{here}: `delta` is required for the clipped loss"));
        }
        if !kind.uses_epsilon() && entry.epsilon.is_some() {
            return Err(format!("{here}: `epsilon` does not apply to this loss"));
        }
        if !kind.uses_delta() && delta.is_some() {
            return Err(format!("{here}: `delta` only applies to the clipped loss"));
        }
        let spec = LossSpec {
            kind,
            epsilon: entry.epsilon,
            delta,
        };
        spec.validate().map_err(|e| format!("{here}: {e}"))?;
        Ok(spec)
    }

    pub fn corruption(&self) -> Option<CorruptionSpec> {
        self.corruption.as_ref().map(|c| CorruptionSpec {
            fraction: c.fraction,
            mu: c.mu,
            sigma: c.sigma,
            seed: c.seed,
        })
    }

    /// Resolves the document, reading every data file relative to `base`.
    /// All problems found are reported together.
    pub fn resolve(
        &self,
        base: &Path,
        seed_override: Option<u64>,
    ) -> Result<(ExtractionConfig, Vec<PathBuf>), CliError> {
        let mut problems = Vec::new();
        let space = self.space().map_err(|p| problems.extend(p)).ok();
        let model = self.model(base).map_err(|p| problems.extend(p)).ok();
        if self.experiments.is_empty() {
            problems.push("at least one [[experiments]] entry is required".to_string());
        }
        let mut experiments = Vec::new();
        let mut paths = Vec::new();
        for entry in &self.experiments {
            let path = base.join(&entry.data);
            let loss = match self.loss(entry) {
                Ok(l) => l,
                Err(e) => {
                    problems.push(e);
                    continue;
                }
            };
            match read_experiment_csv(&path, &entry.name, loss) {
                Ok(mut exp) => {
                    exp.weight = entry.weight;
                    exp.report_threshold = entry.report_threshold;
                    exp.output = entry.output.clone();
                    experiments.push(exp);
                    paths.push(path);
                }
                Err(e) => problems.push(e.to_string()),
            }
        }
        if let Some(c) = self.corruption() {
            if let Err(e) = c.validate() {
                problems.push(e.to_string());
            }
        }
        let (Some(space), Some(model)) = (space, model) else {
            return Err(CliError::Validation(problems));
        };
        if !problems.is_empty() {
            return Err(CliError::Validation(problems));
        }
        let config = ExtractionConfig {
            scalarizer: ScalarizerSpec {
                weights: experiments.iter().map(|e: &Experiment| e.weight).collect(),
            },
            sampler: self.sampler(),
            n_trials: self.optimizer.n_trials,
            retrain_trials: self.workflow.retrain_trials,
            tighten_factor: self.workflow.tighten_factor,
            train_fraction: self.workflow.train_fraction,
            seed: seed_override.unwrap_or(self.optimizer.seed),
            ..ExtractionConfig::new(model, space, experiments)
        };
        let problems = config.problems();
        if !problems.is_empty() {
            return Err(CliError::Validation(problems));
        }
        Ok((config, paths))
    }
}

fn resolve_program(base: &Path, program: &str) -> PathBuf {
    let p = Path::new(program);
    if p.is_relative() && p.components().count() > 1 {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

pub fn config_base(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn read_document(path: &Path) -> Result<ConfigDocument, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Validation(vec![format!("cannot read config {}: {e}", path.display())])
    })?;
    ConfigDocument::parse(&text, path)
}

/// Reads, resolves and validates a config file.
pub fn load_config(path: &Path, seed_override: Option<u64>) -> Result<LoadedConfig, CliError> {
    let doc = read_document(path)?;
    let (extraction, data_paths) = doc.resolve(&config_base(path), seed_override)?;
    Ok(LoadedConfig {
        extraction,
        corruption: doc.corruption(),
        data_paths,
        path: path.to_path_buf(),
    })
}
