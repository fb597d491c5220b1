use std::path::Path;

use anyhow::{bail, Context, Result};
use boxsd_core::decoder::{NormKind, RestartSchedule};
use boxsd_core::model::{make_constellation, Constellation};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    ErrorRate,
    ComplexityVsEpsilon,
    ComplexityVsLevel,
    ComplexityVsSnr,
    TpbReport,
    ValidateCdfs,
    PepBounds,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ErrorRate => "error-rate",
            Experiment::ComplexityVsEpsilon => "complexity-vs-epsilon",
            Experiment::ComplexityVsLevel => "complexity-vs-level",
            Experiment::ComplexityVsSnr => "complexity-vs-snr",
            Experiment::TpbReport => "tpb-report",
            Experiment::ValidateCdfs => "validate-cdfs",
            Experiment::PepBounds => "pep-bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_norms")]
    pub norms: Vec<String>,
    pub system: SystemSection,
    #[serde(default)]
    pub radius: RadiusSection,
    #[serde(default)]
    pub pep: PepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub m: usize,
    pub n: usize,
    #[serde(default = "default_constellation")]
    pub constellation: String,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusSection {
    /// Fixed-radius ε grid.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Restart ε sequence; `0.1^i` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
    /// Error-rate runs use the restart schedule unless this is false.
    #[serde(default = "default_true")]
    pub restart: bool,
}

impl Default for RadiusSection {
    fn default() -> Self {
        RadiusSection {
            eps: default_eps(),
            schedule: None,
            max_runs: default_max_runs(),
            restart: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PepSection {
    /// `‖b‖²` of the error vector; the smallest nonzero squared symbol
    /// distance when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_norm2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default = "default_format")]
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            path: None,
            format: Format::Csv,
        }
    }
}

fn default_seed() -> u64 {
    1
}
fn default_trials() -> u64 {
    1000
}
fn default_norms() -> Vec<String> {
    NormKind::ALL.iter().map(|n| n.name().to_string()).collect()
}
fn default_constellation() -> String {
    "4qam".into()
}
fn default_snr() -> Vec<f64> {
    vec![15.0]
}
fn default_eps() -> Vec<f64> {
    vec![1e-2]
}
fn default_max_runs() -> usize {
    12
}
fn default_true() -> bool {
    true
}
fn default_format() -> Format {
    Format::Csv
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    /// Reads a TOML config, or a JSON sidecar written by an earlier run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let is_json =
            path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            let mut v: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("invalid JSON in {}", path.display()))?;
            if let Some(inner) = v.get_mut("config") {
                v = inner.take();
            }
            serde_json::from_value(v)
                .with_context(|| format!("invalid config in {}", path.display()))
        } else {
            toml::from_str(&text).map_err(|e| {
                let msg = e.message().to_string();
                anyhow::anyhow!("invalid config in {}: {msg}", path.display())
            })
        }
    }

    /// Applies overrides, pins the experiment and checks every field.
    pub fn resolve(mut self, experiment: Experiment, o: &Overrides) -> Result<Self> {
        match self.experiment {
            Some(e) if e != experiment => bail!(
                "config is for experiment `{}`, not `{}`",
                e.name(),
                experiment.name()
            ),
            _ => self.experiment = Some(experiment),
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.m == 0 || s.n < s.m {
            bail!("need n >= m >= 1, got m = {} n = {}", s.m, s.n);
        }
        self.constellation()?;
        self.norm_kinds()?;
        if s.snr_db.is_empty() || s.snr_db.iter().any(|x| !x.is_finite()) {
            bail!("snr_db must be a nonempty list of finite values");
        }
        let r = &self.radius;
        if r.eps.is_empty() || r.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            bail!("radius.eps must be a nonempty list of values in (0, 1)");
        }
        self.schedule()?;
        if let Some(b) = self.pep.b_norm2 {
            if !(b > 0.0 && b.is_finite()) {
                bail!("pep.b_norm2 must be positive, got {b}");
            }
        }
        let needs_trials = !matches!(
            self.experiment,
            Some(
                Experiment::TpbReport
                    | Experiment::PepBounds
                    | Experiment::ComplexityVsEpsilon
                    | Experiment::ComplexityVsLevel
            )
        );
        if needs_trials && self.trials == 0 {
            bail!("trials must be at least 1 for this experiment");
        }
        Ok(())
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.expect("resolved config")
    }

    pub fn constellation(&self) -> Result<Constellation> {
        make_constellation(&self.system.constellation).map_err(Into::into)
    }

    pub fn norm_kinds(&self) -> Result<Vec<NormKind>> {
        if self.norms.is_empty() {
            bail!("norms must not be empty");
        }
        self.norms
            .iter()
            .map(|s| {
                NormKind::parse(s)
                    .with_context(|| format!("unknown norm `{s}` (use l2, linf, ltildeinf)"))
            })
            .collect()
    }

    pub fn schedule(&self) -> Result<RestartSchedule> {
        let r = &self.radius;
        Ok(match &r.schedule {
            Some(eps) => RestartSchedule::new(eps.clone(), r.max_runs)?,
            None => RestartSchedule::geometric(r.max_runs)?,
        })
    }

    pub fn out_path(&self) -> String {
        self.output.path.clone().unwrap_or_else(|| {
            let ext = match self.output.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            format!("{}.{ext}", self.experiment().name())
        })
    }
}
