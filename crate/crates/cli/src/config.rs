//! Fully resolved run configurations. These are what a manifest stores and
//! what `replay` executes.

use serde::{Deserialize, Serialize};
use tmsv_core::montecarlo::DEFAULT_RECORD_CAP;
use tmsv_core::{ControlPolicy, EnsembleSize, PhaseMode, PosteriorLimits, TableParams, TrialConfig};

use crate::CliError;

/// Records per point when a sweep names neither `J` nor a precision target.
pub const DEFAULT_SWEEP_RECORDS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub table: TableParams,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherConfig {
    pub n_bar: f64,
    pub grid: usize,
    /// Detections used for the reference limits.
    #[serde(rename = "M")]
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorConfig {
    /// `M = 0` is allowed here and yields the flat prior.
    pub trial: TrialConfig,
    /// Even count for a synthetic static record; no simulation when set.
    #[serde(default)]
    pub ell: Option<usize>,
    #[serde(default)]
    pub record_index: u64,
    /// Density curve resolution; at least `2x + 1` for posterior order `x`.
    #[serde(default)]
    pub curve_points: Option<usize>,
}

/// Sweep description. Every combination of `n_bar`, `eta` and `M` is one
/// point, run with the shared remaining settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n_bar: Vec<f64>,
    #[serde(default = "default_eta")]
    pub eta: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    #[serde(rename = "J", default)]
    pub j: Option<usize>,
    #[serde(default)]
    pub precision: Option<f64>,
    #[serde(default = "default_record_cap")]
    pub record_cap: usize,
    #[serde(default)]
    pub policy: ControlPolicy,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_tail_epsilon")]
    pub tail_epsilon: f64,
    #[serde(default)]
    pub table_terms: Option<usize>,
    #[serde(default)]
    pub limits: PosteriorLimits,
}

fn default_eta() -> Vec<f64> {
    vec![1.0]
}

fn default_record_cap() -> usize {
    DEFAULT_RECORD_CAP
}

fn default_tail_epsilon() -> f64 {
    1e-12
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_bar.is_empty() || self.eta.is_empty() || self.m.is_empty() {
            return Err(CliError::Usage("sweep needs non-empty n_bar, eta and M lists".into()));
        }
        if self.j.is_some() && self.precision.is_some() {
            return Err(CliError::Usage("give either J or a precision target, not both".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> EnsembleSize {
        match (self.j, self.precision) {
            (_, Some(target)) => EnsembleSize::Precision {
                target,
                record_cap: self.record_cap,
            },
            (Some(j), None) => EnsembleSize::Records(j),
            (None, None) => EnsembleSize::Records(DEFAULT_SWEEP_RECORDS),
        }
    }

    pub fn table(&self, n_bar: f64, eta: f64) -> TableParams {
        let mut params = TableParams::new(n_bar, eta).with_tail_epsilon(self.tail_epsilon);
        params.table_terms = self.table_terms;
        params
    }

    /// Point configurations, `n_bar` outermost and `M` innermost.
    pub fn configs(&self) -> Vec<TrialConfig> {
        let mut out = Vec::new();
        for &nb in &self.n_bar {
            for &eta in &self.eta {
                for &m in &self.m {
                    let mut cfg = TrialConfig::new(self.table(nb, eta), m)
                        .with_policy(self.policy)
                        .with_phase(self.phase_mode)
                        .with_seed(self.master_seed);
                    cfg.limits = self.limits;
                    out.push(cfg);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Amount added to `c_1` of every table, for exercising the failure path.
    #[serde(default)]
    pub fault: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunConfig {
    Signal(SignalConfig),
    Fisher(FisherConfig),
    Posterior(PosteriorConfig),
    Sweep(SweepSpec),
    Verify(VerifyConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Signal(_) => "signal",
            RunConfig::Fisher(_) => "fisher",
            RunConfig::Posterior(_) => "posterior",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::Verify(_) => "verify",
        }
    }

    pub fn master_seed(&self) -> Option<u64> {
        match self {
            RunConfig::Posterior(p) => Some(p.trial.master_seed),
            RunConfig::Sweep(s) => Some(s.master_seed),
            _ => None,
        }
    }

    /// Table construction parameters used by the run.
    pub fn tables(&self) -> Vec<TableParams> {
        match self {
            RunConfig::Signal(s) => vec![s.table.clone()],
            RunConfig::Fisher(_) | RunConfig::Verify(_) => Vec::new(),
            RunConfig::Posterior(p) => vec![p.trial.table.clone()],
            RunConfig::Sweep(s) => s
                .n_bar
                .iter()
                .flat_map(|&nb| s.eta.iter().map(move |&eta| s.table(nb, eta)))
                .collect(),
        }
    }
}
