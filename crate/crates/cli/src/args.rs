use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmsv_core::policy::{DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOLERANCE};
use tmsv_core::{ControlPolicy, PhaseMode, TableParams, TrialConfig};

use crate::config::{FisherConfig, PosteriorConfig, RunConfig, SignalConfig, SweepSpec, VerifyConfig};
use crate::presets::Preset;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "tmsv", version, about = "Adaptive parity phase estimation with two-mode squeezed vacuum")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected parity (or lossy even-minus-odd signal) against phase difference.
    Signal(SignalArgs),
    /// Fisher information against phase difference, with reference limits.
    Fisher(FisherArgs),
    /// Final posterior density of one record.
    Posterior(PosteriorArgs),
    /// Ensemble MSE over a grid of photon numbers, efficiencies and record lengths.
    Sweep(SweepArgs),
    /// Check the signal model against the Fock-space oracle and closed forms.
    Verify(VerifyArgs),
    /// Re-run the configuration stored in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Adaptive,
    Static,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long = "nbar", default_value_t = 3.0, allow_negative_numbers = true)]
    pub n_bar: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,
    /// Fock weight left out of the expansion.
    #[arg(long = "tail-eps", default_value_t = 1e-12, allow_negative_numbers = true)]
    pub tail_eps: f64,
    /// Fixed number of twin-Fock terms instead of the tail criterion.
    #[arg(long = "table-terms")]
    pub table_terms: Option<usize>,
}

impl TableArgs {
    fn params(&self) -> TableParams {
        let mut p = TableParams::new(self.n_bar, self.eta).with_tail_epsilon(self.tail_eps);
        p.table_terms = self.table_terms;
        p
    }
}

#[derive(Debug, Args)]
pub struct SignalArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Points over [-pi/2, pi/2], endpoints included.
    #[arg(long, default_value_t = 181)]
    pub grid: usize,
    /// CSV path; stdout when omitted. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[arg(long = "nbar", default_value_t = 3.0, allow_negative_numbers = true)]
    pub n_bar: f64,
    #[arg(long, default_value_t = 181)]
    pub grid: usize,
    /// Detections for the CRB, HL and SNL references.
    #[arg(long = "M", default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    #[arg(long = "nbar", allow_negative_numbers = true)]
    pub n_bar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// True phase in (-pi/2, pi/2].
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Control phase of the static policy.
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Even count of a synthetic static record (skips simulation).
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Adaptive search grid; enlarged automatically when too coarse.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long = "refine-tol", allow_negative_numbers = true)]
    pub refine_tol: Option<f64>,
    #[arg(long = "tail-eps", default_value_t = 1e-12, allow_negative_numbers = true)]
    pub tail_eps: f64,
    #[arg(long = "table-terms")]
    pub table_terms: Option<usize>,
    /// Density curve resolution.
    #[arg(long = "curve-points")]
    pub curve_points: Option<usize>,
    /// Density CSV path; the record goes to `<stem>.record.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep description.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long = "nbar", value_delimiter = ',', allow_negative_numbers = true)]
    pub n_bar: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eta: Vec<f64>,
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Vec<usize>,
    #[arg(long = "J", conflicts_with = "precision")]
    pub j: Option<usize>,
    /// Target relative standard error of each MSE.
    #[arg(long, allow_negative_numbers = true)]
    pub precision: Option<f64>,
    #[arg(long = "record-cap")]
    pub record_cap: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Draw the true phase uniformly per record.
    #[arg(long = "random-phase", conflicts_with = "phi")]
    pub random_phase: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long = "refine-tol", allow_negative_numbers = true)]
    pub refine_tol: Option<f64>,
    #[arg(long = "tail-eps", allow_negative_numbers = true)]
    pub tail_eps: Option<f64>,
    #[arg(long = "table-terms")]
    pub table_terms: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub inject_fault: Option<f64>,
    /// Optional CSV report; the summary always goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the regenerated output.
    #[arg(long)]
    pub out: PathBuf,
}

fn resolve_policy(
    kind: PolicyKind,
    theta0: Option<f64>,
    grid: Option<usize>,
    refine_tol: Option<f64>,
) -> ControlPolicy {
    match kind {
        PolicyKind::Static => ControlPolicy::Static {
            theta0: theta0.unwrap_or(0.0),
        },
        PolicyKind::Adaptive => ControlPolicy::Adaptive {
            grid_points: grid.unwrap_or(DEFAULT_GRID_POINTS),
            refine_tolerance: refine_tol.unwrap_or(DEFAULT_REFINE_TOLERANCE),
        },
    }
}

fn kind_of(policy: &ControlPolicy) -> PolicyKind {
    match policy {
        ControlPolicy::Adaptive { .. } => PolicyKind::Adaptive,
        ControlPolicy::Static { .. } => PolicyKind::Static,
    }
}

impl SignalArgs {
    pub fn resolve(&self) -> RunConfig {
        RunConfig::Signal(SignalConfig {
            table: self.table.params(),
            grid: self.grid,
        })
    }
}

impl FisherArgs {
    pub fn resolve(&self) -> RunConfig {
        RunConfig::Fisher(FisherConfig {
            n_bar: self.n_bar,
            grid: self.grid,
            m: self.m,
        })
    }
}

impl PosteriorArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let preset = match self.preset {
            Some(p) => Some(
                p.posterior()
                    .ok_or_else(|| CliError::Usage(format!("preset {p:?} is a sweep; use `tmsv sweep`")))?,
            ),
            None => None,
        };
        let kind = self
            .policy
            .or(preset.map(|p| kind_of(&p.policy)))
            .unwrap_or(PolicyKind::Adaptive);
        let preset_theta0 = match preset.map(|p| p.policy) {
            Some(ControlPolicy::Static { theta0 }) => Some(theta0),
            _ => None,
        };
        let policy = resolve_policy(kind, self.theta0.or(preset_theta0), self.grid, self.refine_tol);

        let n_bar = self.n_bar.or(preset.map(|p| p.n_bar)).unwrap_or(3.0);
        let eta = self.eta.or(preset.map(|p| p.eta)).unwrap_or(1.0);
        let phi = self.phi.or(preset.map(|p| p.phi)).unwrap_or(0.5);
        let m = self.m.or(preset.map(|p| p.m)).unwrap_or(256);
        // a preset's synthetic record only applies while its record length does
        let ell = self.ell.or_else(|| {
            preset
                .filter(|p| self.m.is_none() || self.m == Some(p.m))
                .filter(|_| kind == PolicyKind::Static)
                .and_then(|p| p.ell)
        });
        if ell.is_some() && kind != PolicyKind::Static {
            return Err(CliError::Usage("--ell describes a static record; use --policy static".into()));
        }

        let mut table = TableParams::new(n_bar, eta).with_tail_epsilon(self.tail_eps);
        table.table_terms = self.table_terms;
        let trial = TrialConfig::new(table, m)
            .with_policy(policy)
            .with_phase(PhaseMode::Fixed(phi))
            .with_seed(self.seed);
        Ok(RunConfig::Posterior(PosteriorConfig {
            trial,
            ell,
            record_index: 0,
            curve_points: self.curve_points,
        }))
    }
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut spec: SweepSpec = match (&self.spec, self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            (None, Some(p)) => p
                .sweep()
                .ok_or_else(|| CliError::Usage(format!("preset {p:?} is a single record; use `tmsv posterior`")))?,
            (None, None) => SweepSpec {
                n_bar: Vec::new(),
                eta: vec![1.0],
                m: Vec::new(),
                ..Preset::Fig4.sweep().expect("sweep preset")
            },
        };

        if !self.n_bar.is_empty() {
            spec.n_bar = self.n_bar.clone();
        }
        if !self.eta.is_empty() {
            spec.eta = self.eta.clone();
        }
        if !self.m.is_empty() {
            spec.m = self.m.clone();
        }
        if let Some(j) = self.j {
            spec.j = Some(j);
            spec.precision = None;
        }
        if let Some(p) = self.precision {
            spec.precision = Some(p);
            spec.j = None;
        }
        if let Some(cap) = self.record_cap {
            spec.record_cap = cap;
        }
        if let Some(phi) = self.phi {
            spec.phase_mode = PhaseMode::Fixed(phi);
        }
        if self.random_phase {
            spec.phase_mode = PhaseMode::UniformRandom;
        }
        if let Some(seed) = self.seed {
            spec.master_seed = seed;
        }
        if self.policy.is_some() || self.theta0.is_some() || self.grid.is_some() || self.refine_tol.is_some() {
            let (theta0, grid, tol) = match spec.policy {
                ControlPolicy::Static { theta0 } => (Some(theta0), None, None),
                ControlPolicy::Adaptive {
                    grid_points,
                    refine_tolerance,
                } => (None, Some(grid_points), Some(refine_tolerance)),
            };
            let kind = self.policy.unwrap_or(kind_of(&spec.policy));
            spec.policy = resolve_policy(
                kind,
                self.theta0.or(theta0),
                self.grid.or(grid),
                self.refine_tol.or(tol),
            );
        }
        if let Some(eps) = self.tail_eps {
            spec.tail_epsilon = eps;
        }
        if self.table_terms.is_some() {
            spec.table_terms = self.table_terms;
        }
        spec.validate()?;
        Ok(RunConfig::Sweep(spec))
    }
}

impl VerifyArgs {
    pub fn resolve(&self) -> RunConfig {
        RunConfig::Verify(VerifyConfig {
            fault: self.inject_fault,
        })
    }
}
