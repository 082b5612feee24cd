//! Measurement-record simulation and ensemble statistics.
//!
//! Every record draws from its own ChaCha8 stream, keyed by
//! `(master_seed, record_index)`, so results do not depend on how records
//! are scheduled across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{FourierPosterior, Outcome, PosteriorLimits};
use crate::error::{Error, Result};
use crate::policy::{ControlPolicy, PhaseController};
use crate::signal::{LikelihoodTable, TableParams};

/// Largest ensemble a precision-targeted run may use.
pub const DEFAULT_RECORD_CAP: usize = 1_000_000;

/// How the true system phase of each record is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    Fixed(f64),
    /// Uniform on `(-pi/2, pi/2]`, drawn per record.
    UniformRandom,
}

impl Default for PhaseMode {
    fn default() -> Self {
        PhaseMode::Fixed(0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub table: TableParams,
    /// Detections per record.
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub policy: ControlPolicy,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub limits: PosteriorLimits,
}

impl TrialConfig {
    /// Adaptive policy, `phi = 0.5`, seed 0.
    pub fn new(table: TableParams, m: usize) -> Self {
        TrialConfig {
            table,
            m,
            policy: ControlPolicy::default(),
            phase_mode: PhaseMode::default(),
            master_seed: 0,
            limits: PosteriorLimits::default(),
        }
    }

    pub fn with_policy(mut self, policy: ControlPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_phase(mut self, phase_mode: PhaseMode) -> Self {
        self.phase_mode = phase_mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn n_bar(&self) -> f64 {
        self.table.n_bar
    }

    pub fn eta(&self) -> f64 {
        self.table.eta
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("records need at least one detection (M >= 1)"));
        }
        if let PhaseMode::Fixed(phi) = self.phase_mode {
            let half = std::f64::consts::FRAC_PI_2;
            if !(phi > -half && phi <= half) {
                return Err(Error::invalid(format!("fixed phase {phi} outside (-pi/2, pi/2]")));
            }
        }
        Ok(())
    }
}

/// One simulated measurement record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub true_phi: f64,
    pub thetas: Vec<f64>,
    pub outcomes: Vec<Outcome>,
    /// Number of even outcomes.
    pub ell: usize,
    pub estimate: f64,
    /// Wrapped `estimate - true_phi`.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub j: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub n_bar: f64,
    pub eta: f64,
    pub mse: f64,
    /// Standard error of `mse`.
    pub mse_se: f64,
    pub bias: f64,
    /// `mse * M * n_bar^2`.
    pub hl_ratio: f64,
    /// `mse * M * n_bar (n_bar + 2)`.
    pub crb_ratio: f64,
}

impl EnsembleStats {
    /// Aggregates wrapped errors in the order given.
    pub fn from_errors(errors: &[f64], m: usize, n_bar: f64, eta: f64) -> Self {
        let j = errors.len();
        let jf = j as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for &e in errors {
            sum += e;
            sum_sq += e * e;
        }
        let bias = sum / jf;
        let mse = sum_sq / jf;
        let mse_se = if j >= 2 {
            let var = errors.iter().map(|e| (e * e - mse).powi(2)).sum::<f64>() / (jf - 1.0);
            (var / jf).sqrt()
        } else {
            f64::NAN
        };
        let mf = m as f64;
        EnsembleStats {
            j,
            m,
            n_bar,
            eta,
            mse,
            mse_se,
            bias,
            hl_ratio: mse * mf * n_bar * n_bar,
            crb_ratio: mse * mf * n_bar * (n_bar + 2.0),
        }
    }

    pub fn hl_ratio_se(&self) -> f64 {
        self.mse_se * self.m as f64 * self.n_bar * self.n_bar
    }

    pub fn crb_ratio_se(&self) -> f64 {
        self.mse_se * self.m as f64 * self.n_bar * (self.n_bar + 2.0)
    }

    pub fn relative_se(&self) -> f64 {
        self.mse_se / self.mse
    }
}

/// Ensemble size: a fixed record count, or records until the relative
/// standard error of the MSE drops to `target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleSize {
    Records(usize),
    Precision { target: f64, record_cap: usize },
}

/// A validated configuration with its likelihood table and controller.
#[derive(Clone)]
pub struct Simulation {
    config: TrialConfig,
    table: LikelihoodTable<f64>,
    controller: PhaseController<f64>,
}

impl Simulation {
    pub fn new(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let table = LikelihoodTable::build(&config.table)?;
        let controller = PhaseController::new(config.policy, &table)?;
        Ok(Simulation {
            config,
            table,
            controller,
        })
    }

    /// Like [`Simulation::new`], but enlarges an adaptive grid that is too
    /// coarse for the table. The stored config records the grid used.
    pub fn auto(mut config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let table = LikelihoodTable::build(&config.table)?;
        if let ControlPolicy::Adaptive {
            grid_points,
            refine_tolerance,
        } = config.policy
        {
            let need = ControlPolicy::min_grid_points(table.order());
            if grid_points < need {
                config.policy = ControlPolicy::Adaptive {
                    grid_points: need.next_power_of_two(),
                    refine_tolerance,
                };
            }
        }
        let controller = PhaseController::new(config.policy, &table)?;
        Ok(Simulation {
            config,
            table,
            controller,
        })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    pub fn table(&self) -> &LikelihoodTable<f64> {
        &self.table
    }

    pub fn record_rng(&self, record_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.master_seed);
        rng.set_stream(record_index);
        rng
    }

    pub fn run_record(&self, record_index: u64) -> Result<TrialRecord> {
        self.run_record_with_posterior(record_index).map(|(r, _)| r)
    }

    /// Simulates record `record_index` and also returns its final posterior.
    pub fn run_record_with_posterior(&self, record_index: u64) -> Result<(TrialRecord, FourierPosterior<f64>)> {
        let wrap = |e: Error| Error::Record {
            index: record_index,
            source: Box::new(e),
        };
        let cfg = &self.config;
        let mut rng = self.record_rng(record_index);
        let true_phi = match cfg.phase_mode {
            PhaseMode::Fixed(phi) => phi,
            PhaseMode::UniformRandom => {
                let u: f64 = rng.random();
                std::f64::consts::FRAC_PI_2 - std::f64::consts::PI * u
            }
        };

        let mut post = FourierPosterior::flat_with(cfg.limits);
        let mut thetas = Vec::with_capacity(cfg.m);
        let mut outcomes = Vec::with_capacity(cfg.m);
        let mut ell = 0;
        for step in 0..cfg.m {
            let theta = if step == 0 {
                cfg.policy.initial_phase(&mut rng)
            } else {
                self.controller.choose(&post, &self.table)
            };
            let p_even = self.table.even_probability(true_phi, theta);
            let u: f64 = rng.random();
            let outcome = if u < p_even { Outcome::Even } else { Outcome::Odd };
            if outcome.is_even() {
                ell += 1;
            }
            post = post.update(outcome, theta, &self.table).map_err(wrap)?;
            thetas.push(theta);
            outcomes.push(outcome);
        }

        let estimate = post.estimate().map_err(wrap)?;
        let error = crate::bayes::wrapped_error(estimate, true_phi);
        Ok((
            TrialRecord {
                true_phi,
                thetas,
                outcomes,
                ell,
                estimate,
                error,
            },
            post,
        ))
    }

    /// Wrapped errors of records `start..end`, in index order.
    pub fn errors(&self, start: u64, end: u64) -> Result<Vec<f64>> {
        (start..end)
            .into_par_iter()
            .map(|i| self.run_record(i).map(|r| r.error))
            .collect()
    }

    fn stats(&self, errors: &[f64]) -> EnsembleStats {
        EnsembleStats::from_errors(errors, self.config.m, self.config.n_bar(), self.config.eta())
    }

    pub fn run_ensemble(&self, j: usize) -> Result<EnsembleStats> {
        if j < 2 {
            return Err(Error::invalid("an ensemble needs at least two records"));
        }
        Ok(self.stats(&self.errors(0, j as u64)?))
    }

    /// Adds records in batches until `mse_se / mse <= target`.
    pub fn run_to_precision(&self, target: f64, record_cap: usize) -> Result<EnsembleStats> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::invalid(format!("target precision must lie in (0, 1), got {target}")));
        }
        const MIN_BATCH: usize = 256;
        let mut errors: Vec<f64> = Vec::new();
        let mut next = MIN_BATCH.min(record_cap);
        loop {
            let start = errors.len();
            errors.extend(self.errors(start as u64, next as u64)?);
            let stats = self.stats(&errors);
            let rel = stats.relative_se();
            if errors.len() >= 2 && rel <= target {
                return Ok(stats);
            }
            if errors.len() >= record_cap {
                return Err(Error::PartialResult {
                    stats: Box::new(stats),
                    target,
                    achieved: rel,
                });
            }
            // SE scales as J^{-1/2}; aim slightly past the projected size
            let projected = if rel.is_finite() {
                (errors.len() as f64 * (rel / target).powi(2) * 1.1).ceil() as usize
            } else {
                2 * errors.len()
            };
            next = projected.max(errors.len() + MIN_BATCH).min(record_cap);
        }
    }

    pub fn run(&self, size: EnsembleSize) -> Result<EnsembleStats> {
        match size {
            EnsembleSize::Records(j) => self.run_ensemble(j),
            EnsembleSize::Precision { target, record_cap } => self.run_to_precision(target, record_cap),
        }
    }
}

pub fn run_record(config: &TrialConfig, record_index: u64) -> Result<TrialRecord> {
    Simulation::new(config.clone())?.run_record(record_index)
}

pub fn run_ensemble(config: &TrialConfig, size: EnsembleSize) -> Result<EnsembleStats> {
    Simulation::new(config.clone())?.run(size)
}

/// Result for one grid point of a sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub config: TrialConfig,
    pub result: Result<EnsembleStats>,
}

/// Runs every configuration; a failing point does not stop the rest.
/// Adaptive grids are enlarged per point as in [`Simulation::auto`].
pub fn sweep(configs: &[TrialConfig], size: EnsembleSize) -> Vec<SweepPoint> {
    configs
        .iter()
        .map(|cfg| match Simulation::auto(cfg.clone()) {
            Ok(sim) => SweepPoint {
                result: sim.run(size),
                config: sim.config().clone(),
            },
            Err(e) => SweepPoint {
                config: cfg.clone(),
                result: Err(e),
            },
        })
        .collect()
}
