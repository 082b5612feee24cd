use clap::ValueEnum;
use tmsv_core::{ControlPolicy, PhaseMode, PosteriorLimits};

use crate::config::SweepSpec;

/// Record lengths of the MSE-versus-M sweeps.
pub const SWEEP_M: [usize; 7] = [64, 128, 256, 512, 1024, 2048, 3096];
pub const SWEEP_N_BAR: [f64; 5] = [1.0, 2.0, 3.0, 5.0, 8.0];
pub const SWEEP_ETA: [f64; 4] = [1.0, 0.99, 0.95, 0.90];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Static record at theta = 0: nbar 3, phi 0.15, M 512, 466 even.
    Fig2,
    /// Adaptive record: nbar 3, phi 0.15, M 512.
    Fig3,
    /// MSE/HL sweep over nbar 1, 2, 3, 5, 8 (lossless).
    Fig4,
    /// MSE/CRB sweep, same grid as fig4.
    Fig5,
    /// Loss sweep at nbar 1.
    Fig6,
    /// Loss sweep at nbar 3.
    Fig7,
}

/// Settings of a single-record posterior preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosteriorPreset {
    pub n_bar: f64,
    pub eta: f64,
    pub phi: f64,
    pub m: usize,
    pub policy: ControlPolicy,
    pub ell: Option<usize>,
}

impl Preset {
    pub fn posterior(self) -> Option<PosteriorPreset> {
        let base = PosteriorPreset {
            n_bar: 3.0,
            eta: 1.0,
            phi: 0.15,
            m: 512,
            policy: ControlPolicy::default(),
            ell: None,
        };
        match self {
            Preset::Fig2 => Some(PosteriorPreset {
                policy: ControlPolicy::Static { theta0: 0.0 },
                ell: Some(466),
                ..base
            }),
            Preset::Fig3 => Some(base),
            _ => None,
        }
    }

    pub fn sweep(self) -> Option<SweepSpec> {
        let (n_bar, eta) = match self {
            Preset::Fig4 | Preset::Fig5 => (SWEEP_N_BAR.to_vec(), vec![1.0]),
            Preset::Fig6 => (vec![1.0], SWEEP_ETA.to_vec()),
            Preset::Fig7 => (vec![3.0], SWEEP_ETA.to_vec()),
            Preset::Fig2 | Preset::Fig3 => return None,
        };
        Some(SweepSpec {
            n_bar,
            eta,
            m: SWEEP_M.to_vec(),
            j: None,
            precision: None,
            record_cap: tmsv_core::montecarlo::DEFAULT_RECORD_CAP,
            policy: ControlPolicy::default(),
            phase_mode: PhaseMode::default(),
            master_seed: 0,
            tail_epsilon: 1e-12,
            table_terms: None,
            limits: PosteriorLimits::default(),
        })
    }
}
