//! Brute-force two-mode Fock-space model of the interferometer, used to
//! certify the signal model on small photon numbers.
//!
//! Nothing here touches the rotation-matrix or Legendre code paths: beam
//! splitters are expanded as creation-operator polynomials and loss is
//! enumerated term by term.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{PortDistribution, TmsvSpec};

/// Largest twin-Fock index the oracle accepts.
pub const ORACLE_MAX_N: usize = 12;

/// State of `n_total` photons over two modes in the basis `|k, n_total - k>`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockStateVector {
    pub n_total: usize,
    pub amplitudes: Vec<Complex64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric 50:50 beam splitter on the `n_total`-photon sector,
/// `a -> (a + i b)/sqrt 2`, `b -> (i a + b)/sqrt 2`. Column `k` is the image
/// of `|k, n_total - k>`.
pub fn beam_splitter_matrix(n_total: usize) -> Vec<Vec<Complex64>> {
    let i = Complex64::i();
    let scale = 0.5f64.powf(n_total as f64 / 2.0);
    let mut u = vec![vec![Complex64::new(0.0, 0.0); n_total + 1]; n_total + 1];
    for k in 0..=n_total {
        let rest = n_total - k;
        let norm_in = (factorial(k) * factorial(rest)).sqrt();
        // (a + i b)^k (i a + b)^rest, collect a^p b^(n-p)
        for p in 0..=k {
            let left = i.powu((k - p) as u32) * binomial(k, p);
            for q in 0..=rest {
                let right = i.powu(q as u32) * binomial(rest, q);
                let out = p + q;
                let norm_out = (factorial(out) * factorial(n_total - out)).sqrt();
                u[out][k] += left * right * (scale * norm_out / norm_in);
            }
        }
    }
    u
}

impl FockStateVector {
    /// `|n, n>`.
    pub fn twin(n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        FockStateVector {
            n_total: 2 * n,
            amplitudes,
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, matrix: &[Vec<Complex64>]) -> Self {
        let amplitudes = matrix
            .iter()
            .map(|row| row.iter().zip(&self.amplitudes).map(|(u, a)| u * a).sum())
            .collect();
        FockStateVector {
            n_total: self.n_total,
            amplitudes,
        }
    }

    /// Phase `psi` on the first mode: `|k, .> -> e^{i k psi} |k, .>`.
    pub fn apply_phase(&self, psi: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, k as f64 * psi))
            .collect();
        FockStateVector {
            n_total: self.n_total,
            amplitudes,
        }
    }

    /// Count distribution of the first mode.
    pub fn first_mode_counts(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Every intermediate state of the interferometer for input `|n, n>`:
/// input, after the first beam splitter, after the phase, output.
///
/// The internal phase is `delta + pi/2`; with this convention the output is
/// fully even at `delta = 0`.
pub fn mzi_states(n: usize, delta: f64) -> Result<[FockStateVector; 4]> {
    if n > ORACLE_MAX_N {
        return Err(Error::OracleScale {
            n,
            max: ORACLE_MAX_N,
        });
    }
    let bs = beam_splitter_matrix(2 * n);
    let input = FockStateVector::twin(n);
    let split = input.apply(&bs);
    let shifted = split.apply_phase(delta + std::f64::consts::FRAC_PI_2);
    let output = shifted.apply(&bs);
    Ok([input, split, shifted, output])
}

pub fn simulate_mzi(n: usize, delta: f64) -> Result<PortDistribution<f64>> {
    let [_, _, _, output] = mzi_states(n, delta)?;
    Ok(PortDistribution {
        n,
        delta,
        probs: output.first_mode_counts(),
    })
}

/// Binomial loss: each of `s` photons survives with probability `eta`.
pub fn thin(probs: &[f64], eta: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta must lie in [0, 1], got {eta}")));
    }
    let mut out = vec![0.0; probs.len()];
    for (s, &ps) in probs.iter().enumerate() {
        for (t, slot) in out.iter_mut().enumerate().take(s + 1) {
            *slot += ps * binomial(s, t) * eta.powi(t as i32) * (1.0 - eta).powi((s - t) as i32);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEstimate {
    pub even_probability: f64,
    /// TMSV weight beyond `n_cap`; bounds the truncation error.
    pub tail_bound: f64,
}

/// Even-count probability by full enumeration over `n <= n_cap`.
pub fn oracle_even_probability(
    spec: &TmsvSpec<f64>,
    eta: f64,
    delta: f64,
    n_cap: usize,
) -> Result<OracleEstimate> {
    spec.validate()?;
    if n_cap > ORACLE_MAX_N {
        return Err(Error::OracleScale {
            n: n_cap,
            max: ORACLE_MAX_N,
        });
    }
    let t = spec.t();
    let mut even = 0.0;
    let mut weight = 1.0 - t;
    for n in 0..=n_cap {
        let dist = simulate_mzi(n, delta)?;
        let detected = thin(&dist.probs, eta)?;
        let even_mass: f64 = detected.iter().step_by(2).sum();
        even += weight * even_mass;
        weight *= t;
    }
    Ok(OracleEstimate {
        even_probability: even,
        tail_bound: t.powi(n_cap as i32 + 1),
    })
}
