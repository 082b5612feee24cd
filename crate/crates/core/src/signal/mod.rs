//! Physics side of the interferometer: TMSV photon statistics, the parity
//! signal in closed form and as a weighted twin-Fock sum, lossy detection,
//! Fisher information and the reference precision limits.

mod port;
mod table;

pub use port::{port_distribution, port_distributions_upto, PortDistribution};
pub use table::{LikelihoodTable, TableParams, TABLE_I_TERMS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::legendre;
use crate::scalar::Scalar;

/// Hard ceiling on the number of twin-Fock terms kept in any sum.
pub const MAX_FOCK_TERMS: usize = 4096;

/// Two-mode squeezed vacuum input with a cumulative-weight cutoff for the
/// Fock expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmsvSpec<T> {
    pub n_bar: T,
    pub tail_epsilon: T,
}

/// Retained twin-Fock weights `p_n = (1 - t) t^n` for `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct TmsvWeights<T> {
    pub t: T,
    pub n_max: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> TmsvWeights<T> {
    /// Probability mass beyond `n_max`, i.e. `t^(n_max+1)`.
    pub fn tail_mass(&self) -> T {
        self.t.powi(self.n_max as i32 + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.weights.iter().copied().enumerate()
    }
}

impl<T: Scalar> TmsvSpec<T> {
    pub fn new(n_bar: T, tail_epsilon: T) -> Result<Self> {
        let spec = TmsvSpec {
            n_bar,
            tail_epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_n_bar(self.n_bar)?;
        let eps = self.tail_epsilon;
        if !(eps > T::zero() && eps < T::one()) {
            return Err(Error::invalid(format!(
                "tail_epsilon must lie in (0, 1), got {eps}"
            )));
        }
        Ok(())
    }

    /// `t = 1 / (1 + 2 / n_bar)`.
    pub fn t(&self) -> T {
        T::one() / (T::one() + T::lit(2.0) / self.n_bar)
    }

    /// Weights up to the smallest `n_max` whose cumulative weight reaches
    /// `1 - tail_epsilon`.
    pub fn weights(&self) -> Result<TmsvWeights<T>> {
        self.validate()?;
        let t = self.t();
        // cumulative weight through n is 1 - t^(n+1)
        let mut n_max = 0usize;
        let mut tail = t;
        while tail > self.tail_epsilon {
            n_max += 1;
            if n_max >= MAX_FOCK_TERMS {
                return Err(Error::invalid(format!(
                    "n_bar = {} needs more than {MAX_FOCK_TERMS} Fock terms",
                    self.n_bar
                )));
            }
            tail = tail * t;
        }
        Ok(self.weights_with_terms_unchecked(t, n_max + 1))
    }

    /// Weights for exactly `terms` twin-Fock states, `n = 0..terms`.
    pub fn weights_with_terms(&self, terms: usize) -> Result<TmsvWeights<T>> {
        check_n_bar(self.n_bar)?;
        if terms == 0 || terms > MAX_FOCK_TERMS {
            return Err(Error::invalid(format!(
                "term count must be in 1..={MAX_FOCK_TERMS}, got {terms}"
            )));
        }
        Ok(self.weights_with_terms_unchecked(self.t(), terms))
    }

    fn weights_with_terms_unchecked(&self, t: T, terms: usize) -> TmsvWeights<T> {
        let mut weights = Vec::with_capacity(terms);
        let mut p = T::one() - t;
        for _ in 0..terms {
            weights.push(p);
            p = p * t;
        }
        TmsvWeights {
            t,
            n_max: terms - 1,
            weights,
        }
    }
}

pub(crate) fn check_n_bar<T: Scalar>(n_bar: T) -> Result<()> {
    if n_bar.is_finite() && n_bar > T::zero() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "n_bar must be finite and positive, got {n_bar}"
        )))
    }
}

pub(crate) fn check_eta<T: Scalar>(eta: T) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "detection efficiency must lie in [0, 1], got {eta}"
        )))
    }
}

/// Convenience wrapper around [`TmsvSpec::weights`].
pub fn tmsv_weights<T: Scalar>(spec: &TmsvSpec<T>) -> Result<TmsvWeights<T>> {
    spec.weights()
}

/// Expected parity `1 / sqrt(1 + n(n+2) sin^2 delta)` of the TMSV input,
/// where `delta = theta - phi`.
pub fn parity_closed_form<T: Scalar>(n_bar: T, delta: T) -> Result<T> {
    check_n_bar(n_bar)?;
    let s = delta.sin();
    Ok(T::one() / (T::one() + n_bar * (n_bar + T::lit(2.0)) * s * s).sqrt())
}

/// Expected parity for the twin-Fock input `|n, n>`:
/// `(-1)^n P_n(-cos 2 delta)`.
pub fn parity_fock<T: Scalar>(n: usize, delta: T) -> T {
    let x = -(delta + delta).cos();
    let p = legendre(n, x);
    if n % 2 == 0 {
        p
    } else {
        -p
    }
}

/// Truncated weighted sum `sum_n p_n <Pi>_n` over the retained weights.
pub fn parity_fock_sum<T: Scalar>(weights: &TmsvWeights<T>, delta: T) -> T {
    let x = -(delta + delta).cos();
    // Legendre recurrence shared across all n
    let mut acc = T::zero();
    let mut prev = T::one();
    let mut curr = x;
    for (n, p) in weights.iter() {
        let value = match n {
            0 => T::one(),
            1 => x,
            _ => {
                let k = T::from_count(n - 1);
                let next = ((k + k + T::one()) * x * curr - k * prev) / (k + T::one());
                prev = curr;
                curr = next;
                next
            }
        };
        acc += if n % 2 == 0 { p * value } else { -p * value };
    }
    acc
}

/// Even-minus-odd detection probability `G(delta)` after binomial loss with
/// efficiency `eta` on the measured port.
///
/// Each detected-count distribution is folded with `(1 - 2 eta)^k`, which
/// is the even-minus-odd mass of a binomially thinned count `k`.
pub fn lossy_signal<T: Scalar>(spec: &TmsvSpec<T>, eta: T, delta: T) -> Result<T> {
    check_eta(eta)?;
    let weights = spec.weights()?;
    Ok(port::signal_from_weights(&weights, eta, delta))
}

/// Two-outcome parity Fisher information about the phase.
pub fn fisher_information<T: Scalar>(n_bar: T, delta: T) -> Result<T> {
    check_n_bar(n_bar)?;
    let k = n_bar * (n_bar + T::lit(2.0));
    let c = delta.cos();
    let s = delta.sin();
    let denom = T::one() + k * s * s;
    Ok(c * c * k / (denom * denom))
}

/// Heisenberg, Cramér-Rao and shot-noise MSE references for `m` detections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLimits<T> {
    pub heisenberg: T,
    pub cramer_rao: T,
    pub shot_noise: T,
}

pub fn reference_limits<T: Scalar>(n_bar: T, m: usize) -> Result<ReferenceLimits<T>> {
    check_n_bar(n_bar)?;
    if m == 0 {
        return Err(Error::invalid("number of detections must be at least 1"));
    }
    let m = T::from_count(m);
    Ok(ReferenceLimits {
        heisenberg: T::one() / (m * n_bar * n_bar),
        cramer_rao: T::one() / (m * n_bar * (n_bar + T::lit(2.0))),
        shot_noise: T::one() / (m * n_bar),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_for_n_bar_two() {
        let w = TmsvSpec::new(2.0_f64, 1e-12).unwrap().weights().unwrap();
        assert_eq!(w.t, 0.5);
        assert_eq!(&w.weights[..3], &[0.5, 0.25, 0.125]);
        assert!(w.tail_mass() <= 1e-12);
        // smallest such index
        assert!(w.t.powi(w.n_max as i32) > 1e-12);
    }

    #[test]
    fn vacuum_limit() {
        let w = TmsvSpec::new(1e-9_f64, 1e-6).unwrap().weights().unwrap();
        assert_eq!(w.n_max, 0);
        assert!((w.weights[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn retained_mass_reaches_target() {
        for &(nb, eps) in &[(0.3, 1e-3), (1.0, 1e-12), (8.0, 1e-12), (3.0, 0.5)] {
            let w = TmsvSpec::new(nb, eps).unwrap().weights().unwrap();
            let total: f64 = w.weights.iter().sum();
            assert!(total >= 1.0 - eps - 1e-15, "nb={nb} total={total}");
            assert!(w.weights.windows(2).all(|p| p[1] < p[0] && p[1] > 0.0));
        }
    }

    #[test]
    fn bad_n_bar_rejected() {
        for nb in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                TmsvSpec::new(nb, 1e-12),
                Err(Error::InvalidParameter(_))
            ));
            assert!(parity_closed_form(nb, 0.1).is_err());
        }
        assert!(TmsvSpec::new(1.0, 0.0).is_err());
        assert!(TmsvSpec::new(1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(parity_closed_form(5.0, 0.0).unwrap(), 1.0);
        assert!((parity_closed_form(3.0, PI / 2.0).unwrap() - 0.25).abs() < 1e-15);
        let v = parity_closed_form(1.0, PI / 4.0).unwrap();
        assert!((v - 1.0 / 2.5f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.632456).abs() < 1e-6);
    }

    #[test]
    fn fock_parity_values() {
        assert_eq!(parity_fock(0, 1.234), 1.0);
        assert!((parity_fock(1, 0.0_f64) - 1.0).abs() < 1e-15);
        assert!(parity_fock(1, PI / 4.0).abs() < 1e-15);
        for n in 0..40 {
            for k in 0..20 {
                let v = parity_fock(n, k as f64 * 0.17);
                assert!(v.abs() <= 1.0 + 1e-13);
            }
        }
    }

    #[test]
    fn fock_sum_matches_singles() {
        let w = TmsvSpec::new(2.0, 1e-10).unwrap().weights().unwrap();
        let delta = 0.41;
        let direct: f64 = w.iter().map(|(n, p)| p * parity_fock(n, delta)).sum();
        assert!((direct - parity_fock_sum(&w, delta)).abs() < 1e-14);
    }

    #[test]
    fn fisher_values() {
        assert!((fisher_information(3.0_f64, 0.0).unwrap() - 15.0).abs() < 1e-12);
        assert!(fisher_information(3.0, PI / 2.0).unwrap().abs() < 1e-12);
        for nb in [0.5, 1.0, 2.0, 8.0] {
            let peak = fisher_information(nb, 0.0).unwrap();
            assert_eq!(peak, nb * (nb + 2.0));
            for k in 1..50 {
                assert!(fisher_information(nb, k as f64 * 0.06).unwrap() <= peak);
            }
        }
    }

    #[test]
    fn limits() {
        let r = reference_limits(1.0_f64, 1).unwrap();
        assert_eq!(r.heisenberg, 1.0);
        assert!((r.cramer_rao - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(r.shot_noise, 1.0);
        let r = reference_limits(3.0_f64, 256).unwrap();
        assert!((r.heisenberg - 1.0 / 2304.0).abs() < 1e-18);
        for nb in [1.5, 2.0, 5.0] {
            let r = reference_limits(nb, 10).unwrap();
            assert!(r.cramer_rao < r.heisenberg && r.heisenberg < r.shot_noise);
        }
        assert!(reference_limits(1.0, 0).is_err());
    }

    #[test]
    fn lossy_identity_cases() {
        let spec = TmsvSpec::new(1.0, 1e-12).unwrap();
        for &d in &[0.0, 0.3, 1.1, PI / 2.0] {
            let g1 = lossy_signal(&spec, 1.0, d).unwrap();
            assert!((g1 - parity_closed_form(1.0, d).unwrap()).abs() < 1e-10);
            let g0 = lossy_signal(&spec, 0.0, d).unwrap();
            assert!((g0 - 1.0).abs() < 1e-10);
        }
        assert!(lossy_signal(&spec, 1.1, 0.0).is_err());
        assert!(lossy_signal(&spec, -0.1, 0.0).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let v: f32 = parity_closed_form(3.0f32, std::f32::consts::FRAC_PI_2).unwrap();
        assert!((v - 0.25).abs() < 1e-6);
        let w = TmsvSpec::new(2.0f32, 1e-6).unwrap().weights().unwrap();
        assert_eq!(w.weights[1], 0.25f32);
    }
}
