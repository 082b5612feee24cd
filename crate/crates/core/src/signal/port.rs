use serde::{Deserialize, Serialize};

use super::TmsvWeights;
use crate::legendre::squared_d_column;
use crate::scalar::Scalar;

/// Photon-count distribution at the measured output port for the twin-Fock
/// input `|n, n>` at phase difference `delta`. `probs[k]` is the probability
/// of counting `k` photons, `k = 0..=2n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortDistribution<T> {
    pub n: usize,
    pub delta: T,
    pub probs: Vec<T>,
}

impl<T: Scalar> PortDistribution<T> {
    pub fn total(&self) -> T {
        self.probs.iter().fold(T::zero(), |a, &p| a + p)
    }

    /// `sum_k (-1)^k probs[k]`.
    pub fn parity_moment(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (k, &p)| if k % 2 == 0 { a + p } else { a - p })
    }

    /// `sum_k probs[k] r^k`.
    pub fn generating(&self, r: T) -> T {
        let mut acc = T::zero();
        let mut pow = T::one();
        for &p in &self.probs {
            acc += p * pow;
            pow = pow * r;
        }
        acc
    }
}

/// The MZI acts on `|n, n> = |j = n, m = 0>` as a rotation by
/// `beta = delta + pi/2`; this offset makes the count fully even at
/// `delta = 0`, matching `(-1)^n P_n(-cos 2 delta)` as the parity moment.
fn rotation_angle<T: Scalar>(delta: T) -> T {
    delta + T::FRAC_PI_2()
}

fn expand_row<T: Scalar>(n: usize, delta: T, row: &[T]) -> PortDistribution<T> {
    let probs = (0..=2 * n).map(|k| row[k.abs_diff(n)]).collect();
    PortDistribution { n, delta, probs }
}

pub fn port_distribution<T: Scalar>(n: usize, delta: T) -> PortDistribution<T> {
    let d2 = squared_d_column(n, rotation_angle(delta));
    expand_row(n, delta, &d2[n])
}

/// Distributions for every `n = 0..=n_max` at one phase difference, sharing
/// a single recurrence sweep.
pub fn port_distributions_upto<T: Scalar>(n_max: usize, delta: T) -> Vec<PortDistribution<T>> {
    let d2 = squared_d_column(n_max, rotation_angle(delta));
    d2.iter()
        .enumerate()
        .map(|(n, row)| expand_row(n, delta, row))
        .collect()
}

/// `sum_n p_n sum_k P(k | n, delta) (1 - 2 eta)^k`.
pub(crate) fn signal_from_weights<T: Scalar>(weights: &TmsvWeights<T>, eta: T, delta: T) -> T {
    let r = T::one() - eta - eta;
    let d2 = squared_d_column(weights.n_max, rotation_angle(delta));
    let mut powers = Vec::with_capacity(2 * weights.n_max + 1);
    let mut pow = T::one();
    for _ in 0..=2 * weights.n_max {
        powers.push(pow);
        pow = pow * r;
    }
    weights
        .iter()
        .map(|(n, p)| {
            let row = &d2[n];
            let inner = (0..=2 * n).fold(T::zero(), |acc, k| acc + row[k.abs_diff(n)] * powers[k]);
            p * inner
        })
        .fold(T::zero(), |a, b| a + b)
}
