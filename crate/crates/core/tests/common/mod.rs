//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use tmsv_core::{Outcome, Table};

/// Bayes' rule on a uniform grid of `n` points over `[0, pi)`, starting from
/// a flat prior. Returns `a_1..a_order` by direct numerical Fourier analysis.
pub fn grid_bayes(updates: &[(Outcome, f64)], table: &Table, n: usize, order: usize) -> Vec<Complex64> {
    let phis: Vec<f64> = (0..n).map(|k| PI * k as f64 / n as f64).collect();
    let mut dens = vec![1.0 / PI; n];
    for &(outcome, theta) in updates {
        for (d, &phi) in dens.iter_mut().zip(&phis) {
            let pe = table.even_probability(phi, theta);
            *d *= if outcome.is_even() { pe } else { 1.0 - pe };
        }
        let mass: f64 = dens.iter().sum::<f64>() * PI / n as f64;
        dens.iter_mut().for_each(|d| *d /= mass);
    }
    (1..=order)
        .map(|j| {
            phis.iter()
                .zip(&dens)
                .map(|(&phi, &d)| d * Complex64::from_polar(1.0, -2.0 * j as f64 * phi))
                .sum::<Complex64>()
                * (PI / n as f64)
        })
        .collect()
}

/// Complex-valued density sum, so the imaginary residue can be inspected.
pub fn complex_density(coeffs: &[Complex64], phi: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (idx, a) in coeffs.iter().enumerate() {
        let j = (idx + 1) as f64;
        acc += a * Complex64::from_polar(1.0, 2.0 * j * phi);
        acc += a.conj() * Complex64::from_polar(1.0, -2.0 * j * phi);
    }
    acc / PI
}

/// First maximiser of `f` over `theta_k = pi k / n`.
pub fn dense_argmax<F: Fn(f64) -> f64>(f: F, n: usize) -> (f64, f64) {
    let mut best = (0.0, f(0.0));
    for k in 1..n {
        let theta = PI * k as f64 / n as f64;
        let v = f(theta);
        if v > best.1 {
            best = (theta, v);
        }
    }
    best
}

/// Distance on the period-pi circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Even-count probability of `s` photons after binomial thinning, summed
/// term by term.
pub fn thinned_even_mass(s: usize, eta: f64) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for t in 0..=s {
        if t > 0 {
            binom *= (s - t + 1) as f64 / t as f64;
        }
        if t % 2 == 0 {
            total += binom * eta.powi(t as i32) * (1.0 - eta).powi((s - t) as i32);
        }
    }
    total
}

/// Random posterior coefficients with `|a_j| <= envelope^j`.
pub fn random_coefficients<R: rand::Rng>(rng: &mut R, order: usize, envelope: f64) -> Vec<Complex64> {
    (1..=order)
        .map(|j| {
            let r: f64 = rng.random::<f64>() * envelope.powi(j as i32);
            let arg: f64 = rng.random::<f64>() * 2.0 * PI;
            Complex64::from_polar(r, arg)
        })
        .collect()
}
