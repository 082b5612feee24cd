//! Choice of the controlled phase before each detection.
//!
//! The adaptive rule maximises the expected sharpness after the next
//! detection,
//!
//! ```text
//! s_av(theta) = sum_{mu in {e, o}} |b^mu_{-1}(theta)|,
//! ```
//!
//! where `b^mu` are the unnormalised coefficients of prior x likelihood.
//! Writing `S(theta) = sum_{|j| <= x_L} c_|j| a_{-1-j} e^{-2 i j theta}`,
//! the two branches are `(a_{-1} +/- S) / 2`, so only the `2 x_L + 1`
//! posterior harmonics around `-1` enter.

use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bayes::FourierPosterior;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::LikelihoodTable;

pub const DEFAULT_GRID_POINTS: usize = 256;
pub const DEFAULT_REFINE_TOLERANCE: f64 = 1e-6;

/// Grid values closer than this are treated as ties (lowest theta wins).
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlPolicy {
    Adaptive {
        grid_points: usize,
        refine_tolerance: f64,
    },
    Static {
        theta0: f64,
    },
}

impl Default for ControlPolicy {
    fn default() -> Self {
        ControlPolicy::Adaptive {
            grid_points: DEFAULT_GRID_POINTS,
            refine_tolerance: DEFAULT_REFINE_TOLERANCE,
        }
    }
}

impl ControlPolicy {
    /// Fewest grid points that resolve the objective for a table of
    /// harmonic order `x_l`.
    pub fn min_grid_points(x_l: usize) -> usize {
        8 * (x_l + 2)
    }

    /// Adaptive policy with the default grid, enlarged to the next power of
    /// two when `x_l` demands it.
    pub fn adaptive_for_order(x_l: usize) -> Self {
        let need = Self::min_grid_points(x_l).next_power_of_two();
        ControlPolicy::Adaptive {
            grid_points: DEFAULT_GRID_POINTS.max(need),
            refine_tolerance: DEFAULT_REFINE_TOLERANCE,
        }
    }

    pub fn validate(&self, x_l: usize) -> Result<()> {
        match *self {
            ControlPolicy::Adaptive {
                grid_points,
                refine_tolerance,
            } => {
                let need = Self::min_grid_points(x_l);
                if grid_points < need {
                    return Err(Error::invalid(format!(
                        "adaptive grid of {grid_points} points is below the {need} needed for harmonic order {x_l}"
                    )));
                }
                if !(refine_tolerance > 0.0) {
                    return Err(Error::invalid("refine tolerance must be positive"));
                }
                Ok(())
            }
            ControlPolicy::Static { theta0 } if !theta0.is_finite() => {
                Err(Error::invalid("static phase must be finite"))
            }
            ControlPolicy::Static { .. } => Ok(()),
        }
    }

    /// Phase for the first detection: uniform on `[0, pi)` for the adaptive
    /// rule, `theta0` for the static one.
    pub fn initial_phase<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            ControlPolicy::Adaptive { .. } => initial_phase(rng),
            ControlPolicy::Static { theta0 } => T::lit(theta0),
        }
    }
}

/// Uniform draw on `[0, pi)`.
pub fn initial_phase<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random();
    wrap_period(T::lit(u * std::f64::consts::PI))
}

fn wrap_period<T: Scalar>(theta: T) -> T {
    let pi = T::PI();
    let r = theta - pi * (theta / pi).floor();
    if r >= pi || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// The expected-sharpness objective for one posterior, ready to evaluate at
/// any number of control phases.
#[derive(Clone, Debug)]
pub struct SharpnessObjective<T> {
    a_minus_1: Complex<T>,
    /// `w_j = c_|j| a_{-1-j}` at index `j + x_L`.
    window: Vec<Complex<T>>,
}

impl<T: Scalar> SharpnessObjective<T> {
    pub fn new(post: &FourierPosterior<T>, table: &LikelihoodTable<T>) -> Self {
        let c = table.coeffs();
        let xl = table.order() as isize;
        let window = (-xl..=xl)
            .map(|j| post.coefficient(-1 - j) * c[j.unsigned_abs()])
            .collect();
        SharpnessObjective {
            a_minus_1: post.coefficient(-1),
            window,
        }
    }

    fn combine(&self, s: Complex<T>) -> T {
        ((self.a_minus_1 + s).norm() + (self.a_minus_1 - s).norm()) / T::lit(2.0)
    }

    pub fn eval(&self, theta: T) -> T {
        let xl = (self.window.len() / 2) as i32;
        let step = Complex::from_polar(T::one(), -(theta + theta));
        // start at e^{+2 i xl theta}, i.e. j = -xl
        let mut rot = Complex::from_polar(T::one(), T::lit(2.0 * f64::from(xl)) * theta);
        let mut s = Complex::default();
        for w in &self.window {
            s = s + w * rot;
            rot = rot * step;
        }
        self.combine(s)
    }

    /// Values at `theta_k = pi k / n` for `k = 0..n`, using one FFT of
    /// length `n`.
    pub fn eval_grid(&self, fft: &dyn Fft<T>) -> Vec<T> {
        let n = fft.len();
        let xl = self.window.len() / 2;
        let mut buf = vec![Complex::default(); n];
        for (idx, w) in self.window.iter().enumerate() {
            // harmonic j = idx - xl lands at j mod n
            let slot = (idx + n - xl) % n;
            buf[slot] = buf[slot] + w;
        }
        fft.process(&mut buf);
        buf.into_iter().map(|s| self.combine(s)).collect()
    }
}

/// Expected sharpness after one more detection at control phase `theta`.
pub fn predicted_average_sharpness<T: Scalar>(
    post: &FourierPosterior<T>,
    table: &LikelihoodTable<T>,
    theta: T,
) -> T {
    SharpnessObjective::new(post, table).eval(theta)
}

/// Policy bound to a table, with any planning done up front.
#[derive(Clone)]
pub struct PhaseController<T: Scalar> {
    policy: ControlPolicy,
    fft: Option<Arc<dyn Fft<T>>>,
}

impl<T: Scalar> PhaseController<T> {
    pub fn new(policy: ControlPolicy, table: &LikelihoodTable<T>) -> Result<Self> {
        policy.validate(table.order())?;
        let fft = match policy {
            ControlPolicy::Adaptive { grid_points, .. } => {
                Some(FftPlanner::new().plan_fft_forward(grid_points))
            }
            ControlPolicy::Static { .. } => None,
        };
        Ok(PhaseController { policy, fft })
    }

    pub fn policy(&self) -> ControlPolicy {
        self.policy
    }

    pub fn choose(&self, post: &FourierPosterior<T>, table: &LikelihoodTable<T>) -> T {
        let (fft, refine_tolerance) = match (self.policy, &self.fft) {
            (ControlPolicy::Static { theta0 }, _) => return T::lit(theta0),
            (ControlPolicy::Adaptive { refine_tolerance, .. }, Some(fft)) => (fft, refine_tolerance),
            (ControlPolicy::Adaptive { .. }, None) => unreachable!("adaptive controller without a plan"),
        };

        let objective = SharpnessObjective::new(post, table);
        let values = objective.eval_grid(fft.as_ref());
        let n = values.len();
        let tie = T::lit(TIE_TOLERANCE);
        let mut best = 0;
        for (k, &v) in values.iter().enumerate().skip(1) {
            if v > values[best] + tie {
                best = k;
            }
        }

        let spacing = T::PI() / T::from_count(n);
        let centre = spacing * T::from_count(best);
        let refined = golden_section_max(
            |th| objective.eval(th),
            centre - spacing,
            centre + spacing,
            T::lit(refine_tolerance),
        );
        if objective.eval(refined) > values[best] + tie {
            wrap_period(refined)
        } else {
            centre
        }
    }
}

/// Maximiser of `f` on `[lo, hi]`, assuming a single peak in the bracket.
pub fn golden_section_max<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T, tolerance: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / T::lit(2.0)
}

/// One-shot phase choice; builds a [`PhaseController`] internally.
pub fn choose_phase<T: Scalar>(
    post: &FourierPosterior<T>,
    table: &LikelihoodTable<T>,
    policy: ControlPolicy,
) -> Result<T> {
    Ok(PhaseController::new(policy, table)?.choose(post, table))
}
