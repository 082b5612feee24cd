//! Phase posterior on the period-pi circle as a truncated Fourier series,
//!
//! ```text
//! P(phi) = (1/pi) sum_{j=-x}^{x} a_j e^{2 i j phi},   a_0 = 1,  a_{-j} = conj(a_j)
//! ```
//!
//! Only `a_1..a_x` are stored. The normalisation `a_0 = 1` makes the density
//! integrate to one over any period, and `<e^{2 i phi}> = a_{-1}`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::LikelihoodTable;

/// Parity detection result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Even,
    Odd,
}

impl Outcome {
    pub fn is_even(self) -> bool {
        matches!(self, Outcome::Even)
    }

    pub fn as_char(self) -> char {
        match self {
            Outcome::Even => 'e',
            Outcome::Odd => 'o',
        }
    }
}

/// Order growth limits for a posterior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorLimits {
    /// Hard ceiling on the stored order.
    pub max_order: usize,
    /// Trailing coefficients below this modulus are dropped after each update.
    pub trim_epsilon: f64,
    /// Largest fraction of the coefficient energy that may be discarded when
    /// the ceiling is hit before a capacity error is raised.
    pub capacity_tolerance: f64,
}

impl Default for PosteriorLimits {
    fn default() -> Self {
        PosteriorLimits {
            max_order: 4096,
            trim_epsilon: 1e-15,
            capacity_tolerance: 1e-14,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierPosterior<T> {
    /// `a_1..a_x`.
    coeffs: Vec<Complex<T>>,
    limits: PosteriorLimits,
}

/// Wraps `value` into `(-pi/2, pi/2]`.
pub fn wrap_half_period<T: Scalar>(value: T) -> T {
    let pi = T::PI();
    let mut r = value - pi * (value / pi).round();
    if r <= -T::FRAC_PI_2() {
        r += pi;
    } else if r > T::FRAC_PI_2() {
        r -= pi;
    }
    r
}

/// Estimate minus truth on the period-pi circle, in `(-pi/2, pi/2]`.
pub fn wrapped_error<T: Scalar>(estimate: T, true_phi: T) -> T {
    wrap_half_period(estimate - true_phi)
}

impl<T: Scalar> Default for FourierPosterior<T> {
    fn default() -> Self {
        Self::flat()
    }
}

impl<T: Scalar> FourierPosterior<T> {
    /// Uniform density `1/pi`.
    pub fn flat() -> Self {
        Self::flat_with(PosteriorLimits::default())
    }

    pub fn flat_with(limits: PosteriorLimits) -> Self {
        FourierPosterior {
            coeffs: Vec::new(),
            limits,
        }
    }

    /// Builds a posterior from `a_1..a_x` directly.
    pub fn from_coefficients(coeffs: Vec<Complex<T>>, limits: PosteriorLimits) -> Self {
        FourierPosterior { coeffs, limits }
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn limits(&self) -> PosteriorLimits {
        self.limits
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_k` for any integer `k`.
    pub fn coefficient(&self, k: isize) -> Complex<T> {
        match k {
            0 => Complex::new(T::one(), T::zero()),
            k if k > 0 => self.coeffs.get(k as usize - 1).copied().unwrap_or_default(),
            k => self
                .coeffs
                .get((-k) as usize - 1)
                .map(|c| c.conj())
                .unwrap_or_default(),
        }
    }

    pub fn density(&self, phi: T) -> T {
        let mut acc = T::one();
        let step = Complex::from_polar(T::one(), phi + phi);
        let mut rot = step;
        for a in &self.coeffs {
            acc += T::lit(2.0) * (a * rot).re;
            rot = rot * step;
        }
        acc / T::PI()
    }

    /// `|<e^{2 i phi}>| = |a_1|`.
    pub fn sharpness(&self) -> T {
        self.coefficient(1).norm()
    }

    /// `arg(<e^{2 i phi}>) / 2`, in `(-pi/2, pi/2]`.
    pub fn estimate(&self) -> Result<T> {
        let a1 = self.coefficient(1);
        if a1.norm() == T::zero() {
            return Err(Error::UndefinedSignal);
        }
        Ok(wrap_half_period(-a1.arg() / T::lit(2.0)))
    }

    /// The same density translated by `shift`: `P'(phi) = P(phi - shift)`.
    pub fn shifted(&self, shift: T) -> Self {
        let step = Complex::from_polar(T::one(), -(shift + shift));
        let mut rot = step;
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let v = a * rot;
                rot = rot * step;
                v
            })
            .collect();
        FourierPosterior {
            coeffs,
            limits: self.limits,
        }
    }

    /// Probability mass on `[lo, hi]`.
    pub fn interval_mass(&self, lo: T, hi: T) -> T {
        let mut acc = hi - lo;
        for (idx, a) in self.coeffs.iter().enumerate() {
            let j = T::from_count(idx + 1);
            let two_j = j + j;
            let diff = Complex::from_polar(T::one(), two_j * hi) - Complex::from_polar(T::one(), two_j * lo);
            // 2 Re[a_j (e^{2ij hi} - e^{2ij lo}) / (2ij)]
            acc += (a * diff / Complex::new(T::zero(), j)).re;
        }
        acc / T::PI()
    }

    /// Density sampled on `grid_size` uniform points over `(-pi/2, pi/2]`.
    pub fn density_curve(&self, grid_size: usize) -> Result<Vec<(T, T)>> {
        if grid_size < 2 * self.order() + 1 {
            return Err(Error::invalid(format!(
                "grid of {grid_size} points cannot resolve posterior order {}",
                self.order()
            )));
        }
        let step = T::PI() / T::from_count(grid_size);
        Ok((1..=grid_size)
            .map(|i| {
                let phi = -T::FRAC_PI_2() + step * T::from_count(i);
                (phi, self.density(phi))
            })
            .collect())
    }

    /// Likelihood harmonics `l_j`, `j = -x_L..=x_L`, of
    /// `P(mu | phi, theta) = (1 +/- G(theta - phi)) / 2` as a series in
    /// `e^{2 i j phi}`.
    pub(crate) fn likelihood_harmonics(outcome: Outcome, theta: T, table: &LikelihoodTable<T>) -> Vec<Complex<T>> {
        let c = table.coeffs();
        let xl = table.order();
        let half = T::lit(0.5);
        let sign = if outcome.is_even() { T::one() } else { -T::one() };
        let mut out = vec![Complex::default(); 2 * xl + 1];
        out[xl] = Complex::new(half * (T::one() + sign * c[0]), T::zero());
        let step = Complex::from_polar(T::one(), -(theta + theta));
        let mut rot = step;
        for j in 1..=xl {
            let v = rot * (sign * half * c[j]);
            out[xl + j] = v;
            out[xl - j] = v.conj();
            rot = rot * step;
        }
        out
    }

    /// Bayes update on one detection at control phase `theta`.
    pub fn update(&self, outcome: Outcome, theta: T, table: &LikelihoodTable<T>) -> Result<Self> {
        let lik = Self::likelihood_harmonics(outcome, theta, table);
        let xl = table.order();
        let x = self.order();
        let new_order = x + xl;

        // dense a_k for k in [-xl, x + 2 xl], index 0 <-> k = -xl
        let lo = xl as isize;
        let span = x + 3 * xl + 1;
        let full: Vec<Complex<T>> = (0..span).map(|i| self.coefficient(i as isize - lo)).collect();

        // b_k = sum_j l_j a_{k-j}, k = 0..=new_order
        let mut b: Vec<Complex<T>> = Vec::with_capacity(new_order + 1);
        for k in 0..=new_order {
            // a_{k-j} for j = -xl..=xl is full[k - j + lo]; j = -xl maps to the top
            let start = (k as isize + lo - xl as isize) as usize;
            let window = &full[start..start + 2 * xl + 1];
            let mut acc = Complex::default();
            for (l, a) in lik.iter().zip(window.iter().rev()) {
                acc = acc + l * a;
            }
            b.push(acc);
        }

        // below a few ulps the outcome is numerically impossible
        let mass = b[0].re;
        if !(mass > T::lit(4.0) * T::epsilon()) || !mass.is_finite() {
            return Err(Error::DegenerateUpdate {
                mass: mass.to_f64_lossy(),
            });
        }
        let inv = T::one() / mass;
        let mut coeffs: Vec<Complex<T>> = b[1..].iter().map(|v| v * inv).collect();
        self.trim(&mut coeffs)?;
        Ok(FourierPosterior {
            coeffs,
            limits: self.limits,
        })
    }

    fn trim(&self, coeffs: &mut Vec<Complex<T>>) -> Result<()> {
        let floor = T::lit(self.limits.trim_epsilon).max(T::epsilon());
        while coeffs.last().is_some_and(|c| c.norm() < floor) {
            coeffs.pop();
        }
        let cap = self.limits.max_order;
        if coeffs.len() > cap {
            let energy = |s: &[Complex<T>]| s.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
            let dropped = energy(&coeffs[cap..]);
            let total = T::one() + T::lit(2.0) * energy(coeffs);
            let fraction = (T::lit(2.0) * dropped / total).to_f64_lossy();
            if fraction > self.limits.capacity_tolerance {
                return Err(Error::Capacity {
                    order: coeffs.len(),
                    cap,
                    dropped_fraction: fraction,
                });
            }
            coeffs.truncate(cap);
        }
        Ok(())
    }
}

/// Posterior after `m` detections at fixed control phase `theta`, `ell` of
/// them even: proportional to `P_e^ell P_o^(m - ell)`.
pub fn static_posterior<T: Scalar>(
    m: usize,
    ell: usize,
    theta: T,
    table: &LikelihoodTable<T>,
    limits: PosteriorLimits,
) -> Result<FourierPosterior<T>> {
    if ell > m {
        return Err(Error::invalid(format!("even count {ell} exceeds detections {m}")));
    }
    // Outcomes are spread evenly through the sequence. Applying a long run
    // of one kind first concentrates the density so far that the other
    // kind amplifies the roundoff floor in its tails.
    let mut post = FourierPosterior::flat_with(limits);
    for i in 0..m {
        let outcome = if (i + 1) * ell / m > i * ell / m {
            Outcome::Even
        } else {
            Outcome::Odd
        };
        post = post.update(outcome, theta, table)?;
    }
    Ok(post)
}
