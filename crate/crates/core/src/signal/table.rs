use serde::{Deserialize, Serialize};

use super::{check_eta, port::signal_from_weights, TmsvSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Legendre-term counts used to truncate the twin-Fock sum for the listed
/// mean photon numbers. A count of `K` keeps `n = 0..K`.
pub const TABLE_I_TERMS: [(f64, usize); 5] = [(1.0, 10), (2.0, 10), (3.0, 15), (5.0, 20), (8.0, 25)];

fn default_tail_epsilon() -> f64 {
    1e-12
}

fn default_coeff_epsilon() -> f64 {
    1e-12
}

/// Everything needed to rebuild a [`LikelihoodTable`] bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableParams {
    pub n_bar: f64,
    pub eta: f64,
    #[serde(default = "default_tail_epsilon")]
    pub tail_epsilon: f64,
    #[serde(default = "default_coeff_epsilon")]
    pub coeff_epsilon: f64,
    /// Fixed number of twin-Fock terms; overrides `tail_epsilon`.
    #[serde(default)]
    pub table_terms: Option<usize>,
    /// DFT grid size; chosen automatically when absent.
    #[serde(default)]
    pub grid_size: Option<usize>,
}

impl TableParams {
    pub fn new(n_bar: f64, eta: f64) -> Self {
        TableParams {
            n_bar,
            eta,
            tail_epsilon: default_tail_epsilon(),
            coeff_epsilon: default_coeff_epsilon(),
            table_terms: None,
            grid_size: None,
        }
    }

    pub fn with_terms(mut self, terms: usize) -> Self {
        self.table_terms = Some(terms);
        self
    }

    /// Uses the tabulated term count for `n_bar`; fails for unlisted values.
    pub fn with_table_i_terms(self) -> Result<Self> {
        let terms = table_i_terms(self.n_bar).ok_or_else(|| {
            Error::invalid(format!("no tabulated term count for n_bar = {}", self.n_bar))
        })?;
        Ok(self.with_terms(terms))
    }

    pub fn with_tail_epsilon(mut self, eps: f64) -> Self {
        self.tail_epsilon = eps;
        self
    }
}

pub fn table_i_terms(n_bar: f64) -> Option<usize> {
    TABLE_I_TERMS
        .iter()
        .find(|(nb, _)| *nb == n_bar)
        .map(|&(_, k)| k)
}

/// Cosine coefficients of the detection signal
/// `G(delta) = sum_{|j| <= x_L} c_|j| e^{2 i j delta}`, `delta = theta - phi`,
/// so that `P(even) = (1 + G) / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodTable<T> {
    params: TableParams,
    coeffs: Vec<T>,
    n_max: usize,
    grid_size: usize,
}

impl<T: Scalar> LikelihoodTable<T> {
    pub fn build(params: &TableParams) -> Result<Self> {
        let eta = T::lit(params.eta);
        check_eta(eta)?;
        let spec = TmsvSpec {
            n_bar: T::lit(params.n_bar),
            tail_epsilon: T::lit(params.tail_epsilon),
        };
        let mut weights = match params.table_terms {
            Some(terms) => spec.weights_with_terms(terms)?,
            None => spec.weights()?,
        };
        // Tail-cutoff weights are rescaled to unit mass so that G(0) = 1 and
        // a zero-efficiency detector is exactly even; fixed term counts are
        // kept as the literal truncated sum.
        if params.table_terms.is_none() {
            let total = weights.weights.iter().fold(T::zero(), |a, &p| a + p);
            for p in weights.weights.iter_mut() {
                *p = *p / total;
            }
        }
        let n_max = weights.n_max;

        // Each twin-Fock term carries harmonics of 2*delta up to order n.
        let required = (4 * n_max.max(1)).next_power_of_two();
        let grid_size = params.grid_size.unwrap_or(required);
        if grid_size < required || !grid_size.is_power_of_two() {
            return Err(Error::Construction(format!(
                "grid of {grid_size} points cannot resolve harmonic {n_max}; need a power of two >= {required}"
            )));
        }
        if !(params.coeff_epsilon >= 0.0) {
            return Err(Error::invalid("coeff_epsilon must be non-negative"));
        }

        let n = grid_size;
        let step = T::PI() / T::from_count(n);
        let samples: Vec<T> = (0..n)
            .map(|k| signal_from_weights(&weights, eta, step * T::from_count(k)))
            .collect();

        let cos_table: Vec<T> = (0..n)
            .map(|k| (T::lit(2.0) * step * T::from_count(k)).cos())
            .collect();
        let norm = T::one() / T::from_count(n);
        let mut coeffs: Vec<T> = (0..=n_max)
            .map(|j| {
                samples
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (k, &g)| acc + g * cos_table[(j * k) % n])
                    * norm
            })
            .collect();

        let floor = T::lit(params.coeff_epsilon);
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() < floor) {
            coeffs.pop();
        }

        Ok(LikelihoodTable {
            params: params.clone(),
            coeffs,
            n_max,
            grid_size,
        })
    }

    /// Assembles a table from explicit coefficients `c_0..c_{x_L}`.
    pub fn from_parts(params: TableParams, coeffs: Vec<T>, n_max: usize, grid_size: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Construction("at least c_0 is required".into()));
        }
        Ok(LikelihoodTable {
            params,
            coeffs,
            n_max,
            grid_size,
        })
    }

    pub fn params(&self) -> &TableParams {
        &self.params
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Largest retained harmonic `x_L`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn n_bar(&self) -> f64 {
        self.params.n_bar
    }

    pub fn eta(&self) -> f64 {
        self.params.eta
    }

    /// Reconstructed `G(delta)`, by Clenshaw summation in `cos 2 delta`.
    pub fn signal(&self, delta: T) -> T {
        let y = (delta + delta).cos();
        let two_y = y + y;
        let mut b1 = T::zero();
        let mut b2 = T::zero();
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = c + c + two_y * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + y * b1 - b2
    }

    /// `P(even | phi, theta)`, clamped to `[0, 1]`.
    pub fn even_probability(&self, phi: T, theta: T) -> T {
        let p = (T::one() + self.signal(theta - phi)) / T::lit(2.0);
        p.max(T::zero()).min(T::one())
    }

    pub fn odd_probability(&self, phi: T, theta: T) -> T {
        T::one() - self.even_probability(phi, theta)
    }
}
