//! Self-check report: the signal model against the brute-force Fock oracle
//! and its own closed forms. Each check reports its worst deviation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::fock_oracle::{oracle_even_probability, simulate_mzi, thin, ORACLE_MAX_N};
use crate::signal::{
    fisher_information, parity_closed_form, parity_fock, parity_fock_sum, port_distribution, LikelihoodTable,
    TableParams, TmsvSpec,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, max_deviation: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

/// Deliberate corruption for exercising the failure path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fault {
    /// Adds `amount` to `c_1` of every likelihood table used.
    CorruptTable { amount: f64 },
}

fn build_table(params: &TableParams, fault: Option<Fault>) -> Result<LikelihoodTable<f64>> {
    let table = LikelihoodTable::build(params)?;
    match fault {
        None => Ok(table),
        Some(Fault::CorruptTable { amount }) => {
            let mut c = table.coeffs().to_vec();
            if c.len() < 2 {
                c.push(0.0);
            }
            c[1] += amount;
            LikelihoodTable::from_parts(params.clone(), c, table.n_max(), table.grid_size())
        }
    }
}

/// Worst excess of `|table - oracle|` over the oracle's tail bound, for
/// `n_bar in {1, 3}`, `eta in {1, 0.9}` and 32 phase differences.
pub fn oracle_equivalence(fault: Option<Fault>) -> Result<f64> {
    let mut worst = 0.0f64;
    for &nb in &[1.0, 3.0] {
        for &eta in &[1.0, 0.9] {
            let table = build_table(&TableParams::new(nb, eta), fault)?;
            let spec = TmsvSpec::new(nb, 1e-12)?;
            for k in 0..32 {
                let delta = PI * k as f64 / 32.0;
                let oracle = oracle_even_probability(&spec, eta, delta, ORACLE_MAX_N)?;
                let model = table.even_probability(0.0, delta);
                let excess = (model - oracle.even_probability).abs() - oracle.tail_bound;
                worst = worst.max(excess);
            }
        }
    }
    Ok(worst)
}

/// Fisher information of the two-outcome parity measurement from `P_e`
/// by a five-point central difference.
pub fn finite_difference_fisher(table: &LikelihoodTable<f64>, delta: f64, h: f64) -> f64 {
    let p = |d: f64| table.even_probability(0.0, d);
    let dp = (-p(delta + 2.0 * h) + 8.0 * p(delta + h) - 8.0 * p(delta - h) + p(delta - 2.0 * h)) / (12.0 * h);
    let pe = p(delta);
    dp * dp / (pe * (1.0 - pe))
}

pub fn run_checks(fault: Option<Fault>) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    out.push(CheckResult::new(
        "oracle equivalence: table vs Fock enumeration (excess over tail bound)",
        oracle_equivalence(fault)?,
        1e-8,
    ));

    let mut worst_moment = 0.0f64;
    let mut worst_dist = 0.0f64;
    for n in 0..=ORACLE_MAX_N {
        for k in 0..24 {
            let delta = -PI / 2.0 + PI * k as f64 / 23.0;
            let model = port_distribution(n, delta);
            worst_moment = worst_moment.max((model.parity_moment() - parity_fock(n, delta)).abs());
            let oracle = simulate_mzi(n, delta)?;
            for (a, b) in model.probs.iter().zip(&oracle.probs) {
                worst_dist = worst_dist.max((a - b).abs());
            }
        }
    }
    out.push(CheckResult::new("port distribution parity moment vs Legendre form", worst_moment, 1e-10));
    out.push(CheckResult::new("port distribution vs Fock-space MZI", worst_dist, 1e-10));

    let mut worst_thin = 0.0f64;
    for s in 0..=30usize {
        let mut point = vec![0.0; s + 1];
        point[s] = 1.0;
        for &eta in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            let even: f64 = thin(&point, eta)?.iter().step_by(2).sum();
            let closed = 0.5 * (1.0 + (1.0 - 2.0 * eta).powi(s as i32));
            worst_thin = worst_thin.max((even - closed).abs());
        }
    }
    out.push(CheckResult::new("binomial thinning even-mass identity", worst_thin, 1e-12));

    let mut worst_sum = 0.0f64;
    let mut worst_table = 0.0f64;
    for &nb in &[1.0, 2.0, 3.0, 5.0, 8.0] {
        let weights = TmsvSpec::new(nb, 1e-12)?.weights()?;
        let table = build_table(&TableParams::new(nb, 1.0), fault)?;
        for k in 0..512 {
            let delta = PI * k as f64 / 512.0;
            let closed = parity_closed_form(nb, delta)?;
            worst_sum = worst_sum.max((parity_fock_sum(&weights, delta) - closed).abs());
            worst_table = worst_table.max((table.signal(delta) - closed).abs());
        }
    }
    out.push(CheckResult::new("weighted Legendre sum vs closed-form parity", worst_sum, 1e-8));
    out.push(CheckResult::new("likelihood table vs closed-form parity", worst_table, 1e-8));

    let mut worst_fisher = 0.0f64;
    for &nb in &[1.0, 3.0] {
        let table = build_table(&TableParams::new(nb, 1.0), fault)?;
        for k in 0..=40 {
            let delta = 0.05 + (PI / 2.0 - 0.1) * k as f64 / 40.0;
            let exact = fisher_information(nb, delta)?;
            let numeric = finite_difference_fisher(&table, delta, 1e-3);
            worst_fisher = worst_fisher.max(((numeric - exact) / exact).abs());
        }
    }
    out.push(CheckResult::new("Fisher information vs finite differences (relative)", worst_fisher, 1e-6));

    Ok(out)
}
