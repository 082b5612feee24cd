//! Executes a resolved [`RunConfig`], writing CSV output and its manifest.
//!
//! Human-readable summaries go to stderr so that stdout can carry CSV when
//! no `--out` path is given.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde_json::json;
use tmsv_core::montecarlo::sweep;
use tmsv_core::signal::{fisher_information, parity_closed_form, reference_limits};
use tmsv_core::verify::{run_checks, Fault};
use tmsv_core::{static_posterior, EnsembleSize, Error, Posterior, Simulation, Table, TrialRecord};

use crate::config::{FisherConfig, PosteriorConfig, RunConfig, SignalConfig, SweepSpec, VerifyConfig};
use crate::manifest::RunManifest;
use crate::output::{csv_writer, finish, num, sibling, write_row};
use crate::CliError;

/// Minimum density curve resolution when none is requested.
const DEFAULT_CURVE_POINTS: usize = 1024;

pub fn execute(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    match config {
        RunConfig::Signal(c) => signal(c, out),
        RunConfig::Fisher(c) => fisher(c, out),
        RunConfig::Posterior(c) => posterior(c, out),
        RunConfig::Sweep(c) => run_sweep(c, out),
        RunConfig::Verify(c) => verify(c, out),
    }
}

fn write_manifest(
    config: &RunConfig,
    out: Option<&Path>,
    mut outputs: Vec<PathBuf>,
    results: serde_json::Value,
) -> Result<(), CliError> {
    if let Some(path) = out {
        outputs.insert(0, path.to_path_buf());
        let names = outputs
            .iter()
            .map(|p| p.file_name().map(PathBuf::from).unwrap_or_else(|| p.clone()))
            .collect();
        RunManifest::new(config.clone(), names, results).write(&sibling(path, "manifest.json"))?;
    }
    Ok(())
}

/// `n` points over `[-pi/2, pi/2]`.
fn phase_grid(n: usize) -> Result<impl Iterator<Item = f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("grid needs at least 2 points, got {n}")));
    }
    Ok((0..n).map(move |k| -FRAC_PI_2 + PI * k as f64 / (n - 1) as f64))
}

fn signal(c: &SignalConfig, out: Option<&Path>) -> Result<(), CliError> {
    let table = Table::build(&c.table)?;
    let lossless = c.table.eta == 1.0 && c.table.table_terms.is_none();
    let mut w = csv_writer(out)?;
    write_row(&mut w, ["delta", "parity_or_G", "P_even"])?;
    for delta in phase_grid(c.grid)? {
        let (g, pe) = if lossless {
            let g = parity_closed_form(c.table.n_bar, delta)?;
            (g, (0.5 * (1.0 + g)).clamp(0.0, 1.0))
        } else {
            (table.signal(delta), table.even_probability(0.0, delta))
        };
        write_row(&mut w, [num(delta), num(g), num(pe)])?;
    }
    finish(w)?;
    eprintln!(
        "signal: nbar={} eta={} harmonic order {} ({} Fock terms)",
        c.table.n_bar,
        c.table.eta,
        table.order(),
        table.n_max() + 1
    );
    write_manifest(
        &RunConfig::Signal(c.clone()),
        out,
        Vec::new(),
        json!({ "harmonic_order": table.order(), "fock_terms": table.n_max() + 1 }),
    )
}

fn fisher(c: &FisherConfig, out: Option<&Path>) -> Result<(), CliError> {
    let limits = reference_limits(c.n_bar, c.m)?;
    let mut w = csv_writer(out)?;
    write_row(&mut w, ["delta", "fisher"])?;
    for delta in phase_grid(c.grid)? {
        write_row(&mut w, [num(delta), num(fisher_information(c.n_bar, delta)?)])?;
    }
    finish(w)?;
    let peak = fisher_information(c.n_bar, 0.0)?;
    eprintln!(
        "fisher: nbar={} peak={} M={} CRB={} HL={} SNL={}",
        c.n_bar,
        num(peak),
        c.m,
        num(limits.cramer_rao),
        num(limits.heisenberg),
        num(limits.shot_noise)
    );
    write_manifest(
        &RunConfig::Fisher(c.clone()),
        out,
        Vec::new(),
        json!({
            "peak_fisher": peak,
            "cramer_rao": limits.cramer_rao,
            "heisenberg": limits.heisenberg,
            "shot_noise": limits.shot_noise,
        }),
    )
}

fn posterior(c: &PosteriorConfig, out: Option<&Path>) -> Result<(), CliError> {
    let trial = &c.trial;
    let (post, record, ell): (Posterior, Option<TrialRecord>, usize) = if trial.m == 0 {
        (Posterior::flat_with(trial.limits), None, 0)
    } else if let Some(ell) = c.ell {
        let theta0 = match trial.policy {
            tmsv_core::ControlPolicy::Static { theta0 } => theta0,
            _ => return Err(CliError::Usage("--ell needs the static policy".into())),
        };
        trial.validate()?;
        let table = Table::build(&trial.table)?;
        (static_posterior(trial.m, ell, theta0, &table, trial.limits)?, None, ell)
    } else {
        let sim = Simulation::auto(trial.clone())?;
        let (record, post) = sim.run_record_with_posterior(c.record_index)?;
        let ell = record.ell;
        (post, Some(record), ell)
    };

    let points = c
        .curve_points
        .unwrap_or_else(|| DEFAULT_CURVE_POINTS.max(2 * post.order() + 1));
    let curve = post.density_curve(points)?;
    let mut w = csv_writer(out)?;
    write_row(&mut w, ["phi", "density"])?;
    for (phi, d) in &curve {
        write_row(&mut w, [num(*phi), num(*d)])?;
    }
    finish(w)?;

    let mut extra = Vec::new();
    if let (Some(rec), Some(path)) = (&record, out) {
        let rec_path = sibling(path, "record.csv");
        let mut w = csv_writer(Some(&rec_path))?;
        write_row(&mut w, ["m", "theta", "outcome"])?;
        for (i, (theta, o)) in rec.thetas.iter().zip(&rec.outcomes).enumerate() {
            write_row(&mut w, [(i + 1).to_string(), num(*theta), o.as_char().to_string()])?;
        }
        finish(w)?;
        extra.push(rec_path);
    }

    let estimate = post.estimate().ok();
    eprintln!(
        "posterior: M={} ell={} order={} sharpness={} estimate={}",
        trial.m,
        ell,
        post.order(),
        num(post.sharpness()),
        estimate.map(num).unwrap_or_else(|| "undefined".into())
    );
    write_manifest(
        &RunConfig::Posterior(c.clone()),
        out,
        extra,
        json!({
            "ell": ell,
            "order": post.order(),
            "sharpness": post.sharpness(),
            "estimate": estimate,
            "true_phi": record.as_ref().map(|r| r.true_phi),
            "error": record.as_ref().map(|r| r.error),
        }),
    )
}

fn run_sweep(spec: &SweepSpec, out: Option<&Path>) -> Result<(), CliError> {
    spec.validate()?;
    let size = spec.size();
    let mut w = csv_writer(out)?;
    write_row(
        &mut w,
        ["n_bar", "eta", "M", "J", "mse", "mse_se", "bias", "hl_ratio", "crb_ratio", "error"],
    )?;
    let mut failed = 0;
    for cfg in spec.configs() {
        let point = sweep(std::slice::from_ref(&cfg), size).remove(0);
        let (stats, message) = match point.result {
            Ok(s) => (Some(s), String::new()),
            Err(Error::PartialResult { stats, target, achieved }) => (
                Some(*stats),
                format!("precision target {target} not reached (achieved {achieved:.4})"),
            ),
            Err(e) => (None, e.to_string()),
        };
        if !message.is_empty() {
            failed += 1;
        }
        let mut row = vec![num(cfg.n_bar()), num(cfg.eta()), cfg.m.to_string()];
        match &stats {
            Some(s) => {
                row.push(s.j.to_string());
                row.extend([s.mse, s.mse_se, s.bias, s.hl_ratio, s.crb_ratio].map(num));
                eprintln!(
                    "sweep: nbar={} eta={} M={} J={} mse={:.4e} hl_ratio={:.4} crb_ratio={:.4}{}",
                    cfg.n_bar(),
                    cfg.eta(),
                    cfg.m,
                    s.j,
                    s.mse,
                    s.hl_ratio,
                    s.crb_ratio,
                    if message.is_empty() { String::new() } else { format!(" [{message}]") }
                );
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 6));
                eprintln!("sweep: nbar={} eta={} M={} failed: {message}", cfg.n_bar(), cfg.eta(), cfg.m);
            }
        }
        row.push(message);
        write_row(&mut w, &row)?;
        // keep partial results on disk during long sweeps
        w.flush().map_err(|e| CliError::Io {
            context: "writing sweep output".into(),
            source: e,
        })?;
    }
    finish(w)?;
    let size_json = match size {
        EnsembleSize::Records(j) => json!({ "records": j }),
        EnsembleSize::Precision { target, record_cap } => json!({ "precision": target, "record_cap": record_cap }),
    };
    write_manifest(
        &RunConfig::Sweep(spec.clone()),
        out,
        Vec::new(),
        json!({ "ensemble": size_json, "failed_points": failed }),
    )?;
    if failed > 0 {
        return Err(CliError::Points { failed });
    }
    Ok(())
}

fn verify(c: &VerifyConfig, out: Option<&Path>) -> Result<(), CliError> {
    let fault = c.fault.map(|amount| Fault::CorruptTable { amount });
    let checks = run_checks(fault)?;
    for check in &checks {
        println!(
            "{} {}: max deviation {} (tolerance {})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            num(check.max_deviation),
            num(check.tolerance)
        );
    }
    if let Some(path) = out {
        let mut w = csv_writer(Some(path))?;
        write_row(&mut w, ["check", "max_deviation", "tolerance", "passed"])?;
        for check in &checks {
            write_row(
                &mut w,
                [
                    check.name.clone(),
                    num(check.max_deviation),
                    num(check.tolerance),
                    check.passed.to_string(),
                ],
            )?;
        }
        finish(w)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    write_manifest(
        &RunConfig::Verify(c.clone()),
        out,
        Vec::new(),
        json!({ "checks": checks, "failed": failed }),
    )?;
    if failed > 0 {
        return Err(CliError::Verify { failed });
    }
    Ok(())
}
