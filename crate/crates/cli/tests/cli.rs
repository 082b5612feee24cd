use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tmsv_cli::config::RunConfig;
use tmsv_cli::manifest::RunManifest;

fn tmsv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmsv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn signal_curve_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("signal.csv");
    let o = tmsv(&["signal", "--nbar", "3", "--eta", "1", "--grid", "181", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["delta", "parity_or_G", "P_even"]);
    assert_eq!(rows.len(), 181);
    let centre = &rows[90];
    assert_eq!(f(&centre[0]), 0.0);
    assert_eq!(f(&centre[2]), 1.0);
    let edge = &rows[180];
    assert!((f(&edge[0]) - FRAC_PI_2).abs() < 1e-15);
    assert!((f(&edge[1]) - 0.25).abs() < 1e-15);
    assert!(dir.path().join("signal.manifest.json").exists());
}

#[test]
fn blind_detector_always_even() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("blind.csv");
    let o = tmsv(&["signal", "--nbar", "2", "--eta", "0", "--grid", "33", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out);
    assert!(rows.iter().all(|r| f(&r[2]) == 1.0));
}

#[test]
fn fisher_curve_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fisher.csv");
    let o = tmsv(&["fisher", "--nbar", "1", "--grid", "20001", "--M", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["delta", "fisher"]);
    let values: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r[0]), f(&r[1]))).collect();
    assert!(values.iter().all(|&(_, v)| v >= 0.0));
    assert_eq!(values[10000], (0.0, 3.0));

    // sub-shot-noise window F >= nbar: exact edge from k(1-u) = nbar (1 + k u)^2, u = sin^2
    let (nb, k) = (1.0f64, 3.0f64);
    let (a, b, c) = (nb * k * k, 2.0 * nb * k + k, nb - k);
    let u = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    let edge = u.sqrt().asin();
    let half_width = values.iter().filter(|&&(_, v)| v >= nb).map(|&(d, _)| d).fold(0.0, f64::max);
    assert!((half_width - edge).abs() < 2e-4, "{half_width} vs {edge}");

    let m = RunManifest::read(&dir.path().join("fisher.manifest.json")).unwrap();
    assert!((m.results["cramer_rao"].as_f64().unwrap() - 1.0 / 30.0).abs() < 1e-16);
    assert_eq!(m.results["heisenberg"].as_f64().unwrap(), 0.1);
    assert_eq!(m.results["shot_noise"].as_f64().unwrap(), 0.1);
}

#[test]
fn static_preset_is_mirror_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = tmsv(&["posterior", "--preset", "fig2", "--curve-points", "1000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out);
    let dens: Vec<f64> = rows.iter().map(|r| f(&r[1])).collect();
    // grid is -pi/2 + k pi/1000, k = 1..=1000; phi and -phi pair up as k and 1000 - k
    for k in 1..500 {
        let (a, b) = (dens[k - 1], dens[1000 - k - 1]);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
    let manifest = RunManifest::read(&dir.path().join("fig2.manifest.json")).unwrap();
    assert_eq!(manifest.results["ell"], 466);
    assert!(!dir.path().join("fig2.record.csv").exists());
}

#[test]
fn adaptive_preset_has_one_peak_near_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.csv");
    let o = tmsv(&["posterior", "--preset", "fig3", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out);
    let (peak, _) = rows
        .iter()
        .map(|r| (f(&r[0]), f(&r[1])))
        .fold((0.0, f64::MIN), |b, p| if p.1 > b.1 { p } else { b });
    assert!((peak - 0.15).abs() < 0.05, "peak at {peak}");

    let (header, record) = read_csv(&dir.path().join("fig3.record.csv"));
    assert_eq!(header, ["m", "theta", "outcome"]);
    assert_eq!(record.len(), 512);
    assert!(record.iter().all(|r| r[2] == "e" || r[2] == "o"));
}

#[test]
fn empty_record_gives_flat_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flat.csv");
    let o = tmsv(&["posterior", "--M", "0", "--curve-points", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| (f(&r[1]) - std::f64::consts::FRAC_1_PI).abs() < 1e-15));
}

#[test]
fn sweep_and_replay_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = tmsv(&[
        "sweep", "--nbar", "1,2", "--eta", "1,0.95", "--M", "16,32", "--J", "40", "--seed", "9", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        ["n_bar", "eta", "M", "J", "mse", "mse_se", "bias", "hl_ratio", "crb_ratio", "error"]
    );
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let (nb, m, mse, hl, crb) = (f(&r[0]), f(&r[2]), f(&r[4]), f(&r[7]), f(&r[8]));
        assert!((hl - mse * m * nb * nb).abs() <= 1e-12 * hl);
        assert!((crb - hl * (nb + 2.0) / nb).abs() <= 1e-12 * crb);
        assert_eq!(r[9], "");
    }

    let manifest_path = dir.path().join("sweep.manifest.json");
    let manifest = RunManifest::read(&manifest_path).unwrap();
    assert_eq!(manifest.command, "sweep");
    assert_eq!(manifest.master_seed, Some(9));
    assert_eq!(manifest.tables.len(), 4);
    let text = fs::read_to_string(&manifest_path).unwrap();
    let back: RunManifest = serde_json::from_str(&serde_json::to_string(&manifest).unwrap()).unwrap();
    assert_eq!(back, manifest);
    assert!(text.contains("\"M\""));

    let again = dir.path().join("again.csv");
    let o = tmsv(&["replay", manifest_path.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn posterior_replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("post.csv");
    let o = tmsv(&[
        "posterior", "--nbar", "2", "--eta", "0.97", "--phi", "-0.4", "--M", "48", "--seed", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let again = dir.path().join("again.csv");
    let manifest = dir.path().join("post.manifest.json");
    let o = tmsv(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
    assert_eq!(
        fs::read(dir.path().join("post.record.csv")).unwrap(),
        fs::read(dir.path().join("again.record.csv")).unwrap()
    );
    let m = RunManifest::read(&manifest).unwrap();
    assert!(matches!(m.config, RunConfig::Posterior(_)));
}

#[test]
fn sweep_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n_bar": [1.0], "M": [8], "J": 10, "policy": {"kind": "static", "theta0": 0.2},
            "phase_mode": "uniform_random", "master_seed": 2}"#,
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let o = tmsv(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "10");
}

#[test]
fn sweep_presets_pin_their_grids() {
    use tmsv_cli::presets::Preset;
    let fig4 = Preset::Fig4.sweep().unwrap();
    assert_eq!(fig4.n_bar, [1.0, 2.0, 3.0, 5.0, 8.0]);
    assert_eq!(fig4.eta, [1.0]);
    assert_eq!(fig4.m, [64, 128, 256, 512, 1024, 2048, 3096]);
    let fig6 = Preset::Fig6.sweep().unwrap();
    assert_eq!(fig6.n_bar, [1.0]);
    assert_eq!(fig6.eta, [1.0, 0.99, 0.95, 0.90]);
    assert_eq!(Preset::Fig7.sweep().unwrap().n_bar, [3.0]);
    assert!(Preset::Fig2.sweep().is_none());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&tmsv(&["sweep", "--nbar", "1", "--J", "5"])), 1);
    assert_eq!(code(&tmsv(&["signal", "--nbar", "-1"])), 1);
    assert_eq!(code(&tmsv(&["signal", "--grid", "1"])), 1);
    assert_eq!(code(&tmsv(&["posterior", "--phi", "2"])), 1);
    assert_eq!(code(&tmsv(&["posterior", "--preset", "fig4"])), 1);
    assert_eq!(code(&tmsv(&["sweep", "--preset", "fig2"])), 1);
    assert_eq!(code(&tmsv(&["no-such-command"])), 1);
    assert_eq!(code(&tmsv(&["--help"])), 0);
}

#[test]
fn numerical_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    // a tiny coefficient cap cannot hold the posterior
    fs::write(
        &spec,
        r#"{"n_bar": [2.0], "M": [40], "J": 4,
            "limits": {"max_order": 8, "trim_epsilon": 1e-15, "capacity_tolerance": 1e-14}}"#,
    )
    .unwrap();
    let out = dir.path().join("s.csv");
    let o = tmsv(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let (_, rows) = read_csv(&out);
    assert!(rows[0][9].contains("capacity"), "{}", rows[0][9]);
    assert_eq!(rows[0][4], "");
}

#[test]
fn verify_reports_and_fails_on_fault() {
    let o = tmsv(&["verify"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    assert!(text.contains("max deviation"));

    let o = tmsv(&["verify", "--inject-fault", "1e-3"]);
    assert_eq!(code(&o), 3);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("FAIL oracle equivalence"));
}
