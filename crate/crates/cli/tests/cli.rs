//! End-to-end tests of the `metriplectic` binary and the config
//! machinery: exit codes, output schemas, and the documented summary
//! checks.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metriplectic_cli::commands::integrate_resolved;
use metriplectic_cli::config::RunConfig;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metriplectic"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("csv has a header")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|v| v.parse::<f64>().expect("csv cell parses as f64"))
                .collect()
        })
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let idx = header
        .iter()
        .position(|h| h == name)
        .expect("column exists");
    rows.iter().map(|r| r[idx]).collect()
}

const DECAY_CONTACT: &str = r#"
[system]
preset = "duffing-contact"

[params]
delta = 0.2
alpha = 1.0
beta = 1.0
gamma = 0.0

[integrator]
method = "dp45"
abs_tol = 1e-10
rel_tol = 1e-10
t0 = 0.0
t1 = 20.0

[output]
path = "OUT"
format = "csv"
"#;

#[test]
fn simulate_contact_decay_demo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("decay.csv");
    let config = write_config(
        dir.path(),
        "decay.toml",
        &DECAY_CONTACT.replace("OUT", out.to_str().unwrap()),
    );
    let result = run(&["simulate", config.to_str().unwrap()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("decay law"), "summary: {stdout}");

    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(
        header,
        vec![
            "t",
            "q1",
            "p1",
            "z",
            "H",
            "S",
            "energy_rate",
            "entropy_rate"
        ]
    );
    let t = column(&header, &rows, "t");
    let h = column(&header, &rows, "H");
    let h0 = h[0];
    assert_eq!(h0, 0.75);
    let max_rel = t
        .iter()
        .zip(&h)
        .map(|(t, h)| (h - h0 * (-0.2 * t).exp()).abs() / h0)
        .fold(0.0_f64, f64::max);
    assert!(max_rel <= 1e-6, "decay-law error {max_rel:.3e}");
}

#[test]
fn simulate_metriplectic_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("met.csv");
    let text = r#"
[system]
preset = "duffing-metriplectic"

[params]
delta = 0.2
alpha = 1.0
beta = 1.0
gamma = 0.0

[integrator]
abs_tol = 1e-10
rel_tol = 1e-10
t1 = 100.0

[output]
path = "OUT"
"#
    .replace("OUT", out.to_str().unwrap());
    let config = write_config(dir.path(), "met.toml", &text);
    let result = run(&["simulate", config.to_str().unwrap()]);
    assert!(result.status.success());
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    let h = column(&header, &rows, "H");
    let drift = h.iter().map(|v| (v - h[0]).abs()).fold(0.0_f64, f64::max);
    assert!(drift <= 1e-7, "drift {drift:.3e}");
    // Entropy rate column is p² along the flow: nonnegative throughout.
    let sdot = column(&header, &rows, "entropy_rate");
    assert!(sdot.iter().all(|v| *v >= 0.0));
}

#[test]
fn simulate_rejects_unparseable_hamiltonian() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[system]
formalism = "contact"
hamiltonian = "p1^2/2 + oops*q1"

[integrator]
t1 = 1.0
"#;
    let config = write_config(dir.path(), "bad.toml", text);
    let result = run(&["simulate", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("oops"), "stderr: {stderr}");
}

#[test]
fn coarse_rk4_energy_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coarse.csv");
    let text = r#"
[system]
preset = "duffing-metriplectic"

[params]
gamma = 0.0

[integrator]
method = "rk4"
step = 0.5
t1 = 10.0

[output]
path = "OUT"
"#
    .replace("OUT", out.to_str().unwrap());
    let config = write_config(dir.path(), "coarse.toml", &text);
    let result = binary()
        .args(["simulate", config.to_str().unwrap(), "--slack", "1e-9"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("VIOLATION"), "{stdout}");
}

#[test]
fn verify_metriplectic_preset_passes_all_identities() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let text = r#"
[system]
preset = "duffing-metriplectic"

[integrator]
t1 = 1.0
"#;
    let config = write_config(dir.path(), "verify.toml", text);
    let result = binary()
        .args([
            "verify",
            config.to_str().unwrap(),
            "--seed",
            "7",
            "--output",
            report_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let checks = report.as_array().unwrap();
    assert!(checks.len() >= 10);
    for check in checks {
        assert!(check["pass"].as_bool().unwrap(), "{check}");
        assert!(check["max_residual"].as_f64().unwrap() <= check["threshold"].as_f64().unwrap());
    }
    let names: Vec<&str> = checks
        .iter()
        .map(|c| c["identity"].as_str().unwrap())
        .collect();
    for expected in [
        "bracket.cyclic_identity",
        "bracket.leibniz_slot1",
        "poisson.jacobi_identity",
        "poisson.casimir_entropy",
        "theorem.energy_rate_zero",
        "theorem.entropy_rate_formula",
    ] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn verify_poisson_preset_reports_only_tensor_identities() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[system]
preset = "harmonic"

[integrator]
t1 = 1.0
"#;
    let config = write_config(dir.path(), "poisson.toml", text);
    let result = run(&["verify", config.to_str().unwrap()]);
    assert!(result.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&result.stdout)).unwrap();
    let names: Vec<String> = report
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["identity"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        names,
        vec!["poisson.antisymmetry", "poisson.jacobi_identity"]
    );
}

#[test]
fn compare_duffing_realizations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let text = r#"
[system]
preset = "duffing-contact"

[params]
delta = 0.2
alpha = 1.0
beta = 1.0
gamma = 0.0

[integrator]
abs_tol = 1e-11
rel_tol = 1e-11
t1 = 20.0
sample_dt = 0.05
max_step = 0.02
"#;
    let config = write_config(dir.path(), "cmp.toml", text);
    let result = binary()
        .args([
            "compare",
            config.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    let div = column(&header, &rows, "qp_distance");
    assert!(div.iter().all(|v| *v <= 1e-8));
    // z columns genuinely differ between the formalisms.
    let zc = column(&header, &rows, "z_contact");
    let zm = column(&header, &rows, "z_metriplectic");
    assert!(zc.iter().zip(&zm).any(|(a, b)| (a - b).abs() > 1e-3));
}

#[test]
fn compare_kinetic_hamiltonian_shows_factor_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("kin.csv");
    let text = r#"
[system]
formalism = "contact"
hamiltonian = "p1^2/2 + z"

[initial]
q = [0.0]
p = [1.0]
z = 0.0

[integrator]
abs_tol = 1e-10
rel_tol = 1e-10
t1 = 0.5
sample_dt = 0.05
"#;
    let config = write_config(dir.path(), "kin.toml", text);
    let result = binary()
        .args([
            "compare",
            config.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("factor 2"), "{stdout}");
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap());
    // At t = 0 (z = 0): contact ż = p²/2, metriplectic ż = p².
    let ratio = column(&header, &rows, "zdot_ratio");
    assert_eq!(ratio[0], 2.0);
}

#[test]
fn sweep_writes_one_file_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let text = r#"
[system]
preset = "duffing-metriplectic"

[integrator]
t1 = 2.0

[output]
path = "OUT"
"#
    .replace("OUT", out.to_str().unwrap());
    let config = write_config(dir.path(), "sweep.toml", &text);
    let result = binary()
        .args([
            "simulate",
            config.to_str().unwrap(),
            "--sweep",
            "gamma=0:0.4:3",
        ])
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    for suffix in ["gamma0", "gamma0.2", "gamma0.4"] {
        let path = dir.path().join(format!("sweep_{suffix}.csv"));
        assert!(path.exists(), "{}", path.display());
    }
}

#[test]
fn config_round_trip_yields_bit_identical_trajectory() {
    let text = r#"
[system]
formalism = "metriplectic"
hamiltonian = "p1^2/2 + alpha*q1^2/2 + beta*q1^4/4 + delta*z"
n = 1

[params]
alpha = 1.0
beta = 0.5
delta = 0.3

[initial]
q = [1.0]
p = [0.25]
z = 0.0

[integrator]
abs_tol = 1e-9
rel_tol = 1e-9
t1 = 5.0
sample_dt = 0.1
"#;
    let cfg = RunConfig::from_toml(text).unwrap();
    let serialized = cfg.to_toml().unwrap();
    let reparsed = RunConfig::from_toml(&serialized).unwrap();
    assert_eq!(cfg, reparsed);

    let a = integrate_resolved(&cfg.resolve().unwrap()).unwrap();
    let b = integrate_resolved(&reparsed.resolve().unwrap()).unwrap();
    assert_eq!(a.len(), b.len());
    for (sa, sb) in a.states.iter().zip(&b.states) {
        for (x, y) in sa.flat().iter().zip(sb.flat()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    for (ma, mb) in a.monitors.iter().zip(&b.monitors) {
        assert_eq!(ma.hamiltonian.to_bits(), mb.hamiltonian.to_bits());
        assert_eq!(ma.entropy_rate.to_bits(), mb.entropy_rate.to_bits());
    }
}

#[test]
fn json_output_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.json");
    let text = r#"
[system]
preset = "harmonic"

[integrator]
t1 = 1.0
sample_dt = 0.25

[output]
path = "OUT"
format = "json"
"#
    .replace("OUT", out.to_str().unwrap());
    let config = write_config(dir.path(), "json.toml", &text);
    let result = run(&["simulate", config.to_str().unwrap()]);
    assert!(result.status.success());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let columns: Vec<&str> = value["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        columns,
        vec![
            "t",
            "q1",
            "p1",
            "z",
            "H",
            "S",
            "energy_rate",
            "entropy_rate"
        ]
    );
    assert_eq!(value["rows"].as_array().unwrap().len(), 5);
}
