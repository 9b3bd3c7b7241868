//! The three subcommands. Exit codes: 0 success, 1 error,
//! 2 invariant violation above the slack.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use metriplectic::fields::Formalism;
use metriplectic::integrators::{
    check_energy_conservation, check_monotone_entropy, integrate, EnergyReport, Trajectory,
};
use metriplectic::structures::{canonical_poisson, jet_bundle_bracket, MetricField, ScalarField};
use metriplectic::verify::{
    bracket_axiom_suite, casimir_check, contact_suite, energy_consistency_check,
    poisson_tensor_suite, theorem_suite, IdentityCheck,
};

use crate::config::{OutputFormat, ResolvedRun, RunConfig};
use crate::output::{write_trajectory, Comparison};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub slack: Option<f64>,
    pub sweep: Option<String>,
}

pub fn simulate(config_path: &Path, args: &SimulateArgs) -> Result<i32> {
    let config = RunConfig::load(config_path)?;
    match &args.sweep {
        None => {
            let run = apply_overrides(config.resolve()?, args)?;
            let (code, summary) = run_one(&run, args.slack)?;
            print!("{summary}");
            Ok(code)
        }
        Some(spec) => sweep(&config, spec, args),
    }
}

fn apply_overrides(mut run: ResolvedRun, args: &SimulateArgs) -> Result<ResolvedRun> {
    if let Some(path) = &args.output {
        run.output_path = path.clone();
    }
    if let Some(format) = &args.format {
        run.output_format = OutputFormat::from_name(format)?;
    }
    Ok(run)
}

/// Integrates, writes the trajectory, and reports the per-formalism
/// invariant checks. Returns (exit code, summary text).
fn run_one(run: &ResolvedRun, slack: Option<f64>) -> Result<(i32, String)> {
    let traj = integrate(&run.field, &run.x0, &run.opts)
        .map_err(|e| anyhow!("integration of `{}` failed: {e}", run.spec.name))?;
    write_trajectory(&run.output_path, &traj, run.output_format)?;

    let slack = slack.unwrap_or_else(|| run.opts.default_slack());
    let mut summary = String::new();
    let mut violated = false;

    let h0 = traj.monitors[0].hamiltonian;
    let final_drift = (traj.monitors.last().unwrap().hamiltonian - h0).abs();
    summary.push_str(&format!(
        "system: {} ({})\nsteps: {} accepted, {} rejected, {} samples\n",
        run.spec.name,
        run.field.formalism(),
        traj.steps_accepted,
        traj.steps_rejected,
        traj.len()
    ));
    summary.push_str(&format!("final |H - H0|: {final_drift:.3e}\n"));

    let entropy = check_monotone_entropy(&traj, slack);
    summary.push_str(&format!(
        "min entropy increment: {:.3e}\n",
        entropy.min_increment
    ));
    if run.field.formalism() == Formalism::Metriplectic && !entropy.pass() {
        violated = true;
        summary.push_str(&format!(
            "VIOLATION: {} entropy decreases beyond slack {slack:.1e} (worst {:.3e})\n",
            entropy.violations.len(),
            entropy.max_drop
        ));
    }

    let energy_tol = match run.field.formalism() {
        Formalism::Contact => 1e-6,
        _ => slack * h0.abs().max(1.0),
    };
    let energy = check_energy_conservation(&traj, energy_tol);
    match &energy {
        EnergyReport::Conservation { max_drift, tol, .. } => {
            summary.push_str(&format!(
                "energy conservation: sampled max |H(t) - H0| = {max_drift:.3e}, step-grid drift = {:.3e} (tol {tol:.1e})\n",
                traj.step_energy_drift
            ));
            // The violation gate uses the step-grid drift: sampled
            // values carry dense-output interpolation error on top of
            // what the scheme produced.
            if traj.step_energy_drift > *tol {
                violated = true;
                summary.push_str("VIOLATION: energy drift above slack\n");
            }
        }
        EnergyReport::ExponentialDecay {
            delta,
            max_rel_err,
            tol,
            ..
        } => {
            summary.push_str(&format!(
                "decay law H0*exp(-{delta}*t): max relative error {max_rel_err:.3e} (tol {tol:.1e})\n"
            ));
        }
        EnergyReport::DrivenRate { max_mismatch, .. } => {
            summary.push_str(&format!(
                "driven energy balance: max |dH/dt - closed form| = {max_mismatch:.3e}\n"
            ));
        }
    }

    summary.push_str(&format!(
        "trajectory written to {}\n",
        run.output_path.display()
    ));
    Ok((if violated { EXIT_VIOLATION } else { EXIT_OK }, summary))
}

/// `--sweep name=start:stop:count` fans a parameter grid across worker
/// threads; each run writes its own output file.
fn sweep(config: &RunConfig, spec: &str, args: &SimulateArgs) -> Result<i32> {
    let (name, values) = parse_sweep(spec)?;
    let runs: Vec<(f64, ResolvedRun)> = values
        .iter()
        .map(|v| {
            let mut cfg = config.clone();
            cfg.params.insert(name.clone(), *v);
            let mut run = apply_overrides(cfg.resolve()?, args)?;
            run.output_path = suffixed_path(&run.output_path, &name, *v, run.output_format);
            Ok((*v, run))
        })
        .collect::<Result<_>>()?;

    let results: Vec<Result<(i32, String)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|(_, run)| scope.spawn(move || run_one(run, args.slack)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut code = EXIT_OK;
    for ((value, _), result) in runs.iter().zip(results) {
        let (run_code, summary) = result?;
        println!("--- {name} = {value}");
        print!("{summary}");
        code = code.max(run_code);
    }
    Ok(code)
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<f64>)> {
    let (name, range) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("--sweep expects name=start:stop:count, got `{spec}`"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        bail!("--sweep expects name=start:stop:count, got `{spec}`");
    }
    let start: f64 = parts[0].parse().context("sweep start")?;
    let stop: f64 = parts[1].parse().context("sweep stop")?;
    let count: usize = parts[2].parse().context("sweep count")?;
    if count == 0 {
        bail!("sweep count must be at least 1");
    }
    let values = if count == 1 {
        vec![start]
    } else {
        (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect()
    };
    Ok((name.to_string(), values))
}

fn suffixed_path(base: &Path, name: &str, value: f64, format: OutputFormat) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string());
    let file = format!("{stem}_{name}{value}.{}", format.extension());
    base.with_file_name(file)
}

#[derive(Debug, Clone, Default)]
pub struct VerifyArgs {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Runs the identity suite appropriate to the configured formalism and
/// emits the JSON report `[{identity, max_residual, threshold, pass}]`.
/// Exit 0 iff every identity passes.
pub fn verify(config_path: &Path, args: &VerifyArgs) -> Result<i32> {
    let config = RunConfig::load(config_path)?;
    let run = config.resolve()?;
    let seed = args.seed.unwrap_or(42);
    let samples = args.samples.unwrap_or(100);
    let n = run.spec.n;

    let mut checks: Vec<IdentityCheck> = Vec::new();
    match run.field.formalism() {
        Formalism::Poisson => {
            checks.extend(poisson_tensor_suite(
                &canonical_poisson(n, 1),
                n,
                samples,
                seed,
            ));
        }
        Formalism::Contact => {
            checks.extend(contact_suite(n, samples, seed));
            checks.push(energy_consistency_check(&run.field, samples, seed));
        }
        Formalism::Metriplectic => {
            let metric = run
                .spec
                .metric
                .clone()
                .unwrap_or_else(|| MetricField::identity(n));
            let bracket = jet_bundle_bracket(&metric);
            checks.extend(bracket_axiom_suite(&bracket, n, samples, 1e-10, seed));
            checks.extend(poisson_tensor_suite(
                &canonical_poisson(n, 1),
                n,
                samples,
                seed,
            ));
            let entropy = run
                .spec
                .entropy
                .clone()
                .unwrap_or_else(|| ScalarField::z_coordinate(n));
            checks.push(casimir_check(&canonical_poisson(n, 1), &entropy, seed));
            checks.extend(theorem_suite(&metric, n, 3, samples.max(10), seed));
            checks.push(energy_consistency_check(&run.field, samples, seed));
        }
    }

    let report = serde_json::to_string_pretty(
        &checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "identity": c.identity,
                    "max_residual": c.max_residual,
                    "threshold": c.threshold,
                    "pass": c.pass,
                })
            })
            .collect::<Vec<_>>(),
    )?;

    match &args.output {
        Some(path) => {
            std::fs::write(path, &report)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => println!("{report}"),
    }
    for check in &checks {
        eprintln!(
            "{:40} {:>12.3e}  (threshold {:.1e})  {}",
            check.identity,
            check.max_residual,
            check.threshold,
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

#[derive(Debug, Clone, Default)]
pub struct CompareArgs {
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub slack: Option<f64>,
}

/// Integrates the contact and metriplectic realizations of the same
/// Hamiltonian from the same initial data and emits the per-sample
/// comparison. The (q,p) blocks must agree within the slack.
pub fn compare(config_path: &Path, args: &CompareArgs) -> Result<i32> {
    let config = RunConfig::load(config_path)?;
    let run = config.resolve()?;
    let n = run.spec.n;
    let h = &run.spec.hamiltonian;
    let metric = run
        .spec
        .metric
        .clone()
        .unwrap_or_else(|| MetricField::identity(n));

    let contact_field = metriplectic::contact_hamiltonian_field(h, n);
    let met_field = metriplectic::jet_metriplectic_field(&metric, h, n)
        .map_err(|e| anyhow!("metriplectic realization: {e}"))?;

    let traj_c = integrate(&contact_field, &run.x0, &run.opts)
        .map_err(|e| anyhow!("contact integration failed: {e}"))?;
    let traj_m = integrate(&met_field, &run.x0, &run.opts)
        .map_err(|e| anyhow!("metriplectic integration failed: {e}"))?;
    if traj_c.len() != traj_m.len() {
        bail!(
            "sampling grids differ ({} vs {} samples); use integrator.sample_dt for comparison runs",
            traj_c.len(),
            traj_m.len()
        );
    }

    let comparison = Comparison::from_trajectories(&traj_c, &traj_m);
    let format = match &args.format {
        Some(name) => OutputFormat::from_name(name)?,
        None => run.output_format,
    };
    let path = args.output.clone().unwrap_or_else(|| {
        run.output_path
            .with_file_name(format!("comparison.{}", format.extension()))
    });
    comparison.write(&path, format)?;

    let slack = args.slack.unwrap_or(1e-8);
    let max_div = comparison.max_qp_divergence();
    println!("max (q,p) divergence: {max_div:.3e} (slack {slack:.1e})");
    match comparison.zdot_ratio_range() {
        Some((lo, hi)) => {
            println!(
                "zdot ratio along the flow (metriplectic/contact): min {lo:.12}, max {hi:.12}"
            );
        }
        None => println!("zdot ratio: contact entropy rate vanished at every sample"),
    }
    if comparison.kinetic_coincidence() {
        println!("kinetic coincidence: on the z = 0 slice the entropy rates differ by exactly the factor 2");
    }
    println!("comparison written to {}", path.display());

    Ok(if max_div <= slack {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

/// Shared helper for tests: integrate a resolved run without touching
/// the filesystem.
pub fn integrate_resolved(run: &ResolvedRun) -> Result<Trajectory> {
    integrate(&run.field, &run.x0, &run.opts).map_err(|e| anyhow!("{e}"))
}
