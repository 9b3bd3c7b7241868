//! A-posteriori invariant checks on sampled trajectories.

use crate::fields::Formalism;
use crate::structures::Point;

use super::Trajectory;

/// One adjacent-sample entropy decrease beyond the slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyViolation {
    /// Index of the later sample.
    pub index: usize,
    pub time: f64,
    /// Positive magnitude of the decrease.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub violations: Vec<EntropyViolation>,
    /// Largest adjacent-sample decrease observed (0 when monotone).
    pub max_drop: f64,
    /// Smallest adjacent-sample increment, signed.
    pub min_increment: f64,
    pub slack: f64,
}

impl EntropyReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags every adjacent sample pair with S(t_{k+1}) < S(t_k) − slack.
/// For metriplectic fields the expectation is no violations at a slack
/// of ten times the integration tolerance; for contact fields ż is the
/// sign-indefinite Lagrangian and violations are physics, not error.
pub fn check_monotone_entropy(traj: &Trajectory, slack: f64) -> EntropyReport {
    let mut violations = Vec::new();
    let mut max_drop = 0.0_f64;
    let mut min_increment = f64::INFINITY;
    for k in 1..traj.len() {
        let increment = traj.monitors[k].entropy - traj.monitors[k - 1].entropy;
        min_increment = min_increment.min(increment);
        if increment < -slack {
            violations.push(EntropyViolation {
                index: k,
                time: traj.times[k],
                drop: -increment,
            });
        }
        if increment < 0.0 {
            max_drop = max_drop.max(-increment);
        }
    }
    if traj.len() < 2 {
        min_increment = 0.0;
    }
    EntropyReport {
        violations,
        max_drop,
        min_increment,
        slack,
    }
}

/// Outcome of the energy-law check; the variant depends on what the
/// field admits in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyReport {
    /// Autonomous Poisson or metriplectic flow: Ḣ = 0, so the drift
    /// max |H(t_k) − H(t_0)| is pure integration error.
    Conservation {
        max_drift: f64,
        tol: f64,
        pass: bool,
    },
    /// Autonomous contact flow with constant ∂H/∂z = δ ≠ 0:
    /// H(t) = H₀ e^{−δt}; reports the max relative deviation.
    ExponentialDecay {
        delta: f64,
        h0: f64,
        max_rel_err: f64,
        tol: f64,
        pass: bool,
    },
    /// Driven system: compares a finite-difference dH/dt on the sample
    /// grid (5-point stencil when uniform) against the closed-form rate.
    DrivenRate {
        max_mismatch: f64,
        tol: f64,
        pass: bool,
    },
}

impl EnergyReport {
    pub fn pass(&self) -> bool {
        match self {
            EnergyReport::Conservation { pass, .. } => *pass,
            EnergyReport::ExponentialDecay { pass, .. } => *pass,
            EnergyReport::DrivenRate { pass, .. } => *pass,
        }
    }

    pub fn max_residual(&self) -> f64 {
        match self {
            EnergyReport::Conservation { max_drift, .. } => *max_drift,
            EnergyReport::ExponentialDecay { max_rel_err, .. } => *max_rel_err,
            EnergyReport::DrivenRate { max_mismatch, .. } => *max_mismatch,
        }
    }
}

/// Classifies the field (autonomous? constant ∂H/∂z?) by probing along
/// the sampled states, then applies the matching energy law at
/// tolerance `tol`.
pub fn check_energy_conservation(traj: &Trajectory, tol: f64) -> EnergyReport {
    let field = traj.field();
    let h = field.hamiltonian();
    let scale = traj
        .monitors
        .iter()
        .fold(0.0_f64, |m, s| m.max(s.hamiltonian.abs()))
        .max(1.0);

    // Probe explicit time dependence and ∂H/∂z along the trajectory.
    let mut max_ht = 0.0_f64;
    let mut hz_min = f64::INFINITY;
    let mut hz_max = f64::NEG_INFINITY;
    let stride = (traj.len() / 16).max(1);
    for k in (0..traj.len()).step_by(stride) {
        let pt: &Point = &traj.states[k];
        let t = traj.times[k];
        max_ht = max_ht.max(h.dt(pt, t).abs());
        let hz = h.dz(pt, t);
        hz_min = hz_min.min(hz);
        hz_max = hz_max.max(hz);
    }
    let autonomous = max_ht <= 1e-12 * scale;

    match field.formalism() {
        Formalism::Poisson | Formalism::Metriplectic if autonomous => {
            let h0 = traj.monitors[0].hamiltonian;
            let max_drift = traj
                .monitors
                .iter()
                .fold(0.0_f64, |m, s| m.max((s.hamiltonian - h0).abs()));
            EnergyReport::Conservation {
                max_drift,
                tol,
                pass: max_drift <= tol,
            }
        }
        Formalism::Contact
            if autonomous && (hz_max - hz_min).abs() <= 1e-10 && hz_max.abs() > 1e-12 =>
        {
            let delta = 0.5 * (hz_min + hz_max);
            let h0 = traj.monitors[0].hamiltonian;
            let mut max_rel_err = 0.0_f64;
            for (t, m) in traj.times.iter().zip(&traj.monitors) {
                let expected = h0 * (-delta * (t - traj.times[0])).exp();
                max_rel_err =
                    max_rel_err.max((m.hamiltonian - expected).abs() / h0.abs().max(1e-300));
            }
            EnergyReport::ExponentialDecay {
                delta,
                h0,
                max_rel_err,
                tol,
                pass: max_rel_err <= tol,
            }
        }
        _ => {
            let max_mismatch = rate_mismatch(traj);
            EnergyReport::DrivenRate {
                max_mismatch,
                tol,
                pass: max_mismatch <= tol,
            }
        }
    }
}

/// Max |dH/dt (stencil) − Ḣ (closed form)| over interior samples.
/// Uses the 5-point first-derivative stencil on a uniform grid and a
/// centered two-point slope otherwise.
fn rate_mismatch(traj: &Trajectory) -> f64 {
    let m = &traj.monitors;
    let t = &traj.times;
    let len = traj.len();
    if len < 5 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    if let Some(dt) = traj.uniform_dt() {
        for k in 2..len - 2 {
            let stencil = (m[k - 2].hamiltonian - 8.0 * m[k - 1].hamiltonian
                + 8.0 * m[k + 1].hamiltonian
                - m[k + 2].hamiltonian)
                / (12.0 * dt);
            worst = worst.max((stencil - m[k].energy_rate).abs());
        }
    } else {
        for k in 1..len - 1 {
            let slope = (m[k + 1].hamiltonian - m[k - 1].hamiltonian) / (t[k + 1] - t[k - 1]);
            worst = worst.max((slope - m[k].energy_rate).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Alphabet, Bindings};
    use crate::fields::{contact_hamiltonian_field, jet_metriplectic_field};
    use crate::integrators::{integrate, IntegratorOptions, Sampling};
    use crate::structures::{MetricField, Point, ScalarField};

    fn field(src: &str, params: &Bindings) -> ScalarField {
        let a = Alphabet::jet(1).with_parameters(params.iter().map(|(k, _)| k.to_string()));
        ScalarField::from_expr(&parse(src, &a).unwrap(), 1, params).unwrap()
    }

    #[test]
    fn metriplectic_entropy_is_monotone() {
        let params = Bindings::new().set("delta", 0.2);
        let h = field("p1^2/2 + q1^2/2 + q1^4/4 + delta*z", &params);
        let v = jet_metriplectic_field(&MetricField::identity(1), &h, 1).unwrap();
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 20.0);
        let traj = integrate(&v, &Point::new3(1.0, 0.0, 0.0), &opts).unwrap();
        let report = check_monotone_entropy(&traj, 1e-8);
        assert!(report.pass(), "violations: {:?}", report.violations);
    }

    #[test]
    fn contact_entropy_violations_are_expected_with_dominant_potential() {
        // Start from rest high on the potential: ż = p²/2 − V(q) − δz < 0.
        let params = Bindings::new().set("delta", 0.1);
        let h = field("p1^2/2 + q1^2/2 + q1^4/4 + delta*z", &params);
        let v = contact_hamiltonian_field(&h, 1);
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 2.0);
        let traj = integrate(&v, &Point::new3(1.5, 0.0, 0.0), &opts).unwrap();
        let report = check_monotone_entropy(&traj, 1e-8);
        assert!(!report.pass());
        assert!(report.max_drop > 0.0);
    }

    #[test]
    fn constant_trajectory_has_no_violations() {
        let h = field("0", &Bindings::new());
        let v = contact_hamiltonian_field(&h, 1);
        let opts = IntegratorOptions::rk4(0.1, 0.0, 1.0);
        let traj = integrate(&v, &Point::new3(0.5, 0.5, 0.5), &opts).unwrap();
        let report = check_monotone_entropy(&traj, 0.0);
        assert!(report.pass());
        assert_eq!(report.max_drop, 0.0);
    }

    #[test]
    fn conservation_mode_for_autonomous_metriplectic() {
        let params = Bindings::new().set("delta", 0.2);
        let h = field("p1^2/2 + q1^2/2 + q1^4/4 + delta*z", &params);
        let v = jet_metriplectic_field(&MetricField::identity(1), &h, 1).unwrap();
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 50.0);
        let traj = integrate(&v, &Point::new3(1.0, 0.0, 0.0), &opts).unwrap();
        let report = check_energy_conservation(&traj, 1e-7);
        match report {
            EnergyReport::Conservation {
                max_drift, pass, ..
            } => {
                assert!(pass, "drift = {max_drift}");
            }
            other => panic!("expected conservation mode, got {other:?}"),
        }
    }

    #[test]
    fn decay_mode_for_autonomous_contact_with_linear_z() {
        let params = Bindings::new().set("delta", 0.25);
        let h = field("p1^2/2 + q1^2/2 + delta*z", &params);
        let v = contact_hamiltonian_field(&h, 1);
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 10.0);
        let traj = integrate(&v, &Point::new3(1.0, 0.0, 0.0), &opts).unwrap();
        let report = check_energy_conservation(&traj, 1e-6);
        match report {
            EnergyReport::ExponentialDecay {
                delta,
                pass,
                max_rel_err,
                ..
            } => {
                assert!((delta - 0.25).abs() < 1e-12);
                assert!(pass, "max_rel_err = {max_rel_err}");
            }
            other => panic!("expected decay mode, got {other:?}"),
        }
    }

    #[test]
    fn driven_mode_compares_stencil_to_closed_form() {
        let params = Bindings::new()
            .set("delta", 0.3)
            .set("gamma", 0.5)
            .set("omega", 1.2);
        let h = field(
            "p1^2/2 + q1^2/2 + q1^4/4 - gamma*q1*sin(omega*t) + delta*z",
            &params,
        );
        let v = jet_metriplectic_field(&MetricField::identity(1), &h, 1).unwrap();
        // The step cap keeps the Hermite interpolation error well below
        // what the stencil's 1/dt amplification can see.
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 20.0)
            .with_sampling(Sampling::Uniform { dt: 0.02 })
            .with_max_step(0.05);
        let traj = integrate(&v, &Point::new3(1.0, 0.0, 0.0), &opts).unwrap();
        let report = check_energy_conservation(&traj, 1e-5);
        match report {
            EnergyReport::DrivenRate {
                max_mismatch, pass, ..
            } => {
                assert!(pass, "stencil mismatch = {max_mismatch}");
            }
            other => panic!("expected driven mode, got {other:?}"),
        }
    }

    #[test]
    fn zero_field_has_zero_drift() {
        let h = field("0", &Bindings::new());
        let v = jet_metriplectic_field(&MetricField::identity(1), &h, 1).unwrap();
        let opts = IntegratorOptions::rk4(0.25, 0.0, 5.0);
        let traj = integrate(&v, &Point::new3(1.0, 1.0, 1.0), &opts).unwrap();
        match check_energy_conservation(&traj, 1e-12) {
            EnergyReport::Conservation { max_drift, .. } => assert_eq!(max_drift, 0.0),
            other => panic!("unexpected report {other:?}"),
        }
    }
}
