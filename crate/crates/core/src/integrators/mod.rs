//! Time stepping for [`VectorField`]s with per-sample invariant
//! monitoring.
//!
//! Two schemes: classic fixed-step RK4 and the Dormand–Prince 5(4)
//! embedded pair with PI step-size control (safety 0.9, growth factor
//! clamped to [0.2, 5.0]). Invariants are verified a posteriori by the
//! monitor checks in this module rather than enforced by the scheme.

mod monitors;

pub use monitors::{
    check_energy_conservation, check_monotone_entropy, EnergyReport, EntropyReport,
    EntropyViolation,
};

use thiserror::Error;

use crate::fields::VectorField;
use crate::structures::Point;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IntegrationError {
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("dimension mismatch: field dim {field} vs state dim {state}")]
    DimensionMismatch { field: usize, state: usize },
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); system too stiff for this scheme")]
    StepUnderflow { t: f64, h: f64 },
    #[error("state diverged (non-finite) at t = {t:.6e}")]
    Divergence { t: f64 },
    #[error("exceeded {0} steps")]
    MaxSteps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classic RK4; the step is adjusted to divide the interval evenly.
    Rk4 { step: f64 },
    /// Dormand–Prince 5(4) with absolute/relative error control.
    Dp45 { abs_tol: f64, rel_tol: f64 },
}

/// Where trajectory samples are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Every `stride`-th accepted step (plus the endpoints).
    EveryStep { stride: usize },
    /// A uniform grid t0, t0+dt, … realized by 4th-order Hermite
    /// interpolation on accepted steps.
    Uniform { dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOptions {
    pub method: Method,
    pub t0: f64,
    pub t1: f64,
    pub sampling: Sampling,
    /// Optional cap on the adaptive step size.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl IntegratorOptions {
    pub fn rk4(step: f64, t0: f64, t1: f64) -> Self {
        IntegratorOptions {
            method: Method::Rk4 { step },
            t0,
            t1,
            sampling: Sampling::EveryStep { stride: 1 },
            max_step: None,
            max_steps: 50_000_000,
        }
    }

    pub fn dp45(abs_tol: f64, rel_tol: f64, t0: f64, t1: f64) -> Self {
        IntegratorOptions {
            method: Method::Dp45 { abs_tol, rel_tol },
            t0,
            t1,
            sampling: Sampling::EveryStep { stride: 1 },
            max_step: None,
            max_steps: 50_000_000,
        }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = Some(max_step);
        self
    }

    /// A slack for a-posteriori invariant checks: ten times the error
    /// tolerance of the scheme (numerical dips below that level are not
    /// physics violations).
    pub fn default_slack(&self) -> f64 {
        match self.method {
            Method::Rk4 { step } => 10.0 * step.powi(4),
            Method::Dp45 { abs_tol, rel_tol } => 10.0 * abs_tol.max(rel_tol),
        }
    }

    // Negated comparisons are deliberate: they reject NaN inputs too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.t1 > self.t0) {
            return Err(IntegrationError::InvalidOptions(format!(
                "t1 = {} must exceed t0 = {}",
                self.t1, self.t0
            )));
        }
        match self.method {
            Method::Rk4 { step } => {
                if !(step > 0.0) {
                    return Err(IntegrationError::InvalidOptions(
                        "rk4 step must be positive".into(),
                    ));
                }
            }
            Method::Dp45 { abs_tol, rel_tol } => {
                if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
                    return Err(IntegrationError::InvalidOptions(
                        "dp45 tolerances must be positive".into(),
                    ));
                }
            }
        }
        match self.sampling {
            Sampling::EveryStep { stride } => {
                if stride == 0 {
                    return Err(IntegrationError::InvalidOptions(
                        "sample stride must be >= 1".into(),
                    ));
                }
            }
            Sampling::Uniform { dt } => {
                if !(dt > 0.0) {
                    return Err(IntegrationError::InvalidOptions(
                        "sample dt must be positive".into(),
                    ));
                }
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(IntegrationError::InvalidOptions(
                    "max_step must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One sampled instant of the monitored quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    /// H at the sample.
    pub hamiltonian: f64,
    /// S at the sample (the z coordinate unless the field carries an
    /// explicit entropy function).
    pub entropy: f64,
    /// Closed-form Ḣ by formalism.
    pub energy_rate: f64,
    /// Closed-form Ṡ; NaN for Poisson fields, which carry no entropy.
    pub entropy_rate: f64,
    /// |H(t) − (H(t0) + ∫ Ḣ dt)| with the integral accumulated by the
    /// trapezoid rule over the sampled closed-form rates.
    pub energy_residual: f64,
}

/// Sampled (t, state) pairs with per-sample monitors, plus the
/// generating field for recomputation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub monitors: Vec<MonitorSample>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Max |H(t_step) − H(t0)| over accepted step endpoints. Unlike the
    /// per-sample monitors this is free of dense-output interpolation
    /// error, so it measures the drift the scheme itself produced.
    pub step_energy_drift: f64,
    field: VectorField,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn final_state(&self) -> &Point {
        self.states
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least one sample")
    }

    /// Uniform spacing of the time grid, if it is uniform to 1 part in 1e9.
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = self.times[1] - self.times[0];
        let ok = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
        ok.then_some(dt)
    }
}

struct Recorder<'a> {
    field: &'a VectorField,
    n: usize,
    sampling: Sampling,
    times: Vec<f64>,
    states: Vec<Point>,
    monitors: Vec<MonitorSample>,
    h0: Option<f64>,
    rate_integral: f64,
    next_uniform: f64,
    uniform_index: u64,
    stride_counter: usize,
    t0: f64,
    step_energy_drift: f64,
}

impl<'f> Recorder<'f> {
    fn new(field: &'f VectorField, sampling: Sampling, t0: f64) -> Self {
        Recorder {
            field,
            n: field.n(),
            sampling,
            times: Vec::new(),
            states: Vec::new(),
            monitors: Vec::new(),
            h0: None,
            rate_integral: 0.0,
            next_uniform: t0,
            uniform_index: 0,
            stride_counter: 0,
            t0,
            step_energy_drift: 0.0,
        }
    }

    fn emit(&mut self, t: f64, state: &[f64]) {
        let pt = Point::from_flat(self.n, state);
        let hamiltonian = self.field.hamiltonian().value(&pt, t);
        let entropy = match self.field.entropy() {
            Some(s) => s.value(&pt, t),
            None => pt.z(),
        };
        let energy_rate = self.field.energy_rate(&pt, t);
        let entropy_rate = self.field.entropy_rate(&pt, t).unwrap_or(f64::NAN);
        let h0 = *self.h0.get_or_insert(hamiltonian);
        if let (Some(&t_prev), Some(m_prev)) = (self.times.last(), self.monitors.last()) {
            self.rate_integral += 0.5 * (t - t_prev) * (energy_rate + m_prev.energy_rate);
        }
        let energy_residual = (hamiltonian - (h0 + self.rate_integral)).abs();
        self.times.push(t);
        self.states.push(pt);
        self.monitors.push(MonitorSample {
            hamiltonian,
            entropy,
            energy_rate,
            entropy_rate,
            energy_residual,
        });
    }

    /// Called after each accepted step from (t_a, ya, fa) to (t_b, yb, fb).
    #[allow(clippy::too_many_arguments)]
    fn after_step(
        &mut self,
        t_a: f64,
        ya: &[f64],
        fa: &[f64],
        t_b: f64,
        yb: &[f64],
        fb: &[f64],
        is_last: bool,
    ) {
        if let Some(h0) = self.h0 {
            let pt = Point::from_flat(self.n, yb);
            let h = self.field.hamiltonian().value(&pt, t_b);
            self.step_energy_drift = self.step_energy_drift.max((h - h0).abs());
        }
        match self.sampling {
            Sampling::EveryStep { stride } => {
                self.stride_counter += 1;
                if self.stride_counter >= stride || is_last {
                    self.stride_counter = 0;
                    self.emit(t_b, yb);
                }
            }
            Sampling::Uniform { dt } => {
                let h = t_b - t_a;
                loop {
                    let ts = self.next_uniform;
                    if ts > t_b + 1e-9 * dt {
                        break;
                    }
                    if ts > t_a {
                        if (t_b - ts).abs() <= 1e-9 * dt {
                            self.emit(t_b, yb);
                        } else {
                            let theta = (ts - t_a) / h;
                            let y = hermite(theta, h, ya, fa, yb, fb);
                            self.emit(ts, &y);
                        }
                    }
                    self.uniform_index += 1;
                    self.next_uniform = self.t0 + dt * self.uniform_index as f64;
                }
                if is_last {
                    let emitted_end = self
                        .times
                        .last()
                        .is_some_and(|&te| (te - t_b).abs() <= 1e-12 * t_b.abs().max(1.0));
                    if !emitted_end {
                        self.emit(t_b, yb);
                    }
                }
            }
        }
    }
}

/// Cubic Hermite interpolant on one step (two values, two slopes):
/// interpolation error is O(h⁴).
fn hermite(theta: f64, h: f64, ya: &[f64], fa: &[f64], yb: &[f64], fb: &[f64]) -> Vec<f64> {
    let h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
    let h10 = theta * (1.0 - theta) * (1.0 - theta);
    let h01 = theta * theta * (3.0 - 2.0 * theta);
    let h11 = theta * theta * (theta - 1.0);
    ya.iter()
        .zip(fa)
        .zip(yb.iter().zip(fb))
        .map(|((y0, f0), (y1, f1))| h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1)
        .collect()
}

fn rhs_flat(field: &VectorField, n: usize, t: f64, y: &[f64]) -> Vec<f64> {
    field.rhs(&Point::from_flat(n, y), t)
}

/// Integrates `field` from `x0` over the options' time span, recording
/// samples and monitors. Identical inputs produce bit-identical
/// trajectories.
pub fn integrate(
    field: &VectorField,
    x0: &Point,
    opts: &IntegratorOptions,
) -> Result<Trajectory, IntegrationError> {
    opts.validate()?;
    if x0.dim() != field.dim() {
        return Err(IntegrationError::DimensionMismatch {
            field: field.dim(),
            state: x0.dim(),
        });
    }
    if !x0.is_finite() {
        return Err(IntegrationError::InvalidOptions(
            "initial state must be finite".into(),
        ));
    }

    let mut rec = Recorder::new(field, opts.sampling, opts.t0);
    rec.emit(opts.t0, &x0.flat());

    let (steps_accepted, steps_rejected) = match opts.method {
        Method::Rk4 { step } => run_rk4(field, x0, opts, step, &mut rec)?,
        Method::Dp45 { abs_tol, rel_tol } => run_dp45(field, x0, opts, abs_tol, rel_tol, &mut rec)?,
    };

    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        monitors: rec.monitors,
        steps_accepted,
        steps_rejected,
        step_energy_drift: rec.step_energy_drift,
        field: field.clone(),
    })
}

fn check_finite(y: &[f64], t: f64) -> Result<(), IntegrationError> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(IntegrationError::Divergence { t })
    }
}

fn run_rk4(
    field: &VectorField,
    x0: &Point,
    opts: &IntegratorOptions,
    step: f64,
    rec: &mut Recorder,
) -> Result<(usize, usize), IntegrationError> {
    let n = field.n();
    let span = opts.t1 - opts.t0;
    let n_steps = ((span / step).round().max(1.0)) as usize;
    if n_steps > opts.max_steps {
        return Err(IntegrationError::MaxSteps(opts.max_steps));
    }
    let h = span / n_steps as f64;
    let mut y = x0.flat();
    let mut f = rhs_flat(field, n, opts.t0, &y);
    for k in 0..n_steps {
        let t = opts.t0 + h * k as f64;
        let t_next = if k + 1 == n_steps {
            opts.t1
        } else {
            opts.t0 + h * (k + 1) as f64
        };
        let y_next = rk4_step(field, n, t, &y, &f, h);
        check_finite(&y_next, t_next)?;
        let f_next = rhs_flat(field, n, t_next, &y_next);
        rec.after_step(t, &y, &f, t_next, &y_next, &f_next, k + 1 == n_steps);
        y = y_next;
        f = f_next;
    }
    Ok((n_steps, 0))
}

fn rk4_step(field: &VectorField, n: usize, t: f64, y: &[f64], k1: &[f64], h: f64) -> Vec<f64> {
    let dim = y.len();
    let mut buf = vec![0.0; dim];
    for i in 0..dim {
        buf[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = rhs_flat(field, n, t + 0.5 * h, &buf);
    for i in 0..dim {
        buf[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = rhs_flat(field, n, t + 0.5 * h, &buf);
    for i in 0..dim {
        buf[i] = y[i] + h * k3[i];
    }
    let k4 = rhs_flat(field, n, t + h, &buf);
    (0..dim)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

// Dormand–Prince 5(4) tableau. Stage 7 reuses the 5th-order solution
// (FSAL); the E row is the difference between the 5th- and 4th-order
// weights.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const BETA: f64 = 0.04;

fn run_dp45(
    field: &VectorField,
    x0: &Point,
    opts: &IntegratorOptions,
    abs_tol: f64,
    rel_tol: f64,
    rec: &mut Recorder,
) -> Result<(usize, usize), IntegrationError> {
    let n = field.n();
    let dim = x0.dim();
    let span = opts.t1 - opts.t0;
    let h_floor = 1e-14 * span;
    let h_cap = opts.max_step.unwrap_or(span).min(span);

    let mut t = opts.t0;
    let mut y = x0.flat();
    let mut f = rhs_flat(field, n, t, &y);
    check_finite(&f, t)?;

    let mut h = initial_step(field, n, t, &y, &f, abs_tol, rel_tol, span).min(h_cap);
    let mut err_old: f64 = 1e-4;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut k = vec![vec![0.0; dim]; 7];

    while t < opts.t1 {
        if accepted + rejected >= opts.max_steps {
            return Err(IntegrationError::MaxSteps(opts.max_steps));
        }
        if h < h_floor {
            return Err(IntegrationError::StepUnderflow { t, h });
        }
        // Stretch slightly rather than leave an unresolvable sliver.
        let last = t + 1.01 * h >= opts.t1;
        if last {
            h = opts.t1 - t;
        }

        k[0].copy_from_slice(&f);
        let mut stage_buf = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, k_j) in k.iter().enumerate().take(s) {
                    let a = DP_A[s][j];
                    if a != 0.0 {
                        acc += a * k_j[i];
                    }
                }
                stage_buf[i] = y[i] + h * acc;
            }
            k[s] = rhs_flat(field, n, t + DP_C[s] * h, &stage_buf);
        }
        // Stage 7 input is the 5th-order solution.
        let y_new = stage_buf.clone();
        let f_new = k[6].clone();

        if !y_new.iter().all(|v| v.is_finite()) || !f_new.iter().all(|v| v.is_finite()) {
            // Try to recover by shrinking before declaring divergence.
            if h <= h_floor * 2.0 {
                return Err(IntegrationError::Divergence { t });
            }
            h *= FAC_MIN;
            rejected += 1;
            continue;
        }

        let mut err_sq = 0.0;
        for i in 0..dim {
            let sc = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            let mut e = 0.0;
            for (j, k_j) in k.iter().enumerate() {
                let w = DP_E[j];
                if w != 0.0 {
                    e += w * k_j[i];
                }
            }
            let scaled = h * e / sc;
            err_sq += scaled * scaled;
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            let t_new = if last { opts.t1 } else { t + h };
            rec.after_step(t, &y, &f, t_new, &y_new, &f_new, last);
            // PI controller (error-history stabilized).
            let factor = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-(0.2 - 0.75 * BETA)) * err_old.powf(BETA))
                    .clamp(FAC_MIN, FAC_MAX)
            };
            err_old = err.max(1e-4);
            t = t_new;
            y = y_new;
            f = f_new;
            h = (h * factor).min(h_cap);
            accepted += 1;
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h *= factor;
            rejected += 1;
        }
    }
    Ok((accepted, rejected))
}

/// Deterministic starting step: the standard two-probe heuristic based
/// on the size of the state and its derivative.
#[allow(clippy::too_many_arguments)]
fn initial_step(
    field: &VectorField,
    n: usize,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    span: f64,
) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|v| abs_tol + rel_tol * v.abs()).collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let f1 = rhs_flat(field, n, t0 + h0, &y1);
    let d2 = {
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        rms(&diff, &sc) / h0
    };
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    let sum: f64 = v.iter().zip(sc).map(|(x, s)| (x / s) * (x / s)).sum();
    (sum / v.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Alphabet, Bindings};
    use crate::fields::{contact_hamiltonian_field, poisson_hamiltonian_field};
    use crate::structures::{canonical_poisson, ScalarField};

    fn field(src: &str, params: &Bindings) -> ScalarField {
        let a = Alphabet::jet(1).with_parameters(params.iter().map(|(k, _)| k.to_string()));
        ScalarField::from_expr(&parse(src, &a).unwrap(), 1, params).unwrap()
    }

    fn harmonic() -> crate::fields::VectorField {
        let h = field("p1^2/2 + q1^2/2", &Bindings::new());
        poisson_hamiltonian_field(&canonical_poisson(1, 1), &h).unwrap()
    }

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 2.0 * std::f64::consts::PI);
        let traj = integrate(&v, &x0, &opts).unwrap();
        let end = traj.final_state();
        assert!((end.q()[0] - 1.0).abs() < 1e-8);
        assert!(end.p()[0].abs() < 1e-8);
    }

    #[test]
    fn zero_field_keeps_state_constant() {
        let h = field("0", &Bindings::new());
        let v = poisson_hamiltonian_field(&canonical_poisson(1, 1), &h).unwrap();
        let x0 = Point::new3(0.3, -0.4, 0.6);
        let opts = IntegratorOptions::rk4(0.1, 0.0, 1.0);
        let traj = integrate(&v, &x0, &opts).unwrap();
        for s in &traj.states {
            assert_eq!(s, &x0);
        }
    }

    #[test]
    fn contact_duffing_decays_exponentially() {
        // gamma = 0, delta = 0.2: H(t) = H0 exp(-delta t).
        let params = Bindings::new().set("delta", 0.2);
        let h = field("p1^2/2 + q1^2/2 + q1^4/4 + delta*z", &params);
        let v = contact_hamiltonian_field(&h, 1);
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 10.0);
        let traj = integrate(&v, &x0, &opts).unwrap();
        let h0 = traj.monitors[0].hamiltonian;
        for (t, m) in traj.times.iter().zip(&traj.monitors) {
            let expected = h0 * (-0.2 * t).exp();
            assert!(
                (m.hamiltonian - expected).abs() <= 1e-6 * h0.abs(),
                "t = {t}: H = {} vs {expected}",
                m.hamiltonian
            );
        }
    }

    #[test]
    fn times_are_strictly_increasing() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        for opts in [
            IntegratorOptions::dp45(1e-9, 1e-9, 0.0, 3.0),
            IntegratorOptions::dp45(1e-9, 1e-9, 0.0, 3.0)
                .with_sampling(Sampling::Uniform { dt: 0.07 }),
            IntegratorOptions::rk4(0.1, 0.0, 3.0),
        ] {
            let traj = integrate(&v, &x0, &opts).unwrap();
            assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(traj.times.len(), traj.states.len());
            assert_eq!(traj.times.len(), traj.monitors.len());
            assert_eq!(traj.final_time(), 3.0);
        }
    }

    #[test]
    fn dp45_error_shrinks_with_tolerance() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let t1 = 2.0 * std::f64::consts::PI;
        let endpoint_error = |tol: f64| {
            let traj = integrate(&v, &x0, &IntegratorOptions::dp45(tol, tol, 0.0, t1)).unwrap();
            let end = traj.final_state();
            ((end.q()[0] - 1.0).powi(2) + end.p()[0].powi(2)).sqrt()
        };
        let loose = endpoint_error(1e-6);
        let tight = endpoint_error(1e-9);
        assert!(tight < loose, "loose {loose:.3e}, tight {tight:.3e}");
    }

    #[test]
    fn rk4_richardson_ratio_is_sixteen() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let t1 = 2.0 * std::f64::consts::PI;
        let endpoint_error = |step: f64| -> f64 {
            let opts = IntegratorOptions::rk4(step, 0.0, t1);
            let traj = integrate(&v, &x0, &opts).unwrap();
            let end = traj.final_state();
            ((end.q()[0] - 1.0).powi(2) + end.p()[0].powi(2)).sqrt()
        };
        let e1 = endpoint_error(t1 / 128.0);
        let e2 = endpoint_error(t1 / 256.0);
        let ratio = e1 / e2;
        assert!((14.0..=18.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn trajectories_are_bit_identical() {
        let params = Bindings::new().set("delta", 0.15);
        let h = field("p1^2/2 + q1^2/2 + delta*z", &params);
        let v = contact_hamiltonian_field(&h, 1);
        let x0 = Point::new3(1.0, 0.2, 0.0);
        let opts = IntegratorOptions::dp45(1e-9, 1e-9, 0.0, 5.0)
            .with_sampling(Sampling::Uniform { dt: 0.05 });
        let a = integrate(&v, &x0, &opts).unwrap();
        let b = integrate(&v, &x0, &opts).unwrap();
        assert_eq!(a.len(), b.len());
        for (sa, sb) in a.states.iter().zip(&b.states) {
            for (x, y) in sa.flat().iter().zip(sb.flat()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn uniform_sampling_lands_on_grid() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-8, 1e-8, 0.0, 1.0)
            .with_sampling(Sampling::Uniform { dt: 0.125 });
        let traj = integrate(&v, &x0, &opts).unwrap();
        assert_eq!(traj.len(), 9);
        for (k, t) in traj.times.iter().enumerate() {
            assert!((t - 0.125 * k as f64).abs() < 1e-12);
        }
        assert_eq!(traj.uniform_dt(), Some(0.125));
    }

    #[test]
    fn hermite_samples_are_accurate() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-10, 1e-10, 0.0, 3.0)
            .with_sampling(Sampling::Uniform { dt: 0.01 });
        let traj = integrate(&v, &x0, &opts).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.q()[0] - t.cos()).abs() < 1e-7, "t = {t}");
            assert!((s.p()[0] + t.sin()).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn monitors_recompute_exactly() {
        let params = Bindings::new().set("delta", 0.2);
        let h = field("p1^2/2 + q1^2/2 + delta*z", &params);
        let v = contact_hamiltonian_field(&h, 1);
        let x0 = Point::new3(1.0, 0.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-9, 1e-9, 0.0, 2.0);
        let traj = integrate(&v, &x0, &opts).unwrap();
        for ((t, pt), m) in traj.times.iter().zip(&traj.states).zip(&traj.monitors) {
            assert_eq!(m.hamiltonian, v.hamiltonian().value(pt, *t));
            assert_eq!(m.energy_rate, v.energy_rate(pt, *t));
            assert_eq!(m.entropy_rate, v.entropy_rate(pt, *t).unwrap());
            assert_eq!(m.entropy, pt.z());
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // ṗ grows like H_q = -q³ with inverted sign: unbounded escape.
        let h = field("p1^2/2 - q1^4/4", &Bindings::new());
        let v = poisson_hamiltonian_field(&canonical_poisson(1, 1), &h).unwrap();
        let x0 = Point::new3(2.0, 1.0, 0.0);
        let opts = IntegratorOptions::dp45(1e-8, 1e-8, 0.0, 100.0);
        let err = integrate(&v, &x0, &opts).unwrap_err();
        assert!(
            matches!(
                err,
                IntegrationError::StepUnderflow { .. }
                    | IntegrationError::Divergence { .. }
                    | IntegrationError::MaxSteps(_)
            ),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn invalid_options_are_rejected() {
        let v = harmonic();
        let x0 = Point::new3(1.0, 0.0, 0.0);
        assert!(integrate(&v, &x0, &IntegratorOptions::rk4(0.1, 1.0, 0.0)).is_err());
        assert!(integrate(&v, &x0, &IntegratorOptions::rk4(-0.1, 0.0, 1.0)).is_err());
        assert!(integrate(&v, &x0, &IntegratorOptions::dp45(0.0, 1e-6, 0.0, 1.0)).is_err());
    }
}
