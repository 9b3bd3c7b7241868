//! Ready-made system definitions: the Duffing oscillator in contact and
//! metriplectic form (autonomous or driven), natural Hamiltonians, and
//! the kinetic-energy comparison Hamiltonian.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Alphabet, Bindings, Expr};
use crate::fields::{
    contact_hamiltonian_field, jet_metriplectic_field, poisson_hamiltonian_field, FieldError,
    Formalism, VectorField,
};
use crate::structures::{canonical_poisson, MetricField, Point, ScalarField, StructureError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SystemError {
    #[error("potential must depend on q variables only; found `{0}`")]
    PotentialUsesForbiddenVariable(String),
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Parameters of the Duffing equation
/// q̈ + δq̇ + αq + βq³ = γ sin(ωt + φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingParams {
    /// Damping δ ≥ 0 for physically meaningful damping (negative values
    /// are allowed but flagged by [`DuffingParams::is_physical`]).
    pub delta: f64,
    /// Linear stiffness α.
    pub alpha: f64,
    /// Cubic stiffness β.
    pub beta: f64,
    /// Drive amplitude γ.
    pub gamma: f64,
    /// Drive frequency ω.
    pub omega: f64,
    /// Drive phase φ.
    pub phi: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        Self::decay_demo()
    }
}

impl DuffingParams {
    /// Undriven decay demo: δ=0.2, α=1, β=1, γ=0.
    pub fn decay_demo() -> Self {
        DuffingParams {
            delta: 0.2,
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.0,
            omega: 0.0,
            phi: 0.0,
        }
    }

    /// Driven double-well demo: δ=0.3, α=−1, β=1, γ=0.5, ω=1.2, φ=0.
    pub fn driven_demo() -> Self {
        DuffingParams {
            delta: 0.3,
            alpha: -1.0,
            beta: 1.0,
            gamma: 0.5,
            omega: 1.2,
            phi: 0.0,
        }
    }

    /// Reads the six named parameters from a map, defaulting the missing
    /// ones to the decay demo values.
    pub fn from_map(map: &BTreeMap<String, f64>) -> Result<Self, SystemError> {
        let base = Self::decay_demo();
        let get = |name: &str, fallback: f64| map.get(name).copied().unwrap_or(fallback);
        let params = DuffingParams {
            delta: get("delta", base.delta),
            alpha: get("alpha", base.alpha),
            beta: get("beta", base.beta),
            gamma: get("gamma", base.gamma),
            omega: get("omega", base.omega),
            phi: get("phi", base.phi),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        for (name, v) in [
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("omega", self.omega),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(SystemError::NonFiniteParameter(match name {
                    "delta" => "delta",
                    "alpha" => "alpha",
                    "beta" => "beta",
                    "gamma" => "gamma",
                    "omega" => "omega",
                    _ => "phi",
                }));
            }
        }
        Ok(())
    }

    /// Negative damping pumps energy in; flag it.
    pub fn is_physical(&self) -> bool {
        self.delta >= 0.0
    }

    pub fn bindings(&self) -> Bindings {
        Bindings::new()
            .set("delta", self.delta)
            .set("alpha", self.alpha)
            .set("beta", self.beta)
            .set("gamma", self.gamma)
            .set("omega", self.omega)
            .set("phi", self.phi)
    }
}

/// A complete system definition: Hamiltonian, formalism, and the data
/// the formalism needs, with a default initial condition.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub formalism: Formalism,
    pub hamiltonian: ScalarField,
    pub entropy: Option<ScalarField>,
    pub metric: Option<MetricField>,
    pub n: usize,
    pub initial: Point,
}

impl SystemSpec {
    /// Assembles the tagged vector field for this system.
    pub fn build_field(&self) -> Result<VectorField, FieldError> {
        match self.formalism {
            Formalism::Poisson => {
                poisson_hamiltonian_field(&canonical_poisson(self.n, 1), &self.hamiltonian)
            }
            Formalism::Contact => Ok(contact_hamiltonian_field(&self.hamiltonian, self.n)),
            Formalism::Metriplectic => {
                let metric = self
                    .metric
                    .clone()
                    .unwrap_or_else(|| MetricField::identity(self.n));
                jet_metriplectic_field(&metric, &self.hamiltonian, self.n)
            }
        }
    }
}

/// The Duffing Hamiltonian
/// H = p²/2 + αq²/2 + βq⁴/4 − γ q sin(ωt + φ) + δz,
/// with exact symbolic partials (∂H/∂z = δ,
/// ∂H/∂t = −γω q cos(ωt + φ), ∂H/∂p = p,
/// ∂H/∂q = αq + βq³ − γ sin(ωt + φ)).
pub fn duffing_hamiltonian(params: &DuffingParams) -> ScalarField {
    let alphabet =
        Alphabet::jet(1).with_parameters(["delta", "alpha", "beta", "gamma", "omega", "phi"]);
    let expr = crate::expr::parse(
        "p1^2/2 + alpha*q1^2/2 + beta*q1^4/4 - gamma*q1*sin(omega*t + phi) + delta*z",
        &alphabet,
    )
    .expect("static source parses");
    ScalarField::from_expr(&expr, 1, &params.bindings()).expect("static field builds")
}

/// Default initial condition (q, p, z) = (1, 0, 0); z₀ = 0 since entropy
/// is defined up to a constant.
fn duffing_initial() -> Point {
    Point::new3(1.0, 0.0, 0.0)
}

/// Duffing as a contact Hamiltonian system:
/// q̇ = p, ṗ = −αq − βq³ + γ sin(ωt+φ) − δp,
/// ż = p²/2 − δz − αq²/2 − βq⁴/4 + γ q sin(ωt+φ).
pub fn duffing_contact(params: &DuffingParams) -> SystemSpec {
    SystemSpec {
        name: "duffing-contact".into(),
        formalism: Formalism::Contact,
        hamiltonian: duffing_hamiltonian(params),
        entropy: Some(ScalarField::z_coordinate(1)),
        metric: None,
        n: 1,
        initial: duffing_initial(),
    }
}

/// Duffing as a metriplectic system (identity metric):
/// the same (q, p) block as the contact form, with ż = p².
pub fn duffing_metriplectic(params: &DuffingParams) -> SystemSpec {
    SystemSpec {
        name: "duffing-metriplectic".into(),
        formalism: Formalism::Metriplectic,
        hamiltonian: duffing_hamiltonian(params),
        entropy: Some(ScalarField::z_coordinate(1)),
        metric: Some(MetricField::identity(1)),
        n: 1,
        initial: duffing_initial(),
    }
}

/// Closed-form right-hand side of the contact Duffing system, for
/// cross-checking generated fields.
pub fn duffing_contact_rhs(params: &DuffingParams, pt: &Point, t: f64) -> [f64; 3] {
    let (q, p, z) = (pt.q()[0], pt.p()[0], pt.z());
    let drive = (params.omega * t + params.phi).sin();
    [
        p,
        -params.alpha * q - params.beta * q.powi(3) + params.gamma * drive - params.delta * p,
        p * p / 2.0 - params.delta * z - params.alpha * q * q / 2.0 - params.beta * q.powi(4) / 4.0
            + params.gamma * q * drive,
    ]
}

/// Closed-form right-hand side of the metriplectic Duffing system.
pub fn duffing_metriplectic_rhs(params: &DuffingParams, pt: &Point, t: f64) -> [f64; 3] {
    let (q, p) = (pt.q()[0], pt.p()[0]);
    let drive = (params.omega * t + params.phi).sin();
    [
        p,
        -params.alpha * q - params.beta * q.powi(3) + params.gamma * drive - params.delta * p,
        p * p,
    ]
}

/// A natural Hamiltonian H = Σ pᵢ²/2 + V(q) + c·z with exact partials.
/// The potential must reference q variables only; the configuration
/// dimension is the largest q index appearing in it (n = 1 for a
/// constant potential).
pub fn natural_hamiltonian(
    potential: &Expr,
    extra_z_coeff: f64,
) -> Result<ScalarField, SystemError> {
    let mut n = 1usize;
    for name in potential.free_names() {
        match name.strip_prefix('q').and_then(|s| s.parse::<usize>().ok()) {
            Some(index) if index >= 1 => n = n.max(index),
            _ => return Err(SystemError::PotentialUsesForbiddenVariable(name)),
        }
    }
    let mut h = potential.clone();
    for i in 1..=n {
        h = h + Expr::var(&format!("p{i}")).pow(2.0) / Expr::constant(2.0);
    }
    if extra_z_coeff != 0.0 {
        h = h + Expr::constant(extra_z_coeff) * Expr::var("z");
    }
    Ok(ScalarField::from_expr(&h.simplify(), n, &Bindings::new())?)
}

/// The Legendre transform Σ pᵢ ∂H/∂pᵢ − H at (pt, t): the Lagrangian
/// for natural Hamiltonians, and the contact ż whenever ∂H/∂z = 0.
pub fn legendre_lagrangian(h: &ScalarField, pt: &Point, t: f64) -> f64 {
    let fiber = h.fiber_derivative(pt, t);
    let pairing: f64 = pt.p().iter().zip(&fiber).map(|(p, hp)| p * hp).sum();
    pairing - h.value(pt, t)
}

/// Preset names addressable from the CLI.
pub const PRESETS: [&str; 4] = [
    "duffing-contact",
    "duffing-metriplectic",
    "harmonic",
    "natural",
];

/// Builds a named preset. Parameter semantics:
/// - `duffing-contact`, `duffing-metriplectic`: the six Duffing
///   parameters.
/// - `harmonic`: H = p²/2 + αq²/2 as a Poisson system on the jet bundle
///   (α defaults to 1).
/// - `natural`: H = p²/2 + αq²/2 + βq⁴/4 + δz as a contact system.
pub fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemSpec, SystemError> {
    let duffing = DuffingParams::from_map(params)?;
    match name {
        "duffing-contact" => Ok(duffing_contact(&duffing)),
        "duffing-metriplectic" => Ok(duffing_metriplectic(&duffing)),
        "harmonic" => {
            let alpha = params.get("alpha").copied().unwrap_or(1.0);
            let bindings = Bindings::new().set("alpha", alpha);
            let hamiltonian =
                ScalarField::parse("p1^2/2 + alpha*q1^2/2", 1, &bindings).map_err(|e| match e {
                    crate::Error::Structure(s) => SystemError::Structure(s),
                    other => {
                        SystemError::Structure(StructureError::DimensionMismatch(other.to_string()))
                    }
                })?;
            Ok(SystemSpec {
                name: "harmonic".into(),
                formalism: Formalism::Poisson,
                hamiltonian,
                entropy: None,
                metric: None,
                n: 1,
                initial: duffing_initial(),
            })
        }
        "natural" => {
            let undriven = DuffingParams {
                gamma: 0.0,
                ..duffing
            };
            let mut spec = duffing_contact(&undriven);
            spec.name = "natural".into();
            Ok(spec)
        }
        other => Err(SystemError::UnknownPreset(other.to_string())),
    }
}
