//! The flow generators: Poisson-Hamiltonian, contact Hamiltonian, and
//! metriplectic vector fields, plus the closed-form energy and entropy
//! rate laws used by the trajectory monitors.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::structures::{
    poisson_bracket_value, FourBracket, MetricField, Point, PoissonTensor, ScalarField,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FieldError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entropy is not a Casimir of the Poisson tensor (max |{{f,S}}| = {residual:.3e})")]
    EntropyNotCasimir { residual: f64 },
    #[error("field carries no entropy function")]
    NoEntropy,
    #[error(transparent)]
    Structure(#[from] crate::structures::StructureError),
}

/// Which bracket formalism generated a vector field. Selects the
/// closed-form rate laws and the monitor suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formalism {
    Poisson,
    Contact,
    Metriplectic,
}

impl Formalism {
    pub fn as_str(self) -> &'static str {
        match self {
            Formalism::Poisson => "poisson",
            Formalism::Contact => "contact",
            Formalism::Metriplectic => "metriplectic",
        }
    }
}

impl std::fmt::Display for Formalism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

type RhsFn = Arc<dyn Fn(&Point, f64) -> Vec<f64> + Send + Sync>;

/// The right-hand side of an ODE system on the one-jet bundle, tagged
/// with its formalism and carrying its generating data so monitors can
/// recompute the closed-form rates.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    formalism: Formalism,
    rhs: RhsFn,
    hamiltonian: ScalarField,
    entropy: Option<ScalarField>,
    metric: Option<MetricField>,
    bracket: Option<FourBracket>,
    casimir_residual: Option<f64>,
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("formalism", &self.formalism)
            .finish_non_exhaustive()
    }
}

impl VectorField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        (self.dim - 1) / 2
    }

    pub fn formalism(&self) -> Formalism {
        self.formalism
    }

    pub fn rhs(&self, pt: &Point, t: f64) -> Vec<f64> {
        (self.rhs)(pt, t)
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.hamiltonian
    }

    pub fn entropy(&self) -> Option<&ScalarField> {
        self.entropy.as_ref()
    }

    pub fn metric(&self) -> Option<&MetricField> {
        self.metric.as_ref()
    }

    pub fn bracket(&self) -> Option<&FourBracket> {
        self.bracket.as_ref()
    }

    /// Max |{f, S}| observed by the probabilistic Casimir screen, when
    /// one ran during construction.
    pub fn casimir_residual(&self) -> Option<f64> {
        self.casimir_residual
    }

    /// Closed-form energy rate Ḣ by formalism:
    /// poisson and metriplectic Ḣ = ∂H/∂t; contact Ḣ = −H ∂H/∂z + ∂H/∂t.
    pub fn energy_rate(&self, pt: &Point, t: f64) -> f64 {
        let h = &self.hamiltonian;
        match self.formalism {
            Formalism::Poisson | Formalism::Metriplectic => h.dt(pt, t),
            Formalism::Contact => -h.value(pt, t) * h.dz(pt, t) + h.dt(pt, t),
        }
    }

    /// Closed-form entropy rate:
    /// metriplectic Ṡ = g^{ij} ∂H/∂p_i ∂H/∂p_j ≥ 0 (or (S,H;S,H) for a
    /// custom bracket); contact ż = −H + pᵢ ∂H/∂pᵢ, which is
    /// sign-indefinite. Poisson fields carry no entropy.
    pub fn entropy_rate(&self, pt: &Point, t: f64) -> Result<f64, FieldError> {
        match self.formalism {
            Formalism::Poisson => Err(FieldError::NoEntropy),
            Formalism::Contact => {
                let h = &self.hamiltonian;
                let fiber = h.fiber_derivative(pt, t);
                let pdot: f64 = pt.p().iter().zip(&fiber).map(|(p, hp)| p * hp).sum();
                Ok(-h.value(pt, t) + pdot)
            }
            Formalism::Metriplectic => {
                if let Some(metric) = &self.metric {
                    let fiber = self.hamiltonian.fiber_derivative(pt, t);
                    Ok(metric.inverse_pairing(pt.q(), &fiber, &fiber))
                } else if let (Some(bracket), Some(s)) = (&self.bracket, &self.entropy) {
                    Ok(bracket.apply(s, &self.hamiltonian, s, &self.hamiltonian, pt, t))
                } else {
                    Err(FieldError::NoEntropy)
                }
            }
        }
    }

    /// Chain-rule energy rate ∇H · rhs + ∂H/∂t; agrees with
    /// [`VectorField::energy_rate`] for every formalism.
    pub fn energy_rate_chain(&self, pt: &Point, t: f64) -> f64 {
        let grad = self.hamiltonian.gradient(pt, t);
        let rhs = self.rhs(pt, t);
        let advect: f64 = grad.iter().zip(&rhs).map(|(g, v)| g * v).sum();
        advect + self.hamiltonian.dt(pt, t)
    }
}

/// żⁱ = J^{ij} ∂H/∂zʲ. With the jet-bundle tensor the z-component
/// vanishes identically (z is the Casimir).
pub fn poisson_hamiltonian_field(
    tensor: &PoissonTensor,
    hamiltonian: &ScalarField,
) -> Result<VectorField, FieldError> {
    if tensor.dim() != hamiltonian.dim() {
        return Err(FieldError::DimensionMismatch(format!(
            "tensor dim {} vs Hamiltonian domain dim {}",
            tensor.dim(),
            hamiltonian.dim()
        )));
    }
    let j = tensor.clone();
    let h = hamiltonian.clone();
    let rhs: RhsFn = Arc::new(move |pt, t| {
        let grad = h.gradient(pt, t);
        j.apply(&grad, pt).expect("dimensions checked at build")
    });
    Ok(VectorField {
        dim: tensor.dim(),
        formalism: Formalism::Poisson,
        rhs,
        hamiltonian: hamiltonian.clone(),
        entropy: None,
        metric: None,
        bracket: None,
        casimir_residual: None,
    })
}

/// The contact Hamiltonian system
/// q̇ⁱ = ∂H/∂pᵢ, ṗᵢ = −∂H/∂qⁱ − pᵢ ∂H/∂z, ż = −H + pᵢ ∂H/∂pᵢ.
pub fn contact_hamiltonian_field(hamiltonian: &ScalarField, n: usize) -> VectorField {
    assert_eq!(hamiltonian.n(), n, "Hamiltonian does not live on ℝ^(2n+1)");
    let h = hamiltonian.clone();
    let rhs: RhsFn = Arc::new(move |pt, t| {
        let mut out = Vec::with_capacity(2 * n + 1);
        let fiber = h.fiber_derivative(pt, t);
        let hz = h.dz(pt, t);
        out.extend_from_slice(&fiber);
        for i in 0..n {
            out.push(-h.dq(i, pt, t) - pt.p()[i] * hz);
        }
        let pdot: f64 = pt.p().iter().zip(&fiber).map(|(p, hp)| p * hp).sum();
        out.push(-h.value(pt, t) + pdot);
        out
    });
    VectorField {
        dim: 2 * n + 1,
        formalism: Formalism::Contact,
        rhs,
        hamiltonian: hamiltonian.clone(),
        entropy: Some(ScalarField::z_coordinate(n)),
        metric: None,
        bracket: None,
        casimir_residual: None,
    }
}

/// How to treat a failed Casimir screen when assembling a metriplectic
/// field: record the residual, or refuse to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirPolicy {
    Warn,
    Error,
}

const CASIMIR_THRESHOLD: f64 = 1e-10;

/// 𝒱 = {·, H} + (·, H; S, H): Hamiltonian part from the Poisson tensor,
/// dissipative part from the 4-bracket with coordinate functions in the
/// first slot. S is screened for the Casimir property by sampling
/// (20 random observables × 20 random points); the default policy
/// records the residual on the field, [`metriplectic_field_strict`]
/// makes it a hard error.
pub fn metriplectic_field(
    tensor: &PoissonTensor,
    bracket: &FourBracket,
    hamiltonian: &ScalarField,
    entropy: &ScalarField,
) -> Result<VectorField, FieldError> {
    metriplectic_field_with_policy(tensor, bracket, hamiltonian, entropy, CasimirPolicy::Warn)
}

/// As [`metriplectic_field`], but a failed Casimir screen is an error.
pub fn metriplectic_field_strict(
    tensor: &PoissonTensor,
    bracket: &FourBracket,
    hamiltonian: &ScalarField,
    entropy: &ScalarField,
) -> Result<VectorField, FieldError> {
    metriplectic_field_with_policy(tensor, bracket, hamiltonian, entropy, CasimirPolicy::Error)
}

pub fn metriplectic_field_with_policy(
    tensor: &PoissonTensor,
    bracket: &FourBracket,
    hamiltonian: &ScalarField,
    entropy: &ScalarField,
    policy: CasimirPolicy,
) -> Result<VectorField, FieldError> {
    let dim = tensor.dim();
    if dim != hamiltonian.dim() || dim != entropy.dim() {
        return Err(FieldError::DimensionMismatch(format!(
            "tensor dim {dim} vs H dim {} and S dim {}",
            hamiltonian.dim(),
            entropy.dim()
        )));
    }
    let residual = casimir_screen(tensor, entropy, 0x5eed);
    if policy == CasimirPolicy::Error && residual > CASIMIR_THRESHOLD {
        return Err(FieldError::EntropyNotCasimir { residual });
    }

    let n = hamiltonian.n();
    let coords: Vec<ScalarField> = (0..dim).map(|i| ScalarField::coordinate(i, n)).collect();
    let j = tensor.clone();
    let b = bracket.clone();
    let h = hamiltonian.clone();
    let s = entropy.clone();
    let rhs: RhsFn = Arc::new(move |pt, t| {
        let grad = h.gradient(pt, t);
        let mut out = j.apply(&grad, pt).expect("dimensions checked at build");
        for (i, coord) in coords.iter().enumerate() {
            out[i] += b.apply(coord, &h, &s, &h, pt, t);
        }
        out
    });
    Ok(VectorField {
        dim,
        formalism: Formalism::Metriplectic,
        rhs,
        hamiltonian: hamiltonian.clone(),
        entropy: Some(entropy.clone()),
        metric: None,
        bracket: Some(bracket.clone()),
        casimir_residual: Some(residual),
    })
}

/// The full jet-bundle metriplectic dynamics in Darboux coordinates:
/// q̇ⁱ = ∂H/∂pᵢ, ṗ_k = −∂H/∂q^k − g^{kj} ∂H/∂p_j ∂H/∂z,
/// ż = ‖∂H/∂p‖²_g = g^{ij} ∂H/∂p_i ∂H/∂p_j.
///
/// Equal (within floating-point association order) to
/// `metriplectic_field(canonical_poisson(n, 1), jet_bundle_bracket(metric), H, z)`.
pub fn jet_metriplectic_field(
    metric: &MetricField,
    hamiltonian: &ScalarField,
    n: usize,
) -> Result<VectorField, FieldError> {
    if metric.n() != n || hamiltonian.n() != n {
        return Err(FieldError::DimensionMismatch(format!(
            "metric block {} and Hamiltonian block {} must both equal n = {n}",
            metric.n(),
            hamiltonian.n()
        )));
    }
    let g = metric.clone();
    let h = hamiltonian.clone();
    let rhs: RhsFn = Arc::new(move |pt, t| {
        let mut out = Vec::with_capacity(2 * n + 1);
        let fiber = h.fiber_derivative(pt, t);
        let hz = h.dz(pt, t);
        let damped = g.inverse_apply(pt.q(), &fiber);
        out.extend_from_slice(&fiber);
        for (i, d) in damped.iter().enumerate() {
            out.push(-h.dq(i, pt, t) - d * hz);
        }
        out.push(g.inverse_pairing(pt.q(), &fiber, &fiber));
        out
    });
    Ok(VectorField {
        dim: 2 * n + 1,
        formalism: Formalism::Metriplectic,
        rhs,
        hamiltonian: hamiltonian.clone(),
        entropy: Some(ScalarField::z_coordinate(n)),
        metric: Some(metric.clone()),
        bracket: Some(crate::structures::jet_bundle_bracket(metric)),
        casimir_residual: None,
    })
}

/// Max |{f, S}| over 20 random polynomial observables at 20 random
/// points each; deterministic for a fixed seed.
pub fn casimir_screen(tensor: &PoissonTensor, entropy: &ScalarField, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = entropy.n();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let f = random_quadratic_observable(n, &mut rng);
        for _ in 0..20 {
            let flat: Vec<f64> = (0..2 * n + 1)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let pt = Point::from_flat(n, &flat);
            let t = rng.random_range(-1.0..1.0);
            let v = poisson_bracket_value(tensor, &f, entropy, &pt, t);
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Random observable with full-rank gradient coverage: a quadratic form
/// plus a linear term over all 2n+1 coordinates.
fn random_quadratic_observable(n: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let dim = 2 * n + 1;
    let linear: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quad: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect())
        .collect();
    let lin_value = linear.clone();
    let quad_value = quad.clone();
    let value = move |pt: &Point, _t: f64| {
        let x = pt.flat();
        let mut v = 0.0;
        for i in 0..dim {
            v += lin_value[i] * x[i];
            for j in 0..dim {
                v += 0.5 * quad_value[i][j] * x[i] * x[j];
            }
        }
        v
    };
    let mut partials: Vec<crate::structures::FieldFn> = Vec::with_capacity(dim);
    for i in 0..dim {
        let linear = linear.clone();
        let quad = quad.clone();
        partials.push(Arc::new(move |pt: &Point, _t: f64| {
            let x = pt.flat();
            let mut v = linear[i];
            for j in 0..dim {
                v += 0.5 * (quad[i][j] + quad[j][i]) * x[j];
            }
            v
        }));
    }
    let dz = partials[2 * n].clone();
    let dq = partials[0..n].to_vec();
    let dp = partials[n..2 * n].to_vec();
    ScalarField::from_parts(
        n,
        crate::structures::PrecisionClass::Exact,
        value,
        dq,
        dp,
        dz,
        Arc::new(|_, _| 0.0),
    )
}
