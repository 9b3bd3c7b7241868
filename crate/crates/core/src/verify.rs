//! Seeded randomized verification suites for the bracket axioms, the
//! Jacobi identity, the Casimir property, the Reeb field, and the
//! thermodynamic-consistency identities. The same suites back the
//! library tests and the CLI `verify` subcommand.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Bindings, Expr};
use crate::fields::{casimir_screen, VectorField};
use crate::structures::{
    reeb_field, symmetry_residuals, ContactForm, FourBracket, MetricField, Point, PoissonTensor,
    ScalarField,
};

/// Outcome of one identity check: the worst residual observed over the
/// sampled inputs, against its pinned threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub identity: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(identity: impl Into<String>, max_residual: f64, threshold: f64) -> Self {
        IdentityCheck {
            identity: identity.into(),
            max_residual,
            threshold,
            pass: max_residual <= threshold,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random point with coordinates in (−range, range).
pub fn random_point(n: usize, range: f64, rng: &mut ChaCha8Rng) -> Point {
    let flat: Vec<f64> = (0..2 * n + 1)
        .map(|_| rng.random_range(-range..range))
        .collect();
    Point::from_flat(n, &flat)
}

fn random_coordinate_expr(n: usize, rng: &mut ChaCha8Rng) -> Expr {
    let dim = 2 * n + 1;
    let pick = rng.random_range(0..dim);
    if pick < n {
        Expr::var(&format!("q{}", pick + 1))
    } else if pick < 2 * n {
        Expr::var(&format!("p{}", pick - n + 1))
    } else {
        Expr::var("z")
    }
}

/// Random polynomial/trig observable of total degree ≤ 4 with small
/// coefficients, built symbolically so its partials are exact. Values
/// and gradients stay O(1) on the sampling box, which keeps the
/// floating-point noise of exact-zero identities well under the 1e-10
/// thresholds.
pub fn random_observable(n: usize, rng: &mut ChaCha8Rng, with_time: bool) -> ScalarField {
    let terms = rng.random_range(1..=4usize);
    let mut acc = Expr::constant(0.0);
    for _ in 0..terms {
        let coeff = rng.random_range(-0.5..0.5);
        let mut term = Expr::constant(coeff);
        let degree = rng.random_range(1..=4usize);
        let mut factors = 0;
        while factors < degree {
            if rng.random_range(0.0..1.0) < 0.2 {
                // A trig factor of a linear argument, derivative-bounded.
                let arg =
                    random_coordinate_expr(n, rng) * Expr::constant(rng.random_range(-1.0..1.0));
                let arg = if with_time && rng.random_range(0.0..1.0) < 0.3 {
                    arg + Expr::var("t") * Expr::constant(rng.random_range(-1.0..1.0))
                } else {
                    arg
                };
                term = if rng.random_range(0.0..1.0) < 0.5 {
                    term * arg.sin()
                } else {
                    term * arg.cos()
                };
            } else {
                term = term * random_coordinate_expr(n, rng);
            }
            factors += 1;
        }
        acc = acc + term;
    }
    if with_time && rng.random_range(0.0..1.0) < 0.5 {
        acc = acc + Expr::var("t") * Expr::constant(rng.random_range(-0.3..0.3));
    }
    ScalarField::from_expr(&acc.simplify(), n, &Bindings::new())
        .expect("generated observable uses only jet names")
}

/// Random Hamiltonian: a random observable plus a kinetic-like p² term
/// so the fiber derivative is generically nonzero.
pub fn random_hamiltonian(n: usize, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut acc = Expr::constant(0.0);
    for i in 1..=n {
        let c = rng.random_range(0.1..0.6);
        acc = acc + Expr::constant(c) * Expr::var(&format!("p{i}")).pow(2.0);
    }
    if rng.random_range(0.0..1.0) < 0.7 {
        acc = acc + Expr::var("z") * Expr::constant(rng.random_range(-0.5..0.5));
    }
    let base = ScalarField::from_expr(&acc.simplify(), n, &Bindings::new())
        .expect("generated Hamiltonian uses only jet names");
    let extra = random_observable(n, rng, true);
    sum_fields(&base, &extra)
}

fn sum_fields(a: &ScalarField, b: &ScalarField) -> ScalarField {
    use crate::structures::{FieldFn, PrecisionClass};
    use std::sync::Arc;
    assert_eq!(a.n(), b.n());
    let n = a.n();
    let av = a.clone();
    let bv = b.clone();
    let value = move |pt: &Point, t: f64| av.value(pt, t) + bv.value(pt, t);
    let part = |i: usize, which: u8| -> FieldFn {
        let a = a.clone();
        let b = b.clone();
        Arc::new(move |pt: &Point, t: f64| match which {
            0 => a.dq(i, pt, t) + b.dq(i, pt, t),
            1 => a.dp(i, pt, t) + b.dp(i, pt, t),
            2 => a.dz(pt, t) + b.dz(pt, t),
            _ => a.dt(pt, t) + b.dt(pt, t),
        })
    };
    let dq: Vec<FieldFn> = (0..n).map(|i| part(i, 0)).collect();
    let dp: Vec<FieldFn> = (0..n).map(|i| part(i, 1)).collect();
    ScalarField::from_parts(
        n,
        PrecisionClass::Exact,
        value,
        dq,
        dp,
        part(0, 2),
        part(0, 3),
    )
}

/// Random constant SPD metric g = R Rᵀ + c·I with c ∈ (0.3, 1.3).
pub fn random_spd_metric(n: usize, rng: &mut ChaCha8Rng) -> MetricField {
    let r: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let c = 0.3 + rng.random_range(0.0..1.0);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = r[i].iter().zip(&r[j]).map(|(a, b)| a * b).sum();
        }
        g[i][i] += c;
    }
    MetricField::from_constant(g).expect("R Rᵀ + cI is SPD")
}

const BRACKET_IDENTITIES: [&str; 5] = [
    "bracket.antisymmetry_first_pair",
    "bracket.antisymmetry_second_pair",
    "bracket.pair_exchange",
    "bracket.cyclic_identity",
    "bracket.leibniz_slot1",
];

/// Runs the five bracket-axiom residuals over `points` random sites,
/// each with a fresh quadruple of random degree-≤4 observables.
pub fn bracket_axiom_suite(
    bracket: &FourBracket,
    n: usize,
    points: usize,
    threshold: f64,
    seed: u64,
) -> Vec<IdentityCheck> {
    let mut rng = rng(seed);
    let mut worst = [0.0_f64; 5];
    for _ in 0..points {
        let fields = [
            random_observable(n, &mut rng, false),
            random_observable(n, &mut rng, false),
            random_observable(n, &mut rng, false),
            random_observable(n, &mut rng, false),
        ];
        let pt = random_point(n, 1.0, &mut rng);
        let t = rng.random_range(-1.0..1.0);
        let res = symmetry_residuals(bracket, &fields, &pt, t);
        for (w, r) in worst.iter_mut().zip(res.iter()) {
            *w = w.max(*r);
        }
    }
    BRACKET_IDENTITIES
        .iter()
        .zip(worst.iter())
        .map(|(name, w)| IdentityCheck::new(*name, *w, threshold))
        .collect()
}

/// Antisymmetry and Jacobi residuals of a Poisson tensor over random
/// points (both are exactly zero for the canonical constant tensors).
pub fn poisson_tensor_suite(
    tensor: &PoissonTensor,
    n: usize,
    points: usize,
    seed: u64,
) -> Vec<IdentityCheck> {
    let mut rng = rng(seed);
    let mut antisym = 0.0_f64;
    let mut jacobi = 0.0_f64;
    for _ in 0..points {
        let pt = random_point(n, 2.0, &mut rng);
        antisym = antisym.max(tensor.antisymmetry_residual(&pt));
        jacobi = jacobi.max(crate::structures::jacobi_residual(tensor, &pt));
    }
    vec![
        IdentityCheck::new("poisson.antisymmetry", antisym, 1e-12),
        IdentityCheck::new("poisson.jacobi_identity", jacobi, 1e-9),
    ]
}

/// Casimir screen for an entropy function: max |{f, S}| over random
/// observables and points.
pub fn casimir_check(tensor: &PoissonTensor, entropy: &ScalarField, seed: u64) -> IdentityCheck {
    IdentityCheck::new(
        "poisson.casimir_entropy",
        casimir_screen(tensor, entropy, seed),
        1e-10,
    )
}

/// The thermodynamic-consistency identities of the jet-bundle bracket:
/// (H,H;S,H) = 0, (S,H;S,H) = ‖∂H/∂p‖²_g, and Ṡ ≥ 0, sampled over
/// random Hamiltonians and random (point, t).
pub fn theorem_suite(
    metric: &MetricField,
    n: usize,
    hamiltonians: usize,
    points: usize,
    seed: u64,
) -> Vec<IdentityCheck> {
    let bracket = crate::structures::jet_bundle_bracket(metric);
    let s = ScalarField::z_coordinate(n);
    let mut rng = rng(seed);
    let mut energy = 0.0_f64;
    let mut entropy_formula = 0.0_f64;
    let mut entropy_negativity = 0.0_f64;
    for _ in 0..hamiltonians {
        let h = random_hamiltonian(n, &mut rng);
        for _ in 0..points {
            let pt = random_point(n, 1.5, &mut rng);
            let t = rng.random_range(-1.0..1.0);
            energy = energy.max(bracket.apply(&h, &h, &s, &h, &pt, t).abs());
            let rate = bracket.apply(&s, &h, &s, &h, &pt, t);
            let fiber = h.fiber_derivative(&pt, t);
            let norm = metric.inverse_pairing(pt.q(), &fiber, &fiber);
            entropy_formula = entropy_formula.max((rate - norm).abs());
            entropy_negativity = entropy_negativity.max(-rate);
        }
    }
    vec![
        IdentityCheck::new("theorem.energy_rate_zero", energy, 1e-10),
        IdentityCheck::new("theorem.entropy_rate_formula", entropy_formula, 1e-10),
        IdentityCheck::new(
            "theorem.entropy_rate_nonnegative",
            entropy_negativity.max(0.0),
            1e-12,
        ),
    ]
}

/// The Reeb defining contractions of the canonical contact form over
/// random points: |α(R) − 1| and max_j |(R ⌟ dα)_j|.
pub fn contact_suite(n: usize, points: usize, seed: u64) -> Vec<IdentityCheck> {
    let alpha = ContactForm::canonical(n);
    let mut rng = rng(seed);
    let mut pairing = 0.0_f64;
    let mut kernel = 0.0_f64;
    for _ in 0..points {
        let pt = random_point(n, 2.0, &mut rng);
        match reeb_field(&alpha, &pt) {
            Ok(r) => {
                pairing = pairing.max((alpha.pair(&pt, &r) - 1.0).abs());
                let d = alpha.d_alpha(&pt);
                for j in 0..alpha.dim() {
                    let c: f64 = r.iter().zip(&d).map(|(ri, di)| ri * di[j]).sum();
                    kernel = kernel.max(c.abs());
                }
            }
            Err(_) => {
                pairing = f64::INFINITY;
                kernel = f64::INFINITY;
            }
        }
    }
    vec![
        IdentityCheck::new("contact.reeb_pairing", pairing, 1e-12),
        IdentityCheck::new("contact.reeb_kernel", kernel, 1e-12),
    ]
}

/// Closed-form energy rate vs the chain-rule value ∇H·rhs + ∂H/∂t over
/// random (point, t); catches generator/monitor mismatches for any
/// formalism.
pub fn energy_consistency_check(field: &VectorField, points: usize, seed: u64) -> IdentityCheck {
    let mut rng = rng(seed);
    let n = field.n();
    let mut worst = 0.0_f64;
    for _ in 0..points {
        let pt = random_point(n, 2.0, &mut rng);
        let t = rng.random_range(0.0..10.0);
        let closed = field.energy_rate(&pt, t);
        let chain = field.energy_rate_chain(&pt, t);
        worst = worst.max((closed - chain).abs() / closed.abs().max(1.0));
    }
    IdentityCheck::new("consistency.energy_rate_chain_rule", worst, 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{canonical_poisson, jet_bundle_bracket, SymmetricBivector};

    #[test]
    fn suites_pass_for_the_jet_bundle_construction() {
        let metric = MetricField::identity(1);
        let bracket = jet_bundle_bracket(&metric);
        for check in bracket_axiom_suite(&bracket, 1, 50, 1e-10, 42) {
            assert!(check.pass, "{}: {:.3e}", check.identity, check.max_residual);
        }
        for check in poisson_tensor_suite(&canonical_poisson(1, 1), 1, 20, 42) {
            assert!(check.pass, "{}: {:.3e}", check.identity, check.max_residual);
            assert_eq!(check.max_residual, 0.0);
        }
        for check in theorem_suite(&metric, 1, 3, 100, 42) {
            assert!(check.pass, "{}: {:.3e}", check.identity, check.max_residual);
        }
        for check in contact_suite(1, 20, 42) {
            assert!(check.pass, "{}: {:.3e}", check.identity, check.max_residual);
        }
        let z = ScalarField::z_coordinate(1);
        assert!(casimir_check(&canonical_poisson(1, 1), &z, 42).pass);
    }

    #[test]
    fn suite_fails_for_non_antisymmetrized_bracket() {
        let dot = SymmetricBivector::gradient_dot();
        let bad = FourBracket::from_fn(move |f, k, g, n, pt, t| {
            dot.apply(f, g, pt, t) * dot.apply(k, n, pt, t)
        });
        let checks = bracket_axiom_suite(&bad, 1, 30, 1e-10, 7);
        let cyclic = checks
            .iter()
            .find(|c| c.identity == "bracket.cyclic_identity")
            .unwrap();
        assert!(!cyclic.pass);
    }

    #[test]
    fn random_spd_metric_is_spd() {
        let mut r = rng(3);
        for _ in 0..10 {
            let m = random_spd_metric(3, &mut r);
            m.validate_spd_at(&[0.0, 0.0, 0.0]).unwrap();
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let metric = MetricField::identity(1);
        let bracket = jet_bundle_bracket(&metric);
        let a = bracket_axiom_suite(&bracket, 1, 10, 1e-10, 5);
        let b = bracket_axiom_suite(&bracket, 1, 10, 1e-10, 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.max_residual.to_bits(), y.max_residual.to_bits());
        }
    }
}
