//! Flows on the one-jet bundle T*N × ℝ.
//!
//! This crate constructs and integrates three families of dynamical
//! systems that share a phase space — Poisson-Hamiltonian, contact
//! Hamiltonian, and metriplectic — and continuously verifies the
//! algebraic identities behind them: bracket axioms, the Jacobi
//! identity, the Casimir property of the entropy coordinate, energy
//! conservation (Ḣ = 0 for autonomous metriplectic flows), and entropy
//! production (Ṡ ≥ 0).
//!
//! Module map:
//! - [`expr`]: expression parsing, evaluation, and exact symbolic
//!   differentiation — Hamiltonians are declared as strings.
//! - [`structures`]: points, scalar observables, Poisson tensors,
//!   metrics, symmetric bivectors, Kulkarni–Nomizu 4-brackets, and the
//!   canonical contact form with its Reeb field.
//! - [`fields`]: the three flow generators plus closed-form energy and
//!   entropy rate laws.
//! - [`integrators`]: fixed-step RK4 and adaptive Dormand–Prince 5(4)
//!   with per-sample invariant monitors.
//! - [`systems`]: ready-made systems, most prominently the Duffing
//!   oscillator in both dissipative formalisms.
//! - [`verify`]: seeded randomized identity suites shared by the tests
//!   and the CLI `verify` subcommand.

pub mod expr;
pub mod fields;
pub mod integrators;
mod linalg;
pub mod structures;
pub mod systems;
pub mod verify;

use thiserror::Error;

/// Crate-wide error type aggregating the per-module failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error(transparent)]
    Eval(#[from] expr::EvalError),
    #[error(transparent)]
    Structure(#[from] structures::StructureError),
    #[error(transparent)]
    Field(#[from] fields::FieldError),
    #[error(transparent)]
    Integration(#[from] integrators::IntegrationError),
    #[error(transparent)]
    System(#[from] systems::SystemError),
}

pub use expr::{parse, Alphabet, Bindings, Expr};
pub use fields::{
    contact_hamiltonian_field, jet_metriplectic_field, metriplectic_field,
    metriplectic_field_strict, Formalism, VectorField,
};
pub use integrators::{
    check_energy_conservation, check_monotone_entropy, integrate, IntegratorOptions, Method,
    Sampling, Trajectory,
};
pub use structures::{
    canonical_poisson, jacobi_residual, jet_bundle_bracket, kn_product, poisson_bracket,
    reeb_field, symmetry_residuals, ContactForm, FourBracket, MetricField, Point, PoissonTensor,
    ScalarField, SymmetricBivector,
};
pub use systems::{
    duffing_contact, duffing_hamiltonian, duffing_metriplectic, legendre_lagrangian,
    natural_hamiltonian, DuffingParams, SystemSpec,
};
