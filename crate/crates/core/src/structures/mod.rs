//! Geometric structures on the one-jet bundle: phase-space points,
//! scalar observables with exact partials, Poisson tensors, Riemannian
//! metrics, symmetric bivectors, metriplectic 4-brackets, and the
//! canonical contact form with its Reeb field.

mod bracket;
mod contact;
mod metric;
mod poisson;

pub use bracket::{
    jet_bundle_bracket, kn_product, symmetry_residuals, FourBracket, SymmetricBivector,
};
pub use contact::{reeb_field, ContactForm};
pub use metric::MetricField;
pub(crate) use poisson::bracket_value as poisson_bracket_value;
pub use poisson::{canonical_poisson, jacobi_residual, poisson_bracket, PoissonTensor};

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Alphabet, Bindings, EvalError, Expr};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StructureError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point entries must be finite")]
    NonFinitePoint,
    #[error("configuration dimension n must be >= 1")]
    EmptyConfiguration,
    #[error("name `{name}` is not a jet coordinate for n={n}")]
    UnknownName { name: String, n: usize },
    #[error("metric is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("contact form is degenerate at the evaluation point")]
    DegenerateContactForm,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A state in ℝ^(2n+1): configuration block `q`, momentum block `p`,
/// and the thermodynamic coordinate `z`.
///
/// Flat coordinate order everywhere in this crate is
/// `(q1..qn, p1..pn, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    q: Vec<f64>,
    p: Vec<f64>,
    z: f64,
}

impl Point {
    pub fn new(q: Vec<f64>, p: Vec<f64>, z: f64) -> Result<Self, StructureError> {
        if q.is_empty() {
            return Err(StructureError::EmptyConfiguration);
        }
        if q.len() != p.len() {
            return Err(StructureError::DimensionMismatch(format!(
                "q has {} entries but p has {}",
                q.len(),
                p.len()
            )));
        }
        if !q.iter().chain(p.iter()).all(|v| v.is_finite()) || !z.is_finite() {
            return Err(StructureError::NonFinitePoint);
        }
        Ok(Point { q, p, z })
    }

    /// 3D convenience constructor for n = 1.
    pub fn new3(q: f64, p: f64, z: f64) -> Self {
        Point {
            q: vec![q],
            p: vec![p],
            z,
        }
    }

    /// Rebuilds a point from flat coordinates `(q.., p.., z)`. Panics if
    /// the slice length is not `2n + 1`.
    pub fn from_flat(n: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), 2 * n + 1, "flat point must have 2n+1 entries");
        Point {
            q: coords[0..n].to_vec(),
            p: coords[n..2 * n].to_vec(),
            z: coords[2 * n],
        }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.q.len() + 1
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Flat coordinate `i` in the order `(q.., p.., z)`.
    pub fn coord(&self, i: usize) -> f64 {
        let n = self.n();
        if i < n {
            self.q[i]
        } else if i < 2 * n {
            self.p[i - n]
        } else if i == 2 * n {
            self.z
        } else {
            panic!("coordinate index {i} out of range for dim {}", self.dim())
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.q);
        out.extend_from_slice(&self.p);
        out.push(self.z);
        out
    }

    /// Copy with flat coordinate `i` replaced; used by finite-difference
    /// probes.
    pub fn with_coord(&self, i: usize, value: f64) -> Self {
        let mut flat = self.flat();
        flat[i] = value;
        Point::from_flat(self.n(), &flat)
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.p.iter()).all(|v| v.is_finite()) && self.z.is_finite()
    }
}

/// Precision class of a [`ScalarField`]'s partial derivatives, so
/// monitors can tell exact gradients from finite-difference ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecisionClass {
    Exact,
    FiniteDifference,
}

/// Closure type for scalar values and partials: `(point, t) → value`.
pub type FieldFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

/// A time-dependent scalar observable on the one-jet bundle together
/// with its partial derivatives ∂/∂qⁱ, ∂/∂pᵢ, ∂/∂z, ∂/∂t.
///
/// Fields built from [`Expr`] carry exact symbolic partials; fields
/// produced by bracket composition carry finite-difference partials and
/// are flagged as such. The p-block of the gradient is the fiber
/// derivative.
#[derive(Clone)]
pub struct ScalarField {
    n: usize,
    precision: PrecisionClass,
    value: FieldFn,
    dq: Vec<FieldFn>,
    dp: Vec<FieldFn>,
    dz: FieldFn,
    dt: FieldFn,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.n)
            .field("precision", &self.precision)
            .finish_non_exhaustive()
    }
}

fn fill_slots(pt: &Point, t: f64) -> Vec<f64> {
    let mut slots = pt.flat();
    slots.push(t);
    slots
}

impl ScalarField {
    /// Builds a field from a parsed expression over the jet alphabet
    /// `q1..qn, p1..pn, z, t`. Parameter references are substituted from
    /// `params`; all partials are exact symbolic derivatives.
    pub fn from_expr(expr: &Expr, n: usize, params: &Bindings) -> Result<Self, StructureError> {
        if n == 0 {
            return Err(StructureError::EmptyConfiguration);
        }
        let substituted = expr.substitute_params(params)?;
        let alphabet = Alphabet::jet(n);
        for name in substituted.free_names() {
            if !alphabet.is_variable(&name) {
                return Err(StructureError::UnknownName { name, n });
            }
        }
        let slots: std::collections::BTreeMap<String, usize> = alphabet
            .variables()
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), i))
            .collect();

        let compile = |e: &Expr| -> FieldFn {
            let bound = e.bind(&slots).expect("free names checked above");
            Arc::new(move |pt: &Point, t: f64| bound.eval_slots(&fill_slots(pt, t)))
        };

        let value = compile(&substituted.simplify());
        let mut dq = Vec::with_capacity(n);
        let mut dp = Vec::with_capacity(n);
        for i in 1..=n {
            dq.push(compile(&substituted.diff(&format!("q{i}"))));
        }
        for i in 1..=n {
            dp.push(compile(&substituted.diff(&format!("p{i}"))));
        }
        let dz = compile(&substituted.diff("z"));
        let dt = compile(&substituted.diff("t"));

        Ok(ScalarField {
            n,
            precision: PrecisionClass::Exact,
            value,
            dq,
            dp,
            dz,
            dt,
        })
    }

    /// Convenience wrapper: parse `source`, then build the field.
    pub fn parse(source: &str, n: usize, params: &Bindings) -> Result<Self, crate::Error> {
        let alphabet =
            Alphabet::jet(n).with_parameters(params.iter().map(|(name, _)| name.to_string()));
        let expr = crate::expr::parse(source, &alphabet)?;
        Ok(Self::from_expr(&expr, n, params)?)
    }

    pub fn constant(c: f64, n: usize) -> Self {
        let zero: FieldFn = Arc::new(|_: &Point, _| 0.0);
        ScalarField {
            n,
            precision: PrecisionClass::Exact,
            value: Arc::new(move |_, _| c),
            dq: vec![zero.clone(); n],
            dp: vec![zero.clone(); n],
            dz: zero.clone(),
            dt: zero,
        }
    }

    /// The flat coordinate function z^i (exact unit gradient).
    pub fn coordinate(index: usize, n: usize) -> Self {
        assert!(index < 2 * n + 1, "coordinate index out of range");
        let zero: FieldFn = Arc::new(|_: &Point, _| 0.0);
        let one: FieldFn = Arc::new(|_: &Point, _| 1.0);
        let mut dq: Vec<FieldFn> = vec![zero.clone(); n];
        let mut dp: Vec<FieldFn> = vec![zero.clone(); n];
        let mut dz = zero.clone();
        if index < n {
            dq[index] = one;
        } else if index < 2 * n {
            dp[index - n] = one;
        } else {
            dz = one;
        }
        ScalarField {
            n,
            precision: PrecisionClass::Exact,
            value: Arc::new(move |pt, _| pt.coord(index)),
            dq,
            dp,
            dz,
            dt: zero,
        }
    }

    /// The entropy coordinate z as a field.
    pub fn z_coordinate(n: usize) -> Self {
        Self::coordinate(2 * n, n)
    }

    /// Assembles a field from explicit closures. The caller is
    /// responsible for the partials actually differentiating the value.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        precision: PrecisionClass,
        value: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        dq: Vec<FieldFn>,
        dp: Vec<FieldFn>,
        dz: FieldFn,
        dt: FieldFn,
    ) -> Self {
        assert_eq!(dq.len(), n);
        assert_eq!(dp.len(), n);
        ScalarField {
            n,
            precision,
            value: Arc::new(value),
            dq,
            dp,
            dz,
            dt,
        }
    }

    /// Field with partials derived by central finite differences of the
    /// value; flagged [`PrecisionClass::FiniteDifference`].
    pub fn from_value_fd(
        n: usize,
        value: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let value: FieldFn = Arc::new(value);
        let fd_coord = |i: usize| -> FieldFn {
            let value = value.clone();
            Arc::new(move |pt: &Point, t: f64| {
                let x = pt.coord(i);
                let h = fd_step(x);
                let fp = value(&pt.with_coord(i, x + h), t);
                let fm = value(&pt.with_coord(i, x - h), t);
                (fp - fm) / (2.0 * h)
            })
        };
        let dq: Vec<FieldFn> = (0..n).map(fd_coord).collect();
        let dp: Vec<FieldFn> = (n..2 * n).map(fd_coord).collect();
        let dz = fd_coord(2 * n);
        let dt: FieldFn = {
            let value = value.clone();
            Arc::new(move |pt: &Point, t: f64| {
                let h = fd_step(t);
                (value(pt, t + h) - value(pt, t - h)) / (2.0 * h)
            })
        };
        ScalarField {
            n,
            precision: PrecisionClass::FiniteDifference,
            value,
            dq,
            dp,
            dz,
            dt,
        }
    }

    /// Pointwise product f·g with product-rule partials (exact when both
    /// factors are exact).
    pub fn product(f: &ScalarField, g: &ScalarField) -> Self {
        assert_eq!(f.n, g.n, "fields live on different jet bundles");
        let n = f.n;
        let precision =
            if f.precision == PrecisionClass::Exact && g.precision == PrecisionClass::Exact {
                PrecisionClass::Exact
            } else {
                PrecisionClass::FiniteDifference
            };
        let fv = f.value.clone();
        let gv = g.value.clone();
        let value: FieldFn = Arc::new(move |pt, t| fv(pt, t) * gv(pt, t));
        let rule = |df: FieldFn, dg: FieldFn, fv: FieldFn, gv: FieldFn| -> FieldFn {
            Arc::new(move |pt: &Point, t: f64| df(pt, t) * gv(pt, t) + fv(pt, t) * dg(pt, t))
        };
        let dq = (0..n)
            .map(|i| {
                rule(
                    f.dq[i].clone(),
                    g.dq[i].clone(),
                    f.value.clone(),
                    g.value.clone(),
                )
            })
            .collect();
        let dp = (0..n)
            .map(|i| {
                rule(
                    f.dp[i].clone(),
                    g.dp[i].clone(),
                    f.value.clone(),
                    g.value.clone(),
                )
            })
            .collect();
        let dz = rule(f.dz.clone(), g.dz.clone(), f.value.clone(), g.value.clone());
        let dt = rule(f.dt.clone(), g.dt.clone(), f.value.clone(), g.value.clone());
        ScalarField {
            n,
            precision,
            value,
            dq,
            dp,
            dz,
            dt,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn precision(&self) -> PrecisionClass {
        self.precision
    }

    pub fn value(&self, pt: &Point, t: f64) -> f64 {
        (self.value)(pt, t)
    }

    pub fn dq(&self, i: usize, pt: &Point, t: f64) -> f64 {
        (self.dq[i])(pt, t)
    }

    pub fn dp(&self, i: usize, pt: &Point, t: f64) -> f64 {
        (self.dp[i])(pt, t)
    }

    pub fn dz(&self, pt: &Point, t: f64) -> f64 {
        (self.dz)(pt, t)
    }

    /// Explicit time derivative ∂/∂t.
    pub fn dt(&self, pt: &Point, t: f64) -> f64 {
        (self.dt)(pt, t)
    }

    /// Spatial gradient in flat order `(∂q.., ∂p.., ∂z)`, length 2n+1.
    pub fn gradient(&self, pt: &Point, t: f64) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.dim());
        for d in &self.dq {
            g.push(d(pt, t));
        }
        for d in &self.dp {
            g.push(d(pt, t));
        }
        g.push((self.dz)(pt, t));
        g
    }

    /// The fiber derivative: the p-block of the gradient.
    pub fn fiber_derivative(&self, pt: &Point, t: f64) -> Vec<f64> {
        self.dp.iter().map(|d| d(pt, t)).collect()
    }

    /// Partial along flat coordinate `i`.
    pub fn d_coord(&self, i: usize, pt: &Point, t: f64) -> f64 {
        let n = self.n;
        if i < n {
            self.dq(i, pt, t)
        } else if i < 2 * n {
            self.dp(i - n, pt, t)
        } else {
            self.dz(pt, t)
        }
    }
}

pub(crate) fn fd_step(x: f64) -> f64 {
    // cbrt(f64 epsilon), scaled by magnitude: near-optimal for central
    // differences.
    6.055454452393343e-6 * x.abs().max(1.0)
}
