//! Symmetric bivectors, metriplectic 4-brackets, and the
//! Kulkarni–Nomizu product that builds the latter from the former.

use std::sync::Arc;

use super::{MetricField, Point, ScalarField};

type BivectorFn = Arc<dyn Fn(&ScalarField, &ScalarField, &Point, f64) -> f64 + Send + Sync>;
type BracketFn = Arc<
    dyn Fn(&ScalarField, &ScalarField, &ScalarField, &ScalarField, &Point, f64) -> f64
        + Send
        + Sync,
>;

/// A symmetric bivector acting on the differentials of two observables.
#[derive(Clone)]
pub struct SymmetricBivector {
    apply: BivectorFn,
}

impl std::fmt::Debug for SymmetricBivector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymmetricBivector")
    }
}

impl SymmetricBivector {
    pub fn from_fn(
        apply: impl Fn(&ScalarField, &ScalarField, &Point, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SymmetricBivector {
            apply: Arc::new(apply),
        }
    }

    /// σ(df, dg) = g^{ij} ∂f/∂p_i ∂g/∂p_j — the inverse metric pairing
    /// of the fiber derivatives.
    pub fn fiber_metric(metric: &MetricField) -> Self {
        let metric = metric.clone();
        SymmetricBivector::from_fn(move |f, g, pt, t| {
            let df = f.fiber_derivative(pt, t);
            let dg = g.fiber_derivative(pt, t);
            metric.inverse_pairing(pt.q(), &df, &dg)
        })
    }

    /// μ(df, dg) = ∂f/∂z ∂g/∂z.
    pub fn z_product() -> Self {
        SymmetricBivector::from_fn(|f, g, pt, t| f.dz(pt, t) * g.dz(pt, t))
    }

    /// Euclidean dot product of the full spatial gradients; handy as a
    /// generic test bivector.
    pub fn gradient_dot() -> Self {
        SymmetricBivector::from_fn(|f, g, pt, t| {
            f.gradient(pt, t)
                .iter()
                .zip(g.gradient(pt, t).iter())
                .map(|(a, b)| a * b)
                .sum()
        })
    }

    pub fn apply(&self, f: &ScalarField, g: &ScalarField, pt: &Point, t: f64) -> f64 {
        (self.apply)(f, g, pt, t)
    }
}

/// A quadrilinear bracket (f, k; g, n) with curvature-tensor symmetries.
/// Brackets built by [`kn_product`] satisfy the antisymmetries, the
/// pair-exchange symmetry, the cyclic identity, and the Leibniz rule by
/// construction; arbitrary brackets can be wrapped with
/// [`FourBracket::from_fn`] and screened with [`symmetry_residuals`].
#[derive(Clone)]
pub struct FourBracket {
    apply: BracketFn,
}

impl std::fmt::Debug for FourBracket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FourBracket")
    }
}

impl FourBracket {
    pub fn from_fn(
        apply: impl Fn(&ScalarField, &ScalarField, &ScalarField, &ScalarField, &Point, f64) -> f64
            + Send
            + Sync
            + 'static,
    ) -> Self {
        FourBracket {
            apply: Arc::new(apply),
        }
    }

    pub fn apply(
        &self,
        f: &ScalarField,
        k: &ScalarField,
        g: &ScalarField,
        n: &ScalarField,
        pt: &Point,
        t: f64,
    ) -> f64 {
        (self.apply)(f, k, g, n, pt, t)
    }

    /// Index-tensor view R^{ijkl}(pt) obtained by evaluating the bracket
    /// on coordinate functions, whose gradients are exact unit vectors.
    pub fn index_tensor(&self, dim_n: usize, pt: &Point, t: f64) -> Vec<Vec<Vec<Vec<f64>>>> {
        let dim = 2 * dim_n + 1;
        let coords: Vec<ScalarField> = (0..dim)
            .map(|i| ScalarField::coordinate(i, dim_n))
            .collect();
        let mut r = vec![vec![vec![vec![0.0; dim]; dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        r[i][j][k][l] =
                            self.apply(&coords[i], &coords[j], &coords[k], &coords[l], pt, t);
                    }
                }
            }
        }
        r
    }
}

/// The Kulkarni–Nomizu product of two symmetric bivectors:
///
/// (σ ⊘ μ)(df, dk, dg, dn) = σ(df,dg) μ(dk,dn) − σ(df,dn) μ(dk,dg)
///                         + μ(df,dg) σ(dk,dn) − μ(df,dn) σ(dk,dg).
pub fn kn_product(sigma: &SymmetricBivector, mu: &SymmetricBivector) -> FourBracket {
    let sigma = sigma.clone();
    let mu = mu.clone();
    FourBracket::from_fn(move |f, k, g, n, pt, t| {
        sigma.apply(f, g, pt, t) * mu.apply(k, n, pt, t)
            - sigma.apply(f, n, pt, t) * mu.apply(k, g, pt, t)
            + mu.apply(f, g, pt, t) * sigma.apply(k, n, pt, t)
            - mu.apply(f, n, pt, t) * sigma.apply(k, g, pt, t)
    })
}

/// The one-jet-bundle 4-bracket: the K-N product of
/// σ(df,dg) = g^{ij} f_{p_i} g_{p_j} and μ(df,dg) = f_z g_z.
pub fn jet_bundle_bracket(metric: &MetricField) -> FourBracket {
    kn_product(
        &SymmetricBivector::fiber_metric(metric),
        &SymmetricBivector::z_product(),
    )
}

/// Absolute residuals of the bracket axioms at one evaluation site:
///
/// 1. first-pair antisymmetry  |(f,k;g,n) + (k,f;g,n)|
/// 2. second-pair antisymmetry |(f,k;g,n) + (f,k;n,g)|
/// 3. pair exchange            |(f,k;g,n) − (g,n;f,k)|
/// 4. cyclic identity          |(f,k;g,n) + (f,g;n,k) + (f,n;k,g)|
/// 5. Leibniz in slot 1 with the product observable f·g:
///    |(f·g,k;g,n) − f·(g,k;g,n) − (f,k;g,n)·g|
pub fn symmetry_residuals(
    bracket: &FourBracket,
    fields: &[ScalarField; 4],
    pt: &Point,
    t: f64,
) -> [f64; 5] {
    let [f, k, g, n] = fields;
    let base = bracket.apply(f, k, g, n, pt, t);
    let r1 = (base + bracket.apply(k, f, g, n, pt, t)).abs();
    let r2 = (base + bracket.apply(f, k, n, g, pt, t)).abs();
    let r3 = (base - bracket.apply(g, n, f, k, pt, t)).abs();
    let r4 = (base + bracket.apply(f, g, n, k, pt, t) + bracket.apply(f, n, k, g, pt, t)).abs();
    let fg = ScalarField::product(f, g);
    let r5 = (bracket.apply(&fg, k, g, n, pt, t)
        - f.value(pt, t) * bracket.apply(g, k, g, n, pt, t)
        - base * g.value(pt, t))
    .abs();
    [r1, r2, r3, r4, r5]
}
