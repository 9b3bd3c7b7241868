//! Poisson tensors in Darboux form and the bracket they induce.

use std::sync::Arc;

use super::{Point, ScalarField, StructureError};

type TensorFn = Arc<dyn Fn(&Point) -> Vec<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum Entries {
    Constant(Vec<Vec<f64>>),
    Field(TensorFn),
}

/// The antisymmetric bivector J^{ij} of a Poisson structure, realized as
/// a matrix of entries, constant or point-dependent. Dimension is
/// `2·n_pairs + n_casimirs`.
#[derive(Clone)]
pub struct PoissonTensor {
    dim: usize,
    casimir_count: usize,
    entries: Entries,
}

impl std::fmt::Debug for PoissonTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonTensor")
            .field("dim", &self.dim)
            .field("casimir_count", &self.casimir_count)
            .field("constant", &matches!(self.entries, Entries::Constant(_)))
            .finish()
    }
}

impl PoissonTensor {
    /// Wraps a point-dependent tensor. No Jacobi identity is implied;
    /// use [`jacobi_residual`] to test it.
    pub fn from_fn(
        dim: usize,
        casimir_count: usize,
        entries: impl Fn(&Point) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        PoissonTensor {
            dim,
            casimir_count,
            entries: Entries::Field(Arc::new(entries)),
        }
    }

    pub fn from_constant(matrix: Vec<Vec<f64>>, casimir_count: usize) -> Self {
        let dim = matrix.len();
        PoissonTensor {
            dim,
            casimir_count,
            entries: Entries::Constant(matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn casimir_count(&self) -> usize {
        self.casimir_count
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.entries, Entries::Constant(_))
    }

    pub fn matrix(&self, pt: &Point) -> Vec<Vec<f64>> {
        match &self.entries {
            Entries::Constant(m) => m.clone(),
            Entries::Field(f) => f(pt),
        }
    }

    /// Contraction J^{ij} v_j with a covector (gradient).
    pub fn apply(&self, gradient: &[f64], pt: &Point) -> Result<Vec<f64>, StructureError> {
        if gradient.len() != self.dim {
            return Err(StructureError::DimensionMismatch(format!(
                "gradient has {} entries, tensor dimension is {}",
                gradient.len(),
                self.dim
            )));
        }
        let m = self.matrix(pt);
        Ok(m.iter()
            .map(|row| row.iter().zip(gradient).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Max |J^{ij} + J^{ji}| over the matrix at `pt`.
    pub fn antisymmetry_residual(&self, pt: &Point) -> f64 {
        let m = self.matrix(pt);
        let mut worst = 0.0_f64;
        for (i, row) in m.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                worst = worst.max((entry + m[j][i]).abs());
            }
        }
        worst
    }
}

/// The Darboux block tensor
/// `[[0, I, 0], [-I, 0, 0], [0, 0, 0]]`
/// with `n_pairs` canonical pairs and `n_casimirs` null directions.
/// For the one-jet bundle call with `n_casimirs = 1` so z is the Casimir.
pub fn canonical_poisson(n_pairs: usize, n_casimirs: usize) -> PoissonTensor {
    assert!(n_pairs >= 1, "need at least one canonical pair");
    let dim = 2 * n_pairs + n_casimirs;
    let mut m = vec![vec![0.0; dim]; dim];
    for i in 0..n_pairs {
        m[i][n_pairs + i] = 1.0;
        m[n_pairs + i][i] = -1.0;
    }
    PoissonTensor::from_constant(m, n_casimirs)
}

/// Max over (i,j,k) of the cyclic Jacobi sum
/// |Σ_l J^{il} ∂_l J^{jk} + J^{jl} ∂_l J^{ki} + J^{kl} ∂_l J^{ij}|
/// at `pt`. Exactly zero for constant tensors; entry derivatives of
/// point-dependent tensors are taken by central differences (h = 1e-5).
#[allow(clippy::needless_range_loop)] // four-index kernel
pub fn jacobi_residual(tensor: &PoissonTensor, pt: &Point) -> f64 {
    if tensor.is_constant() {
        return 0.0;
    }
    let dim = tensor.dim;
    assert_eq!(pt.dim(), dim, "probe point dimension must match the tensor");
    let m = tensor.matrix(pt);
    // d[l][j][k] = ∂_l J^{jk}
    let h = 1e-5;
    let mut d = vec![vec![vec![0.0; dim]; dim]; dim];
    for l in 0..dim {
        let x = pt.coord(l);
        let plus = tensor.matrix(&pt.with_coord(l, x + h));
        let minus = tensor.matrix(&pt.with_coord(l, x - h));
        for j in 0..dim {
            for k in 0..dim {
                d[l][j][k] = (plus[j][k] - minus[j][k]) / (2.0 * h);
            }
        }
    }
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let mut sum = 0.0;
                for l in 0..dim {
                    sum += m[i][l] * d[l][j][k] + m[j][l] * d[l][k][i] + m[k][l] * d[l][i][j];
                }
                worst = worst.max(sum.abs());
            }
        }
    }
    worst
}

/// The Poisson bracket {f, g} = J^{ij} ∂f/∂zⁱ ∂g/∂zʲ as a scalar field.
/// The returned field's own partials are finite-difference derived and
/// flagged approximate.
pub fn poisson_bracket(
    tensor: &PoissonTensor,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<ScalarField, StructureError> {
    if tensor.dim != f.dim() || tensor.dim != g.dim() {
        return Err(StructureError::DimensionMismatch(format!(
            "tensor dim {} vs fields of dim {} and {}",
            tensor.dim,
            f.dim(),
            g.dim()
        )));
    }
    let n = f.n();
    let tensor = tensor.clone();
    let f = f.clone();
    let g = g.clone();
    Ok(ScalarField::from_value_fd(n, move |pt, t| {
        bracket_value(&tensor, &f, &g, pt, t)
    }))
}

pub(crate) fn bracket_value(
    tensor: &PoissonTensor,
    f: &ScalarField,
    g: &ScalarField,
    pt: &Point,
    t: f64,
) -> f64 {
    let m = tensor.matrix(pt);
    let gf = f.gradient(pt, t);
    let gg = g.gradient(pt, t);
    let mut sum = 0.0;
    for (i, row) in m.iter().enumerate() {
        if gf[i] == 0.0 {
            continue;
        }
        for (j, entry) in row.iter().enumerate() {
            if *entry != 0.0 {
                sum += gf[i] * entry * gg[j];
            }
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Alphabet, Bindings};

    fn field(src: &str, n: usize) -> ScalarField {
        let a = Alphabet::jet(n);
        ScalarField::from_expr(&parse(src, &a).unwrap(), n, &Bindings::new()).unwrap()
    }

    #[test]
    fn canonical_3x3_matches_block_form() {
        let j = canonical_poisson(1, 1);
        let pt = Point::new3(0.3, -0.4, 2.0);
        assert_eq!(
            j.matrix(&pt),
            vec![
                vec![0.0, 1.0, 0.0],
                vec![-1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0]
            ]
        );
        assert_eq!(j.antisymmetry_residual(&pt), 0.0);
    }

    #[test]
    fn canonical_4x4_has_identity_blocks() {
        let j = canonical_poisson(2, 0);
        let pt = Point::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.0).unwrap();
        let m = j.matrix(&pt);
        assert_eq!(m.len(), 4);
        assert_eq!(m[0], vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(m[1], vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m[2], vec![-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(m[3], vec![0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn canonical_rotation_of_gradient() {
        let j = canonical_poisson(1, 0);
        let pt = Point::new3(0.0, 0.0, 0.0); // point is ignored by constant tensors
        let out = j.apply(&[2.0, 5.0], &pt).unwrap();
        assert_eq!(out, vec![5.0, -2.0]);
    }

    #[test]
    fn jacobi_zero_for_constant_tensors() {
        let pt = Point::new3(1.0, 2.0, 3.0);
        assert_eq!(jacobi_residual(&canonical_poisson(1, 1), &pt), 0.0);
        assert_eq!(jacobi_residual(&canonical_poisson(2, 0), &pt), 0.0);
    }

    #[test]
    fn jacobi_flags_non_poisson_tensor() {
        // Two canonical pairs plus a Casimir direction, with the extra
        // entry J^{12} = q1 (J^{21} = -q1) spoiling the Jacobi identity.
        // The cyclic sum at (i,j,k) = (3,1,2) picks up J^{31} ∂_1 J^{12}
        // = -1 and nothing else, so the residual is exactly 1 up to the
        // finite-difference rounding of a linear entry. A rank-2
        // perturbation of a single pair would NOT do: bivectors of rank
        // two satisfy Jacobi identically.
        let j = PoissonTensor::from_fn(5, 1, |pt| {
            let q1 = pt.coord(0);
            vec![
                vec![0.0, q1, 1.0, 0.0, 0.0],
                vec![-q1, 0.0, 0.0, 1.0, 0.0],
                vec![-1.0, 0.0, 0.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 0.0],
            ]
        });
        let probe = Point::from_flat(2, &[0.7, -0.3, 0.4, 0.9, 0.1]);
        let res = jacobi_residual(&j, &probe);
        assert!((res - 1.0).abs() < 1e-9, "residual = {res}");
    }

    #[test]
    fn bracket_of_canonical_pair_is_one() {
        let j = canonical_poisson(1, 1);
        let q = field("q1", 1);
        let p = field("p1", 1);
        let br = poisson_bracket(&j, &q, &p).unwrap();
        let pt = Point::new3(0.2, -1.7, 3.0);
        assert_eq!(br.value(&pt, 0.0), 1.0);
    }

    #[test]
    fn z_is_casimir_of_jet_tensor() {
        let j = canonical_poisson(1, 1);
        let z = ScalarField::z_coordinate(1);
        let f = field("sin(q1)*p1 + q1^3 + z^2", 1);
        let br = poisson_bracket(&j, &f, &z).unwrap();
        for (qv, pv, zv) in [(0.1, 0.2, 0.3), (-1.0, 2.0, -0.5), (3.0, -0.2, 1.4)] {
            let pt = Point::new3(qv, pv, zv);
            assert_eq!(br.value(&pt, 0.0), 0.0);
        }
    }

    #[test]
    fn bracket_with_quadratic_hamiltonian() {
        let j = canonical_poisson(1, 1);
        let q = field("q1", 1);
        let h = field("p1^2/2", 1);
        let br = poisson_bracket(&j, &q, &h).unwrap();
        let pt = Point::new3(0.0, 1.0, 0.0);
        assert_eq!(br.value(&pt, 0.0), 1.0);
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let j = canonical_poisson(2, 1);
        let f = field("q1", 1);
        let g = field("p1", 1);
        assert!(matches!(
            poisson_bracket(&j, &f, &g),
            Err(StructureError::DimensionMismatch(_))
        ));
    }
}
