//! Coordinate contact 1-forms and the Reeb field they determine.

use std::sync::Arc;

use crate::linalg;

use super::{fd_step, Point, StructureError};

type CoeffFn = Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&Point) -> Vec<Vec<f64>> + Send + Sync>;

/// A coordinate 1-form α = a_i(x) dxⁱ on ℝ^(2n+1). The canonical
/// constructor yields α = dz − Σ pᵢ dqⁱ. Nondegeneracy (the contact
/// condition α ∧ (dα)ⁿ ≠ 0) is checked as solvability of the Reeb
/// linear system.
#[derive(Clone)]
pub struct ContactForm {
    n: usize,
    coefficients: CoeffFn,
    /// jacobian[i][j] = ∂a_j / ∂xⁱ when known exactly; otherwise the
    /// Reeb solver falls back to central differences.
    jacobian: Option<JacobianFn>,
}

impl std::fmt::Debug for ContactForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ContactForm {{ n: {} }}", self.n)
    }
}

impl ContactForm {
    /// α = dz − Σ pᵢ dqⁱ, with its exact coefficient Jacobian.
    pub fn canonical(n: usize) -> Self {
        let coefficients: CoeffFn = Arc::new(move |pt: &Point| {
            let mut a = vec![0.0; 2 * n + 1];
            for (ai, pi) in a.iter_mut().zip(pt.p()) {
                *ai = -pi;
            }
            a[2 * n] = 1.0;
            a
        });
        let jacobian: JacobianFn = Arc::new(move |_pt: &Point| {
            let dim = 2 * n + 1;
            let mut jac = vec![vec![0.0; dim]; dim];
            // ∂a_{q_i}/∂p_i = -1, everything else constant.
            for i in 0..n {
                jac[n + i][i] = -1.0;
            }
            jac
        });
        ContactForm {
            n,
            coefficients,
            jacobian: Some(jacobian),
        }
    }

    /// Arbitrary coordinate 1-form from its coefficient functions.
    pub fn from_fn(
        n: usize,
        coefficients: impl Fn(&Point) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ContactForm {
            n,
            coefficients: Arc::new(coefficients),
            jacobian: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coefficients(&self, pt: &Point) -> Vec<f64> {
        (self.coefficients)(pt)
    }

    /// α(v) at `pt`.
    pub fn pair(&self, pt: &Point, v: &[f64]) -> f64 {
        self.coefficients(pt)
            .iter()
            .zip(v)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// The exterior derivative entries dα_{ij} = ∂ᵢ a_j − ∂ⱼ a_i at `pt`.
    pub fn d_alpha(&self, pt: &Point) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let jac = match &self.jacobian {
            Some(j) => j(pt),
            None => {
                let mut jac = vec![vec![0.0; dim]; dim];
                for (i, row) in jac.iter_mut().enumerate() {
                    let x = pt.coord(i);
                    let h = fd_step(x);
                    let plus = self.coefficients(&pt.with_coord(i, x + h));
                    let minus = self.coefficients(&pt.with_coord(i, x - h));
                    for ((r, p), m) in row.iter_mut().zip(&plus).zip(&minus) {
                        *r = (p - m) / (2.0 * h);
                    }
                }
                jac
            }
        };
        let mut d = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                d[i][j] = jac[i][j] - jac[j][i];
            }
        }
        d
    }
}

/// Solves the defining system of the Reeb field at `pt`:
/// R ⌟ α = 1 and R ⌟ dα = 0. For the canonical form the answer is the
/// unit z-vector (exactly, by the structure of the elimination).
///
/// The stacked system has 2n+2 equations for 2n+1 unknowns and is
/// consistent precisely when α is contact at `pt`; it is solved through
/// its normal equations, and a singular normal matrix is reported as a
/// degeneracy of the form.
pub fn reeb_field(alpha: &ContactForm, pt: &Point) -> Result<Vec<f64>, StructureError> {
    let dim = alpha.dim();
    if pt.dim() != dim {
        return Err(StructureError::DimensionMismatch(format!(
            "point dim {} vs form dim {}",
            pt.dim(),
            dim
        )));
    }
    let d = alpha.d_alpha(pt);
    let a = alpha.coefficients(pt);

    // Rows: (R ⌟ dα)_j = Σ_i Rⁱ dα_{ij} = 0 for each j, then α(R) = 1.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut rhs: Vec<f64> = Vec::with_capacity(dim + 1);
    for j in 0..dim {
        rows.push(d.iter().map(|row| row[j]).collect());
        rhs.push(0.0);
    }
    rows.push(a.clone());
    rhs.push(1.0);

    // Normal equations.
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for (row, b) in rows.iter().zip(rhs.iter()) {
        for i in 0..dim {
            if row[i] == 0.0 {
                continue;
            }
            for j in 0..dim {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * b;
        }
    }
    let solution = linalg::solve(ata, atb).ok_or(StructureError::DegenerateContactForm)?;

    // Consistency: the solution must actually satisfy the stacked
    // (overdetermined) system, otherwise α is not contact here.
    for (row, b) in rows.iter().zip(rhs.iter()) {
        let lhs: f64 = row.iter().zip(&solution).map(|(r, x)| r * x).sum();
        if (lhs - b).abs() > 1e-8 {
            return Err(StructureError::DegenerateContactForm);
        }
    }
    Ok(solution)
}
