//! Riemannian metrics on the configuration block.

use std::sync::Arc;

use crate::linalg;

use super::StructureError;

type MatrixFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Identity,
    Constant {
        lower: Vec<Vec<f64>>,
        inverse: Vec<Vec<f64>>,
    },
    Field(MatrixFn),
}

/// A metric g_{ij}(q) on the q-block, with access to the inverse
/// entries g^{ij}. The inverse pairs the fiber derivatives in the
/// dissipative bivector, so non-invertible input is rejected.
#[derive(Clone)]
pub struct MetricField {
    n: usize,
    kind: Kind,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            Kind::Identity => "identity",
            Kind::Constant { .. } => "constant",
            Kind::Field(_) => "field",
        };
        write!(f, "MetricField {{ n: {}, kind: {kind} }}", self.n)
    }
}

impl MetricField {
    /// The Euclidean metric, the default everywhere in this crate.
    pub fn identity(n: usize) -> Self {
        MetricField {
            n,
            kind: Kind::Identity,
        }
    }

    /// Constant metric from its lower-index entries g_{ij}. Checked for
    /// symmetry and positive definiteness at construction.
    pub fn from_constant(lower: Vec<Vec<f64>>) -> Result<Self, StructureError> {
        let n = lower.len();
        if n == 0 || lower.iter().any(|row| row.len() != n) {
            return Err(StructureError::DimensionMismatch(
                "metric matrix must be square and non-empty".into(),
            ));
        }
        if !linalg::is_symmetric(&lower, 1e-12) {
            return Err(StructureError::NotSpd("matrix is not symmetric".into()));
        }
        if !linalg::cholesky_ok(&lower) {
            return Err(StructureError::NotSpd(
                "matrix is not positive definite".into(),
            ));
        }
        let inverse = linalg::invert(&lower)
            .ok_or_else(|| StructureError::Singular("metric is numerically singular".into()))?;
        Ok(MetricField {
            n,
            kind: Kind::Constant { lower, inverse },
        })
    }

    /// Point-dependent metric g_{ij}(q). Validated lazily: SPD failures
    /// surface through [`MetricField::validate_spd_at`] or as solver
    /// errors at evaluation points.
    pub fn from_fn(
        n: usize,
        entries: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        MetricField {
            n,
            kind: Kind::Field(Arc::new(entries)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    /// Lower-index entries g_{ij} at `q`.
    pub fn entries(&self, q: &[f64]) -> Vec<Vec<f64>> {
        match &self.kind {
            Kind::Identity => linalg::identity(self.n),
            Kind::Constant { lower, .. } => lower.clone(),
            Kind::Field(f) => f(q),
        }
    }

    /// Inverse entries g^{ij} at `q`.
    pub fn inverse_entries(&self, q: &[f64]) -> Result<Vec<Vec<f64>>, StructureError> {
        match &self.kind {
            Kind::Identity => Ok(linalg::identity(self.n)),
            Kind::Constant { inverse, .. } => Ok(inverse.clone()),
            Kind::Field(f) => linalg::invert(&f(q))
                .ok_or_else(|| StructureError::Singular("metric singular at point".into())),
        }
    }

    /// Symmetry + positive definiteness check at a sample point.
    pub fn validate_spd_at(&self, q: &[f64]) -> Result<(), StructureError> {
        let g = self.entries(q);
        if !linalg::is_symmetric(&g, 1e-10) {
            return Err(StructureError::NotSpd(format!(
                "metric not symmetric at q = {q:?}"
            )));
        }
        if !linalg::cholesky_ok(&g) {
            return Err(StructureError::NotSpd(format!(
                "metric not positive definite at q = {q:?}"
            )));
        }
        Ok(())
    }

    /// The quadratic form g^{ij} a_i b_j of two covector blocks.
    pub fn inverse_pairing(&self, q: &[f64], a: &[f64], b: &[f64]) -> f64 {
        match &self.kind {
            Kind::Identity => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kind::Constant { inverse, .. } => pairing(inverse, a, b),
            Kind::Field(f) => match linalg::invert(&f(q)) {
                Some(inv) => pairing(&inv, a, b),
                None => f64::NAN,
            },
        }
    }

    /// The contraction (g^{-1} a)_k = g^{kj} a_j.
    pub fn inverse_apply(&self, q: &[f64], a: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Identity => a.to_vec(),
            Kind::Constant { inverse, .. } => apply(inverse, a),
            Kind::Field(f) => match linalg::invert(&f(q)) {
                Some(inv) => apply(&inv, a),
                None => vec![f64::NAN; a.len()],
            },
        }
    }
}

fn pairing(m: &[Vec<f64>], a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, row) in m.iter().enumerate() {
        if a[i] == 0.0 {
            continue;
        }
        for (j, entry) in row.iter().enumerate() {
            if *entry != 0.0 {
                sum += a[i] * entry * b[j];
            }
        }
    }
    sum
}

fn apply(m: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pairing_is_dot_product() {
        let g = MetricField::identity(2);
        assert_eq!(
            g.inverse_pairing(&[0.0, 0.0], &[1.0, 2.0], &[3.0, 4.0]),
            11.0
        );
    }

    #[test]
    fn constant_metric_inverse_round_trip() {
        let g = MetricField::from_constant(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let lower = g.entries(&[0.0, 0.0]);
        let inv = g.inverse_entries(&[0.0, 0.0]).unwrap();
        let prod = crate::linalg::mat_mul(&lower, &inv);
        for (i, row) in prod.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((entry - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        assert!(matches!(
            MetricField::from_constant(vec![vec![1.0, 0.3], vec![0.0, 1.0]]),
            Err(StructureError::NotSpd(_))
        ));
        assert!(matches!(
            MetricField::from_constant(vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
            Err(StructureError::NotSpd(_))
        ));
    }

    #[test]
    fn diagonal_metric_inverse_pairing() {
        let g = MetricField::from_constant(vec![vec![2.0]]).unwrap();
        // g^{11} = 1/2
        assert_eq!(g.inverse_pairing(&[0.0], &[1.0], &[1.0]), 0.5);
        assert_eq!(g.inverse_apply(&[0.0], &[3.0]), vec![1.5]);
    }

    #[test]
    fn field_metric_validates_per_point() {
        let g = MetricField::from_fn(1, |q| vec![vec![1.0 + q[0] * q[0]]]);
        assert!(g.validate_spd_at(&[2.0]).is_ok());
        let bad = MetricField::from_fn(1, |q| vec![vec![q[0]]]);
        assert!(bad.validate_spd_at(&[-1.0]).is_err());
    }
}
