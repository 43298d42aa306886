use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratmat::{serde_rational_vec, RatMatrix, Rational, SymMatrix};

/// The semidefinite system `A_i • X = b_i (i = 1..m), X ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpSystem {
    n: usize,
    matrices: Vec<SymMatrix>,
    #[serde(with = "serde_rational_vec")]
    rhs: Vec<Rational>,
}

impl SdpSystem {
    /// An empty equation list is accepted and means "X ⪰ 0" alone.
    pub fn new(n: usize, matrices: Vec<SymMatrix>, rhs: Vec<Rational>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSystem("matrix order must be positive".into()));
        }
        if matrices.len() != rhs.len() {
            return Err(Error::InvalidSystem(format!(
                "{} matrices but {} right-hand sides",
                matrices.len(),
                rhs.len()
            )));
        }
        if let Some(i) = matrices.iter().position(|a| a.order() != n) {
            return Err(Error::InvalidSystem(format!(
                "matrix {} has order {}, expected {n}",
                i + 1,
                matrices[i].order()
            )));
        }
        Ok(Self { n, matrices, rhs })
    }

    /// Integer literal constructor for tests and examples.
    pub fn from_i64(matrices: &[&[&[i64]]], rhs: &[i64]) -> Self {
        let n = matrices.first().map_or(1, |m| m.len());
        Self::new(
            n,
            matrices.iter().map(|m| SymMatrix::from_i64(m)).collect(),
            rhs.iter().map(|&b| crate::ratmat::int(b)).collect(),
        )
        .expect("valid literal system")
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn equations(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &SymMatrix {
        &self.matrices[i]
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    /// `(Σ y_i A_i, Σ y_i b_i)`.
    pub fn combine(&self, y: &[Rational]) -> (SymMatrix, Rational) {
        assert_eq!(y.len(), self.equations(), "multiplier length");
        let matrix = SymMatrix::combination(self.n, y, &self.matrices);
        let rhs = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        (matrix, rhs)
    }

    /// Exact residuals `A_i • X - b_i`.
    pub fn residuals(&self, x: &SymMatrix) -> Vec<Rational> {
        self.matrices
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| a.dot(x) - b)
            .collect()
    }

    pub fn is_solution(&self, x: &SymMatrix) -> bool {
        x.order() == self.n
            && self.residuals(x).iter().all(num_traits::Zero::is_zero)
            && crate::ratmat::is_psd(x)
    }

    /// The system `A'_i = Vᵀ(Σ_j T_ij A_j)V`, `b' = T b`.
    pub fn transform(&self, t: &RatMatrix, v: &RatMatrix) -> Result<Self> {
        let m = self.equations();
        if t.rows() != m || t.cols() != m {
            return Err(Error::DimensionMismatch(format!("T must be {m}x{m}")));
        }
        if v.rows() != self.n || v.cols() != self.n {
            return Err(Error::DimensionMismatch(format!("V must be {0}x{0}", self.n)));
        }
        let matrices = (0..m)
            .map(|i| {
                let combo = SymMatrix::combination(self.n, t.row(i), &self.matrices);
                crate::ratmat::congruence_unchecked(&combo, v)
            })
            .collect();
        let rhs = t.mul_vec(&self.rhs)?;
        Self::new(self.n, matrices, rhs)
    }

    pub(crate) fn set_equation(&mut self, i: usize, matrix: SymMatrix, rhs: Rational) {
        self.matrices[i] = matrix;
        self.rhs[i] = rhs;
    }

    pub(crate) fn swap_equations(&mut self, a: usize, b: usize) {
        self.matrices.swap(a, b);
        self.rhs.swap(a, b);
    }

    pub(crate) fn rotate_all(&mut self, v: &RatMatrix) {
        for a in &mut self.matrices {
            *a = crate::ratmat::congruence_unchecked(a, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    #[test]
    fn rejects_inconsistent_shapes() {
        assert!(SdpSystem::new(0, vec![], vec![]).is_err());
        assert!(SdpSystem::new(2, vec![SymMatrix::identity(2)], vec![]).is_err());
        assert!(SdpSystem::new(2, vec![SymMatrix::identity(3)], vec![int(1)]).is_err());
        assert!(SdpSystem::new(2, vec![], vec![]).is_ok());
    }

    #[test]
    fn transform_by_identity_is_noop() {
        let s = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]], &[&[0, 1], &[1, 0]]], &[0, -1]);
        let t = s.transform(&RatMatrix::identity(2), &RatMatrix::identity(2)).unwrap();
        assert_eq!(t, s);
    }
}
