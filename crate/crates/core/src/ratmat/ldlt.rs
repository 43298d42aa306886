use num_traits::{One, Signed, Zero};

use super::elim::{determinant, inverse};
use super::matrix::{RatMatrix, SymMatrix};
use super::rational::Rational;
use crate::error::{Error, Result};

/// `Pᵀ A P = L D Lᵀ` with `(Pᵀ A P)[i][j] = A[perm[i]][perm[j]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdltFactorization {
    pub perm: Vec<usize>,
    pub unit_lower: RatMatrix,
    pub diagonal: Vec<Rational>,
}

impl LdltFactorization {
    pub fn permutation_matrix(&self) -> RatMatrix {
        let n = self.perm.len();
        let mut p = RatMatrix::zeros(n, n);
        for (i, &src) in self.perm.iter().enumerate() {
            p[(src, i)] = Rational::one();
        }
        p
    }

    pub fn rank(&self) -> usize {
        self.diagonal.iter().filter(|d| !d.is_zero()).count()
    }

    /// `P L D Lᵀ Pᵀ`, which must equal the factored matrix.
    pub fn reconstruct(&self) -> RatMatrix {
        let p = self.permutation_matrix();
        let d = RatMatrix::diagonal(&self.diagonal);
        let pl = p.mul(&self.unit_lower).expect("square");
        pl.mul(&d)
            .and_then(|m| m.mul(&pl.transpose()))
            .expect("square")
    }
}

/// Exact LDLᵀ on the positive semidefinite path.
///
/// Pivots on the first positive diagonal entry of the remaining Schur
/// complement. A negative diagonal entry, or an all-zero diagonal with a
/// nonzero off-diagonal entry, proves the input is not psd.
pub fn ldlt(a: &SymMatrix) -> Result<LdltFactorization> {
    let n = a.order();
    let mut work = a.as_matrix().clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut lower = RatMatrix::identity(n);
    let mut diagonal = vec![Rational::zero(); n];

    for k in 0..n {
        if let Some(j) = (k..n).find(|&j| work[(j, j)].is_negative()) {
            return Err(Error::IndefinitePivot { index: perm[j] });
        }
        let Some(p) = (k..n).find(|&j| work[(j, j)].is_positive()) else {
            for i in k..n {
                for j in k..n {
                    if !work[(i, j)].is_zero() {
                        return Err(Error::IndefinitePivot { index: perm[i] });
                    }
                }
            }
            break;
        };
        if p != k {
            swap_symmetric(&mut work, k, p);
            perm.swap(k, p);
            for c in 0..k {
                let tmp = lower[(k, c)].clone();
                lower[(k, c)] = lower[(p, c)].clone();
                lower[(p, c)] = tmp;
            }
        }
        let pivot = work[(k, k)].clone();
        let column: Vec<Rational> = (k + 1..n).map(|i| &work[(i, k)] / &pivot).collect();
        for (offset, l) in column.iter().enumerate() {
            lower[(k + 1 + offset, k)] = l.clone();
        }
        for (oi, li) in column.iter().enumerate() {
            if li.is_zero() {
                continue;
            }
            let i = k + 1 + oi;
            for j in k + 1..n {
                let delta = li * &work[(k, j)];
                if !delta.is_zero() {
                    work[(i, j)] -= delta;
                }
            }
        }
        diagonal[k] = pivot;
    }

    Ok(LdltFactorization {
        perm,
        unit_lower: lower,
        diagonal,
    })
}

fn swap_symmetric(m: &mut RatMatrix, a: usize, b: usize) {
    m.swap_rows(a, b);
    let n = m.rows();
    for i in 0..n {
        let tmp = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = tmp;
    }
}

pub fn is_psd(a: &SymMatrix) -> bool {
    ldlt(a).is_ok()
}

/// Positive definite: psd with full rank.
pub fn is_pd(a: &SymMatrix) -> bool {
    ldlt(a).is_ok_and(|f| f.rank() == a.order())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// Sylvester inertia of any symmetric matrix, by exact congruence
/// diagonalization. A zero diagonal with a nonzero entry `a_kj` is repaired by
/// adding row/column `j` to row/column `k`, which makes the pivot nonzero.
pub fn inertia(a: &SymMatrix) -> Inertia {
    let n = a.order();
    let mut work = a.as_matrix().clone();
    let mut result = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for k in 0..n {
        if work[(k, k)].is_zero() {
            if let Some(p) = (k + 1..n).find(|&j| !work[(j, j)].is_zero()) {
                swap_symmetric(&mut work, k, p);
            } else if let Some(j) = (k + 1..n).find(|&j| !work[(k, j)].is_zero()) {
                // e_k ← e_k + e_j; the new pivot is 2 a_kj since a_jj = 0.
                for c in 0..n {
                    let v = work[(j, c)].clone();
                    work[(k, c)] += v;
                }
                for r in 0..n {
                    let v = work[(r, j)].clone();
                    work[(r, k)] += v;
                }
            }
        }
        let pivot = work[(k, k)].clone();
        if pivot.is_zero() {
            result.zero += 1;
            continue;
        }
        if pivot.is_positive() {
            result.positive += 1;
        } else {
            result.negative += 1;
        }
        for i in k + 1..n {
            let f = &work[(i, k)] / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in k..n {
                let delta = &f * &work[(k, j)];
                work[(i, j)] -= delta;
            }
        }
        for j in k + 1..n {
            work[(k, j)] = Rational::zero();
        }
    }
    result
}

/// `Vᵀ A V` for an invertible `V`.
pub fn congruence(a: &SymMatrix, v: &RatMatrix) -> Result<SymMatrix> {
    if !v.is_square() || v.rows() != a.order() {
        return Err(Error::DimensionMismatch(format!(
            "rotation must be {0}x{0}, got {1}x{2}",
            a.order(),
            v.rows(),
            v.cols()
        )));
    }
    if determinant(v)?.is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(congruence_unchecked(a, v))
}

/// `Vᵀ A V` without the invertibility check; callers that validated `V` once
/// use this for every matrix of a system.
pub fn congruence_unchecked(a: &SymMatrix, v: &RatMatrix) -> SymMatrix {
    let av = a.as_matrix().mul(v).expect("checked dimensions");
    let out = v.transpose().mul(&av).expect("checked dimensions");
    SymMatrix::new(out).expect("congruence preserves symmetry")
}

/// Result of diagonalizing a psd matrix by congruence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDiagonalization {
    /// Invertible `Q` with `Qᵀ W Q = diag(d_1, …, d_rank, 0, …, 0)`.
    pub q: RatMatrix,
    pub rank: usize,
    /// The positive entries `d_1, …, d_rank`.
    pub diagonal: Vec<Rational>,
}

/// Exact congruence of a psd matrix to `diag(d_1..d_r, 0..0)` with all `d_j > 0`.
///
/// From `Pᵀ W P = L D Lᵀ` we take `Q = P L⁻ᵀ`; positive pivots are always
/// taken first, so the zero pivots trail.
pub fn psd_block_diagonalize(w: &SymMatrix) -> Result<BlockDiagonalization> {
    let f = ldlt(w).map_err(|_| Error::NotPsd)?;
    let rank = f.rank();
    let linv = inverse(&f.unit_lower)?;
    let q = f.permutation_matrix().mul(&linv.transpose())?;
    Ok(BlockDiagonalization {
        q,
        rank,
        diagonal: f.diagonal[..rank].to_vec(),
    })
}
