//! Gaussian elimination over the rationals and the fraction-free integer variant.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::RatMatrix;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Reduced row echelon form together with the pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(p, r);
        let inv = a[(r, c)].recip();
        for j in c..cols {
            let v = &a[(r, j)] * &inv;
            a[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let factor = a[(i, c)].clone();
            for j in c..cols {
                let delta = &factor * &a[(r, j)];
                if !delta.is_zero() {
                    a[(i, j)] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Integer matrix obtained by clearing the denominators of each row, with the
/// per-row scale factors.
fn integer_rows(m: &RatMatrix) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut rows = Vec::with_capacity(m.rows());
    let mut scales = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let lcm = m
            .row(i)
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        rows.push(
            m.row(i)
                .iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect::<Vec<_>>(),
        );
        scales.push(lcm);
    }
    (rows, scales)
}

/// Fraction-free (Bareiss) forward elimination. Returns the rank, the sign of
/// the row permutation and the last pivot, which equals the determinant of the
/// integer matrix when it is square and nonsingular.
fn bareiss(mut a: Vec<Vec<BigInt>>, cols: usize) -> (usize, bool, BigInt) {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut flipped = false;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            flipped = !flipped;
        }
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let num = &a[rank][c] * &a[i][j] - &a[i][c] * &a[rank][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                a[i][j] = num / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    (rank, flipped, prev)
}

/// Exact rank via fraction-free elimination.
pub fn rank(m: &RatMatrix) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let (rows, _) = integer_rows(m);
    bareiss(rows, m.cols()).0
}

pub fn determinant(m: &RatMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Rational::one());
    }
    let (rows, scales) = integer_rows(m);
    let (rank, flipped, last) = bareiss(rows, n);
    if rank < n {
        return Ok(Rational::zero());
    }
    let scale = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
    let det = Rational::new(last, scale);
    Ok(if flipped { -det } else { det })
}

pub fn inverse(m: &RatMatrix) -> Result<RatMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let augmented = RatMatrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m[(i, j)].clone()
        } else if j - n == i {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let (reduced, pivots) = rref(&augmented);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::SingularMatrix);
    }
    Ok(reduced.block(0, n, n, n))
}

/// Basis of `{x : m x = 0}`, one vector per free column of the echelon form.
pub fn nullspace(m: &RatMatrix) -> Vec<Vec<Rational>> {
    let (reduced, pivots) = rref(m);
    let cols = m.cols();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -reduced[(row, free)].clone();
        }
        basis.push(v);
    }
    basis
}

/// Some solution of `m x = rhs`, or `None` when the system is inconsistent.
pub fn solve_any(m: &RatMatrix, rhs: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(m.rows(), rhs.len(), "right-hand side length");
    let cols = m.cols();
    let augmented = RatMatrix::from_fn(m.rows(), cols + 1, |i, j| {
        if j < cols {
            m[(i, j)].clone()
        } else {
            rhs[i].clone()
        }
    });
    let (reduced, pivots) = rref(&augmented);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = reduced[(row, cols)].clone();
    }
    Some(x)
}

/// Exact orthogonal projection of `v` onto `{u : aᵀu = c}` for every `(a, c)`.
///
/// Redundant consistent rows are dropped; inconsistent rows are an error.
pub fn project_affine(v: &[Rational], constraints: &[(Vec<Rational>, Rational)]) -> Result<Vec<Rational>> {
    let d = v.len();
    if constraints.is_empty() {
        return Ok(v.to_vec());
    }
    if constraints.iter().any(|(a, _)| a.len() != d) {
        return Err(Error::DimensionMismatch("constraint length differs from vector".into()));
    }
    let augmented = RatMatrix::from_fn(constraints.len(), d + 1, |i, j| {
        if j < d {
            constraints[i].0[j].clone()
        } else {
            constraints[i].1.clone()
        }
    });
    let (reduced, pivots) = rref(&augmented);
    if pivots.last() == Some(&d) {
        return Err(Error::InfeasibleProjection);
    }
    let k = pivots.len();
    if k == 0 {
        return Ok(v.to_vec());
    }
    let a = reduced.block(0, 0, k, d);
    let c: Vec<Rational> = (0..k).map(|i| reduced[(i, d)].clone()).collect();
    let residual: Vec<Rational> = a
        .mul_vec(v)?
        .into_iter()
        .zip(&c)
        .map(|(av, ci)| av - ci)
        .collect();
    if residual.iter().all(Zero::is_zero) {
        return Ok(v.to_vec());
    }
    let gram = a.mul(&a.transpose())?;
    let w = solve_any(&gram, &residual).ok_or(Error::SingularMatrix)?;
    let correction = a.transpose().mul_vec(&w)?;
    Ok(v.iter().zip(correction).map(|(vi, ci)| vi - ci).collect())
}

pub fn max_abs(values: &[Rational]) -> Rational {
    values.iter().map(Signed::abs).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::rational::{frac, int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    /// Cofactor expansion, independent of elimination.
    fn minor_det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 0 {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for j in 0..n {
            let sub: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &m[0][j] * minor_det(&sub);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// Largest k with a nonzero k×k minor.
    fn rank_by_minors(m: &RatMatrix) -> usize {
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut with: Vec<Vec<usize>> = subsets(n - 1, k - 1);
            for s in &mut with {
                s.push(n - 1);
            }
            with.extend(subsets(n - 1, k));
            with
        }
        let top = m.rows().min(m.cols());
        for k in (1..=top).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<Rational>> =
                        rs.iter().map(|&i| cs.iter().map(|&j| m[(i, j)].clone()).collect()).collect();
                    if !minor_det(&sub).is_zero() {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RatMatrix::zeros(4, 4)), 0);
        assert_eq!(rank(&RatMatrix::diagonal(&ints(&[0, 0, 1, 1]))), 2);
    }

    #[test]
    fn rank_of_dependent_rows_matches_minors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r: Vec<Rational> = (0..3).map(|_| frac(rng.random_range(-9..=9), rng.random_range(1..=4))).collect();
            let m = RatMatrix::from_rows(vec![
                r.clone(),
                r.clone(),
                r.iter().map(|v| v * int(2)).collect(),
            ])
            .unwrap();
            let expected = rank_by_minors(&m);
            assert_eq!(rank(&m), expected);
            assert_eq!(expected, usize::from(r.iter().any(|v| !v.is_zero())));
        }
    }

    #[test]
    fn determinant_matches_cofactors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=4 {
            for _ in 0..10 {
                let m = RatMatrix::from_fn(n, n, |_, _| frac(rng.random_range(-3..=3), rng.random_range(1..=3)));
                assert_eq!(determinant(&m).unwrap(), minor_det(&m.to_rows()));
                assert_eq!(rank(&m), rank_by_minors(&m));
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = RatMatrix::from_i64(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RatMatrix::identity(3));
        assert_eq!(inverse(&RatMatrix::from_i64(&[&[1, 2], &[2, 4]])), Err(Error::SingularMatrix));
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let m = RatMatrix::from_i64(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let basis = nullspace(&m);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn projection_examples() {
        let p = project_affine(&ints(&[1, 1]), &[(ints(&[1, 1]), int(0))]).unwrap();
        assert_eq!(p, ints(&[0, 0]));
        let p = project_affine(&ints(&[1, 0]), &[(ints(&[0, 1]), int(0))]).unwrap();
        assert_eq!(p, ints(&[1, 0]));
        let p = project_affine(&ints(&[2, 1, 1]), &[(ints(&[1, -1, 0]), int(0))]).unwrap();
        assert_eq!(p, vec![frac(3, 2), frac(3, 2), int(1)]);
    }

    #[test]
    fn projection_handles_redundant_and_inconsistent_rows() {
        let rows = [(ints(&[1, 1]), int(1)), (ints(&[2, 2]), int(2))];
        let p = project_affine(&ints(&[0, 0]), &rows).unwrap();
        assert_eq!(p, vec![frac(1, 2), frac(1, 2)]);
        let bad = [(ints(&[1, 1]), int(1)), (ints(&[2, 2]), int(3))];
        assert_eq!(project_affine(&ints(&[0, 0]), &bad), Err(Error::InfeasibleProjection));
    }

    proptest::proptest! {
        #[test]
        fn projection_is_feasible_and_orthogonal(
            v in proptest::collection::vec(-20i64..20, 4),
            a in proptest::collection::vec(-5i64..5, 4),
            c in -10i64..10,
        ) {
            proptest::prop_assume!(a.iter().any(|&x| x != 0));
            let v = ints(&v);
            let a = ints(&a);
            let p = project_affine(&v, &[(a.clone(), int(c))]).unwrap();
            let ap: Rational = a.iter().zip(&p).map(|(x, y)| x * y).sum();
            proptest::prop_assert_eq!(ap, int(c));
            // v - p is parallel to a
            let diff: Vec<Rational> = v.iter().zip(&p).map(|(x, y)| x - y).collect();
            let m = RatMatrix::from_rows(vec![diff, a]).unwrap();
            proptest::prop_assert!(rank(&m) <= 1);
        }
    }
}
