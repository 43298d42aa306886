use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{format_rational, from_f64_exact, parse_rational, to_f64, Rational};
use crate::error::{Error, Result};

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor for integer literals; panics on ragged input.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let converted = rows
            .iter()
            .map(|row| row.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
            .collect();
        Self::from_rows(converted).expect("rectangular literal")
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Copy of the rectangular block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row + i, col + j)].clone())
    }

    /// `diag(I_offset, inner)`.
    pub fn embed_lower(inner: &Self, offset: usize) -> Self {
        let n = offset + inner.rows;
        let mut m = Self::identity(n);
        for i in 0..inner.rows {
            for j in 0..inner.cols {
                m[(offset + i, offset + j)] = inner[(i, j)].clone();
            }
        }
        m
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.data
            .iter()
            .map(num_traits::Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(&self[(i, j)]))
    }

    /// Exact binary values of a float matrix; `None` if any entry is not finite.
    pub fn from_f64_exact(m: &DMatrix<f64>) -> Option<Self> {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(from_f64_exact(m[(i, j)])?);
            }
        }
        Some(Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        })
    }
}

impl Index<(usize, usize)> for RatMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for RatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        RatMatrix::from_rows(parsed).map_err(de::Error::custom)
    }
}

/// Symmetric rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymMatrix(RatMatrix);

impl SymMatrix {
    pub fn new(m: RatMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if let Some((row, col)) = m.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        Ok(Self(m))
    }

    /// Builds a symmetric matrix from its upper triangle, mirroring it below.
    pub fn from_upper(m: &RatMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("expected a square matrix".into()));
        }
        Ok(Self(RatMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            if i <= j {
                m[(i, j)].clone()
            } else {
                m[(j, i)].clone()
            }
        })))
    }

    pub fn zeros(n: usize) -> Self {
        Self(RatMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(RatMatrix::identity(n))
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        Self(RatMatrix::diagonal(values))
    }

    /// Panics if the literal is not symmetric.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::new(RatMatrix::from_i64(rows)).expect("symmetric literal")
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RatMatrix {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Trace inner product `A • B`.
    pub fn dot(&self, other: &Self) -> Rational {
        assert_eq!(self.order(), other.order(), "order mismatch in dot product");
        let n = self.order();
        let mut acc = Rational::zero();
        for i in 0..n {
            for j in 0..n {
                let a = &self[(i, j)];
                let b = &other[(i, j)];
                if !a.is_zero() && !b.is_zero() {
                    acc += a * b;
                }
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self(self.0.scale(factor))
    }

    /// `Σ coeffs[i] · mats[i]`; an empty combination needs the order explicitly.
    pub fn combination(order: usize, coeffs: &[Rational], mats: &[SymMatrix]) -> Self {
        let mut out = RatMatrix::zeros(order, order);
        for (c, m) in coeffs.iter().zip(mats) {
            if c.is_zero() {
                continue;
            }
            for i in 0..order {
                for j in 0..order {
                    let v = &m[(i, j)];
                    if !v.is_zero() {
                        out[(i, j)] += c * v;
                    }
                }
            }
        }
        Self(out)
    }

    /// Trailing principal submatrix starting at row/column `offset`.
    pub fn trailing_block(&self, offset: usize) -> Self {
        let size = self.order() - offset;
        Self(self.0.block(offset, offset, size, size))
    }

    /// Principal submatrix on `start..start + size`.
    pub fn principal_block(&self, start: usize, size: usize) -> Self {
        Self(self.0.block(start, start, size, size))
    }

    /// `0 ⊕ inner`, padding with `offset` leading zero rows and columns.
    pub fn embed_trailing(inner: &Self, offset: usize) -> Self {
        let n = offset + inner.order();
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..inner.order() {
            for j in 0..inner.order() {
                m[(offset + i, offset + j)] = inner[(i, j)].clone();
            }
        }
        Self(m)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.0.to_f64()
    }

    /// Exact binary values of the symmetrized float matrix.
    pub fn from_f64_symmetrized(m: &DMatrix<f64>) -> Option<Self> {
        let sym = (m + m.transpose()) * 0.5;
        RatMatrix::from_f64_exact(&sym).map(Self)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = Rational;

    fn index(&self, idx: (usize, usize)) -> &Rational {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<SymMatrix> for RatMatrix {
    fn from(s: SymMatrix) -> Self {
        s.0
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = RatMatrix::deserialize(d)?;
        SymMatrix::new(m).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::rational::int;

    #[test]
    fn symmetry_is_enforced() {
        let m = RatMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        assert_eq!(SymMatrix::new(m.clone()), Err(Error::NotSymmetric { row: 0, col: 1 }));
        let s = SymMatrix::from_upper(&m).unwrap();
        assert_eq!(s[(1, 0)], int(2));
    }

    #[test]
    fn dot_is_trace_of_product() {
        let a = SymMatrix::from_i64(&[&[1, 2], &[2, 3]]);
        let b = SymMatrix::from_i64(&[&[4, -1], &[-1, 5]]);
        // tr(AB) = 4 - 2 - 2 + 15
        assert_eq!(a.dot(&b), int(15));
    }

    #[test]
    fn serde_uses_rational_strings() {
        let s = SymMatrix::new(RatMatrix::from_rows(vec![
            vec![crate::ratmat::frac(1, 2), int(0)],
            vec![int(0), int(-3)],
        ]).unwrap())
        .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"[["1/2","0"],["0","-3"]]"#);
        let back: SymMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SymMatrix>(r#"[["1","2"],["3","1"]]"#).is_err());
    }

    #[test]
    fn trailing_blocks() {
        let a = SymMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 5], &[3, 5, 6]]);
        assert_eq!(a.trailing_block(1), SymMatrix::from_i64(&[&[4, 5], &[5, 6]]));
        let e = SymMatrix::embed_trailing(&a.trailing_block(2), 2);
        assert_eq!(e, SymMatrix::from_i64(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 6]]));
    }
}
