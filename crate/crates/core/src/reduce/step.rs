use num_traits::{One, Signed, Zero};

use super::{minus_one, Mode, StaircaseForm, Transcript};
use crate::error::{Error, Result};
use crate::ratmat::{determinant, is_psd, psd_block_diagonalize, RatMatrix, Rational, SymMatrix};
use crate::system::SdpSystem;

/// Which branch of the algorithm a reduction step serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// `bᵀy = 0` and a nonzero psd lower block: the face shrinks.
    Reduce,
    /// `bᵀy = -1` and a psd lower block: the last equation of an infeasible staircase.
    Final,
}

impl StepKind {
    pub fn target(self) -> Rational {
        match self {
            Self::Reduce => Rational::zero(),
            Self::Final => minus_one(),
        }
    }
}

/// The reformulation after `ell` reduction steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionState {
    pub system: SdpSystem,
    pub ell: usize,
    pub block_sizes: Vec<usize>,
    pub t: RatMatrix,
    pub v: RatMatrix,
    pub mode: Mode,
}

impl ReductionState {
    pub fn new(system: SdpSystem, mode: Mode) -> Self {
        let (m, n) = (system.equations(), system.order());
        Self {
            system,
            ell: 0,
            block_sizes: Vec::new(),
            t: RatMatrix::identity(m),
            v: RatMatrix::identity(n),
            mode,
        }
    }

    /// `r = r_1 + … + r_ell`.
    pub fn eliminated(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn transcript(&self) -> Transcript {
        Transcript {
            t: self.t.clone(),
            v: self.v.clone(),
            mode: self.mode,
        }
    }

    /// Staircase of the current system with depth `k`.
    pub fn staircase(&self, k: usize) -> StaircaseForm {
        StaircaseForm::new(self.system.clone(), k, self.block_sizes.clone())
    }

    /// Trailing block of `Σ y_i A_i` on the current face.
    pub fn lower_combination(&self, y: &[Rational]) -> (SymMatrix, Rational) {
        let (w, beta) = self.system.combine(y);
        (w.trailing_block(self.eliminated()), beta)
    }
}

/// Replaces equation `j` (the first index `≥ ell` with `y_j ≠ 0`) by
/// `Σ y_i (A_i, b_i)` and swaps it to position `ell`. Returns the new system
/// and the `m×m` factor `F` with `T_new = F T_old`.
pub fn apply_eros(system: &SdpSystem, y: &[Rational], ell: usize) -> Result<(SdpSystem, RatMatrix)> {
    let m = system.equations();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!("multiplier has {} entries, expected {m}", y.len())));
    }
    let j = (ell..m).find(|&j| !y[j].is_zero()).ok_or(Error::DegenerateCombo { fixed: ell })?;
    let (matrix, rhs) = system.combine(y);
    let mut out = system.clone();
    out.set_equation(j, matrix, rhs);
    out.swap_equations(j, ell);
    let mut factor = RatMatrix::identity(m);
    for (i, yi) in y.iter().enumerate() {
        factor[(j, i)] = yi.clone();
    }
    factor.swap_rows(j, ell);
    Ok((out, factor))
}

/// One pass of eros, block diagonalization, and rotation.
///
/// `y` must give `bᵀy = 0` (or `-1` for [`StepKind::Final`]) and a psd lower
/// block, nonzero for [`StepKind::Reduce`]. `rotation`, when given, is either
/// the full `n×n` matrix or the lower block `Q`; otherwise `Q` comes from an
/// exact LDLᵀ with columns scaled to unit pivots where the pivot is a square.
pub fn reduction_step(
    state: &ReductionState,
    y: &[Rational],
    rotation: Option<&RatMatrix>,
    kind: StepKind,
) -> Result<ReductionState> {
    let n = state.system.order();
    let r = state.eliminated();
    let ell = state.ell;
    if ell >= state.system.equations() {
        return Err(Error::ExactValidation("no equations left to reduce".into()));
    }
    let (system, factor) = apply_eros(&state.system, y, ell)?;
    if system.rhs()[ell] != kind.target() {
        return Err(Error::ExactValidation(format!(
            "combined right-hand side is {}, expected {}",
            system.rhs()[ell],
            kind.target()
        )));
    }
    let w = system.matrix(ell).trailing_block(r);
    if !is_psd(&w) {
        return Err(Error::ExactValidation("lower block of the combination is not psd".into()));
    }
    if kind == StepKind::Reduce && w.is_zero() {
        return Err(Error::ExactValidation("lower block of the combination is zero".into()));
    }

    let v_step = match rotation {
        Some(v) if v.rows() == n && v.cols() == n => v.clone(),
        Some(q) if q.rows() == n - r && q.cols() == n - r => RatMatrix::embed_lower(q, r),
        Some(q) => {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}x{}, expected {n}x{n} or {s}x{s}",
                q.rows(),
                q.cols(),
                s = n - r
            )))
        }
        None if w.is_zero() => RatMatrix::identity(n),
        None => RatMatrix::embed_lower(&normalized_q(&w)?, r),
    };
    if determinant(&v_step)?.is_zero() {
        return Err(Error::SingularMatrix);
    }

    let mut system = system;
    if v_step != RatMatrix::identity(n) {
        system.rotate_all(&v_step);
    }
    let rho = leading_diagonal_rank(&system.matrix(ell).trailing_block(r)).ok_or_else(|| {
        Error::ExactValidation("rotated combination is not a positive diagonal block followed by zeros".into())
    })?;
    if kind == StepKind::Reduce && rho == 0 {
        return Err(Error::ExactValidation("reduction step produced an empty block".into()));
    }

    let mut block_sizes = state.block_sizes.clone();
    block_sizes.push(rho);
    Ok(ReductionState {
        system,
        ell: ell + 1,
        block_sizes,
        t: factor.mul(&state.t)?,
        v: state.v.mul(&v_step)?,
        mode: state.mode,
    })
}

/// `Q` with `Qᵀ W Q = diag(d) ⊕ 0`, where every `d_j` that is the square of a
/// rational has been scaled to one.
fn normalized_q(w: &SymMatrix) -> Result<RatMatrix> {
    let bd = psd_block_diagonalize(w)?;
    let mut q = bd.q;
    for (j, d) in bd.diagonal.iter().enumerate() {
        if let Some(root) = rational_sqrt(d) {
            if !root.is_one() {
                let inv = Rational::one() / root;
                for i in 0..q.rows() {
                    let v = &q[(i, j)] * &inv;
                    q[(i, j)] = v;
                }
            }
        }
    }
    Ok(q)
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().sqrt();
    let den = x.denom().sqrt();
    (&num * &num == *x.numer() && &den * &den == *x.denom()).then(|| Rational::new(num, den))
}

/// `ρ` if the matrix is `diag(d_1, …, d_ρ) ⊕ 0` with every `d_j > 0`.
pub(crate) fn leading_diagonal_rank(w: &SymMatrix) -> Option<usize> {
    let s = w.order();
    let rho = (0..s).take_while(|&j| w[(j, j)].is_positive()).count();
    for i in 0..s {
        for j in 0..s {
            let expected_nonzero = i == j && i < rho;
            if !expected_nonzero && !w[(i, j)].is_zero() {
                return None;
            }
        }
    }
    Some(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn unit_multiplier_only_swaps() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]], &[&[0, 1], &[1, 0]]], &[0, 1]);
        let (out, f) = apply_eros(&system, &ints(&[0, 1]), 0).unwrap();
        assert_eq!(out.matrix(0), system.matrix(1));
        assert_eq!(out.matrix(1), system.matrix(0));
        assert_eq!(f, RatMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        assert!(matches!(apply_eros(&system, &ints(&[1, 0]), 1), Err(Error::DegenerateCombo { fixed: 1 })));
    }

    #[test]
    fn square_pivots_become_identity() {
        let w = SymMatrix::from_i64(&[&[4, 2], &[2, 1]]);
        let q = normalized_q(&w).unwrap();
        let d = crate::ratmat::congruence(&w, &q).unwrap();
        assert_eq!(d, SymMatrix::diagonal(&ints(&[1, 0])));
        let w = SymMatrix::from_i64(&[&[2, 0], &[0, 0]]);
        let d = crate::ratmat::congruence(&w, &normalized_q(&w).unwrap()).unwrap();
        assert_eq!(d, SymMatrix::diagonal(&ints(&[2, 0])));
    }

    #[test]
    fn shape_detection() {
        assert_eq!(leading_diagonal_rank(&SymMatrix::diagonal(&ints(&[3, 0]))), Some(1));
        assert_eq!(leading_diagonal_rank(&SymMatrix::diagonal(&ints(&[0, 3]))), None);
        assert_eq!(leading_diagonal_rank(&SymMatrix::zeros(2)), Some(0));
    }

    #[test]
    fn reduce_step_rejects_bad_multipliers() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]], &[&[0, 1], &[1, 0]]], &[0, -1]);
        let state = ReductionState::new(system, Mode::Exact);
        // combination with nonzero right-hand side
        assert!(reduction_step(&state, &ints(&[1, 1]), None, StepKind::Reduce).is_err());
        // indefinite combination
        assert!(reduction_step(&state, &ints(&[0, 1]), None, StepKind::Final).is_err());
        let next = reduction_step(&state, &ints(&[1, 0]), None, StepKind::Reduce).unwrap();
        assert_eq!(next.block_sizes, vec![1]);
        assert_eq!(next.ell, 1);
        let last = reduction_step(&next, &ints(&[0, 1]), None, StepKind::Final).unwrap();
        assert_eq!(last.block_sizes, vec![1, 0]);
    }
}
