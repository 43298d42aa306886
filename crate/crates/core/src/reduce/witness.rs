use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use super::rounding::DENOMINATORS;
use super::step::ReductionState;
use crate::error::{Error, Result};
use crate::ratmat::{is_pd, project_affine, rationalize, Rational, SymMatrix};
use crate::sdpsolve::lmi::min_eigenvalue;
use crate::sdpsolve::{ExactPrimal, ToleranceProfile};

/// A point `(X, x0)` of the homogenized system as the solver reported it.
#[derive(Clone, Debug)]
pub struct PrimalPoint {
    /// Full `n×n` matrix, zero outside the trailing block.
    pub x: DMatrix<f64>,
    pub x0: f64,
    pub exact: Option<ExactPrimal>,
}

const MAX_HALVINGS: usize = 60;

/// A solution of the current system whose trailing `(n-r)×(n-r)` block is
/// positive definite and which vanishes elsewhere.
///
/// Combines the homogenized point `(X, x0)` with the strictly feasible point
/// `(X', x0')` as `(X + εX') / (x0 + εx0')` for `ε = 1/4, 1/8, …`, rounds,
/// projects exactly onto the equations and checks positive definiteness.
pub fn max_rank_witness(
    state: &ReductionState,
    primal: &PrimalPoint,
    strict: Option<&PrimalPoint>,
    tol: &ToleranceProfile,
) -> Result<SymMatrix> {
    let n = state.system.order();
    let r = state.eliminated();
    let s = n - r;

    if let Some(ex) = &primal.exact {
        if ex.x0.is_positive() {
            let candidate = ex.x.scale(&(Rational::one() / &ex.x0));
            if is_max_rank_solution(state, &candidate) {
                return Ok(candidate);
            }
        }
    }
    if let Some(ex) = strict.and_then(|p| p.exact.as_ref()) {
        if ex.x0.is_positive() {
            let candidate = ex.x.scale(&(Rational::one() / &ex.x0));
            if is_max_rank_solution(state, &candidate) {
                return Ok(candidate);
            }
        }
    }

    let lower_x = primal.x.view((r, r), (s, s)).into_owned();
    let (lower_strict, strict_x0) = match strict {
        Some(p) => (p.x.view((r, r), (s, s)).into_owned(), p.x0),
        None => (DMatrix::zeros(s, s), 0.0),
    };
    let constraints = face_constraints(state);
    let mut eps = 0.25;
    for _ in 0..=MAX_HALVINGS {
        let denom = primal.x0 + eps * strict_x0;
        if denom > 0.0 {
            let combo = (&lower_x + &lower_strict * eps) / denom;
            let combo = (&combo + combo.transpose()) * 0.5;
            if min_eigenvalue(&combo) > 0.0 {
                for den in ladder(tol) {
                    if let Some(x) = round_and_project(&combo, den, &constraints) {
                        let full = SymMatrix::embed_trailing(&x, r);
                        if is_pd(&x) && state.system.is_solution(&full) {
                            return Ok(full);
                        }
                    }
                }
            }
        }
        if strict.is_none() {
            break;
        }
        eps *= 0.5;
    }
    Err(Error::ExactValidation("no exactly feasible maximum rank point found".into()))
}

/// Float variant: the combination is checked with tolerances and stored as
/// the exact binary value of its entries.
pub(crate) fn max_rank_witness_float(
    state: &ReductionState,
    primal: &PrimalPoint,
    strict: Option<&PrimalPoint>,
    tol: &ToleranceProfile,
) -> Result<SymMatrix> {
    let n = state.system.order();
    let r = state.eliminated();
    let s = n - r;
    let mats: Vec<DMatrix<f64>> = state.system.matrices().iter().map(|a| a.trailing_block(r).to_f64()).collect();
    let rhs: Vec<f64> = state.system.rhs().iter().map(crate::ratmat::to_f64).collect();
    let lower_x = primal.x.view((r, r), (s, s)).into_owned();
    let (lower_strict, strict_x0) = match strict {
        Some(p) => (p.x.view((r, r), (s, s)).into_owned(), p.x0),
        None => (DMatrix::zeros(s, s), 0.0),
    };
    let mut eps = 0.25;
    for _ in 0..=MAX_HALVINGS {
        let denom = primal.x0 + eps * strict_x0;
        if denom > 0.0 {
            let combo = (&lower_x + &lower_strict * eps) / denom;
            let combo = (&combo + combo.transpose()) * 0.5;
            let scale = combo.amax().max(1.0);
            let residual = mats
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a.dot(&combo) - b).abs() / a.amax().max(b.abs()).max(1.0))
                .fold(0.0, f64::max);
            if residual <= tol.eq * scale * 10.0 && (s == 0 || min_eigenvalue(&combo) > tol.pd) {
                let mut full = DMatrix::zeros(n, n);
                full.view_mut((r, r), (s, s)).copy_from(&combo);
                return SymMatrix::from_f64_symmetrized(&full)
                    .ok_or_else(|| Error::NumericFailure("non-finite witness".into()));
            }
        }
        if strict.is_none() {
            break;
        }
        eps *= 0.5;
    }
    Err(Error::NumericFailure("float witness failed its tolerance checks".into()))
}

/// Exact check that `x` solves the current system, vanishes outside the
/// trailing block and is positive definite on it.
pub(crate) fn is_max_rank_solution(state: &ReductionState, x: &SymMatrix) -> bool {
    let n = state.system.order();
    let r = state.eliminated();
    if x.order() != n || !state.system.is_solution(x) {
        return false;
    }
    let outside = (0..n).any(|i| (0..r).any(|j| !x[(i, j)].is_zero()));
    !outside && is_pd(&x.trailing_block(r))
}

fn ladder(tol: &ToleranceProfile) -> Vec<u64> {
    let max_den = tol.max_denominator.max(1);
    let mut out: Vec<u64> = DENOMINATORS.iter().copied().filter(|&d| d <= max_den).collect();
    if out.last() != Some(&max_den) {
        out.push(max_den);
    }
    out
}

/// `L_i • Y = b_i` over the flattened trailing block `Y`.
fn face_constraints(state: &ReductionState) -> Vec<(Vec<Rational>, Rational)> {
    let r = state.eliminated();
    state
        .system
        .matrices()
        .iter()
        .zip(state.system.rhs())
        .filter_map(|(a, b)| {
            let l = a.trailing_block(r);
            let s = l.order();
            let row: Vec<Rational> = (0..s * s).map(|k| l[(k / s, k % s)].clone()).collect();
            (row.iter().any(|v| !v.is_zero()) || !b.is_zero()).then(|| (row, b.clone()))
        })
        .collect()
}

fn round_and_project(x: &DMatrix<f64>, den: u64, constraints: &[(Vec<Rational>, Rational)]) -> Option<SymMatrix> {
    let s = x.nrows();
    let mut flat = Vec::with_capacity(s * s);
    for i in 0..s {
        for j in 0..s {
            let v = if i <= j { x[(i, j)] } else { x[(j, i)] };
            flat.push(rationalize(v, den));
        }
    }
    let projected = project_affine(&flat, constraints).ok()?;
    let m = crate::ratmat::RatMatrix::from_fn(s, s, |i, j| projected[i * s + j].clone());
    SymMatrix::new(m).ok()
}
