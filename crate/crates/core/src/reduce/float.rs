//! Reduction steps in floating point.
//!
//! The system stays stored as rationals, but every entry is the exact value
//! of an `f64`. Each step is computed in `f64`; the new equation is then
//! snapped to its structural pattern (`0`, `-1`, `I ⊕ 0`) when it is within
//! tolerance of it. The resulting transcript holds only up to tolerance.

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use super::float_spectrum;
use super::step::{ReductionState, StepKind};
use crate::error::{Error, Result};
use crate::ratmat::{from_f64_exact, RatMatrix, Rational, SymMatrix};
use crate::sdpsolve::ToleranceProfile;
use crate::system::SdpSystem;

pub(crate) fn reduction_step_float(
    state: &ReductionState,
    y: &[f64],
    kind: StepKind,
    tol: &ToleranceProfile,
) -> Result<ReductionState> {
    let n = state.system.order();
    let m = state.system.equations();
    let r = state.eliminated();
    let s = n - r;
    let ell = state.ell;
    let j = (ell..m)
        .max_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs()))
        .filter(|&j| y[j] != 0.0)
        .ok_or(Error::DegenerateCombo { fixed: ell })?;

    let mats: Vec<DMatrix<f64>> = state.system.matrices().iter().map(SymMatrix::to_f64).collect();
    let rhs: Vec<f64> = state.system.rhs().iter().map(crate::ratmat::to_f64).collect();
    let mut combo = DMatrix::zeros(n, n);
    let mut beta = 0.0;
    for i in ell..m {
        combo += &mats[i] * y[i];
        beta += rhs[i] * y[i];
    }
    // Normalize so that the combination has unit size (Reduce) or bᵀy = -1 (Final).
    let size = match kind {
        StepKind::Reduce => combo.view((r, r), (s, s)).amax(),
        StepKind::Final => -beta,
    };
    if !(size > 0.0) || !size.is_finite() {
        return Err(Error::NumericFailure("degenerate float combination".into()));
    }
    let y: Vec<f64> = y.iter().enumerate().map(|(i, v)| if i < ell { 0.0 } else { v / size }).collect();
    combo /= size;
    beta /= size;
    let data_scale = mats.iter().map(|a| a.amax()).fold(1.0, f64::max) * y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let target = match kind {
        StepKind::Reduce => 0.0,
        StepKind::Final => -1.0,
    };
    if (beta - target).abs() > tol.eq * data_scale * 1e3 {
        return Err(Error::NumericFailure(format!("combined right-hand side {beta} is not {target}")));
    }

    // Eigen-split of the lower block into a positive part and a null part.
    let w = combo.view((r, r), (s, s)).into_owned();
    let eig = float_spectrum(&w);
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let cut = tol.rank * lam_max;
    if eig.eigenvalues.iter().any(|&v| v < -cut) {
        return Err(Error::NumericFailure("float combination is not psd".into()));
    }
    let mut idx: Vec<usize> = (0..s).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut rho = idx.iter().filter(|&&i| eig.eigenvalues[i] > cut).count();
    // A drop of four orders of magnitude marks solver noise, not rank.
    if let Some(gap) = (1..rho).find(|&j| eig.eigenvalues[idx[j]] < 1e-4 * eig.eigenvalues[idx[j - 1]]) {
        rho = gap;
    }
    if kind == StepKind::Reduce && rho == 0 {
        return Err(Error::NumericFailure("float combination has no positive part".into()));
    }
    let mut q = DMatrix::zeros(s, s);
    for (col, &i) in idx.iter().enumerate() {
        let scale = if col < rho { 1.0 / eig.eigenvalues[i].sqrt() } else { 1.0 };
        q.set_column(col, &(eig.eigenvectors.column(i) * scale));
    }
    let mut v_step = DMatrix::identity(n, n);
    v_step.view_mut((r, r), (s, s)).copy_from(&q);

    // Row operations: equation j becomes the combination, then moves to `ell`.
    let mut factor = DMatrix::identity(m, m);
    for (i, yi) in y.iter().enumerate() {
        factor[(j, i)] = *yi;
    }
    factor.swap_rows(j, ell);

    let mut new_mats = mats.clone();
    let mut new_rhs = rhs.clone();
    new_mats[j] = combo;
    new_rhs[j] = beta;
    new_mats.swap(j, ell);
    new_rhs.swap(j, ell);
    let rotated: Vec<DMatrix<f64>> = new_mats.iter().map(|a| v_step.transpose() * a * &v_step).collect();

    // Snap the new equation to its exact pattern.
    let mut head = rotated[ell].clone();
    let mut pattern = DMatrix::zeros(s, s);
    for d in 0..rho {
        pattern[(d, d)] = 1.0;
    }
    let deviation = (head.view((r, r), (s, s)) - &pattern).amax();
    if deviation > 1e-6 {
        return Err(Error::NumericFailure(format!("rotated block deviates from I ⊕ 0 by {deviation:e}")));
    }
    head.view_mut((r, r), (s, s)).copy_from(&pattern);
    let mut rotated = rotated;
    rotated[ell] = head;
    // Rounding noise left where cancellation should give zero.
    for a in &mut rotated {
        let floor = 1e-12 * a.amax().max(1.0);
        a.apply(|v| {
            if v.abs() <= floor {
                *v = 0.0
            }
        });
    }
    new_rhs[ell] = target;

    let system = SdpSystem::new(
        n,
        rotated.iter().map(|a| to_exact_sym(a)).collect::<Result<Vec<_>>>()?,
        new_rhs.iter().map(|&b| to_exact(b)).collect::<Result<Vec<_>>>()?,
    )?;
    let t = to_exact_mat(&(factor * state.t.to_f64()))?;
    let v = to_exact_mat(&(state.v.to_f64() * v_step))?;
    let mut block_sizes = state.block_sizes.clone();
    block_sizes.push(rho);
    Ok(ReductionState {
        system,
        ell: ell + 1,
        block_sizes,
        t,
        v,
        mode: state.mode,
    })
}

fn to_exact(x: f64) -> Result<Rational> {
    if x == 0.0 {
        return Ok(Rational::zero());
    }
    if x == -1.0 {
        return Ok(-Rational::one());
    }
    from_f64_exact(x).ok_or_else(|| Error::NumericFailure("non-finite value".into()))
}

fn to_exact_sym(a: &DMatrix<f64>) -> Result<SymMatrix> {
    SymMatrix::from_f64_symmetrized(a).ok_or_else(|| Error::NumericFailure("non-finite matrix".into()))
}

fn to_exact_mat(a: &DMatrix<f64>) -> Result<RatMatrix> {
    RatMatrix::from_f64_exact(a).ok_or_else(|| Error::NumericFailure("non-finite matrix".into()))
}
