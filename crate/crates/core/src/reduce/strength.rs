use num_traits::{Signed, Zero};

use super::rounding::{exact_ray_ok, round_ray};
use super::{minus_one, Mode, Certificate, Strength};
use crate::ratmat::{solve_any, RatMatrix, Rational};
use crate::sdpsolve::{solve_farkas, Diagnostics, SubproblemOutcome, ToleranceProfile};
use crate::system::SdpSystem;

/// Strong or weak infeasibility of `system`, with the verified Farkas ray
/// when strong.
///
/// A depth-zero certificate yields the ray directly as the first row of `T`;
/// otherwise the Farkas problem is solved and its ray rounded and checked
/// exactly. Only an exactly verified ray makes the result strong.
pub fn classify_strength(
    system: &SdpSystem,
    cert: &Certificate,
    tol: &ToleranceProfile,
) -> (Strength, Option<Vec<Rational>>, Option<Diagnostics>) {
    if let Some(y) = depth_zero_ray(system, cert) {
        return (Strength::Strong, Some(y), None);
    }
    // Float transcripts only hold up to tolerance, so only exact ones transfer.
    let exact = cert.transcript().is_some_and(|t| t.mode == Mode::Exact);
    let reformulated = cert.staircase().filter(|_| exact).map(|form| &form.system);
    if farkas_obstructed(system) || reformulated.is_some_and(farkas_obstructed) {
        let note = Diagnostics {
            solver: "exact".into(),
            note: Some("zero diagonals force every Farkas combination to vanish".into()),
            ..Diagnostics::default()
        };
        return (Strength::Weak, None, Some(note));
    }
    match solve_farkas(system, tol) {
        SubproblemOutcome::DualRay { y, exact, diagnostics } => {
            let exact = exact.filter(|y| exact_ray_ok(system, 0, y, &minus_one(), false));
            let ray = exact.or_else(|| round_ray(system, 0, 0, &y, &minus_one(), false, tol));
            match ray {
                Some(y) => (Strength::Strong, Some(y), Some(diagnostics)),
                None => (Strength::WeakUnconfirmed, None, Some(diagnostics)),
            }
        }
        SubproblemOutcome::StrictlyFeasible { diagnostics, .. } => (Strength::Weak, None, Some(diagnostics)),
        SubproblemOutcome::NumericFailure { diagnostics } => (Strength::WeakUnconfirmed, None, Some(diagnostics)),
    }
}

/// Exact proof that `Σ y_i A_i ⪰ 0, bᵀy = -1` has no solution.
///
/// A diagonal entry of `Σ y_i A_i` that is identically zero on the current
/// affine set of multipliers forces its whole row to vanish in any psd
/// combination; these rows are added as linear constraints until the set
/// becomes empty (obstructed) or nothing changes (inconclusive). A diagonal
/// entry that is a negative constant also obstructs.
pub fn farkas_obstructed(system: &SdpSystem) -> bool {
    let n = system.order();
    let m = system.equations();
    if m == 0 {
        return true;
    }
    let mut rows: Vec<Vec<Rational>> = vec![system.rhs().to_vec()];
    let mut rhs = vec![minus_one()];
    let mut done = vec![false; n];
    loop {
        let c = RatMatrix::from_rows(rows.clone()).expect("rows have equal length");
        if solve_any(&c, &rhs).is_none() {
            return true;
        }
        let ct = c.transpose();
        let mut changed = false;
        for t in 0..n {
            if done[t] {
                continue;
            }
            let diag: Vec<Rational> = (0..m).map(|i| system.matrix(i)[(t, t)].clone()).collect();
            let Some(lambda) = solve_any(&ct, &diag) else { continue };
            let value: Rational = lambda.iter().zip(&rhs).map(|(l, d)| l * d).sum();
            if value.is_negative() {
                return true;
            }
            if value.is_zero() {
                done[t] = true;
                changed = true;
                for j in 0..n {
                    let row: Vec<Rational> = (0..m).map(|i| system.matrix(i)[(t, j)].clone()).collect();
                    if row.iter().any(|v| !v.is_zero()) {
                        rows.push(row);
                        rhs.push(Rational::zero());
                    }
                }
            }
        }
        if !changed {
            return false;
        }
    }
}

/// For a depth-zero certificate, the first row of `T` when it is an exact ray.
pub(crate) fn depth_zero_ray(system: &SdpSystem, cert: &Certificate) -> Option<Vec<Rational>> {
    let Certificate::Infeasible { staircase, transcript, .. } = cert else { return None };
    if staircase.k != 0 || system.equations() == 0 {
        return None;
    }
    let y = transcript.t.row(0).to_vec();
    exact_ray_ok(system, 0, &y, &minus_one(), false).then_some(y)
}

/// `y` with `Σ y_i A_i = 0` and `bᵀy = -1`, which makes the system infeasible
/// by linear algebra alone.
pub(crate) fn linear_ray(system: &SdpSystem) -> Option<Vec<Rational>> {
    let n = system.order();
    let m = system.equations();
    let features = n * (n + 1) / 2;
    let mut coords = Vec::with_capacity(features);
    for i in 0..n {
        for j in i..n {
            coords.push((i, j));
        }
    }
    let mat = RatMatrix::from_fn(features + 1, m, |f, k| {
        if f == features {
            system.rhs()[k].clone()
        } else {
            let (i, j) = coords[f];
            system.matrix(k)[(i, j)].clone()
        }
    });
    let mut rhs = vec![Rational::zero(); features];
    rhs.push(minus_one());
    solve_any(&mat, &rhs)
}
