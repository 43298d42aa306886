//! Turning a floating point dual ray into an exact one.
//!
//! A ray on the boundary of the psd cone does not survive naive rounding:
//! `W(y)` is singular, and perturbing `y` pushes small eigenvalues negative.
//! We estimate the null space `N` of `W(y)`, round a basis of it, and then
//! require `W(y) N = 0` exactly together with the affine conditions on `y`.
//! The rounded `y` is projected onto that set and checked exactly.

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use super::float_spectrum;
use crate::ratmat::{is_psd, project_affine, rationalize, Rational, SymMatrix};
use crate::sdpsolve::ToleranceProfile;
use crate::system::SdpSystem;

pub(crate) const DENOMINATORS: [u64; 4] = [100, 10_000, 100_000_000, 1_000_000_000_000];

/// Exact multipliers near `y` with `y_i = 0` for `i < fixed`, `bᵀy = target`
/// and a psd lower block `W(y)` on the face `0 ⊕ S₊^{n-r}`; `W(y) ≠ 0` when
/// `nonzero` is set. `None` when every rung of the ladder fails.
pub fn round_ray(
    system: &SdpSystem,
    r: usize,
    fixed: usize,
    y: &[f64],
    target: &Rational,
    nonzero: bool,
    tol: &ToleranceProfile,
) -> Option<Vec<Rational>> {
    let n = system.order();
    let s = n - r;
    let m = system.equations();
    let free: Vec<usize> = (fixed..m).collect();
    if free.is_empty() {
        return None;
    }
    let lower: Vec<SymMatrix> = system.matrices().iter().map(|a| a.trailing_block(r)).collect();
    let lower_f: Vec<DMatrix<f64>> = lower.iter().map(SymMatrix::to_f64).collect();

    // With a homogeneous target any positive scaling is a ray, so normalize.
    let mut y: Vec<f64> = y.to_vec();
    if target.is_zero() {
        let big = free.iter().map(|&i| y[i].abs()).fold(0.0, f64::max);
        if big > 0.0 {
            y.iter_mut().for_each(|v| *v /= big);
        }
    }

    let mut w = DMatrix::zeros(s, s);
    for &i in &free {
        w += &lower_f[i] * y[i];
    }
    let candidates = null_space_candidates(&w, tol);

    let base_rows: Vec<(Vec<Rational>, Rational)> =
        vec![(free.iter().map(|&i| system.rhs()[i].clone()).collect(), target.clone())];
    let max_den = tol.max_denominator.max(1);
    let ladder: Vec<u64> = DENOMINATORS
        .iter()
        .copied()
        .filter(|&d| d <= max_den)
        .chain(std::iter::once(max_den))
        .collect();

    let mut seen = std::collections::HashSet::new();
    for null in &candidates {
        for &den in &ladder {
            let Some(kernel) = rational_kernel(null, den) else { continue };
            let mut rows = base_rows.clone();
            for v in &kernel {
                // Σ_i y_i (L_i v)_a = 0 for every row a.
                let products: Vec<Vec<Rational>> = free
                    .iter()
                    .map(|&i| lower[i].as_matrix().mul_vec(v).expect("face order"))
                    .collect();
                for a in 0..s {
                    let row: Vec<Rational> = products.iter().map(|p| p[a].clone()).collect();
                    if row.iter().any(|x| !x.is_zero()) {
                        rows.push((row, Rational::zero()));
                    }
                }
            }
            let start: Vec<Rational> = free.iter().map(|&i| rationalize(y[i], den)).collect();
            let Ok(projected) = project_affine(&start, &rows) else { continue };
            if !seen.insert(projected.clone()) {
                continue;
            }
            let mut full = vec![Rational::zero(); m];
            for (k, &i) in free.iter().enumerate() {
                full[i] = projected[k].clone();
            }
            if accepts(system, &lower, &full, target, nonzero) {
                return Some(full);
            }
        }
    }
    None
}

fn accepts(system: &SdpSystem, lower: &[SymMatrix], y: &[Rational], target: &Rational, nonzero: bool) -> bool {
    let beta: Rational = y.iter().zip(system.rhs()).map(|(a, b)| a * b).sum();
    if beta != *target {
        return false;
    }
    let s = lower.first().map_or(0, SymMatrix::order);
    let w = SymMatrix::combination(s, y, lower);
    !(nonzero && w.is_zero()) && is_psd(&w)
}

/// Float null space estimates of `w`: first by the relative eigenvalue cut,
/// then by the largest gap in the spectrum, then none at all.
fn null_space_candidates(w: &DMatrix<f64>, tol: &ToleranceProfile) -> Vec<DMatrix<f64>> {
    let s = w.nrows();
    let mut out = Vec::new();
    if s == 0 {
        out.push(DMatrix::zeros(0, 0));
        return out;
    }
    let eig = float_spectrum(w);
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);

    let by_cut = values.iter().filter(|&&v| v < tol.rank * scale).count();
    let mut dims = vec![by_cut];
    // Largest multiplicative gap between consecutive absolute eigenvalues.
    let mut best = (0.0, 0usize);
    for d in 1..s {
        let lo = values[d - 1].abs().max(1e-300);
        let hi = values[d].abs().max(1e-300);
        let gap = (hi / lo).ln();
        if gap > best.0 {
            best = (gap, d);
        }
    }
    if best.1 > 0 && best.0 > 4.0 {
        dims.push(best.1);
    }
    dims.push(0);
    dims.dedup();
    let mut done = std::collections::HashSet::new();
    for d in dims {
        if !done.insert(d) {
            continue;
        }
        let cols: Vec<_> = order[..d].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        out.push(if cols.is_empty() {
            DMatrix::zeros(s, 0)
        } else {
            DMatrix::from_columns(&cols)
        });
    }
    out
}

/// Rational basis of the column space of `null`: the rows of the reduced
/// echelon form of `nullᵀ`, rounded to denominators at most `den`.
fn rational_kernel(null: &DMatrix<f64>, den: u64) -> Option<Vec<Vec<Rational>>> {
    let d = null.ncols();
    let s = null.nrows();
    if d == 0 {
        return Some(Vec::new());
    }
    let mut a = null.transpose();
    let mut row = 0;
    for col in 0..s {
        if row == d {
            break;
        }
        let (pivot, val) = (row..d)
            .map(|i| (i, a[(i, col)].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if val < 1e-8 {
            continue;
        }
        a.swap_rows(row, pivot);
        let p = a[(row, col)];
        for j in 0..s {
            a[(row, j)] /= p;
        }
        for i in 0..d {
            if i != row {
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..s {
                        a[(i, j)] -= f * a[(row, j)];
                    }
                }
            }
        }
        row += 1;
    }
    if row < d {
        return None;
    }
    Some(
        (0..d)
            .map(|i| (0..s).map(|j| rationalize(a[(i, j)], den)).collect())
            .collect(),
    )
}

/// Checks an exact ray candidate against the affine and conic conditions.
pub(crate) fn exact_ray_ok(
    system: &SdpSystem,
    r: usize,
    y: &[Rational],
    target: &Rational,
    nonzero: bool,
) -> bool {
    if y.len() != system.equations() {
        return false;
    }
    let lower: Vec<SymMatrix> = system.matrices().iter().map(|a| a.trailing_block(r)).collect();
    accepts(system, &lower, y, target, nonzero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    #[test]
    fn recovers_boundary_ray() {
        // y = (4, 2, 1) gives [[4,2,0],[2,1,0],[0,0,1]], singular psd
        let system = SdpSystem::from_i64(
            &[
                &[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]],
                &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]],
                &[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1]],
            ],
            &[0, -1, 1],
        );
        let noisy = [4.0 + 3e-9, 2.0 - 1e-9, 1.0 + 2e-10];
        let y = round_ray(&system, 0, 0, &noisy, &int(-1), false, &ToleranceProfile::default()).unwrap();
        assert_eq!(y, vec![int(4), int(2), int(1)]);
    }

    #[test]
    fn respects_fixed_rows() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]], &[&[0, 0], &[0, 1]]], &[0, 0]);
        let y = round_ray(&system, 0, 1, &[0.7, 0.5], &int(0), true, &ToleranceProfile::default()).unwrap();
        assert!(y[0].is_zero());
        assert!(y[1].is_positive());
    }
}
