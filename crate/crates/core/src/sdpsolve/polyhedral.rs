//! Exact decisions for faces of order zero or one, where the cone is a ray.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use super::{Diagnostics, ExactPrimal, SubproblemOutcome};
use crate::ratmat::{solve_any, to_f64, RatMatrix, Rational, SymMatrix};

/// Homogenized problem over `0 ⊕ S₊^s` with `s ≤ 1`. `lower[i]` is the
/// trailing entry of `A_i` (ignored when `s = 0`).
pub(super) fn hom(n: usize, s: usize, lower: &[Rational], rhs: &[Rational]) -> SubproblemOutcome {
    debug_assert!(s <= 1);
    let m = rhs.len();
    let l: Vec<Rational> = if s == 0 { vec![Rational::zero(); m] } else { lower.to_vec() };

    // A ray with Σ y_i l_i = 0 and bᵀy = -1 exists iff b is not a multiple of l.
    let system = RatMatrix::from_fn(2, m, |r, i| if r == 0 { l[i].clone() } else { rhs[i].clone() });
    if let Some(y) = solve_any(&system, &[Rational::zero(), -Rational::one()]) {
        return ray(y, "b outside the span of the face data");
    }

    // b = x l for a unique x unless l = 0 (then b = 0 and any x works).
    let x = match l.iter().position(|v| !v.is_zero()) {
        None => Rational::one(),
        Some(j) => &rhs[j] / &l[j],
    };
    if x.is_negative() {
        let j = rhs.iter().position(|v| !v.is_zero()).expect("x < 0 forces b ≠ 0");
        let mut y = vec![Rational::zero(); m];
        y[j] = -(Rational::one() / &rhs[j]);
        return ray(y, "scalar solution is negative");
    }
    let mut x_full = vec![Rational::zero(); n];
    if s == 1 {
        x_full[n - 1] = x;
    }
    primal(SymMatrix::diagonal(&x_full), Rational::one(), "scalar solve")
}

pub(super) fn ray(y: Vec<Rational>, note: &str) -> SubproblemOutcome {
    SubproblemOutcome::DualRay {
        y: y.iter().map(to_f64).collect(),
        exact: Some(y),
        diagnostics: Diagnostics::exact(note),
    }
}

pub(super) fn primal(x: SymMatrix, x0: Rational, note: &str) -> SubproblemOutcome {
    let xf: DMatrix<f64> = x.to_f64();
    SubproblemOutcome::StrictlyFeasible {
        x: xf,
        x0: to_f64(&x0),
        exact: Some(ExactPrimal { x, x0 }),
        diagnostics: Diagnostics::exact(note),
    }
}
