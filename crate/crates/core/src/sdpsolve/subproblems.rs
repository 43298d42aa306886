use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use super::lmi::{self, BarrierSettings, Lmi, LmiBlock};
use super::{polyhedral, Diagnostics, ExactPrimal, FaceDescriptor, SubproblemOutcome, ToleranceProfile};
use crate::ratmat::{rref, solve_any, to_f64, RatMatrix, Rational, SymMatrix};
use crate::system::SdpSystem;

/// Box radius on the scaled multipliers for the auxiliary and homogenized
/// problems; only a safeguard against unbounded iterates.
const SAFETY_RADIUS: f64 = 1e6;
/// Box radius for the Farkas problem. Weakly infeasible systems approach a
/// ray only at infinity, so the optimum there is about `-1/FARKAS_RADIUS`.
const FARKAS_RADIUS: f64 = 1e4;

/// Trailing `(n-r)×(n-r)` blocks of every constraint matrix.
pub fn face_blocks(system: &SdpSystem, face: FaceDescriptor) -> Vec<SymMatrix> {
    system.matrices().iter().map(|a| a.trailing_block(face.r)).collect()
}

/// Decides strict feasibility of the homogenized system over the face by
/// maximizing `λmin(W(y))` subject to `bᵀy = 0` and `tr W(y) = 1`.
pub fn solve_aux(system: &SdpSystem, face: FaceDescriptor, tol: &ToleranceProfile) -> SubproblemOutcome {
    let prep = Prepared::new(system, face);
    let s = prep.s;
    if s == 0 {
        return SubproblemOutcome::NumericFailure {
            diagnostics: Diagnostics::exact("auxiliary problem on an empty face"),
        };
    }
    let traces: Vec<Rational> = prep.lower.iter().map(trace).collect();
    let rows = vec![prep.rhs.clone(), traces.clone()];
    let targets = vec![Rational::zero(), Rational::one()];
    if !prep.consistent(&rows, &targets) {
        // tr L_i = α b_i for every i, so (I, α) is strictly feasible.
        let alpha = proportionality(&traces, &prep.rhs);
        let x = SymMatrix::embed_trailing(&SymMatrix::identity(s), face.r);
        return polyhedral::primal(x, alpha, "trace is proportional to the right-hand side");
    }
    let Some(run) = prep.solve(&rows, &targets, SAFETY_RADIUS, tol) else {
        return failure(&prep, "affine parametrization failed");
    };
    if !run.solution.usable() {
        return failure_from(&run, "aux");
    }
    let t = run.t();
    let mut diagnostics = run.diagnostics("aux");
    if t >= -tol.rank {
        return prep.ray(&run, diagnostics);
    }
    // Z ⪰ 0 with tr Z = 1 and L̃_i • Z = α b̃_i + t tr L̃_i, so Z - tI is interior.
    let z = &run.solution.duals[0];
    let g: Vec<f64> = prep.scaled_lower.iter().map(|l| l.dot(z)).collect();
    let tr: Vec<f64> = prep.scaled_lower.iter().map(DMatrix::trace).collect();
    let (alpha, beta) = least_squares_2(&prep.scaled_rhs, &tr, &g);
    let x = z - DMatrix::identity(s, s) * beta;
    prep.primal(x, alpha, tol, true, &mut diagnostics)
}

/// Decides whether the homogenized system has value zero (a ray with
/// `bᵀy = -1` exists over the face) or admits a point with `x0 > 0`.
pub fn solve_hom(system: &SdpSystem, face: FaceDescriptor, tol: &ToleranceProfile) -> SubproblemOutcome {
    let prep = Prepared::new(system, face);
    if prep.s <= 1 {
        return polyhedral::hom(face.n, prep.s, &scalar_blocks(system, face), system.rhs());
    }
    prep.homogenized(system, SAFETY_RADIUS, tol, "hom")
}

/// Looks for `y` with `Σ y_i A_i ⪰ 0` and `bᵀy = -1`.
pub fn solve_farkas(system: &SdpSystem, tol: &ToleranceProfile) -> SubproblemOutcome {
    let face = FaceDescriptor::whole(system.order());
    let prep = Prepared::new(system, face);
    if prep.s == 1 {
        return polyhedral::hom(face.n, 1, &scalar_blocks(system, face), system.rhs());
    }
    prep.homogenized(system, FARKAS_RADIUS, tol, "farkas")
}

/// Trailing entries when the face has order one, empty otherwise.
fn scalar_blocks(system: &SdpSystem, face: FaceDescriptor) -> Vec<Rational> {
    if face.free_order() != 1 {
        return Vec::new();
    }
    system.matrices().iter().map(|a| a[(face.n - 1, face.n - 1)].clone()).collect()
}

fn trace(m: &SymMatrix) -> Rational {
    (0..m.order()).map(|i| m[(i, i)].clone()).sum()
}

/// The factor `α` with `a = α b`, given that such a factor exists.
fn proportionality(a: &[Rational], b: &[Rational]) -> Rational {
    match b.iter().position(|v| !v.is_zero()) {
        Some(j) => &a[j] / &b[j],
        None => Rational::zero(),
    }
}

fn failure(prep: &Prepared, note: &str) -> SubproblemOutcome {
    SubproblemOutcome::NumericFailure {
        diagnostics: Diagnostics {
            solver: "barrier".into(),
            note: Some(format!("{note} (face order {})", prep.s)),
            ..Diagnostics::default()
        },
    }
}

fn failure_from(run: &Run, name: &str) -> SubproblemOutcome {
    let mut diagnostics = run.diagnostics(name);
    diagnostics.note = Some(format!("barrier solver ended with {:?}", run.solution.status));
    SubproblemOutcome::NumericFailure { diagnostics }
}

/// Least squares fit of `g ≈ α a + β c`.
fn least_squares_2(a: &[f64], c: &[f64], g: &[f64]) -> (f64, f64) {
    let m = DMatrix::from_fn(a.len(), 2, |i, j| if j == 0 { a[i] } else { c[i] });
    let rhs = DVector::from_column_slice(g);
    match m.clone().svd(true, true).solve(&rhs, 1e-12) {
        Ok(sol) => (sol[0], sol[1]),
        Err(_) => (0.0, 0.0),
    }
}

/// Face data restricted to an independent set of equations and scaled so
/// that every equation has unit sup-norm.
struct Prepared {
    n: usize,
    r: usize,
    s: usize,
    m: usize,
    /// Equations whose `(L_i, b_i)` form a basis of all of them.
    active: Vec<usize>,
    lower: Vec<SymMatrix>,
    rhs: Vec<Rational>,
    scale: Vec<f64>,
    scaled_lower: Vec<DMatrix<f64>>,
    scaled_rhs: Vec<f64>,
}

struct Run {
    solution: lmi::LmiSolution,
    /// Multipliers in scaled active coordinates.
    y: DVector<f64>,
}

impl Run {
    fn t(&self) -> f64 {
        self.solution.w[self.solution.w.len() - 1]
    }

    fn diagnostics(&self, name: &str) -> Diagnostics {
        Diagnostics {
            solver: format!("barrier/{name}"),
            newton_steps: self.solution.newton_steps,
            objective: Some(self.t()),
            mu: Some(self.solution.mu),
            ..Diagnostics::default()
        }
    }
}

impl Prepared {
    fn new(system: &SdpSystem, face: FaceDescriptor) -> Self {
        let s = face.free_order();
        let all_lower: Vec<SymMatrix> = system.matrices().iter().map(|a| a.trailing_block(face.r)).collect();
        let m = system.equations();
        let feature_count = s * (s + 1) / 2 + 1;
        let features = RatMatrix::from_fn(feature_count, m, |f, i| {
            if f + 1 == feature_count {
                return system.rhs()[i].clone();
            }
            let (row, col) = upper_index(s, f);
            all_lower[i][(row, col)].clone()
        });
        let (_, active) = rref(&features);
        let lower: Vec<SymMatrix> = active.iter().map(|&i| all_lower[i].clone()).collect();
        let rhs: Vec<Rational> = active.iter().map(|&i| system.rhs()[i].clone()).collect();
        let mut scale = Vec::with_capacity(active.len());
        let mut scaled_lower = Vec::with_capacity(active.len());
        let mut scaled_rhs = Vec::with_capacity(active.len());
        for (l, b) in lower.iter().zip(&rhs) {
            let lf = l.to_f64();
            let bf = to_f64(b);
            let size = lf.amax().max(bf.abs());
            let sc = if size > 0.0 { 1.0 / size } else { 1.0 };
            scale.push(sc);
            scaled_lower.push(lf * sc);
            scaled_rhs.push(bf * sc);
        }
        Self {
            n: face.n,
            r: face.r,
            s,
            m,
            active,
            lower,
            rhs,
            scale,
            scaled_lower,
            scaled_rhs,
        }
    }

    /// Exact consistency of `Σ_i rows[k][i] y_i = targets[k]` over active `y`.
    fn consistent(&self, rows: &[Vec<Rational>], targets: &[Rational]) -> bool {
        let mat = RatMatrix::from_fn(rows.len(), self.active.len(), |k, i| rows[k][i].clone());
        solve_any(&mat, targets).is_some()
    }

    /// Maximizes `t` subject to `W̃(ỹ) - tI ⪰ 0`, `|ỹ_i| ≤ radius` and the
    /// linear equations, given in unscaled active coordinates.
    fn solve(&self, rows: &[Vec<Rational>], targets: &[Rational], radius: f64, tol: &ToleranceProfile) -> Option<Run> {
        let a = self.active.len();
        let s = self.s;
        // Rescale the equation coefficients to match ỹ_i = y_i / scale_i.
        let e = DMatrix::from_fn(rows.len(), a, |k, i| to_f64(&rows[k][i]) * self.scale[i]);
        let rhs = DVector::from_iterator(targets.len(), targets.iter().map(to_f64));
        let pinv = e.clone().pseudo_inverse(1e-12).ok()?;
        let y0 = &pinv * &rhs;
        if (&e * &y0 - &rhs).amax() > 1e-9 * rhs.amax().max(1.0) {
            return None;
        }
        let basis = null_basis(&e, &pinv);
        let nb = basis.ncols();
        let radius = radius.max(4.0 * y0.amax() + 1.0);

        let w_of = |v: &DVector<f64>| -> DMatrix<f64> {
            let mut w = DMatrix::zeros(s, s);
            for (vi, l) in v.iter().zip(&self.scaled_lower) {
                if *vi != 0.0 {
                    w += l * *vi;
                }
            }
            w
        };
        let w0 = w_of(&y0);
        let mut coefficients: Vec<DMatrix<f64>> = (0..nb).map(|j| w_of(&basis.column(j).into_owned())).collect();
        coefficients.push(-DMatrix::identity(s, s));
        let mut blocks = vec![LmiBlock {
            constant: w0.clone(),
            coefficients,
        }];
        for i in 0..a {
            for sign in [1.0, -1.0] {
                let mut coeffs: Vec<DMatrix<f64>> =
                    (0..nb).map(|j| DMatrix::from_element(1, 1, -sign * basis[(i, j)])).collect();
                coeffs.push(DMatrix::zeros(1, 1));
                blocks.push(LmiBlock {
                    constant: DMatrix::from_element(1, 1, radius - sign * y0[i]),
                    coefficients: coeffs,
                });
            }
        }
        let mut objective = DVector::zeros(nb + 1);
        objective[nb] = 1.0;
        let problem = Lmi { blocks, objective };
        let mut start = DVector::zeros(nb + 1);
        start[nb] = lmi::min_eigenvalue(&w0) - 1.0;
        let settings = BarrierSettings {
            max_newton_steps: tol.max_iters.max(1) * 4,
            ..BarrierSettings::default()
        };
        let solution = lmi::maximize(&problem, start, &settings);
        let z = solution.w.rows(0, nb).into_owned();
        let y = y0 + &basis * z;
        Some(Run { solution, y })
    }

    fn original_y(&self, run: &Run) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (k, &i) in self.active.iter().enumerate() {
            y[i] = run.y[k] * self.scale[k];
        }
        y
    }

    fn ray(&self, run: &Run, mut diagnostics: Diagnostics) -> SubproblemOutcome {
        let mut w = DMatrix::zeros(self.s, self.s);
        for (yk, l) in run.y.iter().zip(&self.scaled_lower) {
            w += l * *yk;
        }
        diagnostics.conic_margin = Some(lmi::min_eigenvalue(&w));
        SubproblemOutcome::DualRay {
            y: self.original_y(run),
            exact: None,
            diagnostics,
        }
    }

    /// Shared tail of the homogenized and Farkas problems.
    fn homogenized(&self, system: &SdpSystem, radius: f64, tol: &ToleranceProfile, name: &str) -> SubproblemOutcome {
        let rows = vec![self.rhs.clone()];
        let targets = vec![-Rational::one()];
        if !self.consistent(&rows, &targets) {
            // b = 0 on every equation: X = 0 with x0 = 1 solves the system.
            let _ = system;
            return polyhedral::primal(SymMatrix::zeros(self.n), Rational::one(), "right-hand side is zero");
        }
        let Some(run) = self.solve(&rows, &targets, radius, tol) else {
            return failure(self, "affine parametrization failed");
        };
        if !run.solution.usable() {
            return failure_from(&run, name);
        }
        let t = run.t();
        let mut diagnostics = run.diagnostics(name);
        if t >= -tol.rank {
            return self.ray(&run, diagnostics);
        }
        // tr Z = 1 and L̃_i • Z = α b̃_i with α = -t > 0.
        let z = run.solution.duals[0].clone();
        let g: Vec<f64> = self.scaled_lower.iter().map(|l| l.dot(&z)).collect();
        let num: f64 = g.iter().zip(&self.scaled_rhs).map(|(a, b)| a * b).sum();
        let den: f64 = self.scaled_rhs.iter().map(|b| b * b).sum();
        let alpha = if den > 0.0 { num / den } else { -t };
        self.primal(z, alpha, tol, false, &mut diagnostics)
    }

    /// Polishes `(X, x0)` onto `L̃_i • X = b̃_i x0` and checks it.
    fn primal(
        &self,
        x: DMatrix<f64>,
        x0: f64,
        tol: &ToleranceProfile,
        interior: bool,
        diagnostics: &mut Diagnostics,
    ) -> SubproblemOutcome {
        let s = self.s;
        let (mut x, mut x0) = self.polish(x, x0);
        // Alternate with psd clipping to remove small negative eigenvalues
        // left by a dual point that sits on a face.
        if !interior {
            for _ in 0..50 {
                if lmi::min_eigenvalue(&x) >= 0.0 {
                    break;
                }
                let (cx, cx0) = self.polish(clip_psd(&x), x0);
                x = cx;
                x0 = cx0;
            }
        }
        let size = x.trace().abs().max(x0.abs());
        if size > 0.0 && size.is_finite() {
            x /= size;
            x0 /= size;
        }
        let residual = self
            .scaled_lower
            .iter()
            .zip(&self.scaled_rhs)
            .map(|(l, b)| (l.dot(&x) - b * x0).abs())
            .fold(0.0, f64::max);
        let margin = lmi::min_eigenvalue(&x);
        diagnostics.equality_residual = Some(residual);
        diagnostics.conic_margin = Some(margin);
        // A boundary point only decides x0 > 0; the witness built from it is
        // mixed with an interior point and checked again.
        let conic_ok = if interior { margin > tol.pd } else { margin > -1e3 * tol.pd && x0 > tol.pd };
        if !(residual < tol.eq.max(1e-12) * 10.0 && conic_ok) {
            diagnostics.note = Some("primal point failed its float checks".into());
            return SubproblemOutcome::NumericFailure {
                diagnostics: diagnostics.clone(),
            };
        }
        let mut full = DMatrix::zeros(self.n, self.n);
        full.view_mut((self.r, self.r), (s, s)).copy_from(&x);
        SubproblemOutcome::StrictlyFeasible {
            x: full,
            x0,
            exact: None::<ExactPrimal>,
            diagnostics: diagnostics.clone(),
        }
    }

    /// Minimum norm correction onto `{(X, x0) : L̃_i • X - b̃_i x0 = 0}`.
    fn polish(&self, x: DMatrix<f64>, x0: f64) -> (DMatrix<f64>, f64) {
        let s = self.s;
        let a = self.active.len();
        if a == 0 {
            return (x, x0);
        }
        let dim = s * s + 1;
        let mut rows = DMatrix::zeros(a, dim);
        for (k, (l, b)) in self.scaled_lower.iter().zip(&self.scaled_rhs).enumerate() {
            for (idx, v) in l.iter().enumerate() {
                rows[(k, idx)] = *v;
            }
            rows[(k, s * s)] = -b;
        }
        let mut v = DVector::zeros(dim);
        for (idx, val) in x.iter().enumerate() {
            v[idx] = *val;
        }
        v[s * s] = x0;
        let Ok(pinv) = rows.clone().pseudo_inverse(1e-13) else {
            return (x, x0);
        };
        let corrected = &v - pinv * (&rows * &v);
        let mut out = DMatrix::from_column_slice(s, s, &corrected.as_slice()[..s * s]);
        out = (&out + out.transpose()) * 0.5;
        (out, corrected[s * s])
    }
}

/// Nearest psd matrix in the Frobenius norm.
fn clip_psd(x: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = x.clone().symmetric_eigen();
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let out = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    (&out + out.transpose()) * 0.5
}

/// Orthonormal basis of the null space of `e`, using its pseudo-inverse.
fn null_basis(e: &DMatrix<f64>, pinv: &DMatrix<f64>) -> DMatrix<f64> {
    let a = e.ncols();
    let projector = DMatrix::identity(a, a) - pinv * e;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..a {
        let mut v = projector.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-9 {
            basis.push(v / norm);
        }
    }
    if basis.is_empty() {
        DMatrix::zeros(a, 0)
    } else {
        DMatrix::from_columns(&basis)
    }
}

/// Position of the `f`-th entry of the upper triangle in row-major order.
fn upper_index(s: usize, mut f: usize) -> (usize, usize) {
    for row in 0..s {
        let len = s - row;
        if f < len {
            return (row, row + f);
        }
        f -= len;
    }
    unreachable!("feature index out of range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn combine(system: &SdpSystem, y: &[f64], r: usize) -> (DMatrix<f64>, f64) {
        let n = system.order();
        let mut w = DMatrix::zeros(n - r, n - r);
        let mut b = 0.0;
        for ((a, bi), yi) in system.matrices().iter().zip(system.rhs()).zip(y) {
            w += a.trailing_block(r).to_f64() * *yi;
            b += to_f64(bi) * yi;
        }
        (w, b)
    }

    #[test]
    fn strictly_feasible_singleton() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 1]]], &[1]);
        let out = solve_aux(&system, FaceDescriptor::whole(2), &tol());
        let SubproblemOutcome::StrictlyFeasible { x, x0, .. } = out else { panic!("{out:?}") };
        let scale = 1.0 / x0;
        assert!((x[(0, 0)] * scale - 0.5).abs() < 1e-6);
        assert!((x[(1, 1)] * scale - 0.5).abs() < 1e-6);
    }

    #[test]
    fn motivating_system() {
        let system = SdpSystem::from_i64(
            &[&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]],
            &[0, -1],
        );
        // not strictly feasible: e_1 e_1ᵀ is the ray
        let out = solve_aux(&system, FaceDescriptor::whole(3), &tol());
        let SubproblemOutcome::DualRay { y, .. } = &out else { panic!("{out:?}") };
        let (w, b) = combine(&system, y, 0);
        assert!(b.abs() < 1e-8);
        assert!(lmi::min_eigenvalue(&w) > -1e-6);
        // after reducing the first coordinate the ray has bᵀy = -1
        let out = solve_hom(&system, FaceDescriptor::new(3, 1), &tol());
        let SubproblemOutcome::DualRay { y, .. } = &out else { panic!("{out:?}") };
        let (w, b) = combine(&system, y, 1);
        assert!((b + 1.0).abs() < 1e-8);
        assert!(lmi::min_eigenvalue(&w) > -1e-6);
        // no Farkas ray on the whole cone
        let out = solve_farkas(&system, &tol());
        assert!(!out.is_ray(), "{out:?}");
    }

    #[test]
    fn farkas_ray_for_strongly_infeasible_system() {
        let system = SdpSystem::from_i64(
            &[
                &[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]],
                &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]],
                &[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1]],
            ],
            &[0, -1, 1],
        );
        let out = solve_farkas(&system, &tol());
        let SubproblemOutcome::DualRay { y, .. } = &out else { panic!("{out:?}") };
        let (w, b) = combine(&system, y, 0);
        assert!((b + 1.0).abs() < 1e-8);
        assert!(lmi::min_eigenvalue(&w) > -1e-6);
    }

    #[test]
    fn proportional_trace_is_exact() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 1]], &[&[2, 0], &[0, 2]]], &[1, 2]);
        let out = solve_aux(&system, FaceDescriptor::whole(2), &tol());
        let SubproblemOutcome::StrictlyFeasible { exact: Some(p), .. } = out else { panic!() };
        assert_eq!(p.x0, int(2));
    }

    #[test]
    fn feasible_system_has_no_farkas_ray() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 1]]], &[1]);
        assert!(!solve_farkas(&system, &tol()).is_ray());
    }
}
