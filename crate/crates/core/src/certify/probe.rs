//! Float demonstration of strong duality on the reduced system.
//!
//! The reduced system replaces `X ⪰ 0` by `X ∈ 0 ⊕ S₊^p`. For an objective
//! `C` the primal is `min C • X` over it and the dual is
//! `max bᵀy  s.t.  C - Σ y_i A'_i ∈ (0 ⊕ S₊^p)*`, i.e. the trailing `p×p` block
//! of the slack is psd. Both are solved numerically; the gap is reported but
//! proves nothing.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ratmat::{to_f64, RatMatrix, Rational, SymMatrix};
use crate::reduce::StaircaseForm;
use crate::system::SdpSystem;
use crate::sdpsolve::lmi::{maximize, min_eigenvalue, BarrierSettings, Lmi, LmiBlock, LmiSolution, LmiStatus};
use crate::sdpsolve::ToleranceProfile;

pub const PROBE_LABEL: &str = "float demonstration, not an exact proof";

const BOX_RADIUS: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status", content = "detail")]
pub enum ProbeStatus {
    Solved,
    /// The primal objective is unbounded below on the reduced system.
    Unbounded,
    NumericFailure(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualityProbe {
    pub c: SymMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Smallest eigenvalue of the dual slack on the reduced block.
    pub dual_slack_min_eig: f64,
    pub status: ProbeStatus,
    pub label: String,
}

impl DualityProbe {
    fn failed(c: &SymMatrix, status: ProbeStatus) -> Self {
        Self {
            c: c.clone(),
            primal_value: f64::NAN,
            dual_value: f64::NAN,
            gap: f64::NAN,
            dual_slack_min_eig: f64::NAN,
            status,
            label: PROBE_LABEL.into(),
        }
    }
}

/// Solves the reduced primal and its dual for objective `c` and reports both
/// values and the gap.
pub fn duality_probe(form: &StaircaseForm, p: usize, c: &SymMatrix, tol: &ToleranceProfile) -> DualityProbe {
    let system = &form.system;
    let n = system.order();
    if p > n || c.order() != n {
        return DualityProbe::failed(c, ProbeStatus::NumericFailure("objective or rank does not fit the system".into()));
    }
    let offset = n - p;
    let lower: Vec<DMatrix<f64>> = system.matrices().iter().map(|a| a.trailing_block(offset).to_f64()).collect();
    let b: Vec<f64> = system.rhs().iter().map(to_f64).collect();
    let c_low = c.trailing_block(offset).to_f64();

    if p == 0 {
        // Only X = 0; the dual is maximized by y = 0 when b = 0.
        let status = if b.iter().all(|v| *v == 0.0) {
            ProbeStatus::Solved
        } else {
            ProbeStatus::NumericFailure("reduced system is infeasible".into())
        };
        return DualityProbe {
            c: c.clone(),
            primal_value: 0.0,
            dual_value: 0.0,
            gap: 0.0,
            dual_slack_min_eig: f64::INFINITY,
            status,
            label: PROBE_LABEL.into(),
        };
    }

    let basis = sym_basis(p);
    let d = basis.len();
    let m = lower.len();
    let e = DMatrix::from_fn(m, d, |i, j| lower[i].dot(&basis[j]));
    let scale_rows = DVector::from_fn(m, |i, _| {
        let s = lower[i].amax().max(b[i].abs());
        if s > 0.0 { 1.0 / s } else { 1.0 }
    });
    let es = DMatrix::from_fn(m, d, |i, j| e[(i, j)] * scale_rows[i]);
    let bs = DVector::from_fn(m, |i, _| b[i] * scale_rows[i]);
    let svd = es.clone().svd(true, true);
    let cut = 1e-10 * svd.singular_values.amax().max(1.0);
    let Ok(particular) = svd.solve(&bs, cut) else {
        return DualityProbe::failed(c, ProbeStatus::NumericFailure("least squares failed".into()));
    };
    if (&es * &particular - &bs).amax() > 1e-8 {
        return DualityProbe::failed(c, ProbeStatus::NumericFailure("reduced system is inconsistent".into()));
    }
    let null = null_space(&es, cut);
    let directions: Vec<DMatrix<f64>> = null.iter().map(|v| combine(&basis, v)).collect();
    let x_part = combine(&basis, &particular);

    let settings = BarrierSettings {
        max_newton_steps: 4 * tol.max_iters,
        ..BarrierSettings::default()
    };

    let Some(interior) = interior_point(&x_part, &directions, tol, &settings) else {
        return DualityProbe::failed(c, ProbeStatus::NumericFailure("no interior point on the reduced face".into()));
    };

    // Phase two: minimize C • X over X = X₁ + Σ z_j N_j ⪰ 0 with |z_j| ≤ R.
    // If the optimum moves when R grows tenfold the objective is unbounded.
    let k = directions.len();
    let objective = DVector::from_fn(k, |j, _| -c_low.dot(&directions[j]));
    let (x, z) = if objective.amax() <= 1e-12 * c_low.amax().max(1.0) {
        // C is constant on the face, so C lies in the span of the L_i.
        (interior, DMatrix::zeros(p, p))
    } else {
        let sol = minimize(&interior, &directions, &objective, BOX_RADIUS, &settings);
        if !sol.usable() {
            return DualityProbe::failed(c, ProbeStatus::NumericFailure(format!("barrier method stopped: {:?}", sol.status)));
        }
        if sol.w.amax() > 0.1 * BOX_RADIUS {
            let wider = minimize(&interior, &directions, &objective, 10.0 * BOX_RADIUS, &settings);
            let drop = wider.objective - sol.objective;
            if wider.status == LmiStatus::Unbounded || drop > 1e-6 * sol.objective.abs().max(1.0) {
                return DualityProbe {
                    primal_value: f64::NEG_INFINITY,
                    ..DualityProbe::failed(c, ProbeStatus::Unbounded)
                };
            }
        }
        let x = &interior + combine_mats(&directions, sol.w.as_slice());
        (x, sol.duals[0].clone())
    };
    let primal_value = c_low.dot(&x);

    // Dual multipliers: C - Z = Σ y_i L_i in least squares over all entries.
    let target = &c_low - &z;
    let lhs = DMatrix::from_fn(p * p, m, |f, i| lower[i][(f / p, f % p)]);
    let rhs = DVector::from_fn(p * p, |f, _| target[(f / p, f % p)]);
    let Ok(y) = lhs.clone().svd(true, true).solve(&rhs, 1e-12 * lhs.amax().max(1.0)) else {
        return DualityProbe::failed(c, ProbeStatus::NumericFailure("dual recovery failed".into()));
    };
    let dual_value: f64 = y.iter().zip(&b).map(|(yi, bi)| yi * bi).sum();
    let mut slack = c_low.clone();
    for (yi, li) in y.iter().zip(&lower) {
        slack -= li * *yi;
    }
    DualityProbe {
        c: c.clone(),
        primal_value,
        dual_value,
        gap: (primal_value - dual_value).abs(),
        dual_slack_min_eig: min_eigenvalue(&slack),
        status: ProbeStatus::Solved,
        label: PROBE_LABEL.into(),
    }
}

/// Seeded objective `C = Σ y_i A_i + GᵀG` with small integer `y` and `G`.
/// It is dual feasible by construction, so the reduced primal is bounded.
pub fn random_objective(system: &SdpSystem, seed: u64) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = system.order();
    let y: Vec<Rational> = (0..system.equations())
        .map(|_| Rational::from_integer(rng.random_range(-3i64..=3).into()))
        .collect();
    let g = RatMatrix::from_fn(n, n, |_, _| Rational::from_integer(rng.random_range(-2i64..=2).into()));
    let gram = g.transpose().mul(&g).expect("square factors");
    let gram = SymMatrix::new(gram).expect("a Gram matrix is symmetric");
    SymMatrix::combination(n, &y, system.matrices())
        .add(&gram)
        .expect("orders match")
}

/// A point with `X ≻ 0` on the face. Maximizes the smallest eigenvalue, capped
/// at one, under a trace bound that grows until the face is reached.
fn interior_point(
    x_part: &DMatrix<f64>,
    directions: &[DMatrix<f64>],
    tol: &ToleranceProfile,
    settings: &BarrierSettings,
) -> Option<DMatrix<f64>> {
    let k = directions.len();
    let p = x_part.nrows();
    let base = x_part.trace().abs();
    for exponent in [1, 3, 5, 7] {
        let cap = base + 10f64.powi(exponent);
        let mut coeffs: Vec<DMatrix<f64>> = directions.to_vec();
        coeffs.push(-DMatrix::identity(p, p));
        let mut trace_coeffs: Vec<DMatrix<f64>> =
            directions.iter().map(|d| DMatrix::from_element(1, 1, -d.trace())).collect();
        trace_coeffs.push(DMatrix::zeros(1, 1));
        let blocks = vec![
            LmiBlock {
                constant: x_part.clone(),
                coefficients: coeffs,
            },
            scalar_block(k + 1, k, -1.0, 1.0),
            LmiBlock {
                constant: DMatrix::from_element(1, 1, cap - x_part.trace()),
                coefficients: trace_coeffs,
            },
        ];
        let mut objective = DVector::zeros(k + 1);
        objective[k] = 1.0;
        let mut start = DVector::zeros(k + 1);
        start[k] = min_eigenvalue(x_part).min(0.0) - 1.0;
        let sol = maximize(&Lmi { blocks, objective }, start, settings);
        if sol.objective > tol.pd {
            return Some(x_part + combine_mats(directions, sol.w.rows(0, k).as_slice()));
        }
    }
    None
}

/// Maximizes `objective · z` over `interior + Σ z_j N_j ⪰ 0`, `|z_j| ≤ radius`.
fn minimize(
    interior: &DMatrix<f64>,
    directions: &[DMatrix<f64>],
    objective: &DVector<f64>,
    radius: f64,
    settings: &BarrierSettings,
) -> LmiSolution {
    let k = directions.len();
    let mut blocks = vec![LmiBlock {
        constant: interior.clone(),
        coefficients: directions.to_vec(),
    }];
    for j in 0..k {
        blocks.push(scalar_block(k, j, 1.0, radius));
        blocks.push(scalar_block(k, j, -1.0, radius));
    }
    maximize(
        &Lmi {
            blocks,
            objective: objective.clone(),
        },
        DVector::zeros(k),
        settings,
    )
}

/// `E_uu` and `E_uv + E_vu` for `u < v`.
fn sym_basis(p: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for u in 0..p {
        for v in u..p {
            let mut e = DMatrix::zeros(p, p);
            e[(u, v)] = 1.0;
            e[(v, u)] = 1.0;
            out.push(e);
        }
    }
    out
}

fn combine(basis: &[DMatrix<f64>], coeffs: &DVector<f64>) -> DMatrix<f64> {
    combine_mats(basis, coeffs.as_slice())
}

fn combine_mats(mats: &[DMatrix<f64>], coeffs: &[f64]) -> DMatrix<f64> {
    let p = mats.first().map_or(0, |m| m.nrows());
    let mut out = DMatrix::zeros(p, p);
    for (m, c) in mats.iter().zip(coeffs) {
        out += m * *c;
    }
    out
}

/// Orthonormal basis of the null space of `a` from its full SVD.
fn null_space(a: &DMatrix<f64>, cut: f64) -> Vec<DVector<f64>> {
    let d = a.ncols();
    if a.nrows() == 0 {
        return (0..d).map(|j| DVector::from_fn(d, |i, _| if i == j { 1.0 } else { 0.0 })).collect();
    }
    // Pad to a square matrix so the SVD returns all right singular vectors.
    let mut padded = DMatrix::zeros(a.nrows().max(d), d);
    padded.view_mut((0, 0), (a.nrows(), d)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    (0..d)
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| vt.row(i).transpose())
        .collect()
}

/// The 1×1 block `constant + sign * w_index`.
fn scalar_block(dim: usize, index: usize, sign: f64, constant: f64) -> LmiBlock {
    let coefficients = (0..dim)
        .map(|j| DMatrix::from_element(1, 1, if j == index { sign } else { 0.0 }))
        .collect();
    LmiBlock {
        constant: DMatrix::from_element(1, 1, constant),
        coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    /// `X₁₁ = 1` over 2×2 psd matrices, already reduced.
    fn single_equation() -> StaircaseForm {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]]], &[1]);
        StaircaseForm::new(system, 0, vec![])
    }

    #[test]
    fn trace_objective_closes_the_gap() {
        let c = SymMatrix::identity(2);
        let probe = duality_probe(&single_equation(), 2, &c, &ToleranceProfile::default());
        assert_eq!(probe.status, ProbeStatus::Solved);
        assert!((probe.primal_value - 1.0).abs() < 1e-6, "{}", probe.primal_value);
        assert!(probe.gap < 1e-6);
        assert!(probe.dual_slack_min_eig > -1e-6);
    }

    #[test]
    fn unbounded_objective_is_reported() {
        let c = SymMatrix::diagonal(&[int(0), int(-1)]);
        let probe = duality_probe(&single_equation(), 2, &c, &ToleranceProfile::default());
        assert_eq!(probe.status, ProbeStatus::Unbounded);
    }

    #[test]
    fn random_objectives_are_seeded() {
        let system = single_equation().system;
        assert_eq!(random_objective(&system, 4), random_objective(&system, 4));
        assert_ne!(random_objective(&system, 4), random_objective(&system, 5));
    }
}
