//! Path-following barrier method for block linear matrix inequalities.
//!
//! Solves `maximize cᵀw  s.t.  F_b(w) = F_b0 + Σ_j w_j F_bj ⪰ 0` for every
//! block `b`, starting from a strictly feasible `w`. Each centering step
//! maximizes `cᵀw/μ + Σ_b log det F_b(w)` by damped Newton; `μ` then shrinks
//! geometrically. At a centered point `Z_b = μ F_b(w)⁻¹` is feasible for the
//! conic dual `min Σ F_b0 • Z_b  s.t.  Σ_b F_bj • Z_b = -c_j, Z_b ⪰ 0` and the
//! duality gap is `μ Σ_b size_b`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub constant: DMatrix<f64>,
    pub coefficients: Vec<DMatrix<f64>>,
}

impl LmiBlock {
    pub fn size(&self) -> usize {
        self.constant.nrows()
    }

    pub fn evaluate(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let mut f = self.constant.clone();
        for (wj, fj) in w.iter().zip(&self.coefficients) {
            if *wj != 0.0 {
                f += fj * *wj;
            }
        }
        f
    }
}

#[derive(Clone, Debug)]
pub struct Lmi {
    pub blocks: Vec<LmiBlock>,
    pub objective: DVector<f64>,
}

impl Lmi {
    pub fn dimension(&self) -> usize {
        self.objective.len()
    }

    /// Cholesky factors of every block, or `None` if some block is not pd.
    fn factor(&self, w: &DVector<f64>) -> Option<Vec<Cholesky<f64, Dyn>>> {
        self.blocks
            .iter()
            .map(|b| Cholesky::new(b.evaluate(w)))
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BarrierSettings {
    pub initial_mu: f64,
    pub shrink: f64,
    /// Stop once `μ` falls below this value.
    pub final_mu: f64,
    /// Budget of Newton steps across all centering rounds.
    pub max_newton_steps: usize,
    /// Iterates with a larger sup-norm are reported as unbounded.
    pub divergence_bound: f64,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self {
            initial_mu: 1.0,
            shrink: 0.2,
            final_mu: 1e-11,
            max_newton_steps: 200,
            divergence_bound: 1e9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LmiStatus {
    /// Reached `final_mu` with a centered iterate.
    Converged,
    /// Newton stopped making progress at a small `μ`; the iterate is usable.
    Stalled,
    IterationLimit,
    Unbounded,
    /// The starting point was not strictly feasible.
    InfeasibleStart,
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub w: DVector<f64>,
    pub status: LmiStatus,
    pub mu: f64,
    pub newton_steps: usize,
    pub objective: f64,
    /// `μ F_b(w)⁻¹` for each block.
    pub duals: Vec<DMatrix<f64>>,
}

impl LmiSolution {
    pub fn usable(&self) -> bool {
        matches!(self.status, LmiStatus::Converged | LmiStatus::Stalled)
    }
}

/// Below this `μ` a stalled Newton iteration is accepted as converged.
const STALL_ACCEPT_MU: f64 = 1e-7;

pub fn maximize(lmi: &Lmi, start: DVector<f64>, settings: &BarrierSettings) -> LmiSolution {
    let mut w = start;
    let mut mu = settings.initial_mu;
    let mut steps = 0usize;

    let finish = |w: DVector<f64>, status: LmiStatus, mu: f64, steps: usize| {
        let duals = match lmi.factor(&w) {
            Some(chols) => chols.into_iter().map(|c| c.inverse() * mu).collect(),
            None => lmi.blocks.iter().map(|b| DMatrix::zeros(b.size(), b.size())).collect(),
        };
        let objective = lmi.objective.dot(&w);
        LmiSolution {
            w,
            status,
            mu,
            newton_steps: steps,
            objective,
            duals,
        }
    };

    if lmi.factor(&w).is_none() {
        return finish(w, LmiStatus::InfeasibleStart, mu, steps);
    }

    loop {
        match center(lmi, &mut w, mu, settings, &mut steps) {
            CenterResult::Centered => {}
            CenterResult::Diverged => return finish(w, LmiStatus::Unbounded, mu, steps),
            CenterResult::Budget => {
                let status = if mu <= STALL_ACCEPT_MU {
                    LmiStatus::Stalled
                } else {
                    LmiStatus::IterationLimit
                };
                return finish(w, status, mu, steps);
            }
            CenterResult::Stuck => {
                let status = if mu <= STALL_ACCEPT_MU {
                    LmiStatus::Stalled
                } else {
                    LmiStatus::IterationLimit
                };
                return finish(w, status, mu, steps);
            }
        }
        if mu <= settings.final_mu {
            return finish(w, LmiStatus::Converged, mu, steps);
        }
        mu = (mu * settings.shrink).max(settings.final_mu);
    }
}

enum CenterResult {
    Centered,
    Diverged,
    Budget,
    Stuck,
}

fn center(
    lmi: &Lmi,
    w: &mut DVector<f64>,
    mu: f64,
    settings: &BarrierSettings,
    steps: &mut usize,
) -> CenterResult {
    let d = lmi.dimension();
    if d == 0 {
        return CenterResult::Centered;
    }
    // Set once a full step is taken at a small decrement; one more step then
    // lands at the float noise floor.
    let mut polishing = false;
    let mut previous = f64::INFINITY;
    loop {
        if w.amax() > settings.divergence_bound {
            return CenterResult::Diverged;
        }
        if *steps >= settings.max_newton_steps {
            return CenterResult::Budget;
        }
        let Some(chols) = lmi.factor(w) else {
            return CenterResult::Stuck;
        };
        let mut grad = &lmi.objective / mu;
        let mut hess = DMatrix::<f64>::zeros(d, d);
        for (block, chol) in lmi.blocks.iter().zip(&chols) {
            let solved: Vec<DMatrix<f64>> = block.coefficients.iter().map(|f| chol.solve(f)).collect();
            for j in 0..d {
                grad[j] += solved[j].trace();
                for k in 0..=j {
                    let v = trace_of_product(&solved[j], &solved[k]);
                    hess[(j, k)] += v;
                    if j != k {
                        hess[(k, j)] += v;
                    }
                }
            }
        }
        let Some(step) = solve_scaled(&hess, &grad) else {
            return CenterResult::Stuck;
        };
        let decrement = grad.dot(&step).max(0.0).sqrt();
        *steps += 1;
        // Newton converges quadratically here, so a small decrement that no
        // longer halves is rounding noise.
        if decrement < 1e-9 || (decrement < 1e-3 && decrement > 0.5 * previous) {
            return CenterResult::Centered;
        }
        previous = decrement;
        let mut alpha = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
        let base = barrier_value(lmi, w, mu, &chols);
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &*w + &step * alpha;
            if let Some(tc) = lmi.factor(&trial) {
                let value = barrier_value(lmi, &trial, mu, &tc);
                if value >= base - 1e-12 * base.abs().max(1.0) {
                    *w = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return CenterResult::Stuck;
        }
        if polishing {
            return CenterResult::Centered;
        }
        polishing = decrement < 1e-5 && alpha == 1.0;
    }
}

fn barrier_value(lmi: &Lmi, w: &DVector<f64>, mu: f64, chols: &[Cholesky<f64, Dyn>]) -> f64 {
    let logdet: f64 = chols
        .iter()
        .map(|c| 2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>())
        .sum();
    lmi.objective.dot(w) / mu + logdet
}

fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Solves `H x = g` for a psd `H` with Jacobi scaling and a small ridge when
/// the scaled matrix is numerically singular.
fn solve_scaled(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let d = h.nrows();
    let scale = DVector::from_fn(d, |i, _| {
        let v = h[(i, i)];
        if v > 0.0 && v.is_finite() {
            1.0 / v.sqrt()
        } else {
            1.0
        }
    });
    let mut hs = DMatrix::from_fn(d, d, |i, j| h[(i, j)] * scale[i] * scale[j]);
    let gs = g.component_mul(&scale);
    for ridge in [0.0, 1e-14, 1e-12, 1e-10] {
        if ridge > 0.0 {
            for i in 0..d {
                hs[(i, i)] += ridge;
            }
        }
        if let Some(ch) = Cholesky::new(hs.clone()) {
            let x = ch.solve(&gs);
            if x.iter().all(|v| v.is_finite()) {
                return Some(x.component_mul(&scale));
            }
        }
    }
    None
}

/// Smallest eigenvalue of a symmetric matrix (`+∞` for the empty matrix).
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_block(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_row_slice(values))
    }

    #[test]
    fn maximizes_min_eigenvalue_under_trace_constraint() {
        // maximize t s.t. diag(1 + z, 1 - z) - t I ⪰ 0; optimum z = 0, t = 1.
        let lmi = Lmi {
            blocks: vec![LmiBlock {
                constant: diag_block(&[1.0, 1.0]),
                coefficients: vec![diag_block(&[1.0, -1.0]), diag_block(&[-1.0, -1.0])],
            }],
            objective: DVector::from_row_slice(&[0.0, 1.0]),
        };
        let sol = maximize(&lmi, DVector::from_row_slice(&[0.3, -2.0]), &BarrierSettings::default());
        assert!(sol.usable(), "{:?}", sol.status);
        assert!((sol.w[1] - 1.0).abs() < 1e-8);
        assert!(sol.w[0].abs() < 1e-6);
        // dual: trace of Z equals the objective coefficient of t
        assert!((sol.duals[0].trace() - 1.0).abs() < 1e-6, "{} {:?}", sol.duals[0].trace(), sol.status);
    }

    #[test]
    fn detects_unbounded_objective() {
        // maximize w s.t. [w] ⪰ 0
        let lmi = Lmi {
            blocks: vec![LmiBlock {
                constant: diag_block(&[0.0]),
                coefficients: vec![diag_block(&[1.0])],
            }],
            objective: DVector::from_row_slice(&[1.0]),
        };
        let sol = maximize(&lmi, DVector::from_row_slice(&[1.0]), &BarrierSettings::default());
        assert_eq!(sol.status, LmiStatus::Unbounded);
    }

    #[test]
    fn rejects_infeasible_start() {
        let lmi = Lmi {
            blocks: vec![LmiBlock {
                constant: diag_block(&[-1.0]),
                coefficients: vec![diag_block(&[1.0])],
            }],
            objective: DVector::from_row_slice(&[-1.0]),
        };
        let sol = maximize(&lmi, DVector::from_row_slice(&[0.0]), &BarrierSettings::default());
        assert_eq!(sol.status, LmiStatus::InfeasibleStart);
    }

    #[test]
    fn singular_optimum_is_approached() {
        // maximize -w2 s.t. [[w1, 1], [1, w2]] ⪰ 0, 0 <= w1 <= 10:
        // optimum w1 = 10, w2 = 1/10.
        let e = |i: usize, j: usize| {
            let mut m = DMatrix::zeros(2, 2);
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
            m
        };
        let mut offdiag = DMatrix::zeros(2, 2);
        offdiag[(0, 1)] = 1.0;
        offdiag[(1, 0)] = 1.0;
        let lmi = Lmi {
            blocks: vec![
                LmiBlock {
                    constant: offdiag,
                    coefficients: vec![e(0, 0), e(1, 1)],
                },
                LmiBlock {
                    constant: diag_block(&[10.0]),
                    coefficients: vec![diag_block(&[-1.0]), diag_block(&[0.0])],
                },
            ],
            objective: DVector::from_row_slice(&[0.0, -1.0]),
        };
        let sol = maximize(&lmi, DVector::from_row_slice(&[5.0, 5.0]), &BarrierSettings::default());
        assert!(sol.usable());
        assert!((sol.w[1] - 0.1).abs() < 1e-7, "{}", sol.w[1]);
    }
}
