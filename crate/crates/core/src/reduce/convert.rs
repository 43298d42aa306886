use num_traits::{One, Signed, Zero};

use super::float::reduction_step_float;
use super::rounding::{exact_ray_ok, round_ray};
use super::step::{reduction_step, ReductionState, StepKind};
use super::strength::{classify_strength, depth_zero_ray, linear_ray};
use super::witness::{is_max_rank_solution, max_rank_witness, max_rank_witness_float, PrimalPoint};
use super::{Certificate, ConvertOptions, Mode, Strength};
use crate::error::Error;
use crate::ratmat::{to_f64, Rational, SymMatrix};
use crate::sdpsolve::{solve_aux, solve_hom, Diagnostics, ExactPrimal, FaceDescriptor, SubproblemOutcome};
use crate::system::SdpSystem;

/// Runs the reduction until the system is in staircase form.
///
/// Each round asks whether the homogenized system is strictly feasible over
/// the current face. If not (and the face has order at least two), the dual
/// ray shrinks the face. Otherwise either a ray with `bᵀy = -1` ends the run
/// with an infeasibility certificate, or a positive definite point on the
/// face gives a maximum rank solution.
pub fn convert(system: &SdpSystem, opts: &ConvertOptions) -> Certificate {
    let mut run = Run {
        source: system,
        opts,
        state: ReductionState::new(system.clone(), opts.mode),
        diagnostics: Vec::new(),
    };
    match run.execute() {
        Ok(cert) => cert,
        Err(reason) => run.undecided(reason),
    }
}

struct Run<'a> {
    source: &'a SdpSystem,
    opts: &'a ConvertOptions,
    state: ReductionState,
    diagnostics: Vec<Diagnostics>,
}

impl Run<'_> {
    fn execute(&mut self) -> Result<Certificate, String> {
        let n = self.source.order();
        let m = self.source.equations();
        let tol = self.opts.tolerances;

        if m > 0 && self.opts.hints.steps.is_empty() {
            if let Some(y) = linear_ray(self.source) {
                self.note("exact", "right-hand side outside the span of the data");
                self.state = reduction_step(&self.state, &y, None, StepKind::Final).map_err(|e| e.to_string())?;
                return Ok(self.infeasible());
            }
        }

        for (index, hint) in self.opts.hints.steps.iter().enumerate() {
            if self.state.ell >= m {
                return Err(format!("hint {} has no equation left to reduce", index + 1));
            }
            let (_, beta) = self.state.system.combine(&hint.y);
            let kind = if beta.is_zero() {
                StepKind::Reduce
            } else if beta == -Rational::one() {
                StepKind::Final
            } else {
                return Err(format!("hint {} combines the right-hand side to {beta}, not 0 or -1", index + 1));
            };
            self.state = reduction_step(&self.state, &hint.y, hint.rotation.as_ref(), kind)
                .map_err(|e| format!("hint {}: {e}", index + 1))?;
            if kind == StepKind::Final {
                return Ok(self.infeasible());
            }
        }

        loop {
            let r = self.state.eliminated();
            let s = n - r;
            let ell = self.state.ell;
            if ell == m {
                // Every equation is in staircase form with zero right-hand side.
                let witness = SymMatrix::embed_trailing(&SymMatrix::identity(s), r);
                return Ok(self.feasible(s, witness));
            }
            if let Some(w) = &self.opts.hints.witness {
                if is_max_rank_solution(&self.state, w) {
                    return Ok(self.feasible(s, w.clone()));
                }
            }
            let face = FaceDescriptor::new(n, r);

            // Case 1 test; `strict` is a strictly feasible point when it fails.
            let mut strict: Option<PrimalPoint> = None;
            let last_rhs = &self.state.system.rhs()[m - 1];
            if s >= 2 && ell + 1 == m && !last_rhs.is_zero() {
                // Only the last equation is left and bᵀy = 0 forces y = 0, so
                // (I, tr L_m / b_m) is strictly feasible.
                let lower = self.state.system.matrix(m - 1).trailing_block(r);
                let alpha = (0..s).map(|i| lower[(i, i)].clone()).sum::<Rational>() / last_rhs;
                strict = Some(exact_point(SymMatrix::embed_trailing(&SymMatrix::identity(s), r), alpha));
                self.note("exact", "single remaining equation with nonzero right-hand side");
            } else if s >= 2 {
                match solve_aux(&self.state.system, face, &tol) {
                    SubproblemOutcome::DualRay { y, exact, diagnostics } => {
                        self.diagnostics.push(diagnostics);
                        self.take_step(&y, exact, StepKind::Reduce)?;
                        continue;
                    }
                    SubproblemOutcome::StrictlyFeasible { x, x0, exact, diagnostics } => {
                        self.diagnostics.push(diagnostics);
                        strict = Some(PrimalPoint { x, x0, exact });
                    }
                    SubproblemOutcome::NumericFailure { diagnostics } => {
                        self.diagnostics.push(diagnostics);
                        return Err("auxiliary problem failed numerically".into());
                    }
                }
            }

            // Case 2.
            match solve_hom(&self.state.system, face, &tol) {
                SubproblemOutcome::DualRay { y, exact, diagnostics } => {
                    self.diagnostics.push(diagnostics);
                    self.take_step(&y, exact, StepKind::Final)?;
                    return Ok(self.infeasible());
                }
                SubproblemOutcome::StrictlyFeasible { x, x0, exact, diagnostics } => {
                    self.diagnostics.push(diagnostics);
                    if s == 1 {
                        if let Some(ex) = &exact {
                            if ex.x[(n - 1, n - 1)].is_zero() {
                                // The scalar solution is zero: one more reduction
                                // with a unit multiplier removes the last coordinate.
                                let j = (ell..m)
                                    .find(|&j| !self.state.system.matrix(j)[(n - 1, n - 1)].is_zero())
                                    .ok_or("zero scalar solution without a nonzero coefficient")?;
                                let mut y = vec![Rational::zero(); m];
                                y[j] = self.state.system.matrix(j)[(n - 1, n - 1)].signum();
                                self.state = reduction_step(&self.state, &y, None, StepKind::Reduce)
                                    .map_err(|e| e.to_string())?;
                                continue;
                            }
                        }
                    }
                    let primal = PrimalPoint { x, x0, exact };
                    let witness = match self.opts.mode {
                        Mode::Exact => max_rank_witness(&self.state, &primal, strict.as_ref(), &tol),
                        Mode::Float => max_rank_witness_float(&self.state, &primal, strict.as_ref(), &tol),
                    }
                    .map_err(|e| e.to_string())?;
                    return Ok(self.feasible(s, witness));
                }
                SubproblemOutcome::NumericFailure { diagnostics } => {
                    self.diagnostics.push(diagnostics);
                    return Err("homogenized problem failed numerically".into());
                }
            }
        }
    }

    /// Validates a ray (rounding it in exact mode) and applies the step.
    fn take_step(&mut self, y: &[f64], exact: Option<Vec<Rational>>, kind: StepKind) -> Result<(), String> {
        let r = self.state.eliminated();
        let ell = self.state.ell;
        let target = kind.target();
        let nonzero = kind == StepKind::Reduce;
        let exact = exact.filter(|y| exact_ray_ok(&self.state.system, r, y, &target, nonzero));
        let next = match self.opts.mode {
            Mode::Exact => {
                let y = exact
                    .or_else(|| round_ray(&self.state.system, r, ell, y, &target, nonzero, &self.opts.tolerances))
                    .ok_or_else(|| "no exact ray survived rounding".to_string())?;
                reduction_step(&self.state, &y, None, kind)
            }
            Mode::Float => {
                // A rounded ray is cleaner than the raw solver output when one exists.
                let exact = exact.or_else(|| round_ray(&self.state.system, r, ell, y, &target, nonzero, &self.opts.tolerances));
                let yf: Vec<f64> = match exact {
                    Some(e) => e.iter().map(to_f64).collect(),
                    None => y.to_vec(),
                };
                reduction_step_float(&self.state, &yf, kind, &self.opts.tolerances)
            }
        };
        self.state = next.map_err(|e: Error| e.to_string())?;
        Ok(())
    }

    fn note(&mut self, solver: &str, note: &str) {
        self.diagnostics.push(Diagnostics {
            solver: solver.into(),
            note: Some(note.into()),
            ..Diagnostics::default()
        });
    }

    fn infeasible(&mut self) -> Certificate {
        let k = self.state.ell - 1;
        let staircase = self.state.staircase(k);
        let transcript = self.state.transcript();
        let mut cert = Certificate::Infeasible {
            staircase,
            transcript,
            strength: Strength::WeakUnconfirmed,
            farkas_ray: None,
            diagnostics: Vec::new(),
        };
        let (strength, ray) = if let Some(y) = depth_zero_ray(self.source, &cert) {
            (Strength::Strong, Some(y))
        } else if self.opts.classify_strength {
            let (st, ray, diag) = classify_strength(self.source, &cert, &self.opts.tolerances);
            self.diagnostics.extend(diag);
            (st, ray)
        } else {
            (Strength::WeakUnconfirmed, None)
        };
        if let Certificate::Infeasible {
            strength: s,
            farkas_ray,
            diagnostics,
            ..
        } = &mut cert
        {
            *s = strength;
            *farkas_ray = ray;
            *diagnostics = std::mem::take(&mut self.diagnostics);
        }
        cert
    }

    fn feasible(&mut self, p: usize, witness: SymMatrix) -> Certificate {
        let k = self.state.ell;
        Certificate::Feasible {
            p,
            witness,
            staircase: self.state.staircase(k),
            transcript: self.state.transcript(),
            diagnostics: std::mem::take(&mut self.diagnostics),
        }
    }

    fn undecided(&mut self, reason: String) -> Certificate {
        let k = self.state.ell;
        let progress = (k > 0).then(|| (self.state.staircase(k), self.state.transcript()));
        Certificate::Undecided {
            reason,
            diagnostics: std::mem::take(&mut self.diagnostics),
            progress,
        }
    }
}

fn exact_point(x: SymMatrix, x0: Rational) -> PrimalPoint {
    PrimalPoint {
        x: x.to_f64(),
        x0: to_f64(&x0),
        exact: Some(ExactPrimal { x, x0 }),
    }
}
