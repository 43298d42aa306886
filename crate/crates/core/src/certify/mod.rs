//! Independent verification of certificates.
//!
//! Nothing here consults a conversion run: a certificate is the reformulated
//! system with its block sizes, optionally the transcript linking it to the
//! source, and a witness matrix for the feasible case.

mod probe;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::ratmat::{determinant, format_rational, is_psd, rank, Rational, SymMatrix};
use crate::reduce::{BlockStyle, Certificate, Mode, StaircaseForm, Transcript};
use crate::system::SdpSystem;

pub use probe::{duality_probe, random_objective, DualityProbe, ProbeStatus, PROBE_LABEL};

/// Relative tolerance for float-mode transcripts. Float steps snap their new
/// equation to the exact pattern when it is within `1e-6`, so this must not
/// be tighter than that.
pub const FLOAT_TRANSCRIPT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub location: String,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub failures: Vec<Failure>,
    pub checked_exactly: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_style: Option<BlockStyle>,
}

impl VerificationReport {
    fn new() -> Self {
        Self {
            verdict: Verdict::Accepted,
            failures: Vec::new(),
            checked_exactly: true,
            block_style: None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    fn fail(&mut self, check: &str, location: impl Into<String>, witness: impl Into<String>) {
        self.verdict = Verdict::Rejected;
        self.failures.push(Failure {
            check: check.into(),
            location: location.into(),
            witness: witness.into(),
        });
    }

    /// Folds `other` into `self`; the result is exact only if both are.
    pub fn merge(&mut self, other: VerificationReport) {
        if !other.accepted() {
            self.verdict = Verdict::Rejected;
        }
        self.failures.extend(other.failures);
        self.checked_exactly &= other.checked_exactly;
        self.block_style = self.block_style.or(other.block_style);
    }
}

/// Checks the block shape of a staircase form exactly.
///
/// For `i ≤ k` (and `i = k+1` in the infeasible variant) equation `i` must
/// have a positive diagonal block of order `r_i` at offset `r_1 + … + r_{i-1}`
/// and zeros in the rest of the trailing block from that offset on. The first
/// `k` right-hand sides must be zero and, when infeasible, `b'_{k+1} = -1`.
pub fn check_staircase(form: &StaircaseForm, infeasible_variant: bool) -> VerificationReport {
    let mut report = VerificationReport::new();
    let system = &form.system;
    let n = system.order();
    let m = system.equations();
    let k = form.k;
    let shaped = if infeasible_variant { k + 1 } else { k };

    if form.block_sizes.len() != shaped {
        report.fail(
            "block-count",
            "block sizes",
            format!("{} sizes for depth {k}, expected {shaped}", form.block_sizes.len()),
        );
        return report;
    }
    if shaped > m {
        report.fail("block-count", "equations", format!("depth needs {shaped} equations, system has {m}"));
        return report;
    }
    let total: usize = form.block_sizes.iter().sum();
    if total > n {
        report.fail("block-count", "block sizes", format!("blocks sum to {total} > n = {n}"));
        return report;
    }
    if let Some(i) = form.block_sizes.iter().take(k).position(|&r| r == 0) {
        report.fail("positive-block-size", format!("r_{}", i + 1), "0");
    }

    let mut identity = true;
    let mut offset = 0;
    for (i, &r) in form.block_sizes.iter().enumerate() {
        let a = system.matrix(i);
        let eq = i + 1;
        for p in offset..n {
            for q in p..n {
                let v = &a[(p, q)];
                let on_block = p == q && p < offset + r;
                if on_block {
                    if !v.is_positive() {
                        report.fail("positive-diagonal", format!("A'_{eq}[{},{}]", p + 1, q + 1), format_rational(v));
                    } else if !v.is_one() {
                        identity = false;
                    }
                } else if !v.is_zero() {
                    report.fail("forced-zero", format!("A'_{eq}[{},{}]", p + 1, q + 1), format_rational(v));
                }
            }
        }
        let b = &system.rhs()[i];
        if i < k && !b.is_zero() {
            report.fail("zero-rhs", format!("b'_{eq}"), format_rational(b));
        }
        if i == k && infeasible_variant && *b != -Rational::one() {
            report.fail("minus-one-rhs", format!("b'_{eq}"), format_rational(b));
        }
        offset += r;
    }
    report.block_style = Some(if identity {
        BlockStyle::Identity
    } else {
        BlockStyle::PositiveDiagonal
    });
    report
}

/// Replays the infeasibility argument on an infeasible staircase form.
///
/// Equations `1..k` force the leading `r_1 + … + r_k` rows and columns of a
/// psd solution to vanish; what remains of `A'_{k+1}` is psd, so
/// `A'_{k+1} • X ≥ 0`, which contradicts `b'_{k+1} = -1`.
pub fn replay_infeasibility(form: &StaircaseForm) -> VerificationReport {
    let mut report = check_staircase(form, true);
    if form.block_sizes.len() != form.k + 1 || form.k >= form.system.equations() {
        return report;
    }
    let reduced = form.system.matrix(form.k).trailing_block(form.eliminated());
    if !is_psd(&reduced) {
        report.fail(
            "reduced-psd",
            format!("A'_{} after deleting {} leading rows", form.k + 1, form.eliminated()),
            "not positive semidefinite",
        );
    }
    report
}

/// Checks `A'_i = Vᵀ(Σ_j T_ij A_j)V`, `b' = Tb` and the invertibility of `T`
/// and `V`. Exact for exact transcripts; float transcripts are compared with
/// a relative tolerance of [`FLOAT_TRANSCRIPT_TOL`].
pub fn verify_transcript(source: &SdpSystem, result: &SdpSystem, transcript: &Transcript) -> VerificationReport {
    let mut report = VerificationReport::new();
    let (m, n) = (source.equations(), source.order());
    let (t, v) = (&transcript.t, &transcript.v);
    if result.equations() != m || result.order() != n {
        report.fail("dimensions", "result", format!("{}x{} system, expected {m}x{n}", result.equations(), result.order()));
        return report;
    }
    if t.rows() != m || t.cols() != m || v.rows() != n || v.cols() != n {
        report.fail("dimensions", "transcript", format!("T is {}x{}, V is {}x{}", t.rows(), t.cols(), v.rows(), v.cols()));
        return report;
    }
    for (name, mat) in [("T", t), ("V", v)] {
        if determinant(mat).map_or(true, |d| d.is_zero()) {
            report.fail("invertible", name, "determinant 0");
        }
    }
    let expected = match transcript.apply(source) {
        Ok(s) => s,
        Err(e) => {
            report.fail("apply", "transcript", e.to_string());
            return report;
        }
    };
    match transcript.mode {
        Mode::Exact => {
            for i in 0..m {
                let (got, want) = (result.matrix(i), expected.matrix(i));
                if let Some((p, q)) = first_difference(got, want) {
                    report.fail(
                        "matrix-identity",
                        format!("A'_{}[{},{}]", i + 1, p + 1, q + 1),
                        format!("{} vs {}", format_rational(&got[(p, q)]), format_rational(&want[(p, q)])),
                    );
                }
                if result.rhs()[i] != expected.rhs()[i] {
                    report.fail(
                        "rhs-identity",
                        format!("b'_{}", i + 1),
                        format!("{} vs {}", format_rational(&result.rhs()[i]), format_rational(&expected.rhs()[i])),
                    );
                }
            }
        }
        Mode::Float => {
            report.checked_exactly = false;
            let scale = expected
                .matrices()
                .iter()
                .map(|a| a.to_f64().amax())
                .chain(expected.rhs().iter().map(|b| crate::ratmat::to_f64(b).abs()))
                .fold(1.0, f64::max);
            let limit = FLOAT_TRANSCRIPT_TOL * scale;
            for i in 0..m {
                let diff = (result.matrix(i).to_f64() - expected.matrix(i).to_f64()).amax();
                if diff > limit {
                    report.fail("matrix-identity", format!("A'_{}", i + 1), format!("deviation {diff:e}"));
                }
                let d = (crate::ratmat::to_f64(&result.rhs()[i]) - crate::ratmat::to_f64(&expected.rhs()[i])).abs();
                if d > limit {
                    report.fail("rhs-identity", format!("b'_{}", i + 1), format!("deviation {d:e}"));
                }
            }
        }
    }
    report
}

fn first_difference(a: &SymMatrix, b: &SymMatrix) -> Option<(usize, usize)> {
    let n = a.order();
    (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).find(|&(p, q)| a[(p, q)] != b[(p, q)])
}

/// Checks that `x` is a maximum rank solution of the feasible staircase form:
/// `x` solves the system, is psd, has rank `p`, and the staircase eliminates
/// exactly `n - p` rows and columns.
pub fn check_max_rank(form: &StaircaseForm, x: &SymMatrix, p: usize) -> VerificationReport {
    max_rank_report(form, x, p, Mode::Exact)
}

/// [`check_max_rank`] for a witness produced in float mode: the equations,
/// psd-ness and rank of `x` are checked with a relative tolerance of
/// [`FLOAT_TRANSCRIPT_TOL`]; the staircase shape is still checked exactly.
pub fn check_max_rank_toleranced(form: &StaircaseForm, x: &SymMatrix, p: usize) -> VerificationReport {
    max_rank_report(form, x, p, Mode::Float)
}

fn max_rank_report(form: &StaircaseForm, x: &SymMatrix, p: usize, mode: Mode) -> VerificationReport {
    let mut report = check_staircase(form, false);
    let n = form.system.order();
    if x.order() != n {
        report.fail("witness-order", "X", format!("order {}, expected {n}", x.order()));
        return report;
    }
    let rk = match mode {
        Mode::Exact => {
            for (i, res) in form.system.residuals(x).iter().enumerate() {
                if !res.is_zero() {
                    report.fail("witness-feasible", format!("equation {}", i + 1), format!("residual {}", format_rational(res)));
                }
            }
            if !is_psd(x) {
                report.fail("witness-psd", "X", "not positive semidefinite");
            }
            rank(x.as_matrix())
        }
        Mode::Float => {
            report.checked_exactly = false;
            let xf = x.to_f64();
            let xscale = xf.amax().max(1.0);
            for (i, (a, b)) in form.system.matrices().iter().zip(form.system.rhs()).enumerate() {
                let af = a.to_f64();
                let bf = crate::ratmat::to_f64(b);
                let res = (af.dot(&xf) - bf).abs();
                if res > FLOAT_TRANSCRIPT_TOL * af.amax().max(bf.abs()).max(1.0) * xscale {
                    report.fail("witness-feasible", format!("equation {}", i + 1), format!("residual {res:e}"));
                }
            }
            let eig = if n == 0 { Vec::new() } else { nalgebra::SymmetricEigen::new(xf).eigenvalues.iter().copied().collect() };
            let cut = FLOAT_TRANSCRIPT_TOL * xscale;
            if eig.iter().any(|&v| v < -cut) {
                report.fail("witness-psd", "X", "not positive semidefinite within tolerance");
            }
            eig.iter().filter(|&&v| v > cut).count()
        }
    };
    if rk != p {
        report.fail("witness-rank", "X", format!("rank {rk}, claimed {p}"));
    }
    let eliminated: usize = form.block_sizes.iter().sum();
    if eliminated + p != n {
        report.fail("rank-bound", "block sizes", format!("blocks sum to {eliminated}, expected n - p = {}", n as i64 - p as i64));
    }
    report
}

/// Exact check of `Σ y_i A_i ⪰ 0` and `bᵀy = -1`.
pub fn verify_farkas_ray(system: &SdpSystem, y: &[Rational]) -> VerificationReport {
    let mut report = VerificationReport::new();
    if y.len() != system.equations() {
        report.fail("dimensions", "y", format!("{} entries, expected {}", y.len(), system.equations()));
        return report;
    }
    let (w, beta) = system.combine(y);
    if beta != -Rational::one() {
        report.fail("ray-rhs", "Σ y_i b_i", format_rational(&beta));
    }
    if !is_psd(&w) {
        report.fail("ray-psd", "Σ y_i A_i", "not positive semidefinite");
    }
    report
}

/// Re-checks a certificate against its source: the form's shape and
/// argument, the transcript, and for strong infeasibility the recorded ray.
pub fn verify_certificate(source: &SdpSystem, cert: &Certificate) -> VerificationReport {
    match cert {
        Certificate::Infeasible {
            staircase,
            transcript,
            farkas_ray,
            ..
        } => {
            let mut report = replay_infeasibility(staircase);
            report.merge(verify_transcript(source, &staircase.system, transcript));
            if let Some(y) = farkas_ray {
                report.merge(verify_farkas_ray(source, y));
            }
            report
        }
        Certificate::Feasible {
            p,
            witness,
            staircase,
            transcript,
            ..
        } => {
            let mut report = max_rank_report(staircase, witness, *p, transcript.mode);
            report.merge(verify_transcript(source, &staircase.system, transcript));
            report
        }
        Certificate::Undecided { reason, .. } => {
            let mut report = VerificationReport::new();
            report.fail("decided", "certificate", reason.clone());
            report
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    fn motivating_form() -> StaircaseForm {
        let system = SdpSystem::from_i64(
            &[&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]],
            &[0, -1],
        );
        StaircaseForm::new(system, 1, vec![1, 1])
    }

    #[test]
    fn motivating_system_is_its_own_certificate() {
        let form = motivating_form();
        let report = replay_infeasibility(&form);
        assert!(report.accepted(), "{report:?}");
        assert_eq!(report.block_style, Some(BlockStyle::Identity));
        let id = Transcript::identity(2, 3, Mode::Exact);
        assert!(verify_transcript(&form.system, &form.system, &id).accepted());
    }

    #[test]
    fn wrong_block_count_and_rhs_are_rejected() {
        let mut form = motivating_form();
        form.block_sizes = vec![1];
        assert!(!check_staircase(&form, true).accepted());
        let mut form = motivating_form();
        let mats = form.system.matrices().to_vec();
        form.system = SdpSystem::new(3, mats, vec![int(0), int(1)]).unwrap();
        let report = check_staircase(&form, true);
        assert_eq!(report.failures[0].check, "minus-one-rhs");
    }

    #[test]
    fn reduced_block_must_be_psd() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 0]], &[&[0, 0], &[0, -1]]], &[0, -1]);
        let form = StaircaseForm::new(system, 1, vec![1, 0]);
        let report = replay_infeasibility(&form);
        assert!(report.failures.iter().any(|f| f.check == "reduced-psd"));
    }

    #[test]
    fn farkas_ray_checks() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 1]]], &[-1]);
        assert!(verify_farkas_ray(&system, &[int(1)]).accepted());
        assert!(!verify_farkas_ray(&system, &[int(0)]).accepted());
        assert!(!verify_farkas_ray(&system, &[int(-1)]).accepted());
    }

    #[test]
    fn max_rank_of_trivial_system() {
        let system = SdpSystem::from_i64(&[&[&[1, 0], &[0, 1]]], &[2]);
        let form = StaircaseForm::new(system, 0, vec![]);
        let x = SymMatrix::identity(2);
        assert!(check_max_rank(&form, &x, 2).accepted());
        assert!(!check_max_rank(&form, &x, 1).accepted());
    }
}
