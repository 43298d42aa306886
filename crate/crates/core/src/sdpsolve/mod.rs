//! Floating point solver for the subproblem pairs of the reduction.
//!
//! Every subproblem has the shape "find `y` with `Σ y_i L_i ⪰ 0` on the face
//! plus linear side conditions", where `L_i` is the trailing `(n-r)×(n-r)`
//! block of `A_i`. It is posed as maximizing the smallest eigenvalue `t` of
//! `Σ y_i L_i` and handed to the barrier solver in [`lmi`]. A nonnegative
//! optimum yields a dual ray; a negative optimum yields, through the conic
//! dual, a primal point of the homogenized system. Faces of order at most one
//! are polyhedral and are decided exactly instead.

pub mod lmi;
mod polyhedral;
mod subproblems;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ratmat::{Rational, SymMatrix};

pub use subproblems::{face_blocks, solve_aux, solve_farkas, solve_hom};

/// Numerical thresholds shared by the solver and the rounding ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Equality residual bound.
    pub eq: f64,
    /// Positive definiteness margin.
    pub pd: f64,
    /// Relative eigenvalue cut for the numerical rank of `Σ y_i L_i`.
    pub rank: f64,
    /// Newton step budget per subproblem solve.
    pub max_iters: usize,
    /// Largest denominator tried when rounding float data to rationals.
    pub max_denominator: u64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            eq: 1e-9,
            pd: 1e-9,
            rank: 1e-7,
            max_iters: 200,
            max_denominator: 1_000_000_000_000,
        }
    }
}

/// The face `K = 0 ⊕ S₊^{n-r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceDescriptor {
    pub n: usize,
    pub r: usize,
}

impl FaceDescriptor {
    pub fn new(n: usize, r: usize) -> Self {
        assert!(r <= n, "face offset {r} exceeds order {n}");
        Self { n, r }
    }

    pub fn whole(n: usize) -> Self {
        Self { n, r: 0 }
    }

    /// Order of the free trailing block.
    pub fn free_order(&self) -> usize {
        self.n - self.r
    }
}

/// Solver bookkeeping, serialized into reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver: String,
    pub newton_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conic_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Diagnostics {
    fn exact(note: &str) -> Self {
        Self {
            solver: "exact".into(),
            note: Some(note.into()),
            ..Self::default()
        }
    }
}

/// A primal point `(X, x0)` of the homogenized system known in exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPrimal {
    pub x: SymMatrix,
    pub x0: Rational,
}

#[derive(Clone, Debug)]
pub enum SubproblemOutcome {
    /// A point `(X, x0)` with `A_i • X = b_i x0` and `X ∈ K`; strictly inside
    /// `K` for the auxiliary problem, with `x0 > 0` for the homogenized one.
    /// `x` is the full `n×n` matrix, zero outside the trailing block.
    StrictlyFeasible {
        x: DMatrix<f64>,
        x0: f64,
        exact: Option<ExactPrimal>,
        diagnostics: Diagnostics,
    },
    /// Multipliers `y` for the target dual system, in original coordinates.
    DualRay {
        y: Vec<f64>,
        exact: Option<Vec<Rational>>,
        diagnostics: Diagnostics,
    },
    NumericFailure { diagnostics: Diagnostics },
}

impl SubproblemOutcome {
    pub fn diagnostics(&self) -> &Diagnostics {
        match self {
            Self::StrictlyFeasible { diagnostics, .. }
            | Self::DualRay { diagnostics, .. }
            | Self::NumericFailure { diagnostics } => diagnostics,
        }
    }

    pub fn is_ray(&self) -> bool {
        matches!(self, Self::DualRay { .. })
    }

    pub fn is_strictly_feasible(&self) -> bool {
        matches!(self, Self::StrictlyFeasible { .. })
    }
}
