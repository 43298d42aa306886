//! The conversion algorithm: repeated reduction steps until the system is in
//! staircase form, ending with an infeasibility certificate or a maximum rank
//! solution.

mod convert;
mod float;
mod rounding;
mod step;
mod strength;
mod witness;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::ratmat::{RatMatrix, Rational, SymMatrix};
use crate::sdpsolve::{Diagnostics, ToleranceProfile};
use crate::system::SdpSystem;

pub use convert::convert;
pub use rounding::round_ray;
pub use step::{apply_eros, reduction_step, ReductionState, StepKind};
pub use strength::{classify_strength, farkas_obstructed};
pub use witness::max_rank_witness;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every step is carried out and checked in rational arithmetic.
    #[default]
    Exact,
    /// Steps are computed in floating point; results are checked with tolerances.
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockStyle {
    Identity,
    PositiveDiagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    /// A ray `y` with `Σ y_i A_i ⪰ 0`, `bᵀy = -1` was verified exactly.
    Strong,
    /// No such ray was found by a solve that completed normally.
    Weak,
    /// No ray was found, but the search itself failed numerically.
    WeakUnconfirmed,
}

/// Row operations `T` and rotation `V` with `A'_i = Vᵀ(Σ_j T_ij A_j)V`, `b' = Tb`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub t: RatMatrix,
    pub v: RatMatrix,
    pub mode: Mode,
}

impl Transcript {
    pub fn identity(m: usize, n: usize, mode: Mode) -> Self {
        Self {
            t: RatMatrix::identity(m),
            v: RatMatrix::identity(n),
            mode,
        }
    }

    pub fn apply(&self, source: &SdpSystem) -> crate::Result<SdpSystem> {
        source.transform(&self.t, &self.v)
    }

    /// `V X' Vᵀ`, the source solution corresponding to a reformulated one.
    pub fn pull_back(&self, x: &SymMatrix) -> SymMatrix {
        let vt = self.v.transpose();
        crate::ratmat::congruence_unchecked(x, &vt)
    }

    /// `Tᵀ y'`: multipliers on the source equations producing the same
    /// combination as `y'` on the reformulated ones (before rotation).
    pub fn pull_back_multipliers(&self, y: &[Rational]) -> Vec<Rational> {
        self.t.transpose().mul_vec(y).expect("multiplier length matches T")
    }
}

/// A reformulated system with the block sizes of its staircase.
///
/// In the infeasible variant `block_sizes` has `k + 1` entries, the last one
/// being `r_{k+1} ≥ 0`; in the feasible variant it has `k` entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseForm {
    pub system: SdpSystem,
    pub k: usize,
    pub block_sizes: Vec<usize>,
    pub block_style: BlockStyle,
}

impl StaircaseForm {
    /// Infers the block style from the diagonal blocks of the leading equations.
    pub fn new(system: SdpSystem, k: usize, block_sizes: Vec<usize>) -> Self {
        let block_style = detect_style(&system, &block_sizes);
        Self {
            system,
            k,
            block_sizes,
            block_style,
        }
    }

    /// `r_1 + … + r_k`.
    pub fn eliminated(&self) -> usize {
        self.block_sizes.iter().take(self.k).sum()
    }
}

fn detect_style(system: &SdpSystem, block_sizes: &[usize]) -> BlockStyle {
    let mut offset = 0;
    for (i, &r) in block_sizes.iter().enumerate() {
        if i >= system.equations() || offset + r > system.order() {
            break;
        }
        let a = system.matrix(i);
        if (offset..offset + r).any(|j| !a[(j, j)].is_one()) {
            return BlockStyle::PositiveDiagonal;
        }
        offset += r;
    }
    BlockStyle::Identity
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Infeasible {
        staircase: StaircaseForm,
        transcript: Transcript,
        strength: Strength,
        /// Exactly verified multipliers for `Σ y_i A_i ⪰ 0`, `bᵀy = -1` on the source.
        farkas_ray: Option<Vec<Rational>>,
        diagnostics: Vec<Diagnostics>,
    },
    Feasible {
        p: usize,
        /// Maximum rank solution of the reformulated system.
        witness: SymMatrix,
        staircase: StaircaseForm,
        transcript: Transcript,
        diagnostics: Vec<Diagnostics>,
    },
    Undecided {
        reason: String,
        diagnostics: Vec<Diagnostics>,
        /// The partial reformulation reached before giving up.
        progress: Option<(StaircaseForm, Transcript)>,
    },
}

impl Certificate {
    pub fn verdict(&self) -> &'static str {
        match self {
            Self::Infeasible { .. } => "infeasible",
            Self::Feasible { .. } => "feasible",
            Self::Undecided { .. } => "undecided",
        }
    }

    pub fn staircase(&self) -> Option<&StaircaseForm> {
        match self {
            Self::Infeasible { staircase, .. } | Self::Feasible { staircase, .. } => Some(staircase),
            Self::Undecided { .. } => None,
        }
    }

    pub fn transcript(&self) -> Option<&Transcript> {
        match self {
            Self::Infeasible { transcript, .. } | Self::Feasible { transcript, .. } => Some(transcript),
            Self::Undecided { .. } => None,
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostics] {
        match self {
            Self::Infeasible { diagnostics, .. }
            | Self::Feasible { diagnostics, .. }
            | Self::Undecided { diagnostics, .. } => diagnostics,
        }
    }
}

/// One externally supplied reduction step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintStep {
    #[serde(with = "crate::ratmat::serde_rational_vec")]
    pub y: Vec<Rational>,
    /// Either the full `n×n` rotation of the step or the `(n-r)×(n-r)` block `Q`
    /// of `diag(I_r, Q)`. Computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<RatMatrix>,
}

/// Reduction steps to replay before the solver takes over, plus an optional
/// maximum rank solution of the final reformulation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hints {
    #[serde(default)]
    pub steps: Vec<HintStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SymMatrix>,
}

#[derive(Clone, Debug)]
pub struct ConvertOptions {
    pub mode: Mode,
    pub tolerances: ToleranceProfile,
    pub hints: Hints,
    /// Run the Farkas solve for infeasible results.
    pub classify_strength: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            tolerances: ToleranceProfile::default(),
            hints: Hints::default(),
            classify_strength: true,
        }
    }
}

impl ConvertOptions {
    pub fn with_hints(hints: Hints) -> Self {
        Self {
            hints,
            ..Self::default()
        }
    }
}

/// Eigendecomposition of the symmetric part of a float matrix.
pub(crate) fn float_spectrum(m: &nalgebra::DMatrix<f64>) -> nalgebra::SymmetricEigen<f64, nalgebra::Dyn> {
    if m.nrows() == 0 {
        return nalgebra::SymmetricEigen {
            eigenvectors: nalgebra::DMatrix::zeros(0, 0),
            eigenvalues: nalgebra::DVector::zeros(0),
        };
    }
    let sym = (m + m.transpose()) * 0.5;
    nalgebra::SymmetricEigen::new(sym)
}

pub(crate) fn minus_one() -> Rational {
    -Rational::one()
}
