//! Elementary reformulations of semidefinite feasibility systems.
//!
//! A system `A_i • X = b_i, X ⪰ 0` is rewritten with elementary row operations
//! and a single congruence `X ↦ Vᵀ X V` into a staircase form from which either
//! infeasibility or the maximum rank of a feasible solution can be read off and
//! checked in exact rational arithmetic.
//!
//! The crate is split the same way the pipeline is:
//!
//! - [`ratmat`]: exact rational dense linear algebra,
//! - [`sdpsolve`]: the floating point subproblem solver,
//! - [`reduce`]: the conversion algorithm producing certificates,
//! - [`certify`]: independent verification of certificates,
//! - [`generate`]: instance factories built from staircase forms.

pub mod certify;
pub mod error;
pub mod generate;
pub mod ratmat;
pub mod reduce;
pub mod sdpsolve;
pub mod system;

pub use error::{Error, Result};
pub use ratmat::{RatMatrix, Rational, SymMatrix};
pub use reduce::{
    convert, BlockStyle, Certificate, ConvertOptions, Hints, Mode, StaircaseForm, Strength,
    Transcript,
};
pub use sdpsolve::{FaceDescriptor, SubproblemOutcome, ToleranceProfile};
pub use system::SdpSystem;
