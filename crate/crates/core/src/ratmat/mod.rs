//! Exact rational dense linear algebra.
//!
//! Everything here works on [`num_rational::BigRational`] entries, which are
//! normalized after every operation. Matrices are small and dense.

mod elim;
mod ldlt;
mod matrix;
mod rational;

pub use elim::{determinant, inverse, max_abs, nullspace, project_affine, rank, rref, solve_any};
pub use ldlt::{
    congruence, congruence_unchecked, inertia, is_pd, is_psd, ldlt, psd_block_diagonalize,
    BlockDiagonalization, Inertia, LdltFactorization,
};
pub use matrix::{RatMatrix, SymMatrix};
pub use rational::{
    format_rational, frac, from_f64_exact, int, parse_rational, rationalize, serde_rational,
    serde_rational_opt, serde_rational_vec, to_f64, Rational,
};
