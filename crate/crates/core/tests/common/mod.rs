#![allow(dead_code)]

use spectra_cert_core::SdpSystem;

pub fn example_1_1() -> SdpSystem {
    SdpSystem::from_i64(
        &[
            &[&[2, 0, 0, 1], &[0, 3, 0, -1], &[0, 0, 4, 2], &[1, -1, 2, 0]],
            &[&[-1, 2, 1, -2], &[2, 3, 3, 1], &[1, 3, 4, -3], &[-2, 1, -3, 3]],
            &[&[-1, 1, -2, 0], &[1, -2, 0, 2], &[-2, 0, -3, -2], &[0, 2, -2, -1]],
            &[&[0, 0, 1, 0], &[0, 1, 0, 0], &[1, 0, -1, 0], &[0, 0, 0, 1]],
            &[&[0, -1, 0, 0], &[-1, 0, 0, -1], &[0, 0, 1, 1], &[0, -1, 1, 0]],
            &[&[-1, 0, 0, -1], &[0, 0, 1, 0], &[0, 1, 0, -1], &[-1, 0, -1, 1]],
        ],
        &[0, 6, -3, 2, 1, 3],
    )
}

pub fn example_2_1() -> SdpSystem {
    SdpSystem::from_i64(
        &[
            &[&[-2, 2, 7, -3], &[2, -2, -4, -6], &[7, -4, -15, -7], &[-3, -6, -7, 0]],
            &[&[2, 0, -3, 2], &[0, 4, 6, 4], &[-3, 6, 14, 5], &[2, 4, 5, 0]],
            &[&[2, 0, -3, -1], &[0, -1, -3, 0], &[-3, -3, -3, 2], &[-1, 0, 2, 0]],
            &[&[-1, 1, 4, 2], &[1, 6, 11, 2], &[4, 11, 16, 1], &[2, 2, 1, 0]],
        ],
        &[-3, 2, 1, 0],
    )
}

/// The trivially infeasible 3×3 system with two equations.
pub fn motivating() -> SdpSystem {
    SdpSystem::from_i64(
        &[&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]],
        &[0, -1],
    )
}

/// Strongly infeasible, yet already a depth-one staircase.
pub fn section3() -> SdpSystem {
    SdpSystem::from_i64(
        &[
            &[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]],
            &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]],
            &[&[0, 0, 0], &[0, 1, 0], &[0, 0, 1]],
        ],
        &[0, -1, 1],
    )
}

use spectra_cert_core::reduce::HintStep;
use spectra_cert_core::{Hints, RatMatrix, Rational};

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x.into())).collect()
}

pub fn hint(y: &[i64], rotation: Option<&[&[i64]]>) -> HintStep {
    HintStep {
        y: ints(y),
        rotation: rotation.map(RatMatrix::from_i64),
    }
}

const Q1: &[&[i64]] = &[&[1, -1, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]];
const Q2_FULL: &[&[i64]] = &[&[1, 0, 0, 0], &[0, 1, -2, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]];
const Q2_BLOCK: &[&[i64]] = &[&[1, -2, 0], &[0, 1, 0], &[0, 0, 1]];

/// The three multipliers and two rotations of the worked infeasible example.
pub fn example_1_1_hints() -> Hints {
    Hints {
        steps: vec![
            hint(&[1, -1, -1, -1, -4, 3], Some(Q1)),
            hint(&[0, 1, 1, 0, 3, -2], Some(Q2_BLOCK)),
            hint(&[0, 0, 1, 2, 1, -1], None),
        ],
        witness: None,
    }
}

pub fn example_1_1_final() -> SdpSystem {
    SdpSystem::from_i64(
        &[
            &[&[1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]],
            &[&[0, 0, -1, 0], &[0, 1, 0, 0], &[-1, 0, 0, 0], &[0, 0, 0, 0]],
            &[&[0, 0, 0, 1], &[0, 0, -1, 0], &[0, -1, 0, 0], &[1, 0, 0, 0]],
            &[&[0, 0, 1, 0], &[0, 1, -3, 0], &[1, -3, 7, 0], &[0, 0, 0, 1]],
            &[&[0, -1, 2, 0], &[-1, 2, -4, -1], &[2, -4, 9, 3], &[0, -1, 3, 0]],
            &[&[-1, 1, -2, -1], &[1, -1, 3, 1], &[-2, 3, -8, -3], &[-1, 1, -3, 1]],
        ],
        &[0, 0, -1, 2, 1, 3],
    )
}

/// Both multipliers with full rotations, plus the rank-two solution.
pub fn example_2_1_hints() -> Hints {
    Hints {
        steps: vec![hint(&[1, 2, -1, -1], Some(Q1)), hint(&[0, 1, -2, -1], Some(Q2_FULL))],
        witness: Some(example_2_1_witness()),
    }
}

pub fn example_2_1_witness() -> spectra_cert_core::SymMatrix {
    spectra_cert_core::SymMatrix::diagonal(&ints(&[0, 0, 1, 1]))
}

pub fn example_2_1_final() -> SdpSystem {
    SdpSystem::from_i64(
        &[
            &[&[1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]],
            &[&[-1, 0, -1, 2], &[0, 1, 0, 0], &[-1, 0, 0, 0], &[2, 0, 0, 0]],
            &[&[2, -2, 1, -1], &[-2, 1, -2, 1], &[1, -2, 1, 0], &[-1, 1, 0, 0]],
            &[&[-1, 2, 0, 2], &[2, 3, 1, 0], &[0, 1, 0, 1], &[2, 0, 1, 0]],
        ],
        &[0, 0, 1, 0],
    )
}
