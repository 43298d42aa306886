//! Fixtures shared by the benchmarks.

use spectra_cert_core::generate::{gen_feasible, gen_infeasible, GenKind, GenSpec};
use spectra_cert_core::SdpSystem;

/// Seeded infeasible instances of order `n` with `m` equations.
pub fn infeasible_suite(n: usize, m: usize, count: u64) -> Vec<SdpSystem> {
    (0..count)
        .map(|seed| {
            let spec = GenSpec::new(GenKind::Infeasible, n, m, 1000 + seed);
            gen_infeasible(&spec).expect("generator").0
        })
        .collect()
}

/// Seeded feasible instances whose maximum rank is `p`.
pub fn feasible_suite(n: usize, m: usize, p: usize, count: u64) -> Vec<SdpSystem> {
    (0..count)
        .map(|seed| {
            let mut spec = GenSpec::new(GenKind::Feasible, n, m, 2000 + seed);
            spec.p = Some(p);
            gen_feasible(&spec).expect("generator").0
        })
        .collect()
}
