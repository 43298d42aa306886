use spectra_cert_core::certify::verify_certificate;
use spectra_cert_core::generate::{generate, GenKind, GenSpec};
use spectra_cert_core::reduce::classify_strength;
use spectra_cert_core::{convert, Certificate, ConvertOptions, Strength, ToleranceProfile};

#[test]
fn weakly_infeasible_instances_convert_to_infeasible() {
    for seed in 0..12u64 {
        let n = 3 + (seed % 3) as usize;
        let mut spec = GenSpec::new(GenKind::WeaklyInfeasible, n, 2, seed);
        spec.k = Some(1);
        let (system, truth) = generate(&spec).expect("generator");
        assert!(matches!(truth, Certificate::Infeasible { strength: Strength::Weak, .. }), "seed {seed}");
        let cert = convert(&system, &ConvertOptions::default());
        assert!(matches!(cert, Certificate::Infeasible { .. }), "seed {seed}: {}", cert.verdict());
        assert!(verify_certificate(&system, &cert).accepted());
        let (strength, _, _) = classify_strength(&system, &cert, &ToleranceProfile::default());
        assert_ne!(strength, Strength::Strong, "seed {seed}");
    }
}

#[test]
fn identical_specs_give_identical_instances() {
    for kind in [GenKind::Infeasible, GenKind::Feasible, GenKind::StronglyInfeasible] {
        let spec = GenSpec::new(kind, 4, 3, 99);
        let (a, _) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn scrambling_does_not_change_the_verdict() {
    for seed in 0..10u64 {
        for kind in [GenKind::Infeasible, GenKind::Feasible] {
            let mut spec = GenSpec::new(kind, 4, 3, seed);
            let (scrambled, _) = generate(&spec).unwrap();
            spec.scramble = false;
            let (canonical, _) = generate(&spec).unwrap();
            let a = convert(&scrambled, &ConvertOptions::default());
            let b = convert(&canonical, &ConvertOptions::default());
            assert_eq!(a.verdict(), b.verdict(), "seed {seed}");
            if let (Certificate::Feasible { p: pa, .. }, Certificate::Feasible { p: pb, .. }) = (&a, &b) {
                assert_eq!(pa, pb, "seed {seed}");
            }
        }
    }
}

#[test]
fn ground_truth_certificates_verify() {
    for seed in 0..20u64 {
        for kind in [GenKind::Infeasible, GenKind::Feasible, GenKind::StronglyInfeasible] {
            let spec = GenSpec::new(kind, 2 + (seed % 5) as usize, 1 + (seed % 4) as usize, seed);
            let (system, truth) = generate(&spec).unwrap();
            assert!(verify_certificate(&system, &truth).accepted(), "{kind:?} seed {seed}");
        }
    }
}
