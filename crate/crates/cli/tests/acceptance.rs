//! End-to-end acceptance suite. Every criterion prints one line
//! `criterion N (name): PASS|FAIL ...` and fails its test on FAIL.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use spectra_cert_cli::{InstanceFile, ReportFile};
use spectra_cert_core::certify::{
    check_max_rank, duality_probe, random_objective, replay_infeasibility, verify_certificate, verify_farkas_ray,
    ProbeStatus, PROBE_LABEL,
};
use spectra_cert_core::generate::{generate, GenKind, GenSpec};
use spectra_cert_core::ratmat::is_psd;
use spectra_cert_core::reduce::classify_strength;
use spectra_cert_core::{
    convert, Certificate, ConvertOptions, Hints, RatMatrix, Rational, SdpSystem, StaircaseForm, Strength, SymMatrix,
    ToleranceProfile,
};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn load(name: &str) -> (SdpSystem, Hints) {
    let file = InstanceFile::load(&examples().join(name)).expect("example parses");
    let hints = file.hints.clone().unwrap_or_default();
    (file.to_system().expect("example is valid"), hints)
}

fn finish(n: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit: Option<Duration>) {
    let within = limit.is_none_or(|l| elapsed <= l);
    let ok = pass && within;
    let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0?}", l));
    println!(
        "criterion {n} ({name}): {} {detail} [{:.3?}{budget}]",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    assert!(pass, "criterion {n} failed: {detail}");
    assert!(within, "criterion {n} exceeded its time limit: {elapsed:?}");
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spectra-cert"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn hinted_infeasible_final() -> SdpSystem {
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

fn hinted_feasible_final() -> SdpSystem {
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

#[test]
fn criterion_1_motivating_system() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let instance = examples().join("motivating.json");
    let (code, _) = cli(&["analyze", instance.to_str().unwrap(), "--out", report_path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&report_path).unwrap_or_default();
    let report = ReportFile::parse(&text, "report").ok();
    let shape = report
        .as_ref()
        .map(|r| (r.verdict.as_str(), r.k, r.block_sizes.clone(), r.strength));
    let analyzed = code == 3 && shape == Some(("infeasible", Some(1), vec![1, 1], Some(Strength::Weak)));
    let handwritten = examples().join("motivating.report.json");
    let (verify_code, _) = cli(&["verify", instance.to_str().unwrap(), handwritten.to_str().unwrap()]);
    finish(
        1,
        "trivially infeasible system",
        analyzed && verify_code == 0,
        &format!("analyze exit {code} {shape:?}; handwritten certificate verify exit {verify_code}"),
        start.elapsed(),
        Some(Duration::from_secs(1)),
    );
}

#[test]
fn criterion_2_hinted_infeasible_golden_run() {
    let (system, hints) = load("ex1.json");
    let start = Instant::now();
    let cert = convert(&system, &ConvertOptions::with_hints(hints));
    let elapsed = start.elapsed();
    let form = cert.staircase();
    let matches = matches!(cert, Certificate::Infeasible { .. })
        && form.is_some_and(|f| f.system == hinted_infeasible_final() && f.k == 2);
    let rhs: Vec<String> = form.map_or(vec![], |f| f.system.rhs().iter().map(|r| r.to_string()).collect());
    let verified = verify_certificate(&system, &cert).accepted();
    finish(
        2,
        "hinted infeasible golden run",
        matches && verified,
        &format!("final data matches: {matches}, b' = ({}), verified: {verified}", rhs.join(",")),
        elapsed,
        Some(Duration::from_secs(1)),
    );
}

#[test]
fn criterion_3_autonomous_infeasible_run() {
    let (system, _) = load("ex1.json");
    let start = Instant::now();
    let cert = convert(&system, &ConvertOptions::default());
    let report = verify_certificate(&system, &cert);
    let elapsed = start.elapsed();
    let ok = matches!(cert, Certificate::Infeasible { .. }) && report.accepted() && report.checked_exactly;
    let shape = cert.staircase().map(|f| (f.k, f.block_sizes.clone()));
    finish(
        3,
        "autonomous infeasible run",
        ok,
        &format!("verdict {} (k, r) = {shape:?}, exact replay and transcript accepted: {ok}", cert.verdict()),
        elapsed,
        Some(Duration::from_secs(10)),
    );
}

#[test]
fn criterion_4_feasible_golden_and_autonomous_runs() {
    let (system, hints) = load("ex2.json");
    let start = Instant::now();
    let hinted = convert(&system, &ConvertOptions::with_hints(hints));
    let witness = SymMatrix::diagonal(&[q(0), q(0), q(1), q(1)]);
    let golden = match &hinted {
        Certificate::Feasible { p, staircase, .. } => {
            *p == 2 && staircase.system == hinted_feasible_final() && check_max_rank(staircase, &witness, 2).accepted()
        }
        _ => false,
    };
    let auto = convert(&system, &ConvertOptions::default());
    let auto_p = match &auto {
        Certificate::Feasible { p, .. } => Some(*p),
        _ => None,
    };
    let auto_ok = auto_p == Some(2) && verify_certificate(&system, &auto).accepted();
    finish(
        4,
        "feasible golden and autonomous runs",
        golden && auto_ok,
        &format!("hinted final data and diag(0,0,1,1) accepted: {golden}; autonomous p = {auto_p:?}, verified: {auto_ok}"),
        start.elapsed(),
        Some(Duration::from_secs(10)),
    );
}

#[test]
fn criterion_5_strong_infeasibility_despite_depth() {
    let (system, _) = load("sec3.json");
    let start = Instant::now();
    let cert = convert(&system, &ConvertOptions::default());
    let (strength, ray, _) = classify_strength(&system, &cert, &ToleranceProfile::default());
    let ray_ok = ray.as_ref().is_some_and(|y| verify_farkas_ray(&system, y).accepted());
    let given = verify_farkas_ray(&system, &[q(4), q(2), q(1)]).accepted();
    let k = cert.staircase().map(|f| f.k);
    finish(
        5,
        "strong infeasibility with a deeper staircase",
        matches!(cert, Certificate::Infeasible { .. }) && strength == Strength::Strong && ray_ok && given,
        &format!("k = {k:?}, strength {strength:?}, own ray verified: {ray_ok}, y = (4,2,1) accepted: {given}"),
        start.elapsed(),
        Some(Duration::from_secs(5)),
    );
}

fn round_trip(kind: GenKind) -> (usize, usize, usize) {
    let (mut ok, mut undecided, mut wrong) = (0, 0, 0);
    for i in 0..100u64 {
        let mut spec = GenSpec::new(kind, 2 + (i % 5) as usize, 1 + ((i / 5) % 6) as usize, 50_000 + i);
        spec.entry_bound = 3 + (i % 8) as u32;
        let (system, truth) = generate(&spec).expect("generator");
        let cert = convert(&system, &ConvertOptions::default());
        let exact = {
            let r = verify_certificate(&system, &cert);
            r.accepted() && r.checked_exactly
        };
        match (&truth, &cert) {
            (_, Certificate::Undecided { .. }) => undecided += 1,
            (Certificate::Infeasible { .. }, Certificate::Infeasible { .. }) if exact => ok += 1,
            (Certificate::Feasible { p: a, .. }, Certificate::Feasible { p: b, .. }) if exact && a == b => ok += 1,
            _ => wrong += 1,
        }
    }
    (ok, undecided, wrong)
}

#[test]
fn criterion_6_generator_round_trip() {
    let start = Instant::now();
    let inf = round_trip(GenKind::Infeasible);
    let feas = round_trip(GenKind::Feasible);
    let pass = inf.0 >= 95 && feas.0 >= 95 && inf.2 == 0 && feas.2 == 0;
    finish(
        6,
        "generator round trip",
        pass,
        &format!(
            "infeasible {}/100 ({} undecided, {} wrong); feasible {}/100 ({} undecided, {} wrong)",
            inf.0, inf.1, inf.2, feas.0, feas.1, feas.2
        ),
        start.elapsed(),
        Some(Duration::from_secs(300)),
    );
}

/// Determinant by cofactor expansion, independent of the library.
fn det(m: &[Vec<Rational>]) -> Rational {
    match m.len() {
        0 => q(1),
        1 => m[0][0].clone(),
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<Rational>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect()).collect();
                let term = &m[0][c] * det(&minor);
                if c % 2 == 0 { term } else { -term }
            })
            .sum(),
    }
}

/// Psd if and only if every principal minor is nonnegative.
fn minor_oracle(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<Rational>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect();
        det(&sub) >= q(0)
    })
}

#[test]
fn criterion_7_is_psd_oracle() {
    let start = Instant::now();
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for n in 1..=3usize {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let total = 5usize.pow(slots.len() as u32);
        for code in 0..total {
            let mut m = vec![vec![q(0); n]; n];
            let mut c = code;
            for &(i, j) in &slots {
                let v = q((c % 5) as i64 - 2);
                c /= 5;
                m[i][j] = v.clone();
                m[j][i] = v;
            }
            let sym = SymMatrix::new(RatMatrix::from_rows(m.clone()).unwrap()).unwrap();
            if is_psd(&sym) != minor_oracle(&m) {
                mismatches += 1;
            }
            checked += 1;
        }
    }
    finish(
        7,
        "is_psd against the principal minor oracle",
        mismatches == 0,
        &format!("{checked} matrices, {mismatches} mismatches"),
        start.elapsed(),
        None,
    );
}

fn with_entry(form: &StaircaseForm, eq: usize, p: usize, r: usize, value: Rational) -> StaircaseForm {
    let system = &form.system;
    let mats = system
        .matrices()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if i != eq {
                return a.clone();
            }
            let mut m = a.as_matrix().clone();
            m[(p, r)] = value.clone();
            m[(r, p)] = value.clone();
            SymMatrix::new(m).unwrap()
        })
        .collect();
    let mutated = SdpSystem::new(system.order(), mats, system.rhs().to_vec()).unwrap();
    StaircaseForm::new(mutated, form.k, form.block_sizes.clone())
}

fn with_rhs(form: &StaircaseForm, eq: usize, value: Rational) -> StaircaseForm {
    let system = &form.system;
    let mut rhs = system.rhs().to_vec();
    rhs[eq] = value;
    let mutated = SdpSystem::new(system.order(), system.matrices().to_vec(), rhs).unwrap();
    StaircaseForm::new(mutated, form.k, form.block_sizes.clone())
}

/// Every single-entry change to the structural part of an infeasible staircase.
fn mutations(form: &StaircaseForm) -> Vec<StaircaseForm> {
    let n = form.system.order();
    let mut out = Vec::new();
    let mut offset = 0;
    for eq in 0..=form.k {
        let size = form.block_sizes[eq];
        let a = form.system.matrix(eq);
        for p in offset..n {
            for r in p..n {
                let in_block = p == r && p < offset + size;
                if in_block {
                    out.push(with_entry(form, eq, p, r, q(0)));
                    out.push(with_entry(form, eq, p, r, -a[(p, r)].clone()));
                } else {
                    let bumped = if a[(p, r)] == q(0) { q(1) } else { q(0) };
                    out.push(with_entry(form, eq, p, r, bumped));
                }
            }
        }
        if eq < form.k {
            out.push(with_rhs(form, eq, q(1)));
        } else {
            out.push(with_rhs(form, eq, q(0)));
            out.push(with_rhs(form, eq, q(1)));
        }
        offset += size;
    }
    out
}

#[test]
fn criterion_8_mutation_suite() {
    let start = Instant::now();
    let (mut certificates, mut tried, mut false_accepts) = (0usize, 0usize, 0usize);
    let mut seed = 70_000u64;
    while certificates < 50 && seed < 70_500 {
        let i = seed - 70_000;
        let spec = GenSpec::new(GenKind::Infeasible, 2 + (i % 4) as usize, 2 + (i % 3) as usize, seed);
        seed += 1;
        let (system, _) = generate(&spec).expect("generator");
        let cert = convert(&system, &ConvertOptions::default());
        if !verify_certificate(&system, &cert).accepted() {
            continue;
        }
        let Certificate::Infeasible { staircase, .. } = &cert else { continue };
        certificates += 1;
        for mutated in mutations(staircase) {
            tried += 1;
            if replay_infeasibility(&mutated).accepted() {
                false_accepts += 1;
            }
        }
    }
    finish(
        8,
        "structural mutation suite",
        certificates == 50 && false_accepts == 0,
        &format!("{certificates} accepted certificates, {tried} mutations, {false_accepts} false accepts"),
        start.elapsed(),
        None,
    );
}

#[test]
fn criterion_9_duality_probe() {
    let (system, hints) = load("ex2.json");
    let start = Instant::now();
    let cert = convert(&system, &ConvertOptions::with_hints(hints));
    let Certificate::Feasible { p, staircase, .. } = &cert else {
        finish(9, "duality probe", false, "reduced system unavailable", start.elapsed(), None);
        return;
    };
    let tol = ToleranceProfile::default();
    let probes: Vec<_> = (0..10)
        .map(|seed| duality_probe(staircase, *p, &random_objective(&staircase.system, seed), &tol))
        .collect();
    let worst = probes.iter().map(|pr| pr.gap).fold(0.0, f64::max);
    let ok = probes
        .iter()
        .all(|pr| pr.status == ProbeStatus::Solved && pr.gap < 1e-6 && pr.label == PROBE_LABEL);
    finish(
        9,
        "duality probe",
        ok,
        &format!("10 objectives, largest gap {worst:.2e} ({PROBE_LABEL})"),
        start.elapsed(),
        None,
    );
}
