//! Instance factories: sample a staircase form, check it, then hide it
//! behind random row operations and a random rotation.
//!
//! The certificate returned with each instance is the inverse scramble, so
//! it maps the emitted system back onto the sampled form exactly.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::verify_certificate;
use crate::error::{Error, Result};
use crate::ratmat::{inverse, serde_rational_opt, RatMatrix, Rational, SymMatrix};
use crate::reduce::{classify_strength, farkas_obstructed, Certificate, Mode, StaircaseForm, Strength, Transcript};
use crate::sdpsolve::ToleranceProfile;
use crate::system::SdpSystem;

pub const GENERATOR_VERSION: &str = "1";
/// The PRNG behind every seed, recorded in instance metadata.
pub const PRNG_NAME: &str = "chacha8";

const MAX_ATTEMPTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Infeasible,
    Feasible,
    StronglyInfeasible,
    WeaklyInfeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub m: usize,
    /// Staircase depth; sampled when absent.
    #[serde(default)]
    pub k: Option<usize>,
    /// Maximum rank of the feasible kind; sampled when absent.
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub block_sizes: Option<Vec<usize>>,
    /// Bound on numerators and denominators of random entries.
    pub entry_bound: u32,
    pub seed: u64,
    /// Fill the arbitrary blocks of the staircase equations with random
    /// entries; zeros otherwise.
    #[serde(default = "yes")]
    pub fill_arbitrary: bool,
    /// Apply random row operations and a rotation to the sampled form.
    #[serde(default = "yes")]
    pub scramble: bool,
    /// Value for every entry of the block that rules out a Farkas ray in the
    /// weakly infeasible kind; random nonzero when absent.
    #[serde(default, with = "serde_rational_opt", skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Rational>,
}

fn yes() -> bool {
    true
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, m: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            m,
            k: None,
            p: None,
            block_sizes: None,
            entry_bound: 3,
            seed,
            fill_arbitrary: true,
            scramble: true,
            obstruction: None,
        }
    }
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &GenSpec) -> Result<(SdpSystem, Certificate)> {
    match spec.kind {
        GenKind::Infeasible | GenKind::StronglyInfeasible => gen_infeasible(spec),
        GenKind::Feasible => gen_feasible(spec),
        GenKind::WeaklyInfeasible => gen_weakly_infeasible(spec),
    }
}

/// An infeasible system with its staircase certificate. The strongly
/// infeasible kind forces `k = 0`.
pub fn gen_infeasible(spec: &GenSpec) -> Result<(SdpSystem, Certificate)> {
    if !matches!(spec.kind, GenKind::Infeasible | GenKind::StronglyInfeasible) {
        return Err(Error::InvalidSpec("gen_infeasible needs an infeasible kind".into()));
    }
    check_common(spec)?;
    if spec.kind == GenKind::StronglyInfeasible && spec.k.is_some_and(|k| k != 0) {
        return Err(Error::InvalidSpec("strongly infeasible instances have k = 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let k = match spec.kind {
            GenKind::StronglyInfeasible => 0,
            _ => spec.k.unwrap_or_else(|| rng.random_range(0..=(spec.m - 1).min(spec.n))),
        };
        if k + 1 > spec.m || k > spec.n {
            return Err(Error::InvalidSpec(format!("depth {k} does not fit m = {}, n = {}", spec.m, spec.n)));
        }
        let sizes = match &spec.block_sizes {
            Some(s) => s.clone(),
            None => infeasible_sizes(&mut rng, spec.n, k, 0),
        };
        check_infeasible_sizes(&sizes, k, spec.n)?;
        let form = infeasible_form(&mut rng, spec, k, &sizes, None);
        if let Some(out) = finish_infeasible(&mut rng, spec, form, None)? {
            return Ok(out);
        }
    }
    Err(Error::ResampleExhausted { attempts: MAX_ATTEMPTS })
}

/// A feasible system whose maximum rank is `p`, with the rank-`p` witness.
pub fn gen_feasible(spec: &GenSpec) -> Result<(SdpSystem, Certificate)> {
    if spec.kind != GenKind::Feasible {
        return Err(Error::InvalidSpec("gen_feasible needs the feasible kind".into()));
    }
    check_common(spec)?;
    let (n, m) = (spec.n, spec.m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let p = match (spec.p, &spec.block_sizes) {
            (Some(p), _) => p,
            (None, Some(s)) => n.saturating_sub(s.iter().sum()),
            (None, None) => rng.random_range(0..=n),
        };
        if p > n {
            return Err(Error::InvalidSpec(format!("rank {p} exceeds n = {n}")));
        }
        let eliminated = n - p;
        let sizes = match &spec.block_sizes {
            Some(s) => s.clone(),
            None => {
                let min_k = usize::from(eliminated > 0);
                let max_k = eliminated.min(m);
                if min_k > max_k {
                    return Err(Error::InvalidSpec(format!("rank {p} needs at least one of {m} equations")));
                }
                let k = spec.k.unwrap_or_else(|| rng.random_range(min_k..=max_k));
                composition(&mut rng, eliminated, k)?
            }
        };
        let k = sizes.len();
        if spec.k.is_some_and(|want| want != k) || sizes.contains(&0) || sizes.iter().sum::<usize>() != eliminated || k > m {
            return Err(Error::InvalidSpec(format!(
                "block sizes {sizes:?} do not give k = {k} positive blocks summing to n - p = {eliminated} within m = {m}"
            )));
        }

        let mut matrices = Vec::with_capacity(m);
        let mut offset = 0;
        for &r in &sizes {
            matrices.push(staircase_matrix(&mut rng, spec, offset, r));
            offset += r;
        }
        while matrices.len() < m {
            matrices.push(random_sym(&mut rng, n, spec.entry_bound));
        }
        let inner = random_pd(&mut rng, p, spec.entry_bound);
        let x = SymMatrix::embed_trailing(&inner, eliminated);
        let rhs: Vec<Rational> = matrices.iter().map(|a| a.dot(&x)).collect();
        let system = SdpSystem::new(n, matrices, rhs)?;
        let form = StaircaseForm::new(system, k, sizes.clone());

        let (source, transcript) = scramble(&mut rng, spec, &form.system)?;
        let cert = Certificate::Feasible {
            p,
            witness: x,
            staircase: form,
            transcript,
            diagnostics: Vec::new(),
        };
        if verify_certificate(&source, &cert).accepted() {
            return Ok((source, cert));
        }
    }
    Err(Error::ResampleExhausted { attempts: MAX_ATTEMPTS })
}

/// An infeasible system with no Farkas ray.
///
/// With `m = k + 1` the block of `A'_{k+1}` in the rows of the `k`-th
/// diagonal block and the columns past `r_1 + … + r_{k+1}` is filled with
/// nonzeros; the zero trailing diagonal then forbids every psd combination
/// with `bᵀy = -1`, which [`farkas_obstructed`] confirms exactly. With more
/// equations the same recipe is used and the result is flagged unconfirmed
/// when the exact check is inconclusive.
pub fn gen_weakly_infeasible(spec: &GenSpec) -> Result<(SdpSystem, Certificate)> {
    if spec.kind != GenKind::WeaklyInfeasible {
        return Err(Error::InvalidSpec("gen_weakly_infeasible needs the weakly infeasible kind".into()));
    }
    check_common(spec)?;
    let (n, m) = (spec.n, spec.m);
    let k = spec.k.unwrap_or(m - 1);
    if k == 0 || k + 1 > m {
        return Err(Error::InvalidSpec(format!("weak infeasibility needs 1 ≤ k ≤ m - 1, got k = {k}, m = {m}")));
    }
    if k + 1 > n {
        return Err(Error::InvalidSpec(format!("depth {k} needs n ≥ {}", k + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut unconfirmed = false;
    for _ in 0..MAX_ATTEMPTS {
        let sizes = match &spec.block_sizes {
            Some(s) => s.clone(),
            None => infeasible_sizes(&mut rng, n, k, 1),
        };
        check_infeasible_sizes(&sizes, k, n)?;
        if sizes.iter().sum::<usize>() >= n {
            return Err(Error::InvalidSpec("weak infeasibility needs a nonempty trailing block".into()));
        }
        let form = infeasible_form(&mut rng, spec, k, &sizes, Some(spec.obstruction.clone()));
        let obstructed = farkas_obstructed(&form.system);
        if !obstructed && m == k + 1 {
            // Only a zero obstruction can get here; resample.
            unconfirmed = true;
            continue;
        }
        let strength = if obstructed { Strength::Weak } else { Strength::WeakUnconfirmed };
        if let Some(out) = finish_infeasible(&mut rng, spec, form, Some(strength))? {
            return Ok(out);
        }
    }
    if unconfirmed {
        Err(Error::WeaknessUnconfirmed)
    } else {
        Err(Error::ResampleExhausted { attempts: MAX_ATTEMPTS })
    }
}

fn check_common(spec: &GenSpec) -> Result<()> {
    if spec.n == 0 || spec.m == 0 {
        return Err(Error::InvalidSpec("n and m must be positive".into()));
    }
    if spec.entry_bound == 0 {
        return Err(Error::InvalidSpec("entry bound must be positive".into()));
    }
    Ok(())
}

fn check_infeasible_sizes(sizes: &[usize], k: usize, n: usize) -> Result<()> {
    if sizes.len() != k + 1 || sizes[..k].contains(&0) || sizes.iter().sum::<usize>() > n {
        return Err(Error::InvalidSpec(format!(
            "block sizes {sizes:?} must be k + 1 = {} values, the first k positive, summing to at most n = {n}",
            k + 1
        )));
    }
    Ok(())
}

/// `r_1, …, r_k > 0` and `r_{k+1} ≥ 0` leaving at least `keep` trailing rows.
fn infeasible_sizes(rng: &mut ChaCha8Rng, n: usize, k: usize, keep: usize) -> Vec<usize> {
    let budget = n - keep;
    let total = rng.random_range(k..=budget.max(k));
    let mut sizes = composition(rng, total, k).unwrap_or_else(|_| vec![1; k]);
    let used: usize = sizes.iter().sum();
    sizes.push(rng.random_range(0..=budget.saturating_sub(used)));
    sizes
}

/// A random composition of `total` into `parts` positive integers.
fn composition(rng: &mut ChaCha8Rng, total: usize, parts: usize) -> Result<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { Ok(Vec::new()) } else { Err(Error::InvalidSpec("nonzero total with no parts".into())) };
    }
    if total < parts {
        return Err(Error::InvalidSpec(format!("cannot split {total} into {parts} positive parts")));
    }
    let mut sizes = vec![1; parts];
    for _ in 0..total - parts {
        let i = rng.random_range(0..parts);
        sizes[i] += 1;
    }
    Ok(sizes)
}

/// The infeasible staircase: equations `1..k+1` shaped, the rest random,
/// `b' = (0, …, 0, -1, random…)`. With `obstruction` set, the weak-recipe
/// block of `A'_{k+1}` is filled.
fn infeasible_form(
    rng: &mut ChaCha8Rng,
    spec: &GenSpec,
    k: usize,
    sizes: &[usize],
    obstruction: Option<Option<Rational>>,
) -> StaircaseForm {
    let (n, m) = (spec.n, spec.m);
    let mut matrices = Vec::with_capacity(m);
    let mut offset = 0;
    for &r in sizes {
        matrices.push(staircase_matrix(rng, spec, offset, r));
        offset += r;
    }
    if let Some(value) = obstruction {
        let rows = sizes[..k - 1].iter().sum::<usize>()..sizes[..k].iter().sum::<usize>();
        let cols = offset..n;
        let mut a = matrices[k].clone().into_matrix();
        for i in rows {
            for j in cols.clone() {
                let v = value.clone().unwrap_or_else(|| nonzero_entry(rng, spec.entry_bound));
                a[(i, j)] = v.clone();
                a[(j, i)] = v;
            }
        }
        matrices[k] = SymMatrix::new(a).expect("symmetric by construction");
    }
    while matrices.len() < m {
        matrices.push(random_sym(rng, n, spec.entry_bound));
    }
    let mut rhs = vec![Rational::zero(); k];
    rhs.push(-Rational::one());
    while rhs.len() < m {
        rhs.push(random_entry(rng, spec.entry_bound));
    }
    let system = SdpSystem::new(n, matrices, rhs).expect("consistent sizes");
    StaircaseForm::new(system, k, sizes.to_vec())
}

/// Scrambles an infeasible form, sets the strength and checks the result.
/// `None` asks the caller to resample.
fn finish_infeasible(
    rng: &mut ChaCha8Rng,
    spec: &GenSpec,
    form: StaircaseForm,
    strength: Option<Strength>,
) -> Result<Option<(SdpSystem, Certificate)>> {
    if !crate::certify::replay_infeasibility(&form).accepted() {
        return Ok(None);
    }
    let k = form.k;
    let (source, transcript) = scramble(rng, spec, &form.system)?;
    let ray = (k == 0).then(|| transcript.t.row(0).to_vec());
    let mut cert = Certificate::Infeasible {
        staircase: form,
        transcript,
        strength: Strength::WeakUnconfirmed,
        farkas_ray: ray.clone(),
        diagnostics: Vec::new(),
    };
    let (strength, ray) = match (strength, ray) {
        (Some(s), _) => (s, None),
        (None, Some(y)) => (Strength::Strong, Some(y)),
        (None, None) => {
            let (s, ray, _) = classify_strength(&source, &cert, &ToleranceProfile::default());
            (s, ray)
        }
    };
    if let Certificate::Infeasible {
        strength: s, farkas_ray, ..
    } = &mut cert
    {
        *s = strength;
        *farkas_ray = ray;
    }
    Ok(verify_certificate(&source, &cert).accepted().then_some((source, cert)))
}

/// Positive diagonal block of order `r` at `offset`, random entries in the
/// leading `offset` rows and columns, zeros elsewhere.
fn staircase_matrix(rng: &mut ChaCha8Rng, spec: &GenSpec, offset: usize, r: usize) -> SymMatrix {
    let n = spec.n;
    let mut a = RatMatrix::zeros(n, n);
    for i in 0..offset {
        for j in i..n {
            if spec.fill_arbitrary {
                let v = random_entry(rng, spec.entry_bound);
                a[(i, j)] = v.clone();
                a[(j, i)] = v;
            }
        }
    }
    for d in offset..offset + r {
        a[(d, d)] = positive_entry(rng, spec.entry_bound);
    }
    SymMatrix::new(a).expect("symmetric by construction")
}

fn random_entry(rng: &mut ChaCha8Rng, bound: u32) -> Rational {
    let b = i64::from(bound);
    let q = rng.random_range(-b..=b);
    let d = rng.random_range(1..=b);
    Rational::new(q.into(), d.into())
}

fn nonzero_entry(rng: &mut ChaCha8Rng, bound: u32) -> Rational {
    let v = positive_entry(rng, bound);
    if rng.random_bool(0.5) {
        -v
    } else {
        v
    }
}

fn positive_entry(rng: &mut ChaCha8Rng, bound: u32) -> Rational {
    let b = i64::from(bound);
    let q = rng.random_range(1..=b);
    let d = rng.random_range(1..=b);
    Rational::new(q.into(), d.into())
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, bound: u32) -> SymMatrix {
    let mut a = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = random_entry(rng, bound);
            a[(i, j)] = v.clone();
            a[(j, i)] = v;
        }
    }
    SymMatrix::new(a).expect("symmetric by construction")
}

/// `G Gᵀ + I` for a random `G`.
fn random_pd(rng: &mut ChaCha8Rng, p: usize, bound: u32) -> SymMatrix {
    let g = RatMatrix::from_fn(p, p, |_, _| random_entry(rng, bound));
    let ggt = g.mul(&g.transpose()).expect("square").add(&RatMatrix::identity(p)).expect("square");
    SymMatrix::new(ggt).expect("G Gᵀ is symmetric")
}

/// Product of `count` elementary factors `I + c e_i e_jᵀ` with `c = ±1`, and
/// a random row permutation when `permute` is set. Determinant is `±1`.
fn unimodular(rng: &mut ChaCha8Rng, size: usize, count: usize, permute: bool) -> RatMatrix {
    let mut u = RatMatrix::identity(size);
    if size < 2 {
        return u;
    }
    for _ in 0..count {
        let i = rng.random_range(0..size);
        let mut j = rng.random_range(0..size - 1);
        if j >= i {
            j += 1;
        }
        let c = if rng.random_bool(0.5) { Rational::one() } else { -Rational::one() };
        // Row i += c · row j.
        for col in 0..size {
            let v = &u[(i, col)] + &c * &u[(j, col)];
            u[(i, col)] = v;
        }
    }
    if permute {
        for i in (1..size).rev() {
            let j = rng.random_range(0..=i);
            u.swap_rows(i, j);
        }
    }
    u
}

/// The emitted system `A_i = V_sᵀ(Σ_j S_ij A'_j)V_s`, `b = S b'`, together
/// with the transcript `(S⁻¹, V_s⁻¹)` that maps it back onto `canonical`.
fn scramble(rng: &mut ChaCha8Rng, spec: &GenSpec, canonical: &SdpSystem) -> Result<(SdpSystem, Transcript)> {
    let (n, m) = (canonical.order(), canonical.equations());
    if !spec.scramble {
        return Ok((canonical.clone(), Transcript::identity(m, n, Mode::Exact)));
    }
    let s = unimodular(rng, m, m + 1, true);
    let v = unimodular(rng, n, n + 1, false);
    let source = canonical.transform(&s, &v)?;
    let transcript = Transcript {
        t: inverse(&s)?,
        v: inverse(&v)?,
        mode: Mode::Exact,
    };
    Ok((source, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::int;

    #[test]
    fn deterministic_for_a_seed() {
        let spec = GenSpec::new(GenKind::Infeasible, 4, 4, 11);
        let (a, _) = gen_infeasible(&spec).unwrap();
        let (b, _) = gen_infeasible(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = gen_infeasible(&GenSpec::new(GenKind::Infeasible, 4, 4, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unscrambled_weak_recipe_is_the_motivating_system() {
        let spec = GenSpec {
            k: Some(1),
            block_sizes: Some(vec![1, 1]),
            fill_arbitrary: false,
            scramble: false,
            obstruction: Some(int(1)),
            ..GenSpec::new(GenKind::WeaklyInfeasible, 3, 2, 5)
        };
        let (system, cert) = gen_weakly_infeasible(&spec).unwrap();
        let expected = SdpSystem::from_i64(
            &[&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]],
            &[0, -1],
        );
        // Diagonal entries are random positive rationals; compare the pattern.
        for i in 0..2 {
            for p in 0..3 {
                for q in 0..3 {
                    assert_eq!(system.matrix(i)[(p, q)].is_zero(), expected.matrix(i)[(p, q)].is_zero());
                }
            }
        }
        assert!(matches!(cert, Certificate::Infeasible { strength: Strength::Weak, .. }));
    }

    #[test]
    fn zero_obstruction_is_resampled_until_exhausted() {
        let spec = GenSpec {
            obstruction: Some(int(0)),
            ..GenSpec::new(GenKind::WeaklyInfeasible, 3, 2, 5)
        };
        assert_eq!(gen_weakly_infeasible(&spec).unwrap_err(), Error::WeaknessUnconfirmed);
    }

    #[test]
    fn kind_parameters_are_checked() {
        let mut spec = GenSpec::new(GenKind::StronglyInfeasible, 3, 2, 1);
        spec.k = Some(1);
        assert!(matches!(gen_infeasible(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = GenSpec::new(GenKind::Feasible, 3, 2, 1);
        spec.p = Some(4);
        assert!(matches!(gen_feasible(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn strong_kind_carries_its_ray() {
        for seed in 0..5 {
            let (system, cert) = gen_infeasible(&GenSpec::new(GenKind::StronglyInfeasible, 4, 3, seed)).unwrap();
            let Certificate::Infeasible { strength, farkas_ray, .. } = &cert else { panic!() };
            assert_eq!(*strength, Strength::Strong);
            assert!(crate::certify::verify_farkas_ray(&system, farkas_ray.as_ref().unwrap()).accepted());
        }
    }

    #[test]
    fn feasible_rank_matches_spec() {
        for p in 0..=4 {
            let mut spec = GenSpec::new(GenKind::Feasible, 4, 4, 3);
            spec.p = Some(p);
            let (_, cert) = gen_feasible(&spec).unwrap();
            assert!(matches!(cert, Certificate::Feasible { p: got, .. } if got == p));
        }
    }
}
