use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spectra_cert_core::certify::{duality_probe, random_objective, verify_certificate, DualityProbe, ProbeStatus, PROBE_LABEL};
use spectra_cert_core::generate::{generate, GenKind, GenSpec, GENERATOR_VERSION, PRNG_NAME};
use spectra_cert_core::{convert, Certificate, ConvertOptions, Error, Hints, Mode, SymMatrix, ToleranceProfile};

use crate::error::{CliError, CliResult, EXIT_INPUT};
use crate::instance::{parse_matrix, read_text, to_pretty_json, write_text, InstanceFile, SCHEMA_VERSION};
use crate::report::{GeneratorInfo, Metadata, ReportFile, VerificationSummary};
use crate::sdpa::import_sdpa;

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_ACCEPTED: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "spectra-cert", version, about = "Exact certificates for semidefinite feasibility systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reformulate an instance and report infeasibility or the maximum rank.
    Analyze(AnalyzeArgs),
    /// Recheck a report against its instance.
    Verify(VerifyArgs),
    /// Write seeded instances with a known certificate.
    Generate(GenerateArgs),
    /// Solve the reduced primal and dual for some objectives (float only).
    Probe(ProbeArgs),
    /// Convert an SDPA sparse file with one semidefinite block.
    ImportSdpa(ImportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    tol_pd: Option<f64>,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_denom: Option<u64>,
    /// Hints file replacing any hints stored in the instance.
    #[arg(long)]
    hints: Option<PathBuf>,
    /// Ignore hints stored in the instance.
    #[arg(long, conflicts_with = "hints")]
    no_hints: bool,
}

impl SolverFlags {
    fn tolerances(&self) -> ToleranceProfile {
        let mut tol = ToleranceProfile::default();
        if let Some(v) = self.tol_eq {
            tol.eq = v;
        }
        if let Some(v) = self.tol_pd {
            tol.pd = v;
        }
        if let Some(v) = self.tol_rank {
            tol.rank = v;
        }
        if let Some(v) = self.max_iters {
            tol.max_iters = v;
        }
        if let Some(v) = self.max_denom {
            tol.max_denominator = v;
        }
        tol
    }

    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }

    fn options(&self, instance: &InstanceFile) -> CliResult<ConvertOptions> {
        let hints = match (&self.hints, self.no_hints) {
            (Some(path), _) => {
                let text = read_text(path)?;
                serde_json::from_str::<Hints>(&text).map_err(|e| CliError::parse(path.display().to_string(), e))?
            }
            (None, true) => Hints::default(),
            (None, false) => instance.hints.clone().unwrap_or_default(),
        };
        Ok(ConvertOptions {
            mode: self.mode(),
            tolerances: self.tolerances(),
            hints,
            classify_strength: true,
        })
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Instance file, or a directory of `*.json` instances.
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Report file; a directory when the input is one. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recorded in the report metadata.
    #[arg(long, env = "SPECTRA_CERT_SEED")]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    report: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Infeasible,
    Feasible,
    StronglyInfeasible,
    WeaklyInfeasible,
}

impl From<KindArg> for GenKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Infeasible => GenKind::Infeasible,
            KindArg::Feasible => GenKind::Feasible,
            KindArg::StronglyInfeasible => GenKind::StronglyInfeasible,
            KindArg::WeaklyInfeasible => GenKind::WeaklyInfeasible,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// A JSON generator spec; the flags below are ignored except the count,
    /// seed and output directory.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    kind: Option<KindArg>,
    #[arg(long, required_unless_present = "spec")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "spec")]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// First seed; instance `i` uses `seed + i`.
    #[arg(long, env = "SPECTRA_CERT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    entry_bound: u32,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    instance: PathBuf,
    /// A feasible report to probe instead of analyzing the instance again.
    #[arg(long)]
    report: Option<PathBuf>,
    /// JSON file `{"schemaVersion": 1, "C": [[...]]}` in reformulated coordinates.
    #[arg(long, conflicts_with = "random_c")]
    objective: Option<PathBuf>,
    /// Seed of the first random objective; defaults to `SPECTRA_CERT_SEED`, then 0.
    #[arg(long = "random-C", alias = "random-c")]
    random_c: Option<u64>,
    /// Number of random objectives, using consecutive seeds.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ImportArgs {
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments and runs one command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Verify(a) => verify(&a),
        Command::Generate(a) => generate_cmd(&a),
        Command::Probe(a) => probe(&a),
        Command::ImportSdpa(a) => import(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("spectra-cert: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(cert: &Certificate) -> i32 {
    match cert {
        Certificate::Feasible { .. } => EXIT_FEASIBLE,
        Certificate::Infeasible { .. } => EXIT_INFEASIBLE,
        Certificate::Undecided { .. } => EXIT_UNDECIDED,
    }
}

/// Converts one instance and builds its verified report.
pub fn analyze_instance(instance: &InstanceFile, options: &ConvertOptions, seed: Option<u64>) -> CliResult<(Certificate, ReportFile)> {
    let system = instance.to_system()?;
    let cert = convert(&system, options);
    let metadata = Metadata {
        seed,
        mode: Some(options.mode),
        hinted: Some(!options.hints.steps.is_empty() || options.hints.witness.is_some()),
        tolerances: Some(options.tolerances),
        ..Metadata::tool()
    };
    let mut report = ReportFile::from_certificate(&cert, metadata);
    if !matches!(cert, Certificate::Undecided { .. }) {
        report.verification = Some(VerificationSummary::new(verify_certificate(&system, &cert)));
    }
    Ok((cert, report))
}

fn summary_line(report: &ReportFile) -> String {
    let mut line = report.verdict.clone();
    if let Some(k) = report.k {
        line += &format!(" k={k} blockSizes={:?}", report.block_sizes);
    }
    if let Some(s) = report.strength {
        line += &format!(" strength={}", serde_json::to_value(s).expect("enum").as_str().unwrap_or(""));
    }
    if let Some(p) = report.p {
        line += &format!(" p={p}");
    }
    if let Some(v) = &report.verification {
        line += &format!(" verification={}", v.status);
    }
    if let Some(r) = &report.reason {
        line += &format!(" reason={r:?}");
    }
    line
}

fn analyze(args: &AnalyzeArgs) -> CliResult<i32> {
    if args.instance.is_dir() {
        return analyze_directory(args);
    }
    let instance = InstanceFile::load(&args.instance)?;
    let options = args.solver.options(&instance)?;
    let (cert, report) = analyze_instance(&instance, &options, args.seed)?;
    emit(args.out.as_deref(), &to_pretty_json(&report))?;
    if args.out.is_some() {
        println!("{}", summary_line(&report));
    }
    if report.verification.as_ref().is_some_and(|v| v.status == "rejected") {
        return Err(CliError::Internal("the produced certificate failed verification".into()));
    }
    Ok(verdict_code(&cert))
}

/// Batch mode: every instance is analyzed independently. The exit code is
/// 0 when all were decided and 2 otherwise.
fn analyze_directory(args: &AnalyzeArgs) -> CliResult<i32> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.instance)
        .map_err(|source| CliError::Read {
            path: args.instance.clone(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
    }
    let results: Vec<CliResult<(PathBuf, ReportFile)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|path| {
                scope.spawn(move || -> CliResult<(PathBuf, ReportFile)> {
                    let instance = InstanceFile::load(path)?;
                    let options = args.solver.options(&instance)?;
                    let (_, report) = analyze_instance(&instance, &options, args.seed)?;
                    Ok((path.clone(), report))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Internal("worker panicked".into()))))
            .collect()
    });
    let mut code = 0;
    for result in results {
        let (path, report) = result?;
        if let Some(dir) = &args.out {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            write_text(&dir.join(format!("{name}.report.json")), &to_pretty_json(&report))?;
        }
        println!("{}: {}", path.display(), summary_line(&report));
        if report.verdict == "undecided" {
            code = EXIT_UNDECIDED;
        }
    }
    Ok(code)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyOutput {
    schema_version: u32,
    claimed_verdict: String,
    #[serde(flatten)]
    verification: VerificationSummary,
}

fn verify(args: &VerifyArgs) -> CliResult<i32> {
    let instance = InstanceFile::load(&args.instance)?;
    let system = instance.to_system()?;
    let report = ReportFile::parse(&read_text(&args.report)?, &args.report.display().to_string())?;
    let cert = report.to_certificate(&system)?;
    if matches!(cert, Certificate::Undecided { .. }) {
        eprintln!("spectra-cert: the report is undecided and certifies nothing");
        return Ok(EXIT_UNDECIDED);
    }
    let summary = VerificationSummary::new(verify_certificate(&system, &cert));
    let accepted = summary.report.accepted();
    print!(
        "{}",
        to_pretty_json(&VerifyOutput {
            schema_version: SCHEMA_VERSION,
            claimed_verdict: report.verdict.clone(),
            verification: summary,
        })
    );
    Ok(if accepted { EXIT_ACCEPTED } else { EXIT_REJECTED })
}

fn kind_name(kind: GenKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// Builds one instance file with its verified ground truth.
pub fn generate_instance(spec: &GenSpec) -> CliResult<InstanceFile> {
    let (system, cert) = generate(spec).map_err(|e| match e {
        Error::ResampleExhausted { .. } | Error::WeaknessUnconfirmed => CliError::Resample(e.to_string()),
        Error::InvalidSpec(_) => CliError::Usage(e.to_string()),
        other => CliError::Internal(other.to_string()),
    })?;
    let metadata = Metadata {
        seed: Some(spec.seed),
        mode: Some(Mode::Exact),
        generator: Some(GeneratorInfo {
            version: GENERATOR_VERSION.into(),
            prng: PRNG_NAME.into(),
            spec: serde_json::to_value(spec).expect("spec serializes"),
        }),
        ..Metadata::tool()
    };
    let mut truth = ReportFile::from_certificate(&cert, metadata);
    truth.verification = Some(VerificationSummary::new(verify_certificate(&system, &cert)));
    let mut file = InstanceFile::from_system(&system);
    file.ground_truth = Some(truth);
    Ok(file)
}

fn generate_cmd(args: &GenerateArgs) -> CliResult<i32> {
    let base = match &args.spec {
        Some(path) => serde_json::from_str::<GenSpec>(&read_text(path)?)
            .map_err(|e| CliError::parse(path.display().to_string(), e))?,
        None => {
            let (Some(kind), Some(n), Some(m)) = (args.kind, args.n, args.m) else {
                return Err(CliError::Usage("--kind, --n and --m are required without --spec".into()));
            };
            let mut spec = GenSpec::new(kind.into(), n, m, args.seed);
            spec.k = args.k;
            spec.p = args.p;
            spec.entry_bound = args.entry_bound;
            spec
        }
    };
    std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Write {
        path: args.out_dir.clone(),
        source,
    })?;
    for i in 0..args.count {
        let spec = GenSpec {
            seed: args.seed.wrapping_add(i),
            ..base.clone()
        };
        let file = generate_instance(&spec)?;
        let path = args.out_dir.join(format!("{}-n{}-m{}-seed{}.json", kind_name(spec.kind), spec.n, spec.m, spec.seed));
        write_text(&path, &file.to_json())?;
        let truth = file.ground_truth.as_ref().expect("generated files carry ground truth");
        println!("{}: {}", path.display(), summary_line(truth));
    }
    Ok(0)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProbeOutput {
    schema_version: u32,
    label: &'static str,
    p: usize,
    probes: Vec<DualityProbe>,
}

#[derive(serde::Deserialize)]
struct ObjectiveFile {
    #[serde(rename = "schemaVersion")]
    schema_version: u32,
    #[serde(rename = "C")]
    c: Vec<Vec<String>>,
}

fn probe(args: &ProbeArgs) -> CliResult<i32> {
    let instance = InstanceFile::load(&args.instance)?;
    let system = instance.to_system()?;
    let tol = args.solver.tolerances();
    let cert = match &args.report {
        Some(path) => ReportFile::parse(&read_text(path)?, &path.display().to_string())?.to_certificate(&system)?,
        None => convert(&system, &args.solver.options(&instance)?),
    };
    let Certificate::Feasible { p, staircase, .. } = &cert else {
        return Err(CliError::Usage(format!(
            "the probe needs a feasible instance, but the analysis is {}",
            cert.verdict()
        )));
    };
    if args.report.is_some() && !verify_certificate(&system, &cert).accepted() {
        return Err(CliError::Usage("the supplied report does not verify".into()));
    }
    let n = system.order();
    let objectives: Vec<SymMatrix> = match &args.objective {
        Some(path) => {
            let file: ObjectiveFile = serde_json::from_str(&read_text(path)?)
                .map_err(|e| CliError::parse(path.display().to_string(), e))?;
            if file.schema_version != SCHEMA_VERSION {
                return Err(CliError::parse(path.display().to_string(), "unsupported schemaVersion"));
            }
            vec![parse_matrix(&file.c, n).map_err(|e| CliError::parse(path.display().to_string(), e))?]
        }
        None => {
            let first = args
                .random_c
                .or_else(|| std::env::var("SPECTRA_CERT_SEED").ok().and_then(|s| s.parse().ok()))
                .unwrap_or(0);
            (0..args.count)
                .map(|i| random_objective(&staircase.system, first.wrapping_add(i)))
                .collect()
        }
    };
    let probes: Vec<DualityProbe> = objectives.iter().map(|c| duality_probe(staircase, *p, c, &tol)).collect();
    let all_solved = probes.iter().all(|pr| pr.status == ProbeStatus::Solved);
    let output = ProbeOutput {
        schema_version: SCHEMA_VERSION,
        label: PROBE_LABEL,
        p: *p,
        probes,
    };
    emit(args.out.as_deref(), &to_pretty_json(&output))?;
    Ok(if all_solved { 0 } else { EXIT_UNDECIDED })
}

fn import(args: &ImportArgs) -> CliResult<i32> {
    let text = read_text(&args.input)?;
    let file = import_sdpa(&text)?;
    emit(args.out.as_deref(), &file.to_json())?;
    Ok(0)
}
