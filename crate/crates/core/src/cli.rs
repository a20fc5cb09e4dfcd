//! Command-line front end. Every command emits one JSON document.
//!
//! Exit codes: 0 success, 2 invalid input, 3 decomposition failure,
//! 4 oracle inconclusive, 5 truncation tolerance exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cvdisplace::{run_scenario, CvKind, CvScenario, ScenarioReport};
use crate::error::{Error, Result};
use crate::estimation::{
    decompose_state, optimal_input_state, optimal_seed, sqrt_measurement_seed, EstimationReport, StateDecomposition,
};
use crate::grouprep::{
    load_group_spec, load_representation, load_representation_unchecked, verify_representation, GroupSpec, HaarSampler,
    Representation, VerificationReport,
};
use crate::isotypic::{isotypic_decompose, DecompositionJson, IsotypicDecomposition};
use crate::json::{pair, vector_from_json, vector_to_json, ComplexPair};
use crate::linalg::{outer, CVector};
use crate::oracle::{maximize_likelihood_numeric, verify_covariance, verify_normalization, NormalizationMode, NormalizationReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MAX_MC_SAMPLES: usize = 10_000_000;
pub const MAX_CUTOFF: usize = 80;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DECOMPOSITION: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;
pub const EXIT_TRUNCATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "covml", version, about = "Covariant maximum-likelihood estimation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every stochastic path.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Isotypic decomposition of a representation.
    Decompose(RepArgs),
    /// Closed-form optimal likelihood and related quantities for a state.
    Estimate(EstimateArgs),
    /// Optimal input state for a representation.
    OptimalState(RepArgs),
    /// Continuous-variable displacement scenarios.
    Cv(CvArgs),
    /// Homomorphism check of a representation.
    Verify(RepArgs),
}

#[derive(Debug, Args)]
struct RepArgs {
    #[arg(long)]
    group: PathBuf,
    #[arg(long)]
    rep: PathBuf,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    inputs: RepArgs,
    /// State vector JSON; not needed with --optimal-state.
    #[arg(long, required_unless_present = "optimal_state")]
    state: Option<PathBuf>,
    /// Run the numerical oracle and Monte-Carlo normalization as well.
    #[arg(long)]
    verify: bool,
    /// Use the optimal input state instead of --state.
    #[arg(long)]
    optimal_state: bool,
    /// Decomposition JSON from `decompose`, reused instead of recomputing.
    #[arg(long)]
    precomputed_decomposition: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 5000)]
    oracle_iters: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum KindArg {
    Identical,
    Conjugated,
    Squeezed,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, default_value_t = 40)]
    cutoff: usize,
    /// Squeezing parameter for `--kind squeezed`.
    #[arg(long, default_value_t = 0.0)]
    x: f64,
}

/// Fully resolved run configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub group: Option<PathBuf>,
    pub rep: Option<PathBuf>,
    pub state: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub mc_samples: Option<usize>,
    pub oracle_iters: Option<usize>,
    pub cutoff: Option<usize>,
    pub kind: Option<&'static str>,
    pub x: Option<f64>,
    pub verify: bool,
    pub optimal_state: bool,
    pub precomputed_decomposition: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    fn base(command: &'static str, cli: &Cli, threads: Option<usize>) -> Self {
        RunConfig {
            command,
            group: None,
            rep: None,
            state: None,
            out: cli.out.clone(),
            seed: cli.seed,
            mc_samples: None,
            oracle_iters: None,
            cutoff: None,
            kind: None,
            x: None,
            verify: false,
            optimal_state: false,
            precomputed_decomposition: None,
            threads,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::Validation(format!("input file {} does not exist", path.display())));
    }
    Ok(fs::read_to_string(path)?)
}

fn load_inputs(args: &RepArgs, checked: bool) -> Result<(GroupSpec, Representation)> {
    let group = load_group_spec(&read(&args.group)?)?;
    let text = read(&args.rep)?;
    let rep = if checked { load_representation(&text, &group)? } else { load_representation_unchecked(&text, &group)? };
    Ok((group, rep))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StateDoc {
    Wrapped { state: Vec<ComplexPair> },
    Bare(Vec<ComplexPair>),
}

fn load_state(path: &Path) -> Result<CVector> {
    let doc: StateDoc = serde_json::from_str(&read(path)?).map_err(|e| Error::parse("state", e.to_string()))?;
    let v = match doc {
        StateDoc::Wrapped { state } | StateDoc::Bare(state) => state,
    };
    Ok(vector_from_json(&v))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DecompositionDoc {
    Wrapped { decomposition: DecompositionJson },
    Bare(DecompositionJson),
}

fn load_decomposition(path: &Path, rep: &Representation) -> Result<IsotypicDecomposition> {
    let doc: DecompositionDoc =
        serde_json::from_str(&read(path)?).map_err(|e| Error::parse("decomposition", e.to_string()))?;
    let json = match doc {
        DecompositionDoc::Wrapped { decomposition } | DecompositionDoc::Bare(decomposition) => decomposition,
    };
    let iso = IsotypicDecomposition::from_json(&json)?;
    iso.validate_against(rep)?;
    Ok(iso)
}

#[derive(Serialize)]
struct DecomposeOutput<'a> {
    version: &'static str,
    config: &'a RunConfig,
    decomposition: DecompositionJson,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct BlockSummary {
    d: usize,
    m: usize,
    c: ComplexPair,
    rank: usize,
    lambdas: Vec<f64>,
}

fn block_summaries(sd: &StateDecomposition) -> Vec<BlockSummary> {
    sd.blocks
        .iter()
        .map(|b| BlockSummary { d: b.d, m: b.m, c: pair(b.c), rank: b.rank(), lambdas: b.lambdas.clone() })
        .collect()
}

#[derive(Serialize)]
struct OracleSummary {
    value: f64,
    iterations: usize,
    final_residual: f64,
    inconclusive: bool,
    gap: f64,
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: EstimationReport,
    blocks: Vec<BlockSummary>,
    eta: Vec<ComplexPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<Vec<ComplexPair>>,
    oracle: Option<OracleSummary>,
    monte_carlo_normalization: Option<NormalizationReport>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct OptimalStateOutput<'a> {
    version: &'static str,
    config: &'a RunConfig,
    state: Vec<ComplexPair>,
    #[serde(rename = "L")]
    l: f64,
    blocks: Vec<BlockSummary>,
}

#[derive(Serialize)]
struct CvOutput<'a> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    report: ScenarioReport,
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    version: &'static str,
    config: &'a RunConfig,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Writes via a temporary file in the target directory followed by a rename.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile_in(dir, path)?;
    tmp.1.write_all(contents.as_bytes())?;
    tmp.1.sync_all()?;
    drop(tmp.1);
    fs::rename(&tmp.0, path)?;
    Ok(())
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(PathBuf, fs::File)> {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    for k in 0..100u32 {
        let candidate = dir.join(format!(".{name}.{}.{k}.tmp", std::process::id()));
        match fs::OpenOptions::new().write(true).create_new(true).open(&candidate) {
            Ok(f) => return Ok((candidate, f)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::Validation("could not create a temporary output file".into()))
}

fn emit(out: &Option<PathBuf>, value: &impl Serialize, stdout: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Validation(e.to_string()))? + "\n";
    match out {
        Some(path) => write_atomic(path, &text),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DecompositionFailed(_) => EXIT_DECOMPOSITION,
        Error::Truncation(_) => EXIT_TRUNCATION,
        _ => EXIT_INVALID,
    }
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("COVML_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("COVML_THREADS must be a positive integer, got {v:?}")))?;
            if n == 0 {
                return Err(Error::Validation("COVML_THREADS must be positive".into()));
            }
            #[cfg(feature = "parallel")]
            {
                // a pool may already exist when run in-process more than once
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn check_knob(name: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::Validation(format!("--{name} = {value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn cmd_decompose(cli: &Cli, args: &RepArgs, mut config: RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    config.group = Some(args.group.clone());
    config.rep = Some(args.rep.clone());
    let (_, rep) = load_inputs(args, true)?;
    let iso = isotypic_decompose(&rep)?;
    emit(
        &cli.out,
        &DecomposeOutput { version: VERSION, config: &config, decomposition: iso.to_json(), warnings: &iso.warnings },
        stdout,
    )?;
    Ok(EXIT_OK)
}

fn cmd_estimate(cli: &Cli, args: &EstimateArgs, mut config: RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    config.group = Some(args.inputs.group.clone());
    config.rep = Some(args.inputs.rep.clone());
    config.state = args.state.clone();
    config.verify = args.verify;
    config.optimal_state = args.optimal_state;
    config.precomputed_decomposition = args.precomputed_decomposition.clone();
    config.mc_samples = Some(args.mc_samples);
    config.oracle_iters = Some(args.oracle_iters);
    check_knob("mc-samples", args.mc_samples, 1, MAX_MC_SAMPLES)?;
    check_knob("oracle-iters", args.oracle_iters, 1, 1_000_000)?;

    let (group, rep) = load_inputs(&args.inputs, true)?;
    let iso = match &args.precomputed_decomposition {
        Some(p) => load_decomposition(p, &rep)?,
        None => isotypic_decompose(&rep)?,
    };
    let (psi, emitted_state) = if args.optimal_state {
        let (psi, _) = optimal_input_state(&iso, None)?;
        let json = vector_to_json(&psi);
        (psi, Some(json))
    } else {
        let path = args.state.as_ref().expect("clap enforces --state");
        (load_state(path)?, None)
    };
    if psi.len() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), got: psi.len() });
    }
    let sd = decompose_state(&psi, &iso)?;
    let seed = optimal_seed(&sd, &iso)?;
    let mut report = EstimationReport::closed_form(&sd, &iso)?;

    let mut sampler = HaarSampler::new(group.clone(), cli.seed);
    let norm = verify_normalization(&seed, &rep, &iso, NormalizationMode::ClosedForm, 0, &mut sampler)?;
    report.residuals.normalization = Some(norm.residual);
    report.residuals.covariance = Some(verify_covariance(&seed, &rep, &mut sampler)?.max_residual);
    report.residuals.sqrt_equiv = Some((sqrt_measurement_seed(&psi, &iso)?.eta - &seed.eta).norm());

    let mut code = EXIT_OK;
    let (oracle, mc) = if args.verify {
        let r = maximize_likelihood_numeric(&outer(&psi, &psi), &iso, 0, args.oracle_iters)?;
        if r.inconclusive {
            code = EXIT_ORACLE;
        }
        let mc = verify_normalization(&seed, &rep, &iso, NormalizationMode::MonteCarlo, args.mc_samples, &mut sampler)?;
        let summary = OracleSummary {
            value: r.value,
            iterations: r.trace.iterations,
            final_residual: r.trace.final_residual,
            inconclusive: r.inconclusive,
            gap: report.likelihood - r.value,
        };
        (Some(summary), Some(mc))
    } else {
        (None, None)
    };
    emit(
        &cli.out,
        &EstimateOutput {
            version: VERSION,
            config: &config,
            report,
            blocks: block_summaries(&sd),
            eta: vector_to_json(&seed.eta),
            state: emitted_state,
            oracle,
            monte_carlo_normalization: mc,
            warnings: iso.warnings.clone(),
        },
        stdout,
    )?;
    if code == EXIT_ORACLE {
        eprintln!("oracle inconclusive: constraint residual above tolerance");
    }
    Ok(code)
}

fn cmd_optimal_state(cli: &Cli, args: &RepArgs, mut config: RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    config.group = Some(args.group.clone());
    config.rep = Some(args.rep.clone());
    let (_, rep) = load_inputs(args, true)?;
    let iso = isotypic_decompose(&rep)?;
    let (psi, l) = optimal_input_state(&iso, None)?;
    let sd = decompose_state(&psi, &iso)?;
    emit(
        &cli.out,
        &OptimalStateOutput { version: VERSION, config: &config, state: vector_to_json(&psi), l, blocks: block_summaries(&sd) },
        stdout,
    )?;
    Ok(EXIT_OK)
}

fn cmd_cv(cli: &Cli, args: &CvArgs, mut config: RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    config.cutoff = Some(args.cutoff);
    check_knob("cutoff", args.cutoff, crate::cvdisplace::MIN_CUTOFF, MAX_CUTOFF)?;
    let kind = match args.kind {
        KindArg::Identical => CvKind::Identical,
        KindArg::Conjugated => CvKind::Conjugated,
        KindArg::Squeezed => {
            config.x = Some(args.x);
            CvKind::Squeezed { x: args.x }
        }
    };
    config.kind = Some(kind.name());
    let report = run_scenario(&CvScenario::new(kind, args.cutoff)?)?;
    let flagged = !report.flagged_points.is_empty();
    emit(&cli.out, &CvOutput { version: VERSION, config: &config, report }, stdout)?;
    if flagged {
        eprintln!("truncation tolerance exceeded at some grid points");
        return Ok(EXIT_TRUNCATION);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, args: &RepArgs, mut config: RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    config.group = Some(args.group.clone());
    config.rep = Some(args.rep.clone());
    let (group, rep) = load_inputs(args, false)?;
    let mut sampler = HaarSampler::new(group, cli.seed);
    let (passed, report, error, code) = match verify_representation(&rep, &mut sampler) {
        Ok(r) => (true, Some(r), None, EXIT_OK),
        Err(e) => {
            eprintln!("{e}");
            (false, None, Some(e.to_string()), exit_code(&e))
        }
    };
    emit(&cli.out, &VerifyOutput { version: VERSION, config: &config, passed, report, error }, stdout)?;
    Ok(code)
}

/// Runs the CLI on `args` (including the program name), returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    let result = threads_from_env().and_then(|threads| match &cli.command {
        Command::Decompose(a) => cmd_decompose(&cli, a, RunConfig::base("decompose", &cli, threads), stdout),
        Command::Estimate(a) => cmd_estimate(&cli, a, RunConfig::base("estimate", &cli, threads), stdout),
        Command::OptimalState(a) => cmd_optimal_state(&cli, a, RunConfig::base("optimal-state", &cli, threads), stdout),
        Command::Cv(a) => cmd_cv(&cli, a, RunConfig::base("cv", &cli, threads), stdout),
        Command::Verify(a) => cmd_verify(&cli, a, RunConfig::base("verify", &cli, threads), stdout),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
