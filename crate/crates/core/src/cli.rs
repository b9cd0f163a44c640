//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 input error, 2 infeasible or unconverged,
//! 3 verification failure. Artifacts written to disk are deterministic;
//! wall-clock timings only appear in the report printed on stdout.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::agler_solver::{
    solve_decomposition, InterpolationProblem, SolveOptions, SolveReport, SolveStatus, DEFAULT_MAX_ITER,
    DEFAULT_TOL_SOLVE,
};
use crate::aux_function::{build_aux_with, g_identities, AuxiliaryFunction, GIdentities};
use crate::colligation::random_instance;
use crate::error::{Error, Result};
use crate::io::{
    matrix_from_json_shaped, read_json, write_json, AuxFile, DecompositionFile, DomainName, LoadedProblem, MatrixJson,
    ProblemFile,
};
use crate::parametrizer::{random_parameters, verify, SchurParameter, VerificationReport, NEAR_SINGULAR_CONDITION};
use crate::testfam::{make_builtin, BuiltinFamily};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "nevanlinna",
    version,
    about = "Nevanlinna-Pick interpolation over test-function families"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Feasibility tolerance (overrides the problem file).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap for the decomposition solver.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
    /// Number of interior sample points.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Seed for sampling and random instances.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide solvability and write the decomposition.
    Solve { file: PathBuf },
    /// Build the auxiliary function from a stored decomposition.
    BuildG {
        file: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
    },
    /// Check interpolants for the given parameters.
    Verify {
        file: PathBuf,
        #[arg(long)]
        aux: PathBuf,
        /// `zero`, `random:N:SEED`, an inline JSON list of matrices, or a path
        /// to such a list. May be repeated.
        #[arg(long, default_value = "zero")]
        params: Vec<String>,
        /// Number of interior sample points (overrides --samples).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Emit a solvable problem built from a random colligation.
    RandomInstance {
        #[arg(long, value_enum, default_value_t = BuiltinDomain::Bidisc)]
        domain: BuiltinDomain,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Comma-separated state dimension per test function (default 2 each).
        #[arg(long = "state-dims", value_delimiter = ',')]
        state_dims: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BuiltinDomain {
    Disc,
    Bidisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub status: String,
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    /// Smallest eigenvalue of the Pick matrix, for single test function problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick_min_eigenvalue: Option<f64>,
}

impl SolveSummary {
    fn new(problem: &InterpolationProblem, report: &SolveReport) -> Self {
        Self {
            status: report.status.as_str().to_string(),
            affine_residual: report.affine_residual,
            min_eigenvalue: report.min_eigenvalue,
            iterations: report.iterations,
            pick_min_eigenvalue: (problem.family().len() == 1).then_some(report.min_eigenvalue),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVerification {
    pub parameter: String,
    #[serde(flatten)]
    pub report: VerificationReport,
}

/// Everything a command has to say; printed as JSON on stdout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recentered_at: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_identities: Option<GIdentities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_unitarity_defect: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verifications: Vec<NamedVerification>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<String>,
    /// Seconds per stage.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timings: BTreeMap<String, f64>,
}

struct Settings {
    tol: f64,
    max_iter: usize,
    samples: usize,
    seed: u64,
    out: Option<PathBuf>,
}

impl Settings {
    fn new(cli: &Cli, loaded: Option<&LoadedProblem>) -> Self {
        let opts = loaded.map(|l| l.options.clone()).unwrap_or_default();
        Self {
            tol: cli.tol.or(opts.tol_solve).unwrap_or(DEFAULT_TOL_SOLVE),
            max_iter: cli.max_iter.or(opts.max_iter).unwrap_or(DEFAULT_MAX_ITER),
            samples: cli.samples.or(opts.samples).unwrap_or(DEFAULT_SAMPLES),
            seed: cli.seed.or(opts.seed).unwrap_or(DEFAULT_SEED),
            out: cli.out.clone(),
        }
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// A failed command: exit status and diagnostic.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DecompositionInvalid(_) | Error::InfeasibleKernel(_) => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(stage.to_string(), start.elapsed().as_secs_f64());
        out
    }
}

/// Parses `args` (including the program name), runs the command, and returns
/// the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INPUT,
            };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { file } => cmd_solve(&cli, file, stdout),
        Command::BuildG { file, decomposition } => cmd_build_g(&cli, file, decomposition, stdout),
        Command::Verify {
            file,
            aux,
            params,
            grid,
        } => cmd_verify(&cli, file, aux, params, *grid, stdout, stderr),
        Command::RandomInstance {
            domain,
            n,
            d,
            state_dims,
        } => cmd_random_instance(&cli, *domain, *n, *d, state_dims, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_problem(path: &Path) -> Result<LoadedProblem> {
    ProblemFile::load(path)?.to_problem()
}

fn print_report(stdout: &mut dyn Write, report: &RunReport) -> Result<()> {
    writeln!(stdout, "{}", serde_json::to_string_pretty(report)?)?;
    Ok(())
}

fn recentered_at(loaded: &LoadedProblem) -> Option<Vec<[f64; 2]>> {
    loaded.options.recenter_at.clone()
}

fn cmd_solve(cli: &Cli, file: &Path, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let mut timer = Timer(BTreeMap::new());
    let loaded = timer.time("parse", || load_problem(file))?;
    let settings = Settings::new(cli, Some(&loaded));
    let opts = SolveOptions {
        tol_solve: settings.tol,
        max_iter: settings.max_iter,
        record_history: false,
    };
    let problem = &loaded.problem;
    let report = timer.time("solve", || solve_decomposition(problem, &opts))?;
    let path = settings.out_dir()?.join("decomposition.json");
    write_json(&path, &DecompositionFile::from_report(problem, &report))?;
    let run = RunReport {
        solve: Some(SolveSummary::new(problem, &report)),
        recentered_at: recentered_at(&loaded),
        artifacts: vec![path.display().to_string()],
        timings: timer.0,
        ..RunReport::default()
    };
    print_report(stdout, &run)?;
    Ok(if report.status == SolveStatus::Feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

fn cmd_build_g(
    cli: &Cli,
    file: &Path,
    decomposition: &Path,
    stdout: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let mut timer = Timer(BTreeMap::new());
    let loaded = timer.time("parse", || load_problem(file))?;
    let settings = Settings::new(cli, Some(&loaded));
    let problem = &loaded.problem;
    let stored: DecompositionFile = read_json(decomposition)?;
    if &stored.family != problem.family() {
        return Err(Error::Parse(format!(
            "{} was computed for a different test-function family",
            decomposition.display()
        ))
        .into());
    }
    let Some(kernel) = stored.kernel()? else {
        return Err(Error::DecompositionInvalid(format!(
            "{} records status {}",
            decomposition.display(),
            stored.status
        ))
        .into());
    };
    let aux = timer.time("build_g", || build_aux_with(problem, &kernel, settings.tol))?;
    let ids = timer.time("identities", || {
        g_identities(problem, &aux, settings.samples, settings.seed)
    })?;
    let path = settings.out_dir()?.join("aux.json");
    write_json(&path, &AuxFile::from_aux(&aux))?;
    let run = RunReport {
        recentered_at: recentered_at(&loaded),
        g_identities: Some(ids),
        q_unitarity_defect: Some(aux.unitarity_defect()),
        artifacts: vec![path.display().to_string()],
        timings: timer.0,
        ..RunReport::default()
    };
    print_report(stdout, &run)?;
    Ok(EXIT_OK)
}

/// Expands one `--params` value into named parameters.
fn parse_params(spec: &str, aux: &AuxiliaryFunction) -> Result<Vec<(String, SchurParameter)>> {
    if spec == "zero" {
        return Ok(vec![("zero".into(), SchurParameter::zero(aux))]);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let (count, seed) = rest
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected random:N:SEED, got {spec}")))?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::Parse(format!("bad count in {spec}")))?;
        let seed: u64 = seed.parse().map_err(|_| Error::Parse(format!("bad seed in {spec}")))?;
        return Ok(random_parameters(aux, count, seed)
            .into_iter()
            .enumerate()
            .map(|(j, t)| (format!("{spec}#{j}"), t))
            .collect());
    }
    let list: Vec<MatrixJson> = if spec.trim_start().starts_with('[') {
        serde_json::from_str(spec).map_err(|e| Error::Parse(format!("parameter list: {e}")))?
    } else {
        read_json(Path::new(spec))?
    };
    let label = if spec.trim_start().starts_with('[') {
        "explicit"
    } else {
        spec
    };
    list.iter()
        .enumerate()
        .map(|(j, m)| {
            let t = matrix_from_json_shaped(m, aux.dim_m2(), aux.dim_m1())?;
            Ok((format!("{label}#{j}"), SchurParameter::constant(t)?))
        })
        .collect()
}

fn cmd_verify(
    cli: &Cli,
    file: &Path,
    aux_path: &Path,
    specs: &[String],
    grid: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let mut timer = Timer(BTreeMap::new());
    let loaded = timer.time("parse", || load_problem(file))?;
    let settings = Settings::new(cli, Some(&loaded));
    let problem = &loaded.problem;
    let stored: AuxFile = read_json(aux_path)?;
    let aux = stored.to_aux_unverified()?;
    let defect = aux.unitarity_defect();
    if !(defect <= crate::aux_function::TOL_Q_UNITARY) {
        let _ = writeln!(
            stderr,
            "warning: Q in {} has unitarity defect {defect:e}",
            aux_path.display()
        );
    }
    let mut params = Vec::new();
    for spec in specs {
        params.extend(parse_params(spec, &aux)?);
    }
    let samples = grid.unwrap_or(settings.samples);
    let verifications = timer.time("verify", || {
        params
            .iter()
            .map(|(name, t)| {
                verify(problem, &aux, t, samples, settings.seed).map(|report| NamedVerification {
                    parameter: name.clone(),
                    report,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for v in &verifications {
        if !(v.report.max_resolvent_condition <= NEAR_SINGULAR_CONDITION) {
            let _ = writeln!(
                stderr,
                "warning: parameter {} met a near-singular resolvent (condition {:e})",
                v.parameter, v.report.max_resolvent_condition
            );
        }
    }
    let all_pass = verifications.iter().all(|v| v.report.pass);
    let mut run = RunReport {
        recentered_at: recentered_at(&loaded),
        q_unitarity_defect: Some(defect),
        verifications,
        ..RunReport::default()
    };
    if let Some(dir) = &settings.out {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        let path = dir.join("report.json");
        write_json(&path, &run)?;
        run.artifacts.push(path.display().to_string());
    }
    run.timings = timer.0;
    print_report(stdout, &run)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_random_instance(
    cli: &Cli,
    domain: BuiltinDomain,
    n: usize,
    d: usize,
    state_dims: &[usize],
    stdout: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let (family, name) = match domain {
        BuiltinDomain::Disc => (make_builtin(BuiltinFamily::Disc), DomainName::Disc),
        BuiltinDomain::Bidisc => (make_builtin(BuiltinFamily::Bidisc), DomainName::Bidisc),
    };
    let dims = if state_dims.is_empty() {
        vec![2; family.len()]
    } else {
        state_dims.to_vec()
    };
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let (problem, _) = random_instance(&family, n, d, &dims, seed)?;
    let file = ProblemFile::from_problem(&problem, name);
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(Error::from)?;
            let path = dir.join("problem.json");
            write_json(&path, &file)?;
            writeln!(stdout, "{}", path.display()).map_err(Error::from)?;
        }
        None => write!(stdout, "{}", file.to_json()?).map_err(Error::from)?,
    }
    Ok(EXIT_OK)
}
