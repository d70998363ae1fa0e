//! Command-line front end.
//!
//! Exit codes: 0 certified, 2 verification failed, 3 input or parse error,
//! 4 solver invocation failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::{Parser, Subcommand};
use rug::Rational;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bounds::{self, interval_constant_from_lower, BoundsError};
use crate::candidate::{self, CandidateError, GaussianMixture};
use crate::certify::{self, Certificate, CertifyError, CertifyOptions};
use crate::config::{RunConfig, Validated};
use crate::rigor::{parse_exact_rational, Precision};
use crate::sdp::{self, AssembleOptions, SdpError};

/// `println!` that tolerates a closed stdout.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

/// The five-term candidate for `A = 36/11` with its published coefficients.
pub const REFERENCE_CANDIDATE: &str = r#"[
  {"c": "-4.8", "k": 1, "lambda": "3.3"},
  {"c": "1.5", "k": 1, "lambda": "7.4"},
  {"c": "520", "k": 12, "lambda": "9.7"},
  {"c": "1.3", "k": 0, "lambda": "2.8"},
  {"c": "0.18", "k": 0, "lambda": "2"}
]
"#;

/// Claimed for the candidate above.
pub const REFERENCE_CANDIDATE_CLAIM: &str = "1.1943";

#[derive(Debug, Parser)]
#[command(name = "cplus", version, about = "Certified lower bounds on C+(A) and the prime-interval constants they imply")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Workspace root for outputs and the solver's working directory.
    #[arg(long, global = true, env = "CPLUS_WORKSPACE")]
    pub workspace: Option<PathBuf>,
    /// Overrides `A` from the config, e.g. 36/11.
    #[arg(long = "A", global = true)]
    pub a: Option<String>,
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true)]
    pub epsilon: Option<String>,
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the SDPA problem file and its manifest.
    BuildSdp {
        /// Output path of the `.dat-s` file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured solver command on a problem file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Certify a solver solution.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Certify an explicit Gaussian-mixture candidate given as JSON.
    CertifyCandidate {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Prime-interval constants from a certificate.
    Bounds {
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long, default_values = ["0", "1"])]
        alpha: Vec<String>,
        /// Emit JSON records instead of statements.
        #[arg(long)]
        json: bool,
    },
    /// Certify the published candidate and, given a solution, verify it.
    ReproducePaper {
        #[arg(long, requires = "solution")]
        problem: Option<PathBuf>,
        #[arg(long, requires = "problem")]
        solution: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Verify { check: String, detail: String },
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Verify { .. } => EXIT_VERIFY_FAILED,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Verify { check, detail } => write!(f, "verification failed [{check}]: {detail}"),
            CliError::Solver(m) => write!(f, "solver failed: {m}"),
        }
    }
}

impl From<SdpError> for CliError {
    fn from(e: SdpError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CandidateError> for CliError {
    fn from(e: CandidateError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::VacuousBound(_) => CliError::Verify {
                check: "vacuous-bound".into(),
                detail: e.to_string(),
            },
            other => CliError::Input(other.to_string()),
        }
    }
}

fn verify_error(e: CertifyError) -> CliError {
    let check = match &e {
        CertifyError::PsdFailure { block, .. } => format!("psd:{block}"),
        CertifyError::Gershgorin { .. } => "gershgorin".into(),
        CertifyError::Indeterminate { .. } => "indeterminate".into(),
        CertifyError::Denominator(_) => "denominator".into(),
        CertifyError::Laguerre(_) => "laguerre".into(),
        CertifyError::Rigor(_) => "enclosure".into(),
    };
    CliError::Verify {
        check,
        detail: e.to_string(),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_CERTIFIED,
        Err(e) => {
            if let CliError::Verify { check, detail } = &e {
                let report = json!({"status": "failed", "check": check, "detail": detail});
                out!("{report}");
            }
            eprintln!("cplus: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli, needs_a: bool) -> Result<Validated, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::Input(e.to_string()))?,
        None => {
            let a = match (&cli.a, needs_a) {
                (Some(a), _) => a.clone(),
                (None, false) => "1".into(),
                (None, true) => return Err(CliError::Input("no config file and no --A given".into())),
            };
            RunConfig::new(&a)
        }
    };
    if let Some(a) = &cli.a {
        cfg.a = a.clone();
    }
    if let Some(d) = cli.degree {
        cfg.degree = d;
    }
    if let Some(e) = &cli.epsilon {
        cfg.epsilon = e.clone();
    }
    if let Some(b) = cli.precision_bits {
        cfg.precision_bits = b;
    }
    cfg.validate(cli.workspace.as_deref())
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::BuildSdp { out } => build_sdp(cli, out.as_deref()),
        Command::Solve { input, output } => {
            let cfg = load_config(cli, false)?;
            solve(&cfg, input, output)
        }
        Command::Verify {
            problem,
            solution,
            certificate,
        } => {
            let cfg = load_config(cli, false)?;
            let cert = verify(&cfg, problem, solution)?;
            emit_certificate(cli, &cfg, &cert, certificate.as_deref())
        }
        Command::CertifyCandidate { candidate, certificate } => {
            let cfg = load_config(cli, true)?;
            let f = GaussianMixture::load(candidate, cfg.prec)?;
            let cert = certify_candidate(&cfg, &f)?;
            emit_certificate(cli, &cfg, &cert, certificate.as_deref())
        }
        Command::Bounds {
            certificate,
            alpha,
            json,
        } => bounds_cmd(certificate, alpha, *json),
        Command::ReproducePaper { problem, solution } => {
            let cfg = load_config(cli, false)?;
            reproduce(&cfg, problem.as_deref(), solution.as_deref())
        }
    }
}

fn write_once(path: &Path, contents: &str, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Input(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".config.toml");
    path.with_file_name(name)
}

/// Writes `contents` and the config it came from next to it.
fn write_output(path: &Path, contents: &str, cfg: &Validated, force: bool) -> Result<(), CliError> {
    write_once(path, contents, force)?;
    write_once(&sidecar(path), &cfg.config.to_toml(), force)
}

fn slug(a: &Rational) -> String {
    a.to_string().replace('/', "_")
}

#[derive(Debug, Serialize)]
struct Manifest {
    file: String,
    sha256: String,
    #[serde(rename = "A")]
    a: String,
    degree: usize,
    epsilon: String,
    trace_penalty: String,
    precision_bits: u32,
    constraints: usize,
    block_sizes: Vec<usize>,
    config_hash: String,
}

fn build_sdp(cli: &Cli, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load_config(cli, true)?;
    let d = cfg.config.degree;
    let opts = AssembleOptions {
        prec: cfg.prec,
        trace_penalty: cfg.trace_penalty.clone(),
    };
    let p = sdp::assemble_with_options(&cfg.a, d, &cfg.epsilon, &opts)?;
    let text = sdp::to_sdpa_string(&p, sdp::DEFAULT_DIGITS);
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir().join(format!("cplus_A{}_d{d}.dat-s", slug(&cfg.a))));
    write_output(&path, &text, &cfg, cli.force)?;
    let manifest = Manifest {
        file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
        a: cfg.a.to_string(),
        degree: d,
        epsilon: cfg.epsilon.to_string(),
        trace_penalty: cfg.trace_penalty.to_string(),
        precision_bits: cfg.prec.bits(),
        constraints: p.num_constraints(),
        block_sizes: p.block_sizes.clone(),
        config_hash: cfg.hash.clone(),
    };
    let manifest = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    write_once(&path.with_extension("manifest.json"), &manifest, cli.force)?;
    out!("{manifest}");
    Ok(())
}

/// Splits the template on whitespace and substitutes the placeholders; no
/// shell is involved.
pub fn solver_argv(template: &str, input: &Path, output: &Path) -> Vec<String> {
    template
        .split_whitespace()
        .map(|tok| {
            tok.replace("{input}", &input.to_string_lossy())
                .replace("{output}", &output.to_string_lossy())
        })
        .collect()
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|c| c.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

fn solve(cfg: &Validated, input: &Path, output: &Path) -> Result<(), CliError> {
    if !input.exists() {
        return Err(CliError::Input(format!("{}: no such file", input.display())));
    }
    let argv = solver_argv(&cfg.config.solver_command, &absolute(input), &absolute(output));
    let (prog, args) = argv
        .split_first()
        .ok_or_else(|| CliError::Input("empty solver command".into()))?;
    eprintln!("cplus: running {}", argv.join(" "));
    let status = Process::new(prog)
        .args(args)
        .current_dir(&cfg.workspace)
        .status()
        .map_err(|e| CliError::Solver(format!("{prog}: {e}")))?;
    if !status.success() {
        return Err(CliError::Solver(format!("{prog} exited with {status}")));
    }
    if !output.exists() {
        return Err(CliError::Solver(format!("{} was not written", output.display())));
    }
    Ok(())
}

pub fn verify(cfg: &Validated, problem: &Path, solution: &Path) -> Result<Certificate, CliError> {
    let p = sdp::read_sdpa(problem)?;
    let (t, meta) = sdp::read_solution(solution, &p)?;
    for w in &meta.warnings {
        eprintln!("cplus: warning: {w}");
    }
    if let Some(phase) = &meta.phase {
        eprintln!("cplus: solver phase {phase}");
    }
    let opts = CertifyOptions {
        prec: cfg.prec.max(p.prec),
        max_bits: Precision::MAX_ESCALATION_BITS,
    };
    let b = certify::absorb_and_certify(&t, &p.a, &opts).map_err(verify_error)?;
    Ok(b.certificate(Some(&cfg.hash)))
}

pub fn certify_candidate(cfg: &Validated, f: &GaussianMixture) -> Result<Certificate, CliError> {
    let rep = candidate::certify_candidate(f, &cfg.a, &cfg.quadrature())?;
    for (name, q) in [("|F|", &rep.l1), ("(F^)+", &rep.positive_part)] {
        eprintln!(
            "cplus: integral of {name}: {} ({} pieces, cutoff {}{})",
            q.value,
            q.subdivisions,
            q.tail_cutoff.mid_f64(),
            if q.converged { "" } else { ", budget exhausted" }
        );
    }
    if rep.vacuous {
        eprintln!("cplus: warning: certified quotient is not positive");
    }
    Ok(rep.bound.certificate(Some(&cfg.hash)))
}

fn emit_certificate(cli: &Cli, cfg: &Validated, cert: &Certificate, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(cert).unwrap_or_default() + "\n";
    if let Some(p) = path {
        write_output(p, &text, cfg, cli.force)?;
    }
    out!("{}", text.trim_end());
    eprintln!("cplus: C+({}) >= {}", cert.a, cert.certified_lower);
    Ok(())
}

fn bounds_cmd(certificate: &Path, alpha: &[String], json_out: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(certificate).map_err(|e| CliError::Input(format!("{}: {e}", certificate.display())))?;
    let cert: Certificate =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", certificate.display())))?;
    let (a, lower) = bounds::lower_from_certificate(&cert)?;
    let mut records = Vec::new();
    for al in alpha {
        let al = parse_exact_rational(al).map_err(|e| CliError::Input(format!("alpha: {e}")))?;
        let c = interval_constant_from_lower(&a, &lower, &al)?;
        if json_out {
            records.push(c.record());
        } else {
            out!("[{}] {}\n", c.context, c.statement);
        }
    }
    if json_out {
        out!("{}", serde_json::to_string_pretty(&records).unwrap_or_default());
    }
    Ok(())
}

fn reproduce(cfg: &Validated, problem: Option<&Path>, solution: Option<&Path>) -> Result<(), CliError> {
    let mut ok = true;
    let a = Rational::from((36, 11));
    let f = GaussianMixture::from_json(REFERENCE_CANDIDATE, cfg.prec)?;
    let rep = candidate::certify_candidate(&f, &a, &cfg.quadrature())?;
    let claim = parse_exact_rational(REFERENCE_CANDIDATE_CLAIM).map_err(|e| CliError::Input(e.to_string()))?;
    let lower = rep.bound.certified_lower();
    let pass = lower > claim;
    ok &= pass;
    let cert = rep.bound.certificate(Some(&cfg.hash));
    out!(
        "[{}] five-term candidate: C+(36/11) >= {} (claimed > {})",
        if pass { "PASS" } else { "FAIL" },
        cert.certified_lower,
        REFERENCE_CANDIDATE_CLAIM
    );
    let lower_q = lower.to_rational().unwrap_or_default();
    for al in [0u32, 1] {
        let c = interval_constant_from_lower(&a, &lower_q, &Rational::from(al))?;
        out!("  alpha = {al}: c <= {}", c.record().c_display);
    }
    if let (Some(problem), Some(solution)) = (problem, solution) {
        match verify(cfg, problem, solution) {
            Ok(cert) => {
                out!("[PASS] SDP solution: C+({}) >= {} (degree {})", cert.a, cert.certified_lower, cert.degree);
                let (a, lower) = bounds::lower_from_certificate(&cert)?;
                for al in [0u32, 1] {
                    let c = interval_constant_from_lower(&a, &lower, &Rational::from(al))?;
                    out!("  alpha = {al}: c <= {}", c.record().c_display);
                }
            }
            Err(e) => {
                out!("[FAIL] SDP solution: {e}");
                ok = false;
            }
        }
    }
    if ok {
        Ok(())
    } else {
        Err(CliError::Verify {
            check: "reproduce".into(),
            detail: "a reproduction check failed".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argv_substitution() {
        let v = solver_argv("python3 tools/s.py {input} {output} x={output}", Path::new("/a b"), Path::new("o"));
        assert_eq!(v, vec!["python3", "tools/s.py", "/a b", "o", "x=o"]);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("out/c.json")), PathBuf::from("out/c.json.config.toml"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 3);
        assert_eq!(CliError::Solver(String::new()).exit_code(), 4);
        assert_eq!(
            CliError::Verify {
                check: String::new(),
                detail: String::new()
            }
            .exit_code(),
            2
        );
        assert_eq!(main_with_args(["cplus", "no-such-command"]), 3);
        assert_eq!(main_with_args(["cplus", "certify-candidate", "--candidate", "/nonexistent.json", "--A", "4"]), 3);
    }
}
