//! Command-line front end for `splitmeas`.
//!
//! Exit codes: 0 on success, 1 when a check or input invariant fails,
//! 2 for usage, I/O and parse errors.

pub mod files;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use splitmeas::constructions::{construction1, construction2, EffectivePovm};
use splitmeas::generators::GenConfig;
use splitmeas::harness::{format_sig, run_qkd_demo, run_suite, run_trial, TrialResult, SLACK_FLOOR};

use files::{to_json, EffectivePovmFile, FileError, ReportFile, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "splitmeas", version, about = "Split joint measurements into per-subsystem POVMs and check the information bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the randomized verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Build the effective POVM of one subsystem from a scenario file.
    Construct(ConstructArgs),
    /// Print information quantities and slacks for a scenario file.
    Info(InfoArgs),
    /// BB84 signals under a joint Bell measurement.
    QkdDemo,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Subsystem dimensions, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub dims: Vec<usize>,
    /// States per subsystem, comma-separated. A single value applies to all subsystems.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub states: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub outcomes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "splitmeas-report.json")]
    pub output: PathBuf,
    /// Print the report JSON to stdout instead of the text summary.
    #[arg(long)]
    pub machine_readable: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    pub scenario: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub method: u8,
    /// One-based subsystem number.
    #[arg(long)]
    pub subsystem: usize,
    /// Where to write the effective POVM; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    pub scenario: PathBuf,
    #[arg(long)]
    pub machine_readable: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    File(#[from] FileError),

    #[error(transparent)]
    Core(#[from] splitmeas::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::File(FileError::Parse { .. }) => EXIT_USAGE,
            CliError::File(FileError::Invalid { .. }) | CliError::Core(_) => EXIT_FAILED,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn stdout_err(source: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

pub fn read_scenario(path: &Path) -> Result<splitmeas::qcore::Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(ScenarioFile::parse(&text)?.to_scenario()?)
}

/// Runs a parsed command, printing errors to stderr. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Construct(a) => cmd_construct(&a, out),
        Command::Info(a) => cmd_info(&a, out),
        Command::QkdDemo => cmd_qkd_demo(out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn verify_config(a: &VerifyArgs) -> Result<GenConfig, CliError> {
    if a.dims.len() < 2 {
        return Err(CliError::Usage(format!(
            "--dims needs K ≥ 2 subsystems, got {}",
            a.dims.len()
        )));
    }
    let states = match a.states.len() {
        1 => vec![a.states[0]; a.dims.len()],
        n if n == a.dims.len() => a.states.clone(),
        n => {
            return Err(CliError::Usage(format!(
                "--states has {n} entries for {} subsystems",
                a.dims.len()
            )))
        }
    };
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let cfg = GenConfig::new(a.dims.clone(), states, a.outcomes, a.seed);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = verify_config(a)?;
    let report = run_suite(&cfg, a.trials);
    let file = ReportFile::new(cfg, a.trials, report);
    let json = to_json(&file);
    std::fs::write(&a.output, &json).map_err(io_err(&a.output))?;

    let r = &file.report;
    if a.machine_readable {
        out.write_all(json.as_bytes()).map_err(stdout_err)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "trials: {}  failures: {}", r.trials, r.failures.len());
        let _ = writeln!(
            s,
            "positive gap: {} of {} trials",
            r.positive_gap_trials, r.trials
        );
        if r.construction2_extension {
            let _ = writeln!(s, "construction 2 used tuple contexts (K > 2)");
        }
        let _ = writeln!(s, "min slacks:");
        for (k, v) in &r.min_slacks {
            let _ = writeln!(s, "  {k:<16} {}", format_sig(*v));
        }
        let _ = writeln!(s, "max residuals:");
        for (k, v) in &r.max_residuals {
            let _ = writeln!(s, "  {k:<16} {}", format_sig(*v));
        }
        for f in r.failures.iter().take(10) {
            let _ = writeln!(s, "FAIL trial {} (seed {}): {}", f.trial_index, f.seed, describe_failure(f));
        }
        let _ = writeln!(s, "report written to {}", a.output.display());
        let _ = writeln!(s, "{}", if r.passed() { "PASS" } else { "FAIL" });
        out.write_all(s.as_bytes()).map_err(stdout_err)?;
    }
    Ok(if r.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn describe_failure(f: &splitmeas::harness::TrialFailure) -> String {
    match &f.error {
        Some(e) => e.clone(),
        None => f.violations.join("; "),
    }
}

pub fn effective_povm(s: &splitmeas::qcore::Scenario, method: u8, subsystem: usize) -> Result<EffectivePovm, CliError> {
    let k = s.num_subsystems();
    if subsystem == 0 || subsystem > k {
        return Err(CliError::Usage(format!(
            "--subsystem must be between 1 and {k}, got {subsystem}"
        )));
    }
    Ok(match method {
        1 => construction1(s, subsystem - 1)?,
        2 => construction2(s, subsystem - 1)?,
        m => return Err(CliError::Usage(format!("--method must be 1 or 2, got {m}"))),
    })
}

pub fn cmd_construct(a: &ConstructArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let s = read_scenario(&a.scenario)?;
    let e = effective_povm(&s, a.method, a.subsystem)?;
    let file = EffectivePovmFile::from_effective(&e);
    let json = to_json(&file);
    match &a.output {
        Some(path) => {
            std::fs::write(path, &json).map_err(io_err(path))?;
            let mut s = String::new();
            let _ = writeln!(
                s,
                "construction {} for subsystem {}: {} elements",
                file.method,
                file.subsystem,
                file.povm.elements.len()
            );
            if let Some(ctx) = &file.chosen_context {
                let _ = writeln!(s, "chosen context: {ctx:?}");
            }
            let _ = writeln!(s, "completeness residual: {}", format_sig(file.completeness_residual));
            let _ = writeln!(s, "min eigenvalue: {}", format_sig(file.min_eigenvalue));
            let _ = writeln!(s, "written to {}", path.display());
            out.write_all(s.as_bytes()).map_err(stdout_err)?;
        }
        None => out.write_all(json.as_bytes()).map_err(stdout_err)?,
    }
    let v = e.validation(&Default::default());
    Ok(if v.passed { EXIT_OK } else { EXIT_FAILED })
}

#[derive(Debug, Serialize)]
struct InfoReport<'a> {
    passed: bool,
    violations: Vec<String>,
    #[serde(flatten)]
    trial: &'a TrialResult,
}

pub fn format_info(t: &TrialResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "I_joint = {} bits", format_sig(t.i_joint));
    for (k, (c1, c2)) in t.i_c1.iter().zip(&t.i_c2).enumerate() {
        let _ = writeln!(
            s,
            "subsystem {}: construction 1 I = {}, construction 2 I = {} (context {:?})",
            k + 1,
            format_sig(*c1),
            format_sig(*c2),
            t.chosen_contexts[k]
        );
    }
    let _ = writeln!(s, "slacks:");
    for (k, v) in &t.slacks {
        let _ = writeln!(s, "  {k:<16} {}", format_sig(*v));
    }
    let _ = writeln!(s, "identity residuals:");
    for (k, v) in &t.identity_residuals {
        let _ = writeln!(s, "  {k:<16} {}", format_sig(*v));
    }
    for v in t.violations() {
        let _ = writeln!(s, "VIOLATION {v}");
    }
    s
}

pub fn cmd_info(a: &InfoArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let s = read_scenario(&a.scenario)?;
    let t = run_trial(&s, None)?;
    let text = if a.machine_readable {
        to_json(&InfoReport {
            passed: t.passed(),
            violations: t.violations(),
            trial: &t,
        })
    } else {
        format_info(&t)
    };
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    Ok(if t.passed() { EXIT_OK } else { EXIT_FAILED })
}

pub fn cmd_qkd_demo(out: &mut dyn Write) -> Result<i32, CliError> {
    let demo = run_qkd_demo()?;
    out.write_all(demo.summary.as_bytes()).map_err(stdout_err)?;
    let ok = demo.trial.slacks.get("thm1").is_some_and(|&s| s >= SLACK_FLOOR);
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}
