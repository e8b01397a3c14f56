use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdt_core::scenario::{self, Format, Protocol, Scenario};
use qdt_core::QdtError;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_COUNTEREXAMPLE: u8 = 4;

#[derive(Parser)]
#[command(name = "qdt", version, about = "Quantum decision theory engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON, schema qdt/1).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the residual tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-choice probabilities and, with a subject space, their decomposition.
    Eval(Common),
    /// Two-step choice in both orders.
    Sequence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Prospect probabilities split into rational and quality parts.
    Behavioral(Common),
    /// Monte-Carlo cohort of decision makers.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value = "single", value_parser = parse_protocol)]
        protocol: Protocol,
    },
    /// Checks every identity over random instances.
    Audit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Parses the scenario and prints its normalized form.
    Validate(Common),
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: QdtError| e.to_string())
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: QdtError| e.to_string())
}

enum Failure {
    Validation(String, Option<&'static str>),
    Runtime(String, Option<&'static str>),
}

impl From<QdtError> for Failure {
    fn from(e: QdtError) -> Self {
        let hint = e.hint();
        if e.is_validation() {
            Failure::Validation(e.to_string(), hint)
        } else {
            Failure::Runtime(e.to_string(), hint)
        }
    }
}

fn load(common: &Common) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&common.scenario).map_err(|e| {
        Failure::Validation(format!("cannot read {}: {e}", common.scenario.display()), None)
    })?;
    let mut s = scenario::parse_scenario(&text).map_err(QdtError::from)?;
    if let Some(seed) = common.seed {
        s = s.with_seed(seed);
    }
    if let Some(tol) = common.tolerance {
        s = s.with_residual_tolerance(tol)?;
    }
    log::debug!("loaded scenario with decision dimension {}", s.decision_dim());
    Ok(s)
}

/// Writes to a temporary file in the target directory, then renames it.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(common: &Common, text: String) -> Result<(), Failure> {
    match &common.out {
        Some(path) => write_atomic(path, &text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()), None)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Runtime(format!("cannot write output: {e}"), None))
        }
    }
}

fn render<T: serde::Serialize>(common: &Common, report: &T) -> Result<(), Failure> {
    let text = scenario::render(report, common.format, scenario::DEFAULT_DIGITS)?;
    emit(common, text)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Eval(c) => render(&c, &scenario::run_eval(&load(&c)?)?)?,
        Command::Behavioral(c) => render(&c, &scenario::run_behavioral(&load(&c)?)?)?,
        Command::Sequence { common, first, second } => {
            render(&common, &scenario::run_sequence(&load(&common)?, &first, &second)?)?
        }
        Command::Sample { common, n, protocol } => {
            render(&common, &scenario::run_sample(&load(&common)?, n, protocol)?)?
        }
        Command::Audit { common, trials } => {
            let report = scenario::run_symmetry_audit(&load(&common)?, trials)?;
            render(&common, &report)?;
            if !report.passed {
                for r in report.identities.iter().filter(|r| !r.passed) {
                    eprintln!(
                        "counterexample: {} residual {:.3e} exceeds {:.1e}",
                        r.identity, r.max_residual, r.tolerance
                    );
                }
                return Ok(EXIT_COUNTEREXAMPLE);
            }
        }
        Command::Validate(c) => {
            let s = load(&c)?;
            let text = match c.format {
                Format::Json => scenario::emit_scenario(&s) + "\n",
                other => scenario::render(s.doc(), other, scenario::DEFAULT_DIGITS)?,
            };
            emit(&c, text)?;
            eprintln!("scenario is valid");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Validation(msg, hint)) => {
            report(&msg, hint);
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(msg, hint)) => {
            report(&msg, hint);
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn report(msg: &str, hint: Option<&str>) {
    eprintln!("error: {msg}");
    if let Some(h) = hint {
        eprintln!("hint: {h}");
    }
}
