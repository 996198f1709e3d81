use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand};
use kbconf_server::api::{Args, Choice, Op, ProblemRef, Request, Status};
use kbconf_server::{http, report, Service};

/// Interactive configuration over a knowledge base file.
///
/// Batch commands print a readable report followed by the JSON response on
/// the last line. Exit code 0 means ok, 1 unsat, 2 a usage or input error.
#[derive(Parser)]
#[command(name = "kbconf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Batch {
    /// Knowledge base: `vocabulary { .. } theory { .. } structure { .. }`.
    file: PathBuf,
    /// A choice, applied in the order given.
    #[arg(long, value_name = "TERM=VALUE")]
    choose: Vec<String>,
    #[arg(long, value_name = "SECONDS", default_value_t = 10.0)]
    timeout: f64,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Whether the choices extend to a model, or with --total whether the
    /// given assignment is one.
    Check {
        #[command(flatten)]
        batch: Batch,
        /// File of `TERM=VALUE` lines fixing every parameter.
        #[arg(long, value_name = "FILE")]
        total: Option<PathBuf>,
    },
    /// Some model extending the choices.
    Expand {
        #[command(flatten)]
        batch: Batch,
    },
    /// A model extending the choices with the least objective value.
    Minimize {
        #[command(flatten)]
        batch: Batch,
        #[arg(long, value_name = "TERM")]
        objective: String,
    },
    /// Everything the choices force.
    Propagate {
        #[command(flatten)]
        batch: Batch,
    },
    /// Why the choices admit no model.
    Explain {
        #[command(flatten)]
        batch: Batch,
        /// Sentence label or instance id not to blame.
        #[arg(long, value_name = "LABEL")]
        background: Vec<String>,
        /// Smallest explanation instead of a subset-minimal one.
        #[arg(long)]
        minimum: bool,
        /// List up to N explanations.
        #[arg(long, value_name = "N")]
        all: Option<usize>,
    },
    /// HTTP service on 127.0.0.1.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of `*.kb` presets.
        #[arg(long, value_name = "DIR", default_value = "presets")]
        presets: PathBuf,
        /// Per-request budget.
        #[arg(long, value_name = "SECONDS", default_value_t = 10.0)]
        timeout: f64,
    },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn request(batch: &Batch, op: Op) -> Result<Request, String> {
    let mut r = Request::new(ProblemRef::Source(read(&batch.file)?), op);
    r.choices = batch.choose.iter().map(|c| Choice::parse(c)).collect();
    r.seed = batch.seed;
    r.timeout_ms = Some(seconds(batch.timeout)?.as_millis() as u64);
    Ok(r)
}

fn seconds(s: f64) -> Result<Duration, String> {
    Duration::try_from_secs_f64(s).map_err(|_| format!("invalid timeout {s}"))
}

fn build(command: &Command) -> Result<Request, String> {
    Ok(match command {
        Command::Check { batch, total: None } => request(batch, Op::Check)?,
        Command::Check { batch, total: Some(path) } => {
            let mut r = request(batch, Op::Modelcheck)?;
            let text = read(path)?;
            r.choices.extend(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with("//"))
                    .map(Choice::parse),
            );
            r
        }
        Command::Expand { batch } => request(batch, Op::Expand)?,
        Command::Minimize { batch, objective } => {
            let mut r = request(batch, Op::Minimize)?;
            r.args.objective = Some(objective.clone());
            r
        }
        Command::Propagate { batch } => request(batch, Op::Propagate)?,
        Command::Explain {
            batch,
            background,
            minimum,
            all,
        } => {
            let mut r = request(batch, Op::Explain)?;
            r.args = Args {
                background: background.clone(),
                minimum: *minimum,
                limit: *all,
                ..Args::default()
            };
            r
        }
        Command::Serve { .. } => unreachable!("not a batch command"),
    })
}

fn serve(port: u16, presets: &Path, timeout: f64) -> Result<(), String> {
    let service = Service::from_dir(presets)?.with_timeout(seconds(timeout)?);
    let names: Vec<String> = service.presets().into_iter().map(|p| p.name).collect();
    eprintln!("serving {} on http://127.0.0.1:{port}/api/v1/infer", names.join(", "));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(http::serve(Arc::new(service), port)).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port, presets, timeout } = &cli.command {
        return match serve(*port, presets, *timeout) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("kbconf: {e}");
                ExitCode::from(2)
            }
        };
    }
    let req = match build(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kbconf: {e}");
            return ExitCode::from(2);
        }
    };
    let response = Service::new().handle(&req);
    let mut out = std::io::stdout().lock();
    let json = serde_json::to_string(&response).expect("response serializes");
    let _ = write!(out, "{}", report::render(&response)).and_then(|_| writeln!(out, "{json}"));
    match response.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Unsat => ExitCode::from(1),
        Status::Error => ExitCode::from(2),
    }
}
