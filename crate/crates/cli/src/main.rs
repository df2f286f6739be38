mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "procap", version, about = "Process capability self-assessment toolkit")]
struct Cli {
    /// Content bank (JSON).
    #[arg(long, global = true, env = "BANK_PATH")]
    bank: Option<PathBuf>,
    /// Data directory holding assessments.
    #[arg(long, global = true, env = "DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum OutputMode {
    #[default]
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the content bank.
    #[command(subcommand)]
    Bank(BankCmd),
    /// Rank candidate processes from business-driver and gap ratings.
    Select(SelectArgs),
    /// Create and move assessments through their lifecycle.
    #[command(subcommand)]
    Assessment(AssessmentCmd),
    /// Import a response batch (roster plus responses) into an Open assessment.
    Respond(RespondArgs),
    /// Generate seeded synthetic responses for an assessment.
    Simulate(SimulateArgs),
    /// Show completion per participant and process.
    Progress(AssessmentRef),
    /// Compute capability results for a Closed assessment.
    Measure(AssessmentRef),
    /// Build and render improvement reports.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum BankCmd {
    /// Validate the bank and report every problem found.
    Validate {
        #[arg(long, value_enum, default_value_t)]
        output: OutputMode,
    },
    /// Print bank cardinalities.
    Stats {
        #[arg(long, value_enum, default_value_t)]
        output: OutputMode,
    },
}

#[derive(Args)]
struct SelectArgs {
    /// JSON with `drivers` and `gaps` arrays.
    #[arg(long)]
    input: PathBuf,
    /// Importance and gap weights, e.g. `0.5,0.5`.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<(f64, f64)>,
    /// Only print the first K processes.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    output: OutputMode,
}

#[derive(Args)]
struct AssessmentRef {
    #[arg(long)]
    assessment: String,
    #[arg(long, value_enum, default_value_t)]
    output: OutputMode,
}

#[derive(Args)]
struct Timestamp {
    /// Event time (RFC 3339); defaults to now.
    #[arg(long, value_parser = parse_time)]
    at: Option<DateTime<Utc>>,
}

impl Timestamp {
    fn get(&self) -> DateTime<Utc> {
        self.at.unwrap_or_else(Utc::now)
    }
}

#[derive(Subcommand)]
enum AssessmentCmd {
    /// Create a Draft assessment over one or more processes
    Create {
        #[arg(long)]
        id: String,
        /// Organisation profile description.
        #[arg(long)]
        org: String,
        /// Comma-separated process ids.
        #[arg(long, value_delimiter = ',', required = true)]
        processes: Vec<String>,
        /// Target capability level (1-5).
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=5))]
        target: u8,
        #[command(flatten)]
        at: Timestamp,
    },
    /// Register a participant and print its one-time access token.
    Register {
        #[arg(long)]
        assessment: String,
        #[arg(long)]
        name: String,
        /// `PROCESS=ROLE`, repeatable.
        #[arg(long = "assign", required = true, value_parser = parse_assignment)]
        assignments: Vec<(String, procap_core::Role)>,
        #[arg(long, value_enum, default_value_t)]
        output: OutputMode,
    },
    /// Open a Draft assessment for responses
    Open {
        #[arg(long)]
        assessment: String,
        #[command(flatten)]
        at: Timestamp,
    },
    /// Close an Open assessment; responses are frozen
    Close {
        #[arg(long)]
        assessment: String,
        #[command(flatten)]
        at: Timestamp,
    },
    /// List assessments in the data directory
    List {
        #[arg(long, value_enum, default_value_t)]
        output: OutputMode,
    },
}

#[derive(Args)]
struct RespondArgs {
    #[arg(long)]
    assessment: String,
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    at: Timestamp,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    assessment: String,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Write the generated batch here (stdout when neither this nor --apply is given).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Import the generated batch into the assessment.
    #[arg(long)]
    apply: bool,
    #[command(flatten)]
    at: Timestamp,
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Build the report (Closed assessments) or re-render a stored one.
    Generate {
        #[arg(long)]
        assessment: String,
        /// structured, markdown or html.
        #[arg(long, default_value = "structured")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        at: Timestamp,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "PORT")]
    port: Option<u16>,
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| format!("expected an RFC 3339 timestamp: {e}"))
}

fn parse_weights(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected IMPORTANCE,GAP")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

fn parse_assignment(s: &str) -> Result<(String, procap_core::Role), String> {
    let (p, r) = s.split_once('=').ok_or("expected PROCESS=ROLE")?;
    Ok((p.trim().to_string(), r.trim().parse()?))
}

/// Errors that should exit with the usage status.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
