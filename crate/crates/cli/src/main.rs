//! `pidinst`: validate, convert, register and resolve instrument PIDs.
//!
//! Payloads go to stdout and diagnostics to stderr. Exit status is 0 on
//! success, 1 when the input or the registry says no (invalid record,
//! unknown PID, missing identifier) and 2 when the command could not run
//! (unreadable file, malformed input, unreachable registry).

mod client;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "pidinst", version, about = "Instrument persistent identifier tools")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Base URL of a registry service, e.g. http://127.0.0.1:8080
    #[arg(long, global = true, env = "PIDINST_REGISTRY_URL")]
    pub registry_url: Option<String>,

    /// Directory of vocabulary snapshots (defaults to the built-in set)
    #[arg(long, global = true, env = "PIDINST_VOCAB_DIR")]
    pub vocab_dir: Option<PathBuf>,

    /// Bearer token for registry writes
    #[arg(long, global = true, env = "PIDINST_API_TOKEN", hide_env_values = true)]
    pub token: Option<String>,

    /// Colour severity labels in reports
    #[arg(long, global = true, env = "PIDINST_COLOR")]
    pub color: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check records against the schema rules
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Convert a record to another serialization
    Convert(ConvertArgs),
    /// Register a record with the registry and print its new PID
    Mint { file: PathBuf },
    /// Print the landing page of a PID, or its handle record
    Resolve {
        pid: String,
        #[arg(long)]
        noredirect: bool,
    },
    /// Retire a PID, keeping its last metadata resolvable
    Tombstone { pid: String },
    /// Report the HTTP status of each record's landing page
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Query the relation graph of a directory of records
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Embed or extract a PID in a SensorML document
    Sensorml {
        #[command(subcommand)]
        command: SensorMlCommand,
    },
    /// Run the registry service
    Serve {
        #[arg(long, env = "PIDINST_CONFIG")]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub to: OutputFormat,
    /// DataCite publisher (defaults to the first owner)
    #[arg(long)]
    pub publisher: Option<String>,
    /// DataCite publication year (defaults to the earliest date's year)
    #[arg(long)]
    pub publication_year: Option<u16>,
    #[arg(long, value_enum, default_value_t = CreatorChoice::Manufacturer)]
    pub creators: CreatorChoice,
    /// Add NAME and LANDINGPAGE information types to handle records
    #[arg(long)]
    pub info_types: bool,
    /// Resolver base for the identifier in handle records
    #[arg(long, default_value = pidinst::pid::DEFAULT_HANDLE_RESOLVER)]
    pub resolver: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Canonical,
    Handle,
    DataciteXml,
    DataciteJson,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CreatorChoice {
    Manufacturer,
    Owner,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionArg {
    Out,
    In,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Edges,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum GraphCommand {
    /// Print every edge
    Build {
        corpus_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
        format: GraphFormat,
    },
    /// Print the edges touching one PID
    Neighbors {
        corpus_dir: PathBuf,
        pid: String,
        #[arg(long)]
        relation: Option<String>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Out)]
        direction: DirectionArg,
    },
    /// Print link targets that have no record in the corpus
    Dangling { corpus_dir: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum SensorMlCommand {
    /// Add the PID to the document's identifier list
    Embed {
        doc: PathBuf,
        #[arg(long)]
        pid: String,
        /// Overwrite a different PID already embedded
        #[arg(long)]
        replace: bool,
        /// Write here instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the embedded PID
    Extract { doc: PathBuf },
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { files, format } => commands::validate(&cli.global, &files, format),
        Command::Convert(args) => commands::convert(&cli.global, &args),
        Command::Mint { file } => client::mint(&cli.global, &file),
        Command::Resolve { pid, noredirect } => client::resolve(&cli.global, &pid, noredirect),
        Command::Tombstone { pid } => client::tombstone(&cli.global, &pid),
        Command::Check { files } => client::check(&files),
        Command::Graph { command } => commands::graph(&command),
        Command::Sensorml { command } => commands::sensorml(&command),
        Command::Serve { config } => commands::serve(&config),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pidinst: {e:#}");
            ExitCode::from(2)
        }
    }
}
