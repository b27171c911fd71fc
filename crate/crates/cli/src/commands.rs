use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::Datelike;
use pidinst::crosswalk::*;
use pidinst::*;
use pidinst_registry::{serve_listener, Registry, RegistryConfig};

use crate::{
    ConvertArgs, CreatorChoice, DirectionArg, Global, GraphCommand, GraphFormat, OutputFormat, ReportFormat,
    SensorMlCommand, Status,
};

pub fn vocabulary(global: &Global) -> Result<VocabularySet> {
    match &global.vocab_dir {
        None => Ok(VocabularySet::builtin()),
        Some(dir) => {
            if !dir.is_dir() {
                bail!("vocabulary directory {} does not exist", dir.display());
            }
            VocabularySet::load_dir(dir).with_context(|| format!("loading vocabularies from {}", dir.display()))
        }
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn load_record(path: &Path) -> Result<InstrumentRecord> {
    parse_record(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn paint(text: &str, color: bool) -> String {
    if !color {
        return text.to_string();
    }
    text.lines()
        .map(|l| {
            if let Some(rest) = l.strip_prefix("error") {
                format!("\x1b[31merror\x1b[0m{rest}")
            } else if let Some(rest) = l.strip_prefix("warning") {
                format!("\x1b[33mwarning\x1b[0m{rest}")
            } else {
                l.to_string()
            }
        })
        .map(|l| l + "\n")
        .collect()
}

pub fn validate(global: &Global, files: &[PathBuf], format: ReportFormat) -> Result<Status> {
    let vocab = vocabulary(global)?;
    let mut unreadable = 0;
    let mut invalid = false;
    let mut json_reports = Vec::new();
    for file in files {
        let record = match load_record(file) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("pidinst: {e:#}");
                unreadable += 1;
                continue;
            }
        };
        let report = pidinst::validate(&record, &vocab);
        invalid |= !report.is_valid();
        match format {
            ReportFormat::Text => {
                let errors = report.errors().count();
                let warnings = report.warnings().count();
                println!("{}: {errors} error(s), {warnings} warning(s)", file.display());
                print!("{}", paint(&report.to_string(), global.color));
            }
            ReportFormat::Json => json_reports.push(serde_json::json!({
                "file": file.display().to_string(),
                "valid": report.is_valid(),
                "violations": report.violations,
            })),
        }
    }
    if format == ReportFormat::Json {
        println!("{}", serde_json::to_string_pretty(&json_reports)?);
    }
    if unreadable > 0 {
        bail!("{unreadable} file(s) could not be checked");
    }
    Ok(if invalid { Status::Failed } else { Status::Ok })
}

fn publication_year(args: &ConvertArgs, record: &InstrumentRecord) -> u16 {
    if let Some(y) = args.publication_year {
        return y;
    }
    let earliest = record
        .dates
        .iter()
        .filter_map(|d| d.calendar_date())
        .min()
        .and_then(|d| u16::try_from(d.year()).ok());
    earliest.unwrap_or_else(|| {
        let y = chrono::Utc::now().year();
        eprintln!("pidinst: no --publication-year and no dates; using {y}");
        u16::try_from(y).unwrap_or(u16::MAX)
    })
}

pub fn convert(global: &Global, args: &ConvertArgs) -> Result<Status> {
    let record = load_record(&args.file)?;
    let report = pidinst::validate(&record, &vocabulary(global)?);
    if !report.is_valid() {
        eprint!("{}", paint(&report.to_string(), global.color));
        return Ok(Status::Failed);
    }
    let out = match args.to {
        OutputFormat::Canonical => canonicalize(&record),
        OutputFormat::Handle => {
            let opts = HandleOptions {
                resolver: args.resolver.clone(),
                info_types: args.info_types,
            };
            to_handle_record_with(&record, &TypeHandleMap::default(), &opts)?.render()
        }
        OutputFormat::DataciteXml | OutputFormat::DataciteJson => {
            let publisher = match (&args.publisher, record.owners.first()) {
                (Some(p), _) => p.clone(),
                (None, Some(o)) => o.name.clone(),
                (None, None) => bail!("no --publisher given and the record has no owner"),
            };
            let opts = DataCiteOptions {
                publisher,
                publication_year: publication_year(args, &record),
                creator_policy: match args.creators {
                    CreatorChoice::Manufacturer => CreatorPolicy::ManufacturerAsCreator,
                    CreatorChoice::Owner => CreatorPolicy::OwnerAsCreator,
                },
            };
            let (dc, warnings) = to_datacite(&record, &opts)?;
            for w in warnings {
                eprintln!("warning: {}: {}", w.path, w.message);
            }
            let format = if args.to == OutputFormat::DataciteXml {
                DataCiteFormat::Xml
            } else {
                DataCiteFormat::Json
            };
            render_datacite(&dc, format)
        }
    };
    print!("{out}");
    Ok(Status::Ok)
}

fn load_corpus(dir: &Path) -> Result<Vec<InstrumentRecord>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "pidinst"));
    paths.sort();
    paths.iter().map(|p| load_record(p)).collect()
}

pub fn graph(command: &GraphCommand) -> Result<Status> {
    let dir = match command {
        GraphCommand::Build { corpus_dir, .. }
        | GraphCommand::Neighbors { corpus_dir, .. }
        | GraphCommand::Dangling { corpus_dir } => corpus_dir,
    };
    let g = match build_graph(&load_corpus(dir)?) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("pidinst: {e}");
            return Ok(Status::Failed);
        }
    };
    match command {
        GraphCommand::Build { format, .. } => match format {
            GraphFormat::Edges => print!("{}", g.to_edge_list()),
            GraphFormat::Json => print!("{}", g.to_json()),
        },
        GraphCommand::Neighbors {
            pid,
            relation,
            direction,
            ..
        } => {
            let relation = relation.as_deref().map(RelationType::from);
            let direction = match direction {
                DirectionArg::Out => Direction::Out,
                DirectionArg::In => Direction::In,
                DirectionArg::Both => Direction::Both,
            };
            match g.neighbors(pid, relation.as_ref(), direction) {
                Ok(edges) => {
                    for e in edges {
                        println!("{}\t{}\t{}", e.from, e.relation, e.to);
                    }
                }
                Err(e) => {
                    eprintln!("pidinst: {e}");
                    return Ok(Status::Failed);
                }
            }
        }
        GraphCommand::Dangling { .. } => {
            for d in g.dangling() {
                println!("{d}");
            }
        }
    }
    Ok(Status::Ok)
}

pub fn sensorml(command: &SensorMlCommand) -> Result<Status> {
    match command {
        SensorMlCommand::Embed {
            doc,
            pid,
            replace,
            output,
        } => {
            let text = read(doc)?;
            let opts = SensorMlOptions {
                on_conflict: if *replace { ConflictPolicy::Replace } else { ConflictPolicy::Fail },
                ..Default::default()
            };
            let out = match embed_sensorml_identifier_with(&text, &Pid::parse(pid), &opts) {
                Ok(out) => out,
                Err(e @ SensorMlError::ConflictingIdentifier { .. }) => {
                    eprintln!("pidinst: {}: {e}", doc.display());
                    return Ok(Status::Failed);
                }
                Err(e) => return Err(anyhow!("{}: {e}", doc.display())),
            };
            match output {
                Some(path) => fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{out}"),
            }
            Ok(Status::Ok)
        }
        SensorMlCommand::Extract { doc } => {
            let text = read(doc)?;
            match extract_sensorml_identifier(&text).map_err(|e| anyhow!("{}: {e}", doc.display()))? {
                Some(pid) => {
                    println!("{}", pid.value());
                    Ok(Status::Ok)
                }
                None => {
                    eprintln!("pidinst: {}: no instrument persistent identifier", doc.display());
                    Ok(Status::Failed)
                }
            }
        }
    }
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

/// Prints the bound address on stdout once the listener is up.
pub fn serve(config_path: &Path) -> Result<Status> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let config = RegistryConfig::load(config_path)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let registry = Registry::open(config)?;
        let listener = tokio::net::TcpListener::bind(registry.config().bind)
            .await
            .with_context(|| format!("cannot bind {}", registry.config().bind))?;
        println!("http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        serve_listener(listener, std::sync::Arc::new(registry), shutdown_signal()).await?;
        Ok(Status::Ok)
    })
}
