//! `ocix` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Errors are
//! printed to stderr as `error: <Name>: <detail>`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use super::api::{respond, Endpoint, ResponseFormat};
use super::store::{self, BuildOptions, IndexDir, StoreReport};
use super::{http, ServiceError};
use crate::index::write_csv;
use crate::ingestion::Ingest;
use crate::metrics::{coverage, read_reference_set};
use crate::rdf::serialize_ntriples;
use crate::LICENSE;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ocix", version, about = "Open DOI-to-DOI citation index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct IndexArg {
    /// Built index directory
    #[arg(long, env = "INDEX_DIR", default_value = "index")]
    index_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse JSON Lines dumps into a resource store
    Ingest {
        /// Input files; `-` reads stdin
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "store")]
        store: PathBuf,
    },
    /// Build an index directory from a resource store
    Build {
        #[arg(long, default_value = "store")]
        store: PathBuf,
        #[command(flatten)]
        index: IndexArg,
        /// Agent recorded in provenance
        #[arg(long, default_value = concat!("ocix/", env!("CARGO_PKG_VERSION")))]
        agent: String,
        /// Source recorded in provenance; defaults to the ingested inputs
        #[arg(long)]
        source: Option<String>,
    },
    /// Export the index as CSV or N-Triples
    Export {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, value_enum)]
        format: ExportFormat,
        /// Output file; stdout when omitted
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Corpus statistics, optionally with coverage of a `citing,cited` CSV
    Stats {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Look up citations
    #[command(group(ArgGroup::new("lookup").required(true)))]
    Query {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, group = "lookup", value_name = "DOI")]
        citations: Option<String>,
        #[arg(long, group = "lookup", value_name = "DOI")]
        references: Option<String>,
        #[arg(long, group = "lookup", value_name = "DOI")]
        count: Option<String>,
        #[arg(long, group = "lookup", value_name = "OCI")]
        oci: Option<String>,
        #[arg(long, group = "lookup", value_name = "DOI")]
        metadata: Option<String>,
        /// Provenance chain of a DOI or OCI entity
        #[arg(long, group = "lookup", value_name = "ENTITY")]
        provenance: Option<String>,
        /// Output format for --citations and --references
        #[arg(long, value_enum, default_value = "json")]
        format: ListFormat,
    },
    /// Serve the read-only HTTP API
    Serve {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExportFormat {
    Csv,
    Nt,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ListFormat {
    Json,
    Csv,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", e.name());
            EXIT_DATA
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, ServiceError> {
    match command {
        Command::Ingest { inputs, store } => ingest(&inputs, &store, stdout),
        Command::Build { store, index, agent, source } => {
            let report = store::read_store_report(&store)?;
            let resources = store::read_resources(&store.join(store::RESOURCES_FILE))?;
            let source = source.unwrap_or_else(|| report.sources.join(" "));
            let opts = BuildOptions { agent: &agent, source: &source, at: Utc::now() };
            let built = IndexDir::new(&index.index_dir).build(resources, &opts)?;
            print_json(stdout, &built.manifest)?;
            Ok(EXIT_OK)
        }
        Command::Export { index, format, output } => {
            let loaded = IndexDir::new(&index.index_dir).load()?;
            let write = |sink: &mut dyn Write| match format {
                ExportFormat::Csv => write_csv(&loaded.index, sink),
                ExportFormat::Nt => serialize_ntriples(&loaded.index, sink),
            };
            let n = match &output {
                Some(path) => {
                    let file = File::create(path).map_err(ServiceError::io(path))?;
                    let mut sink = BufWriter::new(file);
                    write(&mut sink).map_err(ServiceError::io(path))?
                }
                None => write(&mut BufWriter::new(&mut *stdout)).map_err(ServiceError::io("stdout"))?,
            };
            let unit = match format {
                ExportFormat::Csv => "citations",
                ExportFormat::Nt => "triples",
            };
            let _ = writeln!(stderr, "exported {n} {unit}");
            Ok(EXIT_OK)
        }
        Command::Stats { index, reference } => {
            let loaded = IndexDir::new(&index.index_dir).load()?;
            let mut body = serde_json::json!({ "stats": loaded.stats, "license": LICENSE });
            if let Some(path) = reference {
                let file = File::open(&path).map_err(ServiceError::io(&path))?;
                let pairs = read_reference_set(BufReader::new(file))?;
                body["coverage"] = serde_json::to_value(coverage(&loaded.index, &pairs)?).expect("serializable");
            }
            print_json(stdout, &body)?;
            Ok(EXIT_OK)
        }
        Command::Query { index, citations, references, count, oci, metadata, provenance, format } => {
            let dir = IndexDir::new(&index.index_dir);
            if let Some(entity) = provenance {
                let chain = dir.provenance()?.provenance_chain(&entity);
                print_json(stdout, &serde_json::json!({ "entity_id": entity, "snapshots": chain }))?;
                return Ok(EXIT_OK);
            }
            // Validate identifiers before paying for the index load.
            if let Some(oci) = &oci {
                crate::identifiers::decode_oci(oci)?;
            }
            for doi in [&citations, &references, &count, &metadata].into_iter().flatten() {
                crate::identifiers::normalize_doi(doi)?;
            }
            let loaded = dir.load()?;
            if let Some(doi) = count {
                let doi = crate::identifiers::normalize_doi(&doi)?;
                writeln!(stdout, "{}", loaded.index.citation_count(&doi)).map_err(ServiceError::io("stdout"))?;
                return Ok(EXIT_OK);
            }
            let endpoint = match (citations, references, oci, metadata) {
                (Some(d), ..) => Endpoint::Citations(d),
                (_, Some(d), ..) => Endpoint::References(d),
                (_, _, Some(o), _) => Endpoint::Citation(o),
                (.., Some(d)) => Endpoint::Metadata(d),
                _ => unreachable!("clap requires one lookup"),
            };
            let format = match format {
                ListFormat::Json => ResponseFormat::Json,
                ListFormat::Csv => ResponseFormat::Csv,
            };
            let response = respond(&loaded, &endpoint, format);
            if !response.is_success() {
                let name = serde_json::from_str::<serde_json::Value>(&response.body)
                    .ok()
                    .and_then(|v| v["error"].as_str().map(str::to_string))
                    .unwrap_or_default();
                let _ = writeln!(stderr, "error: {name}");
                return Ok(EXIT_DATA);
            }
            stdout.write_all(response.body.as_bytes()).map_err(ServiceError::io("stdout"))?;
            if !response.body.ends_with('\n') {
                writeln!(stdout).map_err(ServiceError::io("stdout"))?;
            }
            Ok(EXIT_OK)
        }
        Command::Serve { index, port } => {
            let loaded = IndexDir::new(&index.index_dir).load()?;
            http::http_serve(loaded, port)?;
            Ok(EXIT_OK)
        }
    }
}

fn ingest(inputs: &[PathBuf], store: &Path, stdout: &mut dyn Write) -> Result<i32, ServiceError> {
    let mut ingest = Ingest::new();
    let mut sources = Vec::new();
    for input in inputs {
        if input.as_os_str() == "-" {
            ingest.read_stream(io::stdin().lock()).map_err(ServiceError::io("stdin"))?;
            sources.push("stdin".to_string());
        } else {
            let file = File::open(input).map_err(ServiceError::io(input))?;
            ingest.read_stream(BufReader::with_capacity(1 << 20, file)).map_err(ServiceError::io(input))?;
            let abs = input.canonicalize().unwrap_or_else(|_| input.clone());
            sources.push(format!("file://{}", abs.display()));
        }
    }
    let (resources, report) = ingest.finish();
    let report = StoreReport { sources, report };
    store::write_store(store, &resources, &report)?;
    print_json(stdout, &report)?;
    Ok(EXIT_OK)
}

fn print_json(stdout: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), ServiceError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(stdout, "{text}").map_err(ServiceError::io("stdout"))
}
