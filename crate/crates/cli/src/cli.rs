//! Command-line entry point. Exit status: 0 success, 1 user error, 2 internal error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bqr_core::eval::{scatter_csv, RunManifest};
use bqr_core::{method_matrix, Index, Method};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::api::{self, RecommendRequest};
use crate::service;
use crate::snapshot::{is_user_error, load_config, load_corpus_with_schema, DataPaths, Snapshot};

#[derive(Debug, Parser)]
#[command(name = "bqr", version, about = "Balanced query recommendation")]
#[command(subcommand_required = true, arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Documents as JSON lines
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Query topics as JSON lines
    #[arg(long, global = true)]
    pub topics: Option<PathBuf>,
    /// Word vectors in GloVe text format
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// LLM replay fixtures (prompt hash to response)
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Engine config in TOML
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON list of attribute dimensions; inferred from the corpus when absent
    #[arg(long, global = true)]
    pub schema: Option<PathBuf>,
    /// Prebuilt index written by `bqr index`
    #[arg(long, global = true)]
    pub index: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the BM25 index and write it to disk
    Index {
        #[arg(long)]
        out: PathBuf,
    },
    /// Top-n documents for a query
    Search {
        #[arg(long, short)]
        query: String,
        #[arg(long, short)]
        n: Option<usize>,
    },
    /// Recommend balanced alternatives to a query
    Recommend(RecommendArgs),
    /// Domination matrix over every topic and method pair
    Evaluate {
        /// Comma-separated method ids
        #[arg(long, value_delimiter = ',', default_value = "m1,m2,m3")]
        methods: Vec<Method>,
        /// Also write the high/low bucket summary here
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Also write a run manifest (config plus input hashes) here
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Serve the JSON API
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
    /// Relevance-versus-diversity rows for plotting one recommendation run
    ExportPlot(RecommendArgs),
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long, short)]
    pub query: String,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long, short)]
    pub k: Option<usize>,
    #[arg(long, short)]
    pub n: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Comma-separated keywords for method 3; defaults to the matching topic's
    #[arg(long, value_delimiter = ',')]
    pub keywords: Option<Vec<String>>,
}

pub enum Failure {
    User(String),
    Internal(String),
}

impl From<bqr_core::Error> for Failure {
    fn from(e: bqr_core::Error) -> Self {
        if is_user_error(&e) {
            Failure::User(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(Failure::User(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            2
        }
    }
}

fn paths(g: &Global) -> DataPaths {
    DataPaths {
        corpus: g.corpus.clone(),
        topics: g.topics.clone(),
        embeddings: g.embeddings.clone(),
        fixtures: g.fixtures.clone(),
        schema: g.schema.clone(),
        index: g.index.clone(),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .and_then(|_| {
            if text.ends_with('\n') {
                Ok(())
            } else {
                out.write_all(b"\n")
            }
        })
        .map_err(|e| Failure::Internal(format!("writing output: {e}")))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Internal(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let g = &cli.global;
    let mut config = load_config(g.config.as_deref()).map_err(Failure::User)?;
    match cli.command {
        Command::Index { out: dest } => {
            let corpus_path = g
                .corpus
                .as_deref()
                .ok_or_else(|| Failure::User("--corpus is required".into()))?;
            let corpus = load_corpus_with_schema(corpus_path, g.schema.as_deref())?;
            let index = Index::build(&corpus, config.index)?;
            index.save(&dest)?;
            write_out(out, &to_json(&index.stats())?)
        }
        Command::Search { query, n } => {
            let snap = Snapshot::load(&paths(g), config)?;
            let resp = api::search(&snap, &query, n.unwrap_or(snap.config.n))?;
            match g.format.unwrap_or(Format::Json) {
                Format::Json => write_out(out, &to_json(&resp)?),
                Format::Csv => write_out(out, &search_csv(&resp)),
            }
        }
        Command::Recommend(a) => {
            apply(&mut config, &a);
            let snap = Snapshot::load(&paths(g), config)?;
            let (rec, _) = api::recommend_request(&snap, &request(&a))?;
            match g.format.unwrap_or(Format::Json) {
                Format::Json => write_out(out, &to_json(&rec)?),
                Format::Csv => write_out(out, &scatter_csv(&rec)?),
            }
        }
        Command::ExportPlot(a) => {
            apply(&mut config, &a);
            let snap = Snapshot::load(&paths(g), config)?;
            let (rec, _) = api::recommend_request(&snap, &request(&a))?;
            write_out(out, &scatter_csv(&rec)?)
        }
        Command::Evaluate {
            methods,
            summary,
            manifest,
        } => {
            if g.topics.is_none() {
                return Err(Failure::User("--topics is required".into()));
            }
            let snap = Snapshot::load(&paths(g), config)?;
            let matrix = method_matrix(&snap.topics, &methods, &snap.config, &snap.resources())?;
            for f in &matrix.failures {
                eprintln!("topic {} method {}: {}", f.topic_id, f.method, f.error);
            }
            if let Some(p) = summary {
                write_file(&p, &matrix.summary_csv()?)?;
            }
            if let Some(p) = manifest {
                let mut m = RunManifest::new(&snap.config, &methods, &snap.topics);
                let inputs = [
                    ("corpus", &g.corpus),
                    ("topics", &g.topics),
                    ("embeddings", &g.embeddings),
                    ("fixtures", &g.fixtures),
                    ("config", &g.config),
                ];
                for (label, path) in inputs {
                    if let Some(path) = path {
                        m.add_input(label, path)?;
                    }
                }
                write_file(&p, &(to_json(&m)? + "\n"))?;
            }
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(out, &matrix.to_csv()?),
                Format::Json => write_out(out, &to_json(&matrix)?),
            }
        }
        Command::Serve { addr } => {
            let snap = Arc::new(Snapshot::load(&paths(g), config)?);
            let rt = tokio::runtime::Runtime::new()
                .map_err(|e| Failure::Internal(format!("starting runtime: {e}")))?;
            rt.block_on(service::serve(snap, &addr))
                .map_err(|e| Failure::User(format!("serving on {addr}: {e}")))
        }
    }
}

fn apply(config: &mut bqr_core::EngineConfig, a: &RecommendArgs) {
    if let Some(m) = a.method {
        config.method = m;
    }
    if let Some(k) = a.k {
        config.k = k;
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(i) = a.max_iter {
        config.max_iter = i;
    }
}

fn request(a: &RecommendArgs) -> RecommendRequest {
    RecommendRequest {
        query: a.query.clone(),
        keywords: a.keywords.clone(),
        ..Default::default()
    }
}

fn search_csv(resp: &api::SearchResponse) -> String {
    let mut s = String::from("rank,doc_id,score,title\n");
    for (i, h) in resp.hits.iter().enumerate() {
        let title = if h.title.contains([',', '"', '\n']) {
            format!("\"{}\"", h.title.replace('"', "\"\""))
        } else {
            h.title.clone()
        };
        s.push_str(&format!("{},{},{},{}\n", i + 1, h.doc_id, h.score, title));
    }
    s
}
