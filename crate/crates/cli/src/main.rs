use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use provmodels::{ModelId, QueryId, RdfFormat};

mod commands;

use commands::Failure;

/// Compile evidence-annotated relations into RDF provenance models, query them
/// locally and benchmark SPARQL endpoints.
#[derive(Debug, Parser)]
#[command(name = "provmodels", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dataset checks.
    #[command(subcommand)]
    Ingest(IngestCommand),
    /// Generate a synthetic evidence TSV from a TOML parameter file.
    Synth {
        params: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit one model's RDF for a TSV dataset.
    Emit {
        #[arg(long)]
        model: ModelId,
        #[arg(long, value_parser = parse_format)]
        format: RdfFormat,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Model V: leave out the head graphs.
        #[arg(long)]
        no_head: bool,
        #[command(flatten)]
        vocab: VocabArg,
    },
    /// Dataset counts, expected triples per model and the redundancy histogram.
    Stats {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print the SPARQL text of one query for one model.
    Query {
        #[arg(long)]
        model: ModelId,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        vocab: VocabArg,
    },
    /// Emit, load into the embedded store, evaluate and check against the oracle.
    RunLocal {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        model: ModelId,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        vocab: VocabArg,
    },
    /// Time the query suite against the endpoints of a bench config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarize a bench CSV as JSON on stdout.
    Report {
        #[arg(short, long)]
        input: PathBuf,
        /// Also write per-group log10(ms) values, one tab-separated line per group.
        #[arg(long)]
        boxplot: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum IngestCommand {
    /// Report accepted, rejected and duplicate rows of a TSV.
    Validate { tsv: PathBuf },
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    query: QueryId,
    /// Seed chemical, `CID5743` or `5743`.
    #[arg(long)]
    seed: String,
    /// Source constraint for Q3, `leg=source`; repeatable.
    #[arg(long = "source")]
    sources: Vec<String>,
    #[arg(long, default_value_t = 1)]
    min_pubs: usize,
}

#[derive(Debug, Args)]
struct VocabArg {
    /// TOML file overriding IRI templates and vocabulary terms.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<RdfFormat, String> {
    s.parse()
        .map_err(|e: provmodels::rdf::RdfError| e.to_string())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ingest(IngestCommand::Validate { tsv }) => commands::validate(&tsv),
        Command::Synth { params, output } => commands::synth(&params, output.as_deref()),
        Command::Emit {
            model,
            format,
            input,
            output,
            no_head,
            vocab,
        } => commands::emit(
            model,
            format,
            &input,
            output.as_deref(),
            no_head,
            vocab.vocab.as_deref(),
        ),
        Command::Stats { input, json } => commands::stats(&input, json),
        Command::Query {
            model,
            query,
            vocab,
        } => {
            let spec =
                commands::query_spec(&query.query, &query.seed, &query.sources, query.min_pubs)?;
            commands::query(model, &spec, vocab.vocab.as_deref())
        }
        Command::RunLocal {
            input,
            model,
            query,
            vocab,
        } => {
            let spec =
                commands::query_spec(&query.query, &query.seed, &query.sources, query.min_pubs)?;
            commands::run_local(&input, model, &spec, vocab.vocab.as_deref())
        }
        Command::Bench { config, output } => commands::bench(&config, &output),
        Command::Report { input, boxplot } => commands::report(&input, boxplot.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("provmodels: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
