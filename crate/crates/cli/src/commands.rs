use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use provmodels::{
    build_plan, dataset_counts, emit as emit_model, expected_counts,
    ingest::{IngestError, RejectedRow},
    oracle_answer, parse_tsv,
    query::parse_source_constraint,
    rdf::QuadWriter,
    render_sparql, seed_suite, serialize_tsv, synthesize, Dataset, EmitOptions, EntityRef, ModelId,
    QueryId, QuerySpec, RdfFormat, Store, SynthParams, VocabConfig,
};
use provmodels_bench::{
    read_csv, run_suite, suite::find_inconsistencies, summarize, write_boxplot, write_csv,
    BenchConfig,
};
use serde_json::json;

/// Exit codes.
pub const VALIDATION: u8 = 1;
pub const USAGE: u8 = 2;
pub const IO: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::new(IO, format!("{}: {e}", path.display()))
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::new(IO, format!("stdout: {e}"))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Write to `path`, or stdout when absent.
fn with_output<F>(path: Option<&Path>, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            f(&mut w).and_then(|_| w.flush()).map_err(stdout_err)
        }
    }
}

fn read_dataset(path: &Path) -> Result<(Dataset, Vec<RejectedRow>), Failure> {
    let (d, diags) = parse_tsv(open(path)?).map_err(|e| match e {
        IngestError::Io(e) => io_err(path)(e),
        other => Failure::new(VALIDATION, format!("{}: {other}", path.display())),
    })?;
    Ok((d, diags.rejected))
}

/// Load a dataset, warning on stderr about rejected rows.
fn load_dataset(path: &Path) -> Result<Dataset, Failure> {
    let (d, rejected) = read_dataset(path)?;
    if !rejected.is_empty() {
        eprintln!(
            "warning: {}: skipped {} invalid rows (see `ingest validate`)",
            path.display(),
            rejected.len()
        );
    }
    Ok(d)
}

fn load_vocab(path: Option<&Path>) -> Result<VocabConfig, Failure> {
    let Some(path) = path else {
        return Ok(VocabConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let cfg: VocabConfig = toml::from_str(&text)
        .map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
    cfg.validate()
        .map_err(|e| Failure::new(USAGE, format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

pub fn validate(tsv: &Path) -> Result<(), Failure> {
    let (d, diags) = parse_tsv(open(tsv)?).map_err(|e| match e {
        IngestError::Io(e) => io_err(tsv)(e),
        other => Failure::new(VALIDATION, format!("{}: {other}", tsv.display())),
    })?;
    let mut out = io::stdout().lock();
    let mut report = || -> io::Result<()> {
        writeln!(out, "rows read: {}", diags.rows_read)?;
        writeln!(out, "rows accepted: {}", diags.rows_accepted())?;
        writeln!(out, "duplicates collapsed: {}", diags.duplicates_collapsed)?;
        writeln!(out, "cardinal assertions: {}", d.len())?;
        writeln!(out, "rows rejected: {}", diags.rejected.len())?;
        for r in &diags.rejected {
            writeln!(out, "line {}: {}", r.line, r.reason)?;
        }
        Ok(())
    };
    report().map_err(stdout_err)?;
    if diags.rejected.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            VALIDATION,
            format!("{} rows rejected", diags.rejected.len()),
        ))
    }
}

pub fn synth(params: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(params).map_err(io_err(params))?;
    let p: SynthParams = toml::from_str(&text)
        .map_err(|e| Failure::new(USAGE, format!("{}: {e}", params.display())))?;
    let d =
        synthesize(&p).map_err(|e| Failure::new(USAGE, format!("{}: {e}", params.display())))?;
    with_output(output, |w| serialize_tsv(&d, w).map(drop))
}

pub fn emit(
    model: ModelId,
    format: RdfFormat,
    input: &Path,
    output: Option<&Path>,
    no_head: bool,
    vocab: Option<&Path>,
) -> Result<(), Failure> {
    let allowed = if model.uses_named_graphs() {
        format.supports_graphs()
    } else {
        format == RdfFormat::NTriples
    };
    if !allowed {
        let want = if model.uses_named_graphs() {
            "nq or trig"
        } else {
            "nt"
        };
        return Err(Failure::new(
            USAGE,
            format!("model {model} is written as {want}, not {format}"),
        ));
    }
    if no_head && model != ModelId::V {
        return Err(Failure::new(USAGE, "--no-head only applies to model V"));
    }
    let cfg = load_vocab(vocab)?;
    let d = load_dataset(input)?;
    let opts = EmitOptions {
        include_head: !no_head,
    };
    let mut emission = emit_model(&d, model, &cfg, opts);
    let write = |w: &mut dyn Write| -> io::Result<()> {
        let mut writer = QuadWriter::new(w, format);
        for q in emission.by_ref() {
            writer.write(&q).map_err(io::Error::other)?;
        }
        writer.finish().map_err(io::Error::other)?;
        Ok(())
    };
    with_output(output, write)?;
    let stats = emission.stats();
    eprintln!("{} triples, {} named graphs", stats.triples, stats.graphs);
    Ok(())
}

pub fn stats(input: &Path, as_json: bool) -> Result<(), Failure> {
    let d = load_dataset(input)?;
    let c = dataset_counts(&d);
    let per_model: Vec<(ModelId, provmodels::emit::ExpectedCounts)> = ModelId::ALL
        .iter()
        .map(|&m| (m, expected_counts(&c, m, EmitOptions::default())))
        .collect();
    let headless = expected_counts(
        &c,
        ModelId::V,
        EmitOptions {
            include_head: false,
        },
    );
    let mut out = io::stdout().lock();
    let result = if as_json {
        let models: BTreeMap<&str, _> = per_model
            .iter()
            .map(|(m, e)| {
                (
                    m.as_str(),
                    json!({ "triples": e.triples, "graphs": e.graphs }),
                )
            })
            .collect();
        let histogram: BTreeMap<&str, usize> =
            c.histogram.iter().map(|(b, n)| (b.label(), *n)).collect();
        let doc = json!({
            "r": c.r,
            "e": c.e,
            "k": c.k,
            "t": c.t,
            "models": models,
            "model_v_without_head": { "triples": headless.triples, "graphs": headless.graphs },
            "histogram": histogram,
            "max_pair": c.max_pair.as_ref().map(|(s, n)| json!({ "statement": s.canonical(), "evidence": n })),
        });
        serde_json::to_writer_pretty(&mut out, &doc)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(out))
    } else {
        (|| -> io::Result<()> {
            writeln!(out, "R={} E={} K={} T={}", c.r, c.e, c.k, c.t)?;
            for (m, e) in &per_model {
                if m.uses_named_graphs() {
                    writeln!(
                        out,
                        "model {m}: {} triples in {} graphs",
                        e.triples, e.graphs
                    )?;
                } else {
                    writeln!(out, "model {m}: {} triples", e.triples)?;
                }
            }
            writeln!(
                out,
                "model V without head: {} triples in {} graphs",
                headless.triples, headless.graphs
            )?;
            for (b, n) in &c.histogram {
                writeln!(out, "evidence {}: {n}", b.label())?;
            }
            if let Some((s, n)) = &c.max_pair {
                writeln!(out, "max pair: {} ({n} evidence records)", s.canonical())?;
            }
            Ok(())
        })()
    };
    result.map_err(stdout_err)
}

pub fn query_spec(
    query: &QueryId,
    seed: &str,
    sources: &[String],
    min_pubs: usize,
) -> Result<QuerySpec, Failure> {
    let usage = |e: &dyn std::fmt::Display| Failure::new(USAGE, e.to_string());
    let id = seed
        .strip_prefix("CID")
        .or_else(|| seed.strip_prefix("cid"))
        .unwrap_or(seed);
    let seed = EntityRef::chemical(id).map_err(|e| usage(&e))?;
    let constraints = sources
        .iter()
        .map(|s| parse_source_constraint(s).map_err(|e| usage(&e)))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = QuerySpec::new(*query, seed)
        .with_sources(constraints)
        .with_min_pubs(min_pubs);
    spec.validate().map_err(|e| usage(&e))?;
    Ok(spec)
}

pub fn query(model: ModelId, spec: &QuerySpec, vocab: Option<&Path>) -> Result<(), Failure> {
    let cfg = load_vocab(vocab)?;
    let plan = build_plan(spec, model, &cfg).map_err(|e| Failure::new(USAGE, e.to_string()))?;
    io::stdout()
        .lock()
        .write_all(render_sparql(&plan).as_bytes())
        .map_err(stdout_err)
}

pub fn run_local(
    input: &Path,
    model: ModelId,
    spec: &QuerySpec,
    vocab: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = load_vocab(vocab)?;
    let d = load_dataset(input)?;
    let store = Store::load(emit_model(&d, model, &cfg, EmitOptions::default()));
    let plan = build_plan(spec, model, &cfg).map_err(|e| Failure::new(USAGE, e.to_string()))?;
    let got = store.evaluate(&plan).column_iris("d");
    let mut out = io::stdout().lock();
    (|| -> io::Result<()> {
        writeln!(out, "?d")?;
        for iri in &got {
            writeln!(out, "{iri}")?;
        }
        out.flush()
    })()
    .map_err(stdout_err)?;
    eprintln!("{} rows", got.len());
    let want: std::collections::BTreeSet<_> = oracle_answer(&d, spec)
        .iter()
        .map(|e| cfg.entity_iri(e))
        .collect();
    if got != want {
        let missing = want.difference(&got).count();
        let extra = got.difference(&want).count();
        return Err(Failure::new(
            VALIDATION,
            format!(
                "store answer disagrees with the oracle ({missing} missing, {extra} unexpected)"
            ),
        ));
    }
    Ok(())
}

pub fn bench(config: &Path, output: &Path) -> Result<(), Failure> {
    let cfg = BenchConfig::load(config).map_err(|e| match e {
        provmodels_bench::ConfigError::Io(e) => io_err(config)(e),
        other => Failure::new(USAGE, format!("{}: {other}", config.display())),
    })?;
    let specs = seed_suite(&cfg.suite).map_err(|e| Failure::new(USAGE, e.to_string()))?;
    let report = run_suite(&cfg.endpoints, &specs, &cfg.vocab, cfg.parallel)
        .map_err(|e| Failure::new(USAGE, e.to_string()))?;
    let mut w = write_csv(&report.samples, create(output)?)
        .map_err(|e| Failure::new(IO, format!("{}: {e}", output.display())))?;
    w.flush().map_err(io_err(output))?;
    let failed = report.samples.iter().filter(|s| s.rows.is_none()).count();
    eprintln!("{} samples, {failed} failed", report.samples.len());
    report_inconsistencies(&report.inconsistencies)
}

fn report_inconsistencies(found: &[provmodels_bench::Inconsistency]) -> Result<(), Failure> {
    for i in found {
        eprintln!("inconsistent row counts: {i}");
    }
    if found.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(
            VALIDATION,
            format!("{} inconsistent (query, seed) pairs", found.len()),
        ))
    }
}

pub fn report(input: &Path, boxplot: Option<&Path>) -> Result<(), Failure> {
    let samples = read_csv(open(input)?)
        .map_err(|e| Failure::new(VALIDATION, format!("{}: {e}", input.display())))?;
    let summaries = summarize(&samples);
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &summaries)
        .map_err(io::Error::from)
        .and_then(|_| writeln!(out))
        .map_err(stdout_err)?;
    if let Some(path) = boxplot {
        write_boxplot(&summaries, create(path)?)
            .and_then(|mut w| w.flush())
            .map_err(io_err(path))?;
    }
    report_inconsistencies(&find_inconsistencies(&samples))
}
