use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use provmodels::{build_plan, render_sparql, ModelId, QueryId, QuerySpec, VocabConfig};

use crate::config::{ConfigError, EndpointConfig};
use crate::remote::{execute_remote, Status};

pub const CSV_HEADER: [&str; 8] = [
    "store", "model", "query", "seed", "run", "ms", "rows", "status",
];

/// One timed request.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSample {
    pub store: String,
    pub model: ModelId,
    pub query: QueryId,
    /// Seed chemical as `CID<n>`.
    pub seed: String,
    pub run: usize,
    pub ms: f64,
    pub rows: Option<usize>,
    pub status: Status,
}

/// A (query, seed) whose successful row counts differ between stores or runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inconsistency {
    pub query: QueryId,
    pub seed: String,
    /// Distinct ok row counts seen per store.
    pub counts: BTreeMap<String, BTreeSet<usize>>,
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}:", self.query.as_str(), self.seed)?;
        for (store, counts) in &self.counts {
            let counts: Vec<String> = counts.iter().map(usize::to_string).collect();
            write!(f, " {store}={}", counts.join("|"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub samples: Vec<BenchSample>,
    pub inconsistencies: Vec<Inconsistency>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot build {query} for model {model}: {reason}")]
    Plan {
        query: QueryId,
        model: ModelId,
        reason: String,
    },
}

fn seed_label(spec: &QuerySpec) -> String {
    format!("CID{}", spec.seed.id)
}

fn run_endpoint(e: &EndpointConfig, queries: &[(&QuerySpec, String)]) -> Vec<BenchSample> {
    let mut out = Vec::with_capacity(queries.len() * e.repetitions);
    for (spec, text) in queries {
        for run in 0..e.repetitions {
            let o = execute_remote(e, text, true);
            out.push(BenchSample {
                store: e.name.clone(),
                model: e.model,
                query: spec.query,
                seed: seed_label(spec),
                run,
                ms: o.ms,
                rows: o.rows,
                status: o.status,
            });
        }
    }
    out
}

/// Time every spec on every endpoint, `repetitions` times each.
///
/// Requests to one endpoint are strictly sequential. With `parallel`, distinct
/// endpoints run on their own threads. Plans are rendered for every endpoint
/// before the first request, so a bad configuration fails without traffic.
pub fn run_suite(
    endpoints: &[EndpointConfig],
    specs: &[QuerySpec],
    vocab: &VocabConfig,
    parallel: bool,
) -> Result<SuiteReport, SuiteError> {
    for e in endpoints {
        e.validate()?;
    }
    let mut rendered = Vec::with_capacity(endpoints.len());
    for e in endpoints {
        let mut queries = Vec::with_capacity(specs.len());
        for spec in specs {
            let plan = build_plan(spec, e.model, vocab).map_err(|err| SuiteError::Plan {
                query: spec.query,
                model: e.model,
                reason: err.to_string(),
            })?;
            queries.push((spec, render_sparql(&plan)));
        }
        rendered.push(queries);
    }

    let per_endpoint: Vec<Vec<BenchSample>> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = endpoints
                .iter()
                .zip(&rendered)
                .map(|(e, q)| scope.spawn(move || run_endpoint(e, q)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("endpoint worker panicked"))
                .collect()
        })
    } else {
        endpoints
            .iter()
            .zip(&rendered)
            .map(|(e, q)| run_endpoint(e, q))
            .collect()
    };
    let samples: Vec<BenchSample> = per_endpoint.into_iter().flatten().collect();
    let inconsistencies = find_inconsistencies(&samples);
    Ok(SuiteReport {
        samples,
        inconsistencies,
    })
}

/// Group ok row counts by (query, seed) and report groups with more than one value.
pub fn find_inconsistencies(samples: &[BenchSample]) -> Vec<Inconsistency> {
    let mut groups: BTreeMap<(QueryId, &str), BTreeMap<String, BTreeSet<usize>>> = BTreeMap::new();
    for s in samples {
        if let (Status::Ok, Some(rows)) = (s.status, s.rows) {
            groups
                .entry((s.query, &s.seed))
                .or_default()
                .entry(s.store.clone())
                .or_default()
                .insert(rows);
        }
    }
    groups
        .into_iter()
        .filter(|(_, counts)| counts.values().flatten().collect::<BTreeSet<_>>().len() > 1)
        .map(|((query, seed), counts)| Inconsistency {
            query,
            seed: seed.to_owned(),
            counts,
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("record {record}: {reason}")]
    Field { record: usize, reason: String },
}

pub fn write_csv<W: Write>(samples: &[BenchSample], out: W) -> Result<W, CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in samples {
        w.write_record([
            s.store.clone(),
            s.model.as_str().to_owned(),
            s.query.as_str().to_owned(),
            s.seed.clone(),
            s.run.to_string(),
            s.ms.to_string(),
            s.rows.map(|r| r.to_string()).unwrap_or_default(),
            s.status.to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| CsvError::Csv(e.into_error().into()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchSample>, CsvError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        let bad = |reason: String| CsvError::Field { record, reason };
        let field = |n: usize| rec.get(n).unwrap_or("");
        let rows = match field(6) {
            "" => None,
            n => Some(n.parse().map_err(|_| bad(format!("bad rows `{n}`")))?),
        };
        let status: Status = field(7).parse().map_err(bad)?;
        if rows.is_some() != (status == Status::Ok) {
            return Err(bad("rows must be present exactly when status is ok".into()));
        }
        let ms: f64 = field(5)
            .parse()
            .map_err(|_| bad(format!("bad ms `{}`", field(5))))?;
        if ms.is_nan() || ms < 0.0 {
            return Err(bad(format!(
                "ms must be a non-negative number, got `{}`",
                field(5)
            )));
        }
        out.push(BenchSample {
            store: field(0).to_owned(),
            model: field(1).parse().map_err(|e| bad(format!("{e}")))?,
            query: field(2).parse().map_err(|e| bad(format!("{e}")))?,
            seed: field(3).to_owned(),
            run: field(4)
                .parse()
                .map_err(|_| bad(format!("bad run `{}`", field(4))))?,
            ms,
            rows,
            status,
        });
    }
    Ok(out)
}
