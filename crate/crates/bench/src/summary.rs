use std::collections::BTreeMap;
use std::io::{self, Write};

use provmodels::{ModelId, QueryId};
use serde::Serialize;

use crate::remote::Status;
use crate::suite::BenchSample;

/// Timing statistics of one (store, model, query) group over its ok samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub store: String,
    pub model: ModelId,
    pub query: QueryId,
    pub n: usize,
    pub mean_s: f64,
    /// Sample (n-1) standard deviation; absent below two samples.
    pub stddev_s: Option<f64>,
    /// log10 of each wall time in milliseconds, ascending.
    pub log10_ms: Vec<f64>,
}

/// Per-group mean and sample standard deviation in seconds.
///
/// Failed samples are ignored and groups without any ok sample are omitted.
/// Values are sorted before accumulation, so the result does not depend on
/// sample order.
pub fn summarize(samples: &[BenchSample]) -> Vec<BenchSummary> {
    let mut groups: BTreeMap<(&str, ModelId, QueryId), Vec<f64>> = BTreeMap::new();
    for s in samples.iter().filter(|s| s.status == Status::Ok) {
        groups
            .entry((&s.store, s.model, s.query))
            .or_default()
            .push(s.ms);
    }
    groups
        .into_iter()
        .map(|((store, model, query), mut ms)| {
            ms.sort_by(f64::total_cmp);
            let n = ms.len();
            let secs: Vec<f64> = ms.iter().map(|m| m / 1000.0).collect();
            let mean = secs.iter().sum::<f64>() / n as f64;
            let stddev = (n >= 2).then(|| {
                let ss: f64 = secs.iter().map(|x| (x - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            });
            BenchSummary {
                store: store.to_owned(),
                model,
                query,
                n,
                mean_s: mean,
                stddev_s: stddev,
                log10_ms: ms.iter().map(|m| m.log10()).collect(),
            }
        })
        .collect()
}

/// One line per group: store, model and query, then the log10 values, all tab-separated.
pub fn write_boxplot<W: Write>(summaries: &[BenchSummary], mut out: W) -> io::Result<W> {
    for s in summaries {
        write!(
            out,
            "{}\t{}\t{}",
            s.store,
            s.model.as_str(),
            s.query.as_str()
        )?;
        for v in &s.log10_ms {
            write!(out, "\t{v:.6}")?;
        }
        writeln!(out)?;
    }
    Ok(out)
}
