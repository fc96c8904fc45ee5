//! TSV exchange format and synthetic dataset generation.
//!
//! ```text
//! subject_kind  subject_id  predicate  object_kind  object_id  source  pmids  taxon
//! ```
//!
//! One line per evidence row. `pmids` is `|`-separated and may be empty, as
//! may `taxon`. Fields are never quoted; tabs cannot occur inside a field.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Write};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    group_cardinal_counted, Bucket, Dataset, EntityKind, EntityRef, EvidenceRecord, Statement,
    Vocabulary,
};
use crate::ModelError;

pub const TSV_HEADER: &str =
    "subject_kind\tsubject_id\tpredicate\tobject_kind\tobject_id\tsource\tpmids\ttaxon";

/// The five-row reference dataset used throughout the tests and docs.
pub const FIXTURE_D1: &str =
    "subject_kind\tsubject_id\tpredicate\tobject_kind\tobject_id\tsource\tpmids\ttaxon
chemical\t5743\tinhibits\tgene\t2908\tctd\t111|222\t9606
chemical\t5743\tinhibits\tgene\t2908\tdrugbank\t333\t9606
gene\t2908\tinteracts_with\tgene\t7157\tbiogrid\t444\t9606
gene\t7157\tassociated_with\tdisease\tC0011849\tdisgenet\t555|666\t
gene\t2908\tassociated_with\tdisease\tC0011849\tdisgenet\t777\t
";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing or malformed header line (expected `{}`)", TSV_HEADER.replace('\t', "\\t"))]
    MissingHeader,
    #[error("line {line}: input is not valid UTF-8")]
    Encoding { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based line number in the input, header included.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestDiagnostics {
    pub rows_read: usize,
    pub rejected: Vec<RejectedRow>,
    pub duplicates_collapsed: usize,
}

impl IngestDiagnostics {
    pub fn rows_accepted(&self) -> usize {
        self.rows_read - self.rejected.len()
    }
}

pub fn parse_tsv<R: BufRead>(input: R) -> Result<(Dataset, IngestDiagnostics), IngestError> {
    parse_tsv_with(&Vocabulary::default(), input)
}

pub fn parse_tsv_with<R: BufRead>(
    vocab: &Vocabulary,
    mut input: R,
) -> Result<(Dataset, IngestDiagnostics), IngestError> {
    let mut diag = IngestDiagnostics::default();
    let mut buf = Vec::new();
    if input.read_until(b'\n', &mut buf)? == 0 || strip_eol(&buf) != TSV_HEADER.as_bytes() {
        return Err(IngestError::MissingHeader);
    }
    let mut rows = Vec::new();
    let mut line_no = 1;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(strip_eol(&buf))
            .map_err(|_| IngestError::Encoding { line: line_no })?;
        if line.is_empty() {
            continue;
        }
        diag.rows_read += 1;
        match parse_row(vocab, line) {
            Ok(row) => rows.push(row),
            Err(reason) => diag.rejected.push(RejectedRow {
                line: line_no,
                reason,
            }),
        }
    }
    let grouped = group_cardinal_counted(rows).expect("rows were validated individually");
    diag.duplicates_collapsed = grouped.duplicates_collapsed;
    Ok((grouped.dataset, diag))
}

fn strip_eol(line: &[u8]) -> &[u8] {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    line.strip_suffix(b"\r").unwrap_or(line)
}

fn parse_row(vocab: &Vocabulary, line: &str) -> Result<(Statement, EvidenceRecord), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [sk, sid, pred, ok, oid, source, pmids, taxon] = fields[..] else {
        return Err(format!("expected 8 fields, found {}", fields.len()));
    };
    let subject = entity(sk, sid)?;
    let object = entity(ok, oid)?;
    let predicate = vocab.predicate(pred).map_err(|e| e.to_string())?;
    let statement = Statement {
        subject,
        predicate,
        object,
    };
    statement.validate().map_err(|e| e.reason())?;
    let pubs = if pmids.is_empty() {
        Vec::new()
    } else {
        pmids.split('|').collect()
    };
    let mut seen = HashSet::new();
    if let Some(dup) = pubs.iter().find(|p| !seen.insert(**p)) {
        return Err(format!("duplicate PubMed id `{dup}`"));
    }
    let taxon = (!taxon.is_empty()).then(|| taxon.to_owned());
    let evidence = EvidenceRecord::new(source, pubs, taxon).map_err(|e| e.to_string())?;
    Ok((statement, evidence))
}

fn entity(kind: &str, id: &str) -> Result<EntityRef, String> {
    let kind: EntityKind = kind.parse().map_err(|e: ModelError| e.to_string())?;
    EntityRef::new(kind, id).map_err(|e| e.to_string())
}

/// Write `d` in the exchange format, one row per evidence record in canonical order.
pub fn serialize_tsv<W: Write>(d: &Dataset, mut out: W) -> io::Result<W> {
    writeln!(out, "{TSV_HEADER}")?;
    for (st, ev) in d.rows() {
        let pubs: Vec<&str> = ev.publications.iter().map(String::as_str).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            st.subject.kind,
            st.subject.id,
            st.predicate.slug,
            st.object.kind,
            st.object.id,
            ev.source,
            pubs.join("|"),
            ev.taxon.as_deref().unwrap_or("")
        )?;
    }
    out.flush()?;
    Ok(out)
}

pub fn serialize_tsv_string(d: &Dataset) -> String {
    String::from_utf8(serialize_tsv(d, Vec::new()).expect("writing to memory")).expect("UTF-8")
}

/// The D1 fixture, parsed.
pub fn fixture_d1() -> Dataset {
    parse_tsv(FIXTURE_D1.as_bytes()).expect("fixture parses").0
}

/// The six seed chemicals (PubChem CIDs) of the benchmark query suite.
pub const SEED_CIDS: [&str; 6] = ["4946", "2812", "4212", "5073", "2726", "3559"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("invalid synthesis parameters: {0}")]
    Invalid(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
}

/// Parameters of the synthetic dataset generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_chemicals: usize,
    pub n_genes: usize,
    pub n_diseases: usize,
    /// Total evidence rows generated.
    pub n_rows: usize,
    /// Relative weight of each evidence-multiplicity bucket per statement.
    pub multiplicity_weights: BTreeMap<Bucket, f64>,
    /// Largest multiplicity drawn for the `>3` bucket.
    pub max_multiplicity: usize,
    /// Inclusive range of publications per row.
    pub pubs_per_row: (usize, usize),
    /// PubMed ids are drawn from `1..=pmid_pool`.
    pub pmid_pool: usize,
    pub taxon_rate: f64,
    /// Relative weight of each predicate slug.
    pub predicate_weights: BTreeMap<String, f64>,
    pub rng_seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_chemicals: 20,
            n_genes: 60,
            n_diseases: 30,
            n_rows: 2000,
            multiplicity_weights: [
                (Bucket::One, 0.87),
                (Bucket::Two, 0.07),
                (Bucket::Three, 0.02),
                (Bucket::MoreThanThree, 0.03),
            ]
            .into_iter()
            .collect(),
            max_multiplicity: 8,
            pubs_per_row: (0, 3),
            pmid_pool: 4000,
            taxon_rate: 0.5,
            predicate_weights: [
                ("inhibits", 0.3),
                ("interacts_with", 0.3),
                ("associated_with", 0.3),
                ("treats", 0.05),
                ("causes", 0.05),
            ]
            .into_iter()
            .map(|(s, w)| (s.to_owned(), w))
            .collect(),
            rng_seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), SynthError> {
        let invalid = |m: &str| Err(SynthError::Invalid(m.to_owned()));
        if self.n_rows < 1 {
            return invalid("n_rows must be at least 1");
        }
        if self.n_chemicals < 1 || self.n_genes < 1 || self.n_diseases < 1 {
            return invalid("entity pool sizes must be positive");
        }
        if self.n_diseases > 9_999_999 {
            return invalid("n_diseases exceeds the CUI space");
        }
        check_weights(self.multiplicity_weights.values(), "multiplicity_weights")?;
        check_weights(self.predicate_weights.values(), "predicate_weights")?;
        if let Some(slug) = self
            .predicate_weights
            .keys()
            .find(|s| vocab.get(s).is_none())
        {
            return Err(SynthError::Invalid(format!("unknown predicate `{slug}`")));
        }
        if self.pubs_per_row.0 > self.pubs_per_row.1 {
            return invalid("pubs_per_row range is empty");
        }
        if self.pubs_per_row.1 > self.pmid_pool {
            return invalid("pubs_per_row exceeds pmid_pool");
        }
        if !(0.0..=1.0).contains(&self.taxon_rate) {
            return invalid("taxon_rate must lie in [0, 1]");
        }
        if self.max_multiplicity < 4
            && self
                .multiplicity_weights
                .get(&Bucket::MoreThanThree)
                .copied()
                .unwrap_or(0.0)
                > 0.0
        {
            return invalid("max_multiplicity must be at least 4 when the >3 bucket has weight");
        }
        Ok(())
    }
}

fn check_weights<'a>(weights: impl Iterator<Item = &'a f64>, name: &str) -> Result<(), SynthError> {
    let mut total = 0.0;
    for w in weights {
        if !w.is_finite() || *w < 0.0 {
            return Err(SynthError::Invalid(format!("{name} must be non-negative")));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(SynthError::Invalid(format!("{name} must not all be zero")));
    }
    Ok(())
}

const SOURCES_CHEM_GENE: &[&str] = &["chembl", "ctd", "drugbank", "iuphar", "kegg"];
const SOURCES_GENE_GENE: &[&str] = &["biogrid", "irefindex"];
const SOURCES_GENE_DISEASE: &[&str] = &["disgenet"];
const SOURCES_CHEM_DISEASE: &[&str] = &["ctd", "kegg", "ndfrt", "sider"];
const TAXA: &[&str] = &["9606", "10090", "10116"];

fn sources_for(domain: EntityKind, range: EntityKind) -> &'static [&'static str] {
    use EntityKind::*;
    match (domain, range) {
        (Chemical, Gene) => SOURCES_CHEM_GENE,
        (Gene, Gene) => SOURCES_GENE_GENE,
        (Gene, Disease) => SOURCES_GENE_DISEASE,
        (Chemical, Disease) => SOURCES_CHEM_DISEASE,
        _ => SOURCES_GENE_GENE,
    }
}

fn pool_id(kind: EntityKind, i: usize) -> String {
    match kind {
        EntityKind::Chemical => match SEED_CIDS.get(i) {
            Some(cid) => (*cid).to_owned(),
            None => (10_000 + i).to_string(),
        },
        EntityKind::Gene => (1 + i).to_string(),
        EntityKind::Disease => format!("C{:07}", 1 + i),
    }
}

const MAX_ATTEMPTS: usize = 1000;

/// Generate a dataset with a controlled redundancy profile.
///
/// Each new statement draws its evidence multiplicity from
/// `multiplicity_weights`, so the multiplicity histogram follows the weights
/// as `n_rows` grows. The last statement is truncated to hit `n_rows` exactly.
/// Chemical pools start with the benchmark seed CIDs.
pub fn synthesize(p: &SynthParams) -> Result<Dataset, SynthError> {
    synthesize_with(&Vocabulary::default(), p)
}

pub fn synthesize_with(vocab: &Vocabulary, p: &SynthParams) -> Result<Dataset, SynthError> {
    p.validate(vocab)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.rng_seed);
    let buckets: Vec<Bucket> = p.multiplicity_weights.keys().copied().collect();
    let bucket_dist = WeightedIndex::new(p.multiplicity_weights.values())
        .map_err(|e| SynthError::Invalid(e.to_string()))?;
    let preds: Vec<_> = p
        .predicate_weights
        .keys()
        .map(|s| vocab.get(s).expect("validated").clone())
        .collect();
    let pred_dist = WeightedIndex::new(p.predicate_weights.values())
        .map_err(|e| SynthError::Invalid(e.to_string()))?;
    let pool_size = |k: EntityKind| match k {
        EntityKind::Chemical => p.n_chemicals,
        EntityKind::Gene => p.n_genes,
        EntityKind::Disease => p.n_diseases,
    };

    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(p.n_rows);
    while rows.len() < p.n_rows {
        let multiplicity = match buckets[bucket_dist.sample(&mut rng)] {
            Bucket::One => 1,
            Bucket::Two => 2,
            Bucket::Three => 3,
            Bucket::MoreThanThree => rng.gen_range(4..=p.max_multiplicity),
        };
        let multiplicity = multiplicity.min(p.n_rows - rows.len());

        let statement = (0..MAX_ATTEMPTS)
            .find_map(|_| {
                let pred = &preds[pred_dist.sample(&mut rng)];
                let s = pool_id(pred.domain, rng.gen_range(0..pool_size(pred.domain)));
                let o = pool_id(pred.range, rng.gen_range(0..pool_size(pred.range)));
                if pred.domain == pred.range && s == o {
                    return None;
                }
                let st = Statement {
                    subject: EntityRef {
                        kind: pred.domain,
                        id: s,
                    },
                    predicate: pred.clone(),
                    object: EntityRef {
                        kind: pred.range,
                        id: o,
                    },
                };
                seen.insert(st.canonical()).then_some(st)
            })
            .ok_or_else(|| SynthError::Infeasible("statement space exhausted".into()))?;

        let sources = sources_for(statement.predicate.domain, statement.predicate.range);
        let mut evidence: HashSet<EvidenceRecord> = HashSet::new();
        let mut ordered = Vec::with_capacity(multiplicity);
        for _ in 0..multiplicity {
            let ev = (0..MAX_ATTEMPTS)
                .find_map(|_| {
                    let n_pubs = rng.gen_range(p.pubs_per_row.0..=p.pubs_per_row.1);
                    let pubs: Vec<String> = (0..n_pubs)
                        .map(|_| rng.gen_range(1..=p.pmid_pool).to_string())
                        .collect();
                    let taxon = rng
                        .gen_bool(p.taxon_rate)
                        .then(|| TAXA[rng.gen_range(0..TAXA.len())].to_owned());
                    let source = sources[rng.gen_range(0..sources.len())];
                    let ev = EvidenceRecord::new(source, pubs, taxon)
                        .expect("generated evidence is valid");
                    evidence.insert(ev.clone()).then_some(ev)
                })
                .ok_or_else(|| {
                    SynthError::Infeasible(format!(
                        "cannot draw {multiplicity} distinct evidence records"
                    ))
                })?;
            ordered.push(ev);
        }
        rows.extend(ordered.into_iter().map(|ev| (statement.clone(), ev)));
    }
    Ok(group_cardinal_counted(rows)
        .expect("generated rows are valid")
        .dataset)
}
