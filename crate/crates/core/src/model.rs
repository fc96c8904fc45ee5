//! Canonical knowledge model: typed entities, predicates, statements and the
//! evidence attached to them, grouped into cardinal assertions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Kind of biomedical entity a relation endpoint refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Chemical,
    Gene,
    Disease,
}

impl EntityKind {
    pub const ALL: [EntityKind; 3] = [EntityKind::Chemical, EntityKind::Gene, EntityKind::Disease];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Chemical => "chemical",
            EntityKind::Gene => "gene",
            EntityKind::Disease => "disease",
        }
    }

    /// Whether `id` has the identifier syntax of this kind: digits for
    /// PubChem CIDs and NCBI Gene IDs, `C` followed by seven digits for UMLS CUIs.
    pub fn accepts_id(self, id: &str) -> bool {
        match self {
            EntityKind::Chemical | EntityKind::Gene => is_digits(id),
            EntityKind::Disease => {
                id.len() == 8 && id.starts_with('C') && id[1..].bytes().all(|b| b.is_ascii_digit())
            }
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chemical" => Ok(EntityKind::Chemical),
            "gene" => Ok(EntityKind::Gene),
            "disease" => Ok(EntityKind::Disease),
            other => Err(ModelError::UnknownKind(other.to_owned())),
        }
    }
}

pub(crate) fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// A typed reference to a chemical, gene or disease.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityRef {
    pub kind: EntityKind,
    pub id: String,
}

impl EntityRef {
    pub fn new(kind: EntityKind, id: impl Into<String>) -> Result<Self, ModelError> {
        let entity = EntityRef {
            kind,
            id: id.into(),
        };
        entity.validate()?;
        Ok(entity)
    }

    pub fn chemical(cid: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(EntityKind::Chemical, cid)
    }

    pub fn gene(gid: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(EntityKind::Gene, gid)
    }

    pub fn disease(cui: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(EntityKind::Disease, cui)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.kind.accepts_id(&self.id) {
            Ok(())
        } else {
            Err(ModelError::BadIdentifier {
                kind: self.kind,
                id: self.id.clone(),
            })
        }
    }

    /// `{kind}:{id}`
    pub fn canonical(&self) -> String {
        format!("{}:{}", self.kind, self.id)
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.id)
    }
}

/// A relation type with its signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateRef {
    pub slug: String,
    pub domain: EntityKind,
    pub range: EntityKind,
}

/// The configured set of relation types. Every statement's predicate must be
/// declared here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    predicates: BTreeMap<String, PredicateRef>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        use EntityKind::*;
        let mut vocab = Vocabulary {
            predicates: BTreeMap::new(),
        };
        for (slug, domain, range) in [
            ("inhibits", Chemical, Gene),
            ("interacts_with", Gene, Gene),
            ("associated_with", Gene, Disease),
            ("treats", Chemical, Disease),
            ("causes", Chemical, Disease),
        ] {
            vocab
                .insert(slug, domain, range)
                .expect("default slugs are valid");
        }
        vocab
    }
}

impl Vocabulary {
    pub fn empty() -> Self {
        Vocabulary {
            predicates: BTreeMap::new(),
        }
    }

    pub fn insert(
        &mut self,
        slug: &str,
        domain: EntityKind,
        range: EntityKind,
    ) -> Result<&PredicateRef, ModelError> {
        if !is_slug(slug) {
            return Err(ModelError::BadSlug(slug.to_owned()));
        }
        let pred = PredicateRef {
            slug: slug.to_owned(),
            domain,
            range,
        };
        self.predicates.insert(slug.to_owned(), pred);
        Ok(&self.predicates[slug])
    }

    pub fn get(&self, slug: &str) -> Option<&PredicateRef> {
        self.predicates.get(slug)
    }

    pub fn predicate(&self, slug: &str) -> Result<PredicateRef, ModelError> {
        self.get(slug)
            .cloned()
            .ok_or_else(|| ModelError::UnknownPredicate(slug.to_owned()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &PredicateRef> {
        self.predicates.values()
    }
}

fn is_slug(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_lowercase())
        && bytes.all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Lowercase source token such as `ctd` or `drugbank`.
pub(crate) fn is_source_token(s: &str) -> bool {
    !s.is_empty()
        && s.bytes().all(|b| {
            b.is_ascii_lowercase() || b.is_ascii_digit() || matches!(b, b'_' | b'-' | b'.')
        })
}

/// A subject–predicate–object relation between two entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub subject: EntityRef,
    pub predicate: PredicateRef,
    pub object: EntityRef,
}

impl Statement {
    pub fn new(
        subject: EntityRef,
        predicate: PredicateRef,
        object: EntityRef,
    ) -> Result<Self, ModelError> {
        let st = Statement {
            subject,
            predicate,
            object,
        };
        st.validate()?;
        Ok(st)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.subject.validate()?;
        self.object.validate()?;
        if self.subject.kind != self.predicate.domain {
            return Err(ModelError::DomainMismatch {
                predicate: self.predicate.slug.clone(),
                expected: self.predicate.domain,
                found: self.subject.kind,
            });
        }
        if self.object.kind != self.predicate.range {
            return Err(ModelError::RangeMismatch {
                predicate: self.predicate.slug.clone(),
                expected: self.predicate.range,
                found: self.object.kind,
            });
        }
        Ok(())
    }

    /// `{kind}:{id}|{slug}|{kind}:{id}`, used for ordering and identity digests.
    pub fn canonical(&self) -> String {
        format!("{}|{}|{}", self.subject, self.predicate.slug, self.object)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// One provenance attachment for a statement.
///
/// The derived ordering (source, then sorted publications, then taxon) is the
/// canonical evidence order inside a cardinal assertion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvidenceRecord {
    pub source: String,
    pub publications: BTreeSet<String>,
    pub taxon: Option<String>,
}

impl EvidenceRecord {
    pub fn new<I, S>(
        source: impl Into<String>,
        publications: I,
        taxon: Option<String>,
    ) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let rec = EvidenceRecord {
            source: source.into(),
            publications: publications.into_iter().map(Into::into).collect(),
            taxon,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !is_source_token(&self.source) {
            return Err(ModelError::BadSource(self.source.clone()));
        }
        if let Some(bad) = self.publications.iter().find(|p| !is_digits(p)) {
            return Err(ModelError::BadPublication(bad.clone()));
        }
        match &self.taxon {
            Some(t) if !is_digits(t) => Err(ModelError::BadTaxon(t.clone())),
            _ => Ok(()),
        }
    }

    /// `|{source}|{pubs}|{taxon}` suffix appended to a statement key to
    /// identify evidence-level anchors.
    pub fn key_suffix(&self) -> String {
        let pubs: Vec<&str> = self.publications.iter().map(String::as_str).collect();
        format!(
            "|{}|{}|{}",
            self.source,
            pubs.join(","),
            self.taxon.as_deref().unwrap_or("")
        )
    }
}

/// A statement together with every distinct piece of evidence for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalAssertion {
    pub statement: Statement,
    pub evidence: Vec<EvidenceRecord>,
}

impl CardinalAssertion {
    /// Distinct publications over all evidence records.
    pub fn publications(&self) -> BTreeSet<&str> {
        self.evidence
            .iter()
            .flat_map(|e| e.publications.iter().map(String::as_str))
            .collect()
    }

    pub fn has_source(&self, source: &str) -> bool {
        self.evidence.iter().any(|e| e.source == source)
    }
}

/// Deduplicated relation dataset, ordered by canonical statement string.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    cardinals: Vec<CardinalAssertion>,
}

impl Dataset {
    pub fn cardinals(&self) -> &[CardinalAssertion] {
        &self.cardinals
    }

    pub fn len(&self) -> usize {
        self.cardinals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinals.is_empty()
    }

    /// One `(statement, evidence)` row per evidence record, in canonical order.
    pub fn rows(&self) -> impl Iterator<Item = (&Statement, &EvidenceRecord)> {
        self.cardinals
            .iter()
            .flat_map(|c| c.evidence.iter().map(move |e| (&c.statement, e)))
    }

    pub fn to_rows(&self) -> Vec<(Statement, EvidenceRecord)> {
        self.rows().map(|(s, e)| (s.clone(), e.clone())).collect()
    }

    /// Chemicals that appear as the subject of some statement.
    pub fn chemicals(&self) -> BTreeSet<EntityRef> {
        self.cardinals
            .iter()
            .map(|c| &c.statement.subject)
            .filter(|s| s.kind == EntityKind::Chemical)
            .cloned()
            .collect()
    }
}

/// Result of grouping rows into cardinal assertions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grouped {
    pub dataset: Dataset,
    /// Rows dropped because an identical row was already present.
    pub duplicates_collapsed: usize,
}

/// Merge evidence rows into cardinal assertions.
///
/// Rows with equal statements are merged; exact duplicate rows collapse into a
/// single evidence record. The output does not depend on input order.
pub fn group_cardinal<I>(rows: I) -> Result<Dataset, ModelError>
where
    I: IntoIterator<Item = (Statement, EvidenceRecord)>,
{
    group_cardinal_counted(rows).map(|g| g.dataset)
}

pub fn group_cardinal_counted<I>(rows: I) -> Result<Grouped, ModelError>
where
    I: IntoIterator<Item = (Statement, EvidenceRecord)>,
{
    let mut by_key: BTreeMap<String, (Statement, BTreeSet<EvidenceRecord>)> = BTreeMap::new();
    let mut duplicates = 0;
    for (index, (statement, evidence)) in rows.into_iter().enumerate() {
        statement
            .validate()
            .and_then(|_| evidence.validate())
            .map_err(|source| ModelError::InvalidRow {
                index,
                source: Box::new(source),
            })?;
        let key = statement.canonical();
        let entry = by_key
            .entry(key)
            .or_insert_with(|| (statement, BTreeSet::new()));
        if !entry.1.insert(evidence) {
            duplicates += 1;
        }
    }
    // BTreeMap iteration over String keys is byte order of the canonical string.
    let cardinals = by_key
        .into_values()
        .map(|(statement, evidence)| CardinalAssertion {
            statement,
            evidence: evidence.into_iter().collect(),
        })
        .collect();
    Ok(Grouped {
        dataset: Dataset { cardinals },
        duplicates_collapsed: duplicates,
    })
}

/// Evidence multiplicity buckets of the redundancy histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = ">3")]
    MoreThanThree,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [
        Bucket::One,
        Bucket::Two,
        Bucket::Three,
        Bucket::MoreThanThree,
    ];

    pub fn of(multiplicity: usize) -> Bucket {
        match multiplicity {
            0 | 1 => Bucket::One,
            2 => Bucket::Two,
            3 => Bucket::Three,
            _ => Bucket::MoreThanThree,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bucket::One => "1",
            Bucket::Two => "2",
            Bucket::Three => "3",
            Bucket::MoreThanThree => ">3",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Bucket {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bucket::ALL
            .into_iter()
            .find(|b| b.label() == s)
            .ok_or_else(|| ModelError::BadBucket(s.to_owned()))
    }
}

/// Size and redundancy accounting of a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetCounts {
    /// Cardinal assertions.
    pub r: usize,
    /// Evidence records.
    pub e: usize,
    /// Publication citations, summed over evidence records.
    pub k: usize,
    /// Evidence records carrying a taxon.
    pub t: usize,
    /// Only non-empty buckets are present.
    pub histogram: BTreeMap<Bucket, usize>,
    /// The statement with the most evidence; ties go to the first in canonical order.
    pub max_pair: Option<(Statement, usize)>,
}

pub fn dataset_counts(d: &Dataset) -> DatasetCounts {
    let mut counts = DatasetCounts::default();
    for c in d.cardinals() {
        let m = c.evidence.len();
        counts.r += 1;
        counts.e += m;
        counts.k += c
            .evidence
            .iter()
            .map(|e| e.publications.len())
            .sum::<usize>();
        counts.t += c.evidence.iter().filter(|e| e.taxon.is_some()).count();
        *counts.histogram.entry(Bucket::of(m)).or_default() += 1;
        if counts.max_pair.as_ref().is_none_or(|(_, best)| m > *best) {
            counts.max_pair = Some((c.statement.clone(), m));
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::default()
    }

    fn st(s: (EntityKind, &str), p: &str, o: (EntityKind, &str)) -> Statement {
        Statement {
            subject: EntityRef {
                kind: s.0,
                id: s.1.into(),
            },
            predicate: vocab().predicate(p).unwrap(),
            object: EntityRef {
                kind: o.0,
                id: o.1.into(),
            },
        }
    }

    fn ev(src: &str, pubs: &[&str], taxon: Option<&str>) -> EvidenceRecord {
        EvidenceRecord::new(src, pubs.iter().copied(), taxon.map(str::to_owned)).unwrap()
    }

    use EntityKind::*;

    #[test]
    fn identifier_syntax() {
        assert!(EntityRef::chemical("5743").is_ok());
        assert!(EntityRef::chemical("CID5743").is_err());
        assert!(EntityRef::gene("").is_err());
        assert!(EntityRef::disease("C0011849").is_ok());
        assert!(EntityRef::disease("C001184").is_err());
        assert!(EntityRef::disease("D0011849").is_err());
    }

    #[test]
    fn canonical_statement_string() {
        let s = st((Chemical, "5743"), "inhibits", (Gene, "2908"));
        assert_eq!(s.canonical(), "chemical:5743|inhibits|gene:2908");
    }

    #[test]
    fn domain_mismatch_names_row() {
        let bad = st((Gene, "1"), "inhibits", (Gene, "2"));
        let good = st((Chemical, "1"), "inhibits", (Gene, "2"));
        let err = group_cardinal(vec![
            (good, ev("ctd", &[], None)),
            (bad, ev("ctd", &[], None)),
        ])
        .unwrap_err();
        match err {
            ModelError::InvalidRow { index, source } => {
                assert_eq!(index, 1);
                assert!(matches!(*source, ModelError::DomainMismatch { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identical_rows_collapse() {
        let s = st((Chemical, "5743"), "inhibits", (Gene, "2908"));
        let e = ev("ctd", &["111"], Some("9606"));
        let g = group_cardinal_counted(vec![(s.clone(), e.clone()), (s, e)]).unwrap();
        assert_eq!(g.dataset.len(), 1);
        assert_eq!(g.dataset.cardinals()[0].evidence.len(), 1);
        assert_eq!(g.duplicates_collapsed, 1);
    }

    #[test]
    fn four_sources_one_cardinal() {
        let s = st((Chemical, "5743"), "inhibits", (Gene, "2908"));
        let rows: Vec<_> = ["ctd", "drugbank", "kegg", "iuphar"]
            .iter()
            .map(|src| (s.clone(), ev(src, &[], None)))
            .collect();
        let d = group_cardinal(rows).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.cardinals()[0].evidence.len(), 4);
        let sources: Vec<_> = d.cardinals()[0]
            .evidence
            .iter()
            .map(|e| e.source.as_str())
            .collect();
        assert_eq!(sources, ["ctd", "drugbank", "iuphar", "kegg"]);
    }

    #[test]
    fn empty_counts() {
        let c = dataset_counts(&Dataset::default());
        assert_eq!((c.r, c.e, c.k, c.t), (0, 0, 0, 0));
        assert!(c.histogram.is_empty());
        assert!(c.max_pair.is_none());
    }

    #[test]
    fn bucket_labels_round_trip() {
        for b in Bucket::ALL {
            assert_eq!(b.label().parse::<Bucket>().unwrap(), b);
        }
        assert_eq!(Bucket::of(3096), Bucket::MoreThanThree);
    }

    #[test]
    fn evidence_validation() {
        assert!(EvidenceRecord::new("CTD", Vec::<String>::new(), None).is_err());
        assert!(EvidenceRecord::new("ctd", ["12a"], None).is_err());
        assert!(EvidenceRecord::new("ctd", ["12"], Some("human".into())).is_err());
        assert!(EvidenceRecord::new("", Vec::<String>::new(), None).is_err());
    }
}
