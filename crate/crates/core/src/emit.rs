//! Compilation of a [`Dataset`] into the five provenance models.
//!
//! | model | anchor                          | evidence attachment                          |
//! |-------|---------------------------------|----------------------------------------------|
//! | I     | one N-ary instance per cardinal | evidence nodes via `providesAssertionFor`    |
//! | II    | one N-ary instance per evidence | directly on the instance                     |
//! | III   | one singleton property per cardinal | evidence nodes via `providesAssertionFor` |
//! | IV    | one singleton property per evidence | directly on the property                 |
//! | V     | one assertion graph per cardinal | one provenance graph per evidence           |

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    CardinalAssertion, Dataset, DatasetCounts, EntityKind, EntityRef, EvidenceRecord, Statement,
};
use crate::rdf::{Iri, RdfError, RdfQuad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(alias = "i")]
    I,
    #[serde(alias = "ii")]
    II,
    #[serde(alias = "iii")]
    III,
    #[serde(alias = "iv")]
    IV,
    #[serde(alias = "v")]
    V,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::I,
        ModelId::II,
        ModelId::III,
        ModelId::IV,
        ModelId::V,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::I => "I",
            ModelId::II => "II",
            ModelId::III => "III",
            ModelId::IV => "IV",
            ModelId::V => "V",
        }
    }

    /// Models I and III attach evidence to a single cardinal anchor; V groups by
    /// cardinal assertion as well.
    pub fn is_cardinal(self) -> bool {
        matches!(self, ModelId::I | ModelId::III | ModelId::V)
    }

    pub fn uses_named_graphs(self) -> bool {
        self == ModelId::V
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown model `{0}` (expected I, II, III, IV or V)")]
pub struct UnknownModel(pub String);

impl FromStr for ModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownModel(s.to_owned()))
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("template `{0}` must contain exactly one `{{id}}` placeholder")]
    Template(String),
    #[error(transparent)]
    Iri(#[from] RdfError),
}

/// IRIs used by the emitters and the query builder.
///
/// Templates contain exactly one `{id}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabConfig {
    pub chemical_template: String,
    pub gene_template: String,
    pub disease_template: String,
    /// Relation predicate IRI per slug.
    pub predicate_template: String,
    /// N-ary process class per slug.
    pub class_template: String,
    pub source_template: String,
    pub publication_template: String,
    pub taxon_template: String,
    pub rdf_type: String,
    pub has_agent: String,
    pub has_target: String,
    pub singleton_property_of: String,
    pub provides_assertion_for: String,
    pub cites_as_evidence: String,
    pub source_pred: String,
    pub taxon_pred: String,
    pub np_has_assertion: String,
    pub np_has_provenance: String,
    pub np_nanopublication: String,
    /// Prefix for minted anchors, without trailing slash.
    pub base: String,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            chemical_template: "http://rdf.ncbi.nlm.nih.gov/pubchem/compound/CID{id}".into(),
            gene_template: "http://example.org/ncbigene/{id}".into(),
            disease_template: "http://example.org/umls/{id}".into(),
            predicate_template: "http://example.org/vocab/{id}".into(),
            class_template: "http://example.org/vocab/class/{id}".into(),
            source_template: "http://example.org/source/{id}".into(),
            publication_template: "http://identifiers.org/pubmed/{id}".into(),
            taxon_template: "http://purl.obolibrary.org/obo/NCBITaxon_{id}".into(),
            rdf_type: "http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into(),
            has_agent: "http://example.org/vocab/has_agent".into(),
            has_target: "http://example.org/vocab/has_target".into(),
            singleton_property_of: "http://www.w3.org/1999/02/22-rdf-syntax-ns#singletonPropertyOf"
                .into(),
            provides_assertion_for: "http://purl.org/spar/cito/providesAssertionFor".into(),
            cites_as_evidence: "http://purl.org/spar/cito/citesAsEvidence".into(),
            source_pred: "http://purl.org/dc/terms/source".into(),
            taxon_pred: "http://purl.obolibrary.org/obo/RO_0002162".into(),
            np_has_assertion: "http://www.nanopub.org/nschema#hasAssertion".into(),
            np_has_provenance: "http://www.nanopub.org/nschema#hasProvenance".into(),
            np_nanopublication: "http://www.nanopub.org/nschema#Nanopublication".into(),
            base: "http://example.org/provenance".into(),
        }
    }
}

impl VocabConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for t in [
            &self.chemical_template,
            &self.gene_template,
            &self.disease_template,
            &self.predicate_template,
            &self.class_template,
            &self.source_template,
            &self.publication_template,
            &self.taxon_template,
        ] {
            if t.matches("{id}").count() != 1 {
                return Err(ConfigError::Template(t.clone()));
            }
            Iri::new(t.replace("{id}", "0"))?;
        }
        for iri in [
            &self.rdf_type,
            &self.has_agent,
            &self.has_target,
            &self.singleton_property_of,
            &self.provides_assertion_for,
            &self.cites_as_evidence,
            &self.source_pred,
            &self.taxon_pred,
            &self.np_has_assertion,
            &self.np_has_provenance,
            &self.np_nanopublication,
            &self.base,
        ] {
            Iri::new(iri.as_str())?;
        }
        Ok(())
    }

    fn fill(template: &str, id: &str) -> Iri {
        Iri::new(template.replace("{id}", id))
            .expect("validated template filled with a checked identifier")
    }

    pub fn entity_iri(&self, e: &EntityRef) -> Iri {
        let template = match e.kind {
            EntityKind::Chemical => &self.chemical_template,
            EntityKind::Gene => &self.gene_template,
            EntityKind::Disease => &self.disease_template,
        };
        Self::fill(template, &e.id)
    }

    pub fn predicate_iri(&self, slug: &str) -> Iri {
        Self::fill(&self.predicate_template, slug)
    }

    pub fn class_iri(&self, slug: &str) -> Iri {
        Self::fill(&self.class_template, slug)
    }

    pub fn source_iri(&self, source: &str) -> Iri {
        Self::fill(&self.source_template, source)
    }

    pub fn publication_iri(&self, pmid: &str) -> Iri {
        Self::fill(&self.publication_template, pmid)
    }

    pub fn taxon_iri(&self, taxon: &str) -> Iri {
        Self::fill(&self.taxon_template, taxon)
    }

    pub(crate) fn iri(value: &str) -> Iri {
        Iri::new(value).expect("validated vocabulary IRI")
    }
}

/// Kinds of minted anchor IRIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchorKind {
    NaryInstance,
    SingletonProp,
    EvidenceNode,
    NanopubRoot,
    AssertionGraph,
    ProvenanceGraph,
    HeadGraph,
}

impl AnchorKind {
    pub fn slug(self) -> &'static str {
        match self {
            AnchorKind::NaryInstance => "relation",
            AnchorKind::SingletonProp => "sp",
            AnchorKind::EvidenceNode => "evidence",
            AnchorKind::NanopubRoot => "nanopub",
            AnchorKind::AssertionGraph => "assertion",
            AnchorKind::ProvenanceGraph => "provenance",
            AnchorKind::HeadGraph => "head",
        }
    }
}

/// First 128 bits of SHA-256, hex encoded.
fn digest(key: &str) -> String {
    let hash = Sha256::digest(key.as_bytes());
    hex::encode(&hash[..16])
}

/// Deterministic anchor IRI for `key`.
///
/// `{base}/{kind}/{digest}`; singleton properties hang off their generic
/// predicate instead: `{predicate}#{digest}`. The predicate is the slug
/// embedded in `key`.
pub fn mint(kind: AnchorKind, key: &str, cfg: &VocabConfig) -> Iri {
    match kind {
        AnchorKind::SingletonProp => {
            let slug = key.split('|').nth(1).unwrap_or_default();
            Iri::new(format!(
                "{}#{}",
                cfg.predicate_iri(slug).as_str(),
                digest(key)
            ))
            .expect("predicate IRI plus hex fragment")
        }
        _ => Iri::new(format!("{}/{}/{}", cfg.base, kind.slug(), digest(key)))
            .expect("base IRI plus hex path"),
    }
}

fn evidence_key(st: &Statement, ev: &EvidenceRecord) -> String {
    let mut key = st.canonical();
    key.push_str(&ev.key_suffix());
    key
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    /// Emit the nanopublication head graph (Model V only).
    pub include_head: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions { include_head: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EmissionStats {
    pub triples: usize,
    /// Distinct named graphs; zero for Models I–IV.
    pub graphs: usize,
    pub anchors_minted: usize,
}

/// Streaming emission: quads are produced one cardinal assertion at a time.
pub struct Emission<'a> {
    cardinals: std::slice::Iter<'a, CardinalAssertion>,
    model: ModelId,
    cfg: &'a VocabConfig,
    opts: EmitOptions,
    pending: std::vec::IntoIter<RdfQuad>,
    stats: EmissionStats,
    graphs: HashSet<Iri>,
}

impl<'a> Emission<'a> {
    /// Counts over the quads yielded so far.
    pub fn stats(&self) -> EmissionStats {
        self.stats
    }

    fn expand(&mut self, c: &CardinalAssertion) -> Vec<RdfQuad> {
        let cfg = self.cfg;
        let st = &c.statement;
        let s = cfg.entity_iri(&st.subject);
        let o = cfg.entity_iri(&st.object);
        let pred = cfg.predicate_iri(&st.predicate.slug);
        let skey = st.canonical();
        let mut out = Vec::new();
        let rdf_type = VocabConfig::iri(&cfg.rdf_type);
        let has_agent = VocabConfig::iri(&cfg.has_agent);
        let has_target = VocabConfig::iri(&cfg.has_target);
        let sp_of = VocabConfig::iri(&cfg.singleton_property_of);
        let paf = VocabConfig::iri(&cfg.provides_assertion_for);

        match self.model {
            ModelId::I | ModelId::III => {
                let anchor = if self.model == ModelId::I {
                    let r = mint(AnchorKind::NaryInstance, &skey, cfg);
                    out.push(RdfQuad::triple(
                        r.clone(),
                        rdf_type.clone(),
                        cfg.class_iri(&st.predicate.slug),
                    ));
                    out.push(RdfQuad::triple(r.clone(), has_agent.clone(), s.clone()));
                    out.push(RdfQuad::triple(r.clone(), has_target.clone(), o.clone()));
                    r
                } else {
                    let sp = mint(AnchorKind::SingletonProp, &skey, cfg);
                    out.push(RdfQuad::triple(s.clone(), sp.clone(), o.clone()));
                    out.push(RdfQuad::triple(sp.clone(), sp_of.clone(), pred.clone()));
                    sp
                };
                self.stats.anchors_minted += 1;
                for ev in &c.evidence {
                    let node = mint(AnchorKind::EvidenceNode, &evidence_key(st, ev), cfg);
                    self.stats.anchors_minted += 1;
                    out.push(RdfQuad::triple(node.clone(), paf.clone(), anchor.clone()));
                    self.provenance(&node, ev, None, &mut out);
                }
            }
            ModelId::II | ModelId::IV => {
                for ev in &c.evidence {
                    let ekey = evidence_key(st, ev);
                    let anchor = if self.model == ModelId::II {
                        let r = mint(AnchorKind::NaryInstance, &ekey, cfg);
                        out.push(RdfQuad::triple(
                            r.clone(),
                            rdf_type.clone(),
                            cfg.class_iri(&st.predicate.slug),
                        ));
                        out.push(RdfQuad::triple(r.clone(), has_agent.clone(), s.clone()));
                        out.push(RdfQuad::triple(r.clone(), has_target.clone(), o.clone()));
                        r
                    } else {
                        let sp = mint(AnchorKind::SingletonProp, &ekey, cfg);
                        out.push(RdfQuad::triple(s.clone(), sp.clone(), o.clone()));
                        out.push(RdfQuad::triple(sp.clone(), sp_of.clone(), pred.clone()));
                        sp
                    };
                    self.stats.anchors_minted += 1;
                    self.provenance(&anchor, ev, None, &mut out);
                }
            }
            ModelId::V => {
                let ga = mint(AnchorKind::AssertionGraph, &skey, cfg);
                self.stats.anchors_minted += 1;
                out.push(RdfQuad::in_graph(s, pred, o, ga.clone()));
                let mut prov_graphs = Vec::with_capacity(c.evidence.len());
                for ev in &c.evidence {
                    let gp = mint(AnchorKind::ProvenanceGraph, &evidence_key(st, ev), cfg);
                    self.stats.anchors_minted += 1;
                    self.provenance(&ga, ev, Some(&gp), &mut out);
                    prov_graphs.push(gp);
                }
                if self.opts.include_head {
                    let np = mint(AnchorKind::NanopubRoot, &skey, cfg);
                    let head = mint(AnchorKind::HeadGraph, &skey, cfg);
                    self.stats.anchors_minted += 2;
                    out.push(RdfQuad::in_graph(
                        np.clone(),
                        rdf_type,
                        VocabConfig::iri(&cfg.np_nanopublication),
                        head.clone(),
                    ));
                    out.push(RdfQuad::in_graph(
                        np.clone(),
                        VocabConfig::iri(&cfg.np_has_assertion),
                        ga,
                        head.clone(),
                    ));
                    let has_prov = VocabConfig::iri(&cfg.np_has_provenance);
                    for gp in prov_graphs {
                        out.push(RdfQuad::in_graph(
                            np.clone(),
                            has_prov.clone(),
                            gp,
                            head.clone(),
                        ));
                    }
                }
            }
        }
        out
    }

    /// Source, publication and taxon triples about `subject`.
    fn provenance(
        &self,
        subject: &Iri,
        ev: &EvidenceRecord,
        graph: Option<&Iri>,
        out: &mut Vec<RdfQuad>,
    ) {
        let cfg = self.cfg;
        let g = graph.cloned();
        let mut push = |p: Iri, o: Iri| {
            out.push(RdfQuad {
                subject: subject.clone(),
                predicate: p,
                object: o.into(),
                graph: g.clone(),
            })
        };
        push(
            VocabConfig::iri(&cfg.source_pred),
            cfg.source_iri(&ev.source),
        );
        let cites = VocabConfig::iri(&cfg.cites_as_evidence);
        for pmid in &ev.publications {
            push(cites.clone(), cfg.publication_iri(pmid));
        }
        if let Some(t) = &ev.taxon {
            push(VocabConfig::iri(&cfg.taxon_pred), cfg.taxon_iri(t));
        }
    }
}

impl Iterator for Emission<'_> {
    type Item = RdfQuad;

    fn next(&mut self) -> Option<RdfQuad> {
        loop {
            if let Some(q) = self.pending.next() {
                self.stats.triples += 1;
                if let Some(g) = &q.graph {
                    if self.graphs.insert(g.clone()) {
                        self.stats.graphs += 1;
                    }
                }
                return Some(q);
            }
            let c = self.cardinals.next()?;
            self.pending = self.expand(c).into_iter();
        }
    }
}

/// Stream the quads of model `m` for `d`. The configuration must have passed
/// [`VocabConfig::validate`].
pub fn emit<'a>(
    d: &'a Dataset,
    m: ModelId,
    cfg: &'a VocabConfig,
    opts: EmitOptions,
) -> Emission<'a> {
    Emission {
        cardinals: d.cardinals().iter(),
        model: m,
        cfg,
        opts,
        pending: Vec::new().into_iter(),
        stats: EmissionStats::default(),
        graphs: HashSet::new(),
    }
}

/// Collect a whole emission with its statistics.
pub fn emit_all(
    d: &Dataset,
    m: ModelId,
    cfg: &VocabConfig,
    opts: EmitOptions,
) -> (Vec<RdfQuad>, EmissionStats) {
    let mut emission = emit(d, m, cfg, opts);
    let quads: Vec<RdfQuad> = emission.by_ref().collect();
    (quads, emission.stats())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpectedCounts {
    pub triples: usize,
    pub graphs: usize,
}

/// Closed-form emission size from dataset counts.
pub fn expected_counts(c: &DatasetCounts, m: ModelId, opts: EmitOptions) -> ExpectedCounts {
    let (r, e, k, t) = (c.r, c.e, c.k, c.t);
    let (triples, graphs) = match m {
        ModelId::I => (3 * r + 2 * e + k + t, 0),
        ModelId::II => (4 * e + k + t, 0),
        ModelId::III => (2 * r + 2 * e + k + t, 0),
        ModelId::IV => (3 * e + k + t, 0),
        ModelId::V if opts.include_head => (3 * r + 2 * e + k + t, 2 * r + e),
        ModelId::V => (r + e + k + t, r + e),
    };
    ExpectedCounts { triples, graphs }
}
