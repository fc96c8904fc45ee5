//! Model-independent query specifications, their per-model algebra plans and
//! SPARQL 1.1 rendering.
//!
//! Every query walks the same three-leg path from a seed chemical:
//! `seed -leg1-> ?b -leg2-> ?c -leg3-> ?d` and projects the diseases `?d`.
//!
//! * Q1: the plain path.
//! * Q2: Q1 minus diseases reachable in two steps, `seed -leg1-> ?g2 -leg3-> ?d`.
//! * Q3: Q1 where constrained legs must carry evidence from a given source.
//! * Q4: Q1 where every leg must be supported by more than `min_pubs`
//!   distinct publications.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emit::{ModelId, VocabConfig};
use crate::ingest::SEED_CIDS;
use crate::model::{is_source_token, EntityKind, EntityRef};
use crate::rdf::{Iri, RdfTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryId {
    #[serde(alias = "q1")]
    Q1,
    #[serde(alias = "q2")]
    Q2,
    #[serde(alias = "q3")]
    Q3,
    #[serde(alias = "q4")]
    Q4,
}

impl QueryId {
    pub const ALL: [QueryId; 4] = [QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryId::Q1 => "Q1",
            QueryId::Q2 => "Q2",
            QueryId::Q3 => "Q3",
            QueryId::Q4 => "Q4",
        }
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryId {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryId::ALL
            .into_iter()
            .find(|q| q.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| QueryError::UnknownQuery(s.to_owned()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown query `{0}` (expected Q1..Q4)")]
    UnknownQuery(String),
    #[error("seed must be a chemical, got {0}")]
    SeedNotChemical(String),
    #[error("Q3 requires at least one leg source constraint")]
    MissingSourceConstraints,
    #[error("source constraints are only meaningful for Q3")]
    UnexpectedSourceConstraints,
    #[error("leg index {0} out of range (legs are 1, 2, 3)")]
    BadLeg(usize),
    #[error("invalid source token `{0}`")]
    BadSource(String),
    #[error("min_pubs must be positive")]
    ZeroMinPubs,
    #[error("invalid leg predicate slug `{0}`")]
    BadSlug(String),
}

pub const DEFAULT_LEGS: [&str; 3] = ["inhibits", "interacts_with", "associated_with"];

/// One benchmark query instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuerySpec {
    pub query: QueryId,
    pub seed: EntityRef,
    /// Predicate slugs for chemical→gene, gene→gene and gene→disease.
    pub leg_predicates: [String; 3],
    /// Leg number (1..=3) → required source. Q3 only.
    pub source_constraints: BTreeMap<usize, String>,
    /// Q4 keeps legs with strictly more than this many distinct publications.
    pub min_pubs: usize,
}

impl QuerySpec {
    pub fn new(query: QueryId, seed: EntityRef) -> Self {
        QuerySpec {
            query,
            seed,
            leg_predicates: DEFAULT_LEGS.map(str::to_owned),
            source_constraints: BTreeMap::new(),
            min_pubs: 1,
        }
    }

    pub fn with_sources(mut self, constraints: impl IntoIterator<Item = (usize, String)>) -> Self {
        self.source_constraints = constraints.into_iter().collect();
        self
    }

    pub fn with_min_pubs(mut self, min_pubs: usize) -> Self {
        self.min_pubs = min_pubs;
        self
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.seed.kind != EntityKind::Chemical || self.seed.validate().is_err() {
            return Err(QueryError::SeedNotChemical(self.seed.to_string()));
        }
        for slug in &self.leg_predicates {
            if slug.is_empty()
                || !slug
                    .bytes()
                    .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
            {
                return Err(QueryError::BadSlug(slug.clone()));
            }
        }
        for (leg, src) in &self.source_constraints {
            if !(1..=3).contains(leg) {
                return Err(QueryError::BadLeg(*leg));
            }
            if !is_source_token(src) {
                return Err(QueryError::BadSource(src.clone()));
            }
        }
        match (self.query, self.source_constraints.is_empty()) {
            (QueryId::Q3, true) => return Err(QueryError::MissingSourceConstraints),
            (QueryId::Q1 | QueryId::Q2 | QueryId::Q4, false) => {
                return Err(QueryError::UnexpectedSourceConstraints)
            }
            _ => {}
        }
        if self.min_pubs == 0 {
            return Err(QueryError::ZeroMinPubs);
        }
        Ok(())
    }
}

/// Parse `leg=source`, e.g. `1=ctd`.
pub fn parse_source_constraint(s: &str) -> Result<(usize, String), QueryError> {
    let (leg, src) = s
        .split_once('=')
        .ok_or_else(|| QueryError::BadSource(s.to_owned()))?;
    let leg: usize = leg
        .trim()
        .parse()
        .map_err(|_| QueryError::BadSource(s.to_owned()))?;
    if !(1..=3).contains(&leg) {
        return Err(QueryError::BadLeg(leg));
    }
    let src = src.trim();
    if !is_source_token(src) {
        return Err(QueryError::BadSource(src.to_owned()));
    }
    Ok((leg, src.to_owned()))
}

/// Options for [`seed_suite`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub queries: Vec<QueryId>,
    /// PubChem CIDs.
    pub seeds: Vec<String>,
    /// Leg → source for Q3.
    #[serde(with = "leg_keys")]
    pub q3_sources: BTreeMap<usize, String>,
    pub min_pubs: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            queries: QueryId::ALL.to_vec(),
            seeds: SEED_CIDS.iter().map(|s| (*s).to_owned()).collect(),
            q3_sources: [(1, "ctd".to_owned()), (3, "disgenet".to_owned())]
                .into_iter()
                .collect(),
            min_pubs: 1,
        }
    }
}

/// Leg maps keyed by strings on the wire, since TOML and JSON keys are strings.
mod leg_keys {
    use std::collections::BTreeMap;

    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, String>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, &String> = m.iter().map(|(k, v)| (k.to_string(), v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<usize, String>, D::Error> {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("leg `{k}` is not a number")))
            })
            .collect()
    }
}

/// Cross product of queries and seed chemicals, queries outermost.
pub fn seed_suite(opts: &SuiteOptions) -> Result<Vec<QuerySpec>, QueryError> {
    let mut specs = Vec::with_capacity(opts.queries.len() * opts.seeds.len());
    for &q in &opts.queries {
        for cid in &opts.seeds {
            let seed = EntityRef::chemical(cid.as_str())
                .map_err(|_| QueryError::SeedNotChemical(cid.clone()))?;
            let mut spec = QuerySpec::new(q, seed).with_min_pubs(opts.min_pubs);
            if q == QueryId::Q3 {
                spec.source_constraints = opts.q3_sources.clone();
            }
            spec.validate()?;
            specs.push(spec);
        }
    }
    Ok(specs)
}

/// Query variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermPattern {
    Var(Var),
    Const(RdfTerm),
}

impl TermPattern {
    pub fn var(&self) -> Option<&Var> {
        match self {
            TermPattern::Var(v) => Some(v),
            TermPattern::Const(_) => None,
        }
    }
}

impl From<Var> for TermPattern {
    fn from(v: Var) -> Self {
        TermPattern::Var(v)
    }
}

impl From<Iri> for TermPattern {
    fn from(i: Iri) -> Self {
        TermPattern::Const(RdfTerm::Iri(i))
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Var(v) => v.fmt(f),
            TermPattern::Const(t) => t.fmt(f),
        }
    }
}

/// Triple pattern, optionally scoped to a named graph. Without a graph it
/// matches the default graph only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadPattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
    pub graph: Option<TermPattern>,
}

impl QuadPattern {
    pub fn new(
        s: impl Into<TermPattern>,
        p: impl Into<TermPattern>,
        o: impl Into<TermPattern>,
    ) -> Self {
        QuadPattern {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            graph: None,
        }
    }

    pub fn in_graph(mut self, g: impl Into<TermPattern>) -> Self {
        self.graph = Some(g.into());
        self
    }

    pub fn positions(&self) -> impl Iterator<Item = &TermPattern> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .chain(self.graph.as_ref())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.positions().filter_map(TermPattern::var)
    }
}

/// `GROUP BY group_by HAVING(COUNT([DISTINCT] counted) > threshold)` over an
/// independent subplan, projecting the group variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupFilter {
    pub group_by: Vec<Var>,
    pub counted: Var,
    pub distinct: bool,
    pub threshold: usize,
    pub input: Box<PlanNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlanNode {
    Pattern(QuadPattern),
    /// Natural join of the children. `NotExists` children act as filters on
    /// the join's solutions.
    Join(Vec<PlanNode>),
    NotExists(Box<PlanNode>),
    GroupFilter(GroupFilter),
    Distinct(Box<PlanNode>),
    Project(Vec<Var>, Box<PlanNode>),
}

impl PlanNode {
    /// Visit every node, parents before children.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a PlanNode)) {
        f(self);
        match self {
            PlanNode::Pattern(_) => {}
            PlanNode::Join(children) => children.iter().for_each(|c| c.walk(f)),
            PlanNode::NotExists(inner)
            | PlanNode::Distinct(inner)
            | PlanNode::Project(_, inner) => inner.walk(f),
            PlanNode::GroupFilter(g) => g.input.walk(f),
        }
    }

    /// Variables that may be bound in this node's solutions.
    pub fn output_vars(&self) -> BTreeSet<Var> {
        match self {
            PlanNode::Pattern(p) => p.vars().cloned().collect(),
            PlanNode::Join(children) => children.iter().flat_map(|c| c.output_vars()).collect(),
            PlanNode::NotExists(_) => BTreeSet::new(),
            PlanNode::GroupFilter(g) => g.group_by.iter().cloned().collect(),
            PlanNode::Distinct(inner) => inner.output_vars(),
            PlanNode::Project(vars, _) => vars.iter().cloned().collect(),
        }
    }
}

/// A query plan, rooted at `Distinct(Project(.., Join(..)))` for generated queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryPlan {
    pub root: PlanNode,
}

impl QueryPlan {
    pub fn patterns(&self) -> Vec<&QuadPattern> {
        let mut out = Vec::new();
        self.root.walk(&mut |n| {
            if let PlanNode::Pattern(p) = n {
                out.push(p);
            }
        });
        out
    }

    pub fn count_nodes(&self, pred: impl Fn(&PlanNode) -> bool) -> usize {
        let mut n = 0;
        self.root.walk(&mut |node| {
            if pred(node) {
                n += 1;
            }
        });
        n
    }

    pub fn group_filters(&self) -> Vec<&GroupFilter> {
        let mut out = Vec::new();
        self.root.walk(&mut |n| {
            if let PlanNode::GroupFilter(g) = n {
                out.push(g);
            }
        });
        out
    }

    /// Projected variables of the root.
    pub fn projection(&self) -> Vec<Var> {
        let mut node = &self.root;
        loop {
            match node {
                PlanNode::Distinct(inner) => node = inner,
                PlanNode::Project(vars, _) => return vars.clone(),
                other => return other.output_vars().into_iter().collect(),
            }
        }
    }

    /// Every projected variable must be bound by some pattern below the projection.
    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        self.root.walk(&mut |n| {
            if let PlanNode::Project(vars, inner) = n {
                let bound = inner.output_vars();
                for v in vars {
                    if !bound.contains(v) {
                        problems.push(format!("projected {v} is not bound"));
                    }
                }
            }
            if let PlanNode::GroupFilter(g) = n {
                let bound = g.input.output_vars();
                for v in g.group_by.iter().chain([&g.counted]) {
                    if !bound.contains(v) {
                        problems.push(format!("group variable {v} is not bound"));
                    }
                }
            }
        });
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Per-model expansion of one conceptual `(s, pred, o)` edge.
struct Expander<'a> {
    model: ModelId,
    cfg: &'a VocabConfig,
}

fn v(name: impl Into<String>) -> Var {
    Var::new(name)
}

impl Expander<'_> {
    fn iri(&self, s: &str) -> Iri {
        VocabConfig::iri(s)
    }

    /// Name of the anchor variable for edge number `n`.
    fn anchor(&self, n: usize) -> Var {
        match self.model {
            ModelId::I | ModelId::II => v(format!("r{n}")),
            ModelId::III | ModelId::IV => v(format!("sp{n}")),
            ModelId::V => v(format!("ga{n}")),
        }
    }

    /// Patterns asserting `s slug o` with the given anchor variable.
    fn edge(&self, s: &TermPattern, slug: &str, o: &TermPattern, anchor: &Var) -> Vec<PlanNode> {
        let cfg = self.cfg;
        let a = TermPattern::Var(anchor.clone());
        let pats = match self.model {
            ModelId::I | ModelId::II => vec![
                QuadPattern::new(a.clone(), self.iri(&cfg.rdf_type), cfg.class_iri(slug)),
                QuadPattern::new(a.clone(), self.iri(&cfg.has_agent), s.clone()),
                QuadPattern::new(a, self.iri(&cfg.has_target), o.clone()),
            ],
            ModelId::III | ModelId::IV => vec![
                QuadPattern::new(
                    a.clone(),
                    self.iri(&cfg.singleton_property_of),
                    cfg.predicate_iri(slug),
                ),
                QuadPattern::new(s.clone(), a, o.clone()),
            ],
            ModelId::V => {
                vec![QuadPattern::new(s.clone(), cfg.predicate_iri(slug), o.clone()).in_graph(a)]
            }
        };
        pats.into_iter().map(PlanNode::Pattern).collect()
    }

    /// Patterns reaching a provenance property of the edge anchored at `anchor`.
    /// `via` names the intermediate evidence node or provenance graph.
    fn provenance(
        &self,
        anchor: &Var,
        via: &Var,
        pred: &str,
        object: TermPattern,
    ) -> Vec<PlanNode> {
        let cfg = self.cfg;
        let pred = self.iri(pred);
        let pats = match self.model {
            ModelId::I | ModelId::III => vec![
                QuadPattern::new(
                    via.clone(),
                    self.iri(&cfg.provides_assertion_for),
                    anchor.clone(),
                ),
                QuadPattern::new(via.clone(), pred, object),
            ],
            ModelId::II | ModelId::IV => vec![QuadPattern::new(anchor.clone(), pred, object)],
            ModelId::V => {
                vec![QuadPattern::new(anchor.clone(), pred, object).in_graph(via.clone())]
            }
        };
        pats.into_iter().map(PlanNode::Pattern).collect()
    }

    fn evidence_var(&self, n: usize) -> Var {
        match self.model {
            ModelId::V => v(format!("gp{n}")),
            _ => v(format!("ev{n}")),
        }
    }

    /// Publication-count filter for edge `n`.
    fn pub_filter(
        &self,
        n: usize,
        s: &TermPattern,
        slug: &str,
        o: &TermPattern,
        min_pubs: usize,
    ) -> PlanNode {
        let cfg = self.cfg;
        let counted = v(format!("pub{n}"));
        let (group_by, input) = match self.model {
            // One anchor per cardinal: count per anchor.
            ModelId::I | ModelId::III => {
                let anchor = self.anchor(n);
                let ev = v(format!("pe{n}"));
                let pats =
                    self.provenance(&anchor, &ev, &cfg.cites_as_evidence, counted.clone().into());
                (vec![anchor], pats)
            }
            // Duplicate anchors pool their publications per (subject, object).
            ModelId::II | ModelId::IV | ModelId::V => {
                let inner_anchor = v(format!("x{n}"));
                let mut pats = self.edge(s, slug, o, &inner_anchor);
                let via = v(format!("pg{n}"));
                pats.extend(self.provenance(
                    &inner_anchor,
                    &via,
                    &cfg.cites_as_evidence,
                    counted.clone().into(),
                ));
                let group_by = [s, o]
                    .into_iter()
                    .filter_map(TermPattern::var)
                    .cloned()
                    .collect();
                (group_by, pats)
            }
        };
        PlanNode::GroupFilter(GroupFilter {
            group_by,
            counted,
            distinct: true,
            threshold: min_pubs,
            input: Box::new(PlanNode::Join(input)),
        })
    }
}

/// Expand `q` into the algebra plan for model `m`.
pub fn build_plan(q: &QuerySpec, m: ModelId, cfg: &VocabConfig) -> Result<QueryPlan, QueryError> {
    q.validate()?;
    let x = Expander { model: m, cfg };
    let seed: TermPattern = cfg.entity_iri(&q.seed).into();
    let (b, c, d) = (
        TermPattern::Var(v("b")),
        TermPattern::Var(v("c")),
        TermPattern::Var(v("d")),
    );
    let legs = [(&seed, &b), (&b, &c), (&c, &d)];

    let mut children = Vec::new();
    for (i, (s, o)) in legs.iter().enumerate() {
        children.extend(x.edge(s, &q.leg_predicates[i], o, &x.anchor(i + 1)));
    }
    match q.query {
        QueryId::Q1 => {}
        QueryId::Q2 => {
            let g2 = TermPattern::Var(v("g2"));
            let mut inner = x.edge(&seed, &q.leg_predicates[0], &g2, &x.anchor(4));
            inner.extend(x.edge(&g2, &q.leg_predicates[2], &d, &x.anchor(5)));
            children.push(PlanNode::NotExists(Box::new(PlanNode::Join(inner))));
        }
        QueryId::Q3 => {
            for (&leg, src) in &q.source_constraints {
                let src: TermPattern = cfg.source_iri(src).into();
                children.extend(x.provenance(
                    &x.anchor(leg),
                    &x.evidence_var(leg),
                    &cfg.source_pred,
                    src,
                ));
            }
        }
        QueryId::Q4 => {
            for (i, (s, o)) in legs.iter().enumerate() {
                children.push(x.pub_filter(i + 1, s, &q.leg_predicates[i], o, q.min_pubs));
            }
        }
    }
    let root = PlanNode::Distinct(Box::new(PlanNode::Project(
        vec![v("d")],
        Box::new(PlanNode::Join(children)),
    )));
    Ok(QueryPlan { root })
}

/// Render a plan as SPARQL 1.1 query text: absolute IRIs, no prefixes,
/// two-space indentation.
pub fn render_sparql(p: &QueryPlan) -> String {
    let mut out = String::new();
    render_select(&p.root, 0, &mut out);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn render_select(node: &PlanNode, level: usize, out: &mut String) {
    let (distinct, node) = match node {
        PlanNode::Distinct(inner) => (true, inner.as_ref()),
        other => (false, other),
    };
    let (vars, body) = match node {
        PlanNode::Project(vars, inner) => (Some(vars.as_slice()), inner.as_ref()),
        other => (None, other),
    };
    indent(out, level);
    out.push_str("SELECT ");
    if distinct {
        out.push_str("DISTINCT ");
    }
    match vars {
        Some(vars) => {
            let names: Vec<String> = vars.iter().map(Var::to_string).collect();
            out.push_str(&names.join(" "));
        }
        None => out.push('*'),
    }
    out.push('\n');
    indent(out, level);
    out.push_str("WHERE {\n");
    render_group_body(body, level + 1, out);
    indent(out, level);
    out.push_str("}\n");
}

fn render_group_body(node: &PlanNode, level: usize, out: &mut String) {
    match node {
        PlanNode::Join(children) => children
            .iter()
            .for_each(|c| render_group_body(c, level, out)),
        PlanNode::Pattern(p) => {
            indent(out, level);
            match &p.graph {
                Some(g) => {
                    let _ = writeln!(
                        out,
                        "GRAPH {g} {{ {} {} {} . }}",
                        p.subject, p.predicate, p.object
                    );
                }
                None => {
                    let _ = writeln!(out, "{} {} {} .", p.subject, p.predicate, p.object);
                }
            }
        }
        PlanNode::NotExists(inner) => {
            indent(out, level);
            out.push_str("FILTER NOT EXISTS {\n");
            render_group_body(inner, level + 1, out);
            indent(out, level);
            out.push_str("}\n");
        }
        PlanNode::GroupFilter(g) => {
            indent(out, level);
            out.push_str("{\n");
            let vars: Vec<String> = g.group_by.iter().map(Var::to_string).collect();
            indent(out, level + 1);
            let _ = writeln!(out, "SELECT {}", vars.join(" "));
            indent(out, level + 1);
            out.push_str("WHERE {\n");
            render_group_body(&g.input, level + 2, out);
            indent(out, level + 1);
            out.push_str("}\n");
            indent(out, level + 1);
            let _ = writeln!(out, "GROUP BY {}", vars.join(" "));
            indent(out, level + 1);
            let distinct = if g.distinct { "DISTINCT " } else { "" };
            let _ = writeln!(
                out,
                "HAVING(COUNT({distinct}{}) > {})",
                g.counted, g.threshold
            );
            indent(out, level);
            out.push_str("}\n");
        }
        PlanNode::Distinct(_) | PlanNode::Project(..) => {
            indent(out, level);
            out.push_str("{\n");
            render_select(node, level + 1, out);
            indent(out, level);
            out.push_str("}\n");
        }
    }
}
