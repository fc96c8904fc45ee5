//! In-memory quad store evaluating [`QueryPlan`]s.
//!
//! Terms are dictionary-encoded to dense `u32` ids and quads are kept in four
//! sorted permutation indexes: SPOG, POSG, OSPG and GSPO. A pattern
//! binding none of subject, predicate or object falls back to a scan.
//!
//! Joins are evaluated with index nested loops in a greedy order (connected
//! patterns first, then most bound positions, then smallest index range).
//! Aggregating subplans are evaluated once into hash tables; `NOT EXISTS`
//! blocks are probed per partial solution as soon as their correlated
//! variables are bound, and stop at the first match.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use crate::query::{GroupFilter, PlanNode, QuadPattern, QueryPlan, TermPattern, Var};
use crate::rdf::{Iri, RdfQuad, RdfTerm};

pub type TermId = u32;

/// Id of the default graph in the graph position.
pub const DEFAULT_GRAPH: TermId = 0;

/// Bijection between terms and dense ids starting at 1.
#[derive(Debug, Default, Clone)]
pub struct TermDict {
    terms: Vec<RdfTerm>,
    ids: HashMap<RdfTerm, TermId>,
}

impl TermDict {
    pub fn encode(&mut self, t: &RdfTerm) -> TermId {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        self.terms.push(t.clone());
        let id = TermId::try_from(self.terms.len()).expect("fewer than 2^32 distinct terms");
        self.ids.insert(t.clone(), id);
        id
    }

    pub fn lookup(&self, t: &RdfTerm) -> Option<TermId> {
        self.ids.get(t).copied()
    }

    pub fn decode(&self, id: TermId) -> Option<&RdfTerm> {
        id.checked_sub(1).and_then(|i| self.terms.get(i as usize))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Component positions in a quad.
const S: usize = 0;
const P: usize = 1;
const O: usize = 2;
const G: usize = 3;

/// Key layouts of the permutation indexes, as positions of the SPOG quad.
const PERMUTATIONS: [[usize; 4]; 4] = [[S, P, O, G], [P, O, S, G], [O, S, P, G], [G, S, P, O]];

/// Sorted permutation indexes over encoded quads.
#[derive(Debug, Default, Clone)]
pub struct QuadIndex {
    /// `perms[i]` holds keys laid out as `PERMUTATIONS[i]`.
    perms: [Vec<[TermId; 4]>; 4],
}

impl QuadIndex {
    fn build(mut quads: Vec<[TermId; 4]>) -> Self {
        quads.sort_unstable();
        quads.dedup();
        let perms = PERMUTATIONS.map(|layout| {
            let mut keys: Vec<[TermId; 4]> =
                quads.iter().map(|q| layout.map(|pos| q[pos])).collect();
            keys.sort_unstable();
            keys
        });
        QuadIndex { perms }
    }

    pub fn len(&self) -> usize {
        self.perms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index whose key layout has the longest fully bound prefix.
    fn choose(pattern: &[Option<TermId>; 4]) -> (usize, usize) {
        PERMUTATIONS
            .iter()
            .enumerate()
            .map(|(i, layout)| {
                (
                    i,
                    layout
                        .iter()
                        .take_while(|&&pos| pattern[pos].is_some())
                        .count(),
                )
            })
            .max_by_key(|&(i, len)| (len, std::cmp::Reverse(i)))
            .expect("four permutations")
    }

    fn range(&self, pattern: &[Option<TermId>; 4]) -> (usize, &[[TermId; 4]]) {
        let (perm, len) = Self::choose(pattern);
        let layout = PERMUTATIONS[perm];
        let mut prefix = [0; 4];
        for (i, &pos) in layout[..len].iter().enumerate() {
            prefix[i] = pattern[pos].expect("bound prefix");
        }
        let prefix = &prefix[..len];
        let keys = &self.perms[perm];
        let lo = keys.partition_point(|k| k[..len] < *prefix);
        let hi = keys.partition_point(|k| k[..len] <= *prefix);
        (perm, &keys[lo..hi])
    }

    /// Number of quads whose bound-prefix matches; an upper bound on the
    /// number of matches of `pattern`.
    pub fn estimate(&self, pattern: &[Option<TermId>; 4]) -> usize {
        self.range(pattern).1.len()
    }

    /// Quads (in SPOG layout) matching every bound position of `pattern`.
    pub fn matching<'a>(
        &'a self,
        pattern: [Option<TermId>; 4],
    ) -> impl Iterator<Item = [TermId; 4]> + 'a {
        let (perm, keys) = self.range(&pattern);
        let layout = PERMUTATIONS[perm];
        keys.iter()
            .map(move |k| {
                let mut q = [0; 4];
                for (i, &pos) in layout.iter().enumerate() {
                    q[pos] = k[i];
                }
                q
            })
            .filter(move |q| (0..4).all(|pos| pattern[pos].is_none_or(|v| q[pos] == v)))
    }

    /// Every permutation holds the same quad set.
    pub fn is_consistent(&self) -> bool {
        let canonical: BTreeSet<[TermId; 4]> = self.perms[0].iter().copied().collect();
        PERMUTATIONS.iter().enumerate().all(|(i, layout)| {
            let set: BTreeSet<[TermId; 4]> = self.perms[i]
                .iter()
                .map(|k| {
                    let mut q = [0; 4];
                    for (j, &pos) in layout.iter().enumerate() {
                        q[pos] = k[j];
                    }
                    q
                })
                .collect();
            set == canonical
        })
    }
}

/// An immutable, loaded quad store.
#[derive(Debug, Default, Clone)]
pub struct Store {
    dict: TermDict,
    index: QuadIndex,
}

/// Solutions of a query, one row per solution, columns in `vars` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solutions {
    pub vars: Vec<Var>,
    pub rows: Vec<Vec<Option<RdfTerm>>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct bound values of one variable.
    pub fn column(&self, name: &str) -> BTreeSet<RdfTerm> {
        let Some(i) = self.vars.iter().position(|v| v.name() == name) else {
            return BTreeSet::new();
        };
        self.rows.iter().filter_map(|r| r[i].clone()).collect()
    }

    pub fn column_iris(&self, name: &str) -> BTreeSet<Iri> {
        self.column(name)
            .into_iter()
            .filter_map(|t| t.as_iri().cloned())
            .collect()
    }
}

impl Store {
    /// Load quads; duplicates collapse.
    pub fn load<I: IntoIterator<Item = RdfQuad>>(quads: I) -> Store {
        let mut dict = TermDict::default();
        let encoded: Vec<[TermId; 4]> = quads
            .into_iter()
            .map(|q| {
                [
                    dict.encode(&RdfTerm::Iri(q.subject)),
                    dict.encode(&RdfTerm::Iri(q.predicate)),
                    dict.encode(&q.object),
                    q.graph
                        .map_or(DEFAULT_GRAPH, |g| dict.encode(&RdfTerm::Iri(g))),
                ]
            })
            .collect();
        Store {
            dict,
            index: QuadIndex::build(encoded),
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn dict(&self) -> &TermDict {
        &self.dict
    }

    pub fn index(&self) -> &QuadIndex {
        &self.index
    }

    /// Order patterns for evaluation with nothing bound up front.
    pub fn order_patterns(&self, patterns: &[QuadPattern]) -> Vec<QuadPattern> {
        let mut slots = SlotMap::default();
        let compiled: Vec<CPattern> = patterns
            .iter()
            .map(|p| self.compile_pattern(p, &mut slots))
            .collect();
        greedy_order(&compiled, &HashSet::new(), &self.index)
            .into_iter()
            .map(|i| patterns[i].clone())
            .collect()
    }

    pub fn evaluate(&self, plan: &QueryPlan) -> Solutions {
        let mut slots = SlotMap::default();
        let (vars, distinct, body) = split_root(&plan.root);
        let join = self.compile_join(body, &mut slots);
        let out_slots: Vec<Option<usize>> = vars.iter().map(|v| slots.get(v)).collect();
        let bound_outputs: Vec<usize> = out_slots.iter().flatten().copied().collect();
        let prepared = prepare(
            &join,
            &HashSet::new(),
            distinct.then_some(&bound_outputs[..]),
            &self.index,
        );
        let mut binding = vec![None; slots.len()];
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        let _ = run(&prepared, 0, &mut binding, &self.index, &mut |b| {
            let row: Vec<Option<TermId>> = out_slots.iter().map(|s| s.and_then(|s| b[s])).collect();
            if !distinct || seen.insert(row.clone()) {
                rows.push(row);
            }
            ControlFlow::Continue(())
        });
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|id| id.and_then(|id| self.dict.decode(id).cloned()))
                    .collect()
            })
            .collect();
        Solutions { vars, rows }
    }

    fn compile_slot(&self, t: &TermPattern, slots: &mut SlotMap) -> Slot {
        match t {
            TermPattern::Var(v) => Slot::Var(slots.slot(v)),
            TermPattern::Const(c) => self.dict.lookup(c).map_or(Slot::Missing, Slot::Const),
        }
    }

    fn compile_pattern(&self, p: &QuadPattern, slots: &mut SlotMap) -> CPattern {
        let graph = match &p.graph {
            None => Slot::Const(DEFAULT_GRAPH),
            Some(g) => match self.compile_slot(g, slots) {
                Slot::Var(v) => Slot::NamedGraphVar(v),
                other => other,
            },
        };
        CPattern {
            pos: [
                self.compile_slot(&p.subject, slots),
                self.compile_slot(&p.predicate, slots),
                self.compile_slot(&p.object, slots),
                graph,
            ],
        }
    }

    fn compile_join(&self, node: &PlanNode, slots: &mut SlotMap) -> CJoin {
        let mut join = CJoin::default();
        self.collect_join(node, slots, &mut join);
        join
    }

    fn collect_join(&self, node: &PlanNode, slots: &mut SlotMap, join: &mut CJoin) {
        match node {
            PlanNode::Pattern(p) => join.patterns.push(self.compile_pattern(p, slots)),
            PlanNode::Join(children) => children
                .iter()
                .for_each(|c| self.collect_join(c, slots, join)),
            PlanNode::NotExists(inner) => join.not_exists.push(self.compile_join(inner, slots)),
            PlanNode::GroupFilter(g) => join.tables.push(self.group_table(g, slots)),
            PlanNode::Distinct(_) | PlanNode::Project(..) => {
                join.tables.push(self.subselect_table(node, slots))
            }
        }
    }

    /// Evaluate an aggregating subplan into a table over its group variables.
    fn group_table(&self, g: &GroupFilter, slots: &mut SlotMap) -> Table {
        let inner = self.compile_join(&g.input, slots);
        let key_slots: Vec<usize> = g.group_by.iter().map(|v| slots.slot(v)).collect();
        let counted = slots.slot(&g.counted);
        let witnesses: Vec<usize> = key_slots.iter().copied().chain([counted]).collect();
        let prepared = prepare(
            &inner,
            &HashSet::new(),
            g.distinct.then_some(&witnesses[..]),
            &self.index,
        );
        let mut binding = vec![None; slots.len()];
        let mut groups: HashMap<Vec<Option<TermId>>, (usize, HashSet<TermId>)> = HashMap::new();
        let _ = run(&prepared, 0, &mut binding, &self.index, &mut |b| {
            let key: Vec<Option<TermId>> = key_slots.iter().map(|&s| b[s]).collect();
            let entry = groups.entry(key).or_default();
            if let Some(value) = b[counted] {
                entry.0 += 1;
                entry.1.insert(value);
            }
            ControlFlow::Continue(())
        });
        let mut rows: Vec<Vec<Option<TermId>>> = groups
            .into_iter()
            .filter(|(_, (n, set))| (if g.distinct { set.len() } else { *n }) > g.threshold)
            .map(|(k, _)| k)
            .collect();
        rows.sort_unstable();
        Table::new(key_slots, rows)
    }

    fn subselect_table(&self, node: &PlanNode, slots: &mut SlotMap) -> Table {
        let (vars, distinct, body) = split_root(node);
        let inner = self.compile_join(body, slots);
        let out: Vec<usize> = vars.iter().map(|v| slots.slot(v)).collect();
        let prepared = prepare(
            &inner,
            &HashSet::new(),
            distinct.then_some(&out[..]),
            &self.index,
        );
        let mut binding = vec![None; slots.len()];
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        let _ = run(&prepared, 0, &mut binding, &self.index, &mut |b| {
            let row: Vec<Option<TermId>> = out.iter().map(|&s| b[s]).collect();
            if !distinct || seen.insert(row.clone()) {
                rows.push(row);
            }
            ControlFlow::Continue(())
        });
        Table::new(out, rows)
    }
}

fn split_root(node: &PlanNode) -> (Vec<Var>, bool, &PlanNode) {
    let (distinct, node) = match node {
        PlanNode::Distinct(inner) => (true, inner.as_ref()),
        other => (false, other),
    };
    match node {
        PlanNode::Project(vars, inner) => (vars.clone(), distinct, inner.as_ref()),
        other => (other.output_vars().into_iter().collect(), distinct, other),
    }
}

#[derive(Default)]
struct SlotMap {
    slots: HashMap<Var, usize>,
}

impl SlotMap {
    fn slot(&mut self, v: &Var) -> usize {
        let n = self.slots.len();
        *self.slots.entry(v.clone()).or_insert(n)
    }

    fn get(&self, v: &Var) -> Option<usize> {
        self.slots.get(v).copied()
    }

    fn len(&self) -> usize {
        self.slots.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Const(TermId),
    Var(usize),
    /// Graph variable: ranges over named graphs only.
    NamedGraphVar(usize),
    /// Constant absent from the dictionary; matches nothing.
    Missing,
}

impl Slot {
    fn var(self) -> Option<usize> {
        match self {
            Slot::Var(v) | Slot::NamedGraphVar(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct CPattern {
    pos: [Slot; 4],
}

impl CPattern {
    fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.pos.iter().filter_map(|s| s.var())
    }

    fn bound_count(&self, bound: &HashSet<usize>) -> usize {
        self.pos[..3]
            .iter()
            .filter(|s| match s {
                Slot::Const(_) | Slot::Missing => true,
                Slot::Var(v) | Slot::NamedGraphVar(v) => bound.contains(v),
            })
            .count()
    }

    /// Lookup key with constants only, or `None` if a constant is missing.
    fn constant_key(&self) -> Option<[Option<TermId>; 4]> {
        let mut key = [None; 4];
        for (i, s) in self.pos.iter().enumerate() {
            match s {
                Slot::Const(c) => key[i] = Some(*c),
                Slot::Missing => return None,
                _ => {}
            }
        }
        Some(key)
    }
}

#[derive(Debug, Clone)]
struct Table {
    slots: Vec<usize>,
    rows: Vec<Vec<Option<TermId>>>,
    set: HashSet<Vec<Option<TermId>>>,
}

impl Table {
    fn new(slots: Vec<usize>, rows: Vec<Vec<Option<TermId>>>) -> Self {
        let set = rows.iter().cloned().collect();
        Table { slots, rows, set }
    }
}

#[derive(Debug, Default, Clone)]
struct CJoin {
    patterns: Vec<CPattern>,
    tables: Vec<Table>,
    not_exists: Vec<CJoin>,
}

impl CJoin {
    fn vars(&self) -> HashSet<usize> {
        let mut out: HashSet<usize> = self.patterns.iter().flat_map(|p| p.vars()).collect();
        for t in &self.tables {
            out.extend(t.slots.iter().copied());
        }
        for n in &self.not_exists {
            out.extend(n.vars());
        }
        out
    }
}

/// Greedy join order. Returns indexes into `patterns`.
fn greedy_order(
    patterns: &[CPattern],
    initially_bound: &HashSet<usize>,
    index: &QuadIndex,
) -> Vec<usize> {
    let estimates: Vec<usize> = patterns
        .iter()
        .map(|p| p.constant_key().map_or(0, |k| index.estimate(&k)))
        .collect();
    let mut bound = initially_bound.clone();
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let any_connected = remaining
            .iter()
            .any(|&i| patterns[i].vars().any(|v| bound.contains(&v)));
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .filter(|(_, &i)| !any_connected || patterns[i].vars().any(|v| bound.contains(&v)))
            .min_by_key(|(_, &i)| {
                (
                    std::cmp::Reverse(patterns[i].bound_count(&bound)),
                    estimates[i],
                    i,
                )
            })
            .expect("non-empty");
        let i = remaining.remove(pick);
        bound.extend(patterns[i].vars());
        order.push(i);
    }
    order
}

enum Check<'a> {
    Probe(&'a Table),
    NotExists(NotExistsProbe<'a>),
}

/// A correlated `NOT EXISTS`, memoized on the values of its correlated variables.
struct NotExistsProbe<'a> {
    inner: Prepared<'a>,
    correlated: Vec<usize>,
    memo: RefCell<HashMap<Vec<Option<TermId>>, bool>>,
}

impl<'a> NotExistsProbe<'a> {
    fn new(
        join: &'a CJoin,
        correlated: &HashSet<usize>,
        bound: &HashSet<usize>,
        index: &QuadIndex,
    ) -> Self {
        let mut correlated: Vec<usize> = correlated.iter().copied().collect();
        correlated.sort_unstable();
        NotExistsProbe {
            inner: prepare(join, bound, None, index),
            correlated,
            memo: RefCell::default(),
        }
    }

    fn passes(&self, b: &mut Binding, index: &QuadIndex) -> bool {
        let key: Vec<Option<TermId>> = self.correlated.iter().map(|&s| b[s]).collect();
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return hit;
        }
        let empty = run(&self.inner, 0, b, index, &mut |_| ControlFlow::Break(())).is_continue();
        self.memo.borrow_mut().insert(key, empty);
        empty
    }
}

/// A join with its evaluation order fixed for a given set of pre-bound variables.
struct Prepared<'a> {
    order: Vec<&'a CPattern>,
    /// `checks[k]` run once the first `k` patterns are bound.
    checks: Vec<Vec<Check<'a>>>,
    /// Tables whose variables are never all bound by patterns; joined at the end.
    extend: Vec<&'a Table>,
    /// Checks that need the extension tables' variables.
    final_checks: Vec<Check<'a>>,
    /// Under set semantics, the step after which every output variable is
    /// bound; the remaining patterns then only need one witness.
    exists_at: Option<usize>,
}

fn prepare<'a>(
    join: &'a CJoin,
    initially_bound: &HashSet<usize>,
    distinct_outputs: Option<&[usize]>,
    index: &QuadIndex,
) -> Prepared<'a> {
    let order_idx = greedy_order(&join.patterns, initially_bound, index);
    let order: Vec<&CPattern> = order_idx.iter().map(|&i| &join.patterns[i]).collect();
    let mut bound_after: Vec<HashSet<usize>> = Vec::with_capacity(order.len() + 1);
    let mut bound = initially_bound.clone();
    bound_after.push(bound.clone());
    for p in &order {
        bound.extend(p.vars());
        bound_after.push(bound.clone());
    }
    let mut checks: Vec<Vec<Check>> = (0..=order.len()).map(|_| Vec::new()).collect();
    let mut extend = Vec::new();
    for t in &join.tables {
        match bound_after
            .iter()
            .position(|b| t.slots.iter().all(|s| b.contains(s)))
        {
            Some(k) => checks[k].push(Check::Probe(t)),
            None => extend.push(t),
        }
    }
    let mut available = bound.clone();
    for t in &extend {
        available.extend(t.slots.iter().copied());
    }
    let mut final_checks = Vec::new();
    for ne in &join.not_exists {
        let correlated: HashSet<usize> = ne.vars().intersection(&available).copied().collect();
        match bound_after.iter().position(|b| correlated.is_subset(b)) {
            Some(k) => checks[k].push(Check::NotExists(NotExistsProbe::new(
                ne,
                &correlated,
                &bound_after[k],
                index,
            ))),
            None => final_checks.push(Check::NotExists(NotExistsProbe::new(
                ne,
                &correlated,
                &available,
                index,
            ))),
        }
    }
    let exists_at = distinct_outputs.and_then(|out| {
        bound_after
            .iter()
            .position(|b| out.iter().all(|s| b.contains(s)))
            .filter(|&k| k < order.len())
    });
    Prepared {
        order,
        checks,
        extend,
        final_checks,
        exists_at,
    }
}

type Binding = Vec<Option<TermId>>;

fn check_passes(check: &Check<'_>, b: &mut Binding, index: &QuadIndex) -> bool {
    match check {
        Check::Probe(t) => {
            let key: Vec<Option<TermId>> = t.slots.iter().map(|&s| b[s]).collect();
            t.set.contains(&key)
        }
        Check::NotExists(probe) => probe.passes(b, index),
    }
}

fn run(
    prep: &Prepared<'_>,
    k: usize,
    b: &mut Binding,
    index: &QuadIndex,
    emit: &mut dyn FnMut(&Binding) -> ControlFlow<()>,
) -> ControlFlow<()> {
    for check in &prep.checks[k] {
        if !check_passes(check, b, index) {
            return ControlFlow::Continue(());
        }
    }
    if k == prep.order.len() {
        return extend_tables(prep, 0, b, index, emit);
    }
    if prep.exists_at == Some(k) {
        if step(prep, k, b, index, &mut |_| ControlFlow::Break(())).is_break() {
            return emit(b);
        }
        return ControlFlow::Continue(());
    }
    step(prep, k, b, index, emit)
}

/// Extend the binding through pattern `k`.
fn step(
    prep: &Prepared<'_>,
    k: usize,
    b: &mut Binding,
    index: &QuadIndex,
    emit: &mut dyn FnMut(&Binding) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let pattern = prep.order[k];
    let mut key = [None; 4];
    for (i, s) in pattern.pos.iter().enumerate() {
        key[i] = match *s {
            Slot::Const(c) => Some(c),
            Slot::Missing => return ControlFlow::Continue(()),
            Slot::Var(v) | Slot::NamedGraphVar(v) => b[v],
        };
    }
    let mut newly = Vec::with_capacity(4);
    for quad in index.matching(key) {
        newly.clear();
        let mut ok = true;
        for (i, s) in pattern.pos.iter().enumerate() {
            let Some(v) = s.var() else { continue };
            if matches!(s, Slot::NamedGraphVar(_)) && quad[i] == DEFAULT_GRAPH {
                ok = false;
                break;
            }
            match b[v] {
                Some(existing) if existing != quad[i] => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    b[v] = Some(quad[i]);
                    newly.push(v);
                }
            }
        }
        let flow = if ok {
            run(prep, k + 1, b, index, emit)
        } else {
            ControlFlow::Continue(())
        };
        for &v in &newly {
            b[v] = None;
        }
        flow?;
    }
    ControlFlow::Continue(())
}

fn extend_tables(
    prep: &Prepared<'_>,
    t: usize,
    b: &mut Binding,
    index: &QuadIndex,
    emit: &mut dyn FnMut(&Binding) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if t == prep.extend.len() {
        for check in &prep.final_checks {
            if !check_passes(check, b, index) {
                return ControlFlow::Continue(());
            }
        }
        return emit(b);
    }
    let table = prep.extend[t];
    let mut newly = Vec::new();
    for row in &table.rows {
        newly.clear();
        let mut ok = true;
        for (&slot, &value) in table.slots.iter().zip(row) {
            match (b[slot], value) {
                (Some(x), Some(y)) if x != y => {
                    ok = false;
                    break;
                }
                (None, Some(y)) => {
                    b[slot] = Some(y);
                    newly.push(slot);
                }
                _ => {}
            }
        }
        let flow = if ok {
            extend_tables(prep, t + 1, b, index, emit)
        } else {
            ControlFlow::Continue(())
        };
        for &s in &newly {
            b[s] = None;
        }
        flow?;
    }
    ControlFlow::Continue(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://x/{s}")).unwrap()
    }

    fn tp(s: &str) -> TermPattern {
        match s.strip_prefix('?') {
            Some(v) => TermPattern::Var(Var::new(v)),
            None => iri(s).into(),
        }
    }

    fn pat(s: &str, p: &str, o: &str) -> QuadPattern {
        QuadPattern::new(tp(s), tp(p), tp(o))
    }

    fn select(vars: &[&str], children: Vec<PlanNode>) -> QueryPlan {
        QueryPlan {
            root: PlanNode::Distinct(Box::new(PlanNode::Project(
                vars.iter().map(|v| Var::new(*v)).collect(),
                Box::new(PlanNode::Join(children)),
            ))),
        }
    }

    fn sample() -> Store {
        Store::load(vec![
            RdfQuad::triple(iri("a"), iri("knows"), iri("b")),
            RdfQuad::triple(iri("b"), iri("knows"), iri("c")),
            RdfQuad::triple(iri("a"), iri("knows"), iri("c")),
            RdfQuad::triple(iri("c"), iri("name"), RdfTerm::PlainLiteral("C".into())),
            RdfQuad::in_graph(iri("a"), iri("likes"), iri("c"), iri("g1")),
        ])
    }

    #[test]
    fn dictionary_bijection() {
        let mut d = TermDict::default();
        let t = RdfTerm::Iri(iri("a"));
        let id = d.encode(&t);
        assert_eq!(d.encode(&t), id);
        assert_eq!(d.decode(id), Some(&t));
        assert_eq!(d.lookup(&t), Some(id));
        assert_eq!(d.decode(0), None);
    }

    #[test]
    fn load_collapses_duplicates() {
        let q = RdfQuad::triple(iri("a"), iri("p"), iri("b"));
        assert_eq!(Store::load(vec![q.clone(), q]).len(), 1);
        assert_eq!(Store::load(Vec::new()).len(), 0);
        assert!(sample().index().is_consistent());
    }

    #[test]
    fn prefix_lookups_on_every_permutation() {
        let st = sample();
        let id = |s: &str| st.dict().lookup(&RdfTerm::Iri(iri(s)));
        let knows = id("knows");
        assert_eq!(st.index().matching([id("a"), None, None, None]).count(), 3);
        assert_eq!(
            st.index()
                .matching([None, knows, None, Some(DEFAULT_GRAPH)])
                .count(),
            3
        );
        assert_eq!(st.index().matching([None, None, id("c"), None]).count(), 3);
        assert_eq!(st.index().matching([None, None, None, id("g1")]).count(), 1);
        assert_eq!(
            st.index().matching([id("a"), None, id("c"), None]).count(),
            2
        );
        assert_eq!(st.index().matching([None, None, None, None]).count(), 5);
    }

    #[test]
    fn two_hop_join() {
        let plan = select(
            &["z"],
            vec![
                PlanNode::Pattern(pat("a", "knows", "?y")),
                PlanNode::Pattern(pat("?y", "knows", "?z")),
            ],
        );
        let sol = sample().evaluate(&plan);
        assert_eq!(sol.column_iris("z"), [iri("c")].into_iter().collect());
    }

    #[test]
    fn default_graph_and_named_graphs_are_separate() {
        let st = sample();
        let default = select(&["o"], vec![PlanNode::Pattern(pat("a", "likes", "?o"))]);
        assert!(st.evaluate(&default).is_empty());
        let named = select(
            &["o", "g"],
            vec![PlanNode::Pattern(
                pat("a", "likes", "?o").in_graph(tp("?g")),
            )],
        );
        let sol = st.evaluate(&named);
        assert_eq!(sol.column_iris("g"), [iri("g1")].into_iter().collect());
        let graph_var_on_default = select(
            &["o"],
            vec![PlanNode::Pattern(
                pat("a", "knows", "?o").in_graph(tp("?g")),
            )],
        );
        assert!(st.evaluate(&graph_var_on_default).is_empty());
    }

    #[test]
    fn not_exists_is_correlated() {
        // People `a` knows who have no name.
        let plan = select(
            &["y"],
            vec![
                PlanNode::Pattern(pat("a", "knows", "?y")),
                PlanNode::NotExists(Box::new(PlanNode::Pattern(pat("?y", "name", "?n")))),
            ],
        );
        assert_eq!(
            sample().evaluate(&plan).column_iris("y"),
            [iri("b")].into_iter().collect()
        );
    }

    #[test]
    fn group_filter_counts_distinct() {
        // Subjects that know more than one thing.
        let gf = PlanNode::GroupFilter(GroupFilter {
            group_by: vec![Var::new("s")],
            counted: Var::new("o"),
            distinct: true,
            threshold: 1,
            input: Box::new(PlanNode::Pattern(pat("?s", "knows", "?o"))),
        });
        let plan = select(&["s"], vec![gf]);
        assert_eq!(
            sample().evaluate(&plan).column_iris("s"),
            [iri("a")].into_iter().collect()
        );
    }

    #[test]
    fn unknown_constant_matches_nothing() {
        let plan = select(
            &["o"],
            vec![PlanNode::Pattern(pat("nobody", "knows", "?o"))],
        );
        assert!(sample().evaluate(&plan).is_empty());
    }

    #[test]
    fn repeated_variable_in_pattern() {
        let st = Store::load(vec![
            RdfQuad::triple(iri("a"), iri("p"), iri("a")),
            RdfQuad::triple(iri("a"), iri("p"), iri("b")),
        ]);
        let plan = select(&["x"], vec![PlanNode::Pattern(pat("?x", "p", "?x"))]);
        assert_eq!(
            st.evaluate(&plan).column_iris("x"),
            [iri("a")].into_iter().collect()
        );
    }

    #[test]
    fn fully_bound_pattern_goes_first() {
        let st = sample();
        let pats = vec![
            pat("?x", "knows", "?y"),
            pat("?y", "name", "?n"),
            pat("a", "knows", "c"),
        ];
        let ordered = st.order_patterns(&pats);
        assert_eq!(ordered[0], pats[2]);
    }

    #[test]
    fn connected_patterns_preferred() {
        let st = sample();
        // `?q name ?n` is cheaper than `?y knows ?z` but not connected to `a knows ?y`.
        let pats = vec![
            pat("a", "knows", "?y"),
            pat("?q", "name", "?n"),
            pat("?y", "knows", "?z"),
        ];
        let ordered = st.order_patterns(&pats);
        assert_eq!(
            ordered,
            vec![pats[0].clone(), pats[2].clone(), pats[1].clone()]
        );
    }
}
