//! Query answers computed by exhaustive enumeration over the canonical model.
//!
//! Nothing here touches RDF: the oracle is the reference the store's
//! evaluation of every model's emission is checked against.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{CardinalAssertion, Dataset, EntityRef};
use crate::query::{QueryId, QuerySpec};

/// Answer set of diseases for `q` over `d`. Unknown seeds yield the empty set.
pub fn oracle_answer(d: &Dataset, q: &QuerySpec) -> BTreeSet<EntityRef> {
    let leg_ok = |leg: usize, c: &CardinalAssertion| -> bool {
        if c.statement.predicate.slug != q.leg_predicates[leg - 1] {
            return false;
        }
        match q.query {
            QueryId::Q3 => q
                .source_constraints
                .get(&leg)
                .is_none_or(|src| c.has_source(src)),
            QueryId::Q4 => c.publications().len() > q.min_pubs,
            QueryId::Q1 | QueryId::Q2 => true,
        }
    };
    let edges = |leg: usize| -> Vec<(&EntityRef, &EntityRef)> {
        d.cardinals()
            .iter()
            .filter(|c| leg_ok(leg, c))
            .map(|c| (&c.statement.subject, &c.statement.object))
            .collect()
    };
    let (leg1, leg2, leg3) = (edges(1), edges(2), edges(3));

    let mut answer = BTreeSet::new();
    for &(a, b) in &leg1 {
        if *a != q.seed {
            continue;
        }
        for &(b2, c) in &leg2 {
            if b2 != b {
                continue;
            }
            for &(c2, disease) in &leg3 {
                if c2 == c {
                    answer.insert(disease.clone());
                }
            }
        }
    }

    if q.query == QueryId::Q2 {
        // Two-step paths use the unrestricted leg-1 and leg-3 relations.
        let mut by_gene: BTreeMap<&EntityRef, Vec<&EntityRef>> = BTreeMap::new();
        for c in d.cardinals() {
            if c.statement.predicate.slug == q.leg_predicates[2] {
                by_gene
                    .entry(&c.statement.subject)
                    .or_default()
                    .push(&c.statement.object);
            }
        }
        for c in d.cardinals() {
            let st = &c.statement;
            if st.predicate.slug == q.leg_predicates[0] && st.subject == q.seed {
                for disease in by_gene.get(&st.object).into_iter().flatten() {
                    answer.remove(*disease);
                }
            }
        }
    }
    answer
}
