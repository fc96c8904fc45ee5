mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use provmodels::{
    dataset_counts, emit, expected_counts, group_cardinal, oracle_answer, parse_tsv, serialize_tsv,
    Dataset, EmitOptions, EntityKind, EntityRef, EvidenceRecord, ModelId, QueryId, QuerySpec,
    Statement, VocabConfig, Vocabulary,
};

const CHEMICALS: &[&str] = &["5743", "4946", "2812"];
const GENES: &[&str] = &["1", "2", "3", "4"];
const DISEASES: &[&str] = &["C0000001", "C0000002", "C0000003"];
const SOURCES: &[&str] = &["ctd", "kegg", "disgenet", "biogrid"];
const SLUGS: &[&str] = &[
    "inhibits",
    "interacts_with",
    "associated_with",
    "treats",
    "causes",
];

fn entity(kind: EntityKind, pick: usize) -> EntityRef {
    let pool = match kind {
        EntityKind::Chemical => CHEMICALS,
        EntityKind::Gene => GENES,
        EntityKind::Disease => DISEASES,
    };
    EntityRef::new(kind, pool[pick % pool.len()]).unwrap()
}

fn row() -> impl Strategy<Value = (Statement, EvidenceRecord)> {
    (
        0..SLUGS.len(),
        any::<usize>(),
        any::<usize>(),
        0..SOURCES.len(),
        proptest::collection::btree_set(1u32..6, 0..3),
        proptest::option::of(Just("9606".to_owned())),
    )
        .prop_map(|(slug, s, o, src, pubs, taxon)| {
            let pred = Vocabulary::default().predicate(SLUGS[slug]).unwrap();
            let subject = entity(pred.domain, s);
            let object = entity(pred.range, o);
            let statement = Statement::new(subject, pred, object).unwrap();
            let evidence =
                EvidenceRecord::new(SOURCES[src], pubs.iter().map(u32::to_string), taxon).unwrap();
            (statement, evidence)
        })
}

fn rows() -> impl Strategy<Value = Vec<(Statement, EvidenceRecord)>> {
    proptest::collection::vec(row(), 0..40)
}

fn dataset() -> impl Strategy<Value = Dataset> {
    rows().prop_map(|r| group_cardinal(r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emitted_counts_follow_formulas(d in dataset(), include_head in any::<bool>()) {
        let c = dataset_counts(&d);
        let cfg = VocabConfig::default();
        let opts = EmitOptions { include_head };
        let mut sizes = Vec::new();
        for m in ModelId::ALL {
            let mut em = emit(&d, m, &cfg, opts);
            let n = em.by_ref().count();
            let want = expected_counts(&c, m, opts);
            prop_assert_eq!(n, want.triples);
            prop_assert_eq!(em.stats().graphs, want.graphs);
            sizes.push(n);
        }
        prop_assert_eq!(sizes[0] - sizes[2], c.r);
        prop_assert_eq!(sizes[1] - sizes[3], c.e);
    }

    #[test]
    fn model_iv_is_smallest_with_head(d in dataset()) {
        let cfg = VocabConfig::default();
        let sizes: Vec<usize> =
            ModelId::ALL.iter().map(|&m| emit(&d, m, &cfg, EmitOptions::default()).count()).collect();
        prop_assert_eq!(sizes.iter().min(), Some(&sizes[3]));
    }

    #[test]
    fn grouping_is_idempotent(r in rows()) {
        let once = group_cardinal(r).unwrap();
        let twice = group_cardinal(once.to_rows()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn grouping_ignores_row_order(r in rows().prop_shuffle(), seed in any::<u64>()) {
        let mut shuffled = r.clone();
        if !shuffled.is_empty() {
            let k = (seed as usize) % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
        }
        prop_assert_eq!(group_cardinal(r).unwrap(), group_cardinal(shuffled).unwrap());
    }

    #[test]
    fn tsv_round_trip(d in dataset()) {
        let text = serialize_tsv(&d, Vec::new()).unwrap();
        let (back, diags) = parse_tsv(text.as_slice()).unwrap();
        prop_assert!(diags.rejected.is_empty());
        prop_assert_eq!(back, d);
    }

    #[test]
    fn models_agree_with_oracle(d in dataset(), src1 in 0..SOURCES.len(), min_pubs in 1usize..3) {
        let cfg = VocabConfig::default();
        let stores: Vec<_> = ModelId::ALL.iter().map(|&m| (m, common::store_for(&d, m, &cfg))).collect();
        for seed in CHEMICALS {
            let seed = EntityRef::chemical(*seed).unwrap();
            for q in QueryId::ALL {
                let mut spec = QuerySpec::new(q, seed.clone()).with_min_pubs(min_pubs);
                if q == QueryId::Q3 {
                    spec = spec.with_sources([(1, SOURCES[src1].to_owned())]);
                }
                let want = common::oracle_iris(&d, &spec, &cfg);
                for (m, store) in &stores {
                    prop_assert_eq!(&common::store_answer(store, &spec, *m, &cfg), &want, "{:?} {}", q, m);
                }
            }
        }
    }

    #[test]
    fn restricted_queries_are_subsets(d in dataset()) {
        for seed in CHEMICALS {
            let seed = EntityRef::chemical(*seed).unwrap();
            let q1: BTreeSet<_> = oracle_answer(&d, &QuerySpec::new(QueryId::Q1, seed.clone()));
            let q2 = oracle_answer(&d, &QuerySpec::new(QueryId::Q2, seed.clone()));
            let q3 = oracle_answer(&d, &QuerySpec::new(QueryId::Q3, seed.clone()).with_sources([(1, "ctd".to_owned())]));
            let q4 = oracle_answer(&d, &QuerySpec::new(QueryId::Q4, seed.clone()).with_min_pubs(1));
            prop_assert!(q2.is_subset(&q1));
            prop_assert!(q3.is_subset(&q1));
            prop_assert!(q4.is_subset(&q1));
        }
    }
}
