#![allow(dead_code)]

use std::collections::BTreeSet;

use provmodels::{
    build_plan, emit, oracle_answer, synthesize, Dataset, EmitOptions, Iri, ModelId, QueryId,
    QuerySpec, Store, SynthParams, VocabConfig,
};

pub fn synth(rng_seed: u64, n_rows: usize) -> Dataset {
    synthesize(&SynthParams {
        n_rows,
        rng_seed,
        ..SynthParams::default()
    })
    .expect("feasible parameters")
}

pub fn store_for(d: &Dataset, m: ModelId, cfg: &VocabConfig) -> Store {
    Store::load(emit(d, m, cfg, EmitOptions::default()))
}

pub fn store_answer(
    store: &Store,
    spec: &QuerySpec,
    m: ModelId,
    cfg: &VocabConfig,
) -> BTreeSet<Iri> {
    let plan = build_plan(spec, m, cfg).expect("valid spec");
    store.evaluate(&plan).column_iris("d")
}

pub fn oracle_iris(d: &Dataset, spec: &QuerySpec, cfg: &VocabConfig) -> BTreeSet<Iri> {
    oracle_answer(d, spec)
        .iter()
        .map(|e| cfg.entity_iri(e))
        .collect()
}

/// Every query over every subject chemical of `d`, with Q3 constrained on legs 1 and 3.
pub fn specs_for(d: &Dataset) -> Vec<QuerySpec> {
    let mut out = Vec::new();
    for seed in d.chemicals() {
        for q in QueryId::ALL {
            let mut spec = QuerySpec::new(q, seed.clone()).with_min_pubs(1);
            if q == QueryId::Q3 {
                spec = spec.with_sources([(1, "ctd".to_owned()), (3, "disgenet".to_owned())]);
            }
            out.push(spec);
        }
    }
    out
}
