mod common;

use provmodels::{ingest::fixture_d1, ModelId, VocabConfig};

fn check(d: &provmodels::Dataset) -> usize {
    let cfg = VocabConfig::default();
    let stores: Vec<_> = ModelId::ALL
        .iter()
        .map(|&m| (m, common::store_for(d, m, &cfg)))
        .collect();
    let mut non_empty = 0;
    for spec in common::specs_for(d) {
        let want = common::oracle_iris(d, &spec, &cfg);
        non_empty += usize::from(!want.is_empty());
        for (m, store) in &stores {
            let got = common::store_answer(store, &spec, *m, &cfg);
            assert_eq!(got, want, "model {m} {:?} seed {}", spec.query, spec.seed);
        }
    }
    non_empty
}

#[test]
fn d1_all_models_match_oracle() {
    check(&fixture_d1());
}

#[test]
fn synthetic_all_models_match_oracle() {
    let mut non_empty = 0;
    for seed in 100..103 {
        non_empty += check(&common::synth(seed, 2000));
    }
    assert!(non_empty > 0, "every answer was empty");
}
