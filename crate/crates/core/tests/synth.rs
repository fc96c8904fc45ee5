mod common;

use provmodels::{dataset_counts, ingest::SEED_CIDS, Bucket, EntityRef, SynthParams};

#[test]
fn histogram_tracks_multiplicity_weights() {
    let params = SynthParams {
        n_rows: 10_000,
        n_chemicals: 60,
        n_genes: 400,
        n_diseases: 200,
        ..SynthParams::default()
    };
    for rng_seed in [1, 2, 3] {
        let d = provmodels::synthesize(&SynthParams {
            rng_seed,
            ..params.clone()
        })
        .unwrap();
        let c = dataset_counts(&d);
        assert_eq!(c.e, 10_000);
        let total: f64 = params.multiplicity_weights.values().sum();
        for bucket in Bucket::ALL {
            let want = 100.0 * params.multiplicity_weights[&bucket] / total;
            let got = 100.0 * *c.histogram.get(&bucket).unwrap_or(&0) as f64 / c.r as f64;
            assert!(
                (got - want).abs() <= 3.0,
                "bucket {} got {got:.2}% want {want:.2}%",
                bucket.label()
            );
        }
    }
}

#[test]
fn seed_chemicals_are_subjects() {
    let d = common::synth(5, 2000);
    let chemicals = d.chemicals();
    for cid in SEED_CIDS {
        assert!(
            chemicals.contains(&EntityRef::chemical(cid).unwrap()),
            "CID{cid}"
        );
    }
}

#[test]
fn same_seed_same_dataset() {
    assert_eq!(common::synth(9, 1500), common::synth(9, 1500));
    assert_ne!(common::synth(9, 1500), common::synth(10, 1500));
}
