use proptest::prelude::*;
use provmodels::{ModelId, QueryId};
use provmodels_bench::{read_csv, summarize, write_csv, BenchSample, Status};

fn status() -> impl Strategy<Value = Status> {
    prop_oneof![
        4 => Just(Status::Ok),
        1 => Just(Status::Timeout),
        1 => proptest::option::of(100u16..600).prop_map(Status::HttpError),
        1 => Just(Status::HookFailed),
        1 => Just(Status::InvalidResponse),
    ]
}

fn sample() -> impl Strategy<Value = BenchSample> {
    (
        prop_oneof![Just("virtuoso"), Just("blazegraph"), Just("a,b")],
        0..5usize,
        0..4usize,
        0..3u32,
        0..5usize,
        0.0..1e6f64,
        0..1000usize,
        status(),
    )
        .prop_map(|(store, m, q, seed, run, ms, rows, status)| BenchSample {
            store: store.to_owned(),
            model: ModelId::ALL[m],
            query: QueryId::ALL[q],
            seed: format!("CID{}", 4946 + seed),
            run,
            ms,
            rows: (status == Status::Ok).then_some(rows),
            status,
        })
}

proptest! {
    #[test]
    fn csv_round_trips(samples in proptest::collection::vec(sample(), 0..40)) {
        let bytes = write_csv(&samples, Vec::new()).unwrap();
        prop_assert_eq!(read_csv(bytes.as_slice()).unwrap(), samples);
    }

    #[test]
    fn summary_ignores_order(samples in proptest::collection::vec(sample(), 0..40).prop_shuffle()) {
        let mut reversed = samples.clone();
        reversed.reverse();
        prop_assert_eq!(summarize(&samples), summarize(&reversed));
    }

    #[test]
    fn summary_counts_only_ok(samples in proptest::collection::vec(sample(), 0..40)) {
        let ok = samples.iter().filter(|s| s.status == Status::Ok).count();
        prop_assert_eq!(summarize(&samples).iter().map(|s| s.n).sum::<usize>(), ok);
    }
}
