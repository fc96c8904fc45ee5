use provmodels::{
    build_plan, query::SuiteOptions, render_sparql, seed_suite, ModelId, QueryId, VocabConfig,
};
use provmodels_bench::{
    mock::{MockEndpoint, MockReply},
    read_csv, run_suite, write_csv, EndpointConfig, Status,
};

fn is_q1(query: &str) -> bool {
    !query.contains("FILTER") && !query.contains("HAVING") && !query.contains("/source/")
}

#[test]
fn one_endpoint_full_suite() {
    let mock = MockEndpoint::start(|_| MockReply::bindings(2)).unwrap();
    let specs = seed_suite(&SuiteOptions::default()).unwrap();
    assert_eq!(specs.len(), 24);
    let endpoints = vec![EndpointConfig::new("mock", mock.url(), ModelId::IV)];
    let report = run_suite(&endpoints, &specs, &VocabConfig::default(), false).unwrap();
    assert_eq!(report.samples.len(), 120);
    assert!(report
        .samples
        .iter()
        .all(|s| s.status == Status::Ok && s.rows == Some(2)));
    assert!(report.inconsistencies.is_empty());

    // Requests arrive in suite order, each spec repeated back to back.
    let cfg = VocabConfig::default();
    let expected: Vec<String> = specs
        .iter()
        .flat_map(|s| {
            std::iter::repeat_n(render_sparql(&build_plan(s, ModelId::IV, &cfg).unwrap()), 5)
        })
        .collect();
    let got: Vec<String> = mock.requests().into_iter().map(|r| r.body).collect();
    assert_eq!(got, expected);

    let csv = write_csv(&report.samples, Vec::new()).unwrap();
    assert_eq!(String::from_utf8_lossy(&csv).lines().count(), 121);
    assert_eq!(read_csv(csv.as_slice()).unwrap(), report.samples);
}

#[test]
fn planted_row_count_disagreement_is_flagged() {
    let good = MockEndpoint::start(|_| MockReply::bindings(2)).unwrap();
    let planted = MockEndpoint::start(|r| {
        MockReply::bindings(if is_q1(&r.body) && r.body.contains("CID4946") {
            3
        } else {
            2
        })
    })
    .unwrap();
    let specs = seed_suite(&SuiteOptions::default()).unwrap();
    for parallel in [false, true] {
        let endpoints = vec![
            EndpointConfig {
                repetitions: 2,
                ..EndpointConfig::new("a", good.url(), ModelId::I)
            },
            EndpointConfig {
                repetitions: 2,
                ..EndpointConfig::new("b", planted.url(), ModelId::V)
            },
        ];
        let report = run_suite(&endpoints, &specs, &VocabConfig::default(), parallel).unwrap();
        assert_eq!(report.samples.len(), 2 * 24 * 2);
        assert_eq!(
            report.inconsistencies.len(),
            1,
            "{:?}",
            report.inconsistencies
        );
        let flagged = &report.inconsistencies[0];
        assert_eq!(
            (flagged.query, flagged.seed.as_str()),
            (QueryId::Q1, "CID4946")
        );
        assert_eq!(flagged.to_string(), "Q1 CID4946: a=2 b=3");
    }
}

#[test]
fn no_endpoints_gives_header_only_csv() {
    let specs = seed_suite(&SuiteOptions::default()).unwrap();
    let report = run_suite(&[], &specs, &VocabConfig::default(), false).unwrap();
    assert!(report.samples.is_empty());
    let csv = write_csv(&report.samples, Vec::new()).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        "store,model,query,seed,run,ms,rows,status\n"
    );
}

#[test]
fn invalid_endpoint_fails_before_requests() {
    let mock = MockEndpoint::start(|_| MockReply::bindings(1)).unwrap();
    let specs = seed_suite(&SuiteOptions::default()).unwrap();
    let endpoints = vec![
        EndpointConfig::new("ok", mock.url(), ModelId::I),
        EndpointConfig {
            repetitions: 0,
            ..EndpointConfig::new("bad", mock.url(), ModelId::II)
        },
    ];
    assert!(run_suite(&endpoints, &specs, &VocabConfig::default(), false).is_err());
    assert!(mock.requests().is_empty());
}
