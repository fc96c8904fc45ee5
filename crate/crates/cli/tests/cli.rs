use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use provmodels::ingest::FIXTURE_D1;
use provmodels_bench::mock::{MockEndpoint, MockReply};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_provmodels"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn d1(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("d1.tsv");
    fs::write(&p, FIXTURE_D1).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stats_reports_d1_counts() {
    let dir = TempDir::new().unwrap();
    let out = run(&["stats", "-i", s(&d1(&dir))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("R=4 E=5 K=7 T=3"), "{text}");
    assert!(text.contains("model IV: 25 triples"), "{text}");
    assert!(text.contains("model V: 32 triples in 13 graphs"), "{text}");

    let json: serde_json::Value =
        serde_json::from_slice(&run(&["stats", "-i", s(&d1(&dir)), "--json"]).stdout).unwrap();
    assert_eq!(json["models"]["I"]["triples"], 32);
    assert_eq!(json["histogram"]["2"], 1);
    assert_eq!(json["max_pair"]["evidence"], 2);
}

#[test]
fn run_local_q2_model_v_is_empty() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "run-local",
        "-i",
        s(&d1(&dir)),
        "--model",
        "V",
        "--query",
        "Q2",
        "--seed",
        "5743",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), "?d\n");
}

#[test]
fn run_local_agrees_across_models() {
    let dir = TempDir::new().unwrap();
    let tsv = d1(&dir);
    for (q, extra) in [
        ("Q1", vec![]),
        ("Q2", vec![]),
        ("Q3", vec!["--source", "1=ctd"]),
        ("Q4", vec!["--min-pubs", "1"]),
    ] {
        let outputs: Vec<String> = ["I", "II", "III", "IV", "V"]
            .iter()
            .map(|m| {
                let mut args = vec![
                    "run-local",
                    "-i",
                    s(&tsv),
                    "--model",
                    m,
                    "--query",
                    q,
                    "--seed",
                    "CID5743",
                ];
                args.extend(&extra);
                let out = run(&args);
                assert_eq!(out.status.code(), Some(0), "{m} {q}: {}", stderr(&out));
                stdout(&out)
            })
            .collect();
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{q}: {outputs:?}");
    }
}

#[test]
fn emit_format_rules() {
    let dir = TempDir::new().unwrap();
    let tsv = d1(&dir);
    let nq = dir.path().join("x.nq");
    assert_eq!(
        run(&[
            "emit",
            "--model",
            "I",
            "--format",
            "nq",
            "-i",
            s(&tsv),
            "-o",
            s(&nq)
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["emit", "--model", "V", "--format", "nt", "-i", s(&tsv)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "emit",
            "--model",
            "II",
            "--format",
            "nt",
            "-i",
            s(&tsv),
            "--no-head"
        ])
        .status
        .code(),
        Some(2)
    );

    let nt = dir.path().join("iv.nt");
    assert_eq!(
        run(&[
            "emit",
            "--model",
            "IV",
            "--format",
            "nt",
            "-i",
            s(&tsv),
            "-o",
            s(&nt)
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(fs::read_to_string(&nt).unwrap().lines().count(), 25);
    let out = run(&["emit", "--model", "V", "--format", "nq", "-i", s(&tsv)]);
    assert_eq!(stdout(&out).lines().count(), 32);
    let out = run(&[
        "emit",
        "--model",
        "V",
        "--format",
        "nq",
        "-i",
        s(&tsv),
        "--no-head",
    ]);
    assert_eq!(stdout(&out).lines().count(), 19);
    let first = run(&["emit", "--model", "V", "--format", "trig", "-i", s(&tsv)]).stdout;
    let second = run(&["emit", "--model", "V", "--format", "trig", "-i", s(&tsv)]).stdout;
    assert_eq!(first, second);
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["stats", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
    assert_eq!(
        run(&["query", "--model", "VI", "--query", "Q1", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["query", "--model", "I", "--query", "Q3", "--seed", "4946"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["query", "--model", "I", "--query", "Q1", "--seed", "C0011849"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_input_exits_3() {
    assert_eq!(
        run(&["stats", "-i", "/nonexistent/d.tsv"]).status.code(),
        Some(3)
    );
}

#[test]
fn query_texts() {
    let out = run(&[
        "query", "--model", "IV", "--query", "Q2", "--seed", "CID4946",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("FILTER NOT EXISTS").count(), 1);
    let out = run(&[
        "query",
        "--model",
        "V",
        "--query",
        "Q3",
        "--seed",
        "4946",
        "--source",
        "1=ctd",
        "--source",
        "3=disgenet",
    ]);
    assert_eq!(stdout(&out).matches("GRAPH ?gp").count(), 2);
}

#[test]
fn validate_lists_rejected_rows() {
    let dir = TempDir::new().unwrap();
    let tsv = dir.path().join("bad.tsv");
    let text = format!("{FIXTURE_D1}\ngene\t1\tinhibits\tgene\t2\tctd\t\t\n");
    fs::write(&tsv, text.replace("\n\n", "\n")).unwrap();
    let out = run(&["ingest", "validate", s(&tsv)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stdout(&out).contains("line 7: domain mismatch"),
        "{}",
        stdout(&out)
    );
    assert_eq!(
        run(&["ingest", "validate", s(&d1(&dir))]).status.code(),
        Some(0)
    );
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let params = dir.path().join("p.toml");
    fs::write(
        &params,
        "n_rows = 300\nrng_seed = 4\npubs_per_row = [1, 2]\n[multiplicity_weights]\n\"1\" = 0.5\n\">3\" = 0.5\n",
    )
    .unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    assert_eq!(
        run(&["synth", s(&params), "-o", s(&a)]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["synth", s(&params), "-o", s(&b)]).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 301);
    fs::write(&params, "n_rows = 0\n").unwrap();
    assert_eq!(run(&["synth", s(&params)]).status.code(), Some(2));
}

fn bench_config(dir: &TempDir, endpoints: &[(&str, String, &str)]) -> PathBuf {
    let mut text = String::from("[suite]\nseeds = [\"4946\", \"2812\"]\n");
    for (name, url, model) in endpoints {
        text.push_str(&format!(
            "\n[[endpoints]]\nname = \"{name}\"\nurl = \"{url}\"\nmodel = \"{model}\"\nrepetitions = 2\ntimeout_secs = 5\n"
        ));
    }
    let p = dir.path().join("bench.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn bench_and_report() {
    let mock = MockEndpoint::start(|_| MockReply::bindings(3)).unwrap();
    let dir = TempDir::new().unwrap();
    let cfg = bench_config(&dir, &[("m", mock.url(), "III")]);
    let csv = dir.path().join("out.csv");
    let out = run(&["bench", "--config", s(&cfg), "-o", s(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        fs::read_to_string(&csv).unwrap().lines().count(),
        1 + 4 * 2 * 2
    );

    let boxplot = dir.path().join("box.tsv");
    let out = run(&["report", "-i", s(&csv), "--boxplot", s(&boxplot)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 4);
    assert_eq!(summary[0]["n"], 4);
    let lines: Vec<String> = fs::read_to_string(&boxplot)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("m\tIII\tQ1\t"));
    assert_eq!(lines[0].split('\t').count(), 3 + 4);
}

#[test]
fn bench_flags_disagreement() {
    let a = MockEndpoint::start(|_| MockReply::bindings(3)).unwrap();
    let b = MockEndpoint::start(|_| MockReply::bindings(4)).unwrap();
    let dir = TempDir::new().unwrap();
    let cfg = bench_config(&dir, &[("a", a.url(), "I"), ("b", b.url(), "V")]);
    let csv = dir.path().join("out.csv");
    let out = run(&["bench", "--config", s(&cfg), "-o", s(&csv)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("inconsistent row counts: Q1 CID2812: a=3 b=4"),
        "{}",
        stderr(&out)
    );
    assert!(csv.exists());
}

#[test]
fn bench_rejects_unknown_model() {
    let dir = TempDir::new().unwrap();
    let cfg = bench_config(&dir, &[("a", "http://127.0.0.1:9/sparql".into(), "VII")]);
    let out = run(&[
        "bench",
        "--config",
        s(&cfg),
        "-o",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("VII"), "{}", stderr(&out));
}
