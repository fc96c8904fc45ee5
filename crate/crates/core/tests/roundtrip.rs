mod common;

use provmodels::{
    emit,
    ingest::fixture_d1,
    rdf::{parse, parse_reader, serialize_to_string, RdfError},
    Dataset, EmitOptions, ModelId, RdfFormat, RdfQuad, VocabConfig,
};

const FORMATS: [RdfFormat; 3] = [RdfFormat::NTriples, RdfFormat::NQuads, RdfFormat::TriG];

fn sorted(mut quads: Vec<RdfQuad>) -> Vec<RdfQuad> {
    quads.sort_by_cached_key(|q| format!("{q:?}"));
    quads
}

fn datasets() -> Vec<Dataset> {
    vec![fixture_d1(), common::synth(11, 600), common::synth(12, 600)]
}

#[test]
fn parse_inverts_serialize() {
    let cfg = VocabConfig::default();
    for d in datasets() {
        for m in ModelId::ALL {
            for include_head in [true, false] {
                let quads: Vec<RdfQuad> = emit(&d, m, &cfg, EmitOptions { include_head }).collect();
                for format in FORMATS {
                    if m.uses_named_graphs() && !format.supports_graphs() {
                        continue;
                    }
                    let text = serialize_to_string(&quads, format).unwrap();
                    let back = parse(format, &text).unwrap();
                    assert_eq!(sorted(back), sorted(quads.clone()), "model {m} {format:?}");
                    let streamed = parse_reader(format, text.as_bytes()).unwrap();
                    assert_eq!(streamed.len(), quads.len());
                }
            }
        }
    }
}

#[test]
fn serialization_is_byte_identical_across_runs() {
    let cfg = VocabConfig::default();
    let d = common::synth(13, 400);
    for m in ModelId::ALL {
        for format in FORMATS {
            if m.uses_named_graphs() && !format.supports_graphs() {
                continue;
            }
            let a: Vec<RdfQuad> = emit(&d, m, &cfg, EmitOptions::default()).collect();
            let b: Vec<RdfQuad> = emit(&d, m, &cfg, EmitOptions::default()).collect();
            assert_eq!(
                serialize_to_string(&a, format).unwrap(),
                serialize_to_string(&b, format).unwrap()
            );
        }
    }
}

#[test]
fn graphs_rejected_in_ntriples() {
    let quads: Vec<RdfQuad> = emit(
        &fixture_d1(),
        ModelId::V,
        &VocabConfig::default(),
        EmitOptions::default(),
    )
    .collect();
    assert!(matches!(
        serialize_to_string(&quads, RdfFormat::NTriples),
        Err(RdfError::GraphInTriples(_))
    ));
}
