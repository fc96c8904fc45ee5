//! Compile an evidence-annotated relation dataset into five RDF provenance
//! models and query them.
//!
//! * [`model`]: entities, statements, evidence and cardinal-assertion grouping.
//! * [`ingest`]: the TSV exchange format and a synthetic dataset generator.
//! * [`rdf`]: RDF terms and quads with N-Triples, N-Quads and TriG I/O.
//! * [`emit`]: the N-ary, singleton-property and nanopublication emitters.
//! * [`query`]: model-independent query plans and their SPARQL rendering.
//! * [`store`]: an in-memory quad store that evaluates query plans.
//! * [`oracle`]: brute-force query answers over the canonical model.

pub mod emit;
pub mod error;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod query;
pub mod rdf;
pub mod store;

pub use emit::{emit, expected_counts, EmissionStats, EmitOptions, ModelId, VocabConfig};
pub use error::ModelError;
pub use ingest::{parse_tsv, serialize_tsv, synthesize, IngestDiagnostics, SynthParams};
pub use model::{
    dataset_counts, group_cardinal, Bucket, CardinalAssertion, Dataset, DatasetCounts, EntityKind,
    EntityRef, EvidenceRecord, PredicateRef, Statement, Vocabulary,
};
pub use oracle::oracle_answer;
pub use query::{build_plan, render_sparql, seed_suite, QueryId, QueryPlan, QuerySpec};
pub use rdf::{Iri, RdfFormat, RdfQuad, RdfTerm};
pub use store::Store;
