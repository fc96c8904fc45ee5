//! Timing harness for SPARQL endpoints.
//!
//! Each endpoint is loaded with one model's emission out of band. The harness
//! renders the query suite for that model, posts every query over the SPARQL
//! protocol a fixed number of times, records wall time and result row counts,
//! and summarizes per (store, model, query).

pub mod config;
pub mod mock;
pub mod remote;
pub mod suite;
pub mod summary;

pub use config::{BenchConfig, ConfigError, EndpointConfig};
pub use remote::{execute_remote, Outcome, Status};
pub use suite::{read_csv, run_suite, write_csv, BenchSample, Inconsistency, SuiteReport};
pub use summary::{summarize, write_boxplot, BenchSummary};
