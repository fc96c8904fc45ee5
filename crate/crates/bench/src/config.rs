use std::path::Path;

use provmodels::{emit::ModelId, query::SuiteOptions, VocabConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("endpoint `{name}`: {reason}")]
    Endpoint { name: String, reason: String },
    #[error("duplicate endpoint name `{0}`")]
    DuplicateName(String),
    #[error("vocabulary: {0}")]
    Vocab(String),
    #[error("suite: {0}")]
    Suite(String),
}

fn default_timeout() -> f64 {
    60.0
}

fn default_repetitions() -> usize {
    5
}

/// One SPARQL endpoint, pre-loaded with a single model's emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub name: String,
    pub url: String,
    /// Model whose emission the endpoint holds.
    pub model: ModelId,
    /// Shell command run before every request, e.g. a restart script.
    #[serde(default)]
    pub hook: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

impl EndpointConfig {
    pub fn new(name: impl Into<String>, url: impl Into<String>, model: ModelId) -> Self {
        EndpointConfig {
            name: name.into(),
            url: url.into(),
            model,
            hook: None,
            timeout_secs: default_timeout(),
            repetitions: default_repetitions(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: &str| {
            Err(ConfigError::Endpoint {
                name: self.name.clone(),
                reason: reason.to_owned(),
            })
        };
        if self.name.is_empty() || self.name.contains([',', '\t', '\n', '"']) {
            return fail("name must be non-empty and free of commas, tabs, quotes and newlines");
        }
        let rest = self
            .url
            .strip_prefix("http://")
            .or_else(|| self.url.strip_prefix("https://"));
        if rest.is_none_or(str::is_empty) {
            return fail("url must be an absolute http(s) URL");
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return fail("timeout_secs must be positive");
        }
        Ok(())
    }
}

/// Contents of a bench config file.
///
/// ```toml
/// parallel = false
///
/// [suite]
/// seeds = ["4946", "2812"]
/// q3_sources = { 1 = "ctd", 3 = "disgenet" }
///
/// [[endpoints]]
/// name = "virtuoso-sp"
/// url = "http://localhost:8890/sparql"
/// model = "III"
/// hook = "./restart-virtuoso.sh"
/// timeout_secs = 300
/// repetitions = 5
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub endpoints: Vec<EndpointConfig>,
    #[serde(default)]
    pub suite: SuiteOptions,
    #[serde(default)]
    pub vocab: VocabConfig,
    /// Benchmark different endpoints concurrently.
    #[serde(default)]
    pub parallel: bool,
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: BenchConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut names = std::collections::BTreeSet::new();
        for e in &self.endpoints {
            e.validate()?;
            if !names.insert(e.name.as_str()) {
                return Err(ConfigError::DuplicateName(e.name.clone()));
            }
        }
        self.vocab
            .validate()
            .map_err(|e| ConfigError::Vocab(e.to_string()))?;
        provmodels::seed_suite(&self.suite).map_err(|e| ConfigError::Suite(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use provmodels::QueryId;

    #[test]
    fn defaults_apply() {
        let cfg = BenchConfig::from_toml(
            r#"
            [[endpoints]]
            name = "a"
            url = "http://localhost:1/sparql"
            model = "IV"
            "#,
        )
        .unwrap();
        let e = &cfg.endpoints[0];
        assert_eq!(
            (e.repetitions, e.timeout_secs, e.hook.as_deref()),
            (5, 60.0, None)
        );
        assert_eq!(e.model, ModelId::IV);
        assert!(!cfg.parallel);
        assert_eq!(cfg.suite, SuiteOptions::default());
    }

    #[test]
    fn suite_section() {
        let cfg = BenchConfig::from_toml(
            "parallel = true\n[suite]\nseeds = [\"4946\"]\nqueries = [\"Q3\"]\nq3_sources = { 2 = \"biogrid\" }\n",
        )
        .unwrap();
        assert!(cfg.parallel);
        let specs = provmodels::seed_suite(&cfg.suite).unwrap();
        assert_eq!(specs.len(), 1);
        assert_eq!(
            specs[0].source_constraints.get(&2).map(String::as_str),
            Some("biogrid")
        );
    }

    #[test]
    fn lowercase_names() {
        let cfg = BenchConfig::from_toml(
            "[[endpoints]]\nname = \"a\"\nurl = \"http://h/sparql\"\nmodel = \"iii\"\n[suite]\nqueries = [\"q2\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.endpoints[0].model, ModelId::III);
        assert_eq!(cfg.suite.queries, vec![QueryId::Q2]);
    }

    #[test]
    fn unknown_model_is_fatal() {
        let err = BenchConfig::from_toml(
            r#"
            [[endpoints]]
            name = "a"
            url = "http://localhost:1/sparql"
            model = "VI"
            "#,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)), "{err}");
    }

    #[test]
    fn endpoint_checks() {
        let ok = EndpointConfig::new("a", "http://h/sparql", ModelId::I);
        assert!(ok.validate().is_ok());
        for bad in [
            EndpointConfig {
                url: "localhost:8890/sparql".into(),
                ..ok.clone()
            },
            EndpointConfig {
                repetitions: 0,
                ..ok.clone()
            },
            EndpointConfig {
                timeout_secs: 0.0,
                ..ok.clone()
            },
            EndpointConfig {
                name: "a,b".into(),
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        let dup = BenchConfig {
            endpoints: vec![ok.clone(), ok],
            ..BenchConfig::default()
        };
        assert!(matches!(dup.validate(), Err(ConfigError::DuplicateName(_))));
    }

    #[test]
    fn bad_suite_rejected() {
        let err = BenchConfig::from_toml("[suite]\nseeds = [\"C0011849\"]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Suite(_)), "{err}");
    }
}
