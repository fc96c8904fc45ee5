use std::fmt;
use std::io::ErrorKind;
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::de::IgnoredAny;
use serde::Deserialize;

use crate::config::EndpointConfig;

pub const QUERY_CONTENT_TYPE: &str = "application/sparql-query";
pub const RESULTS_ACCEPT: &str = "application/sparql-results+json";

/// Outcome class of one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Ok,
    Timeout,
    /// Non-2xx response, or no response at all when the code is absent.
    HttpError(Option<u16>),
    /// The pre-run hook failed; no request was sent.
    HookFailed,
    /// 2xx response whose body is not a SPARQL JSON results document.
    InvalidResponse,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Timeout => f.write_str("timeout"),
            Status::HttpError(Some(code)) => write!(f, "http_error_{code}"),
            Status::HttpError(None) => f.write_str("http_error"),
            Status::HookFailed => f.write_str("hook_failed"),
            Status::InvalidResponse => f.write_str("invalid_response"),
        }
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ok" => Status::Ok,
            "timeout" => Status::Timeout,
            "http_error" => Status::HttpError(None),
            "hook_failed" => Status::HookFailed,
            "invalid_response" => Status::InvalidResponse,
            other => {
                let code = other
                    .strip_prefix("http_error_")
                    .and_then(|c| c.parse().ok());
                Status::HttpError(Some(
                    code.ok_or_else(|| format!("unknown status `{other}`"))?,
                ))
            }
        })
    }
}

/// Timing and result size of one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub ms: f64,
    /// Present iff `status` is `Ok`.
    pub rows: Option<usize>,
    pub status: Status,
}

impl Outcome {
    fn failed(status: Status, ms: f64) -> Self {
        Outcome {
            ms,
            rows: None,
            status,
        }
    }
}

#[derive(Deserialize)]
struct ResultsDoc {
    results: Bindings,
}

#[derive(Deserialize)]
struct Bindings {
    bindings: Vec<IgnoredAny>,
}

/// Run the endpoint's hook through `sh -c`; true on exit status 0.
pub fn run_hook(cmd: &str) -> bool {
    Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .is_ok_and(|s| s.success())
}

fn is_timeout(e: &ureq::Error) -> bool {
    match e {
        ureq::Error::Timeout(_) => true,
        ureq::Error::Io(io) => matches!(io.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock),
        _ => false,
    }
}

/// POST `query` to the endpoint and count the result bindings.
///
/// With `run_hook`, the endpoint's hook runs first and must succeed. Wall time
/// covers sending the request and reading the whole response body.
pub fn execute_remote(e: &EndpointConfig, query: &str, run_hook: bool) -> Outcome {
    if run_hook {
        if let Some(cmd) = &e.hook {
            if !self::run_hook(cmd) {
                return Outcome::failed(Status::HookFailed, 0.0);
            }
        }
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(e.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let started = Instant::now();
    let elapsed = || started.elapsed().as_secs_f64() * 1000.0;
    let response = agent
        .post(&e.url)
        .header("Content-Type", QUERY_CONTENT_TYPE)
        .header("Accept", RESULTS_ACCEPT)
        .send(query);
    let mut response = match response {
        Ok(r) => r,
        Err(err) if is_timeout(&err) => return Outcome::failed(Status::Timeout, elapsed()),
        Err(_) => return Outcome::failed(Status::HttpError(None), elapsed()),
    };
    let code = response.status().as_u16();
    if !(200..300).contains(&code) {
        return Outcome::failed(Status::HttpError(Some(code)), elapsed());
    }
    let parsed: Result<ResultsDoc, serde_json::Error> =
        serde_json::from_reader(response.body_mut().as_reader());
    let ms = elapsed();
    match parsed {
        Ok(doc) => Outcome {
            ms,
            rows: Some(doc.results.bindings.len()),
            status: Status::Ok,
        },
        Err(err)
            if matches!(
                err.io_error_kind(),
                Some(ErrorKind::TimedOut | ErrorKind::WouldBlock)
            ) =>
        {
            Outcome::failed(Status::Timeout, ms)
        }
        Err(err) if err.is_io() => Outcome::failed(Status::HttpError(Some(code)), ms),
        Err(_) => Outcome::failed(Status::InvalidResponse, ms),
    }
}
