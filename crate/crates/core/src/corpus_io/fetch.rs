//! Batched retrieval of classifier scores from a remote scoring service.

use std::collections::{BTreeMap, HashSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ScoreKind, ScoreTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub classifier: String,
    pub guids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    /// Worth retrying (connection failure, timeout, 5xx, 429).
    pub transient: bool,
    pub message: String,
}

/// One POST round trip. Implementations must be usable from several threads.
pub trait ScoreTransport: Sync {
    fn post(&self, endpoint: &str, request: &ScoreRequest) -> std::result::Result<ScoreResponse, TransportError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Pause after the `failed_attempt`-th failure (1-based): base, 2·base, 4·base, ...
    pub fn delay(&self, failed_attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(failed_attempt.saturating_sub(1))
    }
}

/// JSON-over-HTTP transport.
#[derive(Debug)]
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTransport { agent }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport::new(Duration::from_secs(30))
    }
}

impl ScoreTransport for HttpTransport {
    fn post(&self, endpoint: &str, request: &ScoreRequest) -> std::result::Result<ScoreResponse, TransportError> {
        let classify = |e: ureq::Error| {
            let transient = match &e {
                ureq::Error::StatusCode(code) => *code >= 500 || *code == 429,
                ureq::Error::Http(_) | ureq::Error::BadUri(_) | ureq::Error::Json(_) => false,
                _ => true,
            };
            TransportError {
                transient,
                message: e.to_string(),
            }
        };
        let mut resp = self.agent.post(endpoint).send_json(request).map_err(classify)?;
        resp.body_mut().read_json::<ScoreResponse>().map_err(|e| TransportError {
            transient: false,
            message: format!("malformed response: {e}"),
        })
    }
}

/// Score `guids` with a remote classifier, `batch_size` guids per request.
///
/// Duplicate guids are requested once. Each batch is retried on transient
/// failures with exponential backoff; the result does not depend on the
/// order in which batches complete.
pub fn fetch_scores<T: ScoreTransport + ?Sized>(
    transport: &T,
    endpoint: &str,
    classifier_name: &str,
    kind: ScoreKind,
    guids: &[String],
    batch_size: usize,
    policy: RetryPolicy,
) -> Result<ScoreTable> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be positive".into()));
    }
    if policy.max_attempts == 0 {
        return Err(Error::InvalidArgument("retry policy needs at least one attempt".into()));
    }
    let mut seen = HashSet::new();
    let unique: Vec<String> = guids.iter().filter(|g| seen.insert(g.as_str())).cloned().collect();

    let mut table = ScoreTable::new(classifier_name, kind);
    for batch in unique.chunks(batch_size) {
        let request = ScoreRequest {
            classifier: classifier_name.to_string(),
            guids: batch.to_vec(),
        };
        let response = post_with_retry(transport, endpoint, &request, policy)?;
        for guid in batch {
            let score = *response.scores.get(guid).ok_or_else(|| Error::MissingScore {
                classifier: classifier_name.to_string(),
                guid: guid.clone(),
            })?;
            table.insert(guid.clone(), score)?;
        }
    }
    Ok(table)
}

fn post_with_retry<T: ScoreTransport + ?Sized>(
    transport: &T,
    endpoint: &str,
    request: &ScoreRequest,
    policy: RetryPolicy,
) -> Result<ScoreResponse> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match transport.post(endpoint, request) {
            Ok(resp) => return Ok(resp),
            Err(e) if e.transient && attempt < policy.max_attempts => {
                std::thread::sleep(policy.delay(attempt));
            }
            Err(e) => {
                return Err(Error::EndpointUnreachable {
                    endpoint: endpoint.to_string(),
                    attempts: attempt,
                    message: e.message,
                })
            }
        }
    }
}
