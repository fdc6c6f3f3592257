//! Client for an external augmentation service.
//!
//! Wire protocol: `POST {endpoint}/v1/augment` with `{"text"}` answers
//! `{"augmented_text"}`; `POST {endpoint}/v1/fill-mask` answers
//! `{"candidates"}`; `GET {endpoint}/v1/health` answers any JSON object.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use ureq::Agent;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_RETRIES: usize = 1;
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RemoteError {
    #[error("cannot reach {endpoint}: {reason}")]
    Connect { endpoint: String, reason: String },

    #[error("request to {endpoint} timed out")]
    Timeout { endpoint: String },

    #[error("service answered HTTP {code}: {body}")]
    Status { code: u16, body: String },

    #[error("malformed service response: {0}")]
    Malformed(String),
}

impl RemoteError {
    /// Failures worth a second attempt.
    pub fn is_transient(&self) -> bool {
        match self {
            RemoteError::Connect { .. } | RemoteError::Timeout { .. } => true,
            RemoteError::Status { code, .. } => *code >= 500,
            RemoteError::Malformed(_) => false,
        }
    }
}

#[derive(Serialize)]
struct TextBody<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct AugmentResponse {
    augmented_text: String,
}

#[derive(Deserialize)]
struct FillMaskResponse {
    candidates: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RemoteClient {
    endpoint: String,
    retries: usize,
    concurrency: usize,
    agent: Agent,
}

impl RemoteClient {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self::with_options(endpoint, DEFAULT_TIMEOUT, DEFAULT_RETRIES, DEFAULT_CONCURRENCY)
    }

    pub fn with_options(endpoint: impl Into<String>, timeout: Duration, retries: usize, concurrency: usize) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteClient {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            retries,
            concurrency: concurrency.max(1),
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// The service's rewrite of `text`, returned verbatim.
    pub fn augment(&self, text: &str) -> Result<String, RemoteError> {
        let r: AugmentResponse = self.post("/v1/augment", text)?;
        Ok(r.augmented_text)
    }

    /// Ranked fills for the single mask in `text`.
    pub fn fill_mask(&self, text: &str) -> Result<Vec<String>, RemoteError> {
        let r: FillMaskResponse = self.post("/v1/fill-mask", text)?;
        Ok(r.candidates)
    }

    pub fn health(&self) -> Result<serde_json::Value, RemoteError> {
        self.with_retry(|| {
            let resp = self.agent.get(&self.url("/v1/health")).call();
            self.decode(resp)
        })
    }

    /// Augments every text with at most `concurrency` requests in flight.
    /// Results keep input order; one failure does not affect the others.
    pub fn augment_batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<Result<String, RemoteError>> {
        use rayon::prelude::*;
        let run = || texts.par_iter().map(|t| self.augment(t.as_ref())).collect();
        match rayon::ThreadPoolBuilder::new().num_threads(self.concurrency).build() {
            Ok(pool) => pool.install(run),
            Err(_) => texts.iter().map(|t| self.augment(t.as_ref())).collect(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.endpoint, path)
    }

    fn post<T: DeserializeOwned>(&self, path: &str, text: &str) -> Result<T, RemoteError> {
        self.with_retry(|| {
            let resp = self.agent.post(&self.url(path)).send_json(TextBody { text });
            self.decode(resp)
        })
    }

    fn with_retry<T>(&self, mut f: impl FnMut() -> Result<T, RemoteError>) -> Result<T, RemoteError> {
        let mut attempt = 0;
        loop {
            match f() {
                Err(e) if e.is_transient() && attempt < self.retries => attempt += 1,
                other => return other,
            }
        }
    }

    fn decode<T: DeserializeOwned>(
        &self,
        resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
    ) -> Result<T, RemoteError> {
        let mut resp = resp.map_err(|e| self.transport_error(e))?;
        let code = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => RemoteError::Timeout {
                endpoint: self.endpoint.clone(),
            },
            e => RemoteError::Malformed(e.to_string()),
        })?;
        if !(200..300).contains(&code) {
            return Err(RemoteError::Status { code, body });
        }
        serde_json::from_str(&body).map_err(|e| RemoteError::Malformed(e.to_string()))
    }

    fn transport_error(&self, e: ureq::Error) -> RemoteError {
        let endpoint = self.endpoint.clone();
        match e {
            ureq::Error::Timeout(_) => RemoteError::Timeout { endpoint },
            ureq::Error::Io(io)
                if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) =>
            {
                RemoteError::Timeout { endpoint }
            }
            ureq::Error::StatusCode(code) => RemoteError::Status {
                code,
                body: String::new(),
            },
            ureq::Error::Json(e) => RemoteError::Malformed(e.to_string()),
            e => RemoteError::Connect {
                endpoint,
                reason: e.to_string(),
            },
        }
    }
}
