//! HTTP client for a remote annealing-style sampling service.
//!
//! Protocol: JSON over HTTP POST. The request ships the QUBO verbatim; the
//! response carries samples as '0'/'1' bitstrings in ledger order plus the
//! service-reported timing, which is recorded without interpretation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::qubo::QuboModel;
use crate::sampler::{Sample, SampleSet, TimeSource};

#[derive(Debug, Error)]
pub enum RemoteError {
    /// Connection-level failure; retrying with backoff may succeed.
    #[error("transport failure talking to {endpoint}: {detail}; safe to retry with backoff")]
    Transport { endpoint: String, detail: String },

    /// Non-2xx response; 5xx are worth retrying, 4xx are not.
    #[error("service returned HTTP {code}; {}", if *.retryable { "transient, retry with backoff" } else { "not retryable, fix the request" })]
    Status { code: u16, retryable: bool },

    /// Response did not match the protocol schema; retrying will not help.
    #[error("malformed service response: {0}; not retryable, check endpoint compatibility")]
    Schema(String),
}

impl RemoteError {
    pub fn retryable(&self) -> bool {
        match self {
            RemoteError::Transport { .. } => true,
            RemoteError::Status { retryable, .. } => *retryable,
            RemoteError::Schema(_) => false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct RemoteRequest<'a> {
    format: &'static str,
    dim: usize,
    offset: f64,
    linear: &'a [f64],
    quadratic: &'a [(u32, u32, f64)],
    num_reads: usize,
    time_limit_ms: u64,
}

#[derive(Debug, Clone, Deserialize)]
struct RemoteSample {
    assignment: String,
    energy: f64,
    #[serde(default)]
    #[allow(dead_code)]
    feasible: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
struct RemoteTiming {
    service_us: u64,
}

#[derive(Debug, Clone, Deserialize)]
struct RemoteResponse {
    samples: Vec<RemoteSample>,
    timing: RemoteTiming,
}

/// Knobs of one remote sampling call.
#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub num_reads: usize,
    pub time_limit_ms: u64,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig { endpoint: endpoint.into(), num_reads: 10, time_limit_ms: 1000 }
    }
}

fn parse_bits(s: &str, dim: usize) -> std::result::Result<Vec<u8>, RemoteError> {
    if s.len() != dim {
        return Err(RemoteError::Schema(format!(
            "assignment length {} does not match dim {dim}",
            s.len()
        )));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(RemoteError::Schema(format!("bad assignment character {other:?}"))),
        })
        .collect()
}

/// POST the QUBO to a sampling service and parse the response into a
/// [`SampleSet`]. Energies are recomputed locally so the set stays
/// self-consistent; the service timing is kept verbatim.
pub fn sample_remote(qubo: &QuboModel, config: &RemoteConfig) -> Result<SampleSet> {
    let request = RemoteRequest {
        format: "qubo",
        dim: qubo.dim,
        offset: qubo.offset,
        linear: &qubo.linear,
        quadratic: qubo.quadratic(),
        num_reads: config.num_reads,
        time_limit_ms: config.time_limit_ms,
    };

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(std::time::Duration::from_secs(60)))
        .build()
        .into();

    let mut response = agent
        .post(&config.endpoint)
        .send_json(&request)
        .map_err(|e| match e {
            ureq::Error::StatusCode(code) => RemoteError::Status { code, retryable: code >= 500 },
            other => RemoteError::Transport {
                endpoint: config.endpoint.clone(),
                detail: other.to_string(),
            },
        })?;

    let body: RemoteResponse = response
        .body_mut()
        .read_json()
        .map_err(|e| RemoteError::Schema(e.to_string()))?;

    let service_us = body.timing.service_us;
    let mut samples = Vec::with_capacity(body.samples.len());
    for s in body.samples {
        let bits = parse_bits(&s.assignment, qubo.dim)?;
        let energy = qubo.energy(&bits).expect("length checked");
        if (energy - s.energy).abs() > 1e-6 {
            log::warn!(
                "service energy {} disagrees with recomputed {energy}; keeping the local value",
                s.energy
            );
        }
        samples.push(Sample { bits, energy, time_us: service_us });
    }
    samples.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    Ok(SampleSet {
        samples,
        sampler: "remote".into(),
        seed: 0,
        time_source: TimeSource::Service,
        service_us: Some(service_us),
    })
}
