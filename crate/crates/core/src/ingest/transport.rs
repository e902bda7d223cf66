use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::IngestError;

/// Minimum spacing between two requests to the same endpoint.
pub const MIN_REQUEST_INTERVAL: Duration = Duration::from_millis(200);

const USER_AGENT: &str = concat!(
    "wikistance/",
    env!("CARGO_PKG_VERSION"),
    " (deletion-discussion corpus builder)"
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub retry_after: Option<Duration>,
    pub body: String,
}

impl HttpResponse {
    pub fn ok(body: impl Into<String>) -> Self {
        Self {
            status: 200,
            retry_after: None,
            body: body.into(),
        }
    }
}

/// Something that can answer a MediaWiki Action API GET request.
pub trait Transport: Send + Sync {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<HttpResponse, IngestError>;
}

/// Live HTTP transport. Requests to one endpoint are serialized and spaced by
/// at least [`MIN_REQUEST_INTERVAL`].
pub struct HttpTransport {
    agent: ureq::Agent,
    min_interval: Duration,
    slots: Mutex<HashMap<String, Arc<Mutex<Option<Instant>>>>>,
}

impl HttpTransport {
    pub fn new() -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .user_agent(USER_AGENT)
            .build()
            .into();
        Self {
            agent,
            min_interval: MIN_REQUEST_INTERVAL,
            slots: Mutex::new(HashMap::new()),
        }
    }

    /// Raises the spacing between requests; values below the default are ignored.
    pub fn with_min_interval(mut self, interval: Duration) -> Self {
        self.min_interval = interval.max(MIN_REQUEST_INTERVAL);
        self
    }

    fn slot(&self, endpoint: &str) -> Arc<Mutex<Option<Instant>>> {
        let mut slots = self.slots.lock().expect("transport slot map poisoned");
        slots.entry(endpoint.to_string()).or_default().clone()
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for HttpTransport {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<HttpResponse, IngestError> {
        let slot = self.slot(endpoint);
        // held for the whole request: one in-flight request per endpoint
        let mut last = slot.lock().expect("endpoint slot poisoned");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.min_interval {
                thread::sleep(self.min_interval - elapsed);
            }
        }
        let result = self
            .agent
            .get(endpoint)
            .query_pairs(params.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .call();
        *last = Some(Instant::now());
        let mut response = result.map_err(|e| IngestError::NetworkUnavailable(e.to_string()))?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| IngestError::NetworkUnavailable(e.to_string()))?;
        Ok(HttpResponse {
            status,
            retry_after,
            body,
        })
    }
}
