use std::time::Duration;

use super::{body_has_rows, DatasetKey, DatasetKind};

pub const DEFAULT_BASE_URL: &str = "https://nds.iaea.org/relnsd/v1/data";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteRequest {
    pub url: String,
    pub query: Vec<(String, String)>,
}

/// Maps dataset keys to endpoint requests and decides whether a response carries data.
pub trait RemoteAdapter: Send + Sync {
    fn source_id(&self) -> String;
    fn request(&self, key: &DatasetKey) -> RemoteRequest;
    /// `Some(body)` for a data-bearing response, `None` for an authoritative absence.
    fn interpret(&self, body: String) -> Option<String>;
}

/// Adapter for the CSV endpoint (`fields=decay_rads|levels|gammas`).
#[derive(Debug, Clone)]
pub struct EndpointAdapter {
    pub base_url: String,
}

impl EndpointAdapter {
    pub fn new(base_url: impl Into<String>) -> Self {
        EndpointAdapter { base_url: base_url.into() }
    }
}

impl RemoteAdapter for EndpointAdapter {
    fn source_id(&self) -> String {
        self.base_url.clone()
    }

    fn request(&self, key: &DatasetKey) -> RemoteRequest {
        let mut query = vec![("nuclides".to_string(), key.nuclide.stem())];
        match key.kind {
            DatasetKind::DecayRads(r) => {
                query.push(("fields".into(), "decay_rads".into()));
                query.push(("rad_types".into(), r.code().into()));
            }
            DatasetKind::Levels => query.push(("fields".into(), "levels".into())),
            DatasetKind::Transitions => query.push(("fields".into(), "gammas".into())),
        }
        RemoteRequest { url: self.base_url.clone(), query }
    }

    fn interpret(&self, body: String) -> Option<String> {
        // The endpoint answers unknown datasets with an empty body, a bare header, or `[]`.
        let t = body.trim();
        if t.is_empty() || t == "[]" || !body_has_rows(&body) {
            return None;
        }
        Some(body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

/// Blocking HTTP GET.
pub trait Transport: Send + Sync {
    fn get(&self, req: &RemoteRequest, timeout: Duration) -> Result<HttpReply, String>;
}

#[derive(Debug, Default, Clone)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn get(&self, req: &RemoteRequest, timeout: Duration) -> Result<HttpReply, String> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build().into();
        let mut call = agent.get(&req.url);
        for (k, v) in &req.query {
            call = call.query(k, v);
        }
        let mut resp = call.call().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
        Ok(HttpReply { status, body })
    }
}
