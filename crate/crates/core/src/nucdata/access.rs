use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AbsenceRegistry, DatasetKey, DiskCache, EndpointAdapter, Origin, RawDataset, RegistryError, RemoteAdapter,
    Transport, UreqTransport, DEFAULT_BASE_URL,
};

pub const MAX_RETRIES: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(250);

#[derive(Debug, Clone, PartialEq)]
pub struct AccessConfig {
    pub cache_dir: PathBuf,
    pub base_url: String,
    pub timeout: Duration,
    pub offline: bool,
    pub registry_enabled: bool,
    pub retries: u32,
    pub parallelism: usize,
}

impl Default for AccessConfig {
    fn default() -> Self {
        AccessConfig {
            cache_dir: PathBuf::from("radlib-cache"),
            base_url: DEFAULT_BASE_URL.to_string(),
            timeout: Duration::from_secs(30),
            offline: false,
            registry_enabled: true,
            retries: 0,
            parallelism: 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum AccessError {
    #[error("network error fetching {key}: {message}")]
    Network { key: DatasetKey, message: String },
    #[error("offline mode and {key} is not cached")]
    OfflineMiss { key: DatasetKey },
    #[error("cannot write cache file {path}: {source}")]
    CacheWrite { path: PathBuf, source: std::io::Error },
    #[error("cannot read cache file {path}: {source}")]
    CacheRead { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FetchOutcome {
    Found(RawDataset),
    Absent,
}

impl FetchOutcome {
    pub fn dataset(self) -> Option<RawDataset> {
        match self {
            FetchOutcome::Found(d) => Some(d),
            FetchOutcome::Absent => None,
        }
    }
}

/// Thread-safe retrieval counters.
#[derive(Debug, Default)]
pub struct FetchStats {
    network_calls: AtomicU64,
    cache_hits: AtomicU64,
    registry_skips: AtomicU64,
    absent_probes: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsSnapshot {
    pub network_calls: u64,
    pub cache_hits: u64,
    pub registry_skips: u64,
    /// Network calls answered with "no such dataset".
    pub absent_probes: u64,
}

impl FetchStats {
    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            network_calls: self.network_calls.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
            registry_skips: self.registry_skips.load(Ordering::SeqCst),
            absent_probes: self.absent_probes.load(Ordering::SeqCst),
        }
    }
}

enum Counter {
    Network,
    CacheHit,
    RegistrySkip,
    AbsentProbe,
}

fn bump(stats: &FetchStats, c: &Counter) {
    let field = match c {
        Counter::Network => &stats.network_calls,
        Counter::CacheHit => &stats.cache_hits,
        Counter::RegistrySkip => &stats.registry_skips,
        Counter::AbsentProbe => &stats.absent_probes,
    };
    field.fetch_add(1, Ordering::SeqCst);
}

/// Registry, cache and remote endpoint behind one thread-safe handle.
pub struct DataAccess {
    cfg: AccessConfig,
    cache: DiskCache,
    registry: Mutex<AbsenceRegistry>,
    adapter: Box<dyn RemoteAdapter>,
    transport: Box<dyn Transport>,
    inflight: Mutex<HashMap<DatasetKey, Arc<Mutex<()>>>>,
    stats: FetchStats,
}

impl DataAccess {
    pub fn new(cfg: AccessConfig) -> Result<Self, AccessError> {
        let adapter = EndpointAdapter::new(cfg.base_url.clone());
        Self::with_parts(cfg, Box::new(adapter), Box::new(UreqTransport))
    }

    pub fn with_parts(
        cfg: AccessConfig,
        adapter: Box<dyn RemoteAdapter>,
        transport: Box<dyn Transport>,
    ) -> Result<Self, AccessError> {
        let registry = AbsenceRegistry::load(cfg.cache_dir.join(AbsenceRegistry::FILE_NAME))?;
        Ok(DataAccess {
            cache: DiskCache::new(cfg.cache_dir.clone()),
            cfg,
            registry: Mutex::new(registry),
            adapter,
            transport,
            inflight: Mutex::new(HashMap::new()),
            stats: FetchStats::default(),
        })
    }

    pub fn config(&self) -> &AccessConfig {
        &self.cfg
    }

    pub fn cache(&self) -> &DiskCache {
        &self.cache
    }

    pub fn source_id(&self) -> String {
        self.adapter.source_id()
    }

    pub fn stats(&self) -> StatsSnapshot {
        self.stats.snapshot()
    }

    pub fn registry_snapshot(&self) -> AbsenceRegistry {
        self.registry.lock().expect("registry lock").clone()
    }

    pub fn fetch(&self, key: &DatasetKey) -> Result<FetchOutcome, AccessError> {
        self.fetch_counted(key, None)
    }

    /// Fetches and also counts into `extra` (per-job counters).
    pub fn fetch_counted(&self, key: &DatasetKey, extra: Option<&FetchStats>) -> Result<FetchOutcome, AccessError> {
        let count = |c: Counter| {
            bump(&self.stats, &c);
            if let Some(s) = extra {
                bump(s, &c);
            }
        };
        if let Some(hit) = self.screen(key)? {
            count(if matches!(hit, FetchOutcome::Absent) { Counter::RegistrySkip } else { Counter::CacheHit });
            return Ok(hit);
        }
        if self.cfg.offline {
            return Err(AccessError::OfflineMiss { key: *key });
        }

        let gate = {
            let mut map = self.inflight.lock().expect("inflight lock");
            map.entry(*key).or_default().clone()
        };
        let _held = gate.lock().expect("key gate");
        // Another thread may have completed this key while we waited.
        if let Some(hit) = self.screen(key)? {
            count(if matches!(hit, FetchOutcome::Absent) { Counter::RegistrySkip } else { Counter::CacheHit });
            return Ok(hit);
        }

        let result = self.fetch_remote(key, &count);
        self.inflight.lock().expect("inflight lock").remove(key);
        result
    }

    fn screen(&self, key: &DatasetKey) -> Result<Option<FetchOutcome>, AccessError> {
        if self.cfg.registry_enabled && self.registry.lock().expect("registry lock").contains(key) {
            return Ok(Some(FetchOutcome::Absent));
        }
        let body =
            self.cache.read(key).map_err(|source| AccessError::CacheRead { path: self.cache.path_for(key), source })?;
        Ok(body
            .filter(|b| !b.trim().is_empty())
            .map(|body| FetchOutcome::Found(RawDataset { key: *key, body, origin: Origin::Cache })))
    }

    fn fetch_remote(&self, key: &DatasetKey, count: &dyn Fn(Counter)) -> Result<FetchOutcome, AccessError> {
        let req = self.adapter.request(key);
        let attempts = self.cfg.retries.min(MAX_RETRIES) + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(BACKOFF_BASE * 2u32.pow(attempt - 1));
            }
            count(Counter::Network);
            let reply = match self.transport.get(&req, self.cfg.timeout) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{key}: transport error: {e}");
                    last_error = e;
                    continue;
                }
            };
            let data = match reply.status {
                200..=299 => self.adapter.interpret(reply.body),
                404 => None,
                s => {
                    last_error = format!("HTTP status {s}");
                    continue;
                }
            };
            return match data {
                Some(body) => {
                    self.cache
                        .write_atomic(key, &body)
                        .map_err(|source| AccessError::CacheWrite { path: self.cache.path_for(key), source })?;
                    Ok(FetchOutcome::Found(RawDataset { key: *key, body, origin: Origin::Remote }))
                }
                None => {
                    count(Counter::AbsentProbe);
                    if self.cfg.registry_enabled {
                        self.registry.lock().expect("registry lock").record(key)?;
                    }
                    Ok(FetchOutcome::Absent)
                }
            };
        }
        Err(AccessError::Network { key: *key, message: last_error })
    }

    /// Fetches several keys with at most `parallelism` requests in flight.
    pub fn fetch_many(
        &self,
        keys: &[DatasetKey],
        extra: Option<&FetchStats>,
    ) -> Vec<Result<FetchOutcome, AccessError>> {
        let workers = self.cfg.parallelism.max(1).min(keys.len());
        if workers <= 1 {
            return keys.iter().map(|k| self.fetch_counted(k, extra)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<FetchOutcome, AccessError>>>> =
            keys.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= keys.len() {
                        break;
                    }
                    let r = self.fetch_counted(&keys[i], extra);
                    *slots[i].lock().expect("slot lock") = Some(r);
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every slot filled")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nucdata::{HttpReply, RemoteRequest};

    /// Serves bodies from a map; unknown keys get an empty 200 response.
    struct MapTransport {
        bodies: HashMap<String, String>,
        calls: AtomicU64,
        fail: bool,
        delay: Duration,
    }

    impl Transport for MapTransport {
        fn get(&self, req: &RemoteRequest, _t: Duration) -> Result<HttpReply, String> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            std::thread::sleep(self.delay);
            if self.fail {
                return Err("connection refused".into());
            }
            let q: Vec<&str> = req.query.iter().map(|(_, v)| v.as_str()).collect();
            let body = self.bodies.get(&q.join("/")).cloned().unwrap_or_default();
            Ok(HttpReply { status: 200, body })
        }
    }

    fn access(dir: &std::path::Path, fail: bool, delay_ms: u64) -> DataAccess {
        let mut bodies = HashMap::new();
        bodies.insert("225ac/decay_rads/a".to_string(), "energy,intensity\n5830,50.7\n".to_string());
        let cfg = AccessConfig { cache_dir: dir.to_path_buf(), ..Default::default() };
        DataAccess::with_parts(
            cfg,
            Box::new(EndpointAdapter::new("http://mock")),
            Box::new(MapTransport { bodies, calls: AtomicU64::new(0), fail, delay: Duration::from_millis(delay_ms) }),
        )
        .unwrap()
    }

    fn key(s: &str) -> DatasetKey {
        s.parse().unwrap()
    }

    #[test]
    fn remote_then_cache() {
        let dir = tempfile::tempdir().unwrap();
        let a = access(dir.path(), false, 0);
        let k = key("225ac:dr-a");
        match a.fetch(&k).unwrap() {
            FetchOutcome::Found(d) => assert_eq!(d.origin, Origin::Remote),
            FetchOutcome::Absent => panic!("expected data"),
        }
        assert!(dir.path().join("225ac_dr-a.csv").exists());
        match a.fetch(&k).unwrap() {
            FetchOutcome::Found(d) => assert_eq!(d.origin, Origin::Cache),
            FetchOutcome::Absent => panic!("expected data"),
        }
        assert_eq!(a.stats().network_calls, 1);
        assert_eq!(a.stats().cache_hits, 1);
    }

    #[test]
    fn absent_is_registered_and_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let a = access(dir.path(), false, 0);
        let k = key("209bi:dr-x");
        assert_eq!(a.fetch(&k).unwrap(), FetchOutcome::Absent);
        assert_eq!(a.fetch(&k).unwrap(), FetchOutcome::Absent);
        let s = a.stats();
        assert_eq!((s.network_calls, s.registry_skips, s.absent_probes), (1, 1, 1));
        assert!(a.registry_snapshot().contains(&k));
        assert!(!a.cache().exists(&k));
    }

    #[test]
    fn transport_failure_is_not_registered() {
        let dir = tempfile::tempdir().unwrap();
        let a = access(dir.path(), true, 0);
        let k = key("225ac:dr-a");
        assert!(matches!(a.fetch(&k), Err(AccessError::Network { .. })));
        assert!(a.registry_snapshot().is_empty());
        assert!(!a.cache().exists(&k));
    }

    #[test]
    fn offline_miss() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = access(dir.path(), false, 0);
        a.cfg.offline = true;
        assert!(matches!(a.fetch(&key("225ac:dr-a")), Err(AccessError::OfflineMiss { .. })));
        assert_eq!(a.stats().network_calls, 0);
    }

    #[test]
    fn concurrent_same_key_single_call() {
        let dir = tempfile::tempdir().unwrap();
        let a = access(dir.path(), false, 50);
        let keys = vec![key("225ac:dr-a"); 8];
        let results = a.fetch_many(&keys, None);
        assert!(results.iter().all(|r| matches!(r, Ok(FetchOutcome::Found(_)))));
        assert_eq!(a.stats().network_calls, 1);
    }
}
