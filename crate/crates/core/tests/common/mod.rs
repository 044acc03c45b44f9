//! Shared helpers: fixture caches, a mock dataset server and subset/library builders.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use radlib::catalog::Catalog;
use radlib::chain::{assemble_subset, ChainOptions, RadionuclideSubset};
use radlib::library::{assemble_library, prune, PruneBounds, RadionuclideLibrary};
use radlib::model::{Nuclide, RadiationType, Tolerance};
use radlib::nucdata::{AbsenceRegistry, AccessConfig, DataAccess};

pub mod props;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Dataset files of the corpus (absence registry excluded).
pub fn fixture_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    v
}

/// A temporary cache directory holding every fixture file and the absence registry.
pub fn primed_cache() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(fixtures_dir()).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), d.path().join(e.file_name())).unwrap();
    }
    d
}

pub fn offline_access(cache: &Path) -> DataAccess {
    DataAccess::new(AccessConfig { cache_dir: cache.to_path_buf(), offline: true, ..Default::default() }).unwrap()
}

pub fn ids(list: &[&str]) -> Vec<Nuclide> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

pub fn names(list: &[Nuclide]) -> Vec<String> {
    list.iter().map(|n| n.to_string()).collect()
}

pub fn subset_with(
    access: &DataAccess,
    recursive: &[&str],
    statics: &[&str],
    exclusions: &[&str],
    opts: &ChainOptions,
) -> RadionuclideSubset {
    let c = Catalog::new(access, Tolerance::default());
    assemble_subset(&ids(recursive), &ids(statics), &ids(exclusions), &c, opts).unwrap()
}

pub fn subset(access: &DataAccess, recursive: &[&str]) -> RadionuclideSubset {
    subset_with(access, recursive, &[], &[], &ChainOptions::default())
}

/// Unpruned library of `radiation` for the recursive progenitors.
pub fn library(access: &DataAccess, recursive: &[&str], radiation: RadiationType) -> RadionuclideLibrary {
    let c = Catalog::new(access, Tolerance::default());
    let s = assemble_subset(&ids(recursive), &[], &[], &c, &ChainOptions::default()).unwrap();
    assemble_library(&s, radiation, &c).unwrap()
}

pub fn series_bounds(radiation: RadiationType) -> PruneBounds {
    let hi = if radiation == RadiationType::Alpha { 10_000.0 } else { 2_000.0 };
    PruneBounds { energy_kev: (0.0, hi), intensity_percent: (0.001, 100.0), half_life_s: None }
}

pub fn pruned(access: &DataAccess, recursive: &[&str], radiation: RadiationType) -> RadionuclideLibrary {
    prune(&library(access, recursive, radiation), &series_bounds(radiation)).unwrap()
}

/// Fixture body for a request, keyed like the endpoint's query parameters.
fn fixture_for(query: &HashMap<String, String>) -> Option<String> {
    let stem = query.get("nuclides")?;
    let code = match query.get("fields")?.as_str() {
        "decay_rads" => format!("dr-{}", query.get("rad_types")?),
        "levels" => "lv".into(),
        "gammas" => "tr".into(),
        _ => return None,
    };
    std::fs::read_to_string(fixtures_dir().join(format!("{stem}_{code}.csv"))).ok()
}

fn parse_query(url: &str) -> HashMap<String, String> {
    url.split_once('?')
        .map(|(_, q)| {
            q.split('&')
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.to_string(), v.replace("%2B", "+")))
                .collect()
        })
        .unwrap_or_default()
}

/// Serves the fixture corpus over HTTP; unknown datasets get an empty 200 body.
pub struct MockServer {
    pub url: String,
    calls: Arc<AtomicUsize>,
    requested: Arc<Mutex<Vec<String>>>,
    latency: Arc<Mutex<Duration>>,
    fail: Arc<AtomicBool>,
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(latency: Duration) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").unwrap());
        let port = server.server_addr().to_ip().unwrap().port();
        let calls = Arc::new(AtomicUsize::new(0));
        let requested = Arc::new(Mutex::new(Vec::new()));
        let latency = Arc::new(Mutex::new(latency));
        let fail = Arc::new(AtomicBool::new(false));
        let (s, c, r, l, f) = (server.clone(), calls.clone(), requested.clone(), latency.clone(), fail.clone());
        let handle = std::thread::spawn(move || {
            for req in s.incoming_requests() {
                let (c, r, l, f) = (c.clone(), r.clone(), l.clone(), f.clone());
                std::thread::spawn(move || {
                    c.fetch_add(1, Ordering::SeqCst);
                    r.lock().unwrap().push(req.url().to_string());
                    let delay = *l.lock().unwrap();
                    std::thread::sleep(delay);
                    if f.load(Ordering::SeqCst) {
                        let _ = req.respond(tiny_http::Response::from_string("unavailable").with_status_code(503));
                        return;
                    }
                    let body = fixture_for(&parse_query(req.url())).unwrap_or_default();
                    let _ = req.respond(tiny_http::Response::from_string(body));
                });
            }
        });
        MockServer {
            url: format!("http://127.0.0.1:{port}/relnsd/v1/data"),
            calls,
            requested,
            latency,
            fail,
            server,
            handle: Some(handle),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn requested(&self) -> Vec<String> {
        self.requested.lock().unwrap().clone()
    }

    pub fn set_failing(&self, on: bool) {
        self.fail.store(on, Ordering::SeqCst);
    }

    pub fn set_latency(&self, d: Duration) {
        *self.latency.lock().unwrap() = d;
    }

    pub fn access(&self, cache: &Path, registry: bool) -> DataAccess {
        DataAccess::new(AccessConfig {
            cache_dir: cache.to_path_buf(),
            base_url: self.url.clone(),
            registry_enabled: registry,
            ..Default::default()
        })
        .unwrap()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn registry_len(cache: &Path) -> usize {
    AbsenceRegistry::load(cache.join(AbsenceRegistry::FILE_NAME)).unwrap().len()
}
