//! End-to-end runs of the `radlib` binary.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

use common::*;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_radlib"));
    c.env_remove("RADLIB_BASE_URL").env_remove("RADLIB_CACHE_DIR");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SERIES_GAMMA: &str = "
source: {parallelism: 8}
jobs:
  - {name: u, progenitors: [238U], prune: {energy_kev: [0, 2000], intensity_percent: [0.001, 100]}}
  - {name: ac, progenitors: [235U], prune: {energy_kev: [0, 2000], intensity_percent: [0.001, 100]}}
  - {name: th, progenitors: [232Th], prune: {energy_kev: [0, 2000], intensity_percent: [0.001, 100]}}
  - {name: np, progenitors: [237Np], prune: {energy_kev: [0, 2000], intensity_percent: [0.001, 100]}}
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("job.yaml");
    std::fs::write(&p, text).unwrap();
    p
}

fn generate(config: &Path, cache: &Path, out: &Path, extra: &[&str], base_url: Option<&str>) -> Output {
    let mut c = bin();
    c.arg("generate").arg(config).arg("--cache-dir").arg(cache).arg("--out-dir").arg(out).args(extra);
    if let Some(u) = base_url {
        c.env("RADLIB_BASE_URL", u);
    }
    c.output().unwrap()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn total(r: &Value, counter: &str) -> u64 {
    r["stats"][counter].as_u64().unwrap()
}

#[test]
fn primed_cache_needs_no_network() {
    let cache = primed_cache();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), SERIES_GAMMA);
    let out = work.path().join("out");
    let o = generate(&cfg, cache.path(), &out, &["--offline"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(total(&r, "network_calls"), 0);
    let counts: Vec<u64> =
        r["jobs"].as_array().unwrap().iter().map(|j| j["entries_after_prune"].as_u64().unwrap()).collect();
    assert_eq!(counts, [624, 536, 309, 473]);
    for f in ["u.csv", "np.csv", "lineage_237np.txt", "report.txt", "u.meta.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn cold_cache_fetches_and_persists() {
    let server = MockServer::start(Duration::ZERO);
    let cache = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), "progenitors: [225Ac]\nradiation: alpha\n");
    let out = work.path().join("out");
    let o = generate(&cfg, cache.path(), &out, &[], Some(&server.url));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(total(&r, "network_calls") > 0);
    assert_eq!(total(&r, "network_calls") as usize, server.calls());
    assert!(cache.path().join("225ac_dr-a.csv").exists());
    assert!(registry_len(cache.path()) > 0);

    let again = generate(&cfg, cache.path(), &work.path().join("again"), &["--offline"], None);
    assert!(again.status.success());
    assert_eq!(
        std::fs::read(out.join("library.csv")).unwrap(),
        std::fs::read(work.path().join("again/library.csv")).unwrap()
    );
}

#[test]
fn failing_job_is_isolated() {
    let cache = primed_cache();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(
        work.path(),
        "jobs:\n  - {name: good, progenitors: [40K]}\n  - {name: bad, progenitors: [999Xx]}\n  - {name: missing, progenitors: [60Co]}\n",
    );
    let out = work.path().join("out");
    let o = generate(&cfg, cache.path(), &out, &["--offline"], None);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    let jobs = r["jobs"].as_array().unwrap();
    let ok: Vec<bool> = jobs.iter().map(|j| j["ok"].as_bool().unwrap()).collect();
    assert_eq!(ok, [true, false, false]);
    assert!(jobs[1]["error"].as_str().unwrap().contains("999Xx"));
    assert!(jobs[2]["error"].as_str().unwrap().contains("60co"));
    assert!(out.join("good.csv").exists());
    assert!(!out.join("bad.csv").exists());
}

#[test]
fn runs_are_reproducible() {
    let cache = primed_cache();
    let work = tempfile::tempdir().unwrap();
    let cfg = configs().join("demos.yaml");
    let a = work.path().join("a");
    let b = work.path().join("b");
    assert!(generate(&cfg, cache.path(), &a, &["--offline"], None).status.success());
    assert!(generate(&cfg, cache.path(), &b, &["--offline", "--jobs", "3"], None).status.success());
    let mut names: Vec<String> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !n.starts_with("report.") && !n.ends_with(".meta.json"))
        .collect();
    names.sort();
    assert!(names.len() > 15);
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n} differs");
    }
}

#[test]
fn registry_can_be_disabled() {
    let server = MockServer::start(Duration::ZERO);
    let cache = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), "progenitors: [99Mo]\n");
    let first = work.path().join("1");
    assert!(generate(&cfg, cache.path(), &first, &[], Some(&server.url)).status.success());
    let reg_before = std::fs::read_to_string(cache.path().join("absent_registry.txt")).unwrap();

    let second = work.path().join("2");
    assert!(generate(&cfg, cache.path(), &second, &["--no-registry"], Some(&server.url)).status.success());
    let r = report(&second);
    assert_eq!(total(&r, "registry_skips"), 0);
    assert!(total(&r, "absent_probes") > 0);
    assert_eq!(r["registry_enabled"], Value::Bool(false));
    assert_eq!(std::fs::read_to_string(cache.path().join("absent_registry.txt")).unwrap(), reg_before);

    let third = work.path().join("3");
    assert!(generate(&cfg, cache.path(), &third, &[], Some(&server.url)).status.success());
    let r = report(&third);
    assert_eq!(total(&r, "absent_probes"), 0);
    assert_eq!(total(&r, "network_calls"), 0);
}

#[test]
fn offline_without_data_fails() {
    let cache = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), "progenitors: [40K]\n");
    let o = generate(&cfg, cache.path(), &work.path().join("out"), &["--offline"], None);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&work.path().join("out"));
    assert!(r["jobs"][0]["error"].as_str().unwrap().contains("offline"));
}

#[test]
fn config_errors_exit_with_two() {
    let cache = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    let cfg = write_config(work.path(), "jobs:\n  - name: a\n    progenators: [238U]\n");
    let o = generate(&cfg, cache.path(), &work.path().join("out"), &[], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("progenators") && err.contains("line 3"), "{err}");
    assert!(!work.path().join("out").exists());
}

#[test]
fn qualify_subcommand() {
    let cache = primed_cache();
    let work = tempfile::tempdir().unwrap();
    let out = work.path().join("out");
    assert!(generate(&configs().join("demos.yaml"), cache.path(), &out, &["--offline"], None).status.success());
    let peaks = work.path().join("peaks.csv");
    std::fs::write(&peaks, "centroid_kev,net_area\n1460.8,1200\n186.0,300\n5000,1\n").unwrap();
    let o = bin().arg("qualify").arg(&peaks).arg(out.join("norm.csv")).args(["--tol-kev", "0.5"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("40k") && text.contains("1460.82"), "{text}");
    assert!(text.contains("226ra") && text.contains("235u"), "{text}");

    let o = bin()
        .arg("qualify")
        .arg(&peaks)
        .arg(out.join("norm.csv"))
        .args(["--tol-kev", "0.5", "--json"])
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[2]["unassigned"], Value::Bool(true));

    let o = bin().arg("qualify").arg(&peaks).arg(out.join("norm.csv")).args(["--tol-kev", "0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
