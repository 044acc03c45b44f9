//! Batch orchestration: configuration in, files and a run report out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use crate::catalog::Catalog;
use crate::chain::{assemble_subset, render_lineage, ChainOptions};
use crate::config::{resolve_all, JobConfig, OutputKind, RunConfig};
use crate::export::{export_table, export_template, plot_library, write_atomic, ExportFormat, MarkerRegistry};
use crate::library::{assemble_library, prune, Provenance, PruneBounds};
use crate::model::{Nuclide, RadiationType, Tolerance};
use crate::nucdata::{AccessConfig, DataAccess, Origin, StatsSnapshot, DEFAULT_BASE_URL};

pub const BASE_URL_ENV: &str = "RADLIB_BASE_URL";
pub const CACHE_DIR_ENV: &str = "RADLIB_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "radlib-cache";

/// Settings that override the configuration file (command line, then environment).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub offline: bool,
    pub no_registry: bool,
    pub cache_dir: Option<PathBuf>,
    pub base_url: Option<String>,
    /// Jobs run concurrently; 1 means sequential.
    pub parallel_jobs: usize,
}

impl RunOptions {
    /// Fills unset overrides from `RADLIB_CACHE_DIR` and `RADLIB_BASE_URL`.
    pub fn with_env(mut self) -> Self {
        if self.cache_dir.is_none() {
            self.cache_dir = std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        }
        if self.base_url.is_none() {
            self.base_url = std::env::var(BASE_URL_ENV).ok().filter(|v| !v.is_empty());
        }
        self
    }
}

pub fn access_config(cfg: &RunConfig, opts: &RunOptions) -> AccessConfig {
    AccessConfig {
        cache_dir: opts
            .cache_dir
            .clone()
            .or_else(|| cfg.cache_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR)),
        base_url: opts
            .base_url
            .clone()
            .or_else(|| cfg.source.base_url.clone())
            .unwrap_or_else(|| DEFAULT_BASE_URL.to_string()),
        timeout: Duration::from_secs_f64(cfg.source.timeout_s),
        offline: opts.offline || cfg.offline,
        registry_enabled: cfg.registry && !opts.no_registry,
        retries: cfg.source.retries,
        parallelism: cfg.source.parallelism,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PhaseTimings {
    pub chain_s: f64,
    pub library_s: f64,
    pub export_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobReport {
    pub name: String,
    pub ok: bool,
    pub error: Option<String>,
    pub radiation: RadiationType,
    pub members: Vec<String>,
    pub subset_size: usize,
    pub entries_before_prune: usize,
    pub entries_after_prune: usize,
    pub stats: StatsSnapshot,
    pub timings: PhaseTimings,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl JobReport {
    fn new(job: &JobConfig) -> Self {
        JobReport {
            name: job.name.clone(),
            ok: false,
            error: None,
            radiation: job.radiation,
            members: Vec::new(),
            subset_size: 0,
            entries_before_prune: 0,
            entries_after_prune: 0,
            stats: StatsSnapshot::default(),
            timings: PhaseTimings::default(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub jobs: Vec<JobReport>,
    pub failed: usize,
    pub stats: StatsSnapshot,
    pub total_s: f64,
    pub cache_dir: PathBuf,
    pub offline: bool,
    pub registry_enabled: bool,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "run: {} job(s), {} failed, {:.3} s; network calls {}, cache hits {}, registry skips {}, absent probes {}",
            self.jobs.len(),
            self.failed,
            self.total_s,
            self.stats.network_calls,
            self.stats.cache_hits,
            self.stats.registry_skips,
            self.stats.absent_probes
        );
        for j in &self.jobs {
            let status = if j.ok { "ok" } else { "FAILED" };
            let _ = writeln!(s, "job {} [{}] ({}): {status}", j.name, j.radiation.name(), j.radiation.code());
            if let Some(e) = &j.error {
                let _ = writeln!(s, "  error: {e}");
            }
            let _ = writeln!(
                s,
                "  subset {} nuclide(s); entries {} before prune, {} after",
                j.subset_size, j.entries_before_prune, j.entries_after_prune
            );
            let _ = writeln!(
                s,
                "  network calls {}, cache hits {}, registry skips {}, absent probes {}",
                j.stats.network_calls, j.stats.cache_hits, j.stats.registry_skips, j.stats.absent_probes
            );
            let t = &j.timings;
            let _ = writeln!(
                s,
                "  time chain {:.3} s, library {:.3} s, export {:.3} s, total {:.3} s",
                t.chain_s, t.library_s, t.export_s, t.total_s
            );
            for o in &j.outputs {
                let _ = writeln!(s, "  wrote {o}");
            }
            for w in &j.warnings {
                let _ = writeln!(s, "  warning: {w}");
            }
        }
        s
    }
}

fn lineage_file_name(n: &Nuclide) -> String {
    format!("lineage_{}.txt", n.to_string().replace('@', "_"))
}

fn unix_now() -> Option<u64> {
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

#[derive(Serialize)]
struct MetaSidecar<'a> {
    job: &'a str,
    radiation: RadiationType,
    members: &'a [String],
    entries: usize,
    bounds: Option<&'a PruneBounds>,
    provenance: &'a Provenance,
}

fn origin_name(o: Option<Origin>) -> &'static str {
    match o {
        Some(Origin::Cache) => "cache",
        Some(Origin::Remote) => "remote",
        None => "absent",
    }
}

fn run_job(
    job: &JobConfig,
    cfg: &RunConfig,
    access: &DataAccess,
    out_dir: &Path,
    report: &mut JobReport,
) -> Result<()> {
    let start = Instant::now();
    let progenitors = resolve_all(&job.progenitors).map_err(|e| anyhow!("progenitors: {e}"))?;
    let statics = resolve_all(&job.statics).map_err(|e| anyhow!("statics: {e}"))?;
    let exclusions = resolve_all(&job.exclusions).map_err(|e| anyhow!("exclusions: {e}"))?;
    let catalog = Catalog::new(access, Tolerance::default());
    let opts = ChainOptions { depth_cap: cfg.depth_cap, validation: cfg.validation.into(), ..Default::default() };

    let t = Instant::now();
    let subset = assemble_subset(&progenitors, &statics, &exclusions, &catalog, &opts);
    report.timings.chain_s = t.elapsed().as_secs_f64();
    report.stats = catalog.stats();
    let subset = subset.context("assembling radionuclide subset")?;
    report.members = subset.members.iter().map(|m| m.to_string()).collect();
    report.subset_size = subset.members.len();
    report.warnings.extend(subset.warnings.iter().cloned());

    let t = Instant::now();
    let full = assemble_library(&subset, job.radiation, &catalog);
    report.stats = catalog.stats();
    let mut full = full.context("assembling library")?;
    full.provenance.source = catalog.source_id();
    full.provenance.datasets = catalog.origins().into_iter().map(|(k, o)| (k, origin_name(o).to_string())).collect();
    full.provenance.generated_unix_s = unix_now();
    let lib = prune(&full, &job.prune).context("pruning library")?;
    report.timings.library_s = t.elapsed().as_secs_f64();
    report.entries_before_prune = full.entries.len();
    report.entries_after_prune = lib.entries.len();
    report.warnings.extend(catalog.take_warnings());

    let t = Instant::now();
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::new();
    for kind in &job.outputs {
        match kind {
            OutputKind::Lineage => {
                for tree in &subset.lineages {
                    let name = lineage_file_name(&tree.root);
                    write_atomic(&out_dir.join(&name), render_lineage(tree).as_bytes())?;
                    written.push(name);
                }
            }
            OutputKind::Svg => {
                let markers = match &job.plot.markers {
                    Some(p) => MarkerRegistry::load(&cfg.base_dir.join(p))?,
                    None => MarkerRegistry::default(),
                };
                let name = format!("{}.svg", job.name);
                plot_library(&lib, &markers, &job.plot.windows, &out_dir.join(&name))?;
                written.push(name);
            }
            table => {
                let format = match table {
                    OutputKind::Csv => ExportFormat::Csv,
                    OutputKind::Html => ExportFormat::Html,
                    OutputKind::Xml => ExportFormat::Xml,
                    OutputKind::Tex => ExportFormat::Tex,
                    _ => ExportFormat::Json,
                };
                let name = format!("{}.{}", job.name, format.extension());
                export_table(&lib, format, &out_dir.join(&name))?;
                written.push(name);
            }
        }
    }
    for tpl in &job.templates {
        let path = cfg.base_dir.join(&tpl.template);
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading template {}", path.display()))?;
        export_template(&lib, &text, &out_dir.join(&tpl.output))
            .with_context(|| format!("template {}", path.display()))?;
        written.push(tpl.output.clone());
    }
    let meta = MetaSidecar {
        job: &job.name,
        radiation: job.radiation,
        members: &report.members,
        entries: lib.entries.len(),
        bounds: lib.bounds.as_ref(),
        provenance: &lib.provenance,
    };
    let name = format!("{}.meta.json", job.name);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    write_atomic(&out_dir.join(&name), text.as_bytes())?;
    written.push(name);
    report.outputs = written;
    report.timings.export_s = t.elapsed().as_secs_f64();
    report.timings.total_s = start.elapsed().as_secs_f64();
    Ok(())
}

/// Runs every job against one shared data access; a failing job does not stop the others.
pub fn run_with_access(cfg: &RunConfig, opts: &RunOptions, access: &DataAccess) -> RunReport {
    let start = Instant::now();
    let slots: Vec<Mutex<Option<JobReport>>> = cfg.jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(job) = cfg.jobs.get(i) else { break };
        let t = Instant::now();
        let mut r = JobReport::new(job);
        match run_job(job, cfg, access, &opts.out_dir, &mut r) {
            Ok(()) => r.ok = true,
            Err(e) => {
                log::error!("job {}: {e:#}", job.name);
                r.error = Some(format!("{e:#}"));
                r.timings.total_s = t.elapsed().as_secs_f64();
            }
        }
        *slots[i].lock().expect("job slot") = Some(r);
    };
    let workers = opts.parallel_jobs.max(1).min(cfg.jobs.len());
    if workers <= 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    let jobs: Vec<JobReport> = slots.into_iter().map(|s| s.into_inner().expect("job slot").expect("job ran")).collect();
    RunReport {
        failed: jobs.iter().filter(|j| !j.ok).count(),
        jobs,
        stats: access.stats(),
        total_s: start.elapsed().as_secs_f64(),
        cache_dir: access.config().cache_dir.clone(),
        offline: access.config().offline,
        registry_enabled: access.config().registry_enabled,
    }
}

/// Writes `report.txt` and `report.json` into the output directory.
pub fn write_report(report: &RunReport, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_atomic(&out_dir.join("report.txt"), report.to_text().as_bytes())?;
    write_atomic(&out_dir.join("report.json"), report.to_json().as_bytes())?;
    Ok(())
}

/// Full run: builds the data access, runs all jobs, writes the report files.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunReport> {
    let access = DataAccess::new(access_config(cfg, opts)).context("opening dataset cache")?;
    let report = run_with_access(cfg, opts, &access);
    write_report(&report, &opts.out_dir)?;
    Ok(report)
}

/// Per-job entry counts keyed by job name, for quick comparisons.
pub fn entry_counts(report: &RunReport) -> BTreeMap<String, usize> {
    report.jobs.iter().map(|j| (j.name.clone(), j.entries_after_prune)).collect()
}
