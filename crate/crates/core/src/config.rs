//! Strict YAML run configuration.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::chain::DEFAULT_DEPTH_CAP;
use crate::export::PlotWindow;
use crate::levels::{ValidationOptions, DEFAULT_ISOMER_MIN_HALF_LIFE_S};
use crate::library::PruneBounds;
use crate::model::{LevelSpec, Nuclide, RadiationType};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown key `{key}`{}", location(*line, *column))]
    UnknownKey { key: String, line: Option<usize>, column: Option<usize> },
    #[error("config parse error{}: {message}", location(*line, *column))]
    Parse { message: String, line: Option<usize>, column: Option<usize> },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn location(line: Option<usize>, column: Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!(" at line {l}, column {c}"),
        (Some(l), None) => format!(" at line {l}"),
        _ => String::new(),
    }
}

impl From<serde_yaml::Error> for ConfigError {
    fn from(e: serde_yaml::Error) -> Self {
        let (line, column) = e.location().map_or((None, None), |l| (Some(l.line()), Some(l.column())));
        let message = e.to_string();
        if let Some(rest) = message.split("unknown field `").nth(1) {
            if let Some(key) = rest.split('`').next() {
                return ConfigError::UnknownKey { key: key.to_string(), line, column };
            }
        }
        ConfigError::Parse { message, line, column }
    }
}

/// Level given next to a nuclide: `m`, `m4`, `g`, or an energy in keV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LevelField {
    Kev(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclideEntry {
    pub nuclide: String,
    #[serde(default)]
    pub levels: Vec<LevelField>,
}

/// A nuclide id, optionally with explicit levels (each level is a separate nuclide).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuclideSpec {
    Id(String),
    Detailed(NuclideEntry),
}

fn parse_level(text: &str) -> Result<LevelSpec, String> {
    let t = text.trim().to_ascii_lowercase();
    if t == "g" || t == "ground" {
        return Ok(LevelSpec::Ground);
    }
    if let Some(k) = t.strip_prefix('m') {
        return match k {
            "" => Ok(LevelSpec::Metastable(1)),
            _ => k
                .parse::<u8>()
                .ok()
                .filter(|k| *k > 0)
                .map(LevelSpec::Metastable)
                .ok_or(format!("bad isomer label `{text}`")),
        };
    }
    let kev = t.trim_end_matches("kev").trim().parse::<f64>().map_err(|_| format!("bad level `{text}`"))?;
    level_from_kev(kev)
}

fn level_from_kev(kev: f64) -> Result<LevelSpec, String> {
    if !kev.is_finite() || kev < 0.0 {
        return Err(format!("bad level energy {kev}"));
    }
    Ok(if kev == 0.0 { LevelSpec::Ground } else { LevelSpec::Energy(kev) })
}

impl NuclideSpec {
    /// Nuclides denoted by this spec; ids are checked only here, at run time.
    pub fn resolve(&self) -> Result<Vec<Nuclide>, String> {
        match self {
            NuclideSpec::Id(s) => Ok(vec![s.parse::<Nuclide>().map_err(|e| format!("`{s}`: {e}"))?]),
            NuclideSpec::Detailed(d) => {
                let n: Nuclide = d.nuclide.parse().map_err(|e| format!("`{}`: {e}", d.nuclide))?;
                if d.levels.is_empty() {
                    return Ok(vec![n]);
                }
                d.levels
                    .iter()
                    .map(|l| {
                        let spec = match l {
                            LevelField::Kev(k) => level_from_kev(*k),
                            LevelField::Text(t) => parse_level(t),
                        }
                        .map_err(|e| format!("`{}`: {e}", d.nuclide))?;
                        Ok(n.with_level(spec))
                    })
                    .collect()
            }
        }
    }
}

pub fn resolve_all(specs: &[NuclideSpec]) -> Result<Vec<Nuclide>, String> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.resolve()?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Csv,
    Html,
    Xml,
    Tex,
    Json,
    Svg,
    Lineage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateOutput {
    pub template: PathBuf,
    /// File name inside the output directory.
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    #[serde(default)]
    pub markers: Option<PathBuf>,
    #[serde(default)]
    pub windows: Vec<PlotWindow>,
}

fn de_radiation<'de, D: Deserializer<'de>>(d: D) -> Result<RadiationType, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(|_| serde::de::Error::custom(format!("unknown radiation type `{s}`")))
}

fn default_radiation() -> RadiationType {
    RadiationType::Gamma
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Csv, OutputKind::Lineage]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub name: String,
    #[serde(default)]
    pub progenitors: Vec<NuclideSpec>,
    #[serde(default)]
    pub statics: Vec<NuclideSpec>,
    #[serde(default)]
    pub exclusions: Vec<NuclideSpec>,
    #[serde(default = "default_radiation", deserialize_with = "de_radiation")]
    pub radiation: RadiationType,
    #[serde(default)]
    pub prune: PruneBounds,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub templates: Vec<TemplateOutput>,
    #[serde(default)]
    pub plot: PlotConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default = "SourceConfig::default_timeout")]
    pub timeout_s: f64,
    #[serde(default)]
    pub retries: u32,
    #[serde(default = "SourceConfig::default_parallelism")]
    pub parallelism: usize,
}

impl SourceConfig {
    fn default_timeout() -> f64 {
        30.0
    }
    fn default_parallelism() -> usize {
        4
    }
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig { base_url: None, timeout_s: 30.0, retries: 0, parallelism: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "ValidationConfig::yes")]
    pub cascade: bool,
    #[serde(default = "ValidationConfig::threshold")]
    pub isomer_min_half_life_s: f64,
}

impl ValidationConfig {
    fn yes() -> bool {
        true
    }
    fn threshold() -> f64 {
        DEFAULT_ISOMER_MIN_HALF_LIFE_S
    }
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { cascade: true, isomer_min_half_life_s: DEFAULT_ISOMER_MIN_HALF_LIFE_S }
    }
}

impl From<ValidationConfig> for ValidationOptions {
    fn from(v: ValidationConfig) -> Self {
        ValidationOptions { cascade: v.cascade, isomer_min_half_life_s: v.isomer_min_half_life_s }
    }
}

/// File layout: either `jobs: [...]` or the fields of a single job at top level.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    jobs: Vec<JobConfig>,
    #[serde(default)]
    cache_dir: Option<PathBuf>,
    #[serde(default)]
    offline: bool,
    #[serde(default = "ValidationConfig::yes")]
    registry: bool,
    #[serde(default)]
    source: SourceConfig,
    #[serde(default)]
    validation: ValidationConfig,
    #[serde(default)]
    depth_cap: Option<usize>,
    name: Option<String>,
    progenitors: Option<Vec<NuclideSpec>>,
    statics: Option<Vec<NuclideSpec>>,
    exclusions: Option<Vec<NuclideSpec>>,
    #[serde(default, deserialize_with = "de_opt_radiation")]
    radiation: Option<RadiationType>,
    prune: Option<PruneBounds>,
    outputs: Option<Vec<OutputKind>>,
    templates: Option<Vec<TemplateOutput>>,
    plot: Option<PlotConfig>,
}

fn de_opt_radiation<'de, D: Deserializer<'de>>(d: D) -> Result<Option<RadiationType>, D::Error> {
    de_radiation(d).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub jobs: Vec<JobConfig>,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
    pub registry: bool,
    pub source: SourceConfig,
    pub validation: ValidationConfig,
    pub depth_cap: usize,
    /// Directory relative paths in the file are resolved against.
    pub base_dir: PathBuf,
}

impl ConfigFile {
    fn has_job_fields(&self) -> bool {
        self.name.is_some()
            || self.progenitors.is_some()
            || self.statics.is_some()
            || self.exclusions.is_some()
            || self.radiation.is_some()
            || self.prune.is_some()
            || self.outputs.is_some()
            || self.templates.is_some()
            || self.plot.is_some()
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let mut f: ConfigFile = serde_yaml::from_str(text)?;
    if f.has_job_fields() {
        if !f.jobs.is_empty() {
            return Err(ConfigError::Invalid("job fields at top level cannot be combined with `jobs`".into()));
        }
        f.jobs.push(JobConfig {
            name: f.name.take().unwrap_or_else(|| "library".into()),
            progenitors: f.progenitors.take().unwrap_or_default(),
            statics: f.statics.take().unwrap_or_default(),
            exclusions: f.exclusions.take().unwrap_or_default(),
            radiation: f.radiation.unwrap_or(RadiationType::Gamma),
            prune: f.prune.unwrap_or_default(),
            outputs: f.outputs.take().unwrap_or_else(default_outputs),
            templates: f.templates.take().unwrap_or_default(),
            plot: f.plot.take().unwrap_or_default(),
        });
    }
    if f.jobs.is_empty() {
        return Err(ConfigError::Invalid("no jobs defined".into()));
    }
    let mut names = BTreeSet::new();
    for j in &f.jobs {
        let bad_name = j.name.is_empty()
            || j.name.starts_with('.')
            || !j.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if bad_name {
            return Err(ConfigError::Invalid(format!(
                "job name `{}` must use letters, digits, `-`, `_` or `.`",
                j.name
            )));
        }
        if !names.insert(j.name.clone()) {
            return Err(ConfigError::Invalid(format!("duplicate job name `{}`", j.name)));
        }
        if j.progenitors.is_empty() && j.statics.is_empty() {
            return Err(ConfigError::Invalid(format!("job `{}` needs progenitors or statics", j.name)));
        }
        j.prune.validate().map_err(|e| ConfigError::Invalid(format!("job `{}`: {e}", j.name)))?;
        for w in &j.plot.windows {
            w.validate().map_err(|e| ConfigError::Invalid(format!("job `{}`: {e}", j.name)))?;
        }
        for t in &j.templates {
            let p = Path::new(&t.output);
            if p.components().count() != 1 || p.file_name().is_none() {
                return Err(ConfigError::Invalid(format!(
                    "job `{}`: template output `{}` must be a plain file name",
                    j.name, t.output
                )));
            }
        }
    }
    if !(f.source.timeout_s > 0.0 && f.source.timeout_s.is_finite()) {
        return Err(ConfigError::Invalid("source.timeout_s must be positive".into()));
    }
    if f.source.parallelism == 0 {
        return Err(ConfigError::Invalid("source.parallelism must be at least 1".into()));
    }
    if f.source.retries > crate::nucdata::MAX_RETRIES {
        return Err(ConfigError::Invalid(format!("source.retries must be at most {}", crate::nucdata::MAX_RETRIES)));
    }
    let depth_cap = f.depth_cap.unwrap_or(DEFAULT_DEPTH_CAP);
    if depth_cap == 0 {
        return Err(ConfigError::Invalid("depth_cap must be at least 1".into()));
    }
    Ok(RunConfig {
        jobs: f.jobs,
        cache_dir: f.cache_dir.map(|p| base_dir.join(p)),
        offline: f.offline,
        registry: f.registry,
        source: f.source,
        validation: f.validation,
        depth_cap,
        base_dir: base_dir.to_path_buf(),
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parse_config(&text, base)
}
