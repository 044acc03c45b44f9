//! Typed records parsed from raw CSV datasets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DecayMode, EnergyValue, HalfLife, Nuclide, RadiationType, Tolerance};
use crate::nucdata::{DatasetKey, DatasetKind, RawDataset};

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("{key}: missing columns {missing:?}")]
    HeaderMismatch { key: DatasetKey, missing: Vec<String> },
    #[error("dataset kind mismatch: {0}")]
    WrongKind(DatasetKey),
    #[error("nuclide mismatch: expected {expected}, found {found}")]
    NuclideMismatch { expected: Nuclide, found: Nuclide },
    #[error("{key}: {message}")]
    Csv { key: DatasetKey, message: String },
}

/// A parse result with the non-fatal row problems encountered.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub percent: f64,
    pub uncertainty: f64,
    pub uncertainty_reported: bool,
}

/// One decay-radiation row, attributed to the parent whose decay produces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub parent: Nuclide,
    pub parent_level: EnergyValue,
    pub parent_level_offset: Option<String>,
    pub parent_half_life: Option<HalfLife>,
    pub radiation: RadiationType,
    pub energy: EnergyValue,
    pub energy_uncertainty_reported: bool,
    pub intensity: Option<Intensity>,
    /// Initial and final levels in the daughter for gamma and electron rows.
    pub start_level: Option<EnergyValue>,
    pub end_level: Option<EnergyValue>,
    /// Shell or line label (`K`, `L`, `Ka1`, `B+`, `EC`).
    pub label: Option<String>,
    pub daughter: Nuclide,
    pub daughter_feeding_level: Option<EnergyValue>,
    pub decay_mode: DecayMode,
    pub branching_percent: Option<f64>,
    /// Zero-based data row within the source dataset.
    pub row: usize,
}

impl DecayRecord {
    /// Electron-capture rows fix the fed level but emit no particle.
    pub fn is_capture(&self) -> bool {
        self.label.as_deref() == Some("EC")
    }

    /// Level of the daughter that emits this radiation, for de-excitation rows.
    pub fn emitting_daughter_level(&self) -> Option<EnergyValue> {
        match self.radiation {
            RadiationType::Gamma | RadiationType::Electron => self.start_level.or(self.daughter_feeding_level),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub nuclide: Nuclide,
    pub energy: EnergyValue,
    pub offset: Option<String>,
    pub jpi: Option<String>,
    pub half_life: Option<HalfLife>,
    /// Isomer ordinal from the data source label (`m1` → 1).
    pub isomer: Option<u8>,
    pub decay_modes: Vec<(DecayMode, Option<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub nuclide: Nuclide,
    pub start_level: EnergyValue,
    pub end_level: EnergyValue,
    pub gamma_energy: EnergyValue,
    pub intensity: Option<f64>,
    /// Indices into `LevelScheme::levels`.
    pub start_index: usize,
    pub end_index: usize,
}

/// Levels in ascending energy plus the downward transitions between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub nuclide: Nuclide,
    pub levels: Vec<LevelRecord>,
    pub transitions: Vec<TransitionRecord>,
    pub tolerance: Tolerance,
}

impl LevelScheme {
    /// Nearest level within tolerance.
    pub fn resolve(&self, e: &EnergyValue) -> Option<usize> {
        self.levels
            .iter()
            .enumerate()
            .filter(|(_, l)| self.tolerance.matches(&l.energy, e))
            .min_by(|a, b| {
                let da = (a.1.energy.kev - e.kev).abs();
                let db = (b.1.energy.kev - e.kev).abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
    }

    pub fn level(&self, index: usize) -> &LevelRecord {
        &self.levels[index]
    }

    /// End-level indices of transitions leaving `index`.
    pub fn successors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.transitions.iter().filter(move |t| t.start_index == index).map(|t| t.end_index)
    }

    /// Level for metastable ordinal `m`: by data-source label, else by counting
    /// long-lived excited levels in ascending energy.
    pub fn isomer_index(&self, ordinal: u8, min_half_life_s: f64) -> Option<usize> {
        if self.levels.iter().any(|l| l.isomer.is_some()) {
            return self.levels.iter().position(|l| l.isomer == Some(ordinal));
        }
        self.levels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.energy.kev > 0.0 && l.half_life.is_some_and(|h| h.as_seconds() >= min_half_life_s))
            .nth(ordinal as usize - 1)
            .map(|(i, _)| i)
    }
}

struct Table {
    key: DatasetKey,
    columns: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(raw: &RawDataset, required: &[&str]) -> Result<Table, NormalizeError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(raw.body.as_bytes());
        let headers = rdr.headers().map_err(|e| NormalizeError::Csv { key: raw.key, message: e.to_string() })?.clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_ascii_lowercase(), i))
            .collect();
        let missing: Vec<String> =
            required.iter().filter(|c| !columns.contains_key(**c)).map(|c| c.to_string()).collect();
        if !missing.is_empty() {
            return Err(NormalizeError::HeaderMismatch { key: raw.key, missing });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            match rec {
                Ok(r) if r.iter().all(|c| c.is_empty()) => {}
                Ok(r) => rows.push(r),
                Err(e) => return Err(NormalizeError::Csv { key: raw.key, message: e.to_string() }),
            }
        }
        Ok(Table { key: raw.key, columns, rows })
    }

    fn cell<'a>(&self, row: &'a csv::StringRecord, name: &str) -> &'a str {
        self.columns.get(name).and_then(|&i| row.get(i)).unwrap_or("")
    }
}

fn num(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Uncertainty value and whether one was reported.
fn unc(s: &str) -> (f64, bool) {
    match num(s) {
        Some(v) if v > 0.0 => (v, true),
        Some(_) => (0.0, false),
        None => (0.0, false),
    }
}

fn nuclide_of(z: &str, n: &str, symbol: &str) -> Option<Nuclide> {
    if let (Ok(z), Ok(n)) = (z.trim().parse::<u16>(), n.trim().parse::<u16>()) {
        let nuc = Nuclide::ground(u8::try_from(z).ok()?, z + n).ok()?;
        if !symbol.is_empty() && !nuc.element().eq_ignore_ascii_case(symbol) {
            return None;
        }
        return Some(nuc);
    }
    None
}

fn half_life_of(value: &str, uncertainty: &str) -> Option<HalfLife> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("stable") {
        return Some(HalfLife::Stable);
    }
    HalfLife::seconds(num(v)?, unc(uncertainty).0)
}

const DECAY_COLUMNS: &[&str] = &[
    "energy",
    "unc_en",
    "intensity",
    "unc_i",
    "p_z",
    "p_n",
    "p_symbol",
    "p_energy",
    "p_decay",
    "p_decay_%",
    "d_z",
    "d_n",
    "d_symbol",
    "d_energy",
];

/// Parses a decay_rads dataset, keeping file order.
pub fn parse_decay_records(raw: &RawDataset) -> Result<Parsed<Vec<DecayRecord>>, NormalizeError> {
    let radiation = match raw.key.kind {
        DatasetKind::DecayRads(r) => r,
        _ => return Err(NormalizeError::WrongKind(raw.key)),
    };
    let t = Table::read(raw, DECAY_COLUMNS)?;
    let mut out = Vec::with_capacity(t.rows.len());
    let mut warnings = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        let c = |name: &str| t.cell(row, name);
        let warn = |w: &mut Vec<String>, msg: &str| w.push(format!("{} row {}: {msg}", t.key, i + 1));
        let Some(energy) = num(c("energy")).filter(|e| *e >= 0.0) else {
            warn(&mut warnings, "unparseable energy");
            continue;
        };
        let Some(parent) = nuclide_of(c("p_z"), c("p_n"), c("p_symbol")) else {
            warn(&mut warnings, "unparseable parent");
            continue;
        };
        if parent != raw.key.nuclide {
            warn(&mut warnings, &format!("row parent {parent} differs from dataset"));
            continue;
        }
        let Some(decay_mode) = DecayMode::from_code(c("p_decay")) else {
            warn(&mut warnings, &format!("unknown decay mode `{}`", c("p_decay")));
            continue;
        };
        let daughter = match decay_mode {
            DecayMode::It => Some(parent),
            _ => nuclide_of(c("d_z"), c("d_n"), c("d_symbol")),
        };
        let Some(daughter) = daughter else {
            warn(&mut warnings, "unparseable daughter");
            continue;
        };
        let intensity = match c("intensity") {
            "" => None,
            s => match num(s) {
                Some(p) if p > 0.0 && p <= 100.0 => {
                    let (u, reported) = unc(c("unc_i"));
                    Some(Intensity { percent: p, uncertainty: u, uncertainty_reported: reported })
                }
                _ => {
                    warn(&mut warnings, &format!("intensity `{s}` outside (0, 100]"));
                    continue;
                }
            },
        };
        let (eu, e_reported) = unc(c("unc_en"));
        let level = |s: &str| num(s).filter(|v| *v >= 0.0).map(EnergyValue::exact);
        let parent_level = EnergyValue::new(num(c("p_energy")).unwrap_or(0.0).max(0.0), unc(c("p_unc_energy")).0);
        let text = |s: &str| (!s.is_empty()).then(|| s.to_string());
        out.push(DecayRecord {
            parent,
            parent_level,
            parent_level_offset: text(c("p_energy_shift")),
            parent_half_life: half_life_of(c("p_half_life_sec"), c("p_unc_hls")),
            radiation,
            energy: EnergyValue::new(energy, eu),
            energy_uncertainty_reported: e_reported,
            intensity,
            start_level: level(c("start_level_energy")),
            end_level: level(c("end_level_energy")),
            label: text(c("shell")),
            daughter,
            daughter_feeding_level: level(c("d_energy")),
            decay_mode,
            branching_percent: num(c("p_decay_%")),
            row: i,
        });
    }
    Ok(Parsed { value: out, warnings })
}

const LEVEL_COLUMNS: &[&str] = &["z", "n", "symbol", "energy"];
const TRANSITION_COLUMNS: &[&str] = &["z", "n", "symbol", "start_level_energy", "end_level_energy", "energy"];

fn check_nuclide(key: &DatasetKey, found: Option<Nuclide>) -> Result<(), NormalizeError> {
    match found {
        Some(n) if n != key.nuclide => Err(NormalizeError::NuclideMismatch { expected: key.nuclide, found: n }),
        _ => Ok(()),
    }
}

/// Parses and cross-validates levels and transitions of one nuclide.
pub fn parse_level_scheme(
    levels_raw: &RawDataset,
    transitions_raw: Option<&RawDataset>,
    tolerance: Tolerance,
) -> Result<Parsed<LevelScheme>, NormalizeError> {
    if levels_raw.key.kind != DatasetKind::Levels {
        return Err(NormalizeError::WrongKind(levels_raw.key));
    }
    let nuclide = levels_raw.key.nuclide;
    if let Some(tr) = transitions_raw {
        if tr.key.kind != DatasetKind::Transitions {
            return Err(NormalizeError::WrongKind(tr.key));
        }
        if tr.key.nuclide != nuclide {
            return Err(NormalizeError::NuclideMismatch { expected: nuclide, found: tr.key.nuclide });
        }
    }
    let mut warnings = Vec::new();

    let t = Table::read(levels_raw, LEVEL_COLUMNS)?;
    let mut levels: Vec<LevelRecord> = Vec::new();
    for (i, row) in t.rows.iter().enumerate() {
        let c = |name: &str| t.cell(row, name);
        check_nuclide(&t.key, nuclide_of(c("z"), c("n"), c("symbol")))?;
        let Some(e) = num(c("energy")).filter(|e| *e >= 0.0) else {
            warnings.push(format!("{} row {}: unparseable level energy", t.key, i + 1));
            continue;
        };
        let mut modes = Vec::new();
        for k in 1..=3 {
            let code = c(&format!("decay_{k}"));
            if code.is_empty() {
                continue;
            }
            match DecayMode::from_code(code) {
                Some(m) => modes.push((m, num(c(&format!("decay_{k}_%"))))),
                None => warnings.push(format!("{} row {}: unknown decay mode `{code}`", t.key, i + 1)),
            }
        }
        let isomer = c("isomer").strip_prefix('m').and_then(|s| {
            if s.is_empty() {
                Some(1)
            } else {
                s.parse::<u8>().ok().filter(|m| *m >= 1)
            }
        });
        let text = |s: &str| (!s.is_empty()).then(|| s.to_string());
        levels.push(LevelRecord {
            nuclide,
            energy: EnergyValue::new(e, unc(c("unc_e")).0),
            offset: text(c("energy_shift")),
            jpi: text(c("jp")),
            half_life: half_life_of(c("half_life_sec"), c("unc_hls")),
            isomer,
            decay_modes: modes,
        });
    }
    levels.sort_by(|a, b| a.energy.kev.total_cmp(&b.energy.kev));
    let before = levels.len();
    levels.dedup_by(|b, a| {
        if a.energy.kev == b.energy.kev && a.offset == b.offset {
            if a.decay_modes.is_empty() {
                a.decay_modes = std::mem::take(&mut b.decay_modes);
            }
            a.half_life = a.half_life.or(b.half_life);
            a.jpi = a.jpi.take().or(b.jpi.take());
            a.isomer = a.isomer.or(b.isomer);
            true
        } else {
            false
        }
    });
    if levels.len() != before {
        warnings.push(format!("{}: merged {} duplicate levels", t.key, before - levels.len()));
    }
    if !levels.is_empty() && levels[0].energy.kev != 0.0 {
        warnings.push(format!("{}: ground state missing, inserted", t.key));
        levels.insert(
            0,
            LevelRecord {
                nuclide,
                energy: EnergyValue::GROUND,
                offset: None,
                jpi: None,
                half_life: None,
                isomer: None,
                decay_modes: Vec::new(),
            },
        );
    }

    let mut scheme = LevelScheme { nuclide, levels, transitions: Vec::new(), tolerance };
    if let Some(tr) = transitions_raw {
        let t = Table::read(tr, TRANSITION_COLUMNS)?;
        for (i, row) in t.rows.iter().enumerate() {
            let c = |name: &str| t.cell(row, name);
            check_nuclide(&t.key, nuclide_of(c("z"), c("n"), c("symbol")))?;
            let (Some(s), Some(f), Some(g)) =
                (num(c("start_level_energy")), num(c("end_level_energy")), num(c("energy")))
            else {
                warnings.push(format!("{} row {}: unparseable transition", t.key, i + 1));
                continue;
            };
            let start = EnergyValue::exact(s);
            let end = EnergyValue::exact(f);
            let (Some(si), Some(ei)) = (scheme.resolve(&start), scheme.resolve(&end)) else {
                warnings.push(format!(
                    "{} row {}: transition {s} -> {f} keV has no matching level, excluded",
                    t.key,
                    i + 1
                ));
                continue;
            };
            if scheme.levels[si].energy.kev <= scheme.levels[ei].energy.kev {
                warnings.push(format!("{} row {}: transition {s} -> {f} keV is not downward, excluded", t.key, i + 1));
                continue;
            }
            scheme.transitions.push(TransitionRecord {
                nuclide,
                start_level: start,
                end_level: end,
                gamma_energy: EnergyValue::new(g, unc(c("unc_en")).0),
                intensity: num(c("relative_intensity")),
                start_index: si,
                end_index: ei,
            });
        }
    }
    Ok(Parsed { value: scheme, warnings })
}

/// One entry of g(j): a daughter with the levels its parent feeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaughterLink {
    pub nuclide: Nuclide,
    pub feeding_levels: Vec<EnergyValue>,
    pub branching_percent: Option<f64>,
    pub modes: Vec<DecayMode>,
}

/// Duplicate-free daughters in first-appearance order. Isomeric transitions and
/// spontaneous fission contribute none.
pub fn extract_daughters(records: &[DecayRecord]) -> Vec<DaughterLink> {
    struct Acc {
        particle: Vec<EnergyValue>,
        deexcitation: Vec<EnergyValue>,
        branching: Option<(f64, f64)>,
        modes: Vec<DecayMode>,
    }
    let mut order: Vec<Nuclide> = Vec::new();
    let mut acc: HashMap<Nuclide, Acc> = HashMap::new();
    for r in records {
        if matches!(r.decay_mode, DecayMode::It | DecayMode::Sf) || r.daughter == r.parent {
            continue;
        }
        let a = acc.entry(r.daughter).or_insert_with(|| {
            order.push(r.daughter);
            Acc { particle: Vec::new(), deexcitation: Vec::new(), branching: None, modes: Vec::new() }
        });
        if r.radiation.is_particle() {
            if let Some(l) = r.daughter_feeding_level {
                a.particle.push(l);
            }
        } else if let Some(l) = r.emitting_daughter_level() {
            a.deexcitation.push(l);
        }
        if !a.modes.contains(&r.decay_mode) {
            a.modes.push(r.decay_mode);
        }
        if let Some(b) = r.branching_percent {
            // Lowest parent level wins; ties keep the larger value.
            let key = (r.parent_level.kev, -b);
            if a.branching.is_none_or(|(pl, nb)| key < (pl, nb)) {
                a.branching = Some(key);
            }
        }
    }
    order
        .into_iter()
        .map(|n| {
            let mut a = acc.remove(&n).expect("accumulated");
            let mut levels = if !a.particle.is_empty() {
                a.particle
            } else if !a.deexcitation.is_empty() {
                a.deexcitation
            } else {
                vec![EnergyValue::GROUND]
            };
            levels.sort_by(|x, y| x.kev.total_cmp(&y.kev).then(x.uncertainty_kev.total_cmp(&y.uncertainty_kev)));
            levels.dedup_by(|x, y| x.kev == y.kev);
            a.modes.sort();
            DaughterLink {
                nuclide: n,
                feeding_levels: levels,
                branching_percent: a.branching.map(|(_, nb)| -nb),
                modes: a.modes,
            }
        })
        .collect()
}
