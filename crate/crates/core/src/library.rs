//! Couples a subset to validated decay data and prunes by nuclear parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, DecaySource, RadionuclideSubset};
use crate::levels::resolve_level_spec;
use crate::model::{EnergyValue, HalfLife, Nuclide, RadiationType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LibraryError {
    #[error("the radionuclide subset is empty")]
    EmptySubset,
    #[error("inverted or invalid bounds on {axis}: [{lo}, {hi}]")]
    InvertedBounds { axis: &'static str, lo: f64, hi: f64 },
    #[error(transparent)]
    Data(#[from] ChainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryFlag {
    /// Emitting level could not be matched to level data.
    Unvalidated,
    /// Energy or intensity reported without uncertainty.
    NoUncertainty,
    NoIntensity,
}

impl EntryFlag {
    pub fn code(&self) -> &'static str {
        match self {
            EntryFlag::Unvalidated => "unvalidated",
            EntryFlag::NoUncertainty => "no-uncertainty",
            EntryFlag::NoIntensity => "no-intensity",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        [EntryFlag::Unvalidated, EntryFlag::NoUncertainty, EntryFlag::NoIntensity].into_iter().find(|f| f.code() == s)
    }
}

impl fmt::Display for EntryFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub nuclide: Nuclide,
    pub radiation: RadiationType,
    pub energy: EnergyValue,
    pub intensity_percent: Option<f64>,
    pub intensity_uncertainty: f64,
    /// Half-life of the emitting level (value only).
    pub half_life: Option<HalfLife>,
    pub parent_level_kev: f64,
    pub flags: BTreeSet<EntryFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneBounds {
    #[serde(default = "PruneBounds::default_energy")]
    pub energy_kev: (f64, f64),
    #[serde(default = "PruneBounds::default_intensity")]
    pub intensity_percent: (f64, f64),
    #[serde(default)]
    pub half_life_s: Option<(f64, f64)>,
}

impl Default for PruneBounds {
    fn default() -> Self {
        PruneBounds {
            energy_kev: Self::default_energy(),
            intensity_percent: Self::default_intensity(),
            half_life_s: None,
        }
    }
}

impl PruneBounds {
    fn default_energy() -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn default_intensity() -> (f64, f64) {
        (0.0, 100.0)
    }

    pub fn validate(&self) -> Result<(), LibraryError> {
        let check = |axis, (lo, hi): (f64, f64)| {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                Err(LibraryError::InvertedBounds { axis, lo, hi })
            } else {
                Ok(())
            }
        };
        check("energy_kev", self.energy_kev)?;
        check("intensity_percent", self.intensity_percent)?;
        if let Some(h) = self.half_life_s {
            check("half_life_s", h)?;
        }
        Ok(())
    }

    pub fn admits(&self, e: &LibraryEntry) -> bool {
        let within = |(lo, hi): (f64, f64), v: f64| lo <= v && v <= hi;
        if !within(self.energy_kev, e.energy.kev) {
            return false;
        }
        let intensity_ok = match e.intensity_percent {
            Some(i) => within(self.intensity_percent, i),
            None => self.intensity_percent.0 <= 0.0,
        };
        if !intensity_ok {
            return false;
        }
        match (self.half_life_s, e.half_life) {
            (Some(b), Some(h)) => within(b, h.as_seconds()),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Serialized dataset key → `cache`, `remote` or `absent`.
    pub datasets: BTreeMap<String, String>,
    pub generated_unix_s: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadionuclideLibrary {
    pub radiation: RadiationType,
    pub entries: Vec<LibraryEntry>,
    pub bounds: Option<PruneBounds>,
    pub provenance: Provenance,
}

impl RadionuclideLibrary {
    pub fn new(radiation: RadiationType, entries: Vec<LibraryEntry>) -> Self {
        RadionuclideLibrary { radiation, entries, bounds: None, provenance: Provenance::default() }
    }

    /// Distinct emitting nuclides in entry order.
    pub fn emitters(&self) -> Vec<Nuclide> {
        let mut out: Vec<Nuclide> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.nuclide) {
                out.push(e.nuclide);
            }
        }
        out
    }
}

fn desc_intensity(a: &LibraryEntry, b: &LibraryEntry) -> std::cmp::Ordering {
    let x = a.intensity_percent.unwrap_or(f64::NEG_INFINITY);
    let y = b.intensity_percent.unwrap_or(f64::NEG_INFINITY);
    y.total_cmp(&x)
}

/// Entries of `radiation` for every subset member, restricted to feasible levels.
pub fn assemble_library(
    subset: &RadionuclideSubset,
    radiation: RadiationType,
    source: &dyn DecaySource,
) -> Result<RadionuclideLibrary, LibraryError> {
    if subset.members.is_empty() {
        return Err(LibraryError::EmptySubset);
    }
    let validation = crate::levels::ValidationOptions::default();
    let mut keyed: Vec<(usize, LibraryEntry)> = Vec::new();
    for (mi, member) in subset.members.iter().enumerate() {
        let n = member.erased();
        let levels = subset.levels(&n);
        let scheme = levels.and_then(|l| l.scheme.as_ref());
        let member_energy = resolve_level_spec(member, scheme, &validation).map_err(ChainError::from)?;
        let member_index = levels.and_then(|l| l.resolve(&member_energy));
        let tol = scheme.map(|s| s.tolerance).unwrap_or_default();
        for rec in source.decay_records(&n, radiation)?.iter() {
            if rec.is_capture() {
                continue;
            }
            let mut flags = BTreeSet::new();
            match (levels.and_then(|l| l.resolve(&rec.parent_level)), member_index) {
                (Some(i), Some(j)) => {
                    if i != j || !levels.is_some_and(|l| l.is_feasible_index(i)) {
                        continue;
                    }
                }
                (Some(_), None) => continue,
                (None, _) => {
                    let orphan_ok = levels.is_none_or(|l| l.scheme.is_none() || l.matches_orphan(&rec.parent_level));
                    if !tol.matches(&rec.parent_level, &member_energy) || !orphan_ok {
                        continue;
                    }
                    flags.insert(EntryFlag::Unvalidated);
                }
            }
            if let Some(s) = rec.emitting_daughter_level() {
                if let Some(dl) = subset.levels(&rec.daughter) {
                    match dl.resolve(&s) {
                        Some(i) if !dl.is_feasible_index(i) => continue,
                        Some(_) => {}
                        None => {
                            if dl.scheme.is_some() && !dl.matches_orphan(&s) {
                                flags.insert(EntryFlag::Unvalidated);
                            }
                        }
                    }
                }
            }
            let intensity = rec.intensity;
            if !rec.energy_uncertainty_reported || intensity.is_none_or(|i| !i.uncertainty_reported) {
                flags.insert(EntryFlag::NoUncertainty);
            }
            if intensity.is_none() {
                flags.insert(EntryFlag::NoIntensity);
            }
            let level_hl = member_index.and_then(|i| scheme.map(|s| s.levels[i].half_life)).flatten();
            let half_life = level_hl.or(rec.parent_half_life).map(|h| match h {
                HalfLife::Finite { seconds, .. } => HalfLife::Finite { seconds, uncertainty_seconds: 0.0 },
                HalfLife::Stable => HalfLife::Stable,
            });
            keyed.push((
                mi,
                LibraryEntry {
                    nuclide: *member,
                    radiation,
                    energy: rec.energy,
                    intensity_percent: intensity.map(|i| i.percent),
                    intensity_uncertainty: intensity.map_or(0.0, |i| i.uncertainty),
                    half_life,
                    parent_level_kev: rec.parent_level.kev,
                    flags,
                },
            ));
        }
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| desc_intensity(&a.1, &b.1)));
    Ok(RadionuclideLibrary::new(radiation, keyed.into_iter().map(|(_, e)| e).collect()))
}

/// Closed-interval filter on energy, intensity and emitter half-life.
pub fn prune(lib: &RadionuclideLibrary, bounds: &PruneBounds) -> Result<RadionuclideLibrary, LibraryError> {
    bounds.validate()?;
    Ok(RadionuclideLibrary {
        radiation: lib.radiation,
        entries: lib.entries.iter().filter(|e| bounds.admits(e)).cloned().collect(),
        bounds: Some(*bounds),
        provenance: lib.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(e: f64, i: Option<f64>, hl: Option<f64>) -> LibraryEntry {
        LibraryEntry {
            nuclide: "212po".parse().unwrap(),
            radiation: RadiationType::Gamma,
            energy: EnergyValue::exact(e),
            intensity_percent: i,
            intensity_uncertainty: 0.0,
            half_life: hl.and_then(|s| HalfLife::seconds(s, 0.0)),
            parent_level_kev: 0.0,
            flags: BTreeSet::new(),
        }
    }

    #[test]
    fn inclusive_bounds() {
        let lib = RadionuclideLibrary::new(
            RadiationType::Gamma,
            vec![entry(0.0, Some(0.001), None), entry(2000.0, Some(100.0), None), entry(2000.1, Some(1.0), None)],
        );
        let b = PruneBounds { energy_kev: (0.0, 2000.0), intensity_percent: (0.001, 100.0), half_life_s: None };
        assert_eq!(prune(&lib, &b).unwrap().entries.len(), 2);
    }

    #[test]
    fn missing_intensity_needs_zero_lower_bound() {
        let lib = RadionuclideLibrary::new(RadiationType::Gamma, vec![entry(10.0, None, None)]);
        assert_eq!(prune(&lib, &PruneBounds::default()).unwrap().entries.len(), 1);
        let b = PruneBounds { intensity_percent: (0.001, 100.0), ..Default::default() };
        assert!(prune(&lib, &b).unwrap().entries.is_empty());
    }

    #[test]
    fn half_life_axis() {
        let lib = RadionuclideLibrary::new(RadiationType::Alpha, vec![entry(8784.0, Some(100.0), Some(2.94e-7))]);
        let b = PruneBounds { half_life_s: Some((1e-6, f64::INFINITY)), ..Default::default() };
        assert!(prune(&lib, &b).unwrap().entries.is_empty());
    }

    #[test]
    fn inverted() {
        let lib = RadionuclideLibrary::new(RadiationType::Alpha, vec![]);
        let b = PruneBounds { energy_kev: (10.0, 1.0), ..Default::default() };
        assert!(matches!(prune(&lib, &b), Err(LibraryError::InvertedBounds { axis: "energy_kev", .. })));
    }
}
