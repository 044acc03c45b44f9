//! Energy level feasibility by cascade simulation, and isomer inference.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{DecayMode, EnergyValue, LevelSpec, Nuclide};
use crate::normalize::{LevelRecord, LevelScheme};

pub const DEFAULT_ISOMER_MIN_HALF_LIFE_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    /// Follow electromagnetic cascades from fed levels.
    pub cascade: bool,
    pub isomer_min_half_life_s: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { cascade: true, isomer_min_half_life_s: DEFAULT_ISOMER_MIN_HALF_LIFE_S }
    }
}

/// Levels reached by a cascade, plus start levels that matched nothing.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cascade {
    /// Sorted descending, duplicate-free.
    pub levels: Vec<EnergyValue>,
    pub indices: BTreeSet<usize>,
    pub unresolved: Vec<EnergyValue>,
}

fn sort_desc(v: &mut Vec<EnergyValue>) {
    v.sort_by(|a, b| b.kev.total_cmp(&a.kev));
    v.dedup_by(|a, b| a.kev == b.kev);
}

/// Every level reachable from `starts` through zero or more downward transitions.
pub fn cascade_visit(starts: &[EnergyValue], scheme: &LevelScheme) -> Cascade {
    let mut out = Cascade::default();
    let mut stack: Vec<usize> = Vec::new();
    for s in starts {
        match scheme.resolve(s) {
            Some(i) => stack.push(i),
            None => out.unresolved.push(*s),
        }
    }
    while let Some(i) = stack.pop() {
        if !out.indices.insert(i) {
            continue;
        }
        stack.extend(scheme.successors(i).filter(|j| !out.indices.contains(j)));
    }
    out.levels = out.indices.iter().map(|&i| scheme.levels[i].energy).collect();
    out.levels.extend(out.unresolved.iter().copied());
    sort_desc(&mut out.levels);
    sort_desc(&mut out.unresolved);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlattenedLevels {
    pub nuclide: Nuclide,
    pub inherited: Vec<EnergyValue>,
    pub visited: Vec<EnergyValue>,
    pub all: Vec<EnergyValue>,
    /// Inherited levels with no matching level record.
    pub orphans: Vec<EnergyValue>,
    /// Scheme indices of the resolved members of `all`.
    pub indices: BTreeSet<usize>,
}

impl FlattenedLevels {
    pub fn contains_index(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }
}

/// all = dedup(inherited ∪ cascade(inherited)); without a cascade only fed levels count.
pub fn flatten_levels(
    nuclide: &Nuclide,
    inherited: &[EnergyValue],
    scheme: Option<&LevelScheme>,
    opts: &ValidationOptions,
) -> FlattenedLevels {
    let mut inh = inherited.to_vec();
    sort_desc(&mut inh);
    let Some(scheme) = scheme else {
        return FlattenedLevels {
            nuclide: nuclide.erased(),
            inherited: inh.clone(),
            visited: Vec::new(),
            all: inh.clone(),
            orphans: inh,
            indices: BTreeSet::new(),
        };
    };
    let (visited, indices, orphans) = if opts.cascade {
        let c = cascade_visit(&inh, scheme);
        (c.levels, c.indices, c.unresolved)
    } else {
        let mut idx = BTreeSet::new();
        let mut orphans = Vec::new();
        for e in &inh {
            match scheme.resolve(e) {
                Some(i) => {
                    idx.insert(i);
                }
                None => orphans.push(*e),
            }
        }
        let mut v: Vec<EnergyValue> = idx.iter().map(|&i| scheme.levels[i].energy).collect();
        v.extend(orphans.iter().copied());
        sort_desc(&mut v);
        (v, idx, orphans)
    };
    // Inherited values are represented by their matching level record.
    let mut all = visited.clone();
    sort_desc(&mut all);
    FlattenedLevels { nuclide: nuclide.erased(), inherited: inh, visited, all, orphans, indices }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub index: usize,
    pub level: LevelRecord,
    pub feasible: bool,
    pub modes: Vec<(DecayMode, Option<f64>)>,
    pub is_isomer: bool,
}

pub fn is_isomer(level: &LevelRecord, min_half_life_s: f64) -> bool {
    level.energy.kev > 0.0 && level.half_life.is_some_and(|h| h.as_seconds() >= min_half_life_s)
}

/// One outcome per scheme level; unreached levels are infeasible and carry no modes.
pub fn infer_level_outcomes(
    flat: &FlattenedLevels,
    scheme: &LevelScheme,
    opts: &ValidationOptions,
) -> Vec<LevelOutcome> {
    scheme
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let feasible = flat.contains_index(i);
            LevelOutcome {
                index: i,
                level: l.clone(),
                feasible,
                modes: if feasible { l.decay_modes.clone() } else { Vec::new() },
                is_isomer: is_isomer(l, opts.isomer_min_half_life_s),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LevelError {
    #[error("{nuclide}: no level data to resolve isomer m{ordinal}")]
    NoLevelData { nuclide: Nuclide, ordinal: u8 },
    #[error("{nuclide}: isomer m{ordinal} not found in level data")]
    UnknownIsomer { nuclide: Nuclide, ordinal: u8 },
}

/// Energy of a level spec, resolving metastable ordinals against the scheme.
pub fn resolve_level_spec(
    nuclide: &Nuclide,
    scheme: Option<&LevelScheme>,
    opts: &ValidationOptions,
) -> Result<EnergyValue, LevelError> {
    match nuclide.level() {
        LevelSpec::Ground => Ok(EnergyValue::GROUND),
        LevelSpec::Energy(e) => Ok(scheme
            .and_then(|s| s.resolve(&EnergyValue::exact(e)).map(|i| s.levels[i].energy))
            .unwrap_or(EnergyValue::exact(e))),
        LevelSpec::Metastable(m) => {
            let s = scheme.ok_or(LevelError::NoLevelData { nuclide: nuclide.erased(), ordinal: m })?;
            s.isomer_index(m, opts.isomer_min_half_life_s)
                .map(|i| s.levels[i].energy)
                .ok_or(LevelError::UnknownIsomer { nuclide: nuclide.erased(), ordinal: m })
        }
    }
}

/// Validation state of one nuclide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclideLevels {
    pub scheme: Option<LevelScheme>,
    pub flat: FlattenedLevels,
    pub outcomes: Vec<LevelOutcome>,
}

impl NuclideLevels {
    pub fn build(
        nuclide: &Nuclide,
        inherited: &[EnergyValue],
        scheme: Option<LevelScheme>,
        opts: &ValidationOptions,
    ) -> Self {
        let flat = flatten_levels(nuclide, inherited, scheme.as_ref(), opts);
        let outcomes = scheme.as_ref().map(|s| infer_level_outcomes(&flat, s, opts)).unwrap_or_default();
        NuclideLevels { scheme, flat, outcomes }
    }

    /// Scheme index of a level energy, if it resolves.
    pub fn resolve(&self, e: &EnergyValue) -> Option<usize> {
        self.scheme.as_ref()?.resolve(e)
    }

    pub fn is_feasible_index(&self, i: usize) -> bool {
        self.flat.contains_index(i)
    }

    /// Whether `e` matches an orphan (fed but absent from the level data).
    pub fn matches_orphan(&self, e: &EnergyValue) -> bool {
        let tol = self.scheme.as_ref().map(|s| s.tolerance).unwrap_or_default();
        self.flat.orphans.iter().any(|o| tol.matches(o, e))
    }

    /// Canonical member form of a level: ground, labelled isomer, or explicit energy.
    pub fn member_spec(&self, index: usize) -> LevelSpec {
        let Some(s) = &self.scheme else { return LevelSpec::Ground };
        let l = &s.levels[index];
        if l.energy.kev == 0.0 {
            LevelSpec::Ground
        } else if let Some(m) = l.isomer {
            LevelSpec::Metastable(m)
        } else {
            LevelSpec::Energy(l.energy.kev)
        }
    }
}
