//! Parsed, memoized view of the datasets reachable through a `DataAccess`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::chain::{ChainError, DecaySource};
use crate::model::{Nuclide, RadiationType, Tolerance};
use crate::normalize::{parse_decay_records, parse_level_scheme, DecayRecord, LevelScheme};
use crate::nucdata::{
    DataAccess, DatasetKey, DatasetKind, FetchOutcome, FetchStats, Origin, RawDataset, StatsSnapshot,
};

/// Per-job dataset view with its own counters and warnings.
pub struct Catalog<'a> {
    access: &'a DataAccess,
    tolerance: Tolerance,
    stats: FetchStats,
    raw: Mutex<HashMap<DatasetKey, Option<RawDataset>>>,
    records: Mutex<HashMap<DatasetKey, Arc<Vec<DecayRecord>>>>,
    schemes: Mutex<HashMap<Nuclide, Option<Arc<LevelScheme>>>>,
    warnings: Mutex<Vec<String>>,
}

impl<'a> Catalog<'a> {
    pub fn new(access: &'a DataAccess, tolerance: Tolerance) -> Self {
        Catalog {
            access,
            tolerance,
            stats: FetchStats::default(),
            raw: Mutex::default(),
            records: Mutex::default(),
            schemes: Mutex::default(),
            warnings: Mutex::default(),
        }
    }

    pub fn stats(&self) -> StatsSnapshot {
        self.stats.snapshot()
    }

    pub fn source_id(&self) -> String {
        self.access.source_id()
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warnings lock"))
    }

    /// Origin of every dataset read so far, by serialized key.
    pub fn origins(&self) -> BTreeMap<String, Option<Origin>> {
        self.raw.lock().expect("raw lock").iter().map(|(k, v)| (k.to_string(), v.as_ref().map(|d| d.origin))).collect()
    }

    fn store(&self, key: DatasetKey, outcome: FetchOutcome) -> Option<RawDataset> {
        let d = outcome.dataset();
        self.raw.lock().expect("raw lock").insert(key, d.clone());
        d
    }

    fn raw(&self, key: &DatasetKey) -> Result<Option<RawDataset>, ChainError> {
        if let Some(d) = self.raw.lock().expect("raw lock").get(key) {
            return Ok(d.clone());
        }
        let outcome = self
            .access
            .fetch_counted(key, Some(&self.stats))
            .map_err(|e| ChainError::DataUnavailable(e.to_string()))?;
        Ok(self.store(*key, outcome))
    }

    fn warn(&self, w: Vec<String>) {
        if !w.is_empty() {
            self.warnings.lock().expect("warnings lock").extend(w);
        }
    }
}

impl DecaySource for Catalog<'_> {
    fn decay_records(&self, nuclide: &Nuclide, radiation: RadiationType) -> Result<Arc<Vec<DecayRecord>>, ChainError> {
        let key = DatasetKey::new(nuclide, DatasetKind::DecayRads(radiation));
        if let Some(r) = self.records.lock().expect("records lock").get(&key) {
            return Ok(r.clone());
        }
        let parsed = match self.raw(&key)? {
            Some(raw) => {
                let p = parse_decay_records(&raw).map_err(|e| ChainError::DataUnavailable(e.to_string()))?;
                self.warn(p.warnings);
                Arc::new(p.value)
            }
            None => Arc::default(),
        };
        self.records.lock().expect("records lock").insert(key, parsed.clone());
        Ok(parsed)
    }

    fn level_scheme(&self, nuclide: &Nuclide) -> Result<Option<Arc<LevelScheme>>, ChainError> {
        let n = nuclide.erased();
        if let Some(s) = self.schemes.lock().expect("schemes lock").get(&n) {
            return Ok(s.clone());
        }
        let lv = self.raw(&DatasetKey::new(&n, DatasetKind::Levels))?;
        let scheme = match lv {
            Some(lv) => {
                let tr = self.raw(&DatasetKey::new(&n, DatasetKind::Transitions))?;
                let p = parse_level_scheme(&lv, tr.as_ref(), self.tolerance)
                    .map_err(|e| ChainError::DataUnavailable(e.to_string()))?;
                self.warn(p.warnings);
                Some(Arc::new(p.value))
            }
            None => None,
        };
        self.schemes.lock().expect("schemes lock").insert(n, scheme.clone());
        Ok(scheme)
    }

    fn prefetch(&self, nuclide: &Nuclide) -> Result<(), ChainError> {
        let keys: Vec<DatasetKey> = {
            let raw = self.raw.lock().expect("raw lock");
            DatasetKey::all_for(nuclide).into_iter().filter(|k| !raw.contains_key(k)).collect()
        };
        for (k, r) in keys.iter().zip(self.access.fetch_many(&keys, Some(&self.stats))) {
            let outcome = r.map_err(|e| ChainError::DataUnavailable(e.to_string()))?;
            self.store(*k, outcome);
        }
        Ok(())
    }
}
