//! Screened dataset retrieval: absence registry, disk cache, then the remote endpoint.

mod access;
mod cache;
mod registry;
mod remote;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{parse_nuclide_id, Nuclide, RadiationType};

pub use access::{AccessConfig, AccessError, DataAccess, FetchOutcome, FetchStats, StatsSnapshot, MAX_RETRIES};
pub use cache::DiskCache;
pub use registry::{AbsenceRegistry, RegistryError};
pub use remote::{
    EndpointAdapter, HttpReply, RemoteAdapter, RemoteRequest, Transport, UreqTransport, DEFAULT_BASE_URL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetKind {
    DecayRads(RadiationType),
    Levels,
    Transitions,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 8] = [
        DatasetKind::DecayRads(RadiationType::Alpha),
        DatasetKind::DecayRads(RadiationType::BetaMinus),
        DatasetKind::DecayRads(RadiationType::BetaPlusEc),
        DatasetKind::DecayRads(RadiationType::Gamma),
        DatasetKind::DecayRads(RadiationType::Electron),
        DatasetKind::DecayRads(RadiationType::Xray),
        DatasetKind::Levels,
        DatasetKind::Transitions,
    ];

    pub fn code(&self) -> String {
        match self {
            DatasetKind::DecayRads(r) => format!("dr-{}", r.code()),
            DatasetKind::Levels => "lv".into(),
            DatasetKind::Transitions => "tr".into(),
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "lv" => Some(DatasetKind::Levels),
            "tr" => Some(DatasetKind::Transitions),
            _ => RadiationType::from_code(code.strip_prefix("dr-")?).map(DatasetKind::DecayRads),
        }
    }
}

/// A (level-erased nuclide, dataset kind) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DatasetKey {
    pub nuclide: Nuclide,
    pub kind: DatasetKind,
}

impl DatasetKey {
    pub fn new(nuclide: &Nuclide, kind: DatasetKind) -> Self {
        DatasetKey { nuclide: nuclide.erased(), kind }
    }

    pub fn all_for(nuclide: &Nuclide) -> Vec<DatasetKey> {
        DatasetKind::ALL.iter().map(|k| DatasetKey::new(nuclide, *k)).collect()
    }

    /// `225ac_dr-a`: the key with the colon mapped for file names.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.nuclide.stem(), self.kind.code())
    }
}

impl fmt::Display for DatasetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.nuclide.stem(), self.kind.code())
    }
}

impl FromStr for DatasetKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, k) = s.split_once(':').ok_or_else(|| format!("malformed dataset key `{s}`"))?;
        let nuclide = parse_nuclide_id(n).map_err(|e| e.to_string())?;
        let kind = DatasetKind::from_code(k).ok_or_else(|| format!("unknown dataset kind `{k}`"))?;
        Ok(DatasetKey::new(&nuclide, kind))
    }
}

impl Serialize for DatasetKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DatasetKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Cache,
    Remote,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub key: DatasetKey,
    pub body: String,
    pub origin: Origin,
}

/// True when a response body carries at least one data row below its header.
pub fn body_has_rows(body: &str) -> bool {
    body.lines().skip(1).any(|l| !l.trim().is_empty())
}
