//! Marker styles shared by every plot in a run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExportError;
use crate::model::Nuclide;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerShape {
    Circle,
    Square,
    Triangle,
    Diamond,
    Cross,
    Star,
}

impl MarkerShape {
    pub const ALL: [MarkerShape; 6] = [
        MarkerShape::Circle,
        MarkerShape::Square,
        MarkerShape::Triangle,
        MarkerShape::Diamond,
        MarkerShape::Cross,
        MarkerShape::Star,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MarkerShape::Circle => "circle",
            MarkerShape::Square => "square",
            MarkerShape::Triangle => "triangle",
            MarkerShape::Diamond => "diamond",
            MarkerShape::Cross => "cross",
            MarkerShape::Star => "star",
        }
    }
}

impl fmt::Display for MarkerShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarkerShape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let l = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|m| m.name() == l).ok_or_else(|| format!("unknown marker shape `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkerStyle {
    pub shape: MarkerShape,
    pub color: String,
    pub label: String,
}

pub const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Style derived from the canonical id alone.
pub fn fallback_style(n: &Nuclide) -> MarkerStyle {
    let h = fnv1a(n.to_string().as_bytes());
    MarkerStyle {
        shape: MarkerShape::ALL[(h / PALETTE.len() as u64 % MarkerShape::ALL.len() as u64) as usize],
        color: PALETTE[(h % PALETTE.len() as u64) as usize].to_string(),
        label: n.label(),
    }
}

fn valid_color(c: &str) -> bool {
    let hex =
        c.strip_prefix('#').is_some_and(|h| (h.len() == 3 || h.len() == 6) && h.chars().all(|x| x.is_ascii_hexdigit()));
    hex || (!c.is_empty() && c.chars().all(|x| x.is_ascii_alphabetic()))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerRegistry {
    styles: BTreeMap<Nuclide, MarkerStyle>,
}

impl MarkerRegistry {
    pub fn insert(&mut self, n: Nuclide, style: MarkerStyle) {
        self.styles.insert(n, style);
    }

    pub fn len(&self) -> usize {
        self.styles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.styles.is_empty()
    }

    /// Registered style for the exact id, then the ground-state id, then the fallback palette.
    pub fn style_for(&self, n: &Nuclide) -> MarkerStyle {
        self.styles.get(n).or_else(|| self.styles.get(&n.erased())).cloned().unwrap_or_else(|| fallback_style(n))
    }

    /// CSV with columns `nuclide,shape,color,label`; an empty label falls back to the nuclide label.
    pub fn parse(text: &str) -> Result<Self, ExportError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| ExportError::Parse { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["nuclide", "shape", "color", "label"] {
            return Err(ExportError::Parse {
                line: 1,
                message: "marker registry header must be nuclide,shape,color,label".into(),
            });
        }
        let mut reg = MarkerRegistry::default();
        for rec in r.records() {
            let rec = rec.map_err(|e| ExportError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |message: String| ExportError::Parse { line, message };
            let n: Nuclide = rec[0].parse().map_err(|e| bad(format!("nuclide: {e}")))?;
            let shape: MarkerShape = rec[1].parse().map_err(bad)?;
            if !valid_color(&rec[2]) {
                return Err(bad(format!("invalid color `{}`", &rec[2])));
            }
            let label = if rec[3].is_empty() { n.label() } else { rec[3].to_string() };
            reg.insert(n, MarkerStyle { shape, color: rec[2].to_string(), label });
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self, ExportError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_overrides_fallback() {
        let reg = MarkerRegistry::parse("nuclide,shape,color,label\n226Ra,diamond,#aa0000,Radium\n").unwrap();
        let ra: Nuclide = "226ra".parse().unwrap();
        assert_eq!(reg.style_for(&ra).shape, MarkerShape::Diamond);
        assert_eq!(reg.style_for(&ra).label, "Radium");
        let k: Nuclide = "40k".parse().unwrap();
        assert_eq!(reg.style_for(&k), fallback_style(&k));
    }

    #[test]
    fn fallback_is_deterministic() {
        let n: Nuclide = "234pa@m".parse().unwrap();
        assert_eq!(fallback_style(&n), fallback_style(&n));
        assert!(PALETTE.contains(&fallback_style(&n).color.as_str()));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(MarkerRegistry::parse("nuclide,shape,color,label\n226ra,hexagon,red,\n").is_err());
        assert!(MarkerRegistry::parse("nuclide,shape,color,label\n226ra,circle,\"r\"\"d\",\n").is_err());
        assert!(MarkerRegistry::parse("id,shape\n").is_err());
    }
}
