//! Peak qualification against a generated library.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::library::{LibraryEntry, RadionuclideLibrary};

#[derive(Debug, Error)]
pub enum PeakError {
    #[error("cannot read {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub centroid_kev: f64,
    pub net_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PeakList {
    pub peaks: Vec<Peak>,
}

impl PeakList {
    /// CSV `centroid_kev[,net_area]`; a non-numeric first row is taken as a header.
    pub fn parse(text: &str) -> Result<Self, PeakError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut peaks = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec
                .map_err(|e| PeakError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let bad = |message: String| PeakError::Parse { line, message };
            let first = rec.get(0).unwrap_or_default();
            let centroid = match first.parse::<f64>() {
                Ok(c) => c,
                Err(_) if k == 0 => continue,
                Err(_) => return Err(bad(format!("centroid is not a number: `{first}`"))),
            };
            if !centroid.is_finite() || centroid < 0.0 {
                return Err(bad(format!("centroid must be finite and nonnegative: {centroid}")));
            }
            if rec.len() > 2 {
                return Err(bad(format!("expected at most 2 columns, found {}", rec.len())));
            }
            let net_area = match rec.get(1).filter(|s| !s.is_empty()) {
                Some(s) => Some(s.parse::<f64>().map_err(|_| bad(format!("net area is not a number: `{s}`")))?),
                None => None,
            };
            peaks.push(Peak { centroid_kev: centroid, net_area });
        }
        Ok(PeakList { peaks })
    }

    pub fn load(path: &Path) -> Result<Self, PeakError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| PeakError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub delta_kev: f64,
    pub entry: LibraryEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakMatch {
    pub peak: Peak,
    pub candidates: Vec<Candidate>,
    pub unassigned: bool,
}

/// Candidates within `tol_kev` of one centroid, closest first, then most intense.
pub fn candidates_for(centroid_kev: f64, lib: &RadionuclideLibrary, tol_kev: f64) -> Vec<Candidate> {
    let mut c: Vec<Candidate> = lib
        .entries
        .iter()
        .filter(|e| (e.energy.kev - centroid_kev).abs() <= tol_kev)
        .map(|e| Candidate { delta_kev: e.energy.kev - centroid_kev, entry: e.clone() })
        .collect();
    c.sort_by(|a, b| {
        a.delta_kev.abs().total_cmp(&b.delta_kev.abs()).then_with(|| {
            let x = a.entry.intensity_percent.unwrap_or(f64::NEG_INFINITY);
            let y = b.entry.intensity_percent.unwrap_or(f64::NEG_INFINITY);
            y.total_cmp(&x)
        })
    });
    c
}

pub fn qualify_peaks(peaks: &PeakList, lib: &RadionuclideLibrary, tol_kev: f64) -> Vec<PeakMatch> {
    peaks
        .peaks
        .iter()
        .map(|p| {
            let candidates = candidates_for(p.centroid_kev, lib, tol_kev);
            PeakMatch { peak: *p, unassigned: candidates.is_empty(), candidates }
        })
        .collect()
}

/// Plain-text table: one block per peak.
pub fn render_matches(matches: &[PeakMatch]) -> String {
    let mut s = String::new();
    for m in matches {
        s.push_str(&format!("peak {} keV", m.peak.centroid_kev));
        if let Some(a) = m.peak.net_area {
            s.push_str(&format!(" (area {a})"));
        }
        if m.unassigned {
            s.push_str(": unassigned\n");
            continue;
        }
        s.push('\n');
        for c in &m.candidates {
            let i = c.entry.intensity_percent.map_or("?".to_string(), |i| i.to_string());
            s.push_str(&format!(
                "  {} {} keV {}% (delta {:+.3} keV)\n",
                c.entry.nuclide, c.entry.energy.kev, i, c.delta_kev
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EnergyValue, RadiationType};

    fn entry(n: &str, e: f64, i: f64) -> LibraryEntry {
        LibraryEntry {
            nuclide: n.parse().unwrap(),
            radiation: RadiationType::Gamma,
            energy: EnergyValue::exact(e),
            intensity_percent: Some(i),
            intensity_uncertainty: 0.0,
            half_life: None,
            parent_level_kev: 0.0,
            flags: Default::default(),
        }
    }

    #[test]
    fn ranking() {
        let lib = RadionuclideLibrary::new(
            RadiationType::Gamma,
            vec![
                entry("235u", 185.713, 57.0),
                entry("226ra", 186.211, 3.555),
                entry("223ra", 186.211, 9.0),
                entry("40k", 1460.82, 10.66),
            ],
        );
        let m = qualify_peaks(&PeakList { peaks: vec![Peak { centroid_kev: 186.0, net_area: None }] }, &lib, 0.5);
        let ids: Vec<String> = m[0].candidates.iter().map(|c| c.entry.nuclide.to_string()).collect();
        assert_eq!(ids, ["223ra", "226ra", "235u"]);
    }

    #[test]
    fn empty_library_leaves_peaks_unassigned() {
        let lib = RadionuclideLibrary::new(RadiationType::Gamma, vec![]);
        let peaks = PeakList::parse("centroid_kev,net_area\n100,5\n200\n").unwrap();
        assert_eq!(peaks.peaks.len(), 2);
        assert!(qualify_peaks(&peaks, &lib, 1.0).iter().all(|m| m.unassigned));
    }

    #[test]
    fn bad_peak_rows() {
        assert!(PeakList::parse("1,2\nabc\n").is_err());
        assert!(PeakList::parse("-5\n").is_err());
        assert!(PeakList::parse("1,2,3\n").is_err());
    }
}
