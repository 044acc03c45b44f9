//! CSV, HTML, XML, TeX and JSON tables.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{write_atomic, ExportError};
use crate::library::{EntryFlag, LibraryEntry, PruneBounds, RadionuclideLibrary};
use crate::model::{EnergyValue, HalfLife, Nuclide, RadiationType};

pub const CSV_COLUMNS: [&str; 9] = [
    "nuclide",
    "radiation",
    "energy_kev",
    "energy_unc_kev",
    "intensity_pct",
    "intensity_unc_pct",
    "half_life_s",
    "parent_level_kev",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportFormat {
    Csv,
    Html,
    Xml,
    Tex,
    Json,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 5] =
        [ExportFormat::Csv, ExportFormat::Html, ExportFormat::Xml, ExportFormat::Tex, ExportFormat::Json];

    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Html => "html",
            ExportFormat::Xml => "xml",
            ExportFormat::Tex => "tex",
            ExportFormat::Json => "json",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let l = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|f| f.extension() == l).ok_or_else(|| ExportError::UnsupportedFormat(s.to_string()))
    }
}

fn half_life_text(h: Option<HalfLife>) -> String {
    match h {
        None => String::new(),
        Some(HalfLife::Stable) => "stable".into(),
        Some(HalfLife::Finite { seconds, .. }) => seconds.to_string(),
    }
}

fn flags_text(flags: &BTreeSet<EntryFlag>) -> String {
    flags.iter().map(|f| f.code()).collect::<Vec<_>>().join(";")
}

/// Text cells of one entry in `CSV_COLUMNS` order.
pub fn entry_cells(e: &LibraryEntry) -> [String; 9] {
    [
        e.nuclide.to_string(),
        e.radiation.code().to_string(),
        e.energy.kev.to_string(),
        e.energy.uncertainty_kev.to_string(),
        e.intensity_percent.map(|i| i.to_string()).unwrap_or_default(),
        e.intensity_uncertainty.to_string(),
        half_life_text(e.half_life),
        e.parent_level_kev.to_string(),
        flags_text(&e.flags),
    ]
}

fn render_csv(lib: &RadionuclideLibrary) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for e in &lib.entries {
        w.write_record(entry_cells(e)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn escape_markup(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn render_html(lib: &RadionuclideLibrary) -> String {
    let mut s = String::from("<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>");
    let _ = write!(s, "{} library</title></head>\n<body>\n<table>\n<thead><tr>", lib.radiation.name());
    for c in CSV_COLUMNS {
        let _ = write!(s, "<th>{c}</th>");
    }
    s.push_str("</tr></thead>\n<tbody>\n");
    for e in &lib.entries {
        s.push_str("<tr>");
        for c in entry_cells(e) {
            let _ = write!(s, "<td>{}</td>", escape_markup(&c));
        }
        s.push_str("</tr>\n");
    }
    s.push_str("</tbody>\n</table>\n</body>\n</html>\n");
    s
}

fn render_xml(lib: &RadionuclideLibrary) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<library radiation=\"{}\" count=\"{}\">", lib.radiation.code(), lib.entries.len());
    for e in &lib.entries {
        s.push_str("  <entry");
        for (k, v) in CSV_COLUMNS.iter().zip(entry_cells(e)) {
            let _ = write!(s, " {k}=\"{}\"", escape_markup(&v));
        }
        s.push_str("/>\n");
    }
    s.push_str("</library>\n");
    s
}

fn escape_tex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '&' | '%' | '$' | '#' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            _ => out.push(c),
        }
    }
    out
}

fn tex_nuclide(n: &Nuclide) -> String {
    let sup = match n.level() {
        crate::model::LevelSpec::Ground => n.mass_number().to_string(),
        crate::model::LevelSpec::Metastable(1) => format!("{}m", n.mass_number()),
        crate::model::LevelSpec::Metastable(m) => format!("{}m{m}", n.mass_number()),
        crate::model::LevelSpec::Energy(_) => n.mass_number().to_string(),
    };
    let mut s = format!("\\textsuperscript{{{sup}}}{}", n.element());
    if let crate::model::LevelSpec::Energy(e) = n.level() {
        let _ = write!(s, " ({e} keV)");
    }
    s
}

fn render_tex(lib: &RadionuclideLibrary) -> String {
    let mut s = String::from("\\begin{tabular}{llrrrrrrl}\n\\hline\n");
    let head: Vec<String> = CSV_COLUMNS.iter().map(|c| escape_tex(c)).collect();
    let _ = writeln!(s, "{} \\\\", head.join(" & "));
    s.push_str("\\hline\n");
    for e in &lib.entries {
        let mut cells = entry_cells(e).map(|c| escape_tex(&c));
        cells[0] = tex_nuclide(&e.nuclide);
        let _ = writeln!(s, "{} \\\\", cells.join(" & "));
    }
    s.push_str("\\hline\n\\end{tabular}\n");
    s
}

#[derive(Serialize)]
struct JsonView<'a> {
    radiation: RadiationType,
    count: usize,
    bounds: Option<&'a PruneBounds>,
    entries: &'a [LibraryEntry],
}

fn render_json(lib: &RadionuclideLibrary) -> String {
    let v = JsonView {
        radiation: lib.radiation,
        count: lib.entries.len(),
        bounds: lib.bounds.as_ref(),
        entries: &lib.entries,
    };
    let mut s = serde_json::to_string_pretty(&v).expect("library serializes");
    s.push('\n');
    s
}

/// Deterministic text of `lib` in `format`.
pub fn render_table(lib: &RadionuclideLibrary, format: ExportFormat) -> String {
    match format {
        ExportFormat::Csv => render_csv(lib),
        ExportFormat::Html => render_html(lib),
        ExportFormat::Xml => render_xml(lib),
        ExportFormat::Tex => render_tex(lib),
        ExportFormat::Json => render_json(lib),
    }
}

pub fn export_table(lib: &RadionuclideLibrary, format: ExportFormat, path: &Path) -> Result<(), ExportError> {
    write_atomic(path, render_table(lib, format).as_bytes())
}

fn parse_f64(line: u64, col: &str, s: &str) -> Result<f64, ExportError> {
    s.trim().parse::<f64>().map_err(|_| ExportError::Parse { line, message: format!("{col}: not a number: `{s}`") })
}

/// Inverse of the CSV export; `radiation` is used when the table has no rows.
pub fn parse_csv(text: &str, radiation: RadiationType) -> Result<RadionuclideLibrary, ExportError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| ExportError::Parse { line: 1, message: e.to_string() })?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(ExportError::Parse { line: 1, message: format!("unexpected header: {:?}", headers) });
    }
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec =
            rec.map_err(|e| ExportError::Parse { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| ExportError::Parse { line, message };
        let nuclide: Nuclide = rec[0].parse().map_err(|e| bad(format!("nuclide: {e}")))?;
        let rad = RadiationType::from_code(&rec[1]).ok_or_else(|| bad(format!("radiation: `{}`", &rec[1])))?;
        let energy =
            EnergyValue::new(parse_f64(line, "energy_kev", &rec[2])?, parse_f64(line, "energy_unc_kev", &rec[3])?);
        let intensity_percent = match rec[4].trim() {
            "" => None,
            s => Some(parse_f64(line, "intensity_pct", s)?),
        };
        let half_life = match rec[6].trim() {
            "" => None,
            "stable" => Some(HalfLife::Stable),
            s => Some(
                HalfLife::seconds(parse_f64(line, "half_life_s", s)?, 0.0)
                    .ok_or_else(|| bad(format!("half_life_s: `{s}`")))?,
            ),
        };
        let mut flags = BTreeSet::new();
        for f in rec[8].split(';').filter(|f| !f.is_empty()) {
            flags.insert(EntryFlag::from_code(f).ok_or_else(|| bad(format!("flags: unknown `{f}`")))?);
        }
        entries.push(LibraryEntry {
            nuclide,
            radiation: rad,
            energy,
            intensity_percent,
            intensity_uncertainty: parse_f64(line, "intensity_unc_pct", &rec[5])?,
            half_life,
            parent_level_kev: parse_f64(line, "parent_level_kev", &rec[7])?,
            flags,
        });
    }
    let radiation = entries.first().map_or(radiation, |e| e.radiation);
    Ok(RadionuclideLibrary::new(radiation, entries))
}

pub fn read_csv(path: &Path, radiation: RadiationType) -> Result<RadionuclideLibrary, ExportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text, radiation)
}
