//! SVG scatter plot of a library: energy on x, emission probability on a log y axis.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::markers::{MarkerRegistry, MarkerShape, MarkerStyle};
use super::{write_atomic, ExportError};
use crate::library::RadionuclideLibrary;
use crate::model::Nuclide;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotWindow {
    #[serde(default = "PlotWindow::all_energies")]
    pub energy_kev: (f64, f64),
    #[serde(default = "PlotWindow::all_intensities")]
    pub intensity_percent: (f64, f64),
    #[serde(default = "PlotWindow::yes")]
    pub annotate: bool,
    #[serde(default = "PlotWindow::default_threshold")]
    pub annotation_min_intensity: f64,
}

impl Default for PlotWindow {
    fn default() -> Self {
        PlotWindow {
            energy_kev: Self::all_energies(),
            intensity_percent: Self::all_intensities(),
            annotate: true,
            annotation_min_intensity: Self::default_threshold(),
        }
    }
}

impl PlotWindow {
    fn all_energies() -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn all_intensities() -> (f64, f64) {
        (0.0, 100.0)
    }
    fn yes() -> bool {
        true
    }
    fn default_threshold() -> f64 {
        10.0
    }

    pub fn validate(&self) -> Result<(), ExportError> {
        for (axis, (lo, hi)) in [("energy_kev", self.energy_kev), ("intensity_percent", self.intensity_percent)] {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ExportError::InvalidWindow(format!("{axis} [{lo}, {hi}]")));
            }
        }
        if self.annotation_min_intensity.is_nan() {
            return Err(ExportError::InvalidWindow("annotation_min_intensity is NaN".into()));
        }
        Ok(())
    }

    pub fn contains(&self, energy: f64, intensity: f64) -> bool {
        self.energy_kev.0 <= energy
            && energy <= self.energy_kev.1
            && self.intensity_percent.0 <= intensity
            && intensity <= self.intensity_percent.1
    }

    pub fn labels(&self, energy: f64, intensity: f64) -> bool {
        self.annotate && self.contains(energy, intensity) && intensity >= self.annotation_min_intensity
    }
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 700.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 500.0;
const MARKER_R: f64 = 4.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn shape_svg(shape: MarkerShape, color: &str) -> String {
    let r = MARKER_R;
    match shape {
        MarkerShape::Circle => format!("<circle r=\"{r}\" fill=\"{color}\"/>"),
        MarkerShape::Square => {
            format!("<rect x=\"-{r}\" y=\"-{r}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>", 2.0 * r, 2.0 * r)
        }
        MarkerShape::Triangle => format!("<polygon points=\"0,-{r} {r},{r} -{r},{r}\" fill=\"{color}\"/>"),
        MarkerShape::Diamond => format!("<polygon points=\"0,-{r} {r},0 0,{r} -{r},0\" fill=\"{color}\"/>"),
        MarkerShape::Cross => {
            format!("<path d=\"M-{r},-{r}L{r},{r}M-{r},{r}L{r},-{r}\" stroke=\"{color}\" stroke-width=\"1.5\"/>")
        }
        MarkerShape::Star => {
            let pts: Vec<String> = (0..10)
                .map(|k| {
                    let rad = if k % 2 == 0 { r * 1.3 } else { r * 0.55 };
                    let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
                    format!("{:.2},{:.2}", rad * a.cos(), rad * a.sin())
                })
                .collect();
            format!("<polygon points=\"{}\" fill=\"{color}\"/>", pts.join(" "))
        }
    }
}

fn marker_group(class: &str, n: &Nuclide, style: &MarkerStyle, x: f64, y: f64, extra: &str) -> String {
    format!(
        "<g class=\"{class}\" data-nuclide=\"{}\" data-shape=\"{}\" data-color=\"{}\"{extra} transform=\"translate({x:.2},{y:.2})\">{}</g>\n",
        esc(&n.to_string()),
        style.shape,
        esc(&style.color),
        shape_svg(style.shape, &esc(&style.color))
    )
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

/// Deterministic SVG document; entries without an intensity cannot be placed and are omitted.
pub fn render_svg(
    lib: &RadionuclideLibrary,
    markers: &MarkerRegistry,
    windows: &[PlotWindow],
) -> Result<String, ExportError> {
    for w in windows {
        w.validate()?;
    }
    let default_windows = [PlotWindow::default()];
    let windows = if windows.is_empty() { &default_windows[..] } else { windows };
    let points: Vec<(&Nuclide, f64, f64)> = lib
        .entries
        .iter()
        .filter_map(|e| e.intensity_percent.filter(|i| *i > 0.0).map(|i| (&e.nuclide, e.energy.kev, i)))
        .collect();

    let (mut emin, mut emax) =
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if points.is_empty() {
        (emin, emax) = (0.0, 100.0);
    }
    let pad = ((emax - emin) * 0.05).max(1.0);
    let (x0, x1) = ((emin - pad).max(0.0), emax + pad);
    let (imin, imax) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.2), b.max(p.2)));
    let (mut d0, mut d1) = if points.is_empty() { (-3.0, 2.0) } else { (imin.log10().floor(), imax.log10().ceil()) };
    if d1 <= d0 {
        d1 = d0 + 1.0;
    }
    d0 = d0.min(d1 - 1.0);
    let sx = |e: f64| LEFT + (e - x0) / (x1 - x0) * (RIGHT - LEFT);
    let sy = |i: f64| BOTTOM - (i.log10() - d0) / (d1 - d0) * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    let _ = writeln!(
        s,
        "<text class=\"title\" x=\"{LEFT}\" y=\"24\" font-size=\"14\">{} library ({} entries)</text>",
        lib.radiation.name(),
        lib.entries.len()
    );
    let _ = writeln!(s, "<g class=\"axes\" stroke=\"#000\" fill=\"none\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\"/></g>", RIGHT - LEFT, BOTTOM - TOP);

    s.push_str("<g class=\"x-ticks\">\n");
    let step = nice_step(x1 - x0);
    let mut t = (x0 / step).ceil() * step;
    while t <= x1 {
        let x = sx(t);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{BOTTOM}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#000\"/><text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>", BOTTOM + 5.0, BOTTOM + 18.0, t);
        t += step;
    }
    s.push_str("</g>\n<g class=\"y-ticks\">\n");
    let mut d = d0;
    while d <= d1 {
        let y = sy(10f64.powf(d));
        let _ = writeln!(s, "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"#000\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">1e{}</text>", LEFT - 5.0, LEFT - 8.0, y + 4.0, d);
        d += 1.0;
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        "<text class=\"x-title\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">Energy (keV)</text>",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 40.0
    );
    let _ = writeln!(s, "<text class=\"y-title\" transform=\"translate(20,{}) rotate(-90)\" text-anchor=\"middle\">Emission probability (%)</text>", (TOP + BOTTOM) / 2.0);

    let mut legend: Vec<&Nuclide> = Vec::new();
    s.push_str("<g class=\"markers\">\n");
    for (n, e, i) in &points {
        let style = markers.style_for(n);
        let extra = format!(" data-energy=\"{e}\" data-intensity=\"{i}\"");
        s.push_str(&marker_group("marker", n, &style, sx(*e), sy(*i), &extra));
        if !legend.contains(n) {
            legend.push(n);
        }
    }
    s.push_str("</g>\n<g class=\"labels\">\n");
    for (_, e, i) in &points {
        if windows.iter().any(|w| w.labels(*e, *i)) {
            let _ = writeln!(
                s,
                "<text class=\"label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{e}</text>",
                sx(*e),
                sy(*i) - 7.0
            );
        }
    }
    s.push_str("</g>\n<g class=\"legend\">\n");
    for (k, n) in legend.iter().enumerate() {
        let style = markers.style_for(n);
        let y = TOP + 10.0 + 16.0 * k as f64;
        s.push_str(&marker_group("legend-marker", n, &style, RIGHT + 20.0, y, ""));
        let _ = writeln!(
            s,
            "<text class=\"legend-label\" x=\"{}\" y=\"{:.2}\">{}</text>",
            RIGHT + 32.0,
            y + 4.0,
            esc(&style.label)
        );
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn plot_library(
    lib: &RadionuclideLibrary,
    markers: &MarkerRegistry,
    windows: &[PlotWindow],
    path: &Path,
) -> Result<(), ExportError> {
    write_atomic(path, render_svg(lib, markers, windows)?.as_bytes())
}
