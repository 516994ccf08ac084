//! Self-contained SVG plots of trace files: line panels with optional log
//! axes and mean ± one-standard-deviation bands across seed replicates.
//! No external renderer — output is written directly as SVG markup with
//! fixed-precision coordinates, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::harness::trace;
use crate::{Error, Result};

/// Top-level plot description (TOML).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub out: PathBuf,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(rename = "panel")]
    pub panels: Vec<PanelSpec>,
}

/// One panel: a single trace column drawn for several series.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PanelSpec {
    pub title: String,
    /// Trace column to plot against the iteration axis.
    pub column: String,
    #[serde(default = "default_log_y")]
    pub log_y: bool,
    #[serde(default)]
    pub log_x: bool,
    #[serde(rename = "series")]
    pub series: Vec<SeriesSpec>,
}

fn default_log_y() -> bool {
    true
}

/// One line: multiple files are treated as seed replicates and reduced to
/// a mean line with a ±1 std band over their common iterations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub label: String,
    pub files: Vec<PathBuf>,
}

impl PlotSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let spec: PlotSpec = crate::harness::config::load_toml(path)?;
        if spec.panels.is_empty() {
            return Err(Error::Config(format!(
                "{}: a plot needs at least one [[panel]]",
                path.display()
            )));
        }
        Ok(spec)
    }
}

/// Renders the spec and writes the SVG to `spec.out`.
pub fn render_to_file(spec: &PlotSpec) -> Result<PathBuf> {
    let svg = render(spec)?;
    if let Some(parent) = spec.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(&spec.out, svg)
        .map_err(|e| Error::Io(format!("writing {}: {e}", spec.out.display())))?;
    Ok(spec.out.clone())
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];
// Interpolated rather than written inline: `"#` inside an r#-string would
// close the literal.
const BG: &str = "#ffffff";
const GRID: &str = "#dddddd";
const FRAME: &str = "#333333";
const PANEL_W: f64 = 440.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;
const GAP: f64 = 18.0;

/// Reduced series data: per common iteration, mean and ±1 sample std
/// across replicate files.
struct SeriesData {
    label: String,
    points: Vec<(f64, f64, f64, f64)>, // (iter, mean, lo, hi)
    banded: bool,
}

pub fn render(spec: &PlotSpec) -> Result<String> {
    let mut panels = Vec::new();
    for p in &spec.panels {
        let mut series = Vec::new();
        for s in &p.series {
            series.push(load_series(p, s)?);
        }
        panels.push((p, series));
    }

    let cols = panels.len().min(2).max(1);
    let rows = panels.len().div_ceil(cols);
    let title_h = if spec.title.is_some() { 30.0 } else { 0.0 };
    let width = cols as f64 * (PANEL_W + GAP) - GAP + 20.0;
    let height = title_h + rows as f64 * (PANEL_H + GAP) - GAP + 16.0;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    svg.push('\n');
    let _ = writeln!(svg, r#"<rect width="{width:.0}" height="{height:.0}" fill="{BG}"/>"#);
    if let Some(t) = &spec.title {
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="20" font-size="15" font-weight="bold" text-anchor="middle">{}</text>"#,
            width / 2.0,
            escape(t)
        );
    }
    for (i, (p, series)) in panels.iter().enumerate() {
        let ox = 10.0 + (i % cols) as f64 * (PANEL_W + GAP);
        let oy = title_h + 8.0 + (i / cols) as f64 * (PANEL_H + GAP);
        render_panel(&mut svg, p, series, ox, oy)?;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn load_series(panel: &PanelSpec, spec: &SeriesSpec) -> Result<SeriesData> {
    if spec.files.is_empty() {
        return Err(Error::Config(format!(
            "series `{}` in panel `{}` lists no files",
            spec.label, panel.title
        )));
    }
    let mut per_file: Vec<Vec<(u64, f64)>> = Vec::new();
    for path in &spec.files {
        let t = trace::read_trace(path)?;
        let vals = t.column_values(&panel.column).ok_or_else(|| {
            Error::Config(format!(
                "{}: no column `{}`; available: {}",
                path.display(),
                panel.column,
                t.columns.join(", ")
            ))
        })?;
        let pairs: Vec<(u64, f64)> = t
            .rows
            .iter()
            .zip(vals)
            .filter_map(|(r, v)| v.map(|v| (r.iter, v)))
            .collect();
        per_file.push(pairs);
    }
    // Reduce over iterations present in every replicate (traces from the
    // same config share cadence, so normally this is all of them).
    let first = &per_file[0];
    let mut points = Vec::new();
    for &(iter, _) in first {
        let mut vals = Vec::with_capacity(per_file.len());
        for f in &per_file {
            match f.iter().find(|(i, _)| *i == iter) {
                Some((_, v)) => vals.push(*v),
                None => break,
            }
        }
        if vals.len() != per_file.len() {
            continue;
        }
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let std = if vals.len() < 2 {
            0.0
        } else {
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        points.push((iter as f64, mean, mean - std, mean + std));
    }
    Ok(SeriesData { label: spec.label.clone(), points, banded: per_file.len() > 1 })
}

struct Scale {
    min: f64,
    max: f64,
    log: bool,
}

impl Scale {
    /// Unit position of `v` in the scale (0 = min edge, 1 = max edge).
    fn unit(&self, v: f64) -> f64 {
        if self.max <= self.min {
            return 0.5;
        }
        if self.log {
            (v.max(self.min).ln() - self.min.ln()) / (self.max.ln() - self.min.ln())
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.max <= self.min {
            return vec![self.min];
        }
        if self.log {
            let lo = self.min.log10().ceil() as i64;
            let hi = self.max.log10().floor() as i64;
            if lo > hi {
                let mid = (self.min * self.max).sqrt();
                return vec![self.min, mid, self.max];
            }
            let count = (hi - lo + 1) as usize;
            let stride = count.div_ceil(8).max(1) as i64;
            return (lo..=hi)
                .step_by(stride as usize)
                .map(|k| 10f64.powi(k as i32))
                .collect();
        }
        let raw = (self.max - self.min) / 4.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut t = (self.min / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.max + 1e-9 * step {
            // Snap values like 0.30000000000000004 back to the grid.
            out.push((t / step).round() * step);
            t += step;
        }
        out
    }
}

fn render_panel(
    svg: &mut String,
    panel: &PanelSpec,
    series: &[SeriesData],
    ox: f64,
    oy: f64,
) -> Result<()> {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let left = ox + MARGIN_L;
    let top = oy + MARGIN_T;

    // Range over the drawable values; log panels ignore non-positive
    // values entirely (and fall back to linear when none are positive).
    let mut log_y = panel.log_y;
    let y_vals: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|p| [p.1, p.2, p.3]))
        .filter(|v| v.is_finite() && (!log_y || *v > 0.0))
        .collect();
    if panel.log_y && y_vals.is_empty() {
        log_y = false;
    }
    let y_vals: Vec<f64> = if log_y {
        y_vals
    } else {
        series
            .iter()
            .flat_map(|s| s.points.iter().flat_map(|p| [p.1, p.2, p.3]))
            .filter(|v| v.is_finite())
            .collect()
    };
    let x_vals: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .filter(|v| !panel.log_x || *v > 0.0)
        .collect();

    let (ymin, ymax) = padded_range(&y_vals, log_y);
    let (xmin, xmax) = padded_range(&x_vals, panel.log_x);
    let xs = Scale { min: xmin, max: xmax, log: panel.log_x };
    let ys = Scale { min: ymin, max: ymax, log: log_y };

    let px = |u: f64| left + u * plot_w;
    let py = |u: f64| top + (1.0 - u) * plot_h;

    // Frame, title, gridlines, ticks.
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}</text>"#,
        ox + PANEL_W / 2.0,
        oy + 18.0,
        escape(&panel.title)
    );
    for t in ys.ticks() {
        let y = py(ys.unit(t));
        let _ = writeln!(
            svg,
            r#"<line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="{GRID}"/>"#,
            px(0.0),
            px(1.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="10" text-anchor="end">{}</text>"#,
            px(0.0) - 5.0,
            y + 3.0,
            tick_label(t)
        );
    }
    for t in xs.ticks() {
        let x = px(xs.unit(t));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="{GRID}"/>"#,
            py(0.0),
            py(1.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.3}" y="{:.3}" font-size="10" text-anchor="middle">{}</text>"#,
            py(0.0) + 14.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{:.3}" y="{:.3}" width="{plot_w:.3}" height="{plot_h:.3}" fill="none" stroke="{FRAME}"/>"#,
        left, top
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="middle">iteration</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 32.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.3} {:.3})">{}</text>"#,
        ox + 16.0,
        top + plot_h / 2.0,
        ox + 16.0,
        top + plot_h / 2.0,
        escape(&panel.column)
    );

    // Series: band polygon first, then the mean line on top.
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let drawable: Vec<&(f64, f64, f64, f64)> = s
            .points
            .iter()
            .filter(|p| {
                p.1.is_finite()
                    && (!log_y || p.1 > 0.0)
                    && (!panel.log_x || p.0 > 0.0)
            })
            .collect();
        if drawable.is_empty() {
            continue;
        }
        if s.banded {
            let mut pts = String::new();
            for p in &drawable {
                let lo = if log_y { p.2.max(ymin) } else { p.2 };
                let _ = write!(pts, "{:.3},{:.3} ", px(xs.unit(p.0)), py(ys.unit(lo)));
            }
            for p in drawable.iter().rev() {
                let hi = if log_y { p.3.max(ymin) } else { p.3 };
                let _ = write!(pts, "{:.3},{:.3} ", px(xs.unit(p.0)), py(ys.unit(hi)));
            }
            let _ = writeln!(
                svg,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                pts.trim_end()
            );
        }
        let mut pts = String::new();
        for p in &drawable {
            let _ = write!(pts, "{:.3},{:.3} ", px(xs.unit(p.0)), py(ys.unit(p.1)));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            pts.trim_end()
        );
    }

    // Legend, top-right inside the frame.
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let ly = top + 12.0 + si as f64 * 15.0;
        let lx = left + plot_w - 130.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.3}" y1="{ly:.3}" x2="{:.3}" y2="{ly:.3}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.3}" y="{:.3}" font-size="10">{}</text>"#,
            lx + 23.0,
            ly + 3.0,
            escape(&s.label)
        );
    }
    Ok(())
}

/// Data range padded 5% on each side (multiplicatively for log scales);
/// sensible fallbacks for empty or single-valued data.
fn padded_range(vals: &[f64], log: bool) -> (f64, f64) {
    let (mut lo, mut hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
        (l.min(v), h.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return if log { (0.1, 10.0) } else { (0.0, 1.0) };
    }
    if lo == hi {
        if log {
            return (lo / 2.0, hi * 2.0);
        }
        return (lo - 0.5, hi + 0.5);
    }
    if log {
        let pad = (hi / lo).powf(0.05);
        lo /= pad;
        hi *= pad;
    } else {
        let pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        // Trim float noise from nice-step arithmetic.
        let s = format!("{v:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
