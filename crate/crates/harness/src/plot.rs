//! Static SVG plots. Output is a pure function of the records: fixed
//! canvas, fixed float precision, generic font family.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Estimator;
use crate::error::{HarnessError, Result};
use crate::stats::{loglog_slope, median};
use crate::summary::linf_scale;
use crate::trial::TrialRecord;

pub const HEATMAP_FILE: &str = "success_heatmap.svg";
pub const L2_FILE: &str = "l2_scaling.svg";
pub const LINF_FILE: &str = "linf_ratio.svg";
pub const HISTOGRAM_FILE: &str = "contraction_histogram.svg";

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Write all four plots into `dir`; returns their paths.
pub fn emit_plots(records: &[TrialRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = [
        (HEATMAP_FILE, success_heatmap(records)),
        (L2_FILE, l2_scaling(records)),
        (LINF_FILE, linf_ratio(records)),
        (HISTOGRAM_FILE, contraction_histogram(records)),
    ];
    let mut out = Vec::new();
    for (name, svg) in plots {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

/// Success-rate color: white at 0, dark blue at 1, every channel monotone.
pub fn heat_color(rate: f64) -> (u8, u8, u8) {
    let t = rate.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    (mix(247.0, 8.0), mix(251.0, 48.0), mix(255.0, 107.0))
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(body, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
        let mut s = Self { body };
        s.text(W / 2.0, 24.0, "middle", 15.0, title);
        s
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size:.0}">{}</text>"#,
            escape(content)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}"/>"#
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="#444444" stroke-width="0.5"/>"##
        );
    }

    fn circle(&mut self, x: f64, y: f64, fill: &str) {
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{fill}"/>"#);
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn frame(&mut self, xlabel: &str, ylabel: &str) {
        let (x0, y0, x1, y1) = (LEFT, H - BOTTOM, W - RIGHT, TOP);
        self.line(x0, y0, x1, y0, "black");
        self.line(x0, y0, x0, y1, "black");
        self.text((x0 + x1) / 2.0, H - 15.0, "middle", 12.0, xlabel);
        let _ = writeln!(
            self.body,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }

    fn banner(&mut self, message: &str) {
        self.rect(LEFT + 20.0, H / 2.0 - 20.0, W - LEFT - RIGHT - 40.0, 40.0, "#fff3cd");
        self.text((LEFT + W - RIGHT) / 2.0, H / 2.0 + 5.0, "middle", 13.0, message);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data to plot coordinates, optionally in log scale.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool, px_lo: f64, px_hi: f64) -> Self {
        let (mut lo, mut hi) = values
            .map(|v| if log { v.ln() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if log { 0.5 } else { lo.abs().max(1.0) * 0.5 };
            lo -= pad;
            hi += pad;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self {
            lo,
            hi,
            log,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = if self.log { v.ln() } else { v };
        self.px_lo + (t - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..5)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                let v = if self.log { t.exp() } else { t };
                let px = self.px_lo + (self.px_hi - self.px_lo) * i as f64 / 4.0;
                (px, tick_label(v))
            })
            .collect()
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn draw_ticks(svg: &mut Svg, x: &Axis, y: &Axis) {
    for (px, label) in x.ticks() {
        svg.line(px, H - BOTTOM, px, H - BOTTOM + 5.0, "black");
        svg.text(px, H - BOTTOM + 18.0, "middle", 11.0, &label);
    }
    for (py, label) in y.ticks() {
        svg.line(LEFT - 5.0, py, LEFT, py, "black");
        svg.text(LEFT - 8.0, py + 4.0, "end", 11.0, &label);
    }
}

fn axes(xs: &[f64], ys: &[f64], xlog: bool, ylog: bool) -> (Axis, Axis) {
    (
        Axis::new(xs.iter().copied(), xlog, LEFT, W - RIGHT),
        Axis::new(ys.iter().copied(), ylog, H - BOTTOM, TOP),
    )
}

fn legend(svg: &mut Svg, row: usize, color: &str, label: &str) {
    let y = TOP + 10.0 + 18.0 * row as f64;
    svg.rect(W - RIGHT + 12.0, y - 9.0, 10.0, 10.0, color);
    svg.text(W - RIGHT + 28.0, y, "start", 11.0, label);
}

/// Records of the estimator used for single-estimator plots: GPM if
/// present, otherwise the first estimator seen.
fn primary(records: &[TrialRecord]) -> Option<Estimator> {
    if records.iter().any(|r| r.estimator == Estimator::Gpm) {
        Some(Estimator::Gpm)
    } else {
        records.first().map(|r| r.estimator)
    }
}

/// (a) `cert_rank_ok` success rate over `(n, σ index)`.
pub fn success_heatmap(records: &[TrialRecord]) -> String {
    let mut svg = Svg::new("Certificate success rate");
    let mut cells: BTreeMap<(usize, usize), (f64, usize, usize)> = BTreeMap::new();
    for r in records {
        if let Some(ok) = r.cert_rank_ok {
            let e = cells.entry((r.n, r.sigma_index)).or_insert((r.multiplier, 0, 0));
            e.1 += ok as usize;
            e.2 += 1;
        }
    }
    svg.frame("sigma / sqrt(n / ln n)", "n");
    if cells.is_empty() {
        let msg = if records.is_empty() { "no records" } else { "no certified records" };
        svg.banner(&format!("warning: {msg}"));
        return svg.finish();
    }
    let mut ns: Vec<usize> = cells.keys().map(|k| k.0).collect();
    ns.dedup();
    let mut cols: Vec<usize> = cells.keys().map(|k| k.1).collect();
    cols.sort_unstable();
    cols.dedup();
    let cw = (W - LEFT - RIGHT) / cols.len() as f64;
    let ch = (H - TOP - BOTTOM) / ns.len() as f64;
    for (&(n, idx), &(mult, ok, total)) in &cells {
        let col = cols.iter().position(|&c| c == idx).unwrap_or(0);
        let row = ns.iter().position(|&m| m == n).unwrap_or(0);
        let rate = ok as f64 / total as f64;
        let (r, g, b) = heat_color(rate);
        let x = LEFT + col as f64 * cw;
        let y = H - BOTTOM - (row + 1) as f64 * ch;
        svg.rect(x, y, cw, ch, &format!("#{r:02x}{g:02x}{b:02x}"));
        let ink = if rate > 0.5 { "white" } else { "black" };
        let _ = writeln!(
            svg.body,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" fill="{ink}">{rate:.2} @ {mult:.3}</text>"#,
            x + cw / 2.0,
            y + ch / 2.0 + 4.0
        );
    }
    for (row, n) in ns.iter().enumerate() {
        let y = H - BOTTOM - (row as f64 + 0.5) * ch;
        svg.text(LEFT - 8.0, y + 4.0, "end", 11.0, &n.to_string());
    }
    for i in 0..=4 {
        let rate = i as f64 / 4.0;
        let (r, g, b) = heat_color(rate);
        legend(&mut svg, i, &format!("#{r:02x}{g:02x}{b:02x}"), &format!("rate {rate:.2}"));
    }
    svg.finish()
}

fn group_medians<K: Ord + Copy>(
    records: &[TrialRecord],
    key: impl Fn(&TrialRecord) -> Option<(K, f64, f64)>,
) -> BTreeMap<K, Vec<(f64, f64)>> {
    let mut raw: BTreeMap<K, BTreeMap<u64, (f64, Vec<f64>)>> = BTreeMap::new();
    for r in records {
        if let Some((k, x, y)) = key(r) {
            raw.entry(k).or_default().entry(x.to_bits()).or_insert((x, Vec::new())).1.push(y);
        }
    }
    raw.into_iter()
        .map(|(k, pts)| {
            let mut v: Vec<(f64, f64)> = pts
                .into_values()
                .filter_map(|(x, ys)| median(&ys).map(|m| (x, m)))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            (k, v)
        })
        .collect()
}

fn scatter(svg: &mut Svg, series: &[(String, Vec<(f64, f64)>)], xlog: bool, ylog: bool) {
    let xs: Vec<f64> = series.iter().flat_map(|s| s.1.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.1.iter().map(|p| p.1)).collect();
    let (xa, ya) = axes(&xs, &ys, xlog, ylog);
    draw_ticks(svg, &xa, &ya);
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mapped: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (xa.map(x), ya.map(y))).collect();
        svg.polyline(&mapped, color);
        for &(x, y) in &mapped {
            svg.circle(x, y, color);
        }
        legend(svg, i, color, label);
    }
}

/// (b) Median `d₂` error against σ on log–log axes, one series per `n`,
/// with the fitted slope in the legend.
pub fn l2_scaling(records: &[TrialRecord]) -> String {
    let est = primary(records);
    let title = format!("Median l2 error vs sigma ({})", est.map_or("none", |e| e.as_str()));
    let mut svg = Svg::new(&title);
    svg.frame("sigma (log)", "median l2 error (log)");
    let groups = group_medians(records, |r| {
        (Some(r.estimator) == est && r.sigma > 0.0)
            .then_some(())
            .and(r.l2_err.filter(|e| *e > 0.0))
            .map(|e| (r.n, r.sigma, e))
    });
    if groups.is_empty() {
        svg.banner(if records.is_empty() { "warning: no records" } else { "warning: no positive errors at sigma > 0" });
        return svg.finish();
    }
    let series: Vec<(String, Vec<(f64, f64)>)> = groups
        .into_iter()
        .map(|(n, pts)| {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            let slope = loglog_slope(&x, &y).map_or("n/a".to_string(), |s| format!("{s:.3}"));
            (format!("n={n} slope {slope}"), pts)
        })
        .collect();
    scatter(&mut svg, &series, true, true);
    svg.finish()
}

/// (c) Median `ℓ∞ / (σ √(ln n / n))` against `n`, one series per estimator.
pub fn linf_ratio(records: &[TrialRecord]) -> String {
    let mut svg = Svg::new("Entrywise error ratio vs n");
    svg.frame("n", "median linf / (sigma sqrt(ln n / n))");
    let groups = group_medians(records, |r| {
        (r.sigma > 0.0)
            .then_some(())
            .and(r.linf_err)
            .map(|e| (r.estimator, r.n as f64, e / linf_scale(r.n, r.sigma)))
    });
    if groups.is_empty() {
        svg.banner(if records.is_empty() { "warning: no records" } else { "warning: no errors at sigma > 0" });
        return svg.finish();
    }
    let series: Vec<(String, Vec<(f64, f64)>)> =
        groups.into_iter().map(|(e, pts)| (e.to_string(), pts)).collect();
    scatter(&mut svg, &series, false, false);
    svg.finish()
}

/// (d) Histogram of per-trial `contraction_max`.
pub fn contraction_histogram(records: &[TrialRecord]) -> String {
    const BINS: usize = 20;
    let mut svg = Svg::new("Per-trial max contraction ratio");
    svg.frame("max contraction ratio", "trials");
    let values: Vec<f64> = records
        .iter()
        .filter_map(|r| r.contraction_max)
        .filter(|v| v.is_finite())
        .collect();
    if values.is_empty() {
        svg.banner(if records.is_empty() { "warning: no records" } else { "warning: no contraction ratios" });
        return svg.finish();
    }
    let hi = values.iter().copied().fold(1.0, f64::max);
    let mut counts = [0usize; BINS];
    for v in &values {
        let b = ((v / hi) * BINS as f64).floor() as usize;
        counts[b.min(BINS - 1)] += 1;
    }
    let peak = *counts.iter().max().unwrap_or(&1) as f64;
    let xa = Axis {
        lo: 0.0,
        hi,
        log: false,
        px_lo: LEFT,
        px_hi: W - RIGHT,
    };
    let ya = Axis {
        lo: 0.0,
        hi: peak,
        log: false,
        px_lo: H - BOTTOM,
        px_hi: TOP,
    };
    draw_ticks(&mut svg, &xa, &ya);
    let bw = (W - LEFT - RIGHT) / BINS as f64;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            let top = ya.map(c as f64);
            svg.rect(LEFT + i as f64 * bw, top, bw, H - BOTTOM - top, PALETTE[0]);
        }
    }
    let half = xa.map(0.5);
    svg.line(half, H - BOTTOM, half, TOP, "#d62728");
    legend(&mut svg, 0, "#d62728", "ratio 0.5");
    legend(&mut svg, 1, PALETTE[0], &format!("{} trials", values.len()));
    svg.finish()
}
