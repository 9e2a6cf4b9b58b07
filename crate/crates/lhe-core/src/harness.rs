//! Contrast/similarity trade-off measurements.
//!
//! For each value of the SPL parameter, the sweep runs the baseline method
//! and its PSNR- and SSIM-optimized variants, then records similarity with
//! the input (PSNR, SSIM) against a contrast proxy: the total local energy,
//! i.e. the sum over pixels of the windowed variance. Records serialize to
//! CSV and to a small self-contained SVG chart.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::opt::{maximize_ssim, maximize_ssim_from, OptimizerConfig};
use crate::ssim::SsimEngine;
use crate::stark::{stark_bounds, StarkConfig};
use crate::window::local_variance;
use crate::{mse, Error, GrayImage, SsimConfig, WindowSpec};

/// The three methods compared by the sweep, in fixed report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SweepMethod {
    Stark,
    StarkMseOpt,
    StarkSsimOpt,
}

impl SweepMethod {
    pub const ALL: [SweepMethod; 3] = [
        SweepMethod::Stark,
        SweepMethod::StarkMseOpt,
        SweepMethod::StarkSsimOpt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepMethod::Stark => "stark",
            SweepMethod::StarkMseOpt => "stark_mse_opt",
            SweepMethod::StarkSsimOpt => "stark_ssim_opt",
        }
    }
}

/// One sweep point: a method at one parameter value, with its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub method: SweepMethod,
    pub alpha: f64,
    pub window: usize,
    pub psnr_db: f64,
    pub ssim: f64,
    pub local_energy: f64,
    pub iterations_used: usize,
}

/// Sum over all pixels of the windowed variance; a scale-matched proxy for
/// how much local contrast the image carries.
pub fn total_local_energy(image: &GrayImage, win: WindowSpec) -> f64 {
    local_variance(image, win).values().iter().sum()
}

/// Runs the three methods over the given parameter values and collects one
/// record per (method, alpha), ordered by method then alpha.
///
/// The SSIM-optimized leg reports the better of the configured ascent and,
/// if that ever fell short, an ascent started at the baseline itself — the
/// baseline is a feasible point, so the reported SSIM never drops below it.
pub fn sweep(
    image: &GrayImage,
    alphas: &[f64],
    win: WindowSpec,
    ocfg: &OptimizerConfig,
    scfg: &SsimConfig,
) -> Result<Vec<SweepRecord>, Error> {
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("alpha list is empty".into()));
    }
    ocfg.validate()?;
    win.check_fits(image.width(), image.height())?;
    let engine = SsimEngine::new(image, scfg)?;

    let mut sorted: Vec<f64> = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut baseline_rows = Vec::new();
    let mut mse_rows = Vec::new();
    let mut ssim_rows = Vec::new();

    for &alpha in &sorted {
        let cfg = StarkConfig::new(alpha, win)?;
        let bounds = stark_bounds(image, &cfg);
        let baseline = bounds.upper_image();

        let record = |method: SweepMethod, out: &GrayImage, iters: usize| {
            Ok::<SweepRecord, Error>(SweepRecord {
                method,
                alpha,
                window: win.half_width(),
                psnr_db: mse::psnr(image, out)?,
                ssim: engine.ssim_of(out)?,
                local_energy: total_local_energy(out, win),
                iterations_used: iters,
            })
        };

        let base_row = record(SweepMethod::Stark, &baseline, 0)?;

        let mse_out = mse::min_mse_solution(image, &bounds);
        mse_rows.push(record(SweepMethod::StarkMseOpt, &mse_out, 0)?);

        let (out, trace) = maximize_ssim(image, &bounds, ocfg, scfg)?;
        let (out, trace) = if trace.final_ssim() >= base_row.ssim {
            (out, trace)
        } else {
            // Rare fallback: restart at the baseline, which the monotone
            // ascent can only improve upon.
            maximize_ssim_from(image, baseline, &bounds, ocfg, scfg)?
        };
        ssim_rows.push(record(SweepMethod::StarkSsimOpt, &out, trace.accepted_steps())?);

        baseline_rows.push(base_row);
    }

    let mut records = baseline_rows;
    records.extend(mse_rows);
    records.extend(ssim_rows);
    Ok(records)
}

pub const CSV_HEADER: &str = "method,alpha,window,psnr_db,ssim,local_energy,iterations_used";

/// Renders records as CSV with fixed six-decimal numeric formatting and a
/// fixed row order, so equal inputs give byte-identical text.
pub fn csv_string(records: &[SweepRecord]) -> String {
    let mut rows: Vec<&SweepRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.window.cmp(&b.window))
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{},{:.6},{:.6},{:.6},{}",
            r.method.name(),
            r.alpha,
            r.window,
            r.psnr_db,
            r.ssim,
            r.local_energy,
            r.iterations_used
        );
    }
    out
}

/// Writes the CSV to `destination` and returns the text.
pub fn emit_csv(records: &[SweepRecord], destination: impl AsRef<Path>) -> io::Result<String> {
    let text = csv_string(records);
    fs::write(destination, &text)?;
    Ok(text)
}

/// Vertical axis of the trade-off chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityAxis {
    Psnr,
    Ssim,
}

impl SimilarityAxis {
    fn label(&self) -> &'static str {
        match self {
            SimilarityAxis::Psnr => "psnr (dB)",
            SimilarityAxis::Ssim => "ssim",
        }
    }

    fn value(&self, r: &SweepRecord) -> f64 {
        match self {
            SimilarityAxis::Psnr => r.psnr_db,
            SimilarityAxis::Ssim => r.ssim,
        }
    }
}

const CHART_WIDTH: f64 = 800.0;
const CHART_HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 52.0;
const METHOD_COLORS: [&str; 3] = ["#d62728", "#1f77b4", "#2ca02c"];

struct AxisScale {
    lo: f64,
    hi: f64,
}

impl AxisScale {
    /// Pads the data range slightly; degenerate ranges get a unit of slack.
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn to_fraction(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

/// Renders the trade-off chart: local energy on the horizontal axis, the
/// chosen similarity on the vertical one, one polyline per method with the
/// parameter value annotated at each vertex.
///
/// Infinite PSNR values (identical images) are drawn at the top of the
/// finite range so the chart stays well-formed; the CSV keeps the exact
/// values.
pub fn svg_string(records: &[SweepRecord], axis: SimilarityAxis) -> Result<String, Error> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to plot".into()));
    }
    let mut rows: Vec<&SweepRecord> = records.iter().collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.window.cmp(&b.window))
    });

    let max_finite_sim = rows
        .iter()
        .map(|r| axis.value(r))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let ceiling = if max_finite_sim.is_finite() {
        max_finite_sim
    } else {
        1.0
    };
    let display = |v: f64| if v.is_finite() { v } else { ceiling };

    let xs = AxisScale::from_values(rows.iter().map(|r| r.local_energy));
    let ys = AxisScale::from_values(rows.iter().map(|r| display(axis.value(r))));

    let plot_w = CHART_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = CHART_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |v: f64| MARGIN_LEFT + xs.to_fraction(v) * plot_w;
    let py = |v: f64| MARGIN_TOP + (1.0 - ys.to_fraction(v)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" viewBox="0 0 {CHART_WIDTH} {CHART_HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect width="{CHART_WIDTH}" height="{CHART_HEIGHT}" fill="#ffffff"/>"##
    );

    // Axes.
    let x0 = MARGIN_LEFT;
    let x1 = CHART_WIDTH - MARGIN_RIGHT;
    let y0 = CHART_HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        svg,
        r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="#000000"/>"##
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}" stroke="#000000"/>"##
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xs.lo + f * (xs.hi - xs.lo);
        let yv = ys.lo + f * (ys.hi - ys.lo);
        let xp = MARGIN_LEFT + f * plot_w;
        let yp = MARGIN_TOP + (1.0 - f) * plot_h;
        let _ = writeln!(
            svg,
            r##"<line x1="{xp:.2}" y1="{y0:.2}" x2="{xp:.2}" y2="{:.2}" stroke="#000000"/>"##,
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{xp:.2}" y="{:.2}" font-size="11" text-anchor="middle">{xv:.0}</text>"##,
            y0 + 18.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{yp:.2}" x2="{x0:.2}" y2="{yp:.2}" stroke="#000000"/>"##,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{yv:.3}</text>"##,
            x0 - 8.0,
            yp + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">total local energy</text>"##,
        (x0 + x1) / 2.0,
        CHART_HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"##,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        axis.label()
    );

    for (mi, method) in SweepMethod::ALL.iter().enumerate() {
        let points: Vec<&&SweepRecord> =
            rows.iter().filter(|r| r.method == *method).collect();
        if points.is_empty() {
            continue;
        }
        let color = METHOD_COLORS[mi];
        if points.len() >= 2 {
            let path: Vec<String> = points
                .iter()
                .map(|r| {
                    format!(
                        "{:.2},{:.2}",
                        px(r.local_energy),
                        py(display(axis.value(r)))
                    )
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for r in &points {
            let cx = px(r.local_energy);
            let cy = py(display(axis.value(r)));
            let _ = writeln!(
                svg,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">α={}</text>"#,
                cx + 5.0,
                cy - 5.0,
                r.alpha
            );
        }
        // Legend.
        let ly = MARGIN_TOP + 18.0 * mi as f64 + 10.0;
        let lx = CHART_WIDTH - MARGIN_RIGHT + 14.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{color}"/>"#,
            ly - 10.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="12">{}</text>"#,
            lx + 18.0,
            method.name()
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the chart to `destination` and returns the markup.
pub fn emit_plot(
    records: &[SweepRecord],
    axis: SimilarityAxis,
    destination: impl AsRef<Path>,
) -> Result<String, Error> {
    let text = svg_string(records, axis)?;
    fs::write(destination, &text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(text)
}
