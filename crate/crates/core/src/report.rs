//! Actual-versus-estimated comparisons, divergence episodes, and chart output.

use std::fmt::Write as _;
use std::path::Path;

use crate::dataset::{Dataset, Quarter};
use crate::error::{Error, Result};
use crate::mlp::Network;
use crate::ols::RegressionResult;
use crate::taylor::{rule_rate, RuleParams};

/// Default absolute-error threshold (percentage points) for divergences.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 2.0;

pub const COMPARISON_HEADER: &str = "date,model,actual,estimated,error";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub date: Quarter,
    pub actual: f64,
    pub estimated: f64,
    /// `actual - estimated`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSeries {
    pub model_name: String,
    pub rows: Vec<EstimateRow>,
}

impl EstimateSeries {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn mse(&self) -> f64 {
        self.rows.iter().map(|r| r.error * r.error).sum::<f64>() / self.rows.len() as f64
    }
}

/// Something that maps (inflation, output gap) to a policy rate.
#[derive(Debug, Clone, Copy)]
pub enum Estimator<'a> {
    Rule(RuleParams),
    /// Reduced-form coefficients `[alpha, theta_pi, beta_y]`.
    Ols([f64; 3]),
    Network(&'a Network),
}

impl<'a> Estimator<'a> {
    pub fn from_fit(fit: &RegressionResult) -> Self {
        Estimator::Ols([fit.alpha(), fit.theta_pi(), fit.beta_y()])
    }

    fn estimate(&self, pi: f64, gap: f64) -> f64 {
        match self {
            Estimator::Rule(p) => rule_rate(pi, gap, p),
            Estimator::Ols([a, t, b]) => a + t * pi + b * gap,
            Estimator::Network(net) => net.predict(pi, gap),
        }
    }
}

pub fn build_series(dataset: &Dataset, estimator: Estimator<'_>, model_name: &str) -> Result<EstimateSeries> {
    if let Estimator::Network(net) = estimator {
        net.validate()?;
    }
    let rows = dataset
        .rows()
        .iter()
        .map(|r| {
            let estimated = estimator.estimate(r.inflation, r.output_gap);
            EstimateRow { date: r.date, actual: r.fedfunds, estimated, error: r.fedfunds - estimated }
        })
        .collect();
    Ok(EstimateSeries { model_name: model_name.to_string(), rows })
}

/// A maximal run of consecutive quarters whose |error| exceeds the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEpisode {
    pub start: Quarter,
    pub end: Quarter,
    pub quarters: usize,
    pub peak_abs_error: f64,
}

impl DivergenceEpisode {
    /// True if any quarter of the episode falls in `year`.
    pub fn touches_year(&self, year: i32) -> bool {
        self.start.year() <= year && year <= self.end.year()
    }
}

pub fn find_divergences(series: &EstimateSeries, threshold: f64) -> Result<Vec<DivergenceEpisode>> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("divergence threshold must be positive, got {threshold}")));
    }
    let mut episodes: Vec<DivergenceEpisode> = Vec::new();
    let mut open = false;
    for row in &series.rows {
        let abs = row.error.abs();
        if abs > threshold {
            match episodes.last_mut() {
                Some(ep) if open && ep.end.succ() == row.date => {
                    ep.end = row.date;
                    ep.quarters += 1;
                    ep.peak_abs_error = ep.peak_abs_error.max(abs);
                }
                _ => episodes.push(DivergenceEpisode {
                    start: row.date,
                    end: row.date,
                    quarters: 1,
                    peak_abs_error: abs,
                }),
            }
            open = true;
        } else {
            open = false;
        }
    }
    Ok(episodes)
}

/// Tidy comparison table, one line per (series, date).
pub fn comparison_csv(series: &[EstimateSeries]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for s in series {
        for r in &s.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.date, s.model_name, r.actual, r.estimated, r.error);
        }
    }
    out
}

pub fn emit_csv(series: &[EstimateSeries], path: &Path) -> Result<()> {
    write_file(path, &comparison_csv(series))
}

/// Reads [`comparison_csv`] output back into series, in first-seen model order.
pub fn parse_comparison_csv(text: &str) -> Result<Vec<EstimateSeries>> {
    const SOURCE: &str = "comparison";
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == COMPARISON_HEADER => {}
        _ => return Err(Error::parse(SOURCE, 1, format!("expected header `{COMPARISON_HEADER}`"))),
    }
    let mut out: Vec<EstimateSeries> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(Error::parse(SOURCE, line_no, "expected 5 fields"));
        }
        let date: Quarter = f[0].parse().map_err(|e: Error| Error::parse(SOURCE, line_no, e.to_string()))?;
        let num = |i: usize| {
            f[i].parse::<f64>().map_err(|_| Error::parse(SOURCE, line_no, format!("non-numeric value `{}`", f[i])))
        };
        let row = EstimateRow { date, actual: num(2)?, estimated: num(3)?, error: num(4)? };
        match out.iter_mut().find(|s| s.model_name == f[1]) {
            Some(s) => {
                if s.rows.last().is_some_and(|last| last.date >= date) {
                    return Err(Error::parse(SOURCE, line_no, "dates must increase within a model"));
                }
                s.rows.push(row);
            }
            None => out.push(EstimateSeries { model_name: f[1].to_string(), rows: vec![row] }),
        }
    }
    Ok(out)
}

pub fn divergences_csv(episodes: &[(String, Vec<DivergenceEpisode>)], threshold: f64) -> String {
    let mut out = String::from("model,threshold,start,end,quarters,peak_abs_error\n");
    for (model, eps) in episodes {
        for e in eps {
            let _ = writeln!(out, "{model},{threshold},{},{},{},{}", e.start, e.end, e.quarters, e.peak_abs_error);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub title: String,
    pub width: u32,
    pub height: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { title: String::new(), width: 960, height: 480 }
    }
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Tick step of 1, 2, or 5 times a power of ten giving roughly `target` ticks.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64, target: f64) -> (f64, f64, Vec<f64>) {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let step = nice_step(span, target);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let values = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, values)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart of the shared actual series plus one estimate line per model.
///
/// The first series supplies the actual line. Output depends only on the
/// inputs; coordinates are printed with two decimals.
pub fn render_svg(series: &[EstimateSeries], options: &SvgOptions) -> Result<String> {
    let first = series.first().filter(|s| !s.rows.is_empty()).ok_or(Error::Empty("no series to plot"))?;
    if series.iter().any(|s| s.rows.is_empty()) {
        return Err(Error::Empty("cannot plot an empty series"));
    }

    let all_rows = || series.iter().flat_map(|s| s.rows.iter());
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in all_rows() {
        let x = r.date.as_decimal_year();
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        for y in [r.actual, r.estimated] {
            if y.is_finite() {
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
    }
    if !y_lo.is_finite() {
        return Err(Error::Domain("no finite values to plot".into()));
    }
    let (x_lo_t, x_hi_t, x_ticks) = ticks(x_lo, x_hi, 8.0);
    let (y_lo_t, y_hi_t, y_ticks) = ticks(y_lo, y_hi, 6.0);

    let (w, h) = (f64::from(options.width), f64::from(options.height));
    let plot_w = (w - MARGIN_LEFT - MARGIN_RIGHT).max(10.0);
    let plot_h = (h - MARGIN_TOP - MARGIN_BOTTOM).max(10.0);
    let sx = |x: f64| MARGIN_LEFT + (x - x_lo_t) / (x_hi_t - x_lo_t) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_hi_t - y) / (y_hi_t - y_lo_t) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        options.width, options.height, options.width, options.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"#);
    if !options.title.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="24.00" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            escape(&options.title)
        );
    }

    // axes and grid
    let _ = writeln!(out, r##"<g stroke="#cccccc" stroke-width="0.5">"##);
    for &y in &y_ticks {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            MARGIN_LEFT,
            sy(y),
            MARGIN_LEFT + plot_w,
            sy(y)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#333333"/>"##
    );
    for &y in &y_ticks {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            sy(y) + 4.0,
            format_tick(y)
        );
    }
    for &x in &x_ticks {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333333"/>"##,
            sx(x),
            MARGIN_TOP + plot_h,
            sx(x),
            MARGIN_TOP + plot_h + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(x),
            MARGIN_TOP + plot_h + 18.0,
            format_tick(x)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="16.00" y="{:.2}" text-anchor="middle" transform="rotate(-90 16.00 {:.2})">percent</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    let polyline = |out: &mut String, points: &mut dyn Iterator<Item = (f64, f64)>, color: &str, width: f64| {
        let pts: Vec<String> =
            points.filter(|(_, y)| y.is_finite()).map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{width:.2}" points="{}"/>"#,
            pts.join(" ")
        );
    };

    polyline(&mut out, &mut first.rows.iter().map(|r| (r.date.as_decimal_year(), r.actual)), "#000000", 1.6);
    for (i, s) in series.iter().enumerate() {
        polyline(
            &mut out,
            &mut s.rows.iter().map(|r| (r.date.as_decimal_year(), r.estimated)),
            PALETTE[i % PALETTE.len()],
            1.2,
        );
    }

    // legend
    let lx = MARGIN_LEFT + plot_w + 16.0;
    let mut entries = vec![("actual".to_string(), "#000000")];
    entries.extend(series.iter().enumerate().map(|(i, s)| (s.model_name.clone(), PALETTE[i % PALETTE.len()])));
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_TOP + 10.0 + i as f64 * 18.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2.00"/>"#,
            lx + 22.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 28.0, y + 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn format_tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

pub fn emit_svg(series: &[EstimateSeries], path: &Path, options: &SvgOptions) -> Result<()> {
    let svg = render_svg(series, options)?;
    write_file(path, &svg)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::File { path: path.to_path_buf(), source })
}
