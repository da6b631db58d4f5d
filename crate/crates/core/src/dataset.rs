//! Quarterly macro panel: FRED CSV ingest, alignment, and gap variables.
//!
//! Source files follow the FRED observation export layout: a header row
//! (`DATE,<SERIESID>` or `observation_date,<SERIESID>`), ISO-8601 dates and
//! decimal values, with `.` marking a missing observation. Monthly files are
//! averaged into calendar quarters; quarterly files pass through unchanged.
//!
//! Rates (fed funds, inflation, gaps) are in percent. GDP series are levels.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// FRED's missing-value sentinel.
pub const MISSING_SENTINEL: &str = ".";

/// Header of the panel CSV written by [`Dataset::to_panel_csv`].
pub const PANEL_HEADER: &str = "date,fedfunds,inflation,inflation_gap,output_gap";

/// A calendar quarter. Orders by year, then quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::Domain(format!("quarter must be 1..=4, got {quarter}")));
        }
        Ok(Self { year, quarter })
    }

    /// Quarter containing a calendar date (months 1-3 are Q1, and so on).
    pub fn from_date(date: NaiveDate) -> Self {
        Self { year: date.year(), quarter: (date.month0() / 3 + 1) as u8 }
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    pub fn succ(self) -> Self {
        if self.quarter == 4 {
            Self { year: self.year + 1, quarter: 1 }
        } else {
            Self { year: self.year, quarter: self.quarter + 1 }
        }
    }

    /// Quarter `n` steps earlier.
    pub fn back(self, n: u32) -> Self {
        let index = self.index() - i64::from(n);
        Self { year: index.div_euclid(4) as i32, quarter: (index.rem_euclid(4) + 1) as u8 }
    }

    /// Position on a continuous quarter axis (year * 4 + quarter - 1).
    pub fn index(self) -> i64 {
        i64::from(self.year) * 4 + i64::from(self.quarter) - 1
    }

    /// Year with the quarter as a fraction, e.g. 1960Q3 -> 1960.5.
    pub fn as_decimal_year(self) -> f64 {
        f64::from(self.year) + f64::from(self.quarter - 1) / 4.0
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("invalid quarter `{s}` (expected YYYYQn)"));
        let (year, quarter) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        let year = year.parse::<i32>().map_err(|_| bad())?;
        let quarter = quarter.parse::<u8>().map_err(|_| bad())?;
        Quarter::new(year, quarter).map_err(|_| bad())
    }
}

/// A named quarterly series with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    name: String,
    observations: Vec<(Quarter, f64)>,
}

impl RawSeries {
    pub fn new(name: impl Into<String>, observations: Vec<(Quarter, f64)>) -> Result<Self> {
        let name = name.into();
        for pair in observations.windows(2) {
            let (prev, next) = (pair[0].0, pair[1].0);
            if next == prev {
                return Err(Error::DuplicateObservation { series: name, quarter: next });
            }
            if next < prev {
                return Err(Error::Unordered { series: name, quarter: next });
            }
        }
        Ok(Self { name, observations })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn observations(&self) -> &[(Quarter, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first(&self) -> Option<Quarter> {
        self.observations.first().map(|(q, _)| *q)
    }

    pub fn last(&self) -> Option<Quarter> {
        self.observations.last().map(|(q, _)| *q)
    }
}

/// Dated rows of a FRED export before quarterly mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct FredObservations {
    pub name: String,
    pub observations: Vec<(NaiveDate, f64)>,
    /// Rows dropped because they carried the `.` sentinel.
    pub missing: usize,
}

/// Reads a two-column FRED CSV at its native frequency.
pub fn parse_fred_observations(text: &str, series_name: &str) -> Result<FredObservations> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_idx, header) = lines.next().ok_or_else(|| Error::parse(series_name, 1, "missing header row"))?;
    if header.split(',').count() != 2 {
        return Err(Error::parse(series_name, header_idx + 1, "header must have exactly two columns (date, value)"));
    }

    let mut observations = Vec::new();
    let mut missing = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let mut fields = line.split(',').map(str::trim);
        let (Some(date), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(series_name, line_no, "expected two fields"));
        };
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
            .map_err(|_| Error::parse(series_name, line_no, format!("malformed date `{date}`")))?;
        if value == MISSING_SENTINEL {
            missing += 1;
            continue;
        }
        let value = value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(series_name, line_no, format!("non-numeric value `{value}`")))?;
        observations.push((date, value));
    }

    Ok(FredObservations { name: series_name.to_string(), observations, missing })
}

/// Parses a quarterly FRED CSV. Each quarter may appear at most once.
pub fn parse_fred_csv(text: &str, series_name: &str) -> Result<RawSeries> {
    let parsed = parse_fred_observations(text, series_name)?;
    let observations = parsed.observations.into_iter().map(|(date, value)| (Quarter::from_date(date), value)).collect();
    RawSeries::new(series_name, observations)
}

/// Averages observations falling in the same quarter (monthly -> quarterly).
///
/// Dates must be strictly increasing; a repeated date is a duplicate
/// observation. Returns the series and the number of quarters that were
/// built from more than one observation.
pub fn aggregate_quarterly(parsed: &FredObservations) -> Result<(RawSeries, usize)> {
    let name = parsed.name.as_str();
    for pair in parsed.observations.windows(2) {
        let (prev, next) = (pair[0].0, pair[1].0);
        if next == prev {
            return Err(Error::DuplicateObservation { series: name.to_string(), quarter: Quarter::from_date(next) });
        }
        if next < prev {
            return Err(Error::Unordered { series: name.to_string(), quarter: Quarter::from_date(next) });
        }
    }

    let mut out: Vec<(Quarter, f64)> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for &(date, value) in &parsed.observations {
        let q = Quarter::from_date(date);
        match out.last_mut() {
            Some((last, sum)) if *last == q => {
                *sum += value;
                *counts.last_mut().expect("counts tracks out") += 1;
            }
            _ => {
                out.push((q, value));
                counts.push(1);
            }
        }
    }
    let mut averaged = 0;
    for ((_, sum), &n) in out.iter_mut().zip(&counts) {
        if n > 1 {
            *sum /= n as f64;
            averaged += 1;
        }
    }
    Ok((RawSeries::new(name, out)?, averaged))
}

/// How the inflation input file is turned into an inflation rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InflationMeasure {
    /// File holds a price index (e.g. CPIAUCSL); inflation is the
    /// year-over-year percent change of its quarterly average.
    #[default]
    CpiYoy,
    /// File already holds an inflation rate in percent.
    Rate,
}

impl InflationMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            InflationMeasure::CpiYoy => "cpi_yoy",
            InflationMeasure::Rate => "rate",
        }
    }
}

impl FromStr for InflationMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cpi_yoy" => Ok(InflationMeasure::CpiYoy),
            "rate" => Ok(InflationMeasure::Rate),
            other => Err(Error::Domain(format!("unknown inflation measure `{other}` (expected cpi_yoy or rate)"))),
        }
    }
}

/// Year-over-year percent change, `100 * (p_t / p_{t-4} - 1)`.
///
/// Quarters whose year-earlier value is absent are skipped.
pub fn yoy_percent_change(index: &RawSeries, name: &str) -> Result<RawSeries> {
    let lookup: BTreeMap<Quarter, f64> = index.observations().iter().copied().collect();
    let mut out = Vec::new();
    for &(q, level) in index.observations() {
        if let Some(&prior) = lookup.get(&q.back(4)) {
            if prior <= 0.0 {
                return Err(Error::Domain(format!(
                    "{}: non-positive index value {prior} at {}",
                    index.name(),
                    q.back(4)
                )));
            }
            out.push((q, 100.0 * (level / prior - 1.0)));
        }
    }
    RawSeries::new(name, out)
}

/// The two policy targets, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedTargets {
    pub r_star: f64,
    pub pi_star: f64,
}

impl Default for FixedTargets {
    fn default() -> Self {
        Self { r_star: 2.0, pi_star: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRow {
    pub date: Quarter,
    pub fedfunds: f64,
    pub inflation: f64,
    pub real_gdp: f64,
    pub potential_gdp: f64,
}

/// Quarters present in all four source series.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarterlyPanel {
    rows: Vec<PanelRow>,
}

impl QuarterlyPanel {
    pub fn rows(&self) -> &[PanelRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Inner join of the four series on quarter, ascending.
pub fn align_panel(
    fedfunds: &RawSeries,
    inflation: &RawSeries,
    real_gdp: &RawSeries,
    potential_gdp: &RawSeries,
) -> Result<QuarterlyPanel> {
    for (series, what) in [
        (fedfunds, "fed funds series"),
        (inflation, "inflation series"),
        (real_gdp, "real GDP series"),
        (potential_gdp, "potential GDP series"),
    ] {
        if series.is_empty() {
            return Err(Error::Empty(what));
        }
    }

    let as_map = |s: &RawSeries| -> BTreeMap<Quarter, f64> { s.observations().iter().copied().collect() };
    let infl = as_map(inflation);
    let gdp = as_map(real_gdp);
    let pot = as_map(potential_gdp);

    let rows: Vec<PanelRow> = fedfunds
        .observations()
        .iter()
        .filter_map(|&(date, ff)| {
            Some(PanelRow {
                date,
                fedfunds: ff,
                inflation: *infl.get(&date)?,
                real_gdp: *gdp.get(&date)?,
                potential_gdp: *pot.get(&date)?,
            })
        })
        .collect();

    if rows.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(QuarterlyPanel { rows })
}

/// Output gap as a percent deviation of real GDP from potential.
pub fn compute_output_gap(real_gdp: f64, potential_gdp: f64) -> Result<f64> {
    if !(potential_gdp > 0.0) || !potential_gdp.is_finite() || !real_gdp.is_finite() {
        return Err(Error::Domain(format!(
            "output gap needs finite GDP and positive potential GDP (got {real_gdp}, {potential_gdp})"
        )));
    }
    Ok(100.0 * (real_gdp - potential_gdp) / potential_gdp)
}

/// One quarter of model inputs and the observed policy rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: Quarter,
    pub fedfunds: f64,
    pub inflation: f64,
    pub inflation_gap: f64,
    pub output_gap: f64,
}

/// Model-ready rows plus the targets used to derive the inflation gap.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    targets: FixedTargets,
    rows: Vec<Observation>,
}

pub fn build_dataset(panel: &QuarterlyPanel, targets: FixedTargets) -> Result<Dataset> {
    if panel.is_empty() {
        return Err(Error::Empty("panel"));
    }
    let rows = panel
        .rows()
        .iter()
        .map(|r| {
            Ok(Observation {
                date: r.date,
                fedfunds: r.fedfunds,
                inflation: r.inflation,
                inflation_gap: r.inflation - targets.pi_star,
                output_gap: compute_output_gap(r.real_gdp, r.potential_gdp)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { targets, rows })
}

impl Dataset {
    /// Builds a dataset from already-derived rows. Dates must strictly increase.
    pub fn from_rows(targets: FixedTargets, rows: Vec<Observation>) -> Result<Self> {
        for pair in rows.windows(2) {
            if pair[1].date == pair[0].date {
                return Err(Error::DuplicateObservation { series: "dataset".into(), quarter: pair[1].date });
            }
            if pair[1].date < pair[0].date {
                return Err(Error::Unordered { series: "dataset".into(), quarter: pair[1].date });
            }
        }
        Ok(Self { targets, rows })
    }

    pub fn targets(&self) -> FixedTargets {
        self.targets
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn fedfunds(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.fedfunds).collect()
    }

    pub fn first_date(&self) -> Option<Quarter> {
        self.rows.first().map(|r| r.date)
    }

    pub fn last_date(&self) -> Option<Quarter> {
        self.rows.last().map(|r| r.date)
    }

    /// Rows with `[lo, hi]` dates (inclusive).
    pub fn window(&self, lo: Quarter, hi: Quarter) -> Dataset {
        Dataset {
            targets: self.targets,
            rows: self.rows.iter().filter(|r| r.date >= lo && r.date <= hi).copied().collect(),
        }
    }

    /// Serializes to the panel CSV. Values use shortest round-trip formatting,
    /// so re-parsing reproduces every value bit for bit.
    pub fn to_panel_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(PANEL_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.date, r.fedfunds, r.inflation, r.inflation_gap, r.output_gap));
        }
        out
    }

    pub fn from_panel_csv(text: &str, targets: FixedTargets) -> Result<Self> {
        const SOURCE: &str = "panel";
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Empty("panel CSV"))?;
        if header.trim() != PANEL_HEADER {
            return Err(Error::parse(SOURCE, 1, format!("expected header `{PANEL_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::parse(SOURCE, line_no, "expected 5 fields"));
            }
            let date: Quarter = fields[0].parse().map_err(|e: Error| Error::parse(SOURCE, line_no, e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                fields[i]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(SOURCE, line_no, format!("non-numeric value `{}`", fields[i])))
            };
            rows.push(Observation {
                date,
                fedfunds: num(1)?,
                inflation: num(2)?,
                inflation_gap: num(3)?,
                output_gap: num(4)?,
            });
        }
        if rows.is_empty() {
            return Err(Error::Empty("panel CSV has no data rows"));
        }
        Dataset::from_rows(targets, rows)
    }
}

/// Paths to the four FRED source files.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPaths {
    pub fedfunds: PathBuf,
    pub inflation: PathBuf,
    pub real_gdp: PathBuf,
    pub potential_gdp: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSummary {
    pub name: String,
    pub quarters: usize,
    pub missing_dropped: usize,
    pub quarters_averaged: usize,
    pub first: Option<Quarter>,
    pub last: Option<Quarter>,
}

/// What ingest did, for the run log and metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestSummary {
    pub series: Vec<SeriesSummary>,
    pub inflation_measure: InflationMeasure,
    pub targets: FixedTargets,
    pub rows: usize,
    pub first: Quarter,
    pub last: Quarter,
}

impl fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "panel_rows={}", self.rows)?;
        writeln!(f, "panel_range={}..{}", self.first, self.last)?;
        writeln!(f, "inflation_measure={}", self.inflation_measure.as_str())?;
        writeln!(f, "quarterly_aggregation=mean_of_months")?;
        writeln!(f, "r_star={}", self.targets.r_star)?;
        writeln!(f, "pi_star={}", self.targets.pi_star)?;
        writeln!(f, "output_gap=percent_deviation_from_potential")?;
        for s in &self.series {
            let range = match (s.first, s.last) {
                (Some(a), Some(b)) => format!("{a}..{b}"),
                _ => "empty".to_string(),
            };
            writeln!(
                f,
                "series {}: quarters={} range={} missing_dropped={} quarters_averaged={}",
                s.name, s.quarters, range, s.missing_dropped, s.quarters_averaged
            )?;
        }
        writeln!(f, "note={VINTAGE_CAVEAT}")
    }
}

/// Printed alongside any replication output.
pub const VINTAGE_CAVEAT: &str = "data vintage caveat: FRED series are revised over time and the \
inflation measure is a configuration choice, so estimates will not match historically \
published values exactly";

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File { path: path.to_path_buf(), source })
}

fn load_quarterly(text: &str, name: &str) -> Result<(RawSeries, SeriesSummary)> {
    let parsed = parse_fred_observations(text, name)?;
    let missing = parsed.missing;
    let (series, averaged) = aggregate_quarterly(&parsed)?;
    let summary = SeriesSummary {
        name: name.to_string(),
        quarters: series.len(),
        missing_dropped: missing,
        quarters_averaged: averaged,
        first: series.first(),
        last: series.last(),
    };
    Ok((series, summary))
}

/// Ingests the four series from in-memory CSV text.
pub fn ingest_texts(
    fedfunds: &str,
    inflation: &str,
    real_gdp: &str,
    potential_gdp: &str,
    measure: InflationMeasure,
    targets: FixedTargets,
) -> Result<(Dataset, IngestSummary)> {
    let (ff, ff_sum) = load_quarterly(fedfunds, "fedfunds")?;
    let (infl_raw, infl_sum) = load_quarterly(inflation, "inflation")?;
    let (gdp, gdp_sum) = load_quarterly(real_gdp, "real_gdp")?;
    let (pot, pot_sum) = load_quarterly(potential_gdp, "potential_gdp")?;

    let infl = match measure {
        InflationMeasure::CpiYoy => yoy_percent_change(&infl_raw, "inflation")?,
        InflationMeasure::Rate => infl_raw,
    };

    let panel = align_panel(&ff, &infl, &gdp, &pot)?;
    let dataset = build_dataset(&panel, targets)?;
    let summary = IngestSummary {
        series: vec![ff_sum, infl_sum, gdp_sum, pot_sum],
        inflation_measure: measure,
        targets,
        rows: dataset.len(),
        first: dataset.first_date().expect("dataset is nonempty"),
        last: dataset.last_date().expect("dataset is nonempty"),
    };
    Ok((dataset, summary))
}

pub fn ingest_files(
    paths: &SeriesPaths,
    measure: InflationMeasure,
    targets: FixedTargets,
) -> Result<(Dataset, IngestSummary)> {
    ingest_texts(
        &read_file(&paths.fedfunds)?,
        &read_file(&paths.inflation)?,
        &read_file(&paths.real_gdp)?,
        &read_file(&paths.potential_gdp)?,
        measure,
        targets,
    )
}
