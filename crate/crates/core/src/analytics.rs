//! Corpus statistics and report emission.
//!
//! Four report families: CIA-combination incidence tables (full 27-row
//! and condensed 9-row C×I forms), score histograms at 0.1 granularity
//! with an integer-grouped display layer, classic-vs-enhanced score
//! comparison, and per-CVE forecast series. Emission is CSV plus one JSON
//! summary; identical corpora produce byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::batch;
use crate::ingest::{Corpus, Platform, VulnRecord};
use crate::scoring::{score_classic, score_enhanced, EnhancedVector, ScoreBreakdown};
use crate::temporal::{forecast_series, ForecastInput, ForecastPoint, TemporalError, Timeline};
use crate::vector::CiaImpact;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("empty subset: no records match the requested filter")]
    EmptySubset,
    #[error("unresolved scope for {count} record(s): {ids}", count = .0.len(), ids = .0.join(", "))]
    UnresolvedScope(Vec<String>),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which platform slice of the corpus to analyze.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatformFilter {
    Android,
    Ios,
    All,
}

impl PlatformFilter {
    pub fn matches(self, platform: Platform) -> bool {
        match self {
            PlatformFilter::Android => platform == Platform::Android,
            PlatformFilter::Ios => platform == Platform::Ios,
            PlatformFilter::All => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlatformFilter::Android => "android",
            PlatformFilter::Ios => "ios",
            PlatformFilter::All => "all",
        }
    }

    pub fn from_str_token(s: &str) -> Option<Self> {
        match s {
            "android" => Some(PlatformFilter::Android),
            "ios" => Some(PlatformFilter::Ios),
            "all" => Some(PlatformFilter::All),
            _ => None,
        }
    }
}

/// Paper-style display order: Complete, Partial, None.
const CIA_DISPLAY_ORDER: [CiaImpact; 3] =
    [CiaImpact::Complete, CiaImpact::Partial, CiaImpact::None];

/// One incidence row. `a` is `None` in the condensed C×I form.
#[derive(Debug, Clone, PartialEq)]
pub struct CiaIncidenceRow {
    pub c: CiaImpact,
    pub i: CiaImpact,
    pub a: Option<CiaImpact>,
    pub count: usize,
    /// Exact share in percent.
    pub share: f64,
}

impl CiaIncidenceRow {
    /// Mixed-precision rendering: whole percent at or above 1%, three
    /// decimals below, plain `0%` for empty combinations.
    pub fn display_share(&self) -> String {
        if self.count == 0 {
            "0%".to_string()
        } else if self.share >= 1.0 {
            format!("{}%", (self.share + 0.5).floor() as u32)
        } else {
            format!("{:.3}%", self.share)
        }
    }

    fn key(&self) -> String {
        match self.a {
            Some(a) => format!("{}/{}/{}", self.c.letter(), self.i.letter(), a.letter()),
            None => format!("{}/{}", self.c.letter(), self.i.letter()),
        }
    }
}

/// Incidence of CIA combinations over one corpus subset.
#[derive(Debug, Clone, PartialEq)]
pub struct CiaIncidenceTable {
    pub rows: Vec<CiaIncidenceRow>,
    pub total: usize,
    pub condensed: bool,
}

impl CiaIncidenceTable {
    pub fn row(
        &self,
        c: CiaImpact,
        i: CiaImpact,
        a: Option<CiaImpact>,
    ) -> Option<&CiaIncidenceRow> {
        self.rows.iter().find(|r| r.c == c && r.i == i && r.a == a)
    }
}

/// Count CIA combinations: the full 27-row triple table, or the 9-row
/// condensed C×I table that ignores availability.
pub fn cia_incidence(
    records: &[&VulnRecord],
    condensed: bool,
) -> Result<CiaIncidenceTable, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptySubset);
    }
    let total = records.len();
    let mut counts: BTreeMap<(CiaImpact, CiaImpact, Option<CiaImpact>), usize> = BTreeMap::new();
    for record in records {
        let v = &record.vector;
        let key = if condensed {
            (v.c, v.i, None)
        } else {
            (v.c, v.i, Some(v.a))
        };
        *counts.entry(key).or_insert(0) += 1;
    }

    let mut rows = Vec::new();
    for c in CIA_DISPLAY_ORDER {
        for i in CIA_DISPLAY_ORDER {
            let a_values: &[Option<CiaImpact>] = if condensed {
                &[None]
            } else {
                &[
                    Some(CiaImpact::Complete),
                    Some(CiaImpact::Partial),
                    Some(CiaImpact::None),
                ]
            };
            for &a in a_values {
                let count = counts.get(&(c, i, a)).copied().unwrap_or(0);
                rows.push(CiaIncidenceRow {
                    c,
                    i,
                    a,
                    count,
                    share: 100.0 * count as f64 / total as f64,
                });
            }
        }
    }
    Ok(CiaIncidenceTable {
        rows,
        total,
        condensed,
    })
}

/// Which score a histogram counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Base,
    Impact,
    Exploitability,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [
        ScoreKind::Base,
        ScoreKind::Impact,
        ScoreKind::Exploitability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::Base => "base",
            ScoreKind::Impact => "impact",
            ScoreKind::Exploitability => "exploitability",
        }
    }

    fn pick(self, b: &ScoreBreakdown) -> f64 {
        match self {
            ScoreKind::Base => b.base,
            ScoreKind::Impact => b.impact,
            ScoreKind::Exploitability => b.exploitability,
        }
    }
}

/// Score distribution at 0.1 granularity. Bins are (tenths, count),
/// sorted, zero bins omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreHistogram {
    pub kind: ScoreKind,
    pub bins: Vec<(u32, usize)>,
    pub total: usize,
}

impl ScoreHistogram {
    /// Counts regrouped to integer scores 0..=10 for display.
    pub fn integer_buckets(&self) -> [usize; 11] {
        let mut buckets = [0usize; 11];
        for &(tenths, count) in &self.bins {
            buckets[((tenths + 5) / 10) as usize] += count;
        }
        buckets
    }

    pub fn count_at(&self, score: f64) -> usize {
        let tenths = (score * 10.0).round() as u32;
        self.bins
            .iter()
            .find(|(t, _)| *t == tenths)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }
}

fn histogram_from_scores(kind: ScoreKind, scores: impl Iterator<Item = f64>) -> ScoreHistogram {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut total = 0;
    for score in scores {
        *counts.entry((score * 10.0).round() as u32).or_insert(0) += 1;
        total += 1;
    }
    ScoreHistogram {
        kind,
        bins: counts.into_iter().collect(),
        total,
    }
}

/// Histogram of one re-scored sub-score over a subset.
pub fn score_histogram(
    records: &[&VulnRecord],
    kind: ScoreKind,
) -> Result<ScoreHistogram, AnalyticsError> {
    if records.is_empty() {
        return Err(AnalyticsError::EmptySubset);
    }
    let breakdowns = batch::map_slice(records, |r| score_classic(&r.vector));
    Ok(histogram_from_scores(
        kind,
        breakdowns.iter().map(|b| kind.pick(b)),
    ))
}

/// One record scored both ways.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub cve_id: String,
    pub scope: crate::scoring::VulnScope,
    pub classic: ScoreBreakdown,
    pub enhanced: ScoreBreakdown,
    /// enhanced.base − classic.base (rounded scores).
    pub delta: f64,
}

/// Classic vs enhanced scoring over a subset, with before/after base
/// histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub classic_hist: ScoreHistogram,
    pub enhanced_hist: ScoreHistogram,
    /// Records whose rounded base score changed.
    pub changed: usize,
}

/// Re-score every record classically and with the scope-split weights.
/// Every record must carry a resolved scope.
pub fn compare_scoring(records: &[&VulnRecord]) -> Result<ComparisonReport, AnalyticsError> {
    let unresolved: Vec<String> = records
        .iter()
        .filter(|r| r.scope.is_none())
        .map(|r| r.cve_id.clone())
        .collect();
    if !unresolved.is_empty() {
        return Err(AnalyticsError::UnresolvedScope(unresolved));
    }

    let rows: Vec<ComparisonRow> = batch::map_slice(records, |record| {
        let scope = record.scope.expect("checked above");
        let classic = score_classic(&record.vector);
        let enhanced = score_enhanced(&EnhancedVector {
            base: record.vector,
            scope,
        });
        ComparisonRow {
            cve_id: record.cve_id.clone(),
            scope,
            delta: enhanced.base - classic.base,
            classic,
            enhanced,
        }
    });

    let classic_hist = histogram_from_scores(ScoreKind::Base, rows.iter().map(|r| r.classic.base));
    let enhanced_hist =
        histogram_from_scores(ScoreKind::Base, rows.iter().map(|r| r.enhanced.base));
    let changed = rows
        .iter()
        .filter(|r| r.enhanced.base != r.classic.base)
        .count();
    Ok(ComparisonReport {
        rows,
        classic_hist,
        enhanced_hist,
        changed,
    })
}

/// Forecast series for one CVE.
#[derive(Debug, Clone, PartialEq)]
pub struct CveForecast {
    pub cve_id: String,
    /// Critical points in the timeline (total, not per-month).
    pub points: usize,
    pub series: Vec<ForecastPoint>,
}

/// Forecast series for a whole subset, grouped by critical-point count.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastReport {
    pub horizon: u32,
    pub forecasts: Vec<CveForecast>,
    /// Mean temporal exploitability per month, keyed by point-count
    /// class (`0`, `1`, `2`, `3+`).
    pub group_means: BTreeMap<String, Vec<f64>>,
}

fn point_class(points: usize) -> String {
    match points {
        0 => "0".to_string(),
        1 => "1".to_string(),
        2 => "2".to_string(),
        _ => "3+".to_string(),
    }
}

/// Per-CVE forecast export. Records without a stored timeline fall back
/// to an event-free one (the virtual registration point applies).
pub fn temporal_report(
    records: &[&VulnRecord],
    corpus: &Corpus,
    horizon: u32,
    lambda_floor: f64,
) -> Result<ForecastReport, AnalyticsError> {
    let forecasts: Vec<Result<CveForecast, TemporalError>> = batch::map_slice(records, |record| {
        let fallback;
        let timeline = match corpus.timeline(&record.cve_id) {
            Some(t) => t,
            None => {
                fallback = Timeline::empty(record.cve_id.clone(), record.published);
                &fallback
            }
        };
        let input = ForecastInput::Classic(record.vector);
        let series = forecast_series(&input, timeline, horizon, lambda_floor)?;
        Ok(CveForecast {
            cve_id: record.cve_id.clone(),
            points: timeline.points().len(),
            series,
        })
    });
    let forecasts = forecasts.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for forecast in &forecasts {
        let entry = sums
            .entry(point_class(forecast.points))
            .or_insert_with(|| (vec![0.0; horizon as usize], 0));
        for (slot, point) in entry.0.iter_mut().zip(&forecast.series) {
            *slot += point.exploitability;
        }
        entry.1 += 1;
    }
    let group_means = sums
        .into_iter()
        .map(|(class, (totals, n))| (class, totals.into_iter().map(|t| t / n as f64).collect()))
        .collect();

    Ok(ForecastReport {
        horizon,
        forecasts,
        group_means,
    })
}

/// Records whose re-scored classic base disagrees with the published
/// base: `(cve_id, published, rescored)`.
pub fn rescore_mismatches(records: &[&VulnRecord]) -> Vec<(String, f64, f64)> {
    let rescored = batch::map_slice(records, |r| score_classic(&r.vector).base);
    records
        .iter()
        .zip(rescored)
        .filter(|(r, b)| r.nvd_base_score != *b)
        .map(|(r, b)| (r.cve_id.clone(), r.nvd_base_score, b))
        .collect()
}

/// Everything one `analyze` run produces.
#[derive(Debug)]
pub struct ReportBundle {
    pub platform: PlatformFilter,
    pub record_count: usize,
    pub incidence: CiaIncidenceTable,
    pub condensed_nvd: CiaIncidenceTable,
    /// Condensed table over EDB-linked records (those with at least one
    /// PoC or exploit point); absent when no record qualifies.
    pub condensed_edb: Option<CiaIncidenceTable>,
    pub histograms: Vec<ScoreHistogram>,
    pub comparison: ComparisonReport,
    pub forecast: ForecastReport,
}

fn has_exploit_event(corpus: &Corpus, cve_id: &str) -> bool {
    corpus.timeline(cve_id).is_some_and(|t| {
        t.points().iter().any(|p| {
            matches!(
                p.kind,
                crate::temporal::CriticalPointKind::ProofOfConcept
                    | crate::temporal::CriticalPointKind::Exploit
            )
        })
    })
}

/// Run every report over one platform slice of the corpus.
pub fn analyze(
    corpus: &Corpus,
    platform: PlatformFilter,
    horizon: u32,
    lambda_floor: f64,
) -> Result<ReportBundle, AnalyticsError> {
    let subset: Vec<&VulnRecord> = corpus
        .records
        .iter()
        .filter(|r| platform.matches(r.platform))
        .collect();
    if subset.is_empty() {
        return Err(AnalyticsError::EmptySubset);
    }

    let incidence = cia_incidence(&subset, false)?;
    let condensed_nvd = cia_incidence(&subset, true)?;
    let edb_subset: Vec<&VulnRecord> = subset
        .iter()
        .copied()
        .filter(|r| has_exploit_event(corpus, &r.cve_id))
        .collect();
    let condensed_edb = if edb_subset.is_empty() {
        None
    } else {
        Some(cia_incidence(&edb_subset, true)?)
    };

    let histograms = ScoreKind::ALL
        .into_iter()
        .map(|kind| score_histogram(&subset, kind))
        .collect::<Result<Vec<_>, _>>()?;
    let comparison = compare_scoring(&subset)?;
    let forecast = temporal_report(&subset, corpus, horizon, lambda_floor)?;

    Ok(ReportBundle {
        platform,
        record_count: subset.len(),
        incidence,
        condensed_nvd,
        condensed_edb,
        histograms,
        comparison,
        forecast,
    })
}

fn write_incidence_csv(path: &Path, table: &CiaIncidenceTable) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["c", "i", "a", "count", "share", "exact_share"])?;
    for row in &table.rows {
        w.write_record([
            row.c.letter().to_string(),
            row.i.letter().to_string(),
            row.a.map(|a| a.letter().to_string()).unwrap_or_default(),
            row.count.to_string(),
            row.display_share(),
            format!("{:.6}", row.share),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_histogram_csv(path: &Path, hist: &ScoreHistogram) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["score", "count"])?;
    for &(tenths, count) in &hist.bins {
        w.write_record([format!("{:.1}", tenths as f64 / 10.0), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_comparison_csv(path: &Path, report: &ComparisonReport) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "cve_id",
        "scope",
        "classic_impact",
        "classic_exploitability",
        "classic_base",
        "enhanced_impact",
        "enhanced_exploitability",
        "enhanced_base",
        "delta",
    ])?;
    for row in &report.rows {
        w.write_record([
            row.cve_id.clone(),
            row.scope.as_str().to_string(),
            format!("{:.1}", row.classic.impact),
            format!("{:.1}", row.classic.exploitability),
            format!("{:.1}", row.classic.base),
            format!("{:.1}", row.enhanced.impact),
            format!("{:.1}", row.enhanced.exploitability),
            format!("{:.1}", row.enhanced.base),
            format!("{:.1}", row.delta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Forecast rows as CSV. Impact is a one-decimal score; the decaying
/// columns keep four decimals so the curve survives the export.
pub fn write_forecast_csv(
    writer: impl Write,
    report: &ForecastReport,
) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "cve_id",
        "points",
        "month",
        "impact",
        "temporal_exploitability",
        "base",
    ])?;
    for forecast in &report.forecasts {
        for point in &forecast.series {
            w.write_record([
                forecast.cve_id.clone(),
                forecast.points.to_string(),
                point.month.to_string(),
                format!("{:.1}", crate::scoring::round1(point.impact.min(10.0))),
                format!("{:.4}", point.exploitability),
                format!("{:.4}", point.base),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct IncidenceRowJson {
    key: String,
    count: usize,
    share: String,
    exact_share: f64,
}

fn incidence_rows_json(table: &CiaIncidenceTable) -> Vec<IncidenceRowJson> {
    table
        .rows
        .iter()
        .map(|row| IncidenceRowJson {
            key: row.key(),
            count: row.count,
            share: row.display_share(),
            exact_share: row.share,
        })
        .collect()
}

#[derive(Serialize)]
struct SummaryJson {
    platform: String,
    record_count: usize,
    cia_incidence_condensed: BTreeMap<String, Vec<IncidenceRowJson>>,
    histograms_integer: BTreeMap<String, Vec<usize>>,
    comparison: ComparisonSummaryJson,
    forecast_group_mean_exploitability: BTreeMap<String, Vec<f64>>,
}

#[derive(Serialize)]
struct ComparisonSummaryJson {
    records: usize,
    base_changed: usize,
    mean_delta: f64,
    max_delta: f64,
}

fn write_summary_json(path: &Path, bundle: &ReportBundle) -> Result<(), AnalyticsError> {
    let mut condensed = BTreeMap::new();
    condensed.insert(
        "nvd".to_string(),
        incidence_rows_json(&bundle.condensed_nvd),
    );
    if let Some(edb) = &bundle.condensed_edb {
        condensed.insert("edb_linked".to_string(), incidence_rows_json(edb));
    }

    let histograms_integer = bundle
        .histograms
        .iter()
        .map(|h| (h.kind.as_str().to_string(), h.integer_buckets().to_vec()))
        .collect();

    let deltas: Vec<f64> = bundle.comparison.rows.iter().map(|r| r.delta).collect();
    let comparison = ComparisonSummaryJson {
        records: bundle.comparison.rows.len(),
        base_changed: bundle.comparison.changed,
        mean_delta: deltas.iter().sum::<f64>() / deltas.len().max(1) as f64,
        max_delta: deltas.iter().copied().fold(0.0, f64::max),
    };

    let summary = SummaryJson {
        platform: bundle.platform.as_str().to_string(),
        record_count: bundle.record_count,
        cia_incidence_condensed: condensed,
        histograms_integer,
        comparison,
        forecast_group_mean_exploitability: bundle.forecast.group_means.clone(),
    };

    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &summary)
        .map_err(|e| AnalyticsError::Io(std::io::Error::other(e)))?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Write the report files into `dir`, creating it if needed. Returns the
/// paths written.
pub fn write_reports(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>, AnalyticsError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let incidence = dir.join("cia_incidence.csv");
    write_incidence_csv(&incidence, &bundle.incidence)?;
    written.push(incidence);

    for hist in &bundle.histograms {
        let path = dir.join(format!("hist_{}.csv", hist.kind.as_str()));
        write_histogram_csv(&path, hist)?;
        written.push(path);
    }

    let comparison = dir.join("comparison.csv");
    write_comparison_csv(&comparison, &bundle.comparison)?;
    written.push(comparison);

    let forecast = dir.join("forecast.csv");
    write_forecast_csv(std::fs::File::create(&forecast)?, &bundle.forecast)?;
    written.push(forecast);

    let summary = dir.join("summary.json");
    write_summary_json(&summary, bundle)?;
    written.push(summary);

    Ok(written)
}
