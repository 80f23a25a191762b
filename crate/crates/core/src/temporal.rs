//! Time-dependent exploitability.
//!
//! A vulnerability's lifecycle is a [`Timeline`] of critical points —
//! discovery, proof of concept, exploit, patch, update — measured in whole
//! months since registration. Each point contributes a Poisson term
//! e^(−λ)·λ^κ/κ! where κ is the number of whole months elapsed since that
//! point and λ is the estimated mean rate of critical points per month.
//! The aggregate of those terms, normalized into a weight in (0, 1],
//! scales the classic exploitability sub-score down as the last event
//! recedes into the past and snaps it back up when a new event lands.

use std::sync::OnceLock;

use chrono::NaiveDate;
use thiserror::Error;

use crate::scoring::{
    base_score_raw, score_classic, score_enhanced, EnhancedVector, ScoreBreakdown,
};
use crate::vector::CvssVector;

/// Terms for κ beyond this are below representable significance and
/// treated as exactly zero.
pub const MAX_KAPPA: u32 = 500;

/// Default λ floor: one expected critical point per two years.
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1.0 / 24.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemporalError {
    #[error("invalid lambda {0}: must be finite and > 0")]
    InvalidLambda(f64),
    #[error("forecast horizon must be at least 1 month")]
    InvalidHorizon,
}

/// Lifecycle event kinds, ordered as they typically occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriticalPointKind {
    Discovery,
    ProofOfConcept,
    Exploit,
    Patch,
    Update,
}

impl CriticalPointKind {
    pub const ALL: [CriticalPointKind; 5] = [
        CriticalPointKind::Discovery,
        CriticalPointKind::ProofOfConcept,
        CriticalPointKind::Exploit,
        CriticalPointKind::Patch,
        CriticalPointKind::Update,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CriticalPointKind::Discovery => "discovery",
            CriticalPointKind::ProofOfConcept => "poc",
            CriticalPointKind::Exploit => "exploit",
            CriticalPointKind::Patch => "patch",
            CriticalPointKind::Update => "update",
        }
    }

    pub fn from_str_token(s: &str) -> Option<Self> {
        match s {
            "discovery" => Some(CriticalPointKind::Discovery),
            "poc" => Some(CriticalPointKind::ProofOfConcept),
            "exploit" => Some(CriticalPointKind::Exploit),
            "patch" => Some(CriticalPointKind::Patch),
            "update" => Some(CriticalPointKind::Update),
            _ => None,
        }
    }
}

/// One lifecycle event, `month` whole months after registration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CriticalPoint {
    pub month: u32,
    pub kind: CriticalPointKind,
}

/// Ordered critical-point events for one vulnerability, anchored at its
/// registration date. Duplicate kinds are permitted — one CVE can have
/// several exploits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub cve_id: String,
    pub registered: NaiveDate,
    points: Vec<CriticalPoint>,
}

impl Timeline {
    /// Build a timeline; points are sorted by (month, kind).
    pub fn new(
        cve_id: impl Into<String>,
        registered: NaiveDate,
        mut points: Vec<CriticalPoint>,
    ) -> Self {
        points.sort();
        Timeline {
            cve_id: cve_id.into(),
            registered,
            points,
        }
    }

    pub fn empty(cve_id: impl Into<String>, registered: NaiveDate) -> Self {
        Timeline::new(cve_id, registered, Vec::new())
    }

    pub fn points(&self) -> &[CriticalPoint] {
        &self.points
    }

    /// Points that have occurred by `month` (inclusive).
    pub fn points_through(&self, month: u32) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().take_while(move |p| p.month <= month)
    }

    pub fn with_point(&self, point: CriticalPoint) -> Timeline {
        let mut points = self.points.clone();
        points.push(point);
        Timeline::new(self.cve_id.clone(), self.registered, points)
    }
}

/// Poisson rate parameters for one vulnerability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalParams {
    lambda: f64,
    lambda_floor: f64,
}

impl TemporalParams {
    /// `lambda` is clamped up to `lambda_floor`; the floor must be a
    /// valid rate itself.
    pub fn new(lambda: f64, lambda_floor: f64) -> Result<Self, TemporalError> {
        if !lambda_floor.is_finite() || lambda_floor <= 0.0 {
            return Err(TemporalError::InvalidLambda(lambda_floor));
        }
        if !lambda.is_finite() {
            return Err(TemporalError::InvalidLambda(lambda));
        }
        Ok(TemporalParams {
            lambda: lambda.max(lambda_floor),
            lambda_floor,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_floor(&self) -> f64 {
        self.lambda_floor
    }
}

fn ln_factorial(k: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(MAX_KAPPA as usize + 1);
        out.push(0.0);
        for k in 1..=MAX_KAPPA {
            acc += f64::from(k).ln();
            out.push(acc);
        }
        out
    });
    table[k as usize]
}

fn pmf_unchecked(lambda: f64, kappa: u32) -> f64 {
    if kappa > MAX_KAPPA {
        return 0.0;
    }
    (-lambda + f64::from(kappa) * lambda.ln() - ln_factorial(kappa)).exp()
}

/// Poisson probability e^(−λ)·λ^κ/κ!, computed in log space.
///
/// κ above [`MAX_KAPPA`] yields 0 by construction.
pub fn poisson_pmf(lambda: f64, kappa: u32) -> Result<f64, TemporalError> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(TemporalError::InvalidLambda(lambda));
    }
    Ok(pmf_unchecked(lambda, kappa))
}

/// Estimate λ as critical points observed per month of age, floored.
///
/// `N / max(1, as_of_month)` counting only points at or before
/// `as_of_month`; an event-free history gets the floor.
pub fn estimate_lambda(
    timeline: &Timeline,
    as_of_month: u32,
    lambda_floor: f64,
) -> Result<TemporalParams, TemporalError> {
    let observed = timeline.points_through(as_of_month).count();
    let age = as_of_month.max(1);
    TemporalParams::new(observed as f64 / f64::from(age), lambda_floor)
}

/// Sum of each contributing point's term and how many points contributed.
/// With no contributing points, registration itself acts as a virtual
/// point at month 0.
fn contributions(timeline: &Timeline, as_of_month: u32, lambda: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0;
    for point in timeline.points_through(as_of_month) {
        sum += pmf_unchecked(lambda, as_of_month - point.month);
        count += 1;
    }
    if count == 0 {
        (pmf_unchecked(lambda, as_of_month), 0)
    } else {
        (sum, count)
    }
}

/// Aggregate S: the sum over points i (month ≤ as_of_month) of
/// e^(−λ)·λ^κᵢ/κᵢ! with κᵢ the months elapsed since point i.
pub fn aggregate_s(timeline: &Timeline, as_of_month: u32, params: &TemporalParams) -> f64 {
    contributions(timeline, as_of_month, params.lambda).0
}

/// Normalize S into a multiplier in (0, 1].
///
/// Each point's term is divided by the largest value a single term can
/// take, pmf(λ, ⌊λ⌋), and the sum by the number of contributing points.
/// For λ ≤ 1 the anchor is pmf(λ, 0), so the weight is exactly 1 when
/// every contributing point occurred at `as_of_month` and decays toward 0
/// as the points age.
pub fn decay_weight(timeline: &Timeline, as_of_month: u32, params: &TemporalParams) -> f64 {
    let lambda = params.lambda;
    let (sum, count) = contributions(timeline, as_of_month, lambda);
    let mode = (lambda.floor() as u64).min(u64::from(MAX_KAPPA)) as u32;
    let anchor = pmf_unchecked(lambda, mode);
    let denom = count.max(1) as f64 * anchor;
    if denom == 0.0 {
        return 0.0;
    }
    sum / denom
}

/// Exploitability scaled by the decay weight; unrounded.
pub fn temporal_exploitability(
    base_exploitability_raw: f64,
    timeline: &Timeline,
    as_of_month: u32,
    params: &TemporalParams,
) -> f64 {
    base_exploitability_raw * decay_weight(timeline, as_of_month, params)
}

/// What to score a forecast against: classic weights, or the scope-split
/// enhanced weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForecastInput {
    Classic(CvssVector),
    Enhanced(EnhancedVector),
}

impl From<CvssVector> for ForecastInput {
    fn from(v: CvssVector) -> Self {
        ForecastInput::Classic(v)
    }
}

impl From<EnhancedVector> for ForecastInput {
    fn from(ev: EnhancedVector) -> Self {
        ForecastInput::Enhanced(ev)
    }
}

impl ForecastInput {
    pub fn breakdown(&self) -> ScoreBreakdown {
        match self {
            ForecastInput::Classic(v) => score_classic(v),
            ForecastInput::Enhanced(ev) => score_enhanced(ev),
        }
    }
}

/// One month of a forecast series. All values are unrounded; rounding
/// happens at reporting boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastPoint {
    pub month: u32,
    pub impact: f64,
    pub exploitability: f64,
    pub base: f64,
}

/// Month-by-month scores over `horizon_months` months (months 0 to
/// horizon−1). Impact is constant across the series; exploitability is
/// decayed per month; λ is re-estimated each month from the points known
/// by that month, so later events never affect earlier scores.
pub fn forecast_series(
    input: &ForecastInput,
    timeline: &Timeline,
    horizon_months: u32,
    lambda_floor: f64,
) -> Result<Vec<ForecastPoint>, TemporalError> {
    if horizon_months == 0 {
        return Err(TemporalError::InvalidHorizon);
    }
    let scores = input.breakdown();
    let mut series = Vec::with_capacity(horizon_months as usize);
    for month in 0..horizon_months {
        let params = estimate_lambda(timeline, month, lambda_floor)?;
        let exploitability =
            temporal_exploitability(scores.exploitability_raw, timeline, month, &params);
        series.push(ForecastPoint {
            month,
            impact: scores.impact_raw,
            exploitability,
            base: base_score_raw(scores.impact_raw, exploitability),
        });
    }
    Ok(series)
}
