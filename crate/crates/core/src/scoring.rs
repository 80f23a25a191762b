//! CVSS v2 sub-score and base-score computation, classic and enhanced.
//!
//! Classic scoring uses the standard v2 weight tables. Enhanced scoring
//! splits the Partial impact weight by vulnerability scope: 0.461 when the
//! flaw lives in an application, 0.515 when it lives in the operating
//! system. Everything else — the impact and exploitability formulas and
//! the base-score combiner — is shared between the two pipelines.

use crate::vector::{AccessComplexity, AccessVector, Authentication, CiaImpact, CvssVector};

/// Whether a vulnerability sits in an application or in the OS itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VulnScope {
    Application,
    OperatingSystem,
}

impl VulnScope {
    pub fn as_str(self) -> &'static str {
        match self {
            VulnScope::Application => "app",
            VulnScope::OperatingSystem => "os",
        }
    }

    pub fn from_str_token(s: &str) -> Option<Self> {
        match s {
            "app" | "application" => Some(VulnScope::Application),
            "os" | "system" => Some(VulnScope::OperatingSystem),
            _ => None,
        }
    }
}

/// A base vector together with the scope that resolves its Partial weights.
///
/// The scope only changes the outcome when at least one of C/I/A is
/// Partial, but it is always carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnhancedVector {
    pub base: CvssVector,
    pub scope: VulnScope,
}

/// One scored vulnerability: reported one-decimal scores plus the exact
/// sub-score values they were derived from.
///
/// `base` is computed from the unrounded sub-scores and rounded last,
/// matching how NVD derives its published numbers. `impact_raw` keeps the
/// exact impact formula value (up to 10.00084536 for all-Complete); the
/// reported `impact` is clamped to 10.0 before rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBreakdown {
    pub impact: f64,
    pub exploitability: f64,
    pub base: f64,
    pub impact_raw: f64,
    pub exploitability_raw: f64,
}

/// Round half-up to one decimal. Valid for non-negative inputs, which is
/// all this crate produces.
pub fn round1(x: f64) -> f64 {
    (x * 10.0 + 0.5).floor() / 10.0
}

/// Classic CIA weight (None 0, Partial 0.275, Complete 0.660).
pub fn impact_weight(ci: CiaImpact) -> f64 {
    match ci {
        CiaImpact::None => 0.0,
        CiaImpact::Partial => 0.275,
        CiaImpact::Complete => 0.660,
    }
}

/// Scope-split CIA weight: Partial becomes 0.461 (application) or 0.515
/// (operating system); None and Complete are unchanged.
pub fn enhanced_impact_weight(ci: CiaImpact, scope: VulnScope) -> f64 {
    match (ci, scope) {
        (CiaImpact::Partial, VulnScope::Application) => 0.461,
        (CiaImpact::Partial, VulnScope::OperatingSystem) => 0.515,
        (other, _) => impact_weight(other),
    }
}

/// Impact sub-score from the three CIA weights.
///
/// Returns `(raw, rounded)`. `raw` is the exact formula value
/// 10.41·(1 − (1−c)(1−i)(1−a)); it exceeds 10.0 only for the
/// all-Complete case (10.00084536) and must be fed to [`base_score_raw`]
/// unclamped to reproduce NVD's published scores. `rounded` clamps to
/// 10.0 first.
pub fn impact_subscore(c: f64, i: f64, a: f64) -> (f64, f64) {
    let raw = 10.41 * (1.0 - (1.0 - c) * (1.0 - i) * (1.0 - a));
    (raw, round1(raw.min(10.0)))
}

/// Exploitability sub-score 20·AC·Au·AV as `(raw, rounded)`.
pub fn exploitability_subscore(
    av: AccessVector,
    ac: AccessComplexity,
    au: Authentication,
) -> (f64, f64) {
    let raw = 20.0 * ac.weight() * au.weight() * av.weight();
    (raw, round1(raw))
}

fn impact_factor(impact_raw: f64) -> f64 {
    if impact_raw == 0.0 {
        0.0
    } else {
        1.176
    }
}

/// Base-score combiner before rounding, clamped to [0, 10].
pub fn base_score_raw(impact_raw: f64, exploitability_raw: f64) -> f64 {
    let v = (0.6 * impact_raw + 0.4 * exploitability_raw - 1.5) * impact_factor(impact_raw);
    v.clamp(0.0, 10.0)
}

/// Base score rounded half-up to one decimal.
pub fn base_score(impact_raw: f64, exploitability_raw: f64) -> f64 {
    round1(base_score_raw(impact_raw, exploitability_raw))
}

fn breakdown(impact_raw: f64, exploitability_raw: f64) -> ScoreBreakdown {
    ScoreBreakdown {
        impact: round1(impact_raw.min(10.0)),
        exploitability: round1(exploitability_raw),
        base: base_score(impact_raw, exploitability_raw),
        impact_raw,
        exploitability_raw,
    }
}

/// Score a vector with the classic v2 weight table.
pub fn score_classic(v: &CvssVector) -> ScoreBreakdown {
    let (impact_raw, _) =
        impact_subscore(impact_weight(v.c), impact_weight(v.i), impact_weight(v.a));
    let (exploitability_raw, _) = exploitability_subscore(v.av, v.ac, v.au);
    breakdown(impact_raw, exploitability_raw)
}

/// Score a vector with the scope-split Partial weights. The
/// exploitability side is identical to classic scoring.
pub fn score_enhanced(ev: &EnhancedVector) -> ScoreBreakdown {
    let v = &ev.base;
    let (impact_raw, _) = impact_subscore(
        enhanced_impact_weight(v.c, ev.scope),
        enhanced_impact_weight(v.i, ev.scope),
        enhanced_impact_weight(v.a, ev.scope),
    );
    let (exploitability_raw, _) = exploitability_subscore(v.av, v.ac, v.au);
    breakdown(impact_raw, exploitability_raw)
}
