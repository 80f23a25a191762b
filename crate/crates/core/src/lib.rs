//! Vulnerability risk scoring for CVSS v2 corpora.
//!
//! The crate computes classic CVSS v2 base scores, an enhanced variant
//! that splits the Partial impact weight by application/OS scope, and a
//! time-decaying exploitability sub-score driven by Poisson-weighted
//! lifecycle events. Around that core sit an offline ingestion pipeline
//! for NVD JSON feeds and Exploit-DB CSV exports, and report generators
//! for incidence tables, score histograms, classic-vs-enhanced
//! comparisons, and per-CVE forecasts.

pub mod analytics;
pub mod batch;
pub mod ingest;
pub mod scoring;
pub mod temporal;
pub mod vector;

pub use scoring::{score_classic, score_enhanced, EnhancedVector, ScoreBreakdown, VulnScope};
pub use temporal::{
    CriticalPoint, CriticalPointKind, ForecastInput, TemporalParams, Timeline, DEFAULT_LAMBDA_FLOOR,
};
pub use vector::{format_vector, parse_vector, CvssVector};
