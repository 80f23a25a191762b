//! Offline ingestion: NVD JSON 1.1 feed files and Exploit-DB CSV exports
//! in, a normalized corpus of records and timelines out.
//!
//! Parsing is diagnostic-driven: a malformed file aborts, a malformed
//! item or row never does — it is skipped (or kept flagged) with a
//! [`Diagnostic`] naming the offender. The same inputs always produce the
//! same corpus bytes.

mod corpus;
mod edb;
mod nvd;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::batch;
use crate::scoring::VulnScope;
use crate::temporal::{CriticalPoint, CriticalPointKind, Timeline};
use crate::vector::CvssVector;

pub use corpus::{load_corpus, save_corpus, Corpus, CORPUS_HEADER};
pub use edb::{parse_edb_csv, parse_patch_csv, EdbParse, PatchParse};
pub use nvd::{parse_nvd_feed, NvdFeedParse};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed NVD feed: {0}")]
    MalformedFeed(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("corpus error: {0}")]
    CorpusIo(String),
    #[error("unsupported corpus version `{found}` (expected `{expected}`)")]
    CorpusVersionMismatch {
        found: String,
        expected: &'static str,
    },
    #[error("scope is unclassifiable: CPE list empty or entirely malformed")]
    UnclassifiableScope,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Mobile platform derived from CPE vendor/product pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Platform {
    Android,
    Ios,
    Other,
}

impl Platform {
    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Android => "android",
            Platform::Ios => "ios",
            Platform::Other => "other",
        }
    }

    pub fn from_str_token(s: &str) -> Option<Self> {
        match s {
            "android" => Some(Platform::Android),
            "ios" => Some(Platform::Ios),
            "other" => Some(Platform::Other),
            _ => None,
        }
    }
}

/// Normalized per-CVE record.
#[derive(Debug, Clone, PartialEq)]
pub struct VulnRecord {
    pub cve_id: String,
    pub platform: Platform,
    pub published: NaiveDate,
    pub vector: CvssVector,
    /// Base score as published by the feed, one decimal.
    pub nvd_base_score: f64,
    /// `None` when the CPE list could not be classified; analyses that
    /// need a scope report such records instead of guessing.
    pub scope: Option<VulnScope>,
    pub cpe_uris: Vec<String>,
}

/// One Exploit-DB row, fanned out per linked CVE. Rows without a CVE link
/// are retained with `cve_id: None` and counted as unlinked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploitRecord {
    pub edb_id: String,
    pub cve_id: Option<String>,
    pub date: NaiveDate,
    pub kind_hint: CriticalPointKind,
}

/// One patch/update event row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchRecord {
    pub cve_id: String,
    pub date: NaiveDate,
    pub kind: CriticalPointKind,
}

/// A non-fatal observation made while ingesting: what was skipped,
/// clamped, or left unresolved, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub id: Option<String>,
    pub reason: String,
}

impl Diagnostic {
    pub fn new(id: impl Into<Option<String>>, reason: impl Into<String>) -> Self {
        Diagnostic {
            id: id.into(),
            reason: reason.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.id {
            Some(id) => write!(f, "{id}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

/// `CVE-\d{4}-\d{4,}`
pub fn is_valid_cve_id(id: &str) -> bool {
    let Some(rest) = id.strip_prefix("CVE-") else {
        return false;
    };
    let Some((year, seq)) = rest.split_once('-') else {
        return false;
    };
    year.len() == 4
        && year.bytes().all(|b| b.is_ascii_digit())
        && seq.len() >= 4
        && seq.bytes().all(|b| b.is_ascii_digit())
}

fn cpe_fields(uri: &str) -> Option<(char, &str, &str)> {
    let mut parts = uri.split(':');
    if parts.next() != Some("cpe") || parts.next() != Some("2.3") {
        return None;
    }
    let part = parts.next()?;
    let vendor = parts.next()?;
    let product = parts.next()?;
    if part.len() != 1 || !matches!(part, "a" | "o" | "h") {
        return None;
    }
    Some((part.as_bytes()[0] as char, vendor, product))
}

/// Application vs operating-system scope from a CPE list: OS if any valid
/// CPE has part `o`, application otherwise. An empty or entirely
/// malformed list cannot be classified; the caller must supply an
/// override.
pub fn classify_scope(cpe_uris: &[String]) -> Result<VulnScope, IngestError> {
    let mut any_valid = false;
    for uri in cpe_uris {
        if let Some((part, _, _)) = cpe_fields(uri) {
            any_valid = true;
            if part == 'o' {
                return Ok(VulnScope::OperatingSystem);
            }
        }
    }
    if any_valid {
        Ok(VulnScope::Application)
    } else {
        Err(IngestError::UnclassifiableScope)
    }
}

/// Android iff some CPE names google:android, iOS iff apple:iphone_os.
pub fn detect_platform(cpe_uris: &[String]) -> Platform {
    let mut platform = Platform::Other;
    for uri in cpe_uris {
        match cpe_fields(uri) {
            Some((_, "google", "android")) => return Platform::Android,
            Some((_, "apple", "iphone_os")) => platform = Platform::Ios,
            _ => {}
        }
    }
    platform
}

/// Whole calendar months from `from` to `to`, floored (a 45-day gap is
/// month 1). Negative when `to` precedes `from`.
pub fn whole_months_between(from: NaiveDate, to: NaiveDate) -> i32 {
    let mut months = (to.year() - from.year()) * 12 + to.month() as i32 - from.month() as i32;
    if to.day() < from.day() {
        months -= 1;
    }
    months
}

/// Join exploit and patch events onto records as month-offset critical
/// points. Events dated before publication clamp to month 0 with a
/// warning; events for CVEs absent from `vulns` are dropped with a
/// diagnostic; every record gets a timeline, eventless ones an empty one.
pub fn build_timelines(
    vulns: &[VulnRecord],
    exploits: &[ExploitRecord],
    patches: &[PatchRecord],
) -> (Vec<Timeline>, Vec<Diagnostic>) {
    let mut diagnostics = Vec::new();
    let mut events: BTreeMap<String, Vec<(NaiveDate, CriticalPointKind)>> = BTreeMap::new();
    let known: std::collections::BTreeSet<&str> = vulns.iter().map(|r| r.cve_id.as_str()).collect();

    let linked_exploits = exploits
        .iter()
        .filter_map(|e| e.cve_id.as_deref().map(|cve| (cve, e.date, e.kind_hint)));
    let patch_events = patches.iter().map(|p| (p.cve_id.as_str(), p.date, p.kind));
    for (cve_id, date, kind) in linked_exploits.chain(patch_events) {
        if known.contains(cve_id) {
            events
                .entry(cve_id.to_string())
                .or_default()
                .push((date, kind));
        } else {
            diagnostics.push(Diagnostic::new(
                Some(cve_id.to_string()),
                format!("{} event references a CVE not in the corpus", kind.as_str()),
            ));
        }
    }

    let timelines = vulns
        .iter()
        .map(|record| {
            let points = events
                .get(record.cve_id.as_str())
                .map(|dated| {
                    dated
                        .iter()
                        .map(|&(date, kind)| {
                            let offset = whole_months_between(record.published, date);
                            if offset < 0 {
                                diagnostics.push(Diagnostic::new(
                                    Some(record.cve_id.clone()),
                                    format!(
                                        "{} event dated {date} precedes publication {}; clamped to month 0",
                                        kind.as_str(),
                                        record.published
                                    ),
                                ));
                            }
                            CriticalPoint {
                                month: offset.max(0) as u32,
                                kind,
                            }
                        })
                        .collect()
                })
                .unwrap_or_default();
            Timeline::new(record.cve_id.clone(), record.published, points)
        })
        .collect();

    (timelines, diagnostics)
}

/// Counts reported by the ingestion pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestSummary {
    /// Records kept in the corpus.
    pub kept: usize,
    /// NVD items skipped (no v2 metrics, bad dates, malformed ids, ...).
    pub skipped: usize,
    /// Exploit rows with no CVE link.
    pub unlinked: usize,
}

/// Full ingestion result: the corpus plus everything worth telling the
/// operator about.
#[derive(Debug)]
pub struct IngestOutcome {
    pub corpus: Corpus,
    pub summary: IngestSummary,
    pub diagnostics: Vec<Diagnostic>,
}

fn read_to_string(path: &Path) -> Result<String, IngestError> {
    let mut buf = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut buf)?;
    Ok(buf)
}

/// Ingest feed and export files into a corpus. Feed files parse
/// independently (in parallel with the `parallel` feature); records merge
/// sorted by CVE id, so the corpus bytes are a pure function of the
/// inputs.
pub fn ingest_files(
    nvd_paths: &[impl AsRef<Path>],
    edb_path: Option<&Path>,
    patches_path: Option<&Path>,
) -> Result<IngestOutcome, IngestError> {
    let feed_texts = nvd_paths
        .iter()
        .map(|p| read_to_string(p.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let parses: Vec<Result<NvdFeedParse, IngestError>> =
        batch::map_slice(&feed_texts, |text| parse_nvd_feed(text.as_bytes()));

    let mut records: Vec<VulnRecord> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut skipped = 0;
    for parse in parses {
        let parse = parse?;
        skipped += parse.skipped();
        diagnostics.extend(parse.diagnostics);
        records.extend(parse.records);
    }
    records.sort_by(|a, b| a.cve_id.cmp(&b.cve_id));
    records.dedup_by(|dup, kept| {
        let same = dup.cve_id == kept.cve_id;
        if same {
            skipped += 1;
            diagnostics.push(Diagnostic::new(
                Some(dup.cve_id.clone()),
                "duplicate CVE id across feeds; first occurrence kept".to_string(),
            ));
        }
        same
    });

    let mut exploits = Vec::new();
    let mut unlinked = 0;
    if let Some(path) = edb_path {
        let parse = parse_edb_csv(File::open(path)?)?;
        unlinked = parse.unlinked();
        diagnostics.extend(parse.diagnostics);
        exploits = parse.records;
    }

    let mut patches = Vec::new();
    if let Some(path) = patches_path {
        let parse = parse_patch_csv(File::open(path)?)?;
        diagnostics.extend(parse.diagnostics);
        patches = parse.records;
    }

    let (timelines, timeline_diags) = build_timelines(&records, &exploits, &patches);
    diagnostics.extend(timeline_diags);

    let kept = records.len();
    Ok(IngestOutcome {
        corpus: Corpus { records, timelines },
        summary: IngestSummary {
            kept,
            skipped,
            unlinked,
        },
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn cve_grammar() {
        assert!(is_valid_cve_id("CVE-2015-6602"));
        assert!(is_valid_cve_id("CVE-2016-123456"));
        assert!(!is_valid_cve_id("CVE-2015-660"));
        assert!(!is_valid_cve_id("CVE-15-6602"));
        assert!(!is_valid_cve_id("cve-2015-6602"));
        assert!(!is_valid_cve_id("CVE-2015-66a2"));
        assert!(!is_valid_cve_id("GHSA-xxxx-yyyy"));
    }

    #[test]
    fn scope_classification_examples() {
        let os = vec!["cpe:2.3:o:google:android:6.0:*:*:*:*:*:*:*".to_string()];
        assert_eq!(classify_scope(&os).unwrap(), VulnScope::OperatingSystem);

        let app = vec!["cpe:2.3:a:vendor:app:1.2:*:*:*:*:*:*:*".to_string()];
        assert_eq!(classify_scope(&app).unwrap(), VulnScope::Application);

        let mixed = vec![
            "cpe:2.3:a:vendor:app:1.2:*:*:*:*:*:*:*".to_string(),
            "cpe:2.3:o:apple:iphone_os:9.3:*:*:*:*:*:*:*".to_string(),
        ];
        assert_eq!(classify_scope(&mixed).unwrap(), VulnScope::OperatingSystem);

        assert!(matches!(
            classify_scope(&[]),
            Err(IngestError::UnclassifiableScope)
        ));
        let junk = vec!["not-a-cpe".to_string(), "cpe:2.3:x:bad:part".to_string()];
        assert!(matches!(
            classify_scope(&junk),
            Err(IngestError::UnclassifiableScope)
        ));
    }

    #[test]
    fn platform_detection() {
        let android = vec!["cpe:2.3:o:google:android:5.1:*:*:*:*:*:*:*".to_string()];
        assert_eq!(detect_platform(&android), Platform::Android);

        let ios = vec!["cpe:2.3:o:apple:iphone_os:9.3:*:*:*:*:*:*:*".to_string()];
        assert_eq!(detect_platform(&ios), Platform::Ios);

        let other = vec!["cpe:2.3:o:linux:linux_kernel:4.4:*:*:*:*:*:*:*".to_string()];
        assert_eq!(detect_platform(&other), Platform::Other);
    }

    #[test]
    fn month_floor_arithmetic() {
        assert_eq!(
            whole_months_between(date("2015-01-15"), date("2015-04-20")),
            3
        );
        assert_eq!(
            whole_months_between(date("2015-01-15"), date("2015-03-01")),
            1
        );
        assert_eq!(
            whole_months_between(date("2015-01-15"), date("2015-01-15")),
            0
        );
        assert_eq!(
            whole_months_between(date("2015-01-15"), date("2016-01-14")),
            11
        );
        assert_eq!(
            whole_months_between(date("2015-01-15"), date("2015-01-01")),
            -1
        );
    }

    fn record(cve_id: &str, published: &str) -> VulnRecord {
        VulnRecord {
            cve_id: cve_id.to_string(),
            platform: Platform::Android,
            published: date(published),
            vector: crate::vector::parse_vector("AV:N/AC:M/Au:N/C:P/I:P/A:P").unwrap(),
            nvd_base_score: 6.8,
            scope: Some(VulnScope::OperatingSystem),
            cpe_uris: vec!["cpe:2.3:o:google:android:6.0:*:*:*:*:*:*:*".to_string()],
        }
    }

    #[test]
    fn timeline_join_and_clamping() {
        let vulns = vec![record("CVE-2015-0001", "2015-01-15")];
        let exploits = vec![
            ExploitRecord {
                edb_id: "100".into(),
                cve_id: Some("CVE-2015-0001".into()),
                date: date("2015-04-20"),
                kind_hint: CriticalPointKind::Exploit,
            },
            ExploitRecord {
                edb_id: "101".into(),
                cve_id: Some("CVE-2015-0001".into()),
                date: date("2014-12-30"),
                kind_hint: CriticalPointKind::ProofOfConcept,
            },
            ExploitRecord {
                edb_id: "102".into(),
                cve_id: Some("CVE-1999-9999".into()),
                date: date("2015-04-20"),
                kind_hint: CriticalPointKind::Exploit,
            },
            ExploitRecord {
                edb_id: "103".into(),
                cve_id: None,
                date: date("2015-04-20"),
                kind_hint: CriticalPointKind::Exploit,
            },
        ];
        let patches = vec![PatchRecord {
            cve_id: "CVE-2015-0001".into(),
            date: date("2015-08-03"),
            kind: CriticalPointKind::Patch,
        }];

        let (timelines, diags) = build_timelines(&vulns, &exploits, &patches);
        assert_eq!(timelines.len(), 1);
        let points = timelines[0].points();
        assert_eq!(
            points,
            &[
                CriticalPoint {
                    month: 0,
                    kind: CriticalPointKind::ProofOfConcept
                },
                CriticalPoint {
                    month: 3,
                    kind: CriticalPointKind::Exploit
                },
                CriticalPoint {
                    month: 6,
                    kind: CriticalPointKind::Patch
                },
            ]
        );
        // one clamp warning, one unknown-CVE drop
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().any(|d| d.reason.contains("clamped")));
        assert!(diags.iter().any(|d| d.reason.contains("not in the corpus")));
    }

    #[test]
    fn eventless_records_get_empty_timelines() {
        let vulns = vec![record("CVE-2015-0002", "2015-02-01")];
        let (timelines, diags) = build_timelines(&vulns, &[], &[]);
        assert_eq!(timelines.len(), 1);
        assert!(timelines[0].points().is_empty());
        assert!(diags.is_empty());
    }
}
