//! The normalized on-disk corpus: versioned, line-oriented, diff-friendly.
//!
//! Line 1 is the header `cvss-temporal-corpus v1`. Records are
//! `R|CVE-id|platform|published|vector|nvd_base|scope|cpe1;cpe2` and
//! timelines `T|CVE-id|registered|kind:month;...`. `|` is the field
//! delimiter and never occurs inside a field.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{is_valid_cve_id, IngestError, Platform, VulnRecord};
use crate::scoring::VulnScope;
use crate::temporal::{CriticalPoint, CriticalPointKind, Timeline};
use crate::vector::{format_vector, parse_vector};

pub const CORPUS_HEADER: &str = "cvss-temporal-corpus v1";

/// The normalized corpus: records and their timelines, both sorted by
/// CVE id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub records: Vec<VulnRecord>,
    pub timelines: Vec<Timeline>,
}

impl Corpus {
    pub fn record(&self, cve_id: &str) -> Option<&VulnRecord> {
        self.records
            .binary_search_by(|r| r.cve_id.as_str().cmp(cve_id))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn timeline(&self, cve_id: &str) -> Option<&Timeline> {
        self.timelines
            .binary_search_by(|t| t.cve_id.as_str().cmp(cve_id))
            .ok()
            .map(|i| &self.timelines[i])
    }

    pub fn write(&self, writer: impl Write) -> Result<(), IngestError> {
        let mut out = BufWriter::new(writer);
        writeln!(out, "{CORPUS_HEADER}")?;
        for record in &self.records {
            let scope = match record.scope {
                Some(scope) => scope.as_str(),
                None => "unresolved",
            };
            let line = format!(
                "R|{}|{}|{}|{}|{:.1}|{}|{}",
                record.cve_id,
                record.platform.as_str(),
                record.published.format("%Y-%m-%d"),
                format_vector(&record.vector),
                record.nvd_base_score,
                scope,
                record.cpe_uris.join(";")
            );
            if line.matches('|').count() != 7 {
                return Err(IngestError::CorpusIo(format!(
                    "{}: a field contains the `|` delimiter",
                    record.cve_id
                )));
            }
            writeln!(out, "{line}")?;
        }
        for timeline in &self.timelines {
            let points = timeline
                .points()
                .iter()
                .map(|p| format!("{}:{}", p.kind.as_str(), p.month))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(
                out,
                "T|{}|{}|{}",
                timeline.cve_id,
                timeline.registered.format("%Y-%m-%d"),
                points
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> Result<Corpus, IngestError> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| IngestError::CorpusIo("empty corpus file".into()))?;
        if header != CORPUS_HEADER {
            return Err(IngestError::CorpusVersionMismatch {
                found: header,
                expected: CORPUS_HEADER,
            });
        }

        let mut corpus = Corpus::default();
        for (number, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fail =
                |reason: String| IngestError::CorpusIo(format!("line {}: {reason}", number + 2));
            let fields: Vec<&str> = line.split('|').collect();
            match fields[0] {
                "R" => {
                    if fields.len() != 8 {
                        return Err(fail(format!("expected 8 fields, found {}", fields.len())));
                    }
                    corpus.records.push(parse_record(&fields).map_err(fail)?);
                }
                "T" => {
                    if fields.len() != 4 {
                        return Err(fail(format!("expected 4 fields, found {}", fields.len())));
                    }
                    corpus
                        .timelines
                        .push(parse_timeline(&fields).map_err(fail)?);
                }
                other => return Err(fail(format!("unknown line tag `{other}`"))),
            }
        }
        Ok(corpus)
    }
}

fn parse_record(fields: &[&str]) -> Result<VulnRecord, String> {
    let cve_id = fields[1].to_string();
    if !is_valid_cve_id(&cve_id) {
        return Err(format!("invalid CVE id `{cve_id}`"));
    }
    let platform = Platform::from_str_token(fields[2])
        .ok_or_else(|| format!("unknown platform `{}`", fields[2]))?;
    let published = NaiveDate::parse_from_str(fields[3], "%Y-%m-%d")
        .map_err(|e| format!("bad published date `{}`: {e}", fields[3]))?;
    let vector = parse_vector(fields[4]).map_err(|e| e.to_string())?;
    let nvd_base_score: f64 = fields[5]
        .parse()
        .map_err(|_| format!("bad base score `{}`", fields[5]))?;
    let scope = match fields[6] {
        "unresolved" => None,
        token => Some(
            VulnScope::from_str_token(token).ok_or_else(|| format!("unknown scope `{token}`"))?,
        ),
    };
    let cpe_uris = if fields[7].is_empty() {
        Vec::new()
    } else {
        fields[7].split(';').map(str::to_string).collect()
    };
    Ok(VulnRecord {
        cve_id,
        platform,
        published,
        vector,
        nvd_base_score,
        scope,
        cpe_uris,
    })
}

fn parse_timeline(fields: &[&str]) -> Result<Timeline, String> {
    let cve_id = fields[1].to_string();
    if !is_valid_cve_id(&cve_id) {
        return Err(format!("invalid CVE id `{cve_id}`"));
    }
    let registered = NaiveDate::parse_from_str(fields[2], "%Y-%m-%d")
        .map_err(|e| format!("bad registration date `{}`: {e}", fields[2]))?;
    let mut points = Vec::new();
    if !fields[3].is_empty() {
        for token in fields[3].split(';') {
            let (kind, month) = token
                .split_once(':')
                .ok_or_else(|| format!("bad point `{token}`"))?;
            let kind = CriticalPointKind::from_str_token(kind)
                .ok_or_else(|| format!("unknown point kind `{kind}`"))?;
            let month: u32 = month
                .parse()
                .map_err(|_| format!("bad point month `{month}`"))?;
            points.push(CriticalPoint { month, kind });
        }
    }
    Ok(Timeline::new(cve_id, registered, points))
}

/// Write the corpus to `path`.
pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), IngestError> {
    corpus.write(File::create(path)?)
}

/// Read a corpus back from `path`.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, IngestError> {
    Corpus::read(BufReader::new(File::open(path)?))
}
