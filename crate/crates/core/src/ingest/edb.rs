//! Exploit-DB CSV exports and patch-event CSVs.
//!
//! Columns are located by header name, so extra columns and column order
//! do not matter. An EDB row fans out into one [`ExploitRecord`] per CVE
//! listed in its `codes` column; rows without any CVE yield a single
//! unlinked record.

use std::collections::HashMap;
use std::io::Read;

use chrono::NaiveDate;

use super::{is_valid_cve_id, Diagnostic, ExploitRecord, IngestError, PatchRecord};
use crate::temporal::CriticalPointKind;

fn header_index(
    headers: &csv::StringRecord,
    required: &[&str],
    optional: &[&str],
) -> Result<HashMap<String, usize>, IngestError> {
    let mut index = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        index.entry(name.trim().to_ascii_lowercase()).or_insert(i);
    }
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|name| !index.contains_key(*name))
        .collect();
    if !missing.is_empty() {
        return Err(IngestError::MalformedCsv(format!(
            "missing required column(s): {}",
            missing.join(", ")
        )));
    }
    index.retain(|name, _| required.contains(&name.as_str()) || optional.contains(&name.as_str()));
    Ok(index)
}

#[derive(Debug)]
pub struct EdbParse {
    pub records: Vec<ExploitRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl EdbParse {
    /// Records carrying no CVE link.
    pub fn unlinked(&self) -> usize {
        self.records.iter().filter(|r| r.cve_id.is_none()).count()
    }
}

/// Parse an Exploit-DB CSV export. Requires `id`, `date`, `platform` and
/// `type` columns; `codes` (semicolon-separated CVE ids) and
/// `description` are used when present.
pub fn parse_edb_csv(reader: impl Read) -> Result<EdbParse, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| IngestError::MalformedCsv(e.to_string()))?
        .clone();
    let index = header_index(
        &headers,
        &["id", "date", "platform", "type"],
        &["codes", "description"],
    )?;

    let field = |row: &csv::StringRecord, name: &str| -> String {
        index
            .get(name)
            .and_then(|&i| row.get(i))
            .unwrap_or("")
            .trim()
            .to_string()
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (row_number, row) in csv_reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::MalformedCsv(e.to_string()))?;
        let edb_id = field(&row, "id");
        let date_text = field(&row, "date");
        let Ok(date) = NaiveDate::parse_from_str(&date_text, "%Y-%m-%d") else {
            diagnostics.push(Diagnostic::new(
                Some(format!("EDB-{edb_id}")),
                format!("row {}: unparseable date `{date_text}`", row_number + 2),
            ));
            continue;
        };

        let row_type = field(&row, "type").to_ascii_lowercase();
        let description = field(&row, "description").to_ascii_lowercase();
        let kind_hint = if row_type == "dos" || description.contains("poc") {
            CriticalPointKind::ProofOfConcept
        } else {
            CriticalPointKind::Exploit
        };

        let codes = field(&row, "codes");
        let cves: Vec<String> = codes
            .split(';')
            .map(str::trim)
            .filter(|code| is_valid_cve_id(code))
            .map(str::to_string)
            .collect();
        if cves.is_empty() {
            records.push(ExploitRecord {
                edb_id: edb_id.clone(),
                cve_id: None,
                date,
                kind_hint,
            });
            diagnostics.push(Diagnostic::new(
                Some(format!("EDB-{edb_id}")),
                "no linked CVE; retained as unlinked".to_string(),
            ));
        } else {
            for cve_id in cves {
                records.push(ExploitRecord {
                    edb_id: edb_id.clone(),
                    cve_id: Some(cve_id),
                    date,
                    kind_hint,
                });
            }
        }
    }

    Ok(EdbParse {
        records,
        diagnostics,
    })
}

#[derive(Debug)]
pub struct PatchParse {
    pub records: Vec<PatchRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parse patch/update events from a CSV with `cve_id`, `date` and `kind`
/// columns, `kind` being `patch` or `update` (case-insensitive).
pub fn parse_patch_csv(reader: impl Read) -> Result<PatchParse, IngestError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| IngestError::MalformedCsv(e.to_string()))?
        .clone();
    let index = header_index(&headers, &["cve_id", "date", "kind"], &[])?;

    let field = |row: &csv::StringRecord, name: &str| -> String {
        index
            .get(name)
            .and_then(|&i| row.get(i))
            .unwrap_or("")
            .trim()
            .to_string()
    };

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (row_number, row) in csv_reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::MalformedCsv(e.to_string()))?;
        let cve_id = field(&row, "cve_id");
        if !is_valid_cve_id(&cve_id) {
            diagnostics.push(Diagnostic::new(
                None,
                format!("row {}: invalid CVE id `{cve_id}`", row_number + 2),
            ));
            continue;
        }
        let date_text = field(&row, "date");
        let Ok(date) = NaiveDate::parse_from_str(&date_text, "%Y-%m-%d") else {
            diagnostics.push(Diagnostic::new(
                Some(cve_id),
                format!("row {}: unparseable date `{date_text}`", row_number + 2),
            ));
            continue;
        };
        let kind = match field(&row, "kind").to_ascii_lowercase().as_str() {
            "patch" => CriticalPointKind::Patch,
            "update" => CriticalPointKind::Update,
            other => {
                diagnostics.push(Diagnostic::new(
                    Some(cve_id),
                    format!("row {}: unknown event kind `{other}`", row_number + 2),
                ));
                continue;
            }
        };
        records.push(PatchRecord { cve_id, date, kind });
    }

    Ok(PatchParse {
        records,
        diagnostics,
    })
}
