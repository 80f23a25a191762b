//! NVD JSON 1.1 data-feed parsing.
//!
//! Only the fields this pipeline needs are deserialized: CVE id,
//! published date, the CVSS v2 vector string and base score, and the CPE
//! URIs from the configuration tree. Items lacking v2 metrics (or
//! otherwise unusable) are skipped with a diagnostic; only a file that
//! does not parse as a feed at all is an error.

use std::io::Read;

use chrono::NaiveDate;
use serde::Deserialize;

use super::{
    classify_scope, detect_platform, is_valid_cve_id, Diagnostic, IngestError, VulnRecord,
};
use crate::scoring::round1;
use crate::vector::parse_vector;

#[derive(Deserialize)]
struct Feed {
    #[serde(rename = "CVE_Items")]
    cve_items: Vec<Item>,
}

#[derive(Deserialize)]
struct Item {
    #[serde(default)]
    cve: Option<CveBlock>,
    #[serde(default)]
    configurations: Option<Configurations>,
    #[serde(default)]
    impact: Option<Impact>,
    #[serde(rename = "publishedDate", default)]
    published_date: Option<String>,
}

#[derive(Deserialize)]
struct CveBlock {
    #[serde(rename = "CVE_data_meta", default)]
    meta: Option<Meta>,
}

#[derive(Deserialize)]
struct Meta {
    #[serde(rename = "ID", default)]
    id: Option<String>,
}

#[derive(Deserialize)]
struct Configurations {
    #[serde(default)]
    nodes: Vec<Node>,
}

#[derive(Deserialize)]
struct Node {
    #[serde(default)]
    cpe_match: Vec<CpeMatch>,
    #[serde(default)]
    children: Vec<Node>,
}

#[derive(Deserialize)]
struct CpeMatch {
    #[serde(rename = "cpe23Uri", default)]
    cpe23_uri: Option<String>,
}

#[derive(Deserialize)]
struct Impact {
    #[serde(rename = "baseMetricV2", default)]
    base_metric_v2: Option<BaseMetricV2>,
}

#[derive(Deserialize)]
struct BaseMetricV2 {
    #[serde(rename = "cvssV2", default)]
    cvss_v2: Option<CvssV2Block>,
}

#[derive(Deserialize)]
struct CvssV2Block {
    #[serde(rename = "vectorString", default)]
    vector_string: Option<String>,
    #[serde(rename = "baseScore", default)]
    base_score: Option<f64>,
}

fn collect_cpes(nodes: &[Node], out: &mut Vec<String>) {
    for node in nodes {
        for m in &node.cpe_match {
            if let Some(uri) = &m.cpe23_uri {
                out.push(uri.clone());
            }
        }
        collect_cpes(&node.children, out);
    }
}

/// Result of parsing one feed file.
#[derive(Debug)]
pub struct NvdFeedParse {
    pub records: Vec<VulnRecord>,
    pub diagnostics: Vec<Diagnostic>,
    skipped: usize,
}

impl NvdFeedParse {
    /// Items that did not become records.
    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

/// Parse a gzip-decompressed NVD JSON 1.1 feed document.
pub fn parse_nvd_feed(reader: impl Read) -> Result<NvdFeedParse, IngestError> {
    let feed: Feed =
        serde_json::from_reader(reader).map_err(|e| IngestError::MalformedFeed(e.to_string()))?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut skipped = 0;

    for (index, item) in feed.cve_items.iter().enumerate() {
        let skip = |id: Option<String>, reason: String, diagnostics: &mut Vec<Diagnostic>| {
            diagnostics.push(Diagnostic::new(id, reason));
        };

        let id = item
            .cve
            .as_ref()
            .and_then(|c| c.meta.as_ref())
            .and_then(|m| m.id.clone());
        let Some(cve_id) = id else {
            skipped += 1;
            skip(
                None,
                format!("item #{index}: missing CVE id"),
                &mut diagnostics,
            );
            continue;
        };
        if !is_valid_cve_id(&cve_id) {
            skipped += 1;
            skip(
                Some(cve_id.clone()),
                "id does not match the CVE grammar".into(),
                &mut diagnostics,
            );
            continue;
        }

        let cvss = item
            .impact
            .as_ref()
            .and_then(|i| i.base_metric_v2.as_ref())
            .and_then(|m| m.cvss_v2.as_ref());
        let Some(cvss) = cvss else {
            skipped += 1;
            skip(Some(cve_id), "no CVSS v2 metrics".into(), &mut diagnostics);
            continue;
        };
        let (Some(vector_string), Some(base_score)) = (&cvss.vector_string, cvss.base_score) else {
            skipped += 1;
            skip(
                Some(cve_id),
                "incomplete CVSS v2 metrics".into(),
                &mut diagnostics,
            );
            continue;
        };
        let vector = match parse_vector(vector_string) {
            Ok(v) => v,
            Err(e) => {
                skipped += 1;
                skip(
                    Some(cve_id),
                    format!("unusable v2 vector: {e}"),
                    &mut diagnostics,
                );
                continue;
            }
        };

        let published = item
            .published_date
            .as_deref()
            .and_then(|d| NaiveDate::parse_from_str(d.get(..10)?, "%Y-%m-%d").ok());
        let Some(published) = published else {
            skipped += 1;
            skip(
                Some(cve_id),
                "missing or unparseable publishedDate".into(),
                &mut diagnostics,
            );
            continue;
        };

        let mut cpe_uris = Vec::new();
        if let Some(configurations) = &item.configurations {
            collect_cpes(&configurations.nodes, &mut cpe_uris);
        }
        let scope = match classify_scope(&cpe_uris) {
            Ok(scope) => Some(scope),
            Err(_) => {
                diagnostics.push(Diagnostic::new(
                    Some(cve_id.clone()),
                    "scope unresolved: CPE list empty or malformed (record kept)",
                ));
                None
            }
        };

        records.push(VulnRecord {
            platform: detect_platform(&cpe_uris),
            cve_id,
            published,
            vector,
            nvd_base_score: round1(base_score),
            scope,
            cpe_uris,
        });
    }

    Ok(NvdFeedParse {
        records,
        diagnostics,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Platform;
    use crate::scoring::VulnScope;

    fn item(id: &str, vector: &str, score: f64, cpe: &str) -> String {
        format!(
            r#"{{
              "cve": {{"CVE_data_meta": {{"ID": "{id}"}}}},
              "configurations": {{"nodes": [{{"operator": "OR", "cpe_match": [{{"vulnerable": true, "cpe23Uri": "{cpe}"}}]}}]}},
              "impact": {{"baseMetricV2": {{"cvssV2": {{"version": "2.0", "vectorString": "{vector}", "baseScore": {score}}}, "severity": "MEDIUM"}}}},
              "publishedDate": "2015-10-01T00:29Z"
            }}"#
        )
    }

    fn feed(items: &[String]) -> String {
        format!(
            r#"{{"CVE_data_type": "CVE", "CVE_Items": [{}]}}"#,
            items.join(",")
        )
    }

    #[test]
    fn parses_a_full_item() {
        let text = feed(&[item(
            "CVE-2015-6602",
            "AV:N/AC:M/Au:N/C:P/I:P/A:P",
            6.8,
            "cpe:2.3:o:google:android:5.1:*:*:*:*:*:*:*",
        )]);
        let parse = parse_nvd_feed(text.as_bytes()).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.skipped(), 0);
        let record = &parse.records[0];
        assert_eq!(record.cve_id, "CVE-2015-6602");
        assert_eq!(record.platform, Platform::Android);
        assert_eq!(record.scope, Some(VulnScope::OperatingSystem));
        assert_eq!(record.nvd_base_score, 6.8);
        assert_eq!(record.published.to_string(), "2015-10-01");
        assert_eq!(record.cpe_uris.len(), 1);
    }

    #[test]
    fn skips_items_without_v2_metrics() {
        let no_v2 = r#"{
          "cve": {"CVE_data_meta": {"ID": "CVE-2016-0001"}},
          "impact": {},
          "publishedDate": "2016-01-05T00:00Z"
        }"#;
        let text = feed(&[no_v2.to_string()]);
        let parse = parse_nvd_feed(text.as_bytes()).unwrap();
        assert!(parse.records.is_empty());
        assert_eq!(parse.skipped(), 1);
        assert_eq!(parse.diagnostics.len(), 1);
        assert!(parse.diagnostics[0].reason.contains("no CVSS v2 metrics"));
        assert_eq!(parse.diagnostics[0].id.as_deref(), Some("CVE-2016-0001"));
    }

    #[test]
    fn empty_items_array_is_fine() {
        let parse = parse_nvd_feed(r#"{"CVE_Items": []}"#.as_bytes()).unwrap();
        assert!(parse.records.is_empty());
        assert!(parse.diagnostics.is_empty());
        assert_eq!(parse.skipped(), 0);
    }

    #[test]
    fn missing_items_array_is_malformed() {
        assert!(matches!(
            parse_nvd_feed(r#"{"nope": 1}"#.as_bytes()),
            Err(IngestError::MalformedFeed(_))
        ));
        assert!(matches!(
            parse_nvd_feed("not json".as_bytes()),
            Err(IngestError::MalformedFeed(_))
        ));
    }

    #[test]
    fn keeps_record_with_unresolved_scope() {
        let no_cpe = r#"{
          "cve": {"CVE_data_meta": {"ID": "CVE-2016-0002"}},
          "impact": {"baseMetricV2": {"cvssV2": {"vectorString": "AV:N/AC:L/Au:N/C:P/I:N/A:N", "baseScore": 5.0}}},
          "publishedDate": "2016-02-01T00:00Z"
        }"#;
        let parse = parse_nvd_feed(feed(&[no_cpe.to_string()]).as_bytes()).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.records[0].scope, None);
        assert_eq!(parse.records[0].platform, Platform::Other);
        assert_eq!(parse.skipped(), 0);
        assert!(parse.diagnostics[0].reason.contains("scope unresolved"));
    }

    #[test]
    fn nested_cpe_nodes_are_collected() {
        let nested = r#"{
          "cve": {"CVE_data_meta": {"ID": "CVE-2016-0003"}},
          "configurations": {"nodes": [{"operator": "AND", "children": [
            {"cpe_match": [{"cpe23Uri": "cpe:2.3:a:vendor:app:1.0:*:*:*:*:*:*:*"}]},
            {"cpe_match": [{"cpe23Uri": "cpe:2.3:o:apple:iphone_os:9.3:*:*:*:*:*:*:*"}]}
          ]}]},
          "impact": {"baseMetricV2": {"cvssV2": {"vectorString": "AV:N/AC:M/Au:N/C:P/I:P/A:P", "baseScore": 6.8}}},
          "publishedDate": "2016-03-01T00:00Z"
        }"#;
        let parse = parse_nvd_feed(feed(&[nested.to_string()]).as_bytes()).unwrap();
        let record = &parse.records[0];
        assert_eq!(record.cpe_uris.len(), 2);
        assert_eq!(record.platform, Platform::Ios);
        assert_eq!(record.scope, Some(VulnScope::OperatingSystem));
    }

    #[test]
    fn bad_vector_string_is_skipped_not_fatal() {
        let text = feed(&[
            item(
                "CVE-2016-0004",
                "AV:X/AC:M/Au:N/C:P/I:P/A:P",
                6.8,
                "cpe:2.3:o:google:android:6.0:*:*:*:*:*:*:*",
            ),
            item(
                "CVE-2016-0005",
                "AV:N/AC:M/Au:N/C:P/I:P/A:P",
                6.8,
                "cpe:2.3:o:google:android:6.0:*:*:*:*:*:*:*",
            ),
        ]);
        let parse = parse_nvd_feed(text.as_bytes()).unwrap();
        assert_eq!(parse.records.len(), 1);
        assert_eq!(parse.records[0].cve_id, "CVE-2016-0005");
        assert_eq!(parse.skipped(), 1);
    }
}
