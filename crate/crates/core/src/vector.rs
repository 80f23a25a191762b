//! CVSS v2 base-metric domain types and the standard vector-string syntax.
//!
//! A base vector is six `KEY:V` pairs joined by `/` in the fixed order
//! AV, AC, Au, C, I, A, e.g. `AV:N/AC:L/Au:N/C:C/I:C/A:C`. Input may be
//! wrapped in a single pair of parentheses (both NVD styles occur in the
//! wild); output never is.

use std::fmt;

use thiserror::Error;

/// Where the attacker must be to exploit the vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccessVector {
    Local,
    AdjacentNetwork,
    Network,
}

impl AccessVector {
    pub const ALL: [AccessVector; 3] = [
        AccessVector::Local,
        AccessVector::AdjacentNetwork,
        AccessVector::Network,
    ];

    pub fn weight(self) -> f64 {
        match self {
            AccessVector::Local => 0.395,
            AccessVector::AdjacentNetwork => 0.646,
            AccessVector::Network => 1.0,
        }
    }

    pub fn letter(self) -> char {
        match self {
            AccessVector::Local => 'L',
            AccessVector::AdjacentNetwork => 'A',
            AccessVector::Network => 'N',
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "L" => Some(AccessVector::Local),
            "A" => Some(AccessVector::AdjacentNetwork),
            "N" => Some(AccessVector::Network),
            _ => None,
        }
    }
}

/// How hard the attack is once the attacker has access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccessComplexity {
    High,
    Medium,
    Low,
}

impl AccessComplexity {
    pub const ALL: [AccessComplexity; 3] = [
        AccessComplexity::High,
        AccessComplexity::Medium,
        AccessComplexity::Low,
    ];

    pub fn weight(self) -> f64 {
        match self {
            AccessComplexity::High => 0.35,
            AccessComplexity::Medium => 0.61,
            AccessComplexity::Low => 0.71,
        }
    }

    pub fn letter(self) -> char {
        match self {
            AccessComplexity::High => 'H',
            AccessComplexity::Medium => 'M',
            AccessComplexity::Low => 'L',
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "H" => Some(AccessComplexity::High),
            "M" => Some(AccessComplexity::Medium),
            "L" => Some(AccessComplexity::Low),
            _ => None,
        }
    }
}

/// How many times the attacker must authenticate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Authentication {
    Multiple,
    Single,
    None,
}

impl Authentication {
    pub const ALL: [Authentication; 3] = [
        Authentication::Multiple,
        Authentication::Single,
        Authentication::None,
    ];

    pub fn weight(self) -> f64 {
        match self {
            Authentication::Multiple => 0.45,
            Authentication::Single => 0.56,
            Authentication::None => 0.704,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Authentication::Multiple => 'M',
            Authentication::Single => 'S',
            Authentication::None => 'N',
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "M" => Some(Authentication::Multiple),
            "S" => Some(Authentication::Single),
            "N" => Some(Authentication::None),
            _ => None,
        }
    }
}

/// Impact level on one of the confidentiality/integrity/availability axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CiaImpact {
    None,
    Partial,
    Complete,
}

impl CiaImpact {
    pub const ALL: [CiaImpact; 3] = [CiaImpact::None, CiaImpact::Partial, CiaImpact::Complete];

    pub fn letter(self) -> char {
        match self {
            CiaImpact::None => 'N',
            CiaImpact::Partial => 'P',
            CiaImpact::Complete => 'C',
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "N" => Some(CiaImpact::None),
            "P" => Some(CiaImpact::Partial),
            "C" => Some(CiaImpact::Complete),
            _ => None,
        }
    }
}

/// The six CVSS v2 base metrics of one vulnerability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CvssVector {
    pub av: AccessVector,
    pub ac: AccessComplexity,
    pub au: Authentication,
    pub c: CiaImpact,
    pub i: CiaImpact,
    pub a: CiaImpact,
}

/// Parse failure for a vector string. Both variants carry the offending
/// token and its zero-based segment position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorParseError {
    #[error("malformed vector: {reason} (token `{token}` at segment {position})")]
    MalformedVector {
        reason: String,
        token: String,
        position: usize,
    },
    #[error("unknown metric value `{token}` at segment {position}")]
    UnknownMetricValue { token: String, position: usize },
}

const METRIC_KEYS: [&str; 6] = ["AV", "AC", "Au", "C", "I", "A"];

/// Parse a CVSS v2 base vector string such as `AV:N/AC:L/Au:N/C:C/I:C/A:C`.
///
/// A single pair of surrounding parentheses is accepted and stripped.
/// Metric keys are case-sensitive and must appear in canonical order;
/// temporal or environmental segments are rejected outright.
pub fn parse_vector(text: &str) -> Result<CvssVector, VectorParseError> {
    let trimmed = text.trim();
    let inner = match (trimmed.starts_with('('), trimmed.ends_with(')')) {
        (true, true) => &trimmed[1..trimmed.len() - 1],
        (false, false) => trimmed,
        _ => {
            return Err(VectorParseError::MalformedVector {
                reason: "unbalanced parentheses".into(),
                token: trimmed.to_string(),
                position: 0,
            })
        }
    };

    let segments: Vec<&str> = inner.split('/').collect();
    if segments.len() != 6 {
        // Name the first segment that falls outside the expected six, or
        // the last one present when the string is short.
        let position = segments.len().min(6).saturating_sub(1).min(5);
        let token = if segments.len() > 6 {
            segments[6]
        } else {
            segments.last().copied().unwrap_or("")
        };
        return Err(VectorParseError::MalformedVector {
            reason: format!("expected 6 metrics, found {}", segments.len()),
            token: token.to_string(),
            position: if segments.len() > 6 { 6 } else { position },
        });
    }

    let mut values = [""; 6];
    for (position, (segment, key)) in segments.iter().zip(METRIC_KEYS).enumerate() {
        let (seg_key, seg_value) =
            segment
                .split_once(':')
                .ok_or_else(|| VectorParseError::MalformedVector {
                    reason: "missing `:` separator".into(),
                    token: segment.to_string(),
                    position,
                })?;
        if seg_key != key {
            return Err(VectorParseError::MalformedVector {
                reason: format!("expected metric `{key}`"),
                token: segment.to_string(),
                position,
            });
        }
        values[position] = seg_value;
    }

    let unknown = |position: usize| VectorParseError::UnknownMetricValue {
        token: segments[position].to_string(),
        position,
    };

    Ok(CvssVector {
        av: AccessVector::from_letter(values[0]).ok_or_else(|| unknown(0))?,
        ac: AccessComplexity::from_letter(values[1]).ok_or_else(|| unknown(1))?,
        au: Authentication::from_letter(values[2]).ok_or_else(|| unknown(2))?,
        c: CiaImpact::from_letter(values[3]).ok_or_else(|| unknown(3))?,
        i: CiaImpact::from_letter(values[4]).ok_or_else(|| unknown(4))?,
        a: CiaImpact::from_letter(values[5]).ok_or_else(|| unknown(5))?,
    })
}

/// Render the canonical vector string (uppercase, no parentheses).
pub fn format_vector(v: &CvssVector) -> String {
    format!(
        "AV:{}/AC:{}/Au:{}/C:{}/I:{}/A:{}",
        v.av.letter(),
        v.ac.letter(),
        v.au.letter(),
        v.c.letter(),
        v.i.letter(),
        v.a.letter()
    )
}

impl fmt::Display for CvssVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_vector(self))
    }
}

impl std::str::FromStr for CvssVector {
    type Err = VectorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_vector(s)
    }
}

impl CvssVector {
    /// Iterate over all 3^6 = 729 possible base vectors in a fixed order.
    pub fn enumerate_all() -> impl Iterator<Item = CvssVector> {
        AccessVector::ALL.into_iter().flat_map(|av| {
            AccessComplexity::ALL.into_iter().flat_map(move |ac| {
                Authentication::ALL.into_iter().flat_map(move |au| {
                    CiaImpact::ALL.into_iter().flat_map(move |c| {
                        CiaImpact::ALL.into_iter().flat_map(move |i| {
                            CiaImpact::ALL.into_iter().map(move |a| CvssVector {
                                av,
                                ac,
                                au,
                                c,
                                i,
                                a,
                            })
                        })
                    })
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> CvssVector {
        parse_vector(s).unwrap()
    }

    #[test]
    fn parses_canonical_vector() {
        let parsed = v("AV:N/AC:L/Au:N/C:C/I:C/A:C");
        assert_eq!(parsed.av, AccessVector::Network);
        assert_eq!(parsed.ac, AccessComplexity::Low);
        assert_eq!(parsed.au, Authentication::None);
        assert_eq!(parsed.c, CiaImpact::Complete);
        assert_eq!(parsed.i, CiaImpact::Complete);
        assert_eq!(parsed.a, CiaImpact::Complete);
    }

    #[test]
    fn parses_parenthesized_vector() {
        let parsed = v("(AV:N/AC:M/Au:N/C:P/I:P/A:P)");
        assert_eq!(parsed.av, AccessVector::Network);
        assert_eq!(parsed.ac, AccessComplexity::Medium);
        assert_eq!(parsed.au, Authentication::None);
        assert_eq!(parsed.c, CiaImpact::Partial);
        assert_eq!(parsed.i, CiaImpact::Partial);
        assert_eq!(parsed.a, CiaImpact::Partial);
    }

    #[test]
    fn rejects_missing_metric() {
        let err = parse_vector("AV:N/AC:L/C:C/I:C/A:C").unwrap_err();
        match err {
            VectorParseError::MalformedVector { reason, .. } => {
                assert!(reason.contains("found 5"), "{reason}");
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_order_metrics() {
        let err = parse_vector("AC:L/AV:N/Au:N/C:C/I:C/A:C").unwrap_err();
        match err {
            VectorParseError::MalformedVector {
                token, position, ..
            } => {
                assert_eq!(token, "AC:L");
                assert_eq!(position, 0);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_value_with_position() {
        let err = parse_vector("AV:X/AC:L/Au:N/C:C/I:C/A:C").unwrap_err();
        assert_eq!(
            err,
            VectorParseError::UnknownMetricValue {
                token: "AV:X".into(),
                position: 0
            }
        );
    }

    #[test]
    fn rejects_lowercase_values() {
        assert!(parse_vector("AV:n/AC:L/Au:N/C:C/I:C/A:C").is_err());
        assert!(parse_vector("av:N/AC:L/Au:N/C:C/I:C/A:C").is_err());
    }

    #[test]
    fn rejects_temporal_segments() {
        let err = parse_vector("AV:N/AC:L/Au:N/C:C/I:C/A:C/E:POC").unwrap_err();
        match err {
            VectorParseError::MalformedVector {
                token, position, ..
            } => {
                assert_eq!(token, "E:POC");
                assert_eq!(position, 6);
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn rejects_unbalanced_parentheses() {
        assert!(parse_vector("(AV:N/AC:L/Au:N/C:C/I:C/A:C").is_err());
        assert!(parse_vector("AV:N/AC:L/Au:N/C:C/I:C/A:C)").is_err());
    }

    #[test]
    fn formats_without_parentheses() {
        assert_eq!(
            format_vector(&v("(AV:L/AC:H/Au:M/C:N/I:N/A:N)")),
            "AV:L/AC:H/Au:M/C:N/I:N/A:N"
        );
    }

    #[test]
    fn round_trips_all_729_vectors() {
        let mut count = 0;
        for vector in CvssVector::enumerate_all() {
            assert_eq!(parse_vector(&format_vector(&vector)).unwrap(), vector);
            count += 1;
        }
        assert_eq!(count, 729);
    }

    #[test]
    fn rejects_single_corrupted_token_with_position() {
        // For every vector and every segment, swap the value for a letter
        // outside the allowed set and expect a positioned rejection.
        for vector in CvssVector::enumerate_all() {
            let canonical = format_vector(&vector);
            let segments: Vec<&str> = canonical.split('/').collect();
            for corrupt_at in 0..6 {
                let mut mutated: Vec<String> = segments.iter().map(|s| s.to_string()).collect();
                let key = mutated[corrupt_at].split(':').next().unwrap().to_string();
                mutated[corrupt_at] = format!("{key}:X");
                let err = parse_vector(&mutated.join("/")).unwrap_err();
                match err {
                    VectorParseError::UnknownMetricValue { position, token } => {
                        assert_eq!(position, corrupt_at);
                        assert_eq!(token, format!("{key}:X"));
                    }
                    other => panic!("unexpected error: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn weight_orderings_match_metric_severity() {
        assert!(AccessComplexity::Low.weight() > AccessComplexity::Medium.weight());
        assert!(AccessComplexity::Medium.weight() > AccessComplexity::High.weight());
        assert!(Authentication::None.weight() > Authentication::Single.weight());
        assert!(Authentication::Single.weight() > Authentication::Multiple.weight());
        assert!(AccessVector::Network.weight() > AccessVector::AdjacentNetwork.weight());
        assert!(AccessVector::AdjacentNetwork.weight() > AccessVector::Local.weight());
    }
}
