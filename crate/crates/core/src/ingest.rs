//! Line-oriented curve records.
//!
//! One record per line, as JSON or as the same structure with bare keys:
//!
//! ```text
//! {label: "E0", A: 0, B: -2, gen: [3, 1, 5, 1], rank: 1, source: "table"}
//! {"label": "11a3", "a1": 0, "a2": -1, "a3": 1, "a4": 0, "a6": 0}
//! ```
//!
//! Integers may be JSON numbers or decimal strings. Unknown keys are
//! ignored, so rows from a JSON report can be fed back in. Blank lines and
//! lines starting with `#` are skipped.

use std::path::Path;
use std::sync::OnceLock;

use num_bigint::BigInt;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{Curve, QPoint};
use crate::verdict::Fact;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestedCurve {
    pub line: usize,
    pub label: Option<String>,
    pub curve: Curve,
    pub generator: Option<QPoint>,
    /// Rank as supplied by the source; never computed here.
    pub rank: Option<Fact<u32>>,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineIssue {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub curves: Vec<IngestedCurve>,
    /// Lines that could not be parsed.
    pub malformed: Vec<LineIssue>,
    /// Well-formed lines describing an unusable curve or generator.
    pub rejected: Vec<LineIssue>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.malformed.is_empty() && self.rejected.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Int(BigInt);

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::bigserde::deserialize(d).map(Int)
    }
}

#[allow(non_snake_case)]
#[derive(Debug, Deserialize)]
struct RawRecord {
    label: Option<String>,
    A: Option<Int>,
    B: Option<Int>,
    a1: Option<Int>,
    a2: Option<Int>,
    a3: Option<Int>,
    a4: Option<Int>,
    a6: Option<Int>,
    gen: Option<Vec<Int>>,
    rank: Option<u32>,
    source: Option<String>,
}

fn bare_key_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)\s*:"#).expect("valid regex"))
}

fn parse_line(text: &str) -> Result<RawRecord, String> {
    let normalized = text.replace('\u{2212}', "-");
    match serde_json::from_str::<RawRecord>(&normalized) {
        Ok(r) => Ok(r),
        Err(first) => {
            let quoted = bare_key_pattern().replace_all(&normalized, r#"$1"$2":"#);
            serde_json::from_str::<RawRecord>(&quoted).map_err(|_| first.to_string())
        }
    }
}

fn build(line: usize, raw: RawRecord) -> Result<IngestedCurve, String> {
    let curve = match (&raw.A, &raw.B) {
        (Some(a), Some(b)) => Curve::new(a.0.clone(), b.0.clone()).map_err(|e| e.to_string())?,
        (None, None) => {
            let get = |c: &Option<Int>| c.as_ref().map(|i| i.0.clone()).unwrap_or_default();
            if [&raw.a1, &raw.a2, &raw.a3, &raw.a4, &raw.a6].iter().all(|c| c.is_none()) {
                return Err("record has neither A, B nor a1..a6".into());
            }
            Curve::from_long([get(&raw.a1), get(&raw.a2), get(&raw.a3), get(&raw.a4), get(&raw.a6)])
                .map_err(|e| e.to_string())?
        }
        _ => return Err("A and B must be given together".into()),
    };
    let generator = match raw.gen {
        None => None,
        Some(parts) => {
            let parts: [BigInt; 4] = parts
                .into_iter()
                .map(|i| i.0)
                .collect::<Vec<_>>()
                .try_into()
                .map_err(|_| "gen must have four entries [x_num, x_den, y_num, y_den]".to_string())?;
            let pt = QPoint::from_fractions(parts).ok_or("gen denominators must be positive")?;
            if !curve.contains(&pt) {
                return Err(format!("generator {pt} is not on {curve}"));
            }
            Some(pt)
        }
    };
    let curve = match &raw.label {
        Some(l) => curve.with_label(l.clone()),
        None => curve,
    };
    Ok(IngestedCurve {
        line,
        label: raw.label,
        curve,
        generator,
        rank: raw.rank.map(Fact::asserted),
        source: raw.source,
    })
}

/// Parse records from text; line numbers start at 1.
pub fn ingest_str(text: &str) -> IngestReport {
    let mut report = IngestReport::default();
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_line(trimmed) {
            Err(reason) => report.malformed.push(LineIssue { line: n, reason }),
            Ok(raw) => match build(n, raw) {
                Ok(c) => report.curves.push(c),
                Err(reason) => report.rejected.push(LineIssue { line: n, reason }),
            },
        }
    }
    report
}

pub fn ingest_curves(path: &Path) -> Result<IngestReport, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ingest_str(&text))
}
