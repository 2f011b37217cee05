//! Batch scans over one-parameter families `y^2 = x^3 + (a0 + a1 n) x + (b0 + b1 n)`.
//!
//! For each `n` the scan checks the middle-term hypotheses at `p`, finds a
//! point of infinite order (ingested, else the smallest-height one found by
//! a naive search), decomposes it and records whether the formal component
//! is nontrivial. Rank is never computed: the reported fraction is over
//! curves with a certified point of infinite order, which is a proxy for
//! rank-one curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::NatPrime;
use crate::curve::{Curve, QPoint};
use crate::ingest::IngestedCurve;
use crate::local::decompose_point;
use crate::padic::DEFAULT_PRECISION;
use crate::quadratic::ImagQuadField;
use crate::verdict::{brauer_middle_term_from_record, global_lift_verdict, HypothesisRecord};

/// Always printed with a report: what the fraction does and does not measure.
pub const PROXY_NOTE: &str = "fraction = nontrivial / with_generator, taken over curves with a certified point of \
infinite order found by naive search or ingested; rank is not computed, so this is a proxy \
for rank-one curves. The 87% figure over n in [-5000, 5000] with external rank data is NOT reproduced by this scan.";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurveyError {
    #[error("empty parameter range [{0}, {1}]")]
    EmptyRange(i64, i64),
    #[error("family prime must be at least 5, got {0}")]
    SmallPrime(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    #[serde(serialize_with = "ser_display")]
    pub a0: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub a1: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub b0: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub b1: BigInt,
    pub n_min: i64,
    pub n_max: i64,
    pub p: NatPrime,
    pub field: ImagQuadField,
    pub height: u64,
    /// Generators keyed by `(A, B)`, taking precedence over the search.
    #[serde(skip)]
    pub generators: BTreeMap<(BigInt, BigInt), QPoint>,
    pub precision: u32,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl FamilySpec {
    /// `y^2 = x^3 + (b0 + b1 n)` with `A = 0`.
    pub fn new(
        a: (i64, i64),
        b: (i64, i64),
        range: (i64, i64),
        p: NatPrime,
        field: ImagQuadField,
        height: u64,
    ) -> Result<Self, SurveyError> {
        if range.0 > range.1 {
            return Err(SurveyError::EmptyRange(range.0, range.1));
        }
        if p.get() < 5 {
            return Err(SurveyError::SmallPrime(p.get()));
        }
        Ok(FamilySpec {
            a0: a.0.into(),
            a1: a.1.into(),
            b0: b.0.into(),
            b1: b.1.into(),
            n_min: range.0,
            n_max: range.1,
            p,
            field,
            height,
            generators: BTreeMap::new(),
            precision: DEFAULT_PRECISION,
        })
    }

    /// The family `y^2 = x^3 - 2 + 7n` at `p = 7` over `Q(sqrt(-3))`.
    pub fn cm_family_at_seven(range: (i64, i64), height: u64) -> Result<Self, SurveyError> {
        FamilySpec::new(
            (0, 0),
            (-2, 7),
            range,
            NatPrime::new(7).expect("prime"),
            ImagQuadField::new(-3).expect("class number one"),
            height,
        )
    }

    pub fn with_generator(mut self, a: BigInt, b: BigInt, pt: QPoint) -> Self {
        self.generators.insert((a, b), pt);
        self
    }

    pub fn with_range(&self, n_min: i64, n_max: i64) -> Self {
        FamilySpec {
            n_min,
            n_max,
            ..self.clone()
        }
    }

    pub fn coefficients(&self, n: i64) -> (BigInt, BigInt) {
        let n = BigInt::from(n);
        (&self.a0 + &self.a1 * &n, &self.b0 + &self.b1 * &n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "point", rename_all = "lowercase")]
pub enum GeneratorStatus {
    Found(QPoint),
    Ingested(QPoint),
    Unknown,
}

impl GeneratorStatus {
    pub fn point(&self) -> Option<&QPoint> {
        match self {
            GeneratorStatus::Found(p) | GeneratorStatus::Ingested(p) => Some(p),
            GeneratorStatus::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionFlag {
    True,
    False,
    NotRun,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyRow {
    pub n: i64,
    pub label: String,
    #[serde(rename = "A", serialize_with = "ser_display")]
    pub a: BigInt,
    #[serde(rename = "B", serialize_with = "ser_display")]
    pub b: BigInt,
    /// Good reduction at the family prime.
    pub good: bool,
    pub anomalous: Option<bool>,
    pub splits: bool,
    /// The middle-term hypotheses hold.
    pub eligible: bool,
    pub generator: GeneratorStatus,
    /// `[x_num, x_den, y_num, y_den]` of the generator, for re-ingestion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gen: Option<[String; 4]>,
    pub formal_nontrivial: DecompositionFlag,
    pub verdicts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Aggregate {
    pub eligible: usize,
    pub with_generator: usize,
    pub nontrivial: usize,
    /// `nontrivial/with_generator` in lowest terms; `None` when nothing is
    /// eligible.
    pub fraction: Option<String>,
    pub generator_unknown: usize,
    pub decomposition_errors: usize,
}

impl Aggregate {
    pub fn from_rows(rows: &[SurveyRow]) -> Aggregate {
        let eligible: Vec<_> = rows.iter().filter(|r| r.eligible).collect();
        let with_generator = eligible.iter().filter(|r| r.generator.point().is_some()).count();
        let nontrivial = eligible
            .iter()
            .filter(|r| r.formal_nontrivial == DecompositionFlag::True)
            .count();
        let decomposition_errors = eligible
            .iter()
            .filter(|r| matches!(r.formal_nontrivial, DecompositionFlag::Error(_)))
            .count();
        let fraction = (with_generator > 0).then(|| {
            let g = nontrivial.gcd(&with_generator);
            format!("{}/{}", nontrivial / g.max(1), with_generator / g.max(1))
        });
        Aggregate {
            eligible: eligible.len(),
            with_generator,
            nontrivial,
            fraction,
            generator_unknown: eligible.len() - with_generator,
            decomposition_errors,
        }
    }

    /// `nontrivial / with_generator` as a percentage with two decimals,
    /// computed in integers so the text is reproducible.
    pub fn percent(&self) -> Option<String> {
        if self.with_generator == 0 {
            return None;
        }
        let scaled = (self.nontrivial as u128 * 20000 + self.with_generator as u128) / (2 * self.with_generator as u128);
        Some(format!("{}.{:02}%", scaled / 100, scaled % 100))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyReport {
    pub rows: Vec<SurveyRow>,
    pub aggregate: Aggregate,
    pub note: String,
}

impl SurveyReport {
    pub fn from_rows(mut rows: Vec<SurveyRow>) -> SurveyReport {
        rows.sort_by_key(|r| r.n);
        let aggregate = Aggregate::from_rows(&rows);
        SurveyReport {
            rows,
            aggregate,
            note: PROXY_NOTE.to_string(),
        }
    }
}

/// Smallest-height point of infinite order with naive height at most `h`.
pub fn find_generator(curve: &Curve, height: u64) -> Option<QPoint> {
    curve
        .naive_point_search(height)
        .into_iter()
        .find(|pt| curve.has_infinite_order(pt))
}

/// Prime, field and search settings shared by every row of a survey.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSettings {
    pub p: NatPrime,
    pub field: ImagQuadField,
    pub height: u64,
    pub precision: u32,
}

pub fn scan_row(spec: &FamilySpec, n: i64) -> SurveyRow {
    let (a, b) = spec.coefficients(n);
    let ingested = spec.generators.get(&(a.clone(), b.clone()));
    let settings = RowSettings {
        p: spec.p,
        field: spec.field,
        height: spec.height,
        precision: spec.precision,
    };
    survey_curve(n, format!("E_{n}"), a, b, ingested, &settings)
}

/// One row: hypotheses, generator, decomposition and verdicts for
/// `y^2 = x^3 + ax + b`. Errors are recorded in the row.
pub fn survey_curve(
    n: i64,
    label: String,
    a: BigInt,
    b: BigInt,
    ingested: Option<&QPoint>,
    settings: &RowSettings,
) -> SurveyRow {
    let mut row = SurveyRow {
        n,
        label: label.clone(),
        a: a.clone(),
        b: b.clone(),
        good: false,
        anomalous: None,
        splits: settings.field.splits_completely(settings.p),
        eligible: false,
        generator: GeneratorStatus::Unknown,
        gen: None,
        formal_nontrivial: DecompositionFlag::NotRun,
        verdicts: Vec::new(),
        error: None,
    };
    let curve = match Curve::new(a, b) {
        Ok(c) => c.with_label(label),
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let h = HypothesisRecord::for_curve(&curve, settings.p).with_cm(settings.field);
    row.good = h.good_reduction.as_ref().is_some_and(|f| f.value);
    row.anomalous = h.anomalous.as_ref().map(|f| f.value);
    let prior = brauer_middle_term_from_record(&h);
    row.eligible = !prior.is_empty();
    row.verdicts = prior.iter().map(|v| v.conclusion.name().to_string()).collect();
    if !row.eligible {
        return row;
    }

    row.generator = match ingested {
        Some(pt) => GeneratorStatus::Ingested(pt.clone()),
        None => match find_generator(&curve, settings.height) {
            Some(pt) => GeneratorStatus::Found(pt),
            None => GeneratorStatus::Unknown,
        },
    };
    let Some(pt) = row.generator.point().cloned() else {
        return row;
    };
    row.gen = pt.to_fractions().map(|f| f.map(|c| c.to_string()));
    match decompose_point(&curve, &pt, settings.p, settings.precision) {
        Ok(dec) => {
            row.formal_nontrivial = if dec.formal_nontrivial {
                DecompositionFlag::True
            } else {
                DecompositionFlag::False
            };
            if let Some(v) = global_lift_verdict(&dec, prior.first()) {
                row.verdicts.push(v.conclusion.name().to_string());
            }
        }
        Err(e) => {
            row.formal_nontrivial = DecompositionFlag::Error(e.to_string());
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Survey an explicit list of curves; `n` is the source line number.
pub fn survey_curves(curves: &[IngestedCurve], settings: &RowSettings) -> SurveyReport {
    let rows: Vec<SurveyRow> = curves
        .par_iter()
        .map(|c| {
            let label = c.label.clone().unwrap_or_else(|| format!("line_{}", c.line));
            survey_curve(
                c.line as i64,
                label,
                c.curve.a().clone(),
                c.curve.b().clone(),
                c.generator.as_ref(),
                settings,
            )
        })
        .collect();
    SurveyReport::from_rows(rows)
}

/// Scan every `n` in the range in parallel; rows come back sorted by `n`.
pub fn scan_family(spec: &FamilySpec) -> SurveyReport {
    let rows: Vec<SurveyRow> = (spec.n_min..=spec.n_max)
        .into_par_iter()
        .map(|n| scan_row(spec, n))
        .collect();
    SurveyReport::from_rows(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "label",
    "good7",
    "anomalous",
    "splits",
    "generator",
    "formal_nontrivial",
    "verdicts",
];

fn flag_text(f: &DecompositionFlag) -> String {
    match f {
        DecompositionFlag::True => "true".into(),
        DecompositionFlag::False => "false".into(),
        DecompositionFlag::NotRun => "not-run".into(),
        DecompositionFlag::Error(_) => "error".into(),
    }
}

fn generator_text(g: &GeneratorStatus) -> String {
    match g {
        GeneratorStatus::Found(p) => format!("found {p}"),
        GeneratorStatus::Ingested(p) => format!("ingested {p}"),
        GeneratorStatus::Unknown => "unknown".into(),
    }
}

/// Footer line of the CSV report.
pub fn csv_footer(agg: &Aggregate) -> String {
    let fraction = agg.fraction.clone().unwrap_or_else(|| "none".into());
    let mut s = format!(
        "#aggregate eligible={} with_generator={} nontrivial={} fraction={} generator_unknown={} decomposition_errors={}",
        agg.eligible, agg.with_generator, agg.nontrivial, fraction, agg.generator_unknown, agg.decomposition_errors
    );
    if agg.eligible == 0 {
        s.push_str(" note=no eligible curves");
    } else if agg.with_generator == 0 {
        s.push_str(" note=no eligible curve has a known generator");
    } else if let Some(pct) = agg.percent() {
        let _ = write!(s, " percent={pct}");
    }
    s
}

/// Render the report. Column order, row order and number formatting are
/// fixed, so equal inputs give byte-identical output.
pub fn emit_report(report: &SurveyReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for r in &report.rows {
                w.write_record([
                    r.n.to_string(),
                    r.label.clone(),
                    r.good.to_string(),
                    r.anomalous.map(|b| b.to_string()).unwrap_or_else(|| "unknown".into()),
                    r.splits.to_string(),
                    generator_text(&r.generator),
                    flag_text(&r.formal_nontrivial),
                    r.verdicts.join(";"),
                ])
                .expect("in-memory write");
            }
            let mut out = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
            out.push_str(&csv_footer(&report.aggregate));
            out.push('\n');
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ingest_str;

    #[test]
    fn single_ingested_row() {
        let spec = FamilySpec::cm_family_at_seven((0, 0), 100)
            .unwrap()
            .with_generator(0.into(), (-2).into(), QPoint::from_integers(3, 5));
        let report = scan_family(&spec);
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.good && row.eligible && row.splits);
        assert_eq!(row.anomalous, Some(true));
        assert_eq!(row.generator, GeneratorStatus::Ingested(QPoint::from_integers(3, 5)));
        assert_eq!(row.formal_nontrivial, DecompositionFlag::True);
        assert!(row.verdicts.contains(&"UnconditionalExactness".to_string()));
        let csv = emit_report(&report, ReportFormat::Csv);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn empty_report_has_header_and_footer() {
        let report = SurveyReport::from_rows(Vec::new());
        let csv = emit_report(&report, ReportFormat::Csv);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].contains("fraction=none"));
        assert!(lines[1].contains("no eligible curves"));
        assert_eq!(report.aggregate.fraction, None);
    }

    #[test]
    fn ineligible_family_reports_no_eligible_curves() {
        // Q(sqrt(-3)) at p = 5: 5 is inert, nothing is eligible
        let spec = FamilySpec::new(
            (0, 0),
            (-2, 7),
            (0, 3),
            NatPrime::new(5).unwrap(),
            ImagQuadField::new(-3).unwrap(),
            50,
        )
        .unwrap();
        let report = scan_family(&spec);
        assert_eq!(report.aggregate.eligible, 0);
        assert!(emit_report(&report, ReportFormat::Csv).contains("no eligible curves"));
    }

    #[test]
    fn json_rows_reingest() {
        let spec = FamilySpec::cm_family_at_seven((-3, 3), 200).unwrap();
        let report = scan_family(&spec);
        for row in &report.rows {
            assert!(row.good, "n = {}", row.n);
            assert_eq!(row.anomalous, Some(true));
        }
        let json: serde_json::Value = serde_json::from_str(&emit_report(&report, ReportFormat::Json)).unwrap();
        let lines: Vec<String> = json["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r.to_string())
            .collect();
        let back = ingest_str(&lines.join("\n"));
        assert!(back.is_clean(), "{back:?}");
        assert_eq!(back.curves.len(), report.rows.len());
        for (c, r) in back.curves.iter().zip(&report.rows) {
            assert_eq!(c.curve.a(), &r.a);
            assert_eq!(c.curve.b(), &r.b);
            assert_eq!(c.generator.as_ref(), r.generator.point());
        }
    }
}
