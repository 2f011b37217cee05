//! Anomalous primes, CM elliptic curves and the `p`-adic decomposition of
//! rational points along a torsion point lifted from `E(F_p)`.

pub mod arith;
mod bigserde;
pub mod curve;
pub mod fp;
pub mod ingest;
pub mod local;
pub mod padic;
pub mod poly;
pub mod quadratic;
pub mod survey;
pub mod verdict;

pub use arith::{cornacchia, is_prime, kronecker_symbol, sqrt_mod_p, ArithError, NatPrime};
pub use curve::{Curve, CurveError, QPoint, ReductionKind, ReductionType};
pub use fp::{FpCurve, FpError, FpPoint, OrdinaryClass};
pub use local::{decompose_point, Decomposition, LocalCurve, LocalError, QpPoint};
pub use padic::{newton_lift, PadicError, PadicNumber};
pub use poly::IntPoly;
pub use quadratic::{anomalous_residues_d3, FrobeniusPair, ImagQuadField, QuadError};
pub use verdict::{Conclusion, Fact, HypothesisRecord, Provenance, Rule, Verdict};
pub use ingest::{ingest_curves, ingest_str, IngestReport, IngestedCurve};
pub use survey::{emit_report, scan_family, FamilySpec, ReportFormat, SurveyReport, SurveyRow};
