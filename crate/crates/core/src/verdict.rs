//! Hypothesis records and one-directional decision rules.
//!
//! Each rule reads named facts from a [`HypothesisRecord`] and either fires a
//! [`Verdict`] or returns nothing. A rule never concludes the negation of its
//! statement. Facts the library checks itself are `Verified`; facts about
//! Galois structure, endomorphism rings or ranks are supplied by the caller
//! and carried as `Asserted`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::NatPrime;
use crate::curve::{valuation, Curve, ReductionKind};
use crate::local::Decomposition;
use crate::quadratic::ImagQuadField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Verified,
    Asserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Fact<T> {
    pub fn verified(value: T) -> Self {
        Fact {
            value,
            provenance: Provenance::Verified,
        }
    }

    pub fn asserted(value: T) -> Self {
        Fact {
            value,
            provenance: Provenance::Asserted,
        }
    }
}

/// Named facts about a prime, a pair of curves `E1, E2` (or a single curve
/// used as `E1 = E2`) and the base field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<Fact<u64>>,
    /// The base is an unramified extension of `Q_p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unramified: Option<Fact<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_e1: Option<Fact<ReductionKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction_e2: Option<Fact<ReductionKind>>,
    /// `p ∤ Δ` of the `p`-minimal model of the curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good_reduction: Option<Fact<bool>>,
    /// `|E(F_p)| = p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomalous: Option<Fact<bool>>,
    /// Discriminant `D` of the field whose full ring of integers is the
    /// endomorphism ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm_field: Option<Fact<i64>>,
    /// `p` splits completely in the field named by `cm_field`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits: Option<Fact<bool>>,
    /// Largest `n` with the full `p^n`-torsion rational over the base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_level: Option<Fact<u32>>,
    /// `k(A[p^(n+1)]) / k` is wildly ramified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wild_ramification: Option<Fact<bool>>,
    /// Galois acts trivially on the geometric Néron-Severi group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trivial_ns_action: Option<Fact<bool>>,
    /// The diagonal quartic surface has good reduction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic_good_reduction: Option<Fact<bool>>,
    /// Facts no rule reads; kept for reporting.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Fact<String>>,
}

impl HypothesisRecord {
    pub fn new(p: NatPrime) -> Self {
        HypothesisRecord {
            prime: Some(Fact::verified(p.get())),
            ..Default::default()
        }
    }

    /// Verified reduction data for `E1 × E2` at `p` (types are only
    /// classified for `p >= 5`).
    pub fn for_pair(e1: &Curve, e2: &Curve, p: NatPrime) -> Self {
        let mut h = HypothesisRecord::new(p);
        h.reduction_e1 = e1.reduction_type(p).ok().map(|r| Fact::verified(r.kind));
        h.reduction_e2 = e2.reduction_type(p).ok().map(|r| Fact::verified(r.kind));
        h
    }

    /// Verified reduction data for a single curve, also filling both
    /// reduction slots for the self-product.
    pub fn for_curve(e: &Curve, p: NatPrime) -> Self {
        let mut h = HypothesisRecord::for_pair(e, e, p);
        h.good_reduction = Some(Fact::verified(e.has_good_reduction(p)));
        if let Ok(r) = e.reduction_type(p) {
            h.anomalous = Some(Fact::verified(r.anomalous));
        }
        h
    }

    /// Assert CM by the full ring of integers of `field` and record the
    /// verified splitting behaviour of `p` there.
    pub fn with_cm(mut self, field: ImagQuadField) -> Self {
        self.cm_field = Some(Fact::asserted(field.discriminant()));
        if let Some(p) = self.prime.as_ref().and_then(|f| NatPrime::new(f.value).ok()) {
            self.splits = Some(Fact::verified(field.splits_completely(p)));
        }
        self
    }

    pub fn with_unramified(mut self, value: bool) -> Self {
        self.unramified = Some(Fact::asserted(value));
        self
    }

    pub fn with_torsion_level(mut self, n: u32) -> Self {
        self.torsion_level = Some(Fact::asserted(n));
        self
    }

    pub fn with_wild_ramification(mut self, value: bool) -> Self {
        self.wild_ramification = Some(Fact::asserted(value));
        self
    }

    pub fn with_trivial_ns_action(mut self, value: bool) -> Self {
        self.trivial_ns_action = Some(Fact::asserted(value));
        self
    }

    pub fn with_quartic_good_reduction(mut self, value: bool) -> Self {
        self.quartic_good_reduction = Some(Fact::asserted(value));
        self
    }

    pub fn with_extra(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.extra.insert(name.into(), Fact::asserted(value.into()));
        self
    }
}

/// Structural statements a rule can conclude. The group names are labels
/// only; nothing here computes Chow groups or Brauer groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n")]
pub enum Conclusion {
    Divisible,
    NdIsZmodPn(u32),
    MiddleTermZpSquared,
    BrauerPVanishes,
    UnconditionalExactness,
    QuarticNd2Primary,
}

impl Conclusion {
    pub fn name(&self) -> &'static str {
        match self {
            Conclusion::Divisible => "Divisible",
            Conclusion::NdIsZmodPn(_) => "NdIsZmodPn",
            Conclusion::MiddleTermZpSquared => "MiddleTermZpSquared",
            Conclusion::BrauerPVanishes => "BrauerPVanishes",
            Conclusion::UnconditionalExactness => "UnconditionalExactness",
            Conclusion::QuarticNd2Primary => "QuarticNd2Primary",
        }
    }
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Conclusion::Divisible => write!(f, "A_0 is divisible"),
            Conclusion::NdIsZmodPn(n) => write!(f, "A_0(X)_nd{{2'}} = T(A)_nd = Z/p^{n}"),
            Conclusion::MiddleTermZpSquared => write!(f, "middle term of the p-primary complex is (Z/p)^2"),
            Conclusion::BrauerPVanishes => write!(f, "Br(X_L){{p}} / Br_0 vanishes"),
            Conclusion::UnconditionalExactness => {
                write!(f, "local zero-cycle lifts; p-part exact without density assumption")
            }
            Conclusion::QuarticNd2Primary => write!(f, "A_0(D)_nd is 2-primary torsion"),
        }
    }
}

/// The decision rules, each with a fixed citation and the conclusions it may
/// produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    UnramifiedDivisibility,
    OrdinaryNdStructure,
    CmTower,
    BrauerMiddleTerm,
    GlobalLift,
    Quartic,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::UnramifiedDivisibility,
        Rule::OrdinaryNdStructure,
        Rule::CmTower,
        Rule::BrauerMiddleTerm,
        Rule::GlobalLift,
        Rule::Quartic,
    ];

    pub fn citation(&self) -> &'static str {
        match self {
            Rule::UnramifiedDivisibility => {
                "divisibility over unramified bases: Kummer surface of E1 x E2 with good ordinary or almost ordinary reduction, p odd"
            }
            Rule::OrdinaryNdStructure => {
                "non-divisible part for good ordinary products with full p^n-torsion, trivial NS action and wild ramification at level n+1"
            }
            Rule::CmTower => {
                "CM self-products over the torsion tower k_n = Q_p(E[p^n]): NS action is trivial and k_(n+1)/k_n is wildly ramified"
            }
            Rule::BrauerMiddleTerm => {
                "anomalous split prime for a CM curve: middle term (Z/p)^2 and vanishing p-primary Brauer class group of X_L, L = K(E[eta])"
            }
            Rule::GlobalLift => {
                "reduction to local points: a rational point with nontrivial formal component lifts the local cycle unconditionally"
            }
            Rule::Quartic => {
                "diagonal quartic via y^2 = (x^2 - 1)(x^2 - 1/2): p = 1 mod 4 coprime to the conductor over an unramified base"
            }
        }
    }

    pub fn allows(&self, c: &Conclusion) -> bool {
        matches!(
            (self, c),
            (Rule::UnramifiedDivisibility, Conclusion::Divisible)
                | (Rule::OrdinaryNdStructure, Conclusion::NdIsZmodPn(_))
                | (Rule::CmTower, Conclusion::NdIsZmodPn(_))
                | (Rule::BrauerMiddleTerm, Conclusion::MiddleTermZpSquared)
                | (Rule::BrauerMiddleTerm, Conclusion::BrauerPVanishes)
                | (Rule::GlobalLift, Conclusion::UnconditionalExactness)
                | (Rule::Quartic, Conclusion::QuarticNd2Primary)
                | (Rule::Quartic, Conclusion::Divisible)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsedFact {
    pub name: String,
    pub value: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: Rule,
    pub conclusion: Conclusion,
    pub statement: String,
    pub citation: String,
    pub prime: u64,
    pub hypotheses_used: Vec<UsedFact>,
    /// Whether any hypothesis used is asserted rather than verified.
    pub conditional: bool,
}

impl Verdict {
    fn new(rule: Rule, conclusion: Conclusion, prime: u64, used: Vec<UsedFact>) -> Verdict {
        debug_assert!(rule.allows(&conclusion));
        let conditional = used.iter().any(|u| u.provenance == Provenance::Asserted);
        Verdict {
            rule,
            conclusion,
            statement: conclusion.to_string(),
            citation: rule.citation().to_string(),
            prime,
            hypotheses_used: used,
            conditional,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at p = {} [{}]{}",
            self.conclusion.name(),
            self.prime,
            self.statement,
            if self.conditional { " (conditional on asserted facts)" } else { "" }
        )
    }
}

/// Collects the facts a rule reads, failing as soon as one is missing or
/// does not satisfy the rule.
struct Uses(Vec<UsedFact>);

impl Uses {
    fn new() -> Self {
        Uses(Vec::new())
    }

    fn take<T: fmt::Debug + Clone>(
        &mut self,
        name: &str,
        fact: &Option<Fact<T>>,
        ok: impl Fn(&T) -> bool,
    ) -> Option<T> {
        let fact = fact.as_ref()?;
        if !ok(&fact.value) {
            return None;
        }
        self.0.push(UsedFact {
            name: name.to_string(),
            value: format!("{:?}", fact.value),
            provenance: fact.provenance,
        });
        Some(fact.value.clone())
    }

    fn push(&mut self, name: &str, value: impl fmt::Display, provenance: Provenance) {
        self.0.push(UsedFact {
            name: name.to_string(),
            value: value.to_string(),
            provenance,
        });
    }
}

fn is_good(k: &ReductionKind) -> bool {
    matches!(k, ReductionKind::GoodOrdinary | ReductionKind::GoodSupersingular)
}

/// Kummer surface of `E1 × E2` over an unramified base, `p` odd, both curves
/// good with at most one supersingular: `A_0(X)` is divisible.
pub fn divisibility_verdict(h: &HypothesisRecord) -> Option<Verdict> {
    let mut u = Uses::new();
    let p = u.take("p > 2", &h.prime, |p| *p > 2)?;
    u.take("base unramified", &h.unramified, |b| *b)?;
    let r1 = u.take("E1 good reduction", &h.reduction_e1, is_good)?;
    let r2 = u.take("E2 good reduction", &h.reduction_e2, is_good)?;
    let supersingular = [r1, r2]
        .iter()
        .filter(|r| **r == ReductionKind::GoodSupersingular)
        .count();
    if supersingular > 1 {
        return None;
    }
    Some(Verdict::new(Rule::UnramifiedDivisibility, Conclusion::Divisible, p, u.0))
}

/// Good ordinary product with full `p^n`-torsion, trivial NS action and wild
/// ramification of `k(A[p^(n+1)])/k`: the non-divisible part is `Z/p^n`.
pub fn nd_structure_verdict(h: &HypothesisRecord) -> Option<Verdict> {
    let mut u = Uses::new();
    let p = u.take("p > 2", &h.prime, |p| *p > 2)?;
    let ord = |k: &ReductionKind| *k == ReductionKind::GoodOrdinary;
    u.take("E1 good ordinary", &h.reduction_e1, ord)?;
    u.take("E2 good ordinary", &h.reduction_e2, ord)?;
    let n = u.take("full p^n-torsion level n", &h.torsion_level, |n| *n >= 1)?;
    u.take("k(A[p^(n+1)])/k wildly ramified", &h.wild_ramification, |b| *b)?;
    u.take("trivial NS Galois action", &h.trivial_ns_action, |b| *b)?;
    Some(Verdict::new(Rule::OrdinaryNdStructure, Conclusion::NdIsZmodPn(n), p, u.0))
}

/// `E × E` over `k_n = Q_p(E[p^n])` for `E` with CM by the full ring of
/// integers of `D` (asserted) and good ordinary reduction (verified). The NS
/// and wild-ramification hypotheses follow from the CM structure.
pub fn cm_tower_verdict(e: &Curve, d: ImagQuadField, p: NatPrime, n: u32) -> Option<Verdict> {
    let h = HypothesisRecord::for_curve(e, p).with_cm(d);
    cm_tower_from_record(&h, n)
}

pub fn cm_tower_from_record(h: &HypothesisRecord, n: u32) -> Option<Verdict> {
    if n == 0 {
        return None;
    }
    let mut u = Uses::new();
    let p = u.take("p > 2", &h.prime, |p| *p > 2)?;
    let d = u.take("CM by full ring of integers of Q(sqrt(D))", &h.cm_field, |d| {
        ImagQuadField::ALL.contains(d)
    })?;
    u.take("p splits in Q(sqrt(D)) (endomorphisms over Q_p)", &h.splits, |b| *b)?;
    u.take("E good ordinary", &h.reduction_e1, |k| *k == ReductionKind::GoodOrdinary)?;
    let provenance = h.cm_field.as_ref().map(|f| f.provenance).unwrap_or(Provenance::Asserted);
    u.push("trivial NS Galois action (from CM)", format!("D = {d}"), provenance);
    u.push("k_(n+1)/k_n wildly ramified (from CM)", format!("e(k_n) = (p-1)p^(n-1), n = {n}"), provenance);
    Some(Verdict::new(Rule::CmTower, Conclusion::NdIsZmodPn(n), p, u.0))
}

/// The middle term and Brauer vanishing for `X_L`: verified `p >= 5`, `p`
/// splits completely in `Q(sqrt(D))`, good reduction (standing in for
/// coprimality to the conductor) and `|E(F_p)| = p`; asserted CM by the full
/// ring of integers of `D`.
pub fn brauer_middle_term_verdict(e: &Curve, d: ImagQuadField, p: NatPrime) -> Vec<Verdict> {
    let h = HypothesisRecord::for_curve(e, p).with_cm(d);
    brauer_middle_term_from_record(&h)
}

pub fn brauer_middle_term_from_record(h: &HypothesisRecord) -> Vec<Verdict> {
    let fire = || -> Option<(u64, Vec<UsedFact>)> {
        let mut u = Uses::new();
        let p = u.take("p >= 5", &h.prime, |p| *p >= 5)?;
        u.take("CM by full ring of integers of Q(sqrt(D))", &h.cm_field, |d| {
            ImagQuadField::ALL.contains(d)
        })?;
        u.take("p splits completely in Q(sqrt(D))", &h.splits, |b| *b)?;
        u.take("good reduction at p (minimal discriminant)", &h.good_reduction, |b| *b)?;
        u.take("anomalous: |E(F_p)| = p", &h.anomalous, |b| *b)?;
        Some((p, u.0))
    };
    match fire() {
        None => Vec::new(),
        Some((p, used)) => vec![
            Verdict::new(Rule::BrauerMiddleTerm, Conclusion::MiddleTermZpSquared, p, used.clone()),
            Verdict::new(Rule::BrauerMiddleTerm, Conclusion::BrauerPVanishes, p, used),
        ],
    }
}

/// Unconditional exactness from a prior middle-term verdict and a rational
/// point whose formal component is nontrivial. A trivial formal component
/// yields nothing; it is not evidence against exactness.
pub fn global_lift_verdict(dec: &Decomposition, prior: Option<&Verdict>) -> Option<Verdict> {
    let prior = prior?;
    if prior.conclusion != Conclusion::MiddleTermZpSquared || prior.prime != dec.p {
        return None;
    }
    if !dec.formal_nontrivial {
        return None;
    }
    let mut used = prior.hypotheses_used.clone();
    used.push(UsedFact {
        name: "rational point of infinite order".into(),
        value: "no multiple [m]P with m <= 12 is O".into(),
        provenance: Provenance::Verified,
    });
    used.push(UsedFact {
        name: "formal component nontrivial: v(t(F)) = 1".into(),
        value: format!("precision {}", dec.precision),
        provenance: Provenance::Verified,
    });
    Some(Verdict::new(Rule::GlobalLift, Conclusion::UnconditionalExactness, dec.p, used))
}

/// Discriminant of `y^2 = x^3 - 4x`, whose Jacobian governs the quartic.
pub const QUARTIC_JACOBIAN_DISCRIMINANT: i64 = 4096;

/// Discriminant of `(x^2 - 1)(2x^2 - 1)`, the integral form of the model of C.
pub const QUARTIC_MODEL_DISCRIMINANT: i64 = 32;

/// `p = 1 mod 4`, `p` coprime to the conductor proxy of C, unramified base:
/// the non-divisible part for the quartic is 2-primary; with good reduction
/// of the quartic (asserted) `A_0(D)` is divisible.
pub fn quartic_verdict(p: NatPrime, flags: &HypothesisRecord) -> Vec<Verdict> {
    let pv = p.get();
    let mut u = Uses::new();
    if pv % 4 != 1 {
        return Vec::new();
    }
    u.push("p = 1 mod 4", pv % 4, Provenance::Verified);
    let coprime = [QUARTIC_JACOBIAN_DISCRIMINANT, QUARTIC_MODEL_DISCRIMINANT]
        .iter()
        .all(|d| valuation(&BigInt::from(*d), pv) == Some(0));
    if !coprime {
        return Vec::new();
    }
    u.push(
        "p coprime to conductor of C (discriminants 4096, 32)",
        "true",
        Provenance::Verified,
    );
    if u.take("base unramified", &flags.unramified, |b| *b).is_none() {
        return Vec::new();
    }
    let mut out = vec![Verdict::new(Rule::Quartic, Conclusion::QuarticNd2Primary, pv, u.0.clone())];
    if u.take("quartic has good reduction", &flags.quartic_good_reduction, |b| *b).is_some() {
        out.push(Verdict::new(Rule::Quartic, Conclusion::Divisible, pv, u.0));
    }
    out
}

/// Degrees entering the admissibility conditions for a prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityConfig {
    pub isogeny_degree: u64,
    pub field_degree: u64,
    /// Orders `N_v` of the local non-divisible parts at potentially split
    /// bad places; the library cannot compute these.
    pub asserted_nv: Vec<u64>,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        AdmissibilityConfig {
            isogeny_degree: 1,
            field_degree: 1,
            asserted_nv: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub p: u64,
    pub admissible: bool,
    pub reasons: Vec<ConditionCheck>,
}

/// The three conditions cutting out the primes at which local cycles are
/// controlled: `p ∤ 2 deg(φ) [K:F]` with good reduction, at least one curve
/// good ordinary, and `p ∤ M = 6 ∏ N_v`.
pub fn prime_admissibility(e1: &Curve, e2: &Curve, p: NatPrime, cfg: &AdmissibilityConfig) -> Admissibility {
    let pv = p.get();
    let mut reasons = Vec::new();

    let degree = 2u128 * cfg.isogeny_degree as u128 * cfg.field_degree as u128;
    let divides_degree = degree % pv as u128 == 0;
    let good = |e: &Curve| {
        if pv >= 5 {
            e.has_good_reduction(p)
        } else {
            valuation(&e.discriminant(), pv) == Some(0)
        }
    };
    let (g1, g2) = (good(e1), good(e2));
    reasons.push(ConditionCheck {
        condition: 1,
        passed: !divides_degree && g1 && g2,
        detail: format!(
            "p {} 2 deg(phi) [K:F] = {degree}; good reduction E1: {g1}, E2: {g2}",
            if divides_degree { "divides" } else { "does not divide" }
        ),
    });

    let ordinary = |e: &Curve| {
        e.reduction_type(p)
            .map(|r| r.kind == ReductionKind::GoodOrdinary)
            .ok()
    };
    let (o1, o2) = (ordinary(e1), ordinary(e2));
    let passed2 = o1 == Some(true) || o2 == Some(true);
    reasons.push(ConditionCheck {
        condition: 2,
        passed: passed2,
        detail: match (o1, o2) {
            (Some(a), Some(b)) => format!("good ordinary E1: {a}, E2: {b}"),
            _ => format!("reduction types are only classified for p >= 5 (p = {pv})"),
        },
    });

    let m_divisible = pv == 2 || pv == 3 || cfg.asserted_nv.iter().any(|n| n % pv == 0);
    reasons.push(ConditionCheck {
        condition: 3,
        passed: !m_divisible,
        detail: format!(
            "M = 6 * prod N_v with asserted N_v = {:?}; p {} M",
            cfg.asserted_nv,
            if m_divisible { "divides" } else { "does not divide" }
        ),
    });

    Admissibility {
        p: pv,
        admissible: reasons.iter().all(|r| r.passed),
        reasons,
    }
}

/// Every verdict the record supports, in a fixed order.
pub fn all_verdicts(h: &HypothesisRecord, tower_level: Option<u32>) -> Vec<Verdict> {
    let mut out = Vec::new();
    out.extend(divisibility_verdict(h));
    out.extend(nd_structure_verdict(h));
    if let Some(n) = tower_level {
        out.extend(cm_tower_from_record(h, n));
    }
    out.extend(brauer_middle_term_from_record(h));
    if let Some(p) = h.prime.as_ref().and_then(|f| NatPrime::new(f.value).ok()) {
        out.extend(quartic_verdict(p, h));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(p: u64) -> NatPrime {
        NatPrime::new(p).unwrap()
    }

    fn field(d: i64) -> ImagQuadField {
        ImagQuadField::new(d).unwrap()
    }

    #[test]
    fn divisibility_examples() {
        let e = Curve::from_i64(-4, 0).unwrap();
        let h = HypothesisRecord::for_pair(&e, &e, np(13)).with_unramified(true);
        let v = divisibility_verdict(&h).unwrap();
        assert_eq!(v.conclusion, Conclusion::Divisible);
        assert!(v.conditional);

        let mut h2 = h.clone();
        h2.prime = Some(Fact::verified(2));
        assert!(divisibility_verdict(&h2).is_none());

        let mut h3 = h.clone();
        h3.reduction_e1 = Some(Fact::verified(ReductionKind::GoodSupersingular));
        h3.reduction_e2 = Some(Fact::verified(ReductionKind::GoodSupersingular));
        assert!(divisibility_verdict(&h3).is_none());
        h3.reduction_e2 = Some(Fact::verified(ReductionKind::GoodOrdinary));
        assert!(divisibility_verdict(&h3).is_some());
    }

    #[test]
    fn nd_structure_examples() {
        let e = Curve::from_i64(0, -2).unwrap();
        let base = HypothesisRecord::for_pair(&e, &e, np(7))
            .with_wild_ramification(true)
            .with_trivial_ns_action(true);
        let h1 = base.clone().with_torsion_level(1);
        assert_eq!(nd_structure_verdict(&h1).unwrap().conclusion, Conclusion::NdIsZmodPn(1));
        let h3 = base.clone().with_torsion_level(3);
        assert_eq!(nd_structure_verdict(&h3).unwrap().conclusion, Conclusion::NdIsZmodPn(3));
        let mut missing = h1.clone();
        missing.wild_ramification = None;
        assert!(nd_structure_verdict(&missing).is_none());
    }

    #[test]
    fn cm_tower_examples() {
        let e = Curve::from_i64(0, -2).unwrap();
        let v = cm_tower_verdict(&e, field(-3), np(7), 1).unwrap();
        assert_eq!(v.conclusion, Conclusion::NdIsZmodPn(1));
        assert_eq!(
            cm_tower_verdict(&e, field(-3), np(7), 2).unwrap().conclusion,
            Conclusion::NdIsZmodPn(2)
        );
        assert!(cm_tower_verdict(&e, field(-3), np(5), 1).is_none());
    }

    #[test]
    fn brauer_examples() {
        let cases = [
            (Curve::from_i64(0, -2).unwrap(), -3, 7),
            (Curve::from_i64(-1056, 13552).unwrap(), -11, 223),
            (Curve::from_i64(-152, 722).unwrap(), -19, 43),
        ];
        for (e, d, p) in &cases {
            let vs = brauer_middle_term_verdict(e, field(*d), np(*p));
            let kinds: Vec<_> = vs.iter().map(|v| v.conclusion).collect();
            assert_eq!(kinds, vec![Conclusion::MiddleTermZpSquared, Conclusion::BrauerPVanishes]);
            for v in &vs {
                assert_eq!(v.citation, Rule::BrauerMiddleTerm.citation());
                assert!(v.conditional);
            }
        }
        let e = Curve::from_i64(-1056, 13552).unwrap();
        assert!(brauer_middle_term_verdict(&e, field(-11), np(11)).is_empty());
    }

    #[test]
    fn quartic_examples() {
        let h = HypothesisRecord::new(np(13)).with_unramified(true);
        let kinds: Vec<_> = quartic_verdict(np(13), &h).iter().map(|v| v.conclusion).collect();
        assert_eq!(kinds, vec![Conclusion::QuarticNd2Primary]);
        assert!(quartic_verdict(np(7), &h.clone()).is_empty());
        let h = h.with_quartic_good_reduction(true);
        let kinds: Vec<_> = quartic_verdict(np(13), &h).iter().map(|v| v.conclusion).collect();
        assert_eq!(kinds, vec![Conclusion::QuarticNd2Primary, Conclusion::Divisible]);
        assert!(quartic_verdict(np(13), &HypothesisRecord::new(np(13))).is_empty());
    }

    #[test]
    fn admissibility_examples() {
        let e = Curve::from_i64(0, -2).unwrap();
        let cfg = AdmissibilityConfig::default();
        assert!(prime_admissibility(&e, &e, np(7), &cfg).admissible);
        let two = prime_admissibility(&e, &e, np(2), &cfg);
        assert!(!two.admissible && !two.reasons[0].passed);
        let three = prime_admissibility(&e, &e, np(3), &cfg);
        assert!(!three.admissible && !three.reasons[2].passed);
        let cfg = AdmissibilityConfig {
            asserted_nv: vec![14],
            ..Default::default()
        };
        assert!(!prime_admissibility(&e, &e, np(7), &cfg).admissible);
    }
}
