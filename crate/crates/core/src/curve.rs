//! Elliptic curves over `Q` in short Weierstrass form.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{legendre, NatPrime};
use crate::fp::{FpCurve, FpError, OrdinaryClass};
use crate::poly::{division_values, IntPoly};

/// Default height bound for [`Curve::naive_point_search`].
pub const DEFAULT_SEARCH_HEIGHT: u64 = 10_000;

/// Rational torsion orders never exceed 12.
pub const MAX_TORSION_ORDER: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular model: 4A^3 + 27B^2 = 0")]
    Singular,
    #[error("prime {0} is below 5; reduction is only classified for p >= 5")]
    SmallPrime(u64),
    #[error("division polynomial index {0} must be odd and at least 3")]
    DivisionIndex(usize),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// `y^2 = x^3 + Ax + B` with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Curve {
    #[serde(with = "crate::bigserde")]
    a: BigInt,
    #[serde(with = "crate::bigserde")]
    b: BigInt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// A rational point, or the point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QPoint {
    Identity,
    Affine { x: BigRational, y: BigRational },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReductionKind {
    GoodOrdinary,
    GoodSupersingular,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

/// Reduction type at a prime. `anomalous` is only ever set for good ordinary
/// reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReductionType {
    pub kind: ReductionKind,
    pub anomalous: bool,
}

impl ReductionType {
    pub fn is_good(&self) -> bool {
        matches!(
            self.kind,
            ReductionKind::GoodOrdinary | ReductionKind::GoodSupersingular
        )
    }

    pub fn is_good_ordinary(&self) -> bool {
        self.kind == ReductionKind::GoodOrdinary
    }

    pub fn is_good_supersingular(&self) -> bool {
        self.kind == ReductionKind::GoodSupersingular
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReductionKind::GoodOrdinary => "good ordinary",
            ReductionKind::GoodSupersingular => "good supersingular",
            ReductionKind::SplitMultiplicative => "split multiplicative",
            ReductionKind::NonsplitMultiplicative => "nonsplit multiplicative",
            ReductionKind::Additive => "additive",
        };
        f.write_str(s)
    }
}

/// `p`-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

pub(crate) fn mod_u64(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

impl Curve {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self, CurveError> {
        let curve = Curve { a, b, label: None };
        if curve.discriminant().is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(curve)
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self, CurveError> {
        Curve::new(BigInt::from(a), BigInt::from(b))
    }

    /// Short model of `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`:
    /// `y^2 = x^3 - 27 c4 x - 54 c6`, isomorphic over `Z[1/6]`.
    pub fn from_long(coeffs: [BigInt; 5]) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = coeffs;
        let b2 = &a1 * &a1 + 4 * &a2;
        let b4 = 2 * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + 4 * &a6;
        let c4 = &b2 * &b2 - 24 * &b4;
        let b2_cubed: BigInt = &b2 * &b2 * &b2;
        let c6: BigInt = 36 * &b2 * &b4 - 216 * &b6 - b2_cubed;
        Curve::new(-27 * c4, -54 * c6)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// `-16 (4A^3 + 27B^2)`.
    pub fn discriminant(&self) -> BigInt {
        let a3 = &self.a * &self.a * &self.a;
        -16 * (4 * a3 + 27 * &self.b * &self.b)
    }

    pub fn c4(&self) -> BigInt {
        -48 * &self.a
    }

    pub fn c6(&self) -> BigInt {
        -864 * &self.b
    }

    pub fn j_invariant(&self) -> BigRational {
        let a3 = &self.a * &self.a * &self.a;
        let num = BigInt::from(6912) * &a3;
        let den = 4 * a3 + 27 * &self.b * &self.b;
        BigRational::new(num, den)
    }

    /// Remove `p^4`, `p^6` factors from `A`, `B` while both allow it.
    pub fn minimal_at_p(&self, p: NatPrime) -> Curve {
        let pv = p.get();
        let p4 = BigInt::from(pv).pow(4);
        let p6 = BigInt::from(pv).pow(6);
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        loop {
            let va = valuation(&a, pv).unwrap_or(u32::MAX);
            let vb = valuation(&b, pv).unwrap_or(u32::MAX);
            if va < 4 || vb < 6 {
                break;
            }
            a /= &p4;
            b /= &p6;
        }
        Curve {
            a,
            b,
            label: self.label.clone(),
        }
    }

    /// Whether `p` does not divide the discriminant of the `p`-minimal model.
    pub fn has_good_reduction(&self, p: NatPrime) -> bool {
        let m = self.minimal_at_p(p);
        valuation(&m.discriminant(), p.get()) == Some(0)
    }

    /// The reduced curve; requires good reduction at `p >= 5`.
    pub fn reduce(&self, p: NatPrime) -> Result<FpCurve, CurveError> {
        let m = self.minimal_at_p(p);
        let pv = p.get();
        let curve = FpCurve::new(p, mod_u64(&m.a, pv), mod_u64(&m.b, pv))?;
        Ok(curve)
    }

    /// Reduction type at `p >= 5`, read from the `p`-minimal model.
    pub fn reduction_type(&self, p: NatPrime) -> Result<ReductionType, CurveError> {
        let pv = p.get();
        if pv < 5 {
            return Err(CurveError::SmallPrime(pv));
        }
        let m = self.minimal_at_p(p);
        if valuation(&m.discriminant(), pv) == Some(0) {
            let reduced = m.reduce(p)?;
            let class = reduced.ordinary_class()?;
            let kind = match class {
                OrdinaryClass::Ordinary => ReductionKind::GoodOrdinary,
                OrdinaryClass::Supersingular => ReductionKind::GoodSupersingular,
            };
            let anomalous = kind == ReductionKind::GoodOrdinary && reduced.is_anomalous()?;
            return Ok(ReductionType { kind, anomalous });
        }
        let kind = if valuation(&m.c4(), pv) == Some(0) {
            let minus_c6 = mod_u64(&-m.c6(), pv);
            if legendre(minus_c6, pv) == 1 {
                ReductionKind::SplitMultiplicative
            } else {
                ReductionKind::NonsplitMultiplicative
            }
        } else {
            ReductionKind::Additive
        };
        Ok(ReductionType {
            kind,
            anomalous: false,
        })
    }

    pub fn rhs(&self, x: &BigRational) -> BigRational {
        x * x * x + BigRational::from(self.a.clone()) * x + BigRational::from(self.b.clone())
    }

    pub fn contains(&self, pt: &QPoint) -> bool {
        match pt {
            QPoint::Identity => true,
            QPoint::Affine { x, y } => y * y == self.rhs(x),
        }
    }

    pub fn point(&self, x: BigRational, y: BigRational) -> Result<QPoint, CurveError> {
        let pt = QPoint::Affine { x, y };
        if self.contains(&pt) {
            Ok(pt)
        } else {
            Err(CurveError::NotOnCurve)
        }
    }

    pub fn neg(&self, pt: &QPoint) -> QPoint {
        match pt {
            QPoint::Identity => QPoint::Identity,
            QPoint::Affine { x, y } => QPoint::Affine {
                x: x.clone(),
                y: -y,
            },
        }
    }

    pub fn add(&self, lhs: &QPoint, rhs: &QPoint) -> QPoint {
        let (x1, y1, x2, y2) = match (lhs, rhs) {
            (QPoint::Identity, q) | (q, QPoint::Identity) => return q.clone(),
            (QPoint::Affine { x: x1, y: y1 }, QPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return QPoint::Identity;
            }
            let three = BigRational::from_integer(BigInt::from(3));
            (three * x1 * x1 + BigRational::from(self.a.clone())) / (y1 + y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &lambda * &lambda - x1 - x2;
        let y3 = &lambda * (x1 - &x3) - y1;
        QPoint::Affine { x: x3, y: y3 }
    }

    pub fn scalar_mul(&self, k: i64, pt: &QPoint) -> QPoint {
        let base = if k < 0 { self.neg(pt) } else { pt.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = QPoint::Identity;
        let mut addend = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &addend);
            }
            addend = self.add(&addend, &addend);
            k >>= 1;
        }
        acc
    }

    /// Order of `pt` if it is at most [`MAX_TORSION_ORDER`].
    pub fn small_torsion_order(&self, pt: &QPoint) -> Option<u32> {
        let mut acc = pt.clone();
        for m in 1..=MAX_TORSION_ORDER {
            if acc == QPoint::Identity {
                return Some(m);
            }
            if m == MAX_TORSION_ORDER {
                break;
            }
            acc = self.add(&acc, pt);
        }
        None
    }

    /// No multiple `[m]P` with `m <= 12` is the identity (non-torsion by
    /// Mazur's bound).
    pub fn has_infinite_order(&self, pt: &QPoint) -> bool {
        self.small_torsion_order(pt).is_none()
    }

    /// `ψ_m` for odd `m >= 3`, of degree `(m^2 - 1) / 2`.
    pub fn division_polynomial(&self, m: usize) -> Result<IntPoly, CurveError> {
        if m < 3 || m % 2 == 0 {
            return Err(CurveError::DivisionIndex(m));
        }
        let a = IntPoly::constant(self.a.clone());
        let b = IntPoly::constant(self.b.clone());
        let mut values = division_values(&IntPoly::x(), &a, &b, m);
        Ok(values.swap_remove(m))
    }

    /// Every point with `x = m/e^2`, `|m| <= H`, `1 <= e <= √H`, `gcd(m, e) = 1`,
    /// sorted by naive height `max(|m|, e^2)` and then by `e`, `m`, `y`.
    pub fn naive_point_search(&self, height: u64) -> Vec<QPoint> {
        let e_max = crate::arith::isqrt_u64(height).max(1);
        let mut found: Vec<(u64, u64, i64, BigInt)> = match self.fast_search_bounds(height, e_max) {
            Some((a, b)) => search_i128(a, b, height, e_max),
            None => self.search_bigint(height, e_max),
        };
        found.sort();
        found
            .into_iter()
            .map(|(_, e, m, s)| {
                let e = BigInt::from(e);
                let x = BigRational::new(BigInt::from(m), &e * &e);
                let y = BigRational::new(s, &e * &e * &e);
                QPoint::Affine { x, y }
            })
            .collect()
    }

    // i128 is safe when |m|^3 + |A| |m| e^4 + |B| e^6 stays below 2^126.
    fn fast_search_bounds(&self, height: u64, e_max: u64) -> Option<(i128, i128)> {
        let a = self.a.to_i128()?;
        let b = self.b.to_i128()?;
        let h = BigInt::from(height);
        let e = BigInt::from(e_max);
        let bound = &h * &h * &h
            + BigInt::from(a.unsigned_abs()) * &h * e.pow(4)
            + BigInt::from(b.unsigned_abs()) * e.pow(6);
        (bound.bits() < 126).then_some((a, b))
    }

    fn search_bigint(&self, height: u64, e_max: u64) -> Vec<(u64, u64, i64, BigInt)> {
        let mut out = Vec::new();
        for e in 1..=e_max {
            let eb = BigInt::from(e);
            let e4 = eb.pow(4);
            let e6 = eb.pow(6);
            let ae4 = &self.a * &e4;
            let be6 = &self.b * &e6;
            for m in -(height as i64)..=(height as i64) {
                if num_integer::gcd(m.unsigned_abs(), e) != 1 {
                    continue;
                }
                let mb = BigInt::from(m);
                let n = &mb * &mb * &mb + &ae4 * &mb + &be6;
                if n.is_negative() {
                    continue;
                }
                let s = n.sqrt();
                if &s * &s == n {
                    push_point(&mut out, m, e, s);
                }
            }
        }
        out
    }
}

fn push_point(out: &mut Vec<(u64, u64, i64, BigInt)>, m: i64, e: u64, s: BigInt) {
    let h = m.unsigned_abs().max(e * e);
    if s.is_zero() {
        out.push((h, e, m, s));
    } else {
        out.push((h, e, m, -s.clone()));
        out.push((h, e, m, s));
    }
}

// Quadratic residues modulo 64, 63, 65 and 11 reject most candidates before
// the exact square root.
struct SquareFilter {
    m64: [bool; 64],
    m63: [bool; 63],
    m65: [bool; 65],
    m11: [bool; 11],
}

impl SquareFilter {
    fn new() -> Self {
        let mut f = SquareFilter {
            m64: [false; 64],
            m63: [false; 63],
            m65: [false; 65],
            m11: [false; 11],
        };
        for i in 0..64usize {
            f.m64[i * i % 64] = true;
            f.m63[i * i % 63] = true;
            f.m65[i * i % 65] = true;
            f.m11[i * i % 11] = true;
        }
        f
    }

    #[inline]
    fn maybe_square(&self, n: i128) -> bool {
        self.m64[(n & 63) as usize]
            && self.m63[(n % 63) as usize]
            && self.m65[(n % 65) as usize]
            && self.m11[(n % 11) as usize]
    }
}

fn search_i128(a: i128, b: i128, height: u64, e_max: u64) -> Vec<(u64, u64, i64, BigInt)> {
    let filter = SquareFilter::new();
    let mut out = Vec::new();
    let h = height as i64;
    for e in 1..=e_max {
        let e2 = (e * e) as i128;
        let ae4 = a * e2 * e2;
        let be6 = b * e2 * e2 * e2;
        for m in -h..=h {
            let mi = m as i128;
            let n = mi * mi * mi + ae4 * mi + be6;
            if n < 0 || !filter.maybe_square(n) {
                continue;
            }
            let r = crate::arith::isqrt_u128(n as u128);
            if r * r != n as u128 {
                continue;
            }
            if num_integer::gcd(m.unsigned_abs(), e) != 1 {
                continue;
            }
            push_point(&mut out, m, e, BigInt::from(r));
        }
    }
    out
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3")?;
        for (c, mono) in [(&self.a, "x"), (&self.b, "")] {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { '-' } else { '+' };
            let mag = c.abs();
            if mag.is_one() && !mono.is_empty() {
                write!(f, " {sign} {mono}")?;
            } else {
                write!(f, " {sign} {mag}{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QPoint::Identity => write!(f, "O"),
            QPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// Serialized as `{"x": "3", "y": "5"}` (rationals as `num/den` strings) or
/// the string `"identity"`.
impl Serialize for QPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        match self {
            QPoint::Identity => s.serialize_str("identity"),
            QPoint::Affine { x, y } => {
                let mut st = s.serialize_struct("QPoint", 2)?;
                st.serialize_field("x", &x.to_string())?;
                st.serialize_field("y", &y.to_string())?;
                st.end()
            }
        }
    }
}

impl QPoint {
    pub fn is_identity(&self) -> bool {
        matches!(self, QPoint::Identity)
    }

    pub fn from_integers(x: i64, y: i64) -> QPoint {
        QPoint::Affine {
            x: BigRational::from_integer(BigInt::from(x)),
            y: BigRational::from_integer(BigInt::from(y)),
        }
    }

    /// `[x_num, x_den, y_num, y_den]`, denominators positive.
    pub fn from_fractions(parts: [BigInt; 4]) -> Option<QPoint> {
        let [xn, xd, yn, yd] = parts;
        if !xd.is_positive() || !yd.is_positive() {
            return None;
        }
        Some(QPoint::Affine {
            x: BigRational::new(xn, xd),
            y: BigRational::new(yn, yd),
        })
    }

    pub fn to_fractions(&self) -> Option<[BigInt; 4]> {
        match self {
            QPoint::Identity => None,
            QPoint::Affine { x, y } => Some([
                x.numer().clone(),
                x.denom().clone(),
                y.numer().clone(),
                y.denom().clone(),
            ]),
        }
    }

    /// Naive height `max(|num(x)|, den(x))`.
    pub fn naive_height(&self) -> BigInt {
        match self {
            QPoint::Identity => BigInt::one(),
            QPoint::Affine { x, .. } => x.numer().abs().max(x.denom().clone()),
        }
    }
}
