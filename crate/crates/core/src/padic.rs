//! Fixed-precision p-adic numbers.
//!
//! A nonzero value is `p^v * u` with `u` a unit known modulo `p^N`, so its
//! absolute precision is `v + N`. Zero carries only the absolute precision to
//! which it is known. Arithmetic propagates precision conservatively: a result
//! never claims more digits than its operands justify, and cancellation in a
//! sum shows up as lost relative precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::NatPrime;
use crate::poly::{IntPoly, RingElem};

/// Working precision used when none is given.
pub const DEFAULT_PRECISION: u32 = 16;

/// Below this many certified digits a computation is abandoned.
pub const MIN_CERTIFIED_DIGITS: u32 = 4;

// Absolute precision carried by exact zeros (such as a zero curve coefficient).
const EXACT: i64 = i64::MAX / 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("operands live in different p-adic fields")]
    PrimeMismatch,
    #[error("value has odd valuation and no square root in Q_p")]
    OddValuation,
    #[error("unit part is not a square mod p")]
    NotASquare,
    #[error("initial value is not a root mod p")]
    NotARoot,
    #[error("derivative vanishes mod p at the initial root; Hensel's condition fails")]
    NonSimpleRoot,
    #[error("v(f(r)) = {value} is not above 2 v(f'(r)) = {twice_derivative}")]
    HenselConditionFailed { value: u32, twice_derivative: u32 },
    #[error("value is not a p-adic integer")]
    NotIntegral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Zero { abs_prec: i64 },
    Nonzero { val: i64, unit: BigInt, rel_prec: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    repr: Repr,
}

/// `p^k` as a big integer.
pub fn prime_power(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// Split `n = p^v * m` with `p ∤ m`; `None` for `n = 0`.
fn split_valuation(n: &BigInt, p: u64) -> Option<(u32, BigInt)> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return Some((v, n));
        }
        n = q;
        v += 1;
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

impl PadicNumber {
    /// Zero known to absolute precision `abs_prec`.
    pub fn zero(p: NatPrime, abs_prec: i64) -> Self {
        PadicNumber {
            p: p.get(),
            repr: Repr::Zero { abs_prec },
        }
    }

    fn zero_raw(p: u64, abs_prec: i64) -> Self {
        PadicNumber {
            p,
            repr: Repr::Zero {
                abs_prec: abs_prec.min(EXACT),
            },
        }
    }

    /// `n` with `rel_prec` significant digits; zero becomes exact zero.
    pub fn from_integer(p: NatPrime, n: &BigInt, rel_prec: u32) -> Self {
        let pv = p.get();
        match split_valuation(n, pv) {
            None => PadicNumber::zero_raw(pv, EXACT),
            Some((v, m)) => PadicNumber::unit_raw(pv, v as i64, m, rel_prec),
        }
    }

    pub fn from_i64(p: NatPrime, n: i64, rel_prec: u32) -> Self {
        PadicNumber::from_integer(p, &BigInt::from(n), rel_prec)
    }

    /// The integer `n` known modulo `p^abs_prec`.
    pub fn from_integer_abs(p: NatPrime, n: &BigInt, abs_prec: i64) -> Self {
        let pv = p.get();
        if abs_prec <= 0 {
            return PadicNumber::zero_raw(pv, abs_prec);
        }
        let reduced = n.mod_floor(&prime_power(pv, abs_prec as u32));
        match split_valuation(&reduced, pv) {
            None => PadicNumber::zero_raw(pv, abs_prec),
            Some((v, m)) => {
                PadicNumber::unit_raw(pv, v as i64, m, (abs_prec - v as i64) as u32)
            }
        }
    }

    pub fn from_rational(p: NatPrime, q: &BigRational, rel_prec: u32) -> Self {
        let pv = p.get();
        let Some((vn, un)) = split_valuation(q.numer(), pv) else {
            return PadicNumber::zero_raw(pv, EXACT);
        };
        let (vd, ud) = split_valuation(q.denom(), pv).expect("denominator is nonzero");
        let modulus = prime_power(pv, rel_prec);
        let inv = mod_inverse(&ud.mod_floor(&modulus), &modulus).expect("unit denominator");
        PadicNumber::unit_raw(pv, vn as i64 - vd as i64, un * inv, rel_prec)
    }

    fn unit_raw(p: u64, val: i64, unit: BigInt, rel_prec: u32) -> Self {
        debug_assert!(rel_prec > 0);
        let unit = unit.mod_floor(&prime_power(p, rel_prec));
        debug_assert!(!(&unit % BigInt::from(p)).is_zero());
        PadicNumber {
            p,
            repr: Repr::Nonzero {
                val,
                unit,
                rel_prec,
            },
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Zero known to infinite precision.
    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { abs_prec } if abs_prec >= EXACT)
    }

    /// Valuation of a nonzero value; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        match self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { val, .. } => Some(val),
        }
    }

    /// Lower bound on the valuation: the valuation itself, or the absolute
    /// precision of a zero.
    pub fn valuation_bound(&self) -> i64 {
        match self.repr {
            Repr::Zero { abs_prec } => abs_prec,
            Repr::Nonzero { val, .. } => val,
        }
    }

    pub fn abs_prec(&self) -> i64 {
        match self.repr {
            Repr::Zero { abs_prec } => abs_prec,
            Repr::Nonzero { val, rel_prec, .. } => val + rel_prec as i64,
        }
    }

    /// Number of certified significant digits (0 for zero).
    pub fn rel_prec(&self) -> u32 {
        match self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { rel_prec, .. } => rel_prec,
        }
    }

    pub fn unit(&self) -> Option<&BigInt> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// Base-`p` digits of the unit part, least significant first.
    pub fn digits(&self) -> Vec<u64> {
        let Repr::Nonzero { unit, rel_prec, .. } = &self.repr else {
            return Vec::new();
        };
        let pb = BigInt::from(self.p);
        let mut n = unit.clone();
        (0..*rel_prec)
            .map(|_| {
                let (q, r) = n.div_rem(&pb);
                n = q;
                r.to_u64().expect("digit fits")
            })
            .collect()
    }

    /// Representative in `[0, p^abs_prec)` of an integral value.
    pub fn to_integer(&self) -> Result<BigInt, PadicError> {
        match &self.repr {
            Repr::Zero { .. } => Ok(BigInt::zero()),
            Repr::Nonzero { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::NotIntegral);
                }
                Ok(prime_power(self.p, *val as u32) * unit)
            }
        }
    }

    /// Image in `F_p` of an integral value known to at least one digit.
    pub fn residue(&self) -> Result<u64, PadicError> {
        if self.abs_prec() < 1 {
            return Err(PadicError::PrecisionExhausted(
                "no digits left to reduce mod p".into(),
            ));
        }
        let n = self.to_integer()?;
        Ok(n.mod_floor(&BigInt::from(self.p)).to_u64().expect("residue fits"))
    }

    /// Forget digits beyond `abs_prec`.
    pub fn truncate(&self, abs_prec: i64) -> PadicNumber {
        if abs_prec >= self.abs_prec() {
            return self.clone();
        }
        match &self.repr {
            Repr::Zero { .. } => PadicNumber::zero_raw(self.p, abs_prec),
            Repr::Nonzero { val, unit, .. } => {
                if abs_prec <= *val {
                    PadicNumber::zero_raw(self.p, abs_prec)
                } else {
                    PadicNumber::unit_raw(self.p, *val, unit.clone(), (abs_prec - val) as u32)
                }
            }
        }
    }

    fn check_prime(&self, other: &PadicNumber) -> Result<(), PadicError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch)
        }
    }

    pub fn neg(&self) -> PadicNumber {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Nonzero {
                val,
                unit,
                rel_prec,
            } => PadicNumber::unit_raw(self.p, *val, -unit, *rel_prec),
        }
    }

    pub fn add(&self, other: &PadicNumber) -> Result<PadicNumber, PadicError> {
        self.check_prime(other)?;
        let abs = self.abs_prec().min(other.abs_prec());
        let (va, ua, vb, ub) = match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, _) => return Ok(other.truncate(abs)),
            (_, Repr::Zero { .. }) => return Ok(self.truncate(abs)),
            (
                Repr::Nonzero { val: va, unit: ua, .. },
                Repr::Nonzero { val: vb, unit: ub, .. },
            ) => (*va, ua, *vb, ub),
        };
        let vmin = va.min(vb);
        if abs <= vmin {
            return Ok(PadicNumber::zero_raw(self.p, abs));
        }
        let shift = |v: i64, u: &BigInt| -> BigInt {
            let k = (v - vmin).min(abs - vmin);
            prime_power(self.p, k as u32) * u
        };
        let sum = (shift(va, ua) + shift(vb, ub)).mod_floor(&prime_power(self.p, (abs - vmin) as u32));
        Ok(match split_valuation(&sum, self.p) {
            None => PadicNumber::zero_raw(self.p, abs),
            Some((extra, m)) => {
                let val = vmin + extra as i64;
                PadicNumber::unit_raw(self.p, val, m, (abs - val) as u32)
            }
        })
    }

    pub fn sub(&self, other: &PadicNumber) -> Result<PadicNumber, PadicError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PadicNumber) -> Result<PadicNumber, PadicError> {
        self.check_prime(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Zero { abs_prec: a }, Repr::Zero { abs_prec: b }) => {
                PadicNumber::zero_raw(self.p, a.saturating_add(*b))
            }
            (Repr::Zero { abs_prec }, Repr::Nonzero { val, .. })
            | (Repr::Nonzero { val, .. }, Repr::Zero { abs_prec }) => {
                PadicNumber::zero_raw(self.p, abs_prec.saturating_add(*val))
            }
            (
                Repr::Nonzero { val: va, unit: ua, rel_prec: ra },
                Repr::Nonzero { val: vb, unit: ub, rel_prec: rb },
            ) => PadicNumber::unit_raw(self.p, va + vb, ua * ub, (*ra).min(*rb)),
        })
    }

    pub fn div(&self, other: &PadicNumber) -> Result<PadicNumber, PadicError> {
        self.check_prime(other)?;
        let Repr::Nonzero { val: vb, unit: ub, rel_prec: rb } = &other.repr else {
            return Err(PadicError::PrecisionExhausted(
                "division by a value indistinguishable from zero".into(),
            ));
        };
        Ok(match &self.repr {
            Repr::Zero { abs_prec } => PadicNumber::zero_raw(self.p, abs_prec.saturating_sub(*vb)),
            Repr::Nonzero { val: va, unit: ua, rel_prec: ra } => {
                let rel = (*ra).min(*rb);
                let m = prime_power(self.p, rel);
                let inv = mod_inverse(ub, &m).expect("unit is invertible");
                PadicNumber::unit_raw(self.p, va - vb, ua * inv, rel)
            }
        })
    }

    /// Multiply by an exact integer.
    pub fn mul_int(&self, k: &BigInt) -> PadicNumber {
        let Some((vk, uk)) = split_valuation(k, self.p) else {
            return PadicNumber::zero_raw(self.p, EXACT);
        };
        match &self.repr {
            Repr::Zero { abs_prec } => {
                PadicNumber::zero_raw(self.p, abs_prec.saturating_add(vk as i64))
            }
            Repr::Nonzero { val, unit, rel_prec } => {
                PadicNumber::unit_raw(self.p, val + vk as i64, unit * uk, *rel_prec)
            }
        }
    }

    /// Add an exact integer.
    pub fn add_int(&self, k: &BigInt) -> Result<PadicNumber, PadicError> {
        if k.is_zero() {
            return Ok(self.clone());
        }
        let rel = (self.abs_prec().max(1) + 64).min(EXACT / 2) as u32;
        let exact = PadicNumber::from_integer(NatPrime::new(self.p).expect("prime"), k, rel);
        // `exact` carries more digits than `self` can use, so the sum keeps
        // the precision of `self`
        self.add(&exact)
    }

    pub fn pow(&self, e: u32) -> Result<PadicNumber, PadicError> {
        let mut acc = PadicNumber::from_integer(
            NatPrime::new(self.p).expect("prime"),
            &BigInt::one(),
            self.rel_prec().max(1),
        );
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Whether the two values agree to the smaller of their precisions.
    pub fn agrees_with(&self, other: &PadicNumber) -> bool {
        self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// Absolute precision to which `self` and `other` are known to agree:
    /// the valuation of the difference, capped by the available precision.
    pub fn agreement(&self, other: &PadicNumber) -> Result<i64, PadicError> {
        let d = self.sub(other)?;
        Ok(d.valuation_bound())
    }

    /// Square root with the unit part congruent to `root_mod_p` (after
    /// removing `p^(v/2)`). `p` must be odd.
    pub fn sqrt(&self, root_mod_p: u64) -> Result<PadicNumber, PadicError> {
        let Repr::Nonzero { val, unit, rel_prec } = &self.repr else {
            let abs = self.abs_prec();
            return Ok(PadicNumber::zero_raw(self.p, abs.div_euclid(2)));
        };
        if val % 2 != 0 {
            return Err(PadicError::OddValuation);
        }
        let pb = BigInt::from(self.p);
        let r0 = BigInt::from(root_mod_p % self.p);
        if r0.is_zero() || !((&r0 * &r0 - unit).mod_floor(&pb)).is_zero() {
            return Err(PadicError::NotASquare);
        }
        let m = prime_power(self.p, *rel_prec);
        let two = BigInt::from(2);
        let mut r = r0;
        let mut known = 1u32;
        while known < *rel_prec {
            let f = (&r * &r - unit).mod_floor(&m);
            let df = (&two * &r).mod_floor(&m);
            let inv = mod_inverse(&df, &m).expect("2r is a unit for odd p");
            r = (&r - f * inv).mod_floor(&m);
            known *= 2;
        }
        Ok(PadicNumber::unit_raw(self.p, val / 2, r, *rel_prec))
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { abs_prec } if *abs_prec >= EXACT => write!(f, "0"),
            Repr::Zero { abs_prec } => write!(f, "O({}^{})", self.p, abs_prec),
            Repr::Nonzero { val, unit, .. } => {
                write!(f, "{}*{}^{} + O({}^{})", unit, self.p, val, self.p, self.abs_prec())
            }
        }
    }
}

/// Serialized form: valuation, base-p digits of the unit, absolute precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicReport {
    pub p: u64,
    pub valuation: Option<i64>,
    pub digits: Vec<u64>,
    pub unit: Option<String>,
    pub absolute_precision: i64,
}

impl From<&PadicNumber> for PadicReport {
    fn from(x: &PadicNumber) -> Self {
        PadicReport {
            p: x.p,
            valuation: x.valuation(),
            digits: x.digits(),
            unit: x.unit().map(|u| u.to_string()),
            absolute_precision: x.abs_prec().min(EXACT),
        }
    }
}

impl PartialOrd for PadicNumber {
    /// Compares valuation bounds only (larger is p-adically smaller).
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.p != other.p {
            return None;
        }
        Some(other.valuation_bound().cmp(&self.valuation_bound()))
    }
}

/// Integers modulo `p^k` with a formal derivative: `value + deriv * ε`,
/// `ε^2 = 0`. Used to evaluate a polynomial and its derivative together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualMod {
    pub value: BigInt,
    pub deriv: BigInt,
    modulus: BigInt,
}

impl DualMod {
    pub fn variable(x: &BigInt, modulus: &BigInt) -> Self {
        DualMod {
            value: x.mod_floor(modulus),
            deriv: BigInt::one(),
            modulus: modulus.clone(),
        }
    }

    pub fn constant_of(c: &BigInt, modulus: &BigInt) -> Self {
        DualMod {
            value: c.mod_floor(modulus),
            deriv: BigInt::zero(),
            modulus: modulus.clone(),
        }
    }
}

impl RingElem for DualMod {
    fn constant(&self, n: i64) -> Self {
        DualMod::constant_of(&BigInt::from(n), &self.modulus)
    }
    fn add(&self, o: &Self) -> Self {
        DualMod {
            value: (&self.value + &o.value).mod_floor(&self.modulus),
            deriv: (&self.deriv + &o.deriv).mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        }
    }
    fn sub(&self, o: &Self) -> Self {
        DualMod {
            value: (&self.value - &o.value).mod_floor(&self.modulus),
            deriv: (&self.deriv - &o.deriv).mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        DualMod {
            value: (&self.value * &o.value).mod_floor(&self.modulus),
            deriv: (&self.value * &o.deriv + &self.deriv * &o.value).mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        }
    }
}

/// `p`-adic valuation of `n` modulo `p^cap`, saturating at `cap` for zero.
fn valuation_capped(n: &BigInt, p: u64, cap: u32) -> u32 {
    split_valuation(&n.mod_floor(&prime_power(p, cap)), p)
        .map(|(v, _)| v)
        .unwrap_or(cap)
}

/// Newton iteration from `r0` for a root of `f` known only through `eval`,
/// which returns `(f(r), f'(r))` modulo the given power of `p`.
///
/// Requires `v(f(r0)) > 2 v(f'(r0))`; then there is a unique root `ρ` with
/// `v(ρ - r0) >= v(f(r0)) - v(f'(r0))`, and each step doubles the number of
/// correct digits. Returns `ρ` modulo `p^n`.
pub fn newton_lift_with<F>(eval: F, r0: &BigInt, p: NatPrime, n: u32) -> Result<BigInt, PadicError>
where
    F: Fn(&BigInt, &BigInt) -> (BigInt, BigInt),
{
    let pv = p.get();
    let probe = prime_power(pv, n + 1);
    let (_, d0) = eval(r0, &probe);
    let e = valuation_capped(&d0, pv, n + 1);
    if e > n {
        return Err(PadicError::NonSimpleRoot);
    }
    let work = n + 2 * e + 1;
    let modulus = prime_power(pv, work);
    let step_modulus = prime_power(pv, work - e);
    let pe = prime_power(pv, e);
    let mut r = r0.mod_floor(&modulus);
    for iteration in 0..128 {
        let (fv, dv) = eval(&r, &modulus);
        let vf = valuation_capped(&fv, pv, work);
        let vd = valuation_capped(&dv, pv, work);
        if iteration == 0 && vf <= 2 * e {
            return Err(PadicError::HenselConditionFailed {
                value: vf,
                twice_derivative: 2 * e,
            });
        }
        debug_assert_eq!(vd, e, "derivative valuation is constant along the iteration");
        if vf >= work || vf - e >= n {
            return Ok(r.mod_floor(&prime_power(pv, n)));
        }
        let num = &fv / &pe;
        let den = (&dv / &pe).mod_floor(&step_modulus);
        let inv = mod_inverse(&den, &step_modulus).expect("unit after removing p^e");
        r = (&r - num * inv).mod_floor(&step_modulus);
    }
    Err(PadicError::PrecisionExhausted("Newton iteration did not converge".into()))
}

/// Lift a simple root `r0` of `f` mod `p` to the root in `Z_p`, to absolute
/// precision `n`.
pub fn newton_lift(f: &IntPoly, r0: u64, p: NatPrime, n: u32) -> Result<PadicNumber, PadicError> {
    let pv = p.get();
    let pb = BigInt::from(pv);
    let r0b = BigInt::from(r0 % pv);
    if !f.eval_mod(&r0b, &pb).is_zero() {
        return Err(PadicError::NotARoot);
    }
    let df = f.derivative();
    if df.eval_mod(&r0b, &pb).is_zero() {
        return Err(PadicError::NonSimpleRoot);
    }
    let root = newton_lift_with(|r, m| (f.eval_mod(r, m), df.eval_mod(r, m)), &r0b, p, n)?;
    Ok(PadicNumber::from_integer_abs(p, &root, n as i64))
}
