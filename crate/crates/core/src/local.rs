//! Points over `Q_p` on a good model, the lift of an `F_p`-point of order
//! `p` to genuine `p`-torsion, and the splitting `P = F + T0` with `F` in the
//! kernel of reduction.
//!
//! Everything happens over `Q_p`. When `|E(F_p)| = p` the `p`-torsion is an
//! extension of the étale part by the formal part and the extension splits
//! over `Q_p` exactly when an `F_p`-point lifts to a `Q_p`-rational point of
//! order `p`. The decomposition records the formal component of `P` and asks
//! whether that component is itself nontrivial in `E_1 / E_2`, i.e. whether
//! its `t`-parameter has valuation exactly one.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::arith::NatPrime;
use crate::curve::{valuation, Curve, CurveError, QPoint};
use crate::fp::{FpCurve, FpError, FpPoint};
use crate::padic::{
    newton_lift_with, prime_power, DualMod, PadicError, PadicNumber, PadicReport,
    DEFAULT_PRECISION, MIN_CERTIFIED_DIGITS,
};
use crate::poly::division_values;

/// Extra digits carried by the torsion lift beyond the requested precision.
const LIFT_GUARD: u32 = 4;

/// Precision used for the automatic retry.
pub const RETRY_PRECISION: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LocalError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error("model has bad reduction at {0}")]
    BadReduction(u64),
    #[error("curve is not anomalous at {p}: |E(F_p)| = {count}")]
    NotAnomalous { p: u64, count: u64 },
    #[error("the identity has no nontrivial torsion lift")]
    IdentityTarget,
    #[error("target point is not on the reduced curve")]
    TargetNotOnCurve,
    #[error("no Q_{0}-rational p-torsion point lifts the target; the torsion does not split")]
    SplitHypothesisViolated(u64),
    #[error("point is not in the kernel of reduction")]
    NotInKernel,
    #[error("the identity has no t-parameter")]
    IdentityInput,
    #[error("x-coordinate of valuation {0} cannot occur on a good model")]
    InconsistentValuation(i64),
    #[error("point has finite order (at most 12); it has no meaningful decomposition")]
    TorsionPoint,
    #[error("point is not on the curve")]
    NotOnCurve,
}

/// A point of `E(Q_p)` to finite precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QpPoint {
    Identity,
    Affine { x: PadicNumber, y: PadicNumber },
}

impl QpPoint {
    pub fn is_identity(&self) -> bool {
        matches!(self, QpPoint::Identity)
    }

    /// Embed a rational point with `prec` significant digits per coordinate.
    pub fn from_rational(p: NatPrime, pt: &QPoint, prec: u32) -> QpPoint {
        match pt {
            QPoint::Identity => QpPoint::Identity,
            QPoint::Affine { x, y } => QpPoint::Affine {
                x: PadicNumber::from_rational(p, x, prec),
                y: PadicNumber::from_rational(p, y, prec),
            },
        }
    }

    pub fn x(&self) -> Option<&PadicNumber> {
        match self {
            QpPoint::Identity => None,
            QpPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&PadicNumber> {
        match self {
            QpPoint::Identity => None,
            QpPoint::Affine { y, .. } => Some(y),
        }
    }

    /// Smallest absolute precision among the coordinates.
    pub fn abs_prec(&self) -> Option<i64> {
        match self {
            QpPoint::Identity => None,
            QpPoint::Affine { x, y } => Some(x.abs_prec().min(y.abs_prec())),
        }
    }

    /// Whether the two points agree to the precision they carry.
    pub fn agrees_with(&self, other: &QpPoint) -> bool {
        match (self, other) {
            (QpPoint::Identity, QpPoint::Identity) => true,
            (QpPoint::Affine { x: x1, y: y1 }, QpPoint::Affine { x: x2, y: y2 }) => {
                x1.agrees_with(x2) && y1.agrees_with(y2)
            }
            _ => false,
        }
    }
}

impl fmt::Display for QpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QpPoint::Identity => write!(f, "O"),
            QpPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

impl Serialize for QpPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            QpPoint::Identity => s.serialize_str("identity"),
            QpPoint::Affine { x, y } => {
                let mut st = s.serialize_struct("QpPoint", 2)?;
                st.serialize_field("x", &PadicReport::from(x))?;
                st.serialize_field("y", &PadicReport::from(y))?;
                st.end()
            }
        }
    }
}

/// Group law on `y^2 = x^3 + Ax + B` over `Q_p`.
#[derive(Debug, Clone)]
pub struct LocalCurve {
    curve: Curve,
    p: NatPrime,
}

impl LocalCurve {
    /// `curve` must have `p ∤ Δ` for this very model.
    pub fn new(curve: &Curve, p: NatPrime) -> Result<Self, LocalError> {
        if valuation(&curve.discriminant(), p.get()) != Some(0) {
            return Err(LocalError::BadReduction(p.get()));
        }
        Ok(LocalCurve {
            curve: curve.clone(),
            p,
        })
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn prime(&self) -> NatPrime {
        self.p
    }

    /// `x^3 + Ax + B`.
    pub fn rhs(&self, x: &PadicNumber) -> Result<PadicNumber, PadicError> {
        let x3 = x.mul(x)?.mul(x)?;
        x3.add(&x.mul_int(self.curve.a()))?.add_int(self.curve.b())
    }

    /// Whether `y^2 - rhs(x)` vanishes to the available precision.
    pub fn contains(&self, pt: &QpPoint) -> Result<bool, PadicError> {
        match pt {
            QpPoint::Identity => Ok(true),
            QpPoint::Affine { x, y } => Ok(y.mul(y)?.agrees_with(&self.rhs(x)?)),
        }
    }

    pub fn neg(&self, pt: &QpPoint) -> QpPoint {
        match pt {
            QpPoint::Identity => QpPoint::Identity,
            QpPoint::Affine { x, y } => QpPoint::Affine {
                x: x.clone(),
                y: y.neg(),
            },
        }
    }

    pub fn add(&self, lhs: &QpPoint, rhs: &QpPoint) -> Result<QpPoint, PadicError> {
        let (x1, y1, x2, y2) = match (lhs, rhs) {
            (QpPoint::Identity, _) => return Ok(rhs.clone()),
            (_, QpPoint::Identity) => return Ok(lhs.clone()),
            (QpPoint::Affine { x: x1, y: y1 }, QpPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let dx = x2.sub(x1)?;
        let lambda = if dx.is_zero() {
            let sum = y1.add(y2)?;
            if sum.is_zero() {
                return Ok(QpPoint::Identity);
            }
            if !y2.sub(y1)?.is_zero() {
                return Err(PadicError::PrecisionExhausted(
                    "points agree in x but neither y1 = y2 nor y1 = -y2 is certified".into(),
                ));
            }
            return self.double(lhs);
        } else {
            y2.sub(y1)?.div(&dx)?
        };
        self.finish(&lambda, x1, y1, x2)
    }

    pub fn double(&self, pt: &QpPoint) -> Result<QpPoint, PadicError> {
        let QpPoint::Affine { x, y } = pt else {
            return Ok(QpPoint::Identity);
        };
        if y.is_zero() {
            return Err(PadicError::PrecisionExhausted(
                "doubling a point whose y-coordinate is zero to working precision".into(),
            ));
        }
        let num = x.mul(x)?.mul_int(&BigInt::from(3)).add_int(self.curve.a())?;
        let lambda = num.div(&y.mul_int(&BigInt::from(2)))?;
        self.finish(&lambda, x, y, x)
    }

    fn finish(
        &self,
        lambda: &PadicNumber,
        x1: &PadicNumber,
        y1: &PadicNumber,
        x2: &PadicNumber,
    ) -> Result<QpPoint, PadicError> {
        let x3 = lambda.mul(lambda)?.sub(x1)?.sub(x2)?;
        let y3 = lambda.mul(&x1.sub(&x3)?)?.sub(y1)?;
        Ok(QpPoint::Affine { x: x3, y: y3 })
    }

    pub fn scalar_mul(&self, k: i64, pt: &QpPoint) -> Result<QpPoint, PadicError> {
        let mut base = if k < 0 { self.neg(pt) } else { pt.clone() };
        let mut n = k.unsigned_abs();
        let mut acc = QpPoint::Identity;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base)?;
            }
            n >>= 1;
            if n > 0 {
                base = self.double(&base)?;
            }
        }
        Ok(acc)
    }

    /// Image in `E(F_p)`. Points with `v(x) <= -2` lie in the kernel of
    /// reduction.
    pub fn reduce_point(&self, pt: &QpPoint) -> Result<FpPoint, LocalError> {
        let QpPoint::Affine { x, y } = pt else {
            return Ok(FpPoint::Identity);
        };
        let vx = x.valuation_bound();
        if vx < 0 {
            if x.is_zero() {
                return Err(PadicError::PrecisionExhausted(
                    "x-coordinate has no certified digits".into(),
                )
                .into());
            }
            if vx == -1 {
                return Err(LocalError::InconsistentValuation(vx));
            }
            return Ok(FpPoint::Identity);
        }
        Ok(FpPoint::Affine {
            x: x.residue()?,
            y: y.residue()?,
        })
    }

    /// `t = -x/y` for a point of `E_1`.
    pub fn t_parameter(&self, pt: &QpPoint) -> Result<PadicNumber, LocalError> {
        let QpPoint::Affine { x, y } = pt else {
            return Err(LocalError::IdentityInput);
        };
        if self.reduce_point(pt)? != FpPoint::Identity {
            return Err(LocalError::NotInKernel);
        }
        Ok(x.neg().div(y)?)
    }

    /// Lift `target` in `E(F_p)`, `|E(F_p)| = p`, to `T0` in `E(Q_p)[p]`
    /// with `N` certified digits per coordinate.
    ///
    /// Modulo `p` every root of `ψ_p` at an étale `x` has multiplicity `p`,
    /// so plain Hensel lifting from `x(target)` is unavailable. The root is
    /// instead located among the `p` refinements `x(target) + p j`: at the
    /// true root `v(ψ_p') = 1` while `v(ψ_p) >= 3` for the right refinement
    /// only, which is exactly the condition for Newton's method to converge
    /// from there. `ψ_p` is evaluated pointwise through its recurrence.
    pub fn lift_p_torsion(&self, target: &FpPoint, n: u32) -> Result<QpPoint, LocalError> {
        let pv = self.p.get();
        let fp = self.reduced()?;
        let count = fp.count_points()?;
        if count != pv {
            return Err(LocalError::NotAnomalous { p: pv, count });
        }
        let FpPoint::Affine { x: xbar, y: ybar } = *target else {
            return Err(LocalError::IdentityTarget);
        };
        if !fp.contains(target) {
            return Err(LocalError::TargetNotOnCurve);
        }
        let prec = n + LIFT_GUARD;
        let (a, b) = (self.curve.a().clone(), self.curve.b().clone());
        let index = pv as usize;
        let eval = |r: &BigInt, m: &BigInt| -> (BigInt, BigInt) {
            let x = DualMod::variable(r, m);
            let f = division_values(
                &x,
                &DualMod::constant_of(&a, m),
                &DualMod::constant_of(&b, m),
                index,
            );
            let last = &f[index];
            (last.value.clone(), last.deriv.clone())
        };

        let mut root: Option<BigInt> = None;
        for j in 0..pv {
            let start = BigInt::from(xbar) + BigInt::from(pv) * BigInt::from(j);
            match newton_lift_with(&eval, &start, self.p, prec) {
                Ok(r) => {
                    if let Some(prev) = &root {
                        if prev != &r {
                            return Err(LocalError::SplitHypothesisViolated(pv));
                        }
                    }
                    root = Some(r);
                }
                Err(PadicError::HenselConditionFailed { .. }) | Err(PadicError::NonSimpleRoot) => {}
                Err(e) => return Err(e.into()),
            }
        }
        let root = root.ok_or(LocalError::SplitHypothesisViolated(pv))?;
        let x = PadicNumber::from_integer_abs(self.p, &root, prec as i64);
        let y = self.rhs(&x)?.sqrt(ybar)?;
        Ok(QpPoint::Affine { x, y })
    }

    fn reduced(&self) -> Result<FpCurve, LocalError> {
        let pv = self.p.get();
        let a = self.curve.a().mod_floor(&BigInt::from(pv));
        let b = self.curve.b().mod_floor(&BigInt::from(pv));
        Ok(FpCurve::new(
            self.p,
            a.try_into().expect("residue fits"),
            b.try_into().expect("residue fits"),
        )?)
    }
}

/// `P = F + T0` with `T0` the `p`-torsion lift of the reduction of `P` and
/// `F` in the kernel of reduction.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub p: u64,
    /// Model on which the computation ran (`p`-minimal, good at `p`).
    pub model: Curve,
    pub bar_p: FpPoint,
    pub t0: QpPoint,
    pub f: QpPoint,
    /// `v(t(F))`, or `None` when `F` is the identity to working precision.
    pub tval: Option<i64>,
    pub formal_nontrivial: bool,
    /// Working precision in `p`-adic digits.
    pub precision: u32,
}

impl Decomposition {
    /// Re-check `F + T0 = P`, `F ∈ E_1` and `[p]T0 = O` at the carried
    /// precision.
    pub fn verify(&self, point: &QPoint) -> Result<(), String> {
        let p = NatPrime::new(self.p).map_err(|e| e.to_string())?;
        let local = LocalCurve::new(&self.model, p).map_err(|e| e.to_string())?;
        let pt = QpPoint::from_rational(p, point, self.precision);
        let sum = local.add(&self.f, &self.t0).map_err(|e| e.to_string())?;
        if !sum.agrees_with(&pt) {
            return Err(format!("F + T0 = {sum} differs from P = {pt}"));
        }
        if local.reduce_point(&self.f).map_err(|e| e.to_string())? != FpPoint::Identity {
            return Err("F does not reduce to the identity".into());
        }
        let torsion = local
            .scalar_mul(self.p as i64, &self.t0)
            .map_err(|e| e.to_string())?;
        if !torsion.is_identity() {
            return Err(format!("[p]T0 = {torsion} is not the identity"));
        }
        Ok(())
    }
}

/// Move a point to the `p`-minimal model: `x / u^2`, `y / u^3` with `u = p^k`.
fn to_minimal(curve: &Curve, pt: &QPoint, p: NatPrime) -> (Curve, QPoint) {
    let minimal = curve.minimal_at_p(p);
    let va = |c: &Curve| valuation(c.a(), p.get()).map(|v| v as i64);
    let vb = |c: &Curve| valuation(c.b(), p.get()).map(|v| v as i64);
    let k = match (va(curve), va(&minimal)) {
        (Some(v0), Some(v1)) => (v0 - v1) / 4,
        _ => match (vb(curve), vb(&minimal)) {
            (Some(v0), Some(v1)) => (v0 - v1) / 6,
            _ => 0,
        },
    };
    if k == 0 {
        return (minimal, pt.clone());
    }
    let u = prime_power(p.get(), k as u32);
    let scaled = match pt {
        QPoint::Identity => QPoint::Identity,
        QPoint::Affine { x, y } => {
            let u2 = num_rational::BigRational::from_integer(&u * &u);
            let u3 = num_rational::BigRational::from_integer(&u * &u * &u);
            QPoint::Affine {
                x: x / u2,
                y: y / u3,
            }
        }
    };
    (minimal, scaled)
}

/// Decompose `P` at precision `n`, retrying once at a higher precision if the
/// first attempt runs out of digits.
pub fn decompose_point(
    curve: &Curve,
    point: &QPoint,
    p: NatPrime,
    n: u32,
) -> Result<Decomposition, LocalError> {
    if !curve.contains(point) {
        return Err(LocalError::NotOnCurve);
    }
    if !curve.has_infinite_order(point) {
        return Err(LocalError::TorsionPoint);
    }
    match decompose_once(curve, point, p, n) {
        Err(LocalError::Padic(PadicError::PrecisionExhausted(_))) => {
            decompose_once(curve, point, p, RETRY_PRECISION.max(2 * n))
        }
        other => other,
    }
}

/// [`decompose_point`] at the default precision.
pub fn decompose_point_default(
    curve: &Curve,
    point: &QPoint,
    p: NatPrime,
) -> Result<Decomposition, LocalError> {
    decompose_point(curve, point, p, DEFAULT_PRECISION)
}

fn decompose_once(
    curve: &Curve,
    point: &QPoint,
    p: NatPrime,
    n: u32,
) -> Result<Decomposition, LocalError> {
    let (model, pt) = to_minimal(curve, point, p);
    let local = LocalCurve::new(&model, p)?;
    let qp = QpPoint::from_rational(p, &pt, n);
    let bar_p = local.reduce_point(&qp)?;
    let t0 = match bar_p {
        FpPoint::Identity => {
            // still insist on the anomalous hypothesis
            let count = local.reduced()?.count_points()?;
            if count != p.get() {
                return Err(LocalError::NotAnomalous { p: p.get(), count });
            }
            QpPoint::Identity
        }
        target => local.lift_p_torsion(&target, n)?,
    };
    let f = local.add(&qp, &local.neg(&t0))?;
    if f.is_identity() {
        return Err(PadicError::PrecisionExhausted(
            "P and its torsion component agree to working precision".into(),
        )
        .into());
    }
    let t = local.t_parameter(&f)?;
    let tval = t.valuation();
    if tval.is_none() && t.abs_prec() < 2 {
        return Err(PadicError::PrecisionExhausted("t-parameter has no certified digits".into()).into());
    }
    if let Some(v) = f.abs_prec() {
        let vx = f.x().and_then(|x| x.valuation()).unwrap_or(0);
        if v - vx < MIN_CERTIFIED_DIGITS as i64 {
            return Err(PadicError::PrecisionExhausted(format!(
                "formal component carries only {} digits",
                v - vx
            ))
            .into());
        }
    }
    Ok(Decomposition {
        p: p.get(),
        model,
        bar_p,
        t0,
        f,
        tval,
        formal_nontrivial: tval == Some(1),
        precision: n,
    })
}

/// A point of `E_1 \ E_2` with `x = u p^-2`, when `u` is a square mod `p`.
pub fn layer_one_point(local: &LocalCurve, u: u64) -> Result<Option<QpPoint>, LocalError> {
    let p = local.prime();
    let pv = p.get();
    if u % pv == 0 {
        return Ok(None);
    }
    let prec = 24;
    let x = PadicNumber::from_integer(p, &BigInt::from(u), prec)
        .div(&PadicNumber::from_integer(p, &BigInt::from(pv * pv), prec))?;
    let rhs = local.rhs(&x)?;
    // rhs = p^-6 (u^3 + ...); take the root of the unit part
    let unit = rhs.unit().expect("rhs is nonzero").mod_floor(&BigInt::from(pv));
    let unit: u64 = unit.try_into().expect("residue fits");
    let Some(r) = crate::arith::sqrt_mod_p(unit, p) else {
        return Ok(None);
    };
    let y = rhs.sqrt(r)?;
    Ok(Some(QpPoint::Affine { x, y }))
}

/// Exact check used as an oracle: for odd unramified `p` and `P` reducing to
/// a point of order `p` (or to `O`), `[p]P` lies in `E_2 \ E_3` iff the formal
/// component of `P` lies in `E_1 \ E_2`.
pub fn t_valuation_of_multiple(curve: &Curve, point: &QPoint, p: NatPrime) -> Option<i64> {
    let q = curve.scalar_mul(p.get() as i64, point);
    let QPoint::Affine { x, y } = q else {
        return None;
    };
    let t = -(x / y);
    if t.is_zero() {
        return None;
    }
    let vn = valuation(t.numer(), p.get()).unwrap_or(0) as i64;
    let vd = valuation(t.denom(), p.get()).unwrap_or(0) as i64;
    Some(vn - vd)
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tval = self
            .tval
            .map(|v| v.to_string())
            .unwrap_or_else(|| format!(">= {}", self.precision));
        write!(
            f,
            "p = {}: reduction {}, v(t(F)) = {}, formal component {}",
            self.p,
            self.bar_p,
            tval,
            if self.formal_nontrivial { "nontrivial" } else { "trivial mod E_2" }
        )
    }
}
