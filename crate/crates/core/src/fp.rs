//! Short Weierstrass curves over prime fields and point counting.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    add_mod, inv_mod, isqrt_u64, legendre, mul_mod, pow_mod, sqrt_mod_p, sub_mod, NatPrime,
};

/// Largest modulus counted by the naive Legendre sweep.
pub const NAIVE_LIMIT: u64 = 1 << 16;
/// Largest modulus counted at all.
pub const BSGS_LIMIT: u64 = 1 << 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("characteristic {0} is not supported (need p >= 5)")]
    SmallCharacteristic(u64),
    #[error("curve y^2 = x^3 + {a}x + {b} is singular mod {p}")]
    Singular { p: u64, a: u64, b: u64 },
    #[error("modulus {0} is outside the supported counting range (p <= 2^40)")]
    ModulusOutOfRange(u64),
    #[error("point ({x}, {y}) is not on the curve")]
    NotOnCurve { x: u64, y: u64 },
}

/// `y^2 = x^3 + ax + b` over `F_p`, `p >= 5`, nonsingular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpCurve {
    p: NatPrime,
    a: u64,
    b: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FpPoint {
    Identity,
    Affine { x: u64, y: u64 },
}

impl FpPoint {
    pub fn is_identity(&self) -> bool {
        matches!(self, FpPoint::Identity)
    }
}

impl fmt::Display for FpPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FpPoint::Identity => write!(f, "O"),
            FpPoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrdinaryClass {
    Ordinary,
    Supersingular,
}

impl FpCurve {
    pub fn new(p: NatPrime, a: u64, b: u64) -> Result<Self, FpError> {
        let pv = p.get();
        if pv < 5 {
            return Err(FpError::SmallCharacteristic(pv));
        }
        let (a, b) = (a % pv, b % pv);
        let disc = add_mod(
            mul_mod(4, pow_mod(a, 3, pv), pv),
            mul_mod(27, mul_mod(b, b, pv), pv),
            pv,
        );
        if disc == 0 {
            return Err(FpError::Singular { p: pv, a, b });
        }
        Ok(FpCurve { p, a, b })
    }

    /// Reduce signed integer coefficients.
    pub fn from_signed(p: NatPrime, a: i128, b: i128) -> Result<Self, FpError> {
        let pv = p.get() as i128;
        FpCurve::new(p, a.rem_euclid(pv) as u64, b.rem_euclid(pv) as u64)
    }

    pub fn p(&self) -> NatPrime {
        self.p
    }

    pub fn modulus(&self) -> u64 {
        self.p.get()
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `x^3 + ax + b`.
    pub fn rhs(&self, x: u64) -> u64 {
        let p = self.modulus();
        let x = x % p;
        add_mod(
            add_mod(pow_mod(x, 3, p), mul_mod(self.a, x, p), p),
            self.b,
            p,
        )
    }

    pub fn contains(&self, pt: &FpPoint) -> bool {
        match *pt {
            FpPoint::Identity => true,
            FpPoint::Affine { x, y } => {
                let p = self.modulus();
                x < p && y < p && mul_mod(y, y, p) == self.rhs(x)
            }
        }
    }

    pub fn point(&self, x: u64, y: u64) -> Result<FpPoint, FpError> {
        let pt = FpPoint::Affine { x, y };
        if self.contains(&pt) {
            Ok(pt)
        } else {
            Err(FpError::NotOnCurve { x, y })
        }
    }

    /// Quadratic twist `y^2 = x^3 + g^2 a x + g^3 b` by a non-residue `g`.
    pub fn quadratic_twist(&self) -> FpCurve {
        let p = self.modulus();
        let g = (2..p).find(|&g| legendre(g, p) == -1).expect("odd prime has a non-residue");
        let g2 = mul_mod(g, g, p);
        FpCurve {
            p: self.p,
            a: mul_mod(g2, self.a, p),
            b: mul_mod(mul_mod(g2, g, p), self.b, p),
        }
    }

    pub fn neg(&self, pt: &FpPoint) -> FpPoint {
        match *pt {
            FpPoint::Identity => FpPoint::Identity,
            FpPoint::Affine { x, y } => FpPoint::Affine {
                x,
                y: if y == 0 { 0 } else { self.modulus() - y },
            },
        }
    }

    /// Chord-tangent addition.
    pub fn add(&self, lhs: &FpPoint, rhs: &FpPoint) -> FpPoint {
        let p = self.modulus();
        let (x1, y1, x2, y2) = match (*lhs, *rhs) {
            (FpPoint::Identity, q) => return q,
            (q, FpPoint::Identity) => return q,
            (FpPoint::Affine { x: x1, y: y1 }, FpPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            if add_mod(y1, y2, p) == 0 {
                return FpPoint::Identity;
            }
            let num = add_mod(mul_mod(3, mul_mod(x1, x1, p), p), self.a, p);
            let den = inv_mod(mul_mod(2, y1, p), p).expect("2y is a unit");
            mul_mod(num, den, p)
        } else {
            let num = sub_mod(y2, y1, p);
            let den = inv_mod(sub_mod(x2, x1, p), p).expect("x2 - x1 is a unit");
            mul_mod(num, den, p)
        };
        let x3 = sub_mod(sub_mod(mul_mod(lambda, lambda, p), x1, p), x2, p);
        let y3 = sub_mod(mul_mod(lambda, sub_mod(x1, x3, p), p), y1, p);
        FpPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, pt: &FpPoint) -> FpPoint {
        self.add(pt, pt)
    }

    /// `[k]P` by double-and-add.
    pub fn scalar_mul(&self, k: i128, pt: &FpPoint) -> FpPoint {
        let base = if k < 0 { self.neg(pt) } else { *pt };
        let mut k = k.unsigned_abs();
        let mut acc = FpPoint::Identity;
        let mut addend = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &addend);
            }
            addend = self.double(&addend);
            k >>= 1;
        }
        acc
    }

    /// All affine points, ascending by `x` then `y`.
    pub fn points(&self) -> Vec<FpPoint> {
        let p = self.modulus();
        let mut out = Vec::new();
        for x in 0..p {
            if let Some(y) = sqrt_mod_p(self.rhs(x), self.p) {
                out.push(FpPoint::Affine { x, y });
                if y != 0 {
                    out.push(FpPoint::Affine { x, y: p - y });
                }
            }
        }
        out
    }

    /// `|E(F_p)|`, dispatching on the size of `p`.
    pub fn count_points(&self) -> Result<u64, FpError> {
        let p = self.modulus();
        if p <= NAIVE_LIMIT {
            Ok(self.count_points_naive())
        } else if p <= BSGS_LIMIT {
            Ok(self.count_points_bsgs())
        } else {
            Err(FpError::ModulusOutOfRange(p))
        }
    }

    /// Sweep over `x` with a table of quadratic residues.
    pub fn count_points_naive(&self) -> u64 {
        let p = self.modulus();
        let mut is_square = vec![false; p as usize];
        for y in 1..=(p / 2) {
            is_square[mul_mod(y, y, p) as usize] = true;
        }
        let mut count = 1u64;
        for x in 0..p {
            let r = self.rhs(x);
            if r == 0 {
                count += 1;
            } else if is_square[r as usize] {
                count += 2;
            }
        }
        count
    }

    /// Baby-step giant-step in the Hasse interval.
    ///
    /// Accumulates the lcm of exact point orders until a single multiple fits
    /// `[p + 1 - 2√p, p + 1 + 2√p]`; uses the quadratic twist next, and the naive
    /// count when the interval is still ambiguous.
    pub fn count_points_bsgs(&self) -> u64 {
        let p = self.modulus();
        let (lo, hi) = hasse_interval(p);
        let twist = self.quadratic_twist();
        let l_own = self.order_lcm(lo, hi, 24);
        let own: Vec<u64> = multiples_in(l_own, lo, hi);
        if own.len() == 1 {
            return own[0];
        }
        // #E + #E' = 2p + 2
        let l_twist = twist.order_lcm(lo, hi, 24);
        let both: Vec<u64> = own
            .into_iter()
            .filter(|&n| (2 * p + 2 - n) % l_twist == 0)
            .collect();
        if both.len() == 1 {
            return both[0];
        }
        self.count_points_naive_large()
    }

    // Euler-criterion sweep without the residue table; for p above NAIVE_LIMIT.
    fn count_points_naive_large(&self) -> u64 {
        let p = self.modulus();
        let mut count = 1u64;
        for x in 0..p {
            count = (count as i64 + 1 + legendre(self.rhs(x), p) as i64) as u64;
        }
        count
    }

    fn order_lcm(&self, lo: u64, hi: u64, max_points: usize) -> u64 {
        let p = self.modulus();
        let mut l = 1u64;
        let mut used = 0;
        for x in 0..p {
            if used >= max_points {
                break;
            }
            let Some(y) = sqrt_mod_p(self.rhs(x), self.p) else {
                continue;
            };
            let pt = FpPoint::Affine { x, y };
            used += 1;
            if let Some(ord) = self.point_order(&pt, lo, hi) {
                l = lcm(l, ord);
            }
            if multiples_in(l, lo, hi).len() == 1 {
                break;
            }
        }
        l
    }

    /// Exact order of `pt`, given that some multiple of it lies in `[lo, hi]`.
    pub fn point_order(&self, pt: &FpPoint, lo: u64, hi: u64) -> Option<u64> {
        let n = self.bsgs_multiple(pt, lo, hi)?;
        let mut ord = n;
        for q in prime_factors(n) {
            while ord % q == 0 && self.scalar_mul((ord / q) as i128, pt) == FpPoint::Identity {
                ord /= q;
            }
        }
        Some(ord)
    }

    // Some n in [lo, hi] with [n]pt = O, or the order itself if it is tiny.
    fn bsgs_multiple(&self, pt: &FpPoint, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo + 1;
        let m = isqrt_u64(width) + 1;
        let mut baby: HashMap<FpPoint, u64> = HashMap::with_capacity(m as usize + 1);
        let mut cur = FpPoint::Identity;
        for j in 0..=m {
            if j > 0 && cur == FpPoint::Identity {
                // order <= m; found directly
                return Some(j);
            }
            baby.entry(cur).or_insert(j);
            cur = self.add(&cur, pt);
        }
        let giant = self.neg(&self.scalar_mul(m as i128, pt));
        let mut probe = self.neg(&self.scalar_mul(lo as i128, pt));
        for i in 0..=m {
            if let Some(&j) = baby.get(&probe) {
                let k = i * m + j;
                if k < width {
                    return Some(lo + k);
                }
            }
            probe = self.add(&probe, &giant);
        }
        None
    }

    pub fn trace_of_frobenius(&self) -> Result<i64, FpError> {
        let n = self.count_points()?;
        Ok(self.modulus() as i64 + 1 - n as i64)
    }

    /// `|E(F_p)| = p`, equivalently `a_p = 1`.
    pub fn is_anomalous(&self) -> Result<bool, FpError> {
        Ok(self.count_points()? == self.modulus())
    }

    pub fn ordinary_class(&self) -> Result<OrdinaryClass, FpError> {
        let t = self.trace_of_frobenius()?;
        if t.rem_euclid(self.modulus() as i64) == 0 {
            Ok(OrdinaryClass::Supersingular)
        } else {
            Ok(OrdinaryClass::Ordinary)
        }
    }
}

/// `[p + 1 - floor(2√p), p + 1 + floor(2√p)]`.
pub fn hasse_interval(p: u64) -> (u64, u64) {
    let s = isqrt_u64(4 * p);
    (p + 1 - s, p + 1 + s)
}

fn multiples_in(l: u64, lo: u64, hi: u64) -> Vec<u64> {
    let first = lo.div_ceil(l) * l;
    (0..)
        .map(|i| first + i * l)
        .take_while(|&n| n <= hi)
        .collect()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}
