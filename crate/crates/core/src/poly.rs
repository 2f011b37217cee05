//! Integer polynomials and the division-polynomial recurrence.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Dense univariate polynomial over `Z`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        IntPoly::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Evaluate modulo `m`, result in `[0, m)`.
    pub fn eval_mod(&self, x: &BigInt, m: &BigInt) -> BigInt {
        let acc = self
            .coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| (acc * x + c) % m);
        ((acc % m) + m) % m
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::default();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Minimal commutative-ring interface for running the division recurrence
/// over polynomials and over truncated p-adic values alike.
pub trait RingElem: Clone {
    /// The integer `n` in the same ring as `self`.
    fn constant(&self, n: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

impl RingElem for IntPoly {
    fn constant(&self, n: i64) -> Self {
        IntPoly::constant(BigInt::from(n))
    }
    fn add(&self, other: &Self) -> Self {
        IntPoly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        IntPoly::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        IntPoly::mul(self, other)
    }
}

/// `f_0, ..., f_m` for `y^2 = x^3 + ax + b`, where `f_k = ψ_k` for odd `k` and
/// `f_k = ψ_k / (2y)` for even `k`; every `f_k` is a polynomial in `x` alone.
pub fn division_values<R: RingElem>(x: &R, a: &R, b: &R, m: usize) -> Vec<R> {
    let c = |n: i64| x.constant(n);
    let x2 = x.mul(x);
    let x3 = x2.mul(x);
    let x4 = x2.mul(&x2);
    let x6 = x3.mul(&x3);
    let a2 = a.mul(a);
    let a3 = a2.mul(a);
    let b2 = b.mul(b);
    // (2y)^4 = 16 (x^3 + ax + b)^2
    let rhs = x3.add(&a.mul(x)).add(b);
    let y4 = c(16).mul(&rhs.mul(&rhs));

    let mut f: Vec<R> = Vec::with_capacity(m.max(4) + 1);
    f.push(c(0));
    f.push(c(1));
    f.push(c(1));
    // 3x^4 + 6ax^2 + 12bx - a^2
    f.push(
        c(3).mul(&x4)
            .add(&c(6).mul(&a.mul(&x2)))
            .add(&c(12).mul(&b.mul(x)))
            .sub(&a2),
    );
    // 2(x^6 + 5ax^4 + 20bx^3 - 5a^2x^2 - 4abx - 8b^2 - a^3)
    f.push(
        c(2).mul(
            &x6.add(&c(5).mul(&a.mul(&x4)))
                .add(&c(20).mul(&b.mul(&x3)))
                .sub(&c(5).mul(&a2.mul(&x2)))
                .sub(&c(4).mul(&a.mul(&b.mul(x))))
                .sub(&c(8).mul(&b2))
                .sub(&a3),
        ),
    );
    for k in 5..=m {
        let j = k / 2;
        let next = if k % 2 == 1 {
            // ψ_{2j+1} = ψ_{j+2} ψ_j^3 - ψ_{j-1} ψ_{j+1}^3, with the (2y)^4
            // factor landing on whichever product has even indices
            let first = f[j + 2].mul(&f[j].mul(&f[j]).mul(&f[j]));
            let second = f[j - 1].mul(&f[j + 1].mul(&f[j + 1]).mul(&f[j + 1]));
            if j % 2 == 0 {
                y4.mul(&first).sub(&second)
            } else {
                first.sub(&y4.mul(&second))
            }
        } else {
            // ψ_{2j} / (2y) = f_j (f_{j+2} f_{j-1}^2 - f_{j-2} f_{j+1}^2)
            let inner = f[j + 2]
                .mul(&f[j - 1].mul(&f[j - 1]))
                .sub(&f[j - 2].mul(&f[j + 1].mul(&f[j + 1])));
            f[j].mul(&inner)
        };
        f.push(next);
    }
    f.truncate(m + 1);
    f
}
