//! Imaginary quadratic fields of class number one and their anomalous primes.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime, is_square_u128, kronecker_symbol, NatPrime};
use crate::curve::Curve;
use crate::fp::{FpCurve, FpError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("discriminant {0} is not one of the nine class-number-one fields")]
    UnsupportedDiscriminant(i64),
    #[error("{p} does not split in Q(sqrt({d}))")]
    NotSplit { d: i64, p: u64 },
    #[error("no element of trace {trace} and norm {p} in Q(sqrt({d}))")]
    NoFrobenius { d: i64, p: u64, trace: i64 },
    #[error("{0} is not of the form 4p = 1 + 3v^2 with p > 3")]
    NotAnomalousPrime(u64),
    #[error("found {found} anomalous classes mod {p}, expected (p - 1)/6 = {expected}")]
    ResidueCountMismatch { p: u64, found: usize, expected: u64 },
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// `Q(sqrt(D))` for `D` in {-3, -4, -7, -8, -11, -19, -43, -67, -163}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct ImagQuadField(i64);

/// `(D, j)` for the maximal order of each class-number-one field.
const CM_J_INVARIANTS: [(i64, i64); 9] = [
    (-3, 0),
    (-4, 1728),
    (-7, -3375),
    (-8, 8000),
    (-11, -32768),
    (-19, -884_736),
    (-43, -884_736_000),
    (-67, -147_197_952_000),
    (-163, -262_537_412_640_768_000),
];

impl ImagQuadField {
    pub const ALL: [i64; 9] = [-3, -4, -7, -8, -11, -19, -43, -67, -163];

    pub fn new(d: i64) -> Result<Self, QuadError> {
        if Self::ALL.contains(&d) {
            Ok(ImagQuadField(d))
        } else {
            Err(QuadError::UnsupportedDiscriminant(d))
        }
    }

    pub fn discriminant(&self) -> i64 {
        self.0
    }

    pub fn magnitude(&self) -> u64 {
        self.0.unsigned_abs()
    }

    /// Field whose maximal order has the curve's `j`-invariant, if any.
    pub fn from_j_invariant(curve: &Curve) -> Option<ImagQuadField> {
        let j = curve.j_invariant();
        CM_J_INVARIANTS
            .iter()
            .find(|(_, jj)| j == BigRational::from_integer(BigInt::from(*jj)))
            .map(|(d, _)| ImagQuadField(*d))
    }

    /// Kronecker symbol `(D | p) = 1`.
    pub fn splits_completely(&self, p: NatPrime) -> bool {
        kronecker_symbol(self.0, p.get() as i64) == 1
    }

    /// The conjugate pair `(a_p ± v sqrt(D)) / 2` of norm `p`.
    pub fn frobenius_candidates(&self, p: NatPrime, trace: i64) -> Result<FrobeniusPair, QuadError> {
        let pv = p.get();
        if !self.splits_completely(p) {
            return Err(QuadError::NotSplit { d: self.0, p: pv });
        }
        let none = QuadError::NoFrobenius {
            d: self.0,
            p: pv,
            trace,
        };
        let rest = 4 * pv as i128 - (trace as i128) * (trace as i128);
        if rest < 0 || rest % self.magnitude() as i128 != 0 {
            return Err(none);
        }
        let v = is_square_u128((rest / self.magnitude() as i128) as u128).ok_or(none)?;
        Ok(FrobeniusPair {
            trace,
            v: v as u64,
            field: *self,
            p: pv,
        })
    }

    /// Primes `5 <= p <= bound` with `4p = 1 + |D| v^2`, ascending.
    pub fn anomalous_primes(&self, bound: u64) -> Vec<NatPrime> {
        let d = self.magnitude() as u128;
        let mut out = Vec::new();
        let mut v: u128 = 1;
        loop {
            let four_p = 1 + d * v * v;
            if four_p / 4 > bound as u128 {
                break;
            }
            if four_p % 4 == 0 {
                let p = (four_p / 4) as u64;
                if p >= 5 && is_prime(p) {
                    out.push(NatPrime::new(p).expect("checked prime"));
                }
            }
            v += 1;
        }
        out.sort();
        out.dedup();
        out
    }
}

impl TryFrom<i64> for ImagQuadField {
    type Error = QuadError;
    fn try_from(d: i64) -> Result<Self, Self::Error> {
        ImagQuadField::new(d)
    }
}

impl From<ImagQuadField> for i64 {
    fn from(k: ImagQuadField) -> i64 {
        k.0
    }
}

impl fmt::Display for ImagQuadField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(sqrt({}))", self.0)
    }
}

/// `η, η̄ = (trace ± v sqrt(D)) / 2` with `η η̄ = p`. Which conjugate reduces
/// to Frobenius is not decided here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusPair {
    pub trace: i64,
    pub v: u64,
    pub field: ImagQuadField,
    pub p: u64,
}

impl FrobeniusPair {
    pub fn norm(&self) -> i128 {
        let t = self.trace as i128;
        let v = self.v as i128;
        (t * t + self.field.magnitude() as i128 * v * v) / 4
    }

    pub fn eta(&self) -> String {
        format!("({} + {}*sqrt({}))/2", self.trace, self.v, self.field.discriminant())
    }

    pub fn eta_bar(&self) -> String {
        format!("({} - {}*sqrt({}))/2", self.trace, self.v, self.field.discriminant())
    }
}

/// All `c` in `1..p` with `|{y^2 = x^3 + c}(F_p)| = p`, by exhaustive count.
///
/// `p` must satisfy `4p = 1 + 3v^2`; the number of classes found is checked
/// against `(p - 1)/6`.
pub fn anomalous_residues_d3(p: NatPrime) -> Result<Vec<u64>, QuadError> {
    let pv = p.get();
    let d3 = ImagQuadField(-3);
    if pv < 5 || !d3.anomalous_primes(pv).contains(&p) {
        return Err(QuadError::NotAnomalousPrime(pv));
    }
    let mut out = Vec::new();
    for c in 1..pv {
        let e = FpCurve::new(p, 0, c)?;
        if e.count_points_naive() == pv {
            out.push(c);
        }
    }
    let expected = (pv - 1) / 6;
    if out.len() as u64 != expected {
        return Err(QuadError::ResidueCountMismatch {
            p: pv,
            found: out.len(),
            expected,
        });
    }
    Ok(out)
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
    fn splitting() {
        assert!(field(-3).splits_completely(np(7)));
        assert!(!field(-3).splits_completely(np(5)));
        assert!(field(-11).splits_completely(np(223)));
        assert!(field(-19).splits_completely(np(43)));
        assert!(field(-4).splits_completely(np(13)));
        assert!(!field(-4).splits_completely(np(7)));
        assert!(ImagQuadField::new(-5).is_err());
    }

    #[test]
    fn frobenius_pairs() {
        let pair = field(-3).frobenius_candidates(np(7), 1).unwrap();
        assert_eq!((pair.trace, pair.v), (1, 3));
        assert_eq!(pair.norm(), 7);
        assert_eq!(pair.eta(), "(1 + 3*sqrt(-3))/2");
        let pair = field(-19).frobenius_candidates(np(43), 1).unwrap();
        assert_eq!((pair.trace, pair.v), (1, 3));
        assert!(matches!(
            field(-3).frobenius_candidates(np(7), 2),
            Err(QuadError::NoFrobenius { .. })
        ));
        assert!(matches!(
            field(-3).frobenius_candidates(np(5), 1),
            Err(QuadError::NotSplit { .. })
        ));
    }

    #[test]
    fn anomalous_prime_lists() {
        let d3: Vec<u64> = field(-3).anomalous_primes(100).iter().map(|p| p.get()).collect();
        assert_eq!(d3, vec![7, 19, 37, 61]);
        assert!(field(-163).anomalous_primes(40).is_empty());
        assert_eq!(field(-163).anomalous_primes(41), vec![np(41)]);
        assert!(field(-11).anomalous_primes(300).contains(&np(223)));
        assert!(field(-19).anomalous_primes(100).contains(&np(43)));
        // Q(i), Q(sqrt(-2)), Q(sqrt(-7)): no primes p >= 5 of this shape
        for d in [-4, -8, -7] {
            assert!(field(d).anomalous_primes(100_000).is_empty(), "D = {d}");
        }
        for d in ImagQuadField::ALL {
            for p in field(d).anomalous_primes(5000) {
                let rest = 4 * p.get() - 1;
                assert_eq!(rest % field(d).magnitude(), 0);
                assert!(is_square_u128((rest / field(d).magnitude()) as u128).is_some());
            }
        }
    }

    #[test]
    fn anomalous_residue_classes() {
        assert_eq!(anomalous_residues_d3(np(7)).unwrap(), vec![5]);
        assert_eq!(anomalous_residues_d3(np(19)).unwrap().len(), 3);
        assert_eq!(anomalous_residues_d3(np(37)).unwrap().len(), 6);
        assert!(matches!(
            anomalous_residues_d3(np(13)),
            Err(QuadError::NotAnomalousPrime(13))
        ));
    }

    #[test]
    fn cm_fields_from_j() {
        let cases = [
            (Curve::from_i64(0, -2).unwrap(), -3),
            (Curve::from_i64(-4, 0).unwrap(), -4),
            (Curve::from_i64(-1056, 13552).unwrap(), -11),
            (Curve::from_i64(-152, 722).unwrap(), -19),
        ];
        for (curve, d) in cases {
            assert_eq!(ImagQuadField::from_j_invariant(&curve), Some(field(d)));
        }
        assert_eq!(ImagQuadField::from_j_invariant(&Curve::from_i64(1, 1).unwrap()), None);
    }
}
