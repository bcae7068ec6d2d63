//! The lattice Γ = Ze1 + Ze2, unimodular bases, partial orders and cones.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("not a Z-basis: det({b1}; {b2}) = {det}, expected +1 or -1")]
    NotZBasis { b1: LatticeVector, b2: LatticeVector, det: i64 },
}

/// A point of Γ in standard coordinates. Serializes as `[m1, m2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeVector {
    pub m1: i64,
    pub m2: i64,
}

impl From<[i64; 2]> for LatticeVector {
    fn from(a: [i64; 2]) -> Self {
        LatticeVector { m1: a[0], m2: a[1] }
    }
}

impl From<LatticeVector> for [i64; 2] {
    fn from(v: LatticeVector) -> Self {
        [v.m1, v.m2]
    }
}

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector { m1: 0, m2: 0 };

    pub const fn new(m1: i64, m2: i64) -> Self {
        LatticeVector { m1, m2 }
    }

    pub fn is_zero(&self) -> bool {
        self.m1 == 0 && self.m2 == 0
    }
}

pub fn lv(m1: i64, m2: i64) -> LatticeVector {
    LatticeVector::new(m1, m2)
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m1, self.m2)
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: LatticeVector) -> LatticeVector {
        lv(self.m1 + o.m1, self.m2 + o.m2)
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: LatticeVector) -> LatticeVector {
        lv(self.m1 - o.m1, self.m2 - o.m2)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        lv(-self.m1, -self.m2)
    }
}

impl Mul<LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, v: LatticeVector) -> LatticeVector {
        lv(self * v.m1, self * v.m2)
    }
}

/// Determinant with `a` as first row: a1*b2 - a2*b1.
pub fn det2(a: LatticeVector, b: LatticeVector) -> i64 {
    a.m1 * b.m2 - a.m2 * b.m1
}

pub fn is_zbasis(b1: LatticeVector, b2: LatticeVector) -> bool {
    det2(b1, b2).abs() == 1
}

/// Integer inverse of the row matrix (b1; b2), laid out as [[p1, q1], [p2, q2]].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InverseBasisMatrix {
    pub p1: i64,
    pub q1: i64,
    pub p2: i64,
    pub q2: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConeMode {
    /// Z+ b1 + Z+ b2 (Z+ includes zero).
    Nonneg,
    /// N b1 + N b2.
    StrictPos,
    /// Z b1 + N b2.
    MixedZN,
}

/// A unimodular basis {b1, b2} of Γ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BasisRaw", into = "BasisRaw")]
pub struct BasisPair {
    b1: LatticeVector,
    b2: LatticeVector,
}

#[derive(Serialize, Deserialize)]
struct BasisRaw {
    b1: LatticeVector,
    b2: LatticeVector,
}

impl TryFrom<BasisRaw> for BasisPair {
    type Error = LatticeError;
    fn try_from(r: BasisRaw) -> Result<Self, LatticeError> {
        BasisPair::new(r.b1, r.b2)
    }
}

impl From<BasisPair> for BasisRaw {
    fn from(b: BasisPair) -> Self {
        BasisRaw { b1: b.b1, b2: b.b2 }
    }
}

impl Default for BasisPair {
    fn default() -> Self {
        BasisPair::standard()
    }
}

impl fmt::Display for BasisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.b1, self.b2)
    }
}

impl BasisPair {
    pub fn new(b1: LatticeVector, b2: LatticeVector) -> Result<Self, LatticeError> {
        if is_zbasis(b1, b2) {
            Ok(BasisPair { b1, b2 })
        } else {
            Err(LatticeError::NotZBasis { b1, b2, det: det2(b1, b2) })
        }
    }

    pub fn standard() -> Self {
        BasisPair { b1: lv(1, 0), b2: lv(0, 1) }
    }

    pub fn b1(&self) -> LatticeVector {
        self.b1
    }

    pub fn b2(&self) -> LatticeVector {
        self.b2
    }

    /// det(b1; b2), always ±1.
    pub fn det(&self) -> i64 {
        det2(self.b1, self.b2)
    }

    pub fn inverse(&self) -> InverseBasisMatrix {
        let d = self.det();
        InverseBasisMatrix {
            p1: d * self.b2.m2,
            q1: -d * self.b1.m2,
            p2: -d * self.b2.m1,
            q2: d * self.b1.m1,
        }
    }

    /// (x1, x2) with v = x1 b1 + x2 b2.
    pub fn coords(&self, v: LatticeVector) -> (i64, i64) {
        let inv = self.inverse();
        (v.m1 * inv.p1 + v.m2 * inv.p2, v.m1 * inv.q1 + v.m2 * inv.q2)
    }

    pub fn from_coords(&self, x1: i64, x2: i64) -> LatticeVector {
        x1 * self.b1 + x2 * self.b2
    }

    /// The b2-coordinate, i.e. the level of v in the triangular decomposition.
    pub fn level(&self, v: LatticeVector) -> i64 {
        self.coords(v).1
    }

    pub fn cone_contains(&self, v: LatticeVector, mode: ConeMode) -> bool {
        let (x1, x2) = self.coords(v);
        match mode {
            ConeMode::Nonneg => x1 >= 0 && x2 >= 0,
            ConeMode::StrictPos => x1 > 0 && x2 > 0,
            ConeMode::MixedZN => x2 > 0,
        }
    }
}

pub fn coords(v: LatticeVector, b: &BasisPair) -> (i64, i64) {
    b.coords(v)
}

pub fn cone_contains(b: &BasisPair, v: LatticeVector, mode: ConeMode) -> bool {
    b.cone_contains(v, mode)
}

pub fn inverse_basis(b: &BasisPair) -> InverseBasisMatrix {
    b.inverse()
}

/// x > y iff x1 > y1 and x2 > y2.
pub fn strictly_greater(x: (i64, i64), y: (i64, i64)) -> bool {
    x.0 > y.0 && x.1 > y.1
}

/// x >= y coordinatewise.
pub fn dominates(x: (i64, i64), y: (i64, i64)) -> bool {
    x.0 >= y.0 && x.1 >= y.1
}

/// Coordinatewise comparison; `None` when incomparable.
pub fn partial_cmp(x: (i64, i64), y: (i64, i64)) -> Option<Ordering> {
    if x == y {
        Some(Ordering::Equal)
    } else if dominates(x, y) {
        Some(Ordering::Greater)
    } else if dominates(y, x) {
        Some(Ordering::Less)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_examples() {
        assert_eq!(det2(lv(1, 0), lv(0, 1)), 1);
        assert_eq!(det2(lv(0, 1), lv(1, 0)), -1);
        assert_eq!(det2(lv(2, 3), lv(2, 3)), 0);
    }

    #[test]
    fn zbasis_examples() {
        assert!(is_zbasis(lv(1, 0), lv(0, 1)));
        assert!(is_zbasis(lv(2, 1), lv(1, 1)));
        assert!(!is_zbasis(lv(2, 0), lv(0, 2)));
        assert!(BasisPair::new(lv(2, 0), lv(0, 2)).is_err());
    }

    #[test]
    fn coords_examples() {
        let s = BasisPair::standard();
        assert_eq!(s.coords(lv(1, 0)), (1, 0));
        let b = BasisPair::new(lv(2, 1), lv(1, 1)).unwrap();
        assert_eq!(b.coords(lv(3, 2)), (1, 1));
        assert_eq!(b.coords(lv(0, 0)), (0, 0));
    }

    #[test]
    fn cone_examples() {
        let s = BasisPair::standard();
        assert!(s.cone_contains(lv(2, 3), ConeMode::Nonneg));
        assert!(s.cone_contains(lv(-1, 3), ConeMode::MixedZN));
        assert!(!s.cone_contains(lv(0, 0), ConeMode::StrictPos));
    }

    #[test]
    fn inverse_examples() {
        let s = BasisPair::standard().inverse();
        assert_eq!(s, InverseBasisMatrix { p1: 1, q1: 0, p2: 0, q2: 1 });
        let b = BasisPair::new(lv(2, 1), lv(1, 1)).unwrap().inverse();
        assert_eq!(b, InverseBasisMatrix { p1: 1, q1: -1, p2: -1, q2: 2 });
        let p = BasisPair::new(lv(0, 1), lv(1, 0)).unwrap().inverse();
        assert_eq!(p, InverseBasisMatrix { p1: 0, q1: 1, p2: 1, q2: 0 });
    }

    #[test]
    fn serde_shape() {
        let b = BasisPair::standard();
        let j = serde_json::to_string(&b).unwrap();
        assert_eq!(j, r#"{"b1":[1,0],"b2":[0,1]}"#);
        let bad: Result<BasisPair, _> = serde_json::from_str(r#"{"b1":[2,0],"b2":[0,2]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(partial_cmp((1, 2), (0, 2)), Some(Ordering::Greater));
        assert_eq!(partial_cmp((1, 0), (0, 1)), None);
        assert!(strictly_greater((2, 2), (1, 1)));
        assert!(!strictly_greater((2, 1), (1, 1)));
    }
}
