//! Arbitrary-precision integers with an inline fast path.
//!
//! Values that fit in an `i64` are stored inline; anything larger spills
//! into a [`BigInt`]. The representation is kept normalized, so two equal
//! integers always share a representation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Small(i64),
    Big(BigInt),
}

/// A signed integer of unbounded magnitude.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Integer(Repr);

impl Integer {
    pub const ZERO: Integer = Integer(Repr::Small(0));
    pub const ONE: Integer = Integer(Repr::Small(1));

    fn from_big(b: BigInt) -> Integer {
        match b.to_i64() {
            Some(v) => Integer(Repr::Small(v)),
            None => Integer(Repr::Big(b)),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match &self.0 {
            Repr::Small(v) => BigInt::from(*v),
            Repr::Big(b) => b.clone(),
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(v) => Some(*v),
            Repr::Big(_) => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok())
    }

    pub fn to_usize(&self) -> Option<usize> {
        self.to_i64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(v) => *v < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn abs(&self) -> Integer {
        match &self.0 {
            Repr::Small(v) => match v.checked_abs() {
                Some(a) => Integer(Repr::Small(a)),
                None => Integer::from_big(BigInt::from(*v).abs()),
            },
            Repr::Big(b) => Integer::from_big(b.abs()),
        }
    }

    pub fn neg(&self) -> Integer {
        match &self.0 {
            Repr::Small(v) => match v.checked_neg() {
                Some(n) => Integer(Repr::Small(n)),
                None => Integer::from_big(-BigInt::from(*v)),
            },
            Repr::Big(b) => Integer::from_big(-b.clone()),
        }
    }

    pub fn add(&self, other: &Integer) -> Integer {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = a.checked_add(*b) {
                return Integer(Repr::Small(r));
            }
        }
        Integer::from_big(self.to_bigint() + other.to_bigint())
    }

    pub fn sub(&self, other: &Integer) -> Integer {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = a.checked_sub(*b) {
                return Integer(Repr::Small(r));
            }
        }
        Integer::from_big(self.to_bigint() - other.to_bigint())
    }

    /// Subtraction saturating at zero, the natural-number convention.
    pub fn monus(&self, other: &Integer) -> Integer {
        if self <= other {
            Integer::ZERO
        } else {
            self.sub(other)
        }
    }

    pub fn mul(&self, other: &Integer) -> Integer {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = a.checked_mul(*b) {
                return Integer(Repr::Small(r));
            }
        }
        Integer::from_big(self.to_bigint() * other.to_bigint())
    }

    /// Euclidean division; `x / 0 = 0`.
    pub fn div_euclid(&self, other: &Integer) -> Integer {
        if other.is_zero() {
            return Integer::ZERO;
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = a.checked_div_euclid(*b) {
                return Integer(Repr::Small(r));
            }
        }
        let r = self.rem_euclid(other).to_bigint();
        Integer::from_big((self.to_bigint() - r) / other.to_bigint())
    }

    /// Euclidean remainder, always in `[0, |other|)`; `x % 0 = x`.
    pub fn rem_euclid(&self, other: &Integer) -> Integer {
        if other.is_zero() {
            return self.clone();
        }
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(r) = a.checked_rem_euclid(*b) {
                return Integer(Repr::Small(r));
            }
        }
        let m = other.to_bigint().abs();
        let r = ((self.to_bigint() % &m) + &m) % &m;
        Integer::from_big(r)
    }

    pub fn min(self, other: Integer) -> Integer {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Integer) -> Integer {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Ord for Integer {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_bigint().cmp(&other.to_bigint()),
        }
    }
}

impl PartialOrd for Integer {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Integer {
    fn from(v: i64) -> Self {
        Integer(Repr::Small(v))
    }
}

impl From<i32> for Integer {
    fn from(v: i32) -> Self {
        Integer(Repr::Small(v.into()))
    }
}

impl From<u32> for Integer {
    fn from(v: u32) -> Self {
        Integer(Repr::Small(v.into()))
    }
}

impl From<u64> for Integer {
    fn from(v: u64) -> Self {
        match i64::try_from(v) {
            Ok(s) => Integer(Repr::Small(s)),
            Err(_) => Integer(Repr::Big(BigInt::from(v))),
        }
    }
}

impl From<usize> for Integer {
    fn from(v: usize) -> Self {
        Integer::from(v as u64)
    }
}

impl From<BigInt> for Integer {
    fn from(b: BigInt) -> Self {
        Integer::from_big(b)
    }
}

impl fmt::Display for Integer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(v) => write!(f, "{v}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for Integer {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<i64>() {
            return Ok(Integer(Repr::Small(v)));
        }
        s.parse::<BigInt>().map(Integer::from_big)
    }
}

impl Zero for Integer {
    fn zero() -> Self {
        Integer::ZERO
    }
    fn is_zero(&self) -> bool {
        Integer::is_zero(self)
    }
}

impl std::ops::Add for Integer {
    type Output = Integer;
    fn add(self, rhs: Integer) -> Integer {
        Integer::add(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = int(i64::MAX).add(&int(1));
        assert!(big.to_i64().is_none());
        assert_eq!(big.sub(&int(1)), int(i64::MAX));
        assert_eq!(big.sub(&int(1)).to_i64(), Some(i64::MAX));
        assert!(int(i64::MIN).neg() > int(i64::MAX));
    }

    #[test]
    fn euclidean_division_and_zero_divisor() {
        assert_eq!(int(7).div_euclid(&int(2)), int(3));
        assert_eq!(int(-7).div_euclid(&int(2)), int(-4));
        assert_eq!(int(-7).rem_euclid(&int(2)), int(1));
        assert_eq!(int(7).div_euclid(&int(-2)), int(-3));
        assert_eq!(int(7).rem_euclid(&int(-2)), int(1));
        assert_eq!(int(5).div_euclid(&int(0)), int(0));
        assert_eq!(int(5).rem_euclid(&int(0)), int(5));
        let huge: Integer = "-100000000000000000000007".parse().unwrap();
        let q = huge.div_euclid(&int(10));
        let r = huge.rem_euclid(&int(10));
        assert_eq!(r, int(3));
        assert_eq!(q.mul(&int(10)).add(&r), huge);
    }

    #[test]
    fn monus_saturates() {
        assert_eq!(int(3).monus(&int(5)), int(0));
        assert_eq!(int(5).monus(&int(3)), int(2));
    }

    #[test]
    fn ordering_across_representations() {
        let big: Integer = "-99999999999999999999".parse().unwrap();
        assert!(big < int(i64::MIN));
        assert!(int(0) > big);
    }
}
