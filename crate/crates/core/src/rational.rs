//! Exact rational numbers with a machine-integer fast path.
//!
//! Values live in a pair of `i128`s until an operation would overflow, at
//! which point they are promoted to a heap-allocated `BigRational`. The small
//! representation is not kept in lowest terms: products skip the gcd, sums
//! over unequal denominators use the lcm. Comparisons go through
//! cross-multiplication, so an unreduced fraction compares equal to its
//! reduced form.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Denominators above this are reduced eagerly to keep later
/// cross-multiplications inside `i128`.
const REDUCE_ABOVE: i128 = 1 << 62;

#[derive(Clone)]
enum Repr {
    /// `den > 0`; not necessarily reduced.
    Small(i128, i128),
    Big(BigRational),
}

/// An exact rational number.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a rational (expected `p/q`, an integer or a decimal)")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let (num, den) = if den < 0 {
            match (num.checked_neg(), den.checked_neg()) {
                (Some(n), Some(d)) => (n, d),
                _ => return Self::from_big(BigRational::new(num.into(), den.into())),
            }
        } else {
            (num, den)
        };
        Self::small_reduced(num, den)
    }

    pub fn from_integer(v: i64) -> Self {
        Rational(Repr::Small(v as i128, 1))
    }

    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    fn small_reduced(num: i128, den: i128) -> Self {
        let g = num.gcd(&den);
        if g > 1 {
            Rational(Repr::Small(num / g, den / g))
        } else {
            Rational(Repr::Small(num, den))
        }
    }

    fn from_big(b: BigRational) -> Self {
        // BigRational is always reduced with a positive denominator.
        match (b.numer().to_i128(), b.denom().to_i128()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(b)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => b.clone(),
        }
    }

    /// Numerator and denominator in lowest terms.
    pub fn to_parts(&self) -> (BigInt, BigInt) {
        let b = self.to_big();
        (b.numer().clone(), b.denom().clone())
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n == 0,
            Repr::Big(b) => b.is_zero(),
        }
    }

    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small(n, _) => n.signum() as i32,
            Repr::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        Rational::one() / self.clone()
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => {
                // Exact when both fit the 53-bit mantissa; otherwise one rounding per part.
                (*n as f64) / (*d as f64)
            }
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// The exact binary value of a finite float.
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Self::from_big)
    }

    fn reduce_if_large(num: i128, den: i128) -> Self {
        if den > REDUCE_ABOVE || num.unsigned_abs() > REDUCE_ABOVE as u128 {
            Self::small_reduced(num, den)
        } else {
            Rational(Repr::Small(num, den))
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

fn small_add(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    if b == d {
        return Some((a.checked_add(c)?, b));
    }
    let g = b.gcd(&d);
    let (b1, d1) = (b / g, d / g);
    let num = a.checked_mul(d1)?.checked_add(c.checked_mul(b1)?)?;
    let den = b1.checked_mul(d)?;
    Some((num, den))
}

fn small_mul(a: i128, b: i128, c: i128, d: i128) -> Option<(i128, i128)> {
    Some((a.checked_mul(c)?, b.checked_mul(d)?))
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        &self + &rhs
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some((n, m)) = small_add(*a, *b, *c, *d) {
                return Rational::reduce_if_large(n, m);
            }
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        &self - &rhs
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some(nc) = c.checked_neg() {
                if let Some((n, m)) = small_add(*a, *b, nc, *d) {
                    return Rational::reduce_if_large(n, m);
                }
            }
        }
        Rational::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            if let Some((n, m)) = small_mul(*a, *b, *c, *d) {
                return Rational::reduce_if_large(n, m);
            }
            // Retry after reducing the operands crosswise.
            let g1 = a.gcd(d).max(1);
            let g2 = c.gcd(b).max(1);
            if let Some((n, m)) = small_mul(a / g1, b / g2, c / g2, d / g1) {
                return Rational::reduce_if_large(n, m);
            }
        }
        Rational::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
            let (c, d) = if *c < 0 {
                match (c.checked_neg(), d.checked_neg()) {
                    (Some(c), Some(d)) => (c, d),
                    _ => return Rational::from_big(self.to_big() / rhs.to_big()),
                }
            } else {
                (*c, *d)
            };
            // c > 0 now, so b c > 0 and the sign rides on a d.
            if let Some((n, m)) = small_mul(*a, *b, d, c) {
                return Rational::reduce_if_large(n, m);
            }
        }
        Rational::from_big(self.to_big() / rhs.to_big())
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(n) => Rational(Repr::Small(n, d)),
                None => Rational::from_big(-BigRational::new(n.into(), d.into())),
            },
            Repr::Big(b) => Rational::from_big(-b),
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if b == d {
                return a.cmp(c);
            }
            if let (Some(l), Some(r)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_integer(v)
    }
}

impl From<BigRational> for Rational {
    fn from(b: BigRational) -> Self {
        Rational::from_big(b)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.to_big();
        if b.denom().is_one() {
            write!(f, "{}", b.numer())
        } else {
            write!(f, "{}/{}", b.numer(), b.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Rational::from_big(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            let neg = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if frac.is_empty() && int_digits.is_empty() {
                return Err(err());
            }
            if !int_digits.chars().all(|ch| ch.is_ascii_digit())
                || !frac.chars().all(|ch| ch.is_ascii_digit())
            {
                return Err(err());
            }
            let digits = format!("{int_digits}{frac}");
            let mut num: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().map_err(|_| err())?
            };
            if neg {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Rational::from_big(BigRational::new(num, den)));
        }
        let p: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rational::from_big(BigRational::from_integer(p)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::new(v as i128, 1))
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Shorthand for `Rational::new(p, q)`.
pub fn ratio(p: i128, q: i128) -> Rational {
    Rational::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!("2/5".parse::<Rational>().unwrap(), ratio(2, 5));
        assert_eq!("0.4".parse::<Rational>().unwrap(), ratio(2, 5));
        assert_eq!("-3".parse::<Rational>().unwrap(), ratio(-3, 1));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), ratio(-1, 4));
        assert_eq!(" 6/-4 ".parse::<Rational>().unwrap(), ratio(-3, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn display_is_reduced() {
        assert_eq!(ratio(4, 6).to_string(), "2/3");
        assert_eq!((ratio(1, 3) * ratio(3, 1)).to_string(), "1");
        assert_eq!(ratio(-1, 2).to_string(), "-1/2");
    }

    #[test]
    fn arithmetic_matches_bigrational() {
        let xs = [ratio(1, 3), ratio(-7, 9), ratio(2, 5), ratio(13, 1), ratio(1, 81)];
        for a in &xs {
            for b in &xs {
                let (ba, bb) = (a.to_big(), b.to_big());
                assert_eq!((a + b).to_big(), &ba + &bb);
                assert_eq!((a - b).to_big(), &ba - &bb);
                assert_eq!((a * b).to_big(), &ba * &bb);
                assert_eq!((a / b).to_big(), &ba / &bb);
                assert_eq!(a.cmp(b), ba.cmp(&bb));
            }
        }
    }

    #[test]
    fn overflow_promotes_to_big() {
        let big = ratio(i128::MAX, 3);
        let sum = big.clone() + big.clone();
        let expected = BigRational::new(BigInt::from(i128::MAX) * 2, BigInt::from(3));
        assert_eq!(sum.to_big(), expected);
        let prod = big.clone() * big.clone();
        assert!(prod > big);
        assert_eq!((prod / big.clone()), big);
        let tiny = ratio(1, i128::MAX) * ratio(1, i128::MAX);
        assert!(tiny > Rational::zero());
        assert!(tiny < ratio(1, i128::MAX));
    }

    #[test]
    fn unreduced_compares_equal() {
        let a = ratio(1, 3) * ratio(3, 9); // 3/27 unreduced internally
        assert_eq!(a, ratio(1, 9));
        assert_eq!(a.to_string(), "1/9");
    }

    #[test]
    fn serde_as_string() {
        let v: Rational = serde_json::from_str("\"2/5\"").unwrap();
        assert_eq!(v, ratio(2, 5));
        let v: Rational = serde_json::from_str("3").unwrap();
        assert_eq!(v, ratio(3, 1));
        assert_eq!(serde_json::to_string(&ratio(4, 10)).unwrap(), "\"2/5\"");
    }
}
