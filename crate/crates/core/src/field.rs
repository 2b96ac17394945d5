//! Exact scalar fields: the rationals and prime fields.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an element of {field}: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub field: String,
    pub reason: String,
}

/// An exact field. All linear algebra in the crate is generic over this.
pub trait Field: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_i64(v: i64) -> Self;
    fn parse(s: &str) -> Result<Self, ParseScalarError>;
    /// Canonical exact string form ("3/7", "-2", "0").
    fn to_exact_string(&self) -> String;
    /// Short field label used in reports ("Q", "F2").
    fn label() -> String;
    fn characteristic() -> u64;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Rational numbers with an `i64` fast path and an arbitrary-precision fallback.
///
/// Values are kept normalized: reduced, positive denominator, and stored in the
/// small representation whenever both parts fit.
#[derive(Clone)]
pub enum Q {
    Small(i64, i64),
    Big(BigRational),
}

impl Q {
    fn small(n: i64, d: i64) -> Q {
        debug_assert!(d != 0);
        let (mut n, mut d) = (n as i128, d as i128);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = n.gcd(&d);
        let (n, d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        Self::from_i128(n, d)
    }

    fn from_i128(n: i128, d: i128) -> Q {
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) if n != i64::MIN => Q::Small(n, d),
            _ => Q::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(r: BigRational) -> Q {
        // BigRational arithmetic keeps values reduced with positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Q::Small(n, d),
            _ => Q::Big(r),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(r) => r.clone(),
        }
    }

    pub fn numer_denom(&self) -> (BigInt, BigInt) {
        let b = self.to_big();
        (b.numer().clone(), b.denom().clone())
    }

    pub fn new(n: i64, d: i64) -> Q {
        assert!(d != 0, "zero denominator");
        Q::small(n, d)
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => a == c && b == d,
            (Q::Big(a), Q::Big(b)) => a == b,
            _ => false,
        }
    }
}
impl Eq for Q {}

impl Hash for Q {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Q::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Q::Big(r) => {
                1u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_exact_string())
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_exact_string())
    }
}

impl Field for Q {
    fn zero() -> Self {
        Q::Small(0, 1)
    }
    fn one() -> Self {
        Q::Small(1, 1)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }
    fn add(&self, other: &Self) -> Self {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, other) {
            if b == d {
                if let Some(n) = a.checked_add(*c) {
                    return Q::small(n, *b);
                }
            }
            let n = (*a as i128) * (*d as i128) + (*c as i128) * (*b as i128);
            let den = (*b as i128) * (*d as i128);
            let g = n.gcd(&den);
            let g = if g == 0 { 1 } else { g };
            return Q::from_i128(n / g, den / g);
        }
        Q::from_big(self.to_big() + other.to_big())
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        if let (Q::Small(a, b), Q::Small(c, d)) = (self, other) {
            if *a == 0 || *c == 0 {
                return Q::zero();
            }
            let n = (*a as i128) * (*c as i128);
            let den = (*b as i128) * (*d as i128);
            let g = n.gcd(&den);
            return Q::from_i128(n / g, den / g);
        }
        Q::from_big(self.to_big() * other.to_big())
    }
    fn neg(&self) -> Self {
        match self {
            Q::Small(n, d) => Q::Small(-n, *d),
            Q::Big(r) => Q::from_big(-r.clone()),
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Q::Small(n, d) => Q::small(*d, *n),
            Q::Big(r) => Q::from_big(r.recip()),
        })
    }
    fn from_i64(v: i64) -> Self {
        if v == i64::MIN {
            Q::Big(BigRational::from_integer(BigInt::from(v)))
        } else {
            Q::Small(v, 1)
        }
    }
    fn parse(s: &str) -> Result<Self, ParseScalarError> {
        let err = |reason: &str| ParseScalarError {
            input: s.to_string(),
            field: "Q".into(),
            reason: reason.into(),
        };
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        Ok(Q::from_big(BigRational::new(n, d)))
    }
    fn to_exact_string(&self) -> String {
        match self {
            Q::Small(n, 1) => n.to_string(),
            Q::Small(n, d) => format!("{n}/{d}"),
            Q::Big(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
    fn label() -> String {
        "Q".into()
    }
    fn characteristic() -> u64 {
        0
    }
}

impl Q {
    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(n, _) => *n < 0,
            Q::Big(r) => r.is_negative(),
        }
    }
}

/// The prime field with `P` elements. `P` must be prime.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> Fp<P> {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl<const P: u64> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

impl<const P: u64> Field for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1 % P)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, other: &Self) -> Self {
        Fp(((self.0 as u128 + other.0 as u128) % P as u128) as u64)
    }
    fn sub(&self, other: &Self) -> Self {
        Fp(((self.0 as u128 + P as u128 - other.0 as u128) % P as u128) as u64)
    }
    fn mul(&self, other: &Self) -> Self {
        Fp(((self.0 as u128 * other.0 as u128) % P as u128) as u64)
    }
    fn neg(&self) -> Self {
        if self.0 == 0 {
            *self
        } else {
            Fp(P - self.0)
        }
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(Fp(pow_mod(self.0, P - 2, P)))
        }
    }
    fn from_i64(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }
    fn parse(s: &str) -> Result<Self, ParseScalarError> {
        let err = |reason: &str| ParseScalarError {
            input: s.to_string(),
            field: Self::label(),
            reason: reason.into(),
        };
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.parse().map_err(|_| err("bad denominator"))?;
        let p = BigInt::from(P);
        let n = n.mod_floor(&p).to_u64().unwrap_or(0);
        let d = d.mod_floor(&p).to_u64().unwrap_or(0);
        let d = Fp::<P>(d).inv().ok_or_else(|| err("denominator vanishes mod p"))?;
        Ok(Fp::<P>(n).mul(&d))
    }
    fn to_exact_string(&self) -> String {
        self.0.to_string()
    }
    fn label() -> String {
        format!("F{P}")
    }
    fn characteristic() -> u64 {
        P
    }
}

pub type F2 = Fp<2>;
pub type F3 = Fp<3>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_normalizes() {
        let a = Q::new(2, 4);
        assert_eq!(a, Q::new(1, 2));
        assert_eq!(a.add(&Q::new(1, 2)), Q::one());
        assert_eq!(Q::new(3, -6), Q::new(-1, 2));
        assert_eq!(Q::new(1, 3).mul(&Q::from_i64(3)), Q::one());
        assert_eq!(Q::parse("-6/8").unwrap().to_exact_string(), "-3/4");
        assert!(Q::parse("1/0").is_err());
    }

    #[test]
    fn rational_overflow_promotes_to_big() {
        let big = Q::from_i64(i64::MAX);
        let sq = big.mul(&big);
        assert!(matches!(sq, Q::Big(_)));
        let back = sq.mul(&big.inv().unwrap());
        assert_eq!(back, big);
        let s = sq.to_exact_string();
        assert_eq!(Q::parse(&s).unwrap(), sq);
    }

    #[test]
    fn prime_field_inverse() {
        for v in 1..7 {
            let x = Fp::<7>::from_i64(v);
            assert!(x.mul(&x.inv().unwrap()).is_one());
        }
        assert_eq!(F2::from_i64(-1), F2::one());
        assert_eq!(Fp::<5>::parse("1/2").unwrap(), Fp::<5>::from_i64(3));
    }
}
