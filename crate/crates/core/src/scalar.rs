//! Scalar rings: `F_p`, `Z/p^N` and exact rationals.
//!
//! Modular scalars are stored as canonical representatives in `[0, p^N)`.
//! Rationals are arbitrary precision and never rounded.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{config, parse_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarKind {
    PrimeField,
    IntegersMod,
    Rational,
}

/// A scalar ring together with its prime.
///
/// `prec` is the p-adic precision `N` for [`ScalarKind::IntegersMod`] and is
/// `1` for the other kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarRing {
    pub kind: ScalarKind,
    pub p: u64,
    pub prec: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Mod(u64),
    Rat(BigRational),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ScalarRing {
    pub fn prime_field(p: u64) -> Result<Self> {
        Self::new(ScalarKind::PrimeField, p, 1)
    }

    pub fn integers_mod(p: u64, prec: u32) -> Result<Self> {
        Self::new(ScalarKind::IntegersMod, p, prec)
    }

    pub fn rationals(p: u64) -> Result<Self> {
        Self::new(ScalarKind::Rational, p, 1)
    }

    pub fn new(kind: ScalarKind, p: u64, prec: u32) -> Result<Self> {
        if !is_prime(p) {
            return config(format!("{p} is not prime"));
        }
        if prec == 0 {
            return config("p-adic precision must be at least 1");
        }
        let prec = if kind == ScalarKind::IntegersMod { prec } else { 1 };
        if kind == ScalarKind::IntegersMod && p.checked_pow(prec).map_or(true, |m| m > u32::MAX as u64) {
            return config(format!("{p}^{prec} does not fit the modular representation"));
        }
        Ok(ScalarRing { kind, p, prec })
    }

    /// `Some(p)` or `Some(p^N)` for modular rings, `None` for rationals.
    pub fn modulus(&self) -> Option<u64> {
        match self.kind {
            ScalarKind::PrimeField => Some(self.p),
            ScalarKind::IntegersMod => Some(self.p.pow(self.prec)),
            ScalarKind::Rational => None,
        }
    }

    pub fn is_field_mod_p(&self) -> bool {
        self.modulus() == Some(self.p)
    }

    /// The characteristic-`p` field with the same prime.
    pub fn residue_field(&self) -> ScalarRing {
        ScalarRing { kind: ScalarKind::PrimeField, p: self.p, prec: 1 }
    }

    pub fn zero(&self) -> Scalar {
        match self.kind {
            ScalarKind::Rational => Scalar::Rat(BigRational::zero()),
            _ => Scalar::Mod(0),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, a: i64) -> Scalar {
        match self.modulus() {
            Some(m) => Scalar::Mod(a.rem_euclid(m as i64) as u64),
            None => Scalar::Rat(BigRational::from_integer(BigInt::from(a))),
        }
    }

    pub fn from_rational(&self, q: &BigRational) -> Result<Scalar> {
        match self.modulus() {
            None => Ok(Scalar::Rat(q.clone())),
            Some(m) => {
                let m_big = BigInt::from(m);
                let den = q.denom().mod_floor(&m_big);
                let Some(inv) = inv_mod(den.to_u64().unwrap_or(0), m, self.p) else {
                    return Err(Error::Internal(format!("coefficient {q} is not {}-integral", self.p)));
                };
                let num = q.numer().mod_floor(&m_big).to_u64().unwrap_or(0);
                Ok(Scalar::Mod(mul_mod(num, inv, m)))
            }
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Mod(x) => *x == 0,
            Scalar::Rat(q) => q.is_zero(),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Mod(x), Scalar::Mod(y)) => {
                let m = self.modulus().unwrap_or(u64::MAX);
                Scalar::Mod((x + y) % m)
            }
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            _ => panic!("scalar kinds mixed in one ring"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Mod(x) => {
                let m = self.modulus().unwrap_or(u64::MAX);
                Scalar::Mod((m - x % m) % m)
            }
            Scalar::Rat(q) => Scalar::Rat(-q),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(mul_mod(*x, *y, self.modulus().unwrap_or(u64::MAX))),
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            _ => panic!("scalar kinds mixed in one ring"),
        }
    }

    pub fn pow(&self, a: &Scalar, e: u64) -> Scalar {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    /// Units: nonzero rationals, or residues prime to `p`.
    pub fn is_unit(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Mod(x) => x % self.p != 0,
            Scalar::Rat(q) => !q.is_zero(),
        }
    }

    /// Nilpotent scalars: multiples of `p` in a modular ring, zero otherwise.
    pub fn is_nilpotent(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Mod(x) => x % self.p == 0,
            Scalar::Rat(q) => q.is_zero(),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match a {
            Scalar::Mod(x) => inv_mod(*x, self.modulus()?, self.p).map(Scalar::Mod),
            Scalar::Rat(q) if !q.is_zero() => Some(Scalar::Rat(q.recip())),
            Scalar::Rat(_) => None,
        }
    }

    /// p-adic valuation of a modular scalar; `prec` for zero.
    pub fn valuation(&self, a: &Scalar) -> u32 {
        match a {
            Scalar::Mod(x) => valuation(*x, self.p, self.prec),
            Scalar::Rat(q) if q.is_zero() => u32::MAX,
            Scalar::Rat(q) => {
                let mut n = q.numer().abs();
                let mut v = 0;
                let p = BigInt::from(self.p);
                while (&n % &p).is_zero() {
                    n /= &p;
                    v += 1;
                }
                v
            }
        }
    }

    /// Map a scalar of `from` into `self`.
    ///
    /// Supported: rationals to anything (p-integrality checked), and
    /// `Z/p^N` to `Z/p^M` with `M <= N`.
    pub fn convert_from(&self, from: &ScalarRing, a: &Scalar) -> Result<Scalar> {
        if from.p != self.p {
            return config("cannot change the prime of a scalar ring");
        }
        match (a, self.modulus(), from.modulus()) {
            (Scalar::Rat(q), _, _) => self.from_rational(q),
            (Scalar::Mod(x), Some(m), Some(fm)) => {
                if fm % m != 0 {
                    return config(format!("cannot lift Z/{fm} scalars to Z/{m}"));
                }
                Ok(Scalar::Mod(x % m))
            }
            (Scalar::Mod(_), None, _) => config("cannot lift modular scalars to rationals"),
            (Scalar::Mod(_), Some(_), None) => config("scalar kind does not match its ring"),
        }
    }

    pub fn render(&self, a: &Scalar) -> String {
        match a {
            Scalar::Mod(x) => x.to_string(),
            Scalar::Rat(q) if q.is_integer() => q.numer().to_string(),
            Scalar::Rat(q) => format!("{}/{}", q.numer(), q.denom()),
        }
    }

    /// Parse a scalar rendering. Modular rings accept only canonical
    /// representatives so that rendering and parsing are mutually inverse.
    pub fn parse(&self, s: &str) -> Result<Scalar> {
        match self.modulus() {
            Some(m) => {
                if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                    return parse_err(format!("bad modular scalar {s:?}"));
                }
                if s.len() > 1 && s.starts_with('0') {
                    return parse_err(format!("non-canonical scalar {s:?}"));
                }
                match s.parse::<u64>() {
                    Ok(x) if x < m => Ok(Scalar::Mod(x)),
                    _ => parse_err(format!("scalar {s:?} out of range for Z/{m}")),
                }
            }
            None => {
                let (num, den) = match s.split_once('/') {
                    Some((a, b)) => (a, Some(b)),
                    None => (s, None),
                };
                let num = parse_bigint(num)?;
                let q = match den {
                    None => BigRational::from_integer(num),
                    Some(d) => {
                        let d = parse_bigint(d)?;
                        if !d.is_positive() {
                            return parse_err("denominator must be positive");
                        }
                        let q = BigRational::new(num.clone(), d.clone());
                        if q.denom() != &d || q.is_integer() {
                            return parse_err(format!("non-canonical rational {s:?}"));
                        }
                        q
                    }
                };
                Ok(Scalar::Rat(q))
            }
        }
    }
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return parse_err(format!("bad integer {s:?}"));
    }
    if (digits.len() > 1 && digits.starts_with('0')) || s == "-0" {
        return parse_err(format!("non-canonical integer {s:?}"));
    }
    s.parse::<BigInt>().map_err(|e| Error::Parse(e.to_string()))
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn valuation(x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut x = x;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v.min(cap)
}

/// Inverse of `a` modulo `m = p^k`, if `a` is prime to `p`.
pub(crate) fn inv_mod(a: u64, m: u64, p: u64) -> Option<u64> {
    if a % p == 0 {
        return None;
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod(x) => write!(f, "{x}"),
            Scalar::Rat(q) => write!(f, "{q}"),
        }
    }
}

impl Scalar {
    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Mod(x) => *x == 1,
            Scalar::Rat(q) => q.is_one(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_and_zero_precision() {
        assert!(ScalarRing::prime_field(4).is_err());
        assert!(ScalarRing::integers_mod(3, 0).is_err());
        assert!(ScalarRing::integers_mod(3, 6).is_ok());
    }

    #[test]
    fn modular_inverse_and_units() {
        let r = ScalarRing::integers_mod(2, 3).unwrap();
        assert_eq!(r.inv(&Scalar::Mod(3)), Some(Scalar::Mod(3)));
        assert_eq!(r.inv(&Scalar::Mod(2)), None);
        assert!(r.is_nilpotent(&Scalar::Mod(6)));
        assert_eq!(r.valuation(&Scalar::Mod(4)), 2);
        assert_eq!(r.valuation(&Scalar::Mod(0)), 3);
    }

    #[test]
    fn rational_reduction_checks_integrality() {
        let r = ScalarRing::integers_mod(3, 2).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        // 1/2 = 5 mod 9
        assert_eq!(r.from_rational(&half).unwrap(), Scalar::Mod(5));
        let third = BigRational::new(1.into(), 3.into());
        assert!(matches!(r.from_rational(&third), Err(Error::Internal(_))));
        let neg = BigRational::from_integer((-2).into());
        assert_eq!(r.from_rational(&neg).unwrap(), Scalar::Mod(7));
    }

    #[test]
    fn render_parse_round_trip() {
        let q = ScalarRing::rationals(2).unwrap();
        for s in ["0", "-3", "1/2", "-7/4"] {
            assert_eq!(q.render(&q.parse(s).unwrap()), s);
        }
        assert!(q.parse("2/4").is_err());
        assert!(q.parse("4/1").is_err());
        let z = ScalarRing::integers_mod(2, 2).unwrap();
        assert!(z.parse("4").is_err());
        assert!(z.parse("03").is_err());
        assert_eq!(z.parse("3").unwrap(), Scalar::Mod(3));
    }
}
