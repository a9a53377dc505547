//! Graded sparse polynomials in the generators `v_lo, ..., v_hi`.
//!
//! The generator `v_k` sits in cohomological degree `-2(p^k - 1)`. Over
//! `Z/p^N` the prime itself plays the role of `v_0`.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{config, internal, parse_err, Result};
use crate::scalar::{Scalar, ScalarRing};

/// Sparse exponent vector over the v-generators, sorted by index.
///
/// Ordered by total exponent, then by larger exponent on the lower index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VMonomial(SmallVec<[(u16, u16); 4]>);

impl Ord for VMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_exponent().cmp(&other.total_exponent()).then_with(|| {
            let (a, b) = (&self.0, &other.0);
            for k in 0..a.len().min(b.len()) {
                // a lower index present only on one side wins
                if a[k].0 != b[k].0 {
                    return a[k].0.cmp(&b[k].0);
                }
                if a[k].1 != b[k].1 {
                    return b[k].1.cmp(&a[k].1);
                }
            }
            b.len().cmp(&a.len())
        })
    }
}

impl PartialOrd for VMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl VMonomial {
    pub fn one() -> Self {
        VMonomial(SmallVec::new())
    }

    pub fn var(index: u32) -> Self {
        Self::from_pairs(&[(index, 1)])
    }

    /// Builds a monomial from `(index, exponent)` pairs in any order.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut out: SmallVec<[(u16, u16); 4]> = SmallVec::new();
        let mut sorted: Vec<(u32, u32)> = pairs.iter().copied().filter(|&(_, e)| e > 0).collect();
        sorted.sort_unstable();
        for (i, e) in sorted {
            match out.last_mut() {
                Some(last) if last.0 as u32 == i => last.1 += e as u16,
                _ => out.push((i as u16, e as u16)),
            }
        }
        VMonomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0.iter().map(|&(i, e)| (i as u32, e as u32))
    }

    pub fn exponent(&self, index: u32) -> u32 {
        self.0.iter().find(|&&(i, _)| i as u32 == index).map_or(0, |&(_, e)| e as u32)
    }

    pub fn max_index(&self) -> Option<u32> {
        self.0.last().map(|&(i, _)| i as u32)
    }

    pub fn min_index(&self) -> Option<u32> {
        self.0.first().map(|&(i, _)| i as u32)
    }

    pub fn total_exponent(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e as u32).sum()
    }

    pub fn mul(&self, other: &VMonomial) -> VMonomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VMonomial(out)
    }

    pub fn pow(&self, e: u32) -> VMonomial {
        VMonomial(self.0.iter().map(|&(i, x)| (i, x * e as u16)).collect())
    }

    /// Removes one factor of `v_index`; `None` if it does not divide.
    pub fn divide_by_var(&self, index: u32) -> Option<VMonomial> {
        let pos = self.0.iter().position(|&(i, _)| i as u32 == index)?;
        let mut out = self.0.clone();
        if out[pos].1 == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Some(VMonomial(out))
    }

    /// Cohomological degree `-2 sum_k e_k (p^k - 1)`.
    pub fn degree(&self, p: u64) -> i64 {
        -2 * self.0.iter().map(|&(i, e)| e as i64 * (p.pow(i as u32) as i64 - 1)).sum::<i64>()
    }

    fn render(&self) -> String {
        self.0.iter().map(|&(i, e)| if e == 1 { format!("v{i}") } else { format!("v{i}^{e}") }).collect::<Vec<_>>().join("*")
    }
}

/// Scalar ring plus the admissible generator range `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoeffSpec {
    pub ring: ScalarRing,
    pub lo: u32,
    pub hi: u32,
}

impl CoeffSpec {
    pub fn new(ring: ScalarRing, lo: u32, hi: u32) -> Result<Self> {
        if lo == 0 {
            return config("v_0 is the prime, not a polynomial generator");
        }
        if lo > hi + 1 {
            return config(format!("empty generator range [{lo}, {hi}] is malformed"));
        }
        Ok(CoeffSpec { ring, lo, hi })
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    /// Degree of the generator `v_k`.
    pub fn generator_degree(&self, k: u32) -> i64 {
        -2 * (self.ring.p.pow(k) as i64 - 1)
    }

    pub fn contains(&self, index: u32) -> bool {
        self.lo <= index && index <= self.hi
    }
}

/// A polynomial in `v_lo..v_hi` with scalars in a [`ScalarRing`].
///
/// Terms are kept sorted by monomial with no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VPolynomial {
    spec: CoeffSpec,
    terms: Vec<(VMonomial, Scalar)>,
}

/// The three arithmetic operations of `vp_arith`.
#[derive(Clone, Debug)]
pub enum VpOp<'a> {
    Add,
    Mul,
    ScalarMul(&'a Scalar),
}

impl VPolynomial {
    pub fn zero(spec: CoeffSpec) -> Self {
        VPolynomial { spec, terms: Vec::new() }
    }

    pub fn one(spec: CoeffSpec) -> Self {
        Self::constant(spec, spec.ring.one())
    }

    pub fn constant(spec: CoeffSpec, c: Scalar) -> Self {
        Self::from_terms(spec, vec![(VMonomial::one(), c)]).expect("constant is always in range")
    }

    pub fn from_i64(spec: CoeffSpec, c: i64) -> Self {
        Self::constant(spec, spec.ring.from_i64(c))
    }

    /// The generator `v_index`; `v_0` is read as the prime `p`.
    pub fn var(spec: CoeffSpec, index: u32) -> Result<Self> {
        if index == 0 {
            return Ok(Self::from_i64(spec, spec.ring.p as i64));
        }
        Self::from_terms(spec, vec![(VMonomial::var(index), spec.ring.one())])
    }

    /// Builds a polynomial from arbitrary terms; duplicates are combined.
    pub fn from_terms(spec: CoeffSpec, terms: Vec<(VMonomial, Scalar)>) -> Result<Self> {
        for (m, _) in &terms {
            if let Some(i) = m.pairs().map(|(i, _)| i).find(|&i| !spec.contains(i)) {
                return config(format!("generator v{i} outside the range [{}, {}]", spec.lo, spec.hi));
            }
        }
        Ok(Self::normalize(spec, terms))
    }

    pub(crate) fn normalize(spec: CoeffSpec, mut terms: Vec<(VMonomial, Scalar)>) -> Self {
        let ring = spec.ring;
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(VMonomial, Scalar)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 = ring.add(&last.1, &c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !ring.is_zero(c));
        VPolynomial { spec, terms: out }
    }

    pub fn spec(&self) -> CoeffSpec {
        self.spec
    }

    pub fn ring(&self) -> ScalarRing {
        self.spec.ring
    }

    pub fn terms(&self) -> &[(VMonomial, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial `1`.
    pub fn constant_term(&self) -> Scalar {
        match self.terms.first() {
            Some((m, c)) if m.is_one() => c.clone(),
            _ => self.spec.ring.zero(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// The common degree of all terms, `None` for zero or inhomogeneous values.
    pub fn degree(&self) -> Option<i64> {
        let p = self.spec.p();
        let mut it = self.terms.iter().map(|(m, _)| m.degree(p));
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    fn check(&self, other: &VPolynomial) -> Result<()> {
        if self.spec != other.spec {
            return config(format!("coefficient rings differ: {:?} vs {:?}", self.spec, other.spec));
        }
        Ok(())
    }

    pub fn vp_arith(&self, other: &VPolynomial, op: VpOp<'_>) -> Result<VPolynomial> {
        self.check(other)?;
        Ok(match op {
            VpOp::Add => self.plus(other),
            VpOp::Mul => self.times(other),
            VpOp::ScalarMul(c) => self.scale(c),
        })
    }

    pub fn add(&self, other: &VPolynomial) -> Result<VPolynomial> {
        self.vp_arith(other, VpOp::Add)
    }

    pub fn sub(&self, other: &VPolynomial) -> Result<VPolynomial> {
        self.check(other)?;
        Ok(self.minus(other))
    }

    pub fn mul(&self, other: &VPolynomial) -> Result<VPolynomial> {
        self.vp_arith(other, VpOp::Mul)
    }

    pub(crate) fn plus(&self, other: &VPolynomial) -> VPolynomial {
        debug_assert_eq!(self.spec, other.spec);
        let ring = self.spec.ring;
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = ring.add(&a[i].1, &b[j].1);
                    if !ring.is_zero(&c) {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        VPolynomial { spec: self.spec, terms: out }
    }

    pub(crate) fn add_assign_ref(&mut self, other: &VPolynomial) {
        if other.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = other.clone();
            return;
        }
        *self = self.plus(other);
    }

    pub fn neg(&self) -> VPolynomial {
        let ring = self.spec.ring;
        VPolynomial { spec: self.spec, terms: self.terms.iter().map(|(m, c)| (m.clone(), ring.neg(c))).collect() }
    }

    pub(crate) fn minus(&self, other: &VPolynomial) -> VPolynomial {
        self.plus(&other.neg())
    }

    pub(crate) fn times(&self, other: &VPolynomial) -> VPolynomial {
        debug_assert_eq!(self.spec, other.spec);
        if self.is_zero() || other.is_zero() {
            return VPolynomial::zero(self.spec);
        }
        let ring = self.spec.ring;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.mul(mb), ring.mul(ca, cb)));
            }
        }
        let out = Self::normalize(self.spec, terms);
        #[cfg(debug_assertions)]
        if let (Some(da), Some(db)) = (self.degree(), other.degree()) {
            debug_assert!(out.is_zero() || out.degree() == Some(da + db));
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> VPolynomial {
        let ring = self.spec.ring;
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), ring.mul(x, c))).filter(|(_, x)| !ring.is_zero(x)).collect();
        VPolynomial { spec: self.spec, terms }
    }

    pub fn pow(&self, e: u64) -> VPolynomial {
        let p = self.spec.p();
        if e > 0 && e % p == 0 && self.spec.ring.is_field_mod_p() {
            return self.pow(e / p).frobenius();
        }
        let mut result = VPolynomial::one(self.spec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.times(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.times(&base);
            }
        }
        result
    }

    /// `a -> a^p`, valid only over `F_p` where it is additive.
    fn frobenius(&self) -> VPolynomial {
        debug_assert!(self.spec.ring.is_field_mod_p());
        let p = self.spec.p() as u32;
        VPolynomial { spec: self.spec, terms: self.terms.iter().map(|(m, c)| (m.pow(p), c.clone())).collect() }
    }

    /// Reduction modulo `I_j = (v_0, ..., v_{j-1})`.
    ///
    /// Terms containing `v_i` with `i < j` are deleted. Over `Z/p^N` with
    /// `j >= 1` the prime lies in the ideal, so the result is returned over
    /// `F_p`.
    pub fn reduce_mod_ideal(&self, j: u32) -> VPolynomial {
        let ring = self.spec.ring;
        let target = if j >= 1 && ring.modulus().is_some() { CoeffSpec { ring: ring.residue_field(), ..self.spec } } else { self.spec };
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.min_index().map_or(true, |i| i >= j))
            .map(|(m, c)| {
                let c = target.ring.convert_from(&ring, c).expect("same prime, smaller modulus");
                (m.clone(), c)
            })
            .collect();
        Self::normalize(target, terms)
    }

    /// Partitions the terms by their largest generator index.
    ///
    /// Each part with index `k >= 1` is returned divided by `v_k`. Terms
    /// free of generators are reported under `k = 0` undivided.
    pub fn split_top(&self) -> Result<Vec<(u32, VPolynomial)>> {
        let mut parts: Vec<(u32, Vec<(VMonomial, Scalar)>)> = Vec::new();
        for (m, c) in &self.terms {
            let k = m.max_index().unwrap_or(0);
            let reduced = if k == 0 {
                m.clone()
            } else {
                match m.divide_by_var(k) {
                    Some(q) => q,
                    None => return internal(format!("monomial not divisible by v{k}")),
                }
            };
            match parts.iter_mut().find(|(i, _)| *i == k) {
                Some((_, ts)) => ts.push((reduced, c.clone())),
                None => parts.push((k, vec![(reduced, c.clone())])),
            }
        }
        parts.sort_by_key(|(k, _)| *k);
        Ok(parts.into_iter().map(|(k, ts)| (k, Self::normalize(self.spec, ts))).collect())
    }

    /// Maps coefficients into another spec: scalars are converted and
    /// generators outside the target range are set to zero.
    pub fn change_spec(&self, target: CoeffSpec) -> Result<VPolynomial> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            if m.pairs().any(|(i, _)| !target.contains(i)) {
                continue;
            }
            terms.push((m.clone(), target.ring.convert_from(&self.spec.ring, c)?));
        }
        Ok(Self::normalize(target, terms))
    }

    /// Canonical text form, e.g. `1 + 3*v1^2*v2`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let ring = self.spec.ring;
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    ring.render(c)
                } else if c.is_one() {
                    m.render()
                } else {
                    format!("{}*{}", ring.render(c), m.render())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Parses the canonical rendering. Non-canonical input (unsorted terms,
    /// explicit unit coefficients, zero terms) is rejected.
    pub fn parse(spec: CoeffSpec, text: &str) -> Result<VPolynomial> {
        if text == "0" {
            return Ok(VPolynomial::zero(spec));
        }
        let mut terms: Vec<(VMonomial, Scalar)> = Vec::new();
        for raw in text.split(" + ") {
            let (m, c) = parse_term(spec, raw)?;
            if let Some((prev, _)) = terms.last() {
                if *prev >= m {
                    return parse_err(format!("terms out of canonical order at {raw:?}"));
                }
            }
            terms.push((m, c));
        }
        Ok(VPolynomial { spec, terms })
    }
}

fn parse_term(spec: CoeffSpec, raw: &str) -> Result<(VMonomial, Scalar)> {
    let ring = spec.ring;
    let mut factors = raw.split('*').peekable();
    let first = factors.peek().copied().unwrap_or("");
    let coeff = if first.starts_with('v') {
        ring.one()
    } else {
        factors.next();
        let c = ring.parse(first)?;
        if ring.is_zero(&c) {
            return parse_err(format!("zero coefficient in {raw:?}"));
        }
        c
    };
    let explicit_coeff = !first.starts_with('v');
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for f in factors {
        let body = f.strip_prefix('v').ok_or_else(|| crate::Error::Parse(format!("bad factor {f:?}")))?;
        let (idx, exp) = match body.split_once('^') {
            Some((i, e)) => (i, Some(e)),
            None => (body, None),
        };
        let idx = parse_small(idx)?;
        let exp = match exp {
            Some(e) => {
                let e = parse_small(e)?;
                if e < 2 {
                    return parse_err(format!("non-canonical exponent in {f:?}"));
                }
                e
            }
            None => 1,
        };
        if !spec.contains(idx) {
            return parse_err(format!("generator v{idx} outside [{}, {}]", spec.lo, spec.hi));
        }
        if pairs.last().is_some_and(|&(prev, _)| prev >= idx) {
            return parse_err(format!("generators out of order in {raw:?}"));
        }
        pairs.push((idx, exp));
    }
    if explicit_coeff && !pairs.is_empty() && coeff.is_one() {
        return parse_err(format!("explicit unit coefficient in {raw:?}"));
    }
    Ok((VMonomial::from_pairs(&pairs), coeff))
}

fn parse_small(s: &str) -> Result<u32> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return parse_err(format!("bad number {s:?}"));
    }
    match s.parse::<u32>() {
        Ok(v) if v <= u16::MAX as u32 => Ok(v),
        _ => parse_err(format!("number {s:?} too large")),
    }
}

impl fmt::Display for VPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(p: u64, lo: u32, hi: u32) -> CoeffSpec {
        CoeffSpec::new(ScalarRing::prime_field(p).unwrap(), lo, hi).unwrap()
    }

    fn v(s: CoeffSpec, i: u32) -> VPolynomial {
        VPolynomial::var(s, i).unwrap()
    }

    #[test]
    fn distributivity_example() {
        let s = spec(5, 1, 2);
        let lhs = v(s, 1).plus(&v(s, 2)).times(&v(s, 1));
        assert_eq!(lhs.render(), "v1^2 + v1*v2");
    }

    #[test]
    fn characteristic_two_cancels() {
        let s = spec(2, 1, 2);
        assert!(v(s, 1).plus(&v(s, 1)).is_zero());
    }

    #[test]
    fn grading_is_additive() {
        let s = spec(2, 1, 2);
        assert_eq!(v(s, 1).times(&v(s, 2)).degree(), Some(-8));
    }

    #[test]
    fn mismatched_specs_are_config_errors() {
        let a = v(spec(2, 1, 2), 1);
        let b = v(spec(2, 1, 3), 1);
        assert!(matches!(a.add(&b), Err(crate::Error::Config(_))));
        assert!(VPolynomial::var(spec(2, 1, 2), 3).is_err());
    }

    #[test]
    fn reduction_examples() {
        let s = spec(3, 1, 2);
        assert!(v(s, 1).reduce_mod_ideal(3).is_zero());
        assert_eq!(VPolynomial::one(s).reduce_mod_ideal(3), VPolynomial::one(s));
        let z = CoeffSpec::new(ScalarRing::integers_mod(3, 4).unwrap(), 1, 2).unwrap();
        let p = VPolynomial::var(z, 0).unwrap();
        assert!(p.reduce_mod_ideal(1).is_zero());
        // 4 = 1 mod 3 survives as a unit
        assert!(VPolynomial::from_i64(z, 4).reduce_mod_ideal(1).constant_term().is_one());
    }

    #[test]
    fn split_top_examples() {
        let s = spec(5, 1, 2);
        let a = VPolynomial::parse(s, "3*v1^2*v2").unwrap();
        let parts = a.split_top().unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, 2);
        assert_eq!(parts[0].1.render(), "3*v1^2");

        let b = v(s, 1).plus(&v(s, 1).times(&v(s, 2)));
        let parts = b.split_top().unwrap();
        assert_eq!(parts[0], (1, VPolynomial::one(s)));
        assert_eq!(parts[1], (2, v(s, 1)));
    }

    #[test]
    fn render_forms() {
        let s = spec(5, 1, 2);
        let a = VPolynomial::from_i64(s, 3).times(&v(s, 1).pow(2)).times(&v(s, 2));
        assert_eq!(a.render(), "3*v1^2*v2");
        assert_eq!(VPolynomial::zero(s).render(), "0");
        let q = CoeffSpec::new(ScalarRing::rationals(2).unwrap(), 1, 1).unwrap();
        let h = VPolynomial::parse(q, "-1/2*v1").unwrap();
        assert_eq!(h.render(), "-1/2*v1");
        for bad in ["v1 + 1", "1*v1", "v1^1", "v2*v1", "0*v1", "v3", "v1 +v2", ""] {
            assert!(VPolynomial::parse(s, bad).is_err(), "{bad}");
        }
    }

    fn arb_poly(p: u64) -> impl Strategy<Value = VPolynomial> {
        let s = spec(p, 1, 3);
        prop::collection::vec((0u32..3, 0u32..3, 0u32..2, 0i64..p as i64), 0..6).prop_map(move |ts| {
            let terms = ts.into_iter().map(|(a, b, c, k)| (VMonomial::from_pairs(&[(1, a), (2, b), (3, c)]), s.ring.from_i64(k))).collect();
            VPolynomial::from_terms(s, terms).unwrap()
        })
    }

    fn arb_homogeneous(p: u64) -> impl Strategy<Value = VPolynomial> {
        // monomials of degree -2(p^2 - 1)*2: v1^(2p+2), v1^(p+1) v2, v2^2
        let s = spec(p, 1, 2);
        prop::collection::vec(0i64..p as i64, 3).prop_map(move |cs| {
            let e = (p + 1) as u32;
            let monos = [VMonomial::from_pairs(&[(1, 2 * e)]), VMonomial::from_pairs(&[(1, e), (2, 1)]), VMonomial::from_pairs(&[(2, 2)])];
            let terms = monos.into_iter().zip(cs).map(|(m, c)| (m, s.ring.from_i64(c))).collect();
            VPolynomial::from_terms(s, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(3), b in arb_poly(3), c in arb_poly(3)) {
            prop_assert_eq!(a.times(&b), b.times(&a));
            prop_assert_eq!(a.times(&b).times(&c), a.times(&b.times(&c)));
            prop_assert_eq!(a.times(&b.plus(&c)), a.times(&b).plus(&a.times(&c)));
            prop_assert_eq!(a.plus(&b), b.plus(&a));
            prop_assert!(a.minus(&a).is_zero());
        }

        #[test]
        fn homogeneous_products_have_predicted_degree(a in arb_homogeneous(3), b in arb_homogeneous(3)) {
            let prod = a.times(&b);
            if !prod.is_zero() {
                prop_assert_eq!(prod.degree(), Some(a.degree().unwrap() + b.degree().unwrap()));
            }
        }

        #[test]
        fn split_top_reconstructs(a in arb_poly(2)) {
            let s = a.spec();
            let mut sum = VPolynomial::zero(s);
            for (k, part) in a.split_top().unwrap() {
                let back = if k == 0 { part } else { part.times(&v(s, k)) };
                sum = sum.plus(&back);
            }
            prop_assert_eq!(sum, a);
        }

        #[test]
        fn reduction_is_a_ring_map(a in arb_poly(3), b in arb_poly(3), j in 0u32..5) {
            let lhs = a.times(&b).reduce_mod_ideal(j);
            let rhs = a.reduce_mod_ideal(j).times(&b.reduce_mod_ideal(j));
            prop_assert_eq!(&lhs, &rhs);
            prop_assert_eq!(lhs.reduce_mod_ideal(j), lhs);
        }

        #[test]
        fn render_round_trips(a in arb_poly(5)) {
            let text = a.render();
            let back = VPolynomial::parse(a.spec(), &text).unwrap();
            prop_assert_eq!(back.render(), text);
            prop_assert_eq!(back, a);
        }
    }
}
