//! Mod-p cohomology of `BV_k`: `Λ[a_0..a_{k−1}] ⊗ F_p[x_0..x_{k−1}]` with
//! `|a_i| = 1`, `|x_i| = 2`, the Milnor derivations `Q_i` and the Dickson
//! invariants `β`, `β′`, `β″_m`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{config, parse_err, precondition, Result};
use crate::scalar::{inv_mod, is_prime};

/// A term key: exterior part as a bitmask (`a_i` is bit `i`, factors in
/// ascending order) and the exponent vector of the `x_i`.
pub type TermKey = (u32, Vec<u32>);

/// An element of `H*(BV_k; F_p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPoly {
    p: u64,
    k: usize,
    terms: BTreeMap<TermKey, u64>,
}

/// Sign of `a_A · a_B` rewritten in ascending order; `None` if they share a factor.
fn exterior_sign(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    // Each factor of `b` moves past the factors of `a` with larger index.
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(swaps % 2 == 1)
}

impl SignedPoly {
    pub fn zero(p: u64, k: usize) -> Result<Self> {
        if !is_prime(p) {
            return config(format!("{p} is not prime"));
        }
        if k > 31 {
            return config("at most 31 exterior generators are supported");
        }
        Ok(SignedPoly { p, k, terms: BTreeMap::new() })
    }

    fn empty(&self) -> Self {
        SignedPoly { p: self.p, k: self.k, terms: BTreeMap::new() }
    }

    pub fn one(p: u64, k: usize) -> Result<Self> {
        let mut s = Self::zero(p, k)?;
        s.terms.insert((0, vec![0; k]), 1);
        Ok(s)
    }

    pub fn constant(p: u64, k: usize, c: i64) -> Result<Self> {
        Ok(Self::one(p, k)?.scale(c))
    }

    /// The exterior generator `a_i`.
    pub fn a(p: u64, k: usize, i: usize) -> Result<Self> {
        let mut s = Self::zero(p, k)?;
        if i >= k {
            return config(format!("a{i} needs i < {k}"));
        }
        s.terms.insert((1 << i, vec![0; k]), 1);
        Ok(s)
    }

    /// The polynomial generator `x_i`.
    pub fn x(p: u64, k: usize, i: usize) -> Result<Self> {
        let mut s = Self::zero(p, k)?;
        if i >= k {
            return config(format!("x{i} needs i < {k}"));
        }
        let mut e = vec![0; k];
        e[i] = 1;
        s.terms.insert((0, e), 1);
        Ok(s)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &BTreeMap<TermKey, u64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no exterior generator occurs.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|(mask, _)| *mask == 0)
    }

    /// The x-part as a map from exponent vectors to residues, for
    /// exterior-free elements.
    pub fn x_part(&self) -> Option<BTreeMap<Vec<u32>, u64>> {
        self.is_even().then(|| self.terms.iter().map(|((_, e), &c)| (e.clone(), c)).collect())
    }

    fn add_term(&mut self, key: TermKey, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let p = self.p;
        let entry = self.terms.entry(key.clone()).or_insert(0);
        *entry = (*entry + c) % p;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    fn check(&self, other: &SignedPoly) {
        assert!(self.p == other.p && self.k == other.k, "SignedPoly operands over different rings");
    }

    pub fn plus(&self, other: &SignedPoly) -> SignedPoly {
        self.check(other);
        let mut out = self.clone();
        for (key, &c) in &other.terms {
            out.add_term(key.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> SignedPoly {
        self.scale(-1)
    }

    pub fn minus(&self, other: &SignedPoly) -> SignedPoly {
        self.plus(&other.neg())
    }

    pub fn scale(&self, c: i64) -> SignedPoly {
        let c = c.rem_euclid(self.p as i64) as u64;
        let mut out = self.empty();
        if c != 0 {
            for (key, &a) in &self.terms {
                out.terms.insert(key.clone(), a * c % self.p);
            }
        }
        out
    }

    /// Graded-commutative product.
    pub fn times(&self, other: &SignedPoly) -> SignedPoly {
        self.check(other);
        let mut out = self.empty();
        for ((ma, ea), &ca) in &self.terms {
            for ((mb, eb), &cb) in &other.terms {
                let Some(negative) = exterior_sign(*ma, *mb) else { continue };
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let mut c = ca * cb % self.p;
                if negative {
                    c = (self.p - c) % self.p;
                }
                out.add_term((ma | mb, e), c);
            }
        }
        out
    }

    pub fn pow(&self, e: u64) -> SignedPoly {
        if e > 0 && e % self.p == 0 && self.is_even() {
            return self.pow(e / self.p).frobenius_twist();
        }
        let mut out = Self::one(self.p, self.k).expect("parameters already validated");
        for _ in 0..e {
            out = out.times(self);
        }
        out
    }

    /// The Milnor derivation `Q_i`: `Q_i(a_j) = x_j^{p^i}`, `Q_i(x_j) = 0`,
    /// with the Koszul sign rule.
    pub fn q_op(&self, i: u32) -> SignedPoly {
        let q = self.p.pow(i) as u32;
        let mut out = self.empty();
        for ((mask, e), &c) in &self.terms {
            let mut rest = *mask;
            let mut position = 0;
            while rest != 0 {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut e2 = e.clone();
                e2[s] += q;
                let c2 = if position % 2 == 1 { (self.p - c) % self.p } else { c };
                out.add_term((mask & !(1 << s), e2), c2);
                position += 1;
            }
        }
        out
    }

    /// The ring map `F(a_i) = a_i`, `F(x_i) = x_i^p`.
    pub fn frobenius_twist(&self) -> SignedPoly {
        let mut out = self.empty();
        for ((mask, e), &c) in &self.terms {
            out.add_term((*mask, e.iter().map(|x| x * self.p as u32).collect()), c);
        }
        out
    }

    /// Substitutes `a_j ↦ Σ_i g_ij a_i` and `x_j ↦ Σ_i g_ij x_i`.
    pub fn gl_act(&self, g: &[Vec<i64>]) -> Result<SignedPoly> {
        if g.len() != self.k || g.iter().any(|r| r.len() != self.k) {
            return config(format!("matrix must be {0}x{0}", self.k));
        }
        let (p, k) = (self.p, self.k);
        let column = |j: usize, gen: fn(u64, usize, usize) -> Result<SignedPoly>| -> Result<SignedPoly> {
            let mut s = SignedPoly::zero(p, k)?;
            for (i, row) in g.iter().enumerate() {
                s = s.plus(&gen(p, k, i)?.scale(row[j]));
            }
            Ok(s)
        };
        let images_a: Vec<SignedPoly> = (0..k).map(|j| column(j, SignedPoly::a)).collect::<Result<_>>()?;
        let images_x: Vec<SignedPoly> = (0..k).map(|j| column(j, SignedPoly::x)).collect::<Result<_>>()?;
        let mut out = self.empty();
        for ((mask, e), &c) in &self.terms {
            let mut t = SignedPoly::constant(p, k, c as i64)?;
            for (j, image) in images_a.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    t = t.times(image);
                }
            }
            for (j, &x) in e.iter().enumerate() {
                if x > 0 {
                    t = t.times(&images_x[j].pow(x as u64));
                }
            }
            out = out.plus(&t);
        }
        Ok(out)
    }

    /// Canonical text form such as `2*a0*a1*x0^2 + x1`; `0` when empty.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for ((mask, e), &c) in &self.terms {
            let mut factors = Vec::new();
            if c != 1 {
                factors.push(c.to_string());
            }
            for i in 0..self.k {
                if mask & (1 << i) != 0 {
                    factors.push(format!("a{i}"));
                }
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(format!("x{i}")),
                    _ => factors.push(format!("x{i}^{x}")),
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }

    /// Parses sums of products of integers, `a<i>` and `x<i>^<e>`.
    /// Exterior factors may appear in any order; signs follow.
    pub fn parse(p: u64, k: usize, text: &str) -> Result<SignedPoly> {
        let mut out = Self::zero(p, k)?;
        let text = text.trim();
        if text.is_empty() {
            return parse_err("empty expression");
        }
        let mut rest = text;
        let mut negative = false;
        if let Some(r) = rest.strip_prefix('-') {
            negative = true;
            rest = r;
        }
        loop {
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let term = Self::parse_term(p, k, rest[..end].trim())?;
            out = out.plus(&if negative { term.neg() } else { term });
            if end == rest.len() {
                break;
            }
            negative = rest.as_bytes()[end] == b'-';
            rest = &rest[end + 1..];
        }
        Ok(out)
    }

    fn parse_term(p: u64, k: usize, term: &str) -> Result<SignedPoly> {
        if term.is_empty() {
            return parse_err("empty term");
        }
        let mut t = Self::one(p, k)?;
        for factor in term.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (b, e.parse::<u32>().map_err(|_| crate::Error::Parse(format!("bad exponent in {factor:?}")))?),
                None => (factor, 1),
            };
            let index = |s: &str| -> Result<usize> {
                let i: usize = s.parse().map_err(|_| crate::Error::Parse(format!("bad index in {factor:?}")))?;
                if i >= k {
                    return parse_err(format!("index {i} out of range in {factor:?}"));
                }
                Ok(i)
            };
            let f = if let Some(i) = base.strip_prefix('a') {
                Self::a(p, k, index(i)?)?
            } else if let Some(i) = base.strip_prefix('x') {
                Self::x(p, k, index(i)?)?
            } else if !base.is_empty() && base.bytes().all(|b| b.is_ascii_digit()) {
                let c = base.parse::<u64>().map_err(|_| crate::Error::Parse(format!("bad integer {base:?}")))?;
                Self::constant(p, k, (c % p) as i64)?
            } else {
                return parse_err(format!("unknown factor {factor:?}"));
            };
            if exp > 64 && !f.is_even() {
                return parse_err("exponent too large");
            }
            t = t.times(&f.pow(exp as u64));
        }
        Ok(t)
    }
}

impl fmt::Display for SignedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `β = Π (λ_0x_0 + ⋯ + λ_{k−1}x_{k−1})` over `λ ∈ F_p^k` whose last
/// nonzero entry is 1.
pub fn beta(p: u64, k: usize) -> Result<SignedPoly> {
    if k == 0 {
        return config("need k ≥ 1");
    }
    let mut out = SignedPoly::one(p, k)?;
    for last in 0..k {
        let prefixes = (p as usize).pow(last as u32);
        for code in 0..prefixes {
            let mut form = SignedPoly::x(p, k, last)?;
            let mut c = code;
            for i in 0..last {
                form = form.plus(&SignedPoly::x(p, k, i)?.scale((c % p as usize) as i64));
                c /= p as usize;
            }
            out = out.times(&form);
        }
    }
    Ok(out)
}

/// `β′ = det(x_i^{p^j})`.
pub fn beta_prime(p: u64, k: usize) -> Result<SignedPoly> {
    if k == 0 {
        return config("need k ≥ 1");
    }
    let entry = |i: usize, j: usize| SignedPoly::x(p, k, i).map(|x| x.pow(p.pow(j as u32)));
    let matrix: Vec<Vec<SignedPoly>> = (0..k).map(|i| (0..k).map(|j| entry(i, j)).collect()).collect::<Result<_>>()?;
    Ok(poly_det(&matrix, p, k))
}

fn poly_det(matrix: &[Vec<SignedPoly>], p: u64, k: usize) -> SignedPoly {
    if matrix.is_empty() {
        return SignedPoly::one(p, k).expect("validated");
    }
    let mut out = SignedPoly::zero(p, k).expect("validated");
    for c in 0..matrix.len() {
        let minor: Vec<Vec<SignedPoly>> =
            matrix[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect()).collect();
        let term = matrix[0][c].times(&poly_det(&minor, p, k));
        out = if c % 2 == 0 { out.plus(&term) } else { out.minus(&term) };
    }
    out
}

/// `a_0a_1⋯a_{k−1}`.
pub fn top_exterior(p: u64, k: usize) -> Result<SignedPoly> {
    let mut out = SignedPoly::one(p, k)?;
    for i in 0..k {
        out = out.times(&SignedPoly::a(p, k, i)?);
    }
    Ok(out)
}

/// `β″_m = Q_{m+k−1} ⋯ Q_m(a_0 ⋯ a_{k−1})`, with `Q_m` applied first.
pub fn beta_sec(p: u64, k: usize, m: u32) -> Result<SignedPoly> {
    let mut out = top_exterior(p, k)?;
    for i in 0..k as u32 {
        out = out.q_op(m + i);
    }
    Ok(out)
}

/// Determinant of an integer matrix modulo `p`.
pub fn det_mod_p(g: &[Vec<i64>], p: u64) -> u64 {
    let n = g.len();
    let mut a: Vec<Vec<u64>> = g.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| a[r][c] != 0) else { return 0 };
        if r != c {
            a.swap(r, c);
            det = (p - det) % p;
        }
        det = det * a[c][c] % p;
        let inv = inv_mod(a[c][c], p, p).expect("nonzero residues are invertible");
        for r in c + 1..n {
            let f = a[r][c] * inv % p;
            if f != 0 {
                for j in c..n {
                    a[r][j] = (a[r][j] + p * p - f * a[c][j] % p) % p;
                }
            }
        }
    }
    det
}

/// Checks `g*e = det(g)·e`; singular `g` is rejected.
pub fn det_character_holds(g: &[Vec<i64>], e: &SignedPoly) -> Result<bool> {
    let det = det_mod_p(g, e.p());
    if det == 0 {
        return precondition("matrix is singular over F_p");
    }
    Ok(e.gl_act(g)? == e.scale(det as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(p: u64, k: usize, s: &str) -> SignedPoly {
        SignedPoly::parse(p, k, s).unwrap()
    }

    #[test]
    fn q_examples() {
        let a0 = SignedPoly::a(3, 2, 0).unwrap();
        assert_eq!(a0.q_op(0).render(), "x0");
        assert!(SignedPoly::x(3, 2, 1).unwrap().q_op(1).is_zero());
        let e = top_exterior(2, 2).unwrap();
        assert_eq!(e.q_op(0).q_op(1).render(), "x0*x1^2 + x0^2*x1");
    }

    #[test]
    fn dickson_examples() {
        assert_eq!(beta(2, 1).unwrap().render(), "x0");
        assert_eq!(beta(2, 2).unwrap().render(), "x0*x1^2 + x0^2*x1");
        assert_eq!(beta_prime(2, 2).unwrap(), beta(2, 2).unwrap());
        assert_eq!(beta_sec(2, 2, 1).unwrap(), beta(2, 2).unwrap().pow(2));
        assert_eq!(beta_sec(2, 2, 1).unwrap(), beta_sec(2, 2, 0).unwrap().frobenius_twist());
        let bp = beta_prime(3, 2).unwrap();
        assert_eq!(bp.gl_act(&[vec![2, 0], vec![0, 1]]).unwrap(), bp.scale(2));
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(bp.gl_act(&id).unwrap(), bp);
        assert!(det_character_holds(&[vec![1, 1], vec![1, 1]], &bp).is_err());
    }

    #[test]
    fn exterior_signs() {
        let (a0, a1) = (SignedPoly::a(3, 2, 0).unwrap(), SignedPoly::a(3, 2, 1).unwrap());
        assert_eq!(a1.times(&a0), a0.times(&a1).neg());
        assert!(a0.times(&a0).is_zero());
        assert_eq!(parse(3, 2, "a1*a0"), a0.times(&a1).neg());
    }

    #[test]
    fn parse_render() {
        let s = parse(3, 3, "2*a0*a2*x1^2 + x0 - 1");
        assert_eq!(s.render(), "2 + x0 + 2*a0*a2*x1^2");
        assert_eq!(parse(3, 3, &s.render()), s);
        assert_eq!(parse(2, 1, "0").render(), "0");
        for bad in ["", "a3", "y1", "x0^", "x0 + ", "2**x0"] {
            assert!(SignedPoly::parse(3, 3, bad).is_err(), "{bad}");
        }
    }

    fn arb_poly(p: u64, k: usize) -> impl Strategy<Value = SignedPoly> {
        let term = (0u32..(1 << k), proptest::collection::vec(0u32..3, k), 1u64..p);
        proptest::collection::vec(term, 0..5).prop_map(move |ts| {
            let mut s = SignedPoly::zero(p, k).unwrap();
            for (mask, e, c) in ts {
                s.add_term((mask, e), c);
            }
            s
        })
    }

    fn degree_parity(s: &SignedPoly) -> Option<u32> {
        let mut it = s.terms.keys().map(|(m, _)| m.count_ones() % 2);
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }

    proptest! {
        #[test]
        fn q_squares_to_zero(p in prop_oneof![Just(2u64), Just(3)], i in 0u32..3, s in arb_poly(3, 3)) {
            let s = SignedPoly { p, ..s }.scale(1);
            prop_assert!(s.q_op(i).q_op(i).is_zero());
        }

        #[test]
        fn q_is_a_derivation(i in 0u32..2, a in arb_poly(3, 3), b in arb_poly(3, 3)) {
            // Homogeneous exterior parity is needed for the Koszul sign.
            if let Some(par) = degree_parity(&a) {
                let lhs = a.times(&b).q_op(i);
                let sign = if par == 1 { -1 } else { 1 };
                let rhs = a.q_op(i).times(&b).plus(&a.times(&b.q_op(i)).scale(sign));
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn frobenius_commutes_with_q(i in 0u32..2, s in arb_poly(3, 3)) {
            prop_assert_eq!(s.q_op(i).frobenius_twist(), s.frobenius_twist().q_op(i + 1));
        }

        #[test]
        fn render_round_trips(s in arb_poly(3, 3)) {
            prop_assert_eq!(SignedPoly::parse(3, 3, &s.render()).unwrap(), s);
        }
    }
}
