//! Multivariate power series truncated at a total degree, with
//! coefficients in [`VPolynomial`].
//!
//! Every series carries a shared [`SeriesContext`] naming its variables,
//! the truncation degree `D` and the coefficient ring. Terms of total
//! degree above `D` are never stored.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::coeffring::{CoeffSpec, VMonomial, VPolynomial};
use crate::error::{config, parse_err, precondition, Error, Result};
use crate::scalar::{Scalar, ScalarRing};

/// Dense exponent vector over the series variables.
///
/// Graded-lexicographic order: total degree first, then larger exponent on
/// the earlier variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XMonomial(SmallVec<[u16; 4]>);

impl XMonomial {
    pub fn one(nvars: usize) -> Self {
        XMonomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        XMonomial(exps.iter().map(|&e| e as u16).collect())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[i] = 1;
        m
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&e| e as u32)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &XMonomial) -> XMonomial {
        XMonomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn with_exponent(&self, i: usize, e: u32) -> XMonomial {
        let mut m = self.clone();
        m.0[i] = e as u16;
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for XMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for XMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Variables, truncation degree and coefficient ring shared by a family
/// of series.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesContext {
    names: Vec<String>,
    trunc: u32,
    coeffs: CoeffSpec,
}

pub type Ctx = Arc<SeriesContext>;

impl SeriesContext {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, trunc: u32, coeffs: CoeffSpec) -> Ctx {
        Arc::new(SeriesContext { names: names.into_iter().map(Into::into).collect(), trunc, coeffs })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeffs(&self) -> CoeffSpec {
        self.coeffs
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_coeffs(&self, coeffs: CoeffSpec) -> Ctx {
        Arc::new(SeriesContext { coeffs, ..self.clone() })
    }

    pub fn with_trunc(&self, trunc: u32) -> Ctx {
        Arc::new(SeriesContext { trunc, ..self.clone() })
    }
}

fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A power series truncated at total degree `ctx.trunc()`.
#[derive(Clone, Debug)]
pub struct TruncatedSeries {
    ctx: Ctx,
    terms: BTreeMap<XMonomial, VPolynomial>,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        same_ctx(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for TruncatedSeries {}

/// Operations accepted by [`TruncatedSeries::ts_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TsOp {
    Add,
    Mul,
}

impl TruncatedSeries {
    pub fn zero(ctx: &Ctx) -> Self {
        TruncatedSeries { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ctx: &Ctx) -> Self {
        Self::constant(ctx, VPolynomial::one(ctx.coeffs))
    }

    pub fn constant(ctx: &Ctx, c: VPolynomial) -> Self {
        Self::monomial(ctx, XMonomial::one(ctx.nvars()), c)
    }

    pub fn var(ctx: &Ctx, i: usize) -> Self {
        Self::monomial(ctx, XMonomial::var(ctx.nvars(), i), VPolynomial::one(ctx.coeffs))
    }

    pub fn monomial(ctx: &Ctx, m: XMonomial, c: VPolynomial) -> Self {
        assert_eq!(m.nvars(), ctx.nvars(), "monomial arity differs from context");
        debug_assert_eq!(c.spec(), ctx.coeffs);
        let mut terms = BTreeMap::new();
        if !c.is_zero() && m.degree() <= ctx.trunc {
            terms.insert(m, c);
        }
        TruncatedSeries { ctx: ctx.clone(), terms }
    }

    /// Builds a series from terms, combining duplicates and dropping
    /// anything above the truncation degree.
    pub fn from_terms(ctx: &Ctx, terms: impl IntoIterator<Item = (XMonomial, VPolynomial)>) -> Result<Self> {
        let mut out = Self::zero(ctx);
        for (m, c) in terms {
            if m.nvars() != ctx.nvars() {
                return config("monomial arity differs from context");
            }
            if c.spec() != ctx.coeffs {
                return config("coefficient ring differs from context");
            }
            out.add_term(m, &c);
        }
        Ok(out)
    }

    fn add_term(&mut self, m: XMonomial, c: &VPolynomial) {
        if c.is_zero() || m.degree() > self.ctx.trunc {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                existing.add_assign_ref(c);
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> CoeffSpec {
        self.ctx.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&XMonomial, &VPolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &XMonomial) -> Option<&VPolynomial> {
        self.terms.get(m)
    }

    /// Coefficient of the monomial with the given exponents, zero if absent.
    pub fn coeff_of(&self, exps: &[u32]) -> VPolynomial {
        self.terms.get(&XMonomial::from_exponents(exps)).cloned().unwrap_or_else(|| VPolynomial::zero(self.ctx.coeffs))
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

    /// Lowest total degree of a nonzero term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(XMonomial::degree)
    }

    /// Highest total degree of a nonzero term.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(XMonomial::degree)
    }

    pub fn constant_term(&self) -> VPolynomial {
        self.coeff_of(&vec![0; self.ctx.nvars()])
    }

    /// Homogeneous cohomological degree `2|x| + deg(coefficient)`.
    pub fn degree(&self) -> Option<i64> {
        let mut d = None;
        for (m, c) in &self.terms {
            let p = self.ctx.coeffs.p();
            for (vm, _) in c.terms() {
                let e = 2 * m.degree() as i64 + vm.degree(p);
                match d {
                    None => d = Some(e),
                    Some(prev) if prev != e => return None,
                    _ => {}
                }
            }
        }
        d
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    fn check(&self, other: &TruncatedSeries) -> Result<()> {
        if !same_ctx(&self.ctx, &other.ctx) {
            return config(format!("series contexts differ: {:?} vs {:?}", self.ctx.names, other.ctx.names));
        }
        Ok(())
    }

    pub fn ts_arith(&self, other: &TruncatedSeries, op: TsOp) -> Result<TruncatedSeries> {
        self.check(other)?;
        Ok(match op {
            TsOp::Add => self.plus(other),
            TsOp::Mul => self.times(other),
        })
    }

    pub fn add(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.ts_arith(other, TsOp::Add)
    }

    pub fn sub(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(other)?;
        Ok(self.minus(other))
    }

    pub fn mul(&self, other: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.ts_arith(other, TsOp::Mul)
    }

    /// Sum. Panics if the contexts differ; see [`Self::add`].
    pub fn plus(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert!(same_ctx(&self.ctx, &other.ctx), "series contexts differ");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> TruncatedSeries {
        TruncatedSeries { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn minus(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.plus(&other.neg())
    }

    /// Product truncated at `D`. Panics if the contexts differ; see [`Self::mul`].
    pub fn times(&self, other: &TruncatedSeries) -> TruncatedSeries {
        assert!(same_ctx(&self.ctx, &other.ctx), "series contexts differ");
        let trunc = self.ctx.trunc;
        let spec = self.ctx.coeffs;
        let ring = spec.ring;
        let rhs: Vec<(&XMonomial, u32, &VPolynomial)> = other.terms.iter().map(|(m, c)| (m, m.degree(), c)).collect();
        let mut acc: HashMap<XMonomial, Vec<(VMonomial, Scalar)>> = HashMap::new();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            if da > trunc {
                break;
            }
            for &(mb, db, cb) in &rhs {
                if da + db > trunc {
                    break;
                }
                let slot = acc.entry(ma.mul(mb)).or_default();
                for (va, sa) in ca.terms() {
                    for (vb, sb) in cb.terms() {
                        slot.push((va.mul(vb), ring.mul(sa, sb)));
                    }
                }
            }
        }
        let terms = acc.into_iter().map(|(m, raw)| (m, VPolynomial::normalize(spec, raw))).filter(|(_, c)| !c.is_zero()).collect();
        TruncatedSeries { ctx: self.ctx.clone(), terms }
    }

    pub fn scale(&self, c: &VPolynomial) -> TruncatedSeries {
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x.times(c))).filter(|(_, x)| !x.is_zero()).collect();
        TruncatedSeries { ctx: self.ctx.clone(), terms }
    }

    pub fn scale_scalar(&self, c: &Scalar) -> TruncatedSeries {
        let terms = self.terms.iter().map(|(m, x)| (m.clone(), x.scale(c))).filter(|(_, x)| !x.is_zero()).collect();
        TruncatedSeries { ctx: self.ctx.clone(), terms }
    }

    pub fn pow(&self, e: u64) -> TruncatedSeries {
        let p = self.ctx.coeffs.p();
        if e > 0 && e % p == 0 && self.ctx.coeffs.ring.is_field_mod_p() {
            return self.pow(e / p).frobenius();
        }
        let mut result = TruncatedSeries::one(&self.ctx);
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

    /// `f -> f^p` over `F_p`, computed termwise.
    fn frobenius(&self) -> TruncatedSeries {
        let p = self.ctx.coeffs.p();
        let mut out = TruncatedSeries::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mp = XMonomial(m.0.iter().map(|&e| e * p as u16).collect());
            if mp.degree() <= self.ctx.trunc {
                out.terms.insert(mp, c.pow(p));
            }
        }
        out
    }

    /// `f -> f^{p^e}` over `F_p`, landing in `target`.
    ///
    /// The source only needs to be known to degree `⌊D/p^e⌋` where `D` is
    /// the truncation of `target`, which makes high Frobenius powers cheap.
    pub fn frobenius_lift(&self, target: &Ctx, e: u32) -> Result<TruncatedSeries> {
        if !self.ctx.coeffs.ring.is_field_mod_p() || target.coeffs != self.ctx.coeffs {
            return config("Frobenius lifting needs the same prime-field coefficients");
        }
        if target.nvars() != self.ctx.nvars() {
            return config("Frobenius lifting cannot change the variables");
        }
        let q = self.ctx.coeffs.p().pow(e);
        if (target.trunc as u64) / q > self.ctx.trunc as u64 {
            return config("source series is not known to enough degree for the lift");
        }
        let mut out = TruncatedSeries::zero(target);
        for (m, c) in &self.terms {
            let mq = XMonomial(m.0.iter().map(|&x| (x as u64 * q) as u16).collect());
            if mq.degree() > target.trunc {
                continue;
            }
            let terms = c.terms().iter().map(|(v, a)| (v.pow(q as u32), a.clone())).collect();
            out.terms.insert(mq, VPolynomial::from_terms(target.coeffs, terms)?);
        }
        Ok(out)
    }

    /// Drops every term of total degree above `d`.
    pub fn truncated(&self, d: u32) -> TruncatedSeries {
        TruncatedSeries {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Keeps the terms for which `keep` holds.
    pub fn filter_terms(&self, mut keep: impl FnMut(&XMonomial) -> bool) -> TruncatedSeries {
        TruncatedSeries {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Applies a monomial map; terms mapped to `None` are dropped.
    pub fn map_monomials(&self, ctx: &Ctx, mut f: impl FnMut(&XMonomial) -> Option<XMonomial>) -> TruncatedSeries {
        let mut out = TruncatedSeries::zero(ctx);
        for (m, c) in &self.terms {
            if let Some(n) = f(m) {
                out.add_term(n, c);
            }
        }
        out
    }

    /// Largest exponent of variable `i` among the terms.
    pub fn var_degree(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(i)).max().unwrap_or(0)
    }

    /// Re-expresses the series in `target`, sending variable `i` to
    /// `var_map[i]`. Coefficient rings must agree.
    pub fn embed(&self, target: &Ctx, var_map: &[usize]) -> Result<TruncatedSeries> {
        if var_map.len() != self.ctx.nvars() || var_map.iter().any(|&j| j >= target.nvars()) {
            return config("variable map does not fit the contexts");
        }
        if target.coeffs != self.ctx.coeffs {
            return config("embedding cannot change the coefficient ring");
        }
        Ok(self.map_monomials(target, |m| {
            let mut e = vec![0u32; target.nvars()];
            for (i, x) in m.exponents().enumerate() {
                e[var_map[i]] += x;
            }
            Some(XMonomial::from_exponents(&e))
        }))
    }

    /// The same series in a context with a smaller truncation degree.
    pub fn retruncate(&self, trunc: u32) -> Result<TruncatedSeries> {
        if trunc > self.ctx.trunc {
            return config("retruncation cannot raise the truncation degree");
        }
        if trunc == self.ctx.trunc {
            return Ok(self.clone());
        }
        let ctx = self.ctx.with_trunc(trunc);
        Ok(self.map_monomials(&ctx, |m| Some(m.clone())))
    }

    /// Maps the coefficients into `target` (same variables), converting
    /// scalars and dropping generators outside the new range.
    pub fn change_coeffs(&self, target: &Ctx) -> Result<TruncatedSeries> {
        if target.nvars() != self.ctx.nvars() {
            return config("coefficient change cannot change the variables");
        }
        let mut out = TruncatedSeries::zero(target);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.change_spec(target.coeffs)?);
        }
        Ok(out)
    }

    /// Coefficientwise reduction modulo `I_j`; see [`VPolynomial::reduce_mod_ideal`].
    pub fn reduce_mod_ideal(&self, j: u32) -> TruncatedSeries {
        let mut spec = self.ctx.coeffs;
        if j >= 1 && spec.ring.modulus().is_some() {
            spec.ring = spec.ring.residue_field();
        }
        let ctx = if spec == self.ctx.coeffs { self.ctx.clone() } else { self.ctx.with_coeffs(spec) };
        let mut out = TruncatedSeries::zero(&ctx);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.reduce_mod_ideal(j));
        }
        out
    }

    /// Multiplicative inverse of a series whose constant coefficient has a
    /// unit constant term and whose remaining part is topologically nilpotent
    /// within the truncation.
    pub fn inverse(&self) -> Result<TruncatedSeries> {
        let c0 = self.constant_term();
        let ring = self.ctx.coeffs.ring;
        let lead = c0.constant_term();
        let Some(lead_inv) = ring.inv(&lead) else {
            return precondition("constant term is not a unit");
        };
        // self = lead * (1 + n)
        let one = TruncatedSeries::one(&self.ctx);
        let n = self.scale_scalar(&lead_inv).minus(&one);
        let mut sum = one.clone();
        let mut power = one;
        let cap = self.iteration_cap();
        for _ in 0..cap {
            power = power.times(&n).neg();
            if power.is_zero() {
                return Ok(sum.scale_scalar(&lead_inv));
            }
            sum = sum.plus(&power);
        }
        precondition("series is not invertible within the truncation")
    }

    pub(crate) fn iteration_cap(&self) -> usize {
        let ring = self.ctx.coeffs.ring;
        let scalar_steps = if ring.modulus().is_some() { ring.prec as usize } else { 1 };
        (self.ctx.trunc as usize + 2) * (scalar_steps + 1) + 8
    }

    /// `self(args)`: substitutes `args[i]` for variable `i`.
    ///
    /// All arguments must share one context with the coefficient ring of
    /// `self` and have zero constant term.
    pub fn substitute(&self, args: &[TruncatedSeries]) -> Result<TruncatedSeries> {
        if args.len() != self.ctx.nvars() {
            return config(format!("substitution needs {} arguments, got {}", self.ctx.nvars(), args.len()));
        }
        let Some(first) = args.first() else {
            return config("cannot substitute into a series without variables");
        };
        let target = first.ctx.clone();
        for a in args {
            a.check(first)?;
            if !a.constant_term().is_zero() {
                return precondition("substitution argument has a nonzero constant term");
            }
        }
        if target.coeffs != self.ctx.coeffs {
            return config("substitution cannot change the coefficient ring");
        }
        let last = args.len() - 1;
        let mut powers = vec![TruncatedSeries::one(&target)];
        let top = self.var_degree(last).min(target.trunc);
        for _ in 0..top {
            let next = powers.last().unwrap().times(&args[last]);
            powers.push(next);
        }
        let terms: Vec<(&XMonomial, &VPolynomial)> =
            self.terms.iter().filter(|(m, _)| m.exponents().zip(args).all(|(e, a)| e == 0 || a.order().is_some())).collect();
        Ok(substitute_rec(&terms, 0, args, &powers, &target))
    }

    /// Substitutes `arg` for variable `var` only, keeping the others.
    pub fn substitute_var(&self, var: usize, arg: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.check(arg)?;
        if !arg.constant_term().is_zero() {
            return precondition("substitution argument has a nonzero constant term");
        }
        let mut groups: BTreeMap<u32, TruncatedSeries> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            groups.entry(e).or_insert_with(|| TruncatedSeries::zero(&self.ctx)).add_term(m.with_exponent(var, 0), c);
        }
        let Some((&top, _)) = groups.iter().next_back() else {
            return Ok(TruncatedSeries::zero(&self.ctx));
        };
        let mut acc = TruncatedSeries::zero(&self.ctx);
        for e in (0..=top).rev() {
            acc = acc.times(arg);
            if let Some(g) = groups.get(&e) {
                acc = acc.plus(g);
            }
        }
        Ok(acc)
    }

    /// Canonical serialized form.
    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            variables: self.ctx.names.clone(),
            trunc: self.ctx.trunc,
            ring: self.ctx.coeffs.ring,
            v_range: [self.ctx.coeffs.lo, self.ctx.coeffs.hi],
            terms: self.terms.iter().map(|(m, c)| (m.exponents().collect(), c.render())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("series documents always serialize")
    }

    /// Rebuilds a series from its canonical document, rejecting anything
    /// that is not in canonical form.
    pub fn from_doc(doc: &SeriesDoc) -> Result<TruncatedSeries> {
        let ring = ScalarRing::new(doc.ring.kind, doc.ring.p, doc.ring.prec)?;
        if ring != doc.ring {
            return parse_err("ring description is not canonical");
        }
        let coeffs = CoeffSpec::new(ring, doc.v_range[0], doc.v_range[1])?;
        let ctx = SeriesContext::new(doc.variables.iter().cloned(), doc.trunc, coeffs);
        Self::from_doc_in(&ctx, doc)
    }

    /// Like [`Self::from_doc`] but reusing an existing context, which must
    /// match the document header.
    pub fn from_doc_in(ctx: &Ctx, doc: &SeriesDoc) -> Result<TruncatedSeries> {
        if doc.variables != ctx.names
            || doc.trunc != ctx.trunc
            || doc.ring != ctx.coeffs.ring
            || doc.v_range != [ctx.coeffs.lo, ctx.coeffs.hi]
        {
            return parse_err("series header does not match the expected context");
        }
        let mut terms = BTreeMap::new();
        let mut prev: Option<XMonomial> = None;
        for (exps, text) in &doc.terms {
            if exps.len() != ctx.nvars() || exps.iter().any(|&e| e > u16::MAX as u32) {
                return parse_err("exponent vector has the wrong length");
            }
            let m = XMonomial::from_exponents(exps);
            if m.degree() > ctx.trunc {
                return parse_err("term above the truncation degree");
            }
            if prev.as_ref().is_some_and(|p| *p >= m) {
                return parse_err("terms out of canonical order");
            }
            let c = VPolynomial::parse(ctx.coeffs, text)?;
            if c.is_zero() {
                return parse_err("zero coefficient stored");
            }
            prev = Some(m.clone());
            terms.insert(m, c);
        }
        Ok(TruncatedSeries { ctx: ctx.clone(), terms })
    }

    pub fn from_json(text: &str) -> Result<TruncatedSeries> {
        let doc: SeriesDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    /// Human-readable rendering, lowest degree first.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> = m
                    .exponents()
                    .enumerate()
                    .filter(|&(_, e)| e > 0)
                    .map(|(i, e)| {
                        let n = &self.ctx.names[i];
                        if e == 1 {
                            n.clone()
                        } else {
                            format!("{n}^{e}")
                        }
                    })
                    .collect();
                let coeff = c.render();
                match (mono.is_empty(), c.len() == 1 && c.constant_term().is_one() && c.is_constant()) {
                    (true, _) => coeff,
                    (false, true) => mono.join("*"),
                    (false, false) if c.len() == 1 => format!("{coeff}*{}", mono.join("*")),
                    (false, false) => format!("({coeff})*{}", mono.join("*")),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn substitute_rec(
    terms: &[(&XMonomial, &VPolynomial)],
    var: usize,
    args: &[TruncatedSeries],
    last_powers: &[TruncatedSeries],
    target: &Ctx,
) -> TruncatedSeries {
    let last = args.len() - 1;
    let mut groups: BTreeMap<u32, Vec<(&XMonomial, &VPolynomial)>> = BTreeMap::new();
    for &(m, c) in terms {
        groups.entry(m.exponent(var)).or_default().push((m, c));
    }
    if var == last {
        let mut out = TruncatedSeries::zero(target);
        for (e, group) in groups {
            let Some(power) = last_powers.get(e as usize) else { continue };
            for (_, c) in group {
                out = out.plus(&power.scale(c));
            }
        }
        return out;
    }
    let Some((&top, _)) = groups.iter().next_back() else {
        return TruncatedSeries::zero(target);
    };
    // Horner in this variable
    let mut acc = TruncatedSeries::zero(target);
    for e in (0..=top).rev() {
        acc = acc.times(&args[var]);
        if let Some(group) = groups.get(&e) {
            acc = acc.plus(&substitute_rec(group, var + 1, args, last_powers, target));
        }
    }
    acc
}

/// Serialized series: header plus `[exponents, coefficient]` pairs in
/// graded-lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDoc {
    pub variables: Vec<String>,
    pub trunc: u32,
    pub ring: ScalarRing,
    pub v_range: [u32; 2],
    pub terms: Vec<(Vec<u32>, String)>,
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, names: &[&str], trunc: u32) -> Ctx {
        let spec = CoeffSpec::new(ScalarRing::prime_field(p).unwrap(), 1, 2).unwrap();
        SeriesContext::new(names.iter().copied(), trunc, spec)
    }

    fn x(c: &Ctx, i: usize) -> TruncatedSeries {
        TruncatedSeries::var(c, i)
    }

    #[test]
    fn frobenius_in_characteristic_two() {
        let c = ctx(2, &["x0", "x1"], 6);
        let s = x(&c, 0).plus(&x(&c, 1));
        assert_eq!(s.times(&s), x(&c, 0).times(&x(&c, 0)).plus(&x(&c, 1).times(&x(&c, 1))));
        assert_eq!(s.pow(2), s.times(&s));
    }

    #[test]
    fn products_respect_cutoff() {
        let c = ctx(3, &["x0"], 2);
        let x0 = x(&c, 0);
        assert!(x0.times(&x0.times(&x0)).is_zero());
    }

    #[test]
    fn homogeneous_degrees_add() {
        let c = ctx(3, &["x0", "x1"], 6);
        let a = x(&c, 0);
        let b = x(&c, 1);
        assert_eq!(a.degree(), Some(2));
        assert_eq!(a.times(&b).degree(), Some(4));
    }

    #[test]
    fn context_mismatch_is_config_error() {
        let a = x(&ctx(3, &["x0"], 4), 0);
        let b = x(&ctx(3, &["x0"], 5), 0);
        assert!(matches!(a.add(&b), Err(Error::Config(_))));
    }

    #[test]
    fn substitution_examples() {
        let c = ctx(2, &["x0", "x1"], 6);
        let g_ctx = ctx(2, &["t"], 6);
        let t = x(&g_ctx, 0);
        let s = x(&c, 0).plus(&x(&c, 1));
        assert_eq!(t.times(&t).substitute(&[s.clone()]).unwrap(), s.times(&s));
        assert_eq!(t.substitute(&[s.clone()]).unwrap(), s);
        let one = TruncatedSeries::one(&c);
        assert!(matches!(t.substitute(&[one]), Err(Error::Precondition(_))));
    }

    #[test]
    fn inverse_of_unit_series() {
        let c = ctx(3, &["x0"], 8);
        let u = TruncatedSeries::one(&c).plus(&x(&c, 0));
        let inv = u.inverse().unwrap();
        assert_eq!(u.times(&inv), TruncatedSeries::one(&c));
        assert!(x(&c, 0).inverse().is_err());
    }

    #[test]
    fn json_rejects_noncanonical() {
        let c = ctx(3, &["x0", "x1"], 4);
        let s = x(&c, 0).plus(&x(&c, 1).pow(2));
        let json = s.to_json();
        assert_eq!(TruncatedSeries::from_json(&json).unwrap(), s);
        let mut doc = s.to_doc();
        doc.terms.reverse();
        assert!(TruncatedSeries::from_doc(&doc).is_err());
        let mut doc = s.to_doc();
        doc.terms[0].1 = "0".into();
        assert!(TruncatedSeries::from_doc(&doc).is_err());
    }

    fn arb_series(c: Ctx) -> impl Strategy<Value = TruncatedSeries> {
        let spec = c.coeffs();
        prop::collection::vec((0u32..4, 0u32..4, 0u32..3, 0u32..2, 1i64..3), 0..8).prop_map(move |ts| {
            let terms = ts.into_iter().map(|(a, b, e1, e2, k)| {
                let v = VPolynomial::from_terms(spec, vec![(VMonomial::from_pairs(&[(1, e1), (2, e2)]), spec.ring.from_i64(k))]).unwrap();
                (XMonomial::from_exponents(&[a, b]), v)
            });
            TruncatedSeries::from_terms(&c, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn commutative_and_associative(
            a in arb_series(ctx(3, &["x0", "x1"], 5)),
            b in arb_series(ctx(3, &["x0", "x1"], 5)),
            c in arb_series(ctx(3, &["x0", "x1"], 5)),
        ) {
            prop_assert_eq!(a.times(&b), b.times(&a));
            prop_assert_eq!(a.times(&b).times(&c), a.times(&b.times(&c)));
            prop_assert_eq!(a.times(&b.plus(&c)), a.times(&b).plus(&a.times(&c)));
        }

        #[test]
        fn json_round_trip(a in arb_series(ctx(3, &["x0", "x1"], 5))) {
            let json = a.to_json();
            let back = TruncatedSeries::from_json(&json).unwrap();
            prop_assert_eq!(back.to_json(), json);
            prop_assert_eq!(back, a);
        }

        #[test]
        fn substitution_is_a_ring_map(
            a in arb_series(ctx(3, &["x0", "x1"], 5)),
            b in arb_series(ctx(3, &["x0", "x1"], 5)),
        ) {
            let c = ctx(3, &["x0", "x1"], 5);
            let args = [x(&c, 0).plus(&x(&c, 1)), x(&c, 1).times(&x(&c, 0)).plus(&x(&c, 1))];
            let lhs = a.times(&b).substitute(&args).unwrap();
            let rhs = a.substitute(&args).unwrap().times(&b.substitute(&args).unwrap());
            prop_assert_eq!(lhs, rhs);
            let partial = a.substitute_var(1, &args[1]).unwrap();
            let full = a.substitute(&[x(&c, 0), args[1].clone()]).unwrap();
            prop_assert_eq!(partial, full);
        }
    }
}
