//! p-typical formal group laws of Hazewinkel or Araki flavor.
//!
//! Construction is staged. The logarithm is computed over exact rationals,
//! `F(s,t) = exp(log s + log t)`, `ι(t) = exp(−log t)` and
//! `[p](t) = exp(p·log t)` are formed there, and only after every
//! coefficient has been checked `p`-integral is anything reduced to
//! `Z/p^N[v_1..v_n]`. A [`PushedLaw`] is the further image over `E*`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::coeffring::{CoeffSpec, VPolynomial};
use crate::error::{config, internal, parse_err, precondition, Error, Result};
use crate::scalar::{is_prime, ScalarKind, ScalarRing};
use crate::series::{Ctx, SeriesContext, SeriesDoc, TruncatedSeries};

/// Version tag of the cache document layout.
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Hazewinkel,
    Araki,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Hazewinkel => "hazewinkel",
            Flavor::Araki => "araki",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hazewinkel" => Ok(Flavor::Hazewinkel),
            "araki" => Ok(Flavor::Araki),
            _ => config(format!("unknown flavor {s:?}")),
        }
    }
}

/// Rational-stage data, before any reduction.
#[derive(Clone, Debug)]
pub struct RationalStage {
    pub log_coeffs: Vec<VPolynomial>,
    pub log: TruncatedSeries,
    pub exp: TruncatedSeries,
    pub f: TruncatedSeries,
    pub inverse: TruncatedSeries,
    pub p_series: TruncatedSeries,
    /// `exp(p·t)`, the first formal summand of the Hazewinkel identity.
    pub exp_pt: TruncatedSeries,
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// Coefficients `l_0, l_1, …` of `log(t) = Σ l_i t^{p^i}` with `p^i ≤ trunc`.
pub fn log_coeffs(p: u64, n: u32, flavor: Flavor, trunc: u32) -> Result<Vec<VPolynomial>> {
    let spec = CoeffSpec::new(ScalarRing::rationals(p)?, 1, n)?;
    let ring = spec.ring;
    let mut out = vec![VPolynomial::one(spec)];
    let mut r = 1u32;
    while p.checked_pow(r).is_some_and(|q| q <= trunc as u64) {
        let mut acc = VPolynomial::zero(spec);
        for (i, li) in out.iter().enumerate() {
            let j = r - i as u32;
            if j > n {
                continue;
            }
            let v = VPolynomial::var(spec, j)?.pow(p.pow(i as u32));
            acc = acc.plus(&li.times(&v));
        }
        let denom = match flavor {
            Flavor::Hazewinkel => big(p),
            Flavor::Araki => big(p) - num_traits::pow(big(p), p.pow(r) as usize),
        };
        let inv = ring.from_rational(&BigRational::new(BigInt::from(1), denom))?;
        out.push(acc.scale(&inv));
        r += 1;
    }
    Ok(out)
}

fn single_ctx(spec: CoeffSpec, trunc: u32) -> Ctx {
    SeriesContext::new(["t"], trunc, spec)
}

fn pair_ctx(spec: CoeffSpec, trunc: u32) -> Ctx {
    SeriesContext::new(["s", "t"], trunc, spec)
}

fn log_series(ctx: &Ctx, coeffs: &[VPolynomial], var: usize, p: u64) -> TruncatedSeries {
    let mut e = vec![0u32; ctx.nvars()];
    let mut out = TruncatedSeries::zero(ctx);
    for (i, l) in coeffs.iter().enumerate() {
        e[var] = p.pow(i as u32) as u32;
        out = out.plus(&TruncatedSeries::monomial(ctx, crate::series::XMonomial::from_exponents(&e), l.clone()));
    }
    out
}

/// Evaluates `Σ l_i a^{p^i}`.
fn apply_log(coeffs: &[VPolynomial], a: &TruncatedSeries, p: u64) -> TruncatedSeries {
    let mut out = TruncatedSeries::zero(a.ctx());
    for (i, l) in coeffs.iter().enumerate() {
        out = out.plus(&a.pow(p.pow(i as u32)).scale(l));
    }
    out
}

/// Runs the rational stage of the construction.
pub fn rational_stage(p: u64, n: u32, flavor: Flavor, trunc: u32) -> Result<RationalStage> {
    if !is_prime(p) {
        return config(format!("{p} is not prime"));
    }
    if n == 0 {
        return config("height bound n must be at least 1");
    }
    if p.checked_pow(n).map_or(true, |q| q > trunc as u64) {
        return config(format!("truncation degree {trunc} cannot express t^(p^{n})"));
    }
    let spec = CoeffSpec::new(ScalarRing::rationals(p)?, 1, n)?;
    let ring = spec.ring;
    let coeffs = log_coeffs(p, n, flavor, trunc)?;
    let c1 = single_ctx(spec, trunc);
    let t = TruncatedSeries::var(&c1, 0);
    let log = log_series(&c1, &coeffs, 0, p);

    // functional inverse: e <- t - (log(e) - e)
    let mut exp = t.clone();
    let mut converged = false;
    for _ in 0..=trunc {
        let next = t.minus(&apply_log(&coeffs, &exp, p).minus(&exp));
        if next == exp {
            converged = true;
            break;
        }
        exp = next;
    }
    if !converged {
        return internal("logarithm inversion did not converge");
    }

    let c2 = pair_ctx(spec, trunc);
    let sum_logs = log_series(&c2, &coeffs, 0, p).plus(&log_series(&c2, &coeffs, 1, p));
    let f = exp.substitute(&[sum_logs])?;
    let inverse = exp.substitute(&[log.neg()])?;
    let p_scalar = ring.from_i64(p as i64);
    let p_series = exp.substitute(&[log.scale_scalar(&p_scalar)])?;
    let exp_pt = exp.substitute(&[t.scale_scalar(&p_scalar)])?;
    Ok(RationalStage { log_coeffs: coeffs, log, exp, f, inverse, p_series, exp_pt })
}

/// A p-typical law over `Z/p^N[v_1..v_n]`, truncated at total degree `D`.
#[derive(Clone, Debug)]
pub struct FormalGroupLaw {
    pub p: u64,
    pub n: u32,
    pub flavor: Flavor,
    pub trunc: u32,
    pub prec: u32,
    pub log_coeffs: Vec<VPolynomial>,
    pub f: TruncatedSeries,
    pub inverse: TruncatedSeries,
    pub p_series: TruncatedSeries,
    pub exp_pt: TruncatedSeries,
}

/// Builds the law, checking `p`-integrality of every reduced coefficient.
pub fn build_fgl(p: u64, n: u32, flavor: Flavor, trunc: u32, prec: u32) -> Result<FormalGroupLaw> {
    if trunc == 0 || prec == 0 {
        return config("truncation degree and p-adic precision must be at least 1");
    }
    let rat = rational_stage(p, n, flavor, trunc)?;
    let spec = CoeffSpec::new(ScalarRing::integers_mod(p, prec)?, 1, n)?;
    let c1 = single_ctx(spec, trunc);
    let c2 = pair_ctx(spec, trunc);
    Ok(FormalGroupLaw {
        p,
        n,
        flavor,
        trunc,
        prec,
        log_coeffs: rat.log_coeffs,
        f: rat.f.change_coeffs(&c2)?,
        inverse: rat.inverse.change_coeffs(&c1)?,
        p_series: rat.p_series.change_coeffs(&c1)?,
        exp_pt: rat.exp_pt.change_coeffs(&c1)?,
    })
}

/// Serialized law: header plus canonical series payloads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FglCacheDoc {
    pub format_version: u32,
    pub p: u64,
    pub n: u32,
    pub flavor: Flavor,
    #[serde(rename = "D")]
    pub trunc: u32,
    #[serde(rename = "N")]
    pub prec: u32,
    pub payloads: BTreeMap<String, SeriesDoc>,
}

impl FormalGroupLaw {
    pub fn coeffs(&self) -> CoeffSpec {
        self.f.coeffs()
    }

    pub fn to_cache_doc(&self) -> FglCacheDoc {
        let payloads = [("F", &self.f), ("exp_pt", &self.exp_pt), ("inverse", &self.inverse), ("p_series", &self.p_series)]
            .into_iter()
            .map(|(k, s)| (k.to_string(), s.to_doc()))
            .collect();
        FglCacheDoc {
            format_version: CACHE_FORMAT_VERSION,
            p: self.p,
            n: self.n,
            flavor: self.flavor,
            trunc: self.trunc,
            prec: self.prec,
            payloads,
        }
    }

    pub fn to_cache_json(&self) -> String {
        serde_json::to_string(&self.to_cache_doc()).expect("cache documents always serialize")
    }

    /// Restores a law from its cache document. Stale versions and
    /// malformed payloads are parse errors.
    pub fn from_cache_doc(doc: &FglCacheDoc) -> Result<FormalGroupLaw> {
        if doc.format_version != CACHE_FORMAT_VERSION {
            return parse_err(format!("stale cache format version {}", doc.format_version));
        }
        if !is_prime(doc.p) || doc.n == 0 || doc.trunc == 0 || doc.prec == 0 {
            return parse_err("invalid cache header");
        }
        let spec = CoeffSpec::new(ScalarRing::integers_mod(doc.p, doc.prec)?, 1, doc.n)?;
        let c1 = single_ctx(spec, doc.trunc);
        let c2 = pair_ctx(spec, doc.trunc);
        let get = |key: &str, ctx: &Ctx| -> Result<TruncatedSeries> {
            let d = doc.payloads.get(key).ok_or_else(|| Error::Parse(format!("missing payload {key}")))?;
            TruncatedSeries::from_doc_in(ctx, d)
        };
        if doc.payloads.len() != 4 {
            return parse_err("unexpected cache payloads");
        }
        Ok(FormalGroupLaw {
            p: doc.p,
            n: doc.n,
            flavor: doc.flavor,
            trunc: doc.trunc,
            prec: doc.prec,
            log_coeffs: log_coeffs(doc.p, doc.n, doc.flavor, doc.trunc)?,
            f: get("F", &c2)?,
            inverse: get("inverse", &c1)?,
            p_series: get("p_series", &c1)?,
            exp_pt: get("exp_pt", &c1)?,
        })
    }

    pub fn from_cache_json(text: &str) -> Result<FormalGroupLaw> {
        let doc: FglCacheDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_cache_doc(&doc)
    }

    /// The law over `Z/p^N[v_1..v_n]` itself, viewed as a pushed law with `m = 0`.
    pub fn base(&self) -> Result<PushedLaw> {
        self.push(0)
    }

    /// Image over `E*`: `Z/p^N[v_1..v_n]` for `m = 0`, otherwise
    /// `F_p[v_m..v_n]`.
    pub fn push(&self, m: u32) -> Result<PushedLaw> {
        if m > self.n {
            return config(format!("m = {m} exceeds n = {}", self.n));
        }
        let base = self.coeffs();
        let spec = if m == 0 { base } else { CoeffSpec::new(base.ring.residue_field(), m, self.n)? };
        let c1 = single_ctx(spec, self.trunc);
        let c2 = pair_ctx(spec, self.trunc);
        let pis = self.pi_decompose()?;
        Ok(PushedLaw {
            p: self.p,
            m,
            n: self.n,
            f: self.f.change_coeffs(&c2)?,
            inverse: self.inverse.change_coeffs(&c1)?,
            p_series: self.p_series.change_coeffs(&c1)?,
            pis: pis.iter().map(|s| s.change_coeffs(&c1)).collect::<Result<_>>()?,
        })
    }

    /// Splits `[p](t) = Σ_k v_k·π_k(t)` by top generator index, with
    /// `v_0 = p` and `π_0 = t`.
    pub fn pi_decompose(&self) -> Result<Vec<TruncatedSeries>> {
        let ctx = self.p_series.ctx();
        let spec = self.coeffs();
        let mut parts = vec![TruncatedSeries::zero(ctx); self.n as usize + 1];
        for (mono, c) in self.p_series.terms() {
            for (k, q) in c.split_top()? {
                let term = TruncatedSeries::monomial(ctx, mono.clone(), q);
                parts[k as usize] = parts[k as usize].plus(&term);
            }
        }
        let t = TruncatedSeries::var(ctx, 0);
        let pt = t.scale_scalar(&spec.ring.from_i64(self.p as i64));
        if parts[0] != pt {
            return internal("p-series has a generator-free term beyond p·t");
        }
        parts[0] = t;
        Ok(parts)
    }

    /// `Σ v_k π_k = [p](t)`, `π_k ≡ t^{p^k}` modulo `(p, t^{p^k+1})` and
    /// modulo `I_{n+1}`.
    pub fn pi_checks(&self) -> Result<Vec<(&'static str, bool)>> {
        let pis = self.pi_decompose()?;
        let spec = self.coeffs();
        let mut sum = pis[0].scale_scalar(&spec.ring.from_i64(self.p as i64));
        for (k, pi) in pis.iter().enumerate().skip(1) {
            sum = sum.plus(&pi.scale(&VPolynomial::var(spec, k as u32)?));
        }
        let mut leading = true;
        let mut top = true;
        for (k, pi) in pis.iter().enumerate() {
            let e = self.p.pow(k as u32) as u32;
            let reduced = pi.reduce_mod_ideal(1);
            let power = TruncatedSeries::var(reduced.ctx(), 0).pow(e as u64);
            leading &= reduced.truncated(e) == power.truncated(e);
            let reduced = pi.reduce_mod_ideal(self.n + 1);
            top &= reduced == TruncatedSeries::var(reduced.ctx(), 0).pow(e as u64);
        }
        Ok(vec![("reassembly", sum == self.p_series), ("leading-term", leading), ("mod-top-ideal", top)])
    }

    /// Unit, commutativity, associativity and inverse axioms to degree `D`.
    pub fn axiom_checks(&self) -> Result<Vec<(&'static str, bool)>> {
        let law = self.base()?;
        let c2 = self.f.ctx();
        let s = TruncatedSeries::var(c2, 0);
        let t = TruncatedSeries::var(c2, 1);
        let zero = TruncatedSeries::zero(c2);
        let unit = law.sum(&s, &zero)? == s && law.sum(&zero, &t)? == t;
        let comm = law.sum(&t, &s)? == self.f;
        let c3 = SeriesContext::new(["s", "t", "u"], self.trunc, self.coeffs());
        let (a, b, c) = (TruncatedSeries::var(&c3, 0), TruncatedSeries::var(&c3, 1), TruncatedSeries::var(&c3, 2));
        let assoc = law.sum(&law.sum(&a, &b)?, &c)? == law.sum(&a, &law.sum(&b, &c)?)?;
        let c1 = self.inverse.ctx();
        let x = TruncatedSeries::var(c1, 0);
        let inv = law.sum(&x, &self.inverse)?.is_zero();
        Ok(vec![("unit", unit), ("commutativity", comm), ("associativity", assoc), ("inverse", inv)])
    }

    /// The defining p-series identity of the flavor, computed literally
    /// with formal sums on the reduced law.
    pub fn flavor_identity(&self) -> Result<bool> {
        let law = self.base()?;
        let ctx = self.p_series.ctx();
        let spec = self.coeffs();
        let mut summands = Vec::new();
        match self.flavor {
            Flavor::Araki => {
                let t = TruncatedSeries::var(ctx, 0);
                summands.push(t.scale_scalar(&spec.ring.from_i64(self.p as i64)));
            }
            Flavor::Hazewinkel => summands.push(self.exp_pt.clone()),
        }
        for k in 1..=self.n {
            let e = self.p.pow(k) as u32;
            let mono = crate::series::XMonomial::from_exponents(&[e]);
            summands.push(TruncatedSeries::monomial(ctx, mono, VPolynomial::var(spec, k)?));
        }
        Ok(law.formal_sum(&summands, ctx)? == self.p_series)
    }

    /// Whether two laws have the same reduction mod `p`.
    pub fn agrees_mod_p(&self, other: &FormalGroupLaw) -> Result<bool> {
        if self.p != other.p || self.n != other.n || self.trunc != other.trunc {
            return config("laws have different parameters");
        }
        let a = self.push(1.min(self.n))?;
        let b = other.push(1.min(other.n))?;
        Ok(a.f == b.f && a.inverse == b.inverse && a.p_series == b.p_series)
    }
}

/// A law pushed forward to `E*`, acting on series in arbitrary contexts
/// over the same coefficient ring.
#[derive(Clone, Debug)]
pub struct PushedLaw {
    pub p: u64,
    pub m: u32,
    pub n: u32,
    pub f: TruncatedSeries,
    pub inverse: TruncatedSeries,
    pub p_series: TruncatedSeries,
    /// `π_0..π_n` in the variable `t`.
    pub pis: Vec<TruncatedSeries>,
}

/// Drops the terms that cannot survive in a target of truncation `trunc`.
fn fit(g: &TruncatedSeries, trunc: u32) -> std::borrow::Cow<'_, TruncatedSeries> {
    if g.max_degree().map_or(true, |d| d <= trunc) {
        std::borrow::Cow::Borrowed(g)
    } else {
        std::borrow::Cow::Owned(g.truncated(trunc))
    }
}

fn check_arg(a: &TruncatedSeries) -> Result<()> {
    if !a.constant_term().is_zero() {
        return precondition("formal group argument has a nonzero constant term");
    }
    Ok(())
}

impl PushedLaw {
    pub fn coeffs(&self) -> CoeffSpec {
        self.f.coeffs()
    }

    pub fn trunc(&self) -> u32 {
        self.f.ctx().trunc()
    }

    /// `F(a, b)`.
    pub fn sum(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        check_arg(a)?;
        check_arg(b)?;
        if a.is_zero() {
            return Ok(b.clone());
        }
        if b.is_zero() {
            return Ok(a.clone());
        }
        fit(&self.f, a.ctx().trunc()).substitute(&[a.clone(), b.clone()])
    }

    /// `ι(a)`, the formal negative.
    pub fn neg(&self, a: &TruncatedSeries) -> Result<TruncatedSeries> {
        check_arg(a)?;
        if a.is_zero() {
            return Ok(a.clone());
        }
        fit(&self.inverse, a.ctx().trunc()).substitute(std::slice::from_ref(a))
    }

    /// `a −_F b = F(a, ι(b))`.
    pub fn diff(&self, a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
        self.sum(a, &self.neg(b)?)
    }

    /// Formal sum of a list; the empty sum is zero in `ctx`.
    pub fn formal_sum(&self, terms: &[TruncatedSeries], ctx: &Ctx) -> Result<TruncatedSeries> {
        let mut acc = TruncatedSeries::zero(ctx);
        for t in terms {
            acc = self.sum(&acc, t)?;
        }
        Ok(acc)
    }

    /// `[c](a)`.
    pub fn int_series(&self, c: i64, a: &TruncatedSeries) -> Result<TruncatedSeries> {
        check_arg(a)?;
        let mut acc = TruncatedSeries::zero(a.ctx());
        for _ in 0..c.unsigned_abs() {
            acc = self.sum(a, &acc)?;
        }
        if c < 0 {
            acc = self.neg(&acc)?;
        }
        Ok(acc)
    }

    /// `[p](a)`.
    pub fn p_of(&self, a: &TruncatedSeries) -> Result<TruncatedSeries> {
        check_arg(a)?;
        fit(&self.p_series, a.ctx().trunc()).substitute(std::slice::from_ref(a))
    }

    /// `π_k(a)`.
    pub fn pi_of(&self, k: u32, a: &TruncatedSeries) -> Result<TruncatedSeries> {
        check_arg(a)?;
        let pi = self.pis.get(k as usize).ok_or_else(|| Error::Config(format!("no π_{k}")))?;
        fit(pi, a.ctx().trunc()).substitute(std::slice::from_ref(a))
    }
}

/// Default truncation degree `p^m(p^w−1)/(p−1) + p^n + 2`, `w = n+1−m`.
pub fn default_trunc(p: u64, m: u32, n: u32) -> u32 {
    let w = n + 1 - m;
    (p.pow(m) * (p.pow(w) - 1) / (p - 1) + p.pow(n) + 2) as u32
}

/// Default p-adic precision: 6 for `m = 0`, 1 otherwise.
pub fn default_prec(m: u32) -> u32 {
    if m == 0 {
        6
    } else {
        1
    }
}

/// Convenience used by tests and the CLI: the scalar kind of `E*`.
pub fn e_star_kind(m: u32) -> ScalarKind {
    if m == 0 {
        ScalarKind::IntegersMod
    } else {
        ScalarKind::PrimeField
    }
}
