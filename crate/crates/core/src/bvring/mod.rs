//! The rings `E*BV_k = E*[[x_0..x_{k−1}]]/([p](x_i))` and the series
//! `φ_j`, `α`, `α′`, `χ_j` built from the pushed formal group law.
//!
//! Equalities in these quotients are never decided by normal forms. They
//! are certified by explicit ideal-membership witnesses found on finite
//! graded slices (see [`slice`]) and re-checked by multiplication.

pub mod aring;
pub mod certificate;
pub mod slice;

use std::fmt;

use crate::coeffring::{CoeffSpec, VPolynomial};
use crate::error::{config, internal, Result};
use crate::fgl::{build_fgl, default_prec, default_trunc, Flavor, FormalGroupLaw, PushedLaw};
use crate::scalar::{is_prime, Scalar};
use crate::series::{Ctx, SeriesContext, TruncatedSeries};

pub use certificate::{CertificateDoc, MembershipCertificate, CERTIFICATE_FORMAT_VERSION};
pub use slice::{ideal_member, Comparison, KernelReport, Membership, QuotientSlice, SliceBasis};

/// Parameters of `E* = BP⟨m,n⟩*` and its truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Params {
    pub p: u64,
    pub m: u32,
    pub n: u32,
    pub flavor: Flavor,
    /// Truncation degree `D`.
    pub trunc: u32,
    /// p-adic precision `N` (only used when `m = 0`).
    pub prec: u32,
}

impl Params {
    pub fn new(p: u64, m: u32, n: u32, flavor: Flavor, trunc: Option<u32>, prec: Option<u32>) -> Result<Params> {
        if !is_prime(p) {
            return config(format!("{p} is not prime"));
        }
        if m > n {
            return config(format!("need m ≤ n, got m = {m}, n = {n}"));
        }
        if n == 0 {
            return config("need n ≥ 1");
        }
        // Degrees are u32; p^{n+1} bounds every degree the defaults produce.
        if p.checked_pow(n + 1).map_or(true, |q| q > u32::MAX as u64 / 4) {
            return config(format!("p = {p}, n = {n} is too large"));
        }
        let trunc = trunc.unwrap_or_else(|| default_trunc(p, m, n));
        let prec = prec.unwrap_or_else(|| default_prec(m));
        if trunc == 0 || prec == 0 {
            return config("truncation degree and precision must be at least 1");
        }
        Ok(Params { p, m, n, flavor, trunc, prec })
    }

    /// `w = n + 1 − m`.
    pub fn w(&self) -> u32 {
        self.n + 1 - self.m
    }

    /// `p^e`.
    pub fn pow(&self, e: u32) -> u64 {
        self.p.pow(e)
    }

    /// Cohomological degree `2p^m(p^w−1)/(p−1)` of `α` and `α′`.
    pub fn alpha_degree(&self) -> i64 {
        (2 * self.pow(self.m) * (self.pow(self.w()) - 1) / (self.p - 1)) as i64
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} m={} n={} {} D={} N={}", self.p, self.m, self.n, self.flavor, self.trunc, self.prec)
    }
}

/// The computational engine for one parameter set.
#[derive(Clone, Debug)]
pub struct Engine {
    pub params: Params,
    pub law: PushedLaw,
}

impl Engine {
    /// Builds the law to degree `max(D, law_trunc)`.
    pub fn new(params: Params, law_trunc: u32) -> Result<Engine> {
        let fgl = build_fgl(params.p, params.n, params.flavor, law_trunc.max(params.trunc), params.prec)?;
        Self::from_law(params, &fgl)
    }

    pub fn from_law(params: Params, fgl: &FormalGroupLaw) -> Result<Engine> {
        if (fgl.p, fgl.n, fgl.flavor, fgl.prec) != (params.p, params.n, params.flavor, params.prec) {
            return config("formal group law does not match the parameters");
        }
        if fgl.trunc < params.trunc {
            return config("formal group law is truncated below D");
        }
        Ok(Engine { params, law: fgl.push(params.m)? })
    }

    pub fn coeffs(&self) -> CoeffSpec {
        self.law.coeffs()
    }

    /// Largest truncation any context of this engine may use.
    pub fn max_trunc(&self) -> u32 {
        self.law.trunc()
    }

    fn checked_ctx(&self, names: Vec<String>, trunc: u32) -> Ctx {
        assert!(trunc <= self.max_trunc(), "context truncation {trunc} exceeds the law's {}", self.max_trunc());
        SeriesContext::new(names, trunc, self.coeffs())
    }

    /// `E*[[x_0..x_{k−1}]]` truncated at `trunc`.
    pub fn x_ctx(&self, k: u32, trunc: u32) -> Ctx {
        self.checked_ctx((0..k).map(|i| format!("x{i}")).collect(), trunc)
    }

    /// `E*[[x_0..x_{k−1}, t]]`; `t` is the last variable.
    pub fn xt_ctx(&self, k: u32, trunc: u32) -> Ctx {
        let mut names: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
        names.push("t".into());
        self.checked_ctx(names, trunc)
    }

    /// `[p](x_i)` for the given variable, by relabelling the p-series.
    pub fn p_series_at(&self, ctx: &Ctx, var: usize) -> Result<TruncatedSeries> {
        self.law.p_series.embed(ctx, &[var])
    }

    /// `π_i(x_var)`.
    pub fn pi_at(&self, i: u32, ctx: &Ctx, var: usize) -> Result<TruncatedSeries> {
        self.law.pis[i as usize].embed(ctx, &[var])
    }

    /// The generators `[p](x_0), …, [p](x_{k−1})`.
    pub fn p_gens(&self, ctx: &Ctx, k: u32) -> Result<Vec<TruncatedSeries>> {
        (0..k as usize).map(|j| self.p_series_at(ctx, j)).collect()
    }

    /// `v_i` as a scalar series, with `v_0 = p`.
    pub fn v_series(&self, ctx: &Ctx, i: u32) -> Result<TruncatedSeries> {
        let spec = ctx.coeffs();
        let c = if i == 0 { VPolynomial::from_i64(spec, self.params.p as i64) } else { VPolynomial::var(spec, i)? };
        Ok(TruncatedSeries::constant(ctx, c))
    }

    /// `[λ_0](x_0) +_F ⋯ +_F [λ_{j−1}](x_{j−1})`.
    pub fn lambda_series(&self, lambda: &[u64], ctx: &Ctx) -> Result<TruncatedSeries> {
        if lambda.len() > ctx.nvars() {
            return config("more coefficients than variables");
        }
        let mut acc = TruncatedSeries::zero(ctx);
        for (i, &c) in lambda.iter().enumerate() {
            let c = c % self.params.p;
            if c != 0 {
                let term = self.law.int_series(c as i64, &TruncatedSeries::var(ctx, i))?;
                acc = self.law.sum(&acc, &term)?;
            }
        }
        Ok(acc)
    }

    /// `[λ](x)` for every `λ ∈ F_p^j`, in the order of [`lambda_vectors`].
    pub fn lambda_table(&self, j: u32, ctx: &Ctx) -> Result<Vec<TruncatedSeries>> {
        let p = self.params.p;
        let mut table = vec![TruncatedSeries::zero(ctx)];
        for i in 0..j as usize {
            let x = TruncatedSeries::var(ctx, i);
            let mut mults = vec![TruncatedSeries::zero(ctx)];
            for c in 1..p {
                mults.push(self.law.sum(&mults[c as usize - 1], &x)?);
            }
            let mut next = Vec::with_capacity(table.len() * p as usize);
            for mult in &mults {
                for old in &table {
                    next.push(self.law.sum(old, mult)?);
                }
            }
            table = next;
        }
        Ok(table)
    }

    /// Inner truncation for a series that will be raised to the `p^m`-th
    /// power by Frobenius.
    fn inner_ctx(&self, ctx: &Ctx) -> Ctx {
        if self.params.m == 0 {
            ctx.clone()
        } else {
            ctx.with_trunc(ctx.trunc() / self.params.pow(self.params.m) as u32)
        }
    }

    fn lift(&self, s: &TruncatedSeries, ctx: &Ctx) -> Result<TruncatedSeries> {
        if self.params.m == 0 {
            Ok(s.clone())
        } else {
            s.frobenius_lift(ctx, self.params.m)
        }
    }

    /// `φ_j(t) = Π_{λ ∈ F_p^j} (t −_F [λ](x))^{p^m}`, with `x_0..x_{j−1}`
    /// the first `j` variables of `ctx` and `t` the variable `t_var`.
    pub fn phi(&self, j: u32, ctx: &Ctx, t_var: usize) -> Result<TruncatedSeries> {
        if j as usize > t_var || t_var >= ctx.nvars() {
            return config("φ_j needs j coordinate variables before t");
        }
        let inner = self.inner_ctx(ctx);
        let t = TruncatedSeries::var(&inner, t_var);
        let mut prod = TruncatedSeries::one(&inner);
        for l in self.lambda_table(j, &inner)? {
            prod = prod.times(&self.law.diff(&t, &l)?);
        }
        self.lift(&prod, ctx)
    }

    /// `χ_j = Π_{i<j} φ_i(x_i)`.
    pub fn chi(&self, j: u32, ctx: &Ctx) -> Result<TruncatedSeries> {
        let mut out = TruncatedSeries::one(ctx);
        for i in 0..j {
            out = out.times(&self.phi(i, ctx, i as usize)?);
        }
        Ok(out)
    }

    /// `α` from both formulas, with a certificate that they agree in
    /// `E*BV_w`.
    pub fn alpha(&self) -> Result<Alpha> {
        let w = self.params.w();
        let ctx = self.x_ctx(w, self.params.trunc);
        let from_phi = self.chi(w, &ctx)?;
        let inner = self.inner_ctx(&ctx);
        let table = self.lambda_table(w, &inner)?;
        let mut prod = TruncatedSeries::one(&inner);
        for (lambda, l) in lambda_vectors(self.params.p, w).iter().zip(&table) {
            if lambda.iter().rev().find(|&&c| c != 0) == Some(&1) {
                prod = prod.times(l);
            }
        }
        let from_lines = self.lift(&prod, &ctx)?;
        let gens = self.p_gens(&ctx, w)?;
        let d_eff = slice::default_d_eff(&ctx, &gens);
        let agreement = match ideal_member(&from_phi.minus(&from_lines), &gens, d_eff)? {
            Membership::Found(c) => c,
            Membership::NotFound => return internal("the two formulas for α disagree in E*BV_w"),
        };
        Ok(Alpha { alpha: from_phi, from_lines, agreement })
    }

    /// The matrix `(π_i(x_j))` for `m ≤ i ≤ n`, `j < w`.
    pub fn pi_matrix(&self, ctx: &Ctx) -> Result<Vec<Vec<TruncatedSeries>>> {
        let w = self.params.w() as usize;
        (self.params.m..=self.params.n).map(|i| (0..w).map(|j| self.pi_at(i, ctx, j)).collect()).collect()
    }

    /// `α′ = det(π_i(x_j))`.
    pub fn alpha_prime(&self) -> Result<TruncatedSeries> {
        let ctx = self.x_ctx(self.params.w(), self.params.trunc);
        Ok(determinant(&self.pi_matrix(&ctx)?, &ctx))
    }

    /// Certificate for `v_i·α′ = Σ_j (−1)^{i+j} [p](x_j)·M_ij` in `E*BV_w`.
    pub fn v_alpha_prime_certificate(&self, i: u32) -> Result<MembershipCertificate> {
        let (m, n, w) = (self.params.m, self.params.n, self.params.w() as usize);
        if i < m || i > n {
            return config(format!("v_{i} is not a generator of E* (need {m} ≤ i ≤ {n})"));
        }
        let ctx = self.x_ctx(w as u32, self.params.trunc);
        let matrix = self.pi_matrix(&ctx)?;
        let row = (i - m) as usize;
        let target = self.v_series(&ctx, i)?.times(&determinant(&matrix, &ctx));
        let gens = self.p_gens(&ctx, w as u32)?;
        let multipliers = (0..w)
            .map(|j| {
                let minor = determinant(&minor(&matrix, row, j), &ctx);
                if (row + j) % 2 == 1 {
                    minor.neg()
                } else {
                    minor
                }
            })
            .collect();
        let d_eff = slice::default_d_eff(&ctx, &gens);
        let cert = MembershipCertificate::new(target, gens, multipliers, d_eff)?;
        if !cert.recheck() {
            return internal(format!("cofactor expansion for v_{i}·α′ does not re-verify"));
        }
        Ok(cert)
    }
}

/// `α` as computed by [`Engine::alpha`].
#[derive(Clone, Debug)]
pub struct Alpha {
    /// `Π_{j<w} φ_j(x_j)`, the returned value.
    pub alpha: TruncatedSeries,
    /// `Π [λ](x)^{p^m}` over `λ` with last nonzero entry 1.
    pub from_lines: TruncatedSeries,
    /// Witness that the two differ by an element of `([p](x_j))`.
    pub agreement: MembershipCertificate,
}

/// All `λ ∈ F_p^j`, with `λ_0` varying fastest.
pub fn lambda_vectors(p: u64, j: u32) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..j {
        let mut next = Vec::with_capacity(out.len() * p as usize);
        for c in 0..p {
            for old in &out {
                let mut v: Vec<u64> = old.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn minor(matrix: &[Vec<TruncatedSeries>], row: usize, col: usize) -> Vec<Vec<TruncatedSeries>> {
    matrix
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != row)
        .map(|(_, rv)| rv.iter().enumerate().filter(|&(c, _)| c != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Leibniz expansion; the empty determinant is 1.
pub fn determinant(matrix: &[Vec<TruncatedSeries>], ctx: &Ctx) -> TruncatedSeries {
    if matrix.is_empty() {
        return TruncatedSeries::one(ctx);
    }
    let mut out = TruncatedSeries::zero(ctx);
    for (c, entry) in matrix[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let term = entry.times(&determinant(&minor(matrix, 0, c), ctx));
        out = if c % 2 == 0 { out.plus(&term) } else { out.minus(&term) };
    }
    out
}

/// Coefficients of a series over `F_p` with no generators left, as a map
/// from exponent vectors to residues. Fails if a generator survives.
pub fn residue_map(s: &TruncatedSeries) -> Result<std::collections::BTreeMap<Vec<u32>, u64>> {
    let mut out = std::collections::BTreeMap::new();
    for (x, c) in s.terms() {
        for (v, a) in c.terms() {
            if !v.is_one() {
                return internal("series still involves the generators v_i");
            }
            let Scalar::Mod(a) = a else { return internal("expected residues") };
            out.insert(x.exponents().collect(), *a);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
