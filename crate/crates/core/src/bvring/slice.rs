//! Graded slices and the exact linear algebra run on them.
//!
//! A slice of degree `d` with cap `c` is the finite set of monomials
//! `v^a x^b` with `2|b| + Σ a_i·|v_i| = d` and `|b| ≤ c`. Since every
//! generator `v_i` has strictly negative degree, each slice is finite.

use std::collections::HashMap;

use crate::coeffring::{CoeffSpec, VMonomial, VPolynomial};
use crate::error::{config, internal, precondition, Result};
use crate::linalg::{howell_form, solve_with, Solution, SparseMatrix, SparseVec};
use crate::scalar::Scalar;
use crate::series::{Ctx, TruncatedSeries, XMonomial};

use super::certificate::MembershipCertificate;

pub type SliceMonomial = (XMonomial, VMonomial);

#[derive(Clone, Debug)]
pub struct SliceBasis {
    pub degree: i64,
    pub cap: u32,
    pub monomials: Vec<SliceMonomial>,
    index: HashMap<SliceMonomial, usize>,
}

impl SliceBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, m: &SliceMonomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of a homogeneous series; terms above the cap are ignored.
    pub fn coords(&self, s: &TruncatedSeries) -> Result<SparseVec> {
        let mut out = Vec::new();
        for (x, c) in s.terms() {
            if x.degree() > self.cap {
                continue;
            }
            for (v, a) in c.terms() {
                let Some(i) = self.index_of(&(x.clone(), v.clone())) else {
                    return precondition(format!("series term is not of degree {}", self.degree));
                };
                out.push((i, scalar_value(a)));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// The series with the given coordinates.
    pub fn series(&self, ctx: &Ctx, coords: &SparseVec) -> TruncatedSeries {
        let spec = ctx.coeffs();
        let terms = coords.iter().map(|&(i, a)| {
            let (x, v) = &self.monomials[i];
            let c = VPolynomial::from_terms(spec, vec![(v.clone(), Scalar::Mod(a))]).expect("slice monomials fit the spec");
            (x.clone(), c)
        });
        TruncatedSeries::from_terms(ctx, terms).expect("slice monomials fit the context")
    }
}

fn scalar_value(a: &Scalar) -> u64 {
    match a {
        Scalar::Mod(x) => *x,
        Scalar::Rat(_) => unreachable!("slices are only built over finite rings"),
    }
}

/// All v-monomials over `spec` of weight `w`, where `v_i` weighs `p^i − 1`.
fn v_monomials(spec: CoeffSpec, w: u64) -> Vec<VMonomial> {
    let p = spec.p();
    let gens: Vec<(u32, u64)> = (spec.lo..=spec.hi).map(|i| (i, p.pow(i) - 1)).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(gens: &[(u32, u64)], w: u64, cur: &mut Vec<(u32, u32)>, out: &mut Vec<VMonomial>) {
        let Some((&(i, wi), rest)) = gens.split_first() else {
            if w == 0 {
                out.push(VMonomial::from_pairs(cur));
            }
            return;
        };
        let mut e = 0u32;
        loop {
            let used = wi * e as u64;
            if used > w {
                break;
            }
            if e > 0 {
                cur.push((i, e));
            }
            rec(rest, w - used, cur, out);
            if e > 0 {
                cur.pop();
            }
            e += 1;
        }
    }
    rec(&gens, w, &mut cur, &mut out);
    out
}

/// All exponent vectors of total degree `e` in `k` variables.
fn x_monomials(k: usize, e: u32) -> Vec<XMonomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<XMonomial>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(XMonomial::from_exponents(cur));
            return;
        }
        for a in (0..=left).rev() {
            cur[i] = a;
            rec(i + 1, left - a, cur, out);
        }
        cur[i] = 0;
    }
    if k == 0 {
        if e == 0 {
            out.push(XMonomial::from_exponents(&[]));
        }
        return out;
    }
    rec(0, e, &mut cur, &mut out);
    out
}

/// Enumerates the slice of degree `d` and x-degree cap `cap` over the
/// variables and coefficients of `ctx`.
pub fn slice_basis(ctx: &Ctx, d: i64, cap: u32) -> SliceBasis {
    let spec = ctx.coeffs();
    let mut monomials = Vec::new();
    if d % 2 == 0 {
        for e in 0..=cap {
            let w2 = 2 * e as i64 - d;
            if w2 < 0 {
                continue;
            }
            let vms = v_monomials(spec, (w2 / 2) as u64);
            if vms.is_empty() {
                continue;
            }
            for x in x_monomials(ctx.nvars(), e) {
                for v in &vms {
                    monomials.push((x.clone(), v.clone()));
                }
            }
        }
    }
    monomials.sort();
    let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    SliceBasis { degree: d, cap, monomials, index }
}

fn homogeneous_degree(g: &TruncatedSeries, what: &str) -> Result<Option<i64>> {
    if g.is_zero() {
        return Ok(None);
    }
    match g.degree() {
        Some(d) => Ok(Some(d)),
        None => precondition(format!("{what} is not homogeneous")),
    }
}

/// Columns `μ·g_j` spanning the image of the ideal in `basis`.
///
/// Returns the columns together with their `(generator, μ)` labels.
pub fn ideal_columns(gens: &[TruncatedSeries], basis: &SliceBasis, ctx: &Ctx) -> Result<(Vec<SparseVec>, Vec<(usize, SliceMonomial)>)> {
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for (j, g) in gens.iter().enumerate() {
        let Some(dg) = homogeneous_degree(g, "generator")? else { continue };
        let og = g.order().unwrap_or(0);
        if og > basis.cap {
            continue;
        }
        let mu_basis = slice_basis(ctx, basis.degree - dg, basis.cap - og);
        for mu in &mu_basis.monomials {
            cols.push(monomial_times(mu, g, basis)?);
            labels.push((j, mu.clone()));
        }
    }
    Ok((cols, labels))
}

/// Coordinates of `μ·g` in `basis`.
pub fn monomial_times(mu: &SliceMonomial, g: &TruncatedSeries, basis: &SliceBasis) -> Result<SparseVec> {
    let ring = g.coeffs().ring;
    let mut col: HashMap<usize, u64> = HashMap::new();
    let (mx, mv) = mu;
    let cap_left = basis.cap.saturating_sub(mx.degree());
    for (x, c) in g.terms() {
        if x.degree() > cap_left {
            break;
        }
        let xx = x.mul(mx);
        for (v, a) in c.terms() {
            let key = (xx.clone(), v.mul(mv));
            let Some(i) = basis.index_of(&key) else {
                return internal("product left its slice");
            };
            let e = col.entry(i).or_insert(0);
            *e = scalar_value(&ring.add(&Scalar::Mod(*e), a));
        }
    }
    let mut out: SparseVec = col.into_iter().filter(|&(_, v)| v != 0).collect();
    out.sort_unstable();
    Ok(out)
}

fn matrix_from_columns(ctx: &Ctx, nrows: usize, cols: &[SparseVec]) -> Result<SparseMatrix> {
    let entries = cols.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)));
    SparseMatrix::from_triplets(&ctx.coeffs().ring, nrows, cols.len(), entries)
}

/// Result of [`ideal_member`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Found(MembershipCertificate),
    /// The slice system is inconsistent: no certificate within the cutoff.
    NotFound,
}

impl Membership {
    pub fn certificate(&self) -> Option<&MembershipCertificate> {
        match self {
            Membership::Found(c) => Some(c),
            Membership::NotFound => None,
        }
    }
}

/// Default effective cutoff `D − max_j ord(g_j)`.
pub fn default_d_eff(ctx: &Ctx, gens: &[TruncatedSeries]) -> u32 {
    let max_ord = gens.iter().filter_map(TruncatedSeries::order).max().unwrap_or(0);
    ctx.trunc().saturating_sub(max_ord)
}

/// Decides whether `z` lies in the ideal generated by `gens` modulo terms
/// of x-degree above `d_eff`, returning explicit multipliers if so.
pub fn ideal_member(z: &TruncatedSeries, gens: &[TruncatedSeries], d_eff: u32) -> Result<Membership> {
    let ctx = z.ctx().clone();
    if d_eff > ctx.trunc() {
        return config(format!("effective cutoff {d_eff} exceeds the truncation {}", ctx.trunc()));
    }
    if gens.iter().any(|g| g.ctx() != &ctx) {
        return config("generators live in a different context");
    }
    if ctx.coeffs().ring.modulus().is_none() {
        return config("membership is decided over finite coefficient rings only");
    }
    let zt = z.truncated(d_eff);
    let zeros = vec![TruncatedSeries::zero(&ctx); gens.len()];
    let Some(d) = homogeneous_degree(&zt, "target")? else {
        let cert = MembershipCertificate::new(z.clone(), gens.to_vec(), zeros, d_eff)?;
        return Ok(Membership::Found(cert));
    };
    let basis = slice_basis(&ctx, d, d_eff);
    let (cols, labels) = ideal_columns(gens, &basis, &ctx)?;
    let a = matrix_from_columns(&ctx, basis.len(), &cols)?;
    let b = crate::linalg::densify(&basis.coords(&zt)?, basis.len());
    let Solution::Solved { particular, .. } = solve_with(&a, &b, false)? else {
        return Ok(Membership::NotFound);
    };
    let spec = ctx.coeffs();
    let mut multipliers = zeros;
    for (col, value) in particular {
        let (j, (x, v)) = &labels[col];
        let c = VPolynomial::from_terms(spec, vec![(v.clone(), Scalar::Mod(value))])?;
        multipliers[*j] = multipliers[*j].plus(&TruncatedSeries::monomial(&ctx, x.clone(), c));
    }
    let cert = MembershipCertificate::new(z.clone(), gens.to_vec(), multipliers, d_eff)?;
    if !cert.recheck() {
        return internal("slice solution does not re-verify");
    }
    Ok(Membership::Found(cert))
}

/// Image of an ideal in one slice.
#[derive(Clone, Debug)]
pub struct QuotientSlice {
    pub basis: SliceBasis,
    /// Canonical (Howell) form of the span of the ideal's columns.
    pub form: Vec<SparseVec>,
    pub rank: usize,
    /// Length of the quotient; over `F_p` its dimension.
    pub quotient_length: usize,
    /// Slice monomials that are not pivots of `form`.
    pub standard_monomials: Vec<SliceMonomial>,
}

pub fn quotient_slice(ctx: &Ctx, gens: &[TruncatedSeries], d: i64, cap: u32) -> Result<QuotientSlice> {
    let basis = slice_basis(ctx, d, cap);
    let (cols, _) = ideal_columns(gens, &basis, ctx)?;
    let ring = ctx.coeffs().ring;
    let form = howell_form(cols, ring.p, ring.prec);
    let prec = ring.prec as usize;
    let pivots: Vec<usize> = form.iter().map(|r| r[0].0).collect();
    let mut taken = 0usize;
    for r in &form {
        let e = crate::scalar::valuation(r[0].1, ring.p, ring.prec) as usize;
        taken += prec - e;
    }
    let quotient_length = basis.len() * prec - taken;
    let standard_monomials = basis.monomials.iter().enumerate().filter(|(i, _)| !pivots.contains(i)).map(|(_, m)| m.clone()).collect();
    Ok(QuotientSlice { rank: form.len(), form, quotient_length, standard_monomials, basis })
}

/// Canonical form of the span of some vectors.
pub fn span_form(ctx: &Ctx, vectors: Vec<SparseVec>) -> Vec<SparseVec> {
    let ring = ctx.coeffs().ring;
    howell_form(vectors, ring.p, ring.prec)
}

/// Outcome of comparing a computed submodule with an expected one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    Equal,
    /// The expected submodule is strictly contained in the computed one.
    ForwardOnly,
    Mismatch,
}

pub fn compare_spans(ctx: &Ctx, computed: Vec<SparseVec>, expected: Vec<SparseVec>) -> Comparison {
    let hc = span_form(ctx, computed.clone());
    let he = span_form(ctx, expected.clone());
    if hc == he {
        return Comparison::Equal;
    }
    let mut both = computed;
    both.extend(expected);
    if span_form(ctx, both) == hc {
        Comparison::ForwardOnly
    } else {
        Comparison::Mismatch
    }
}

/// Report of a kernel computation on one slice.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct KernelReport {
    pub degree: i64,
    pub window: u32,
    pub internal_cap: u32,
    pub slice_dim: usize,
    pub kernel_rank: usize,
    pub expected_rank: usize,
    pub comparison: Comparison,
}

/// Computes `{y : mult·y ∈ (gens)}` on the slice of degree `d`, with
/// unknowns up to x-degree `window + margin`, projects it to x-degree
/// `≤ window` and compares it with the span of `expected` there.
pub fn kernel_check(
    ctx: &Ctx,
    mult: &TruncatedSeries,
    gens: &[TruncatedSeries],
    expected: &[TruncatedSeries],
    d: i64,
    window: u32,
    margin: u32,
) -> Result<KernelReport> {
    let Some(dm) = homogeneous_degree(mult, "multiplier")? else {
        return config("multiplier is zero");
    };
    let om = mult.order().unwrap_or(0);
    let ycap = window + margin;
    let tcap = ycap + om;
    if tcap > ctx.trunc() {
        return config(format!("kernel check needs truncation {tcap}, context has {}", ctx.trunc()));
    }
    let ybasis = slice_basis(ctx, d, ycap);
    let tbasis = slice_basis(ctx, d + dm, tcap);
    let mut cols: Vec<SparseVec> = Vec::with_capacity(ybasis.len());
    for mu in &ybasis.monomials {
        cols.push(monomial_times(mu, mult, &tbasis)?);
    }
    let ny = cols.len();
    let (gcols, _) = ideal_columns(gens, &tbasis, ctx)?;
    cols.extend(gcols);
    let a = matrix_from_columns(ctx, tbasis.len(), &cols)?;
    let zero = vec![0u64; tbasis.len()];
    let Solution::Solved { kernel, .. } = solve_with(&a, &zero, true)? else {
        return internal("homogeneous system reported inconsistent");
    };
    let wbasis = slice_basis(ctx, d, window);
    let project = |v: &SparseVec| -> SparseVec {
        let mut out: SparseVec =
            v.iter().filter(|&&(c, _)| c < ny).filter_map(|&(c, x)| wbasis.index_of(&ybasis.monomials[c]).map(|i| (i, x))).collect();
        out.sort_unstable();
        out
    };
    let computed: Vec<SparseVec> = kernel.iter().map(project).filter(|v| !v.is_empty()).collect();
    let (exp_cols, _) = ideal_columns(expected, &wbasis, ctx)?;
    let kernel_rank = span_form(ctx, computed.clone()).len();
    let expected_rank = span_form(ctx, exp_cols.clone()).len();
    let comparison = compare_spans(ctx, computed, exp_cols);
    Ok(KernelReport { degree: d, window, internal_cap: ycap, slice_dim: wbasis.len(), kernel_rank, expected_rank, comparison })
}
