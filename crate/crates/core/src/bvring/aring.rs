//! The quotient rings `A(k)*` and the slice checks of the filtration.
//!
//! Step `k` of the chain divides `[p](t)` by `φ_k(t)` over
//! `E*[[x_0..x_{k−1}]]`. The remainder coefficients `c_i` present `A(k)*`,
//! the quotient is `ψ_k`, and the `φ_k`-adic coordinates of `[p](t)` give
//! `θ_k` together with the coefficients that must vanish in `A(k)*`.
//!
//! Every series here is only known to some degree. Each generator carries
//! its accuracy and every certificate reports the cutoff it is valid to.

use serde::Serialize;

use crate::error::{config, Result};
use crate::series::{Ctx, TruncatedSeries, XMonomial};
use crate::weierstrass::{basis_coords, divrem, t_coefficient};

use super::certificate::MembershipCertificate;
use super::slice::{self, compare_spans, ideal_columns, kernel_check, quotient_slice, slice_basis, Comparison, KernelReport, Membership};
use super::{Engine, Params};

/// Default window `W`: the x-degree up to which chain data is trusted.
pub const DEFAULT_CHAIN_WINDOW: u32 = 12;

/// Default extra x-degree given to kernel unknowns beyond the window.
///
/// A spurious kernel element only shows its obstruction once the `v_n`
/// term of `[p]`, which sits `p^n − p^m` degrees above the `v_m` term, is
/// inside the truncation; the margin covers that gap with some slack.
pub fn default_kernel_margin(params: &Params) -> u32 {
    (params.pow(params.n) - params.pow(params.m)) as u32 + 4
}

/// `D_chain(k) = max(D, p^{m+k} + W)`.
pub fn chain_trunc(params: &Params, k: u32, window: u32) -> u32 {
    params.trunc.max(params.pow(params.m + k) as u32 + window)
}

/// x-order of `χ_j = Π_{i<j} φ_i`.
pub fn chi_order(params: &Params, j: u32) -> u32 {
    (0..j).map(|i| params.pow(params.m + i) as u32).sum()
}

/// Truncation the law must be built to for the whole chain and the slice
/// checks with the given window and margin.
pub fn required_law_trunc(params: &Params, window: u32, margin: u32) -> u32 {
    let w = params.w();
    chain_trunc(params, w, window).max(window + margin + chi_order(params, w))
}

/// A generator of `A(k)*` together with the degree it is accurate to.
#[derive(Clone, Debug)]
pub struct Generator {
    pub series: TruncatedSeries,
    pub accuracy: u32,
}

/// One step of the `A(k)*` chain.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub k: u32,
    /// `D_chain(k)`.
    pub trunc: u32,
    /// `E*[[x_0..x_{k−1}, t]]`.
    pub ctx: Ctx,
    pub phi: TruncatedSeries,
    pub psi: TruncatedSeries,
    pub psi_accuracy: u32,
    pub remainder: TruncatedSeries,
    /// `c_0..c_{d−1}` over `E*[[x_0..x_{k−1}]]`.
    pub c: Vec<TruncatedSeries>,
    /// `φ_k`-adic coordinates `b_i(y)` of `[p](t)`; the slot of `t` holds `y`.
    pub coords: Vec<TruncatedSeries>,
    /// `θ_k(y) = b_0(y) − b_0(0)`.
    pub theta: TruncatedSeries,
}

impl ChainStep {
    /// `p^{m+k}`, the Weierstrass degree of `φ_k`.
    pub fn degree(&self) -> u32 {
        self.coords.len() as u32
    }

    pub fn x_ctx(&self) -> Ctx {
        let names = self.ctx.names()[..self.k as usize].to_vec();
        crate::series::SeriesContext::new(names, self.trunc, self.ctx.coeffs())
    }

    /// Generators of the ideal of `A(k)*`: `[p](x_j)` then the nonzero `c_i`.
    pub fn ideal(&self, engine: &Engine) -> Result<Vec<Generator>> {
        let ctx = self.x_ctx();
        let mut out: Vec<Generator> =
            engine.p_gens(&ctx, self.k)?.into_iter().map(|series| Generator { series, accuracy: self.trunc }).collect();
        for (i, c) in self.c.iter().enumerate() {
            if !c.is_zero() {
                out.push(Generator { series: c.clone(), accuracy: self.trunc - i as u32 });
            }
        }
        Ok(out)
    }

    /// Whether every `c_i` vanishes modulo `I_{n+1}`.
    pub fn remainder_vanishes_mod_top_ideal(&self, params: &Params) -> bool {
        self.c.iter().all(|c| c.reduce_mod_ideal(params.n + 1).is_zero())
    }
}

/// Drops the last variable of a series whose terms do not involve it.
fn drop_last(s: &TruncatedSeries, target: &Ctx) -> TruncatedSeries {
    let k = target.nvars();
    s.map_monomials(target, |m| {
        let e: Vec<u32> = m.exponents().take(k).collect();
        Some(XMonomial::from_exponents(&e))
    })
}

/// Appends a zero exponent for `t`.
fn add_last(s: &TruncatedSeries, target: &Ctx) -> TruncatedSeries {
    s.map_monomials(target, |m| {
        let mut e: Vec<u32> = m.exponents().collect();
        e.push(0);
        Some(XMonomial::from_exponents(&e))
    })
}

/// Computes step `k` of the chain.
pub fn chain_step(engine: &Engine, k: u32, window: u32) -> Result<ChainStep> {
    let params = engine.params;
    if k > params.w() {
        return config(format!("k = {k} exceeds w = {}", params.w()));
    }
    let trunc = chain_trunc(&params, k, window);
    if trunc > engine.max_trunc() {
        return config(format!("the chain needs the law to degree {trunc}"));
    }
    let ctx = engine.xt_ctx(k, trunc);
    let t = k as usize;
    let d = params.pow(params.m + k) as u32;
    let phi = engine.phi(k, &ctx, t)?;
    let ps = engine.p_series_at(&ctx, t)?;
    let (psi, remainder) = divrem(&ps, &phi, t, d)?;
    let xctx = engine.x_ctx(k, trunc);
    let c = (0..d).map(|i| drop_last(&t_coefficient(&remainder, t, i), &xctx)).collect();
    let coords = basis_coords(&ps, &phi, t, d)?;
    let theta = coords[0].filter_terms(|m| m.exponent(t) > 0);
    Ok(ChainStep { k, trunc, ctx, phi, psi, psi_accuracy: trunc - d, remainder, c, coords, theta })
}

/// The chain `A(0)*, …, A(w)*`.
pub fn chain(engine: &Engine, window: u32) -> Result<Vec<ChainStep>> {
    (0..=engine.params.w()).map(|k| chain_step(engine, k, window)).collect()
}

/// Outcome of certifying `[p](t) ≡ θ_k(φ_k(t))` modulo the ideal of `A(k)*`.
#[derive(Clone, Debug)]
pub struct ThetaCertificate {
    /// Present when every coordinate was certified.
    pub certificate: Option<MembershipCertificate>,
    /// Coordinates `(i, j)` for which no multiplier was found within cutoff.
    pub undecided: Vec<(u32, u32)>,
    pub queries: usize,
}

/// Certifies that each coordinate `e_ij` (the `y^j` coefficient of `b_i`,
/// other than those of `θ_k`) lies in the ideal of `A(k)*`, then assembles
/// a single certificate in `E*[[x, t]]`.
pub fn theta_certificate(engine: &Engine, step: &ChainStep) -> Result<ThetaCertificate> {
    let t = step.k as usize;
    let d = step.degree();
    let gens = step.ideal(engine)?;
    let xctx = step.x_ctx();
    let ctx = &step.ctx;
    let mut mults = vec![TruncatedSeries::zero(ctx); gens.len()];
    let np = step.k as usize;
    let mut undecided = Vec::new();
    let mut queries = 0;
    let mut phi_pow = TruncatedSeries::one(ctx);
    let mut j = 0u32;
    while j * d <= step.trunc {
        for i in 0..d {
            if (i == 0 && j > 0) || j * d + i > step.trunc {
                continue;
            }
            let e = drop_last(&t_coefficient(&step.coords[i as usize], t, j), &xctx);
            if e.is_zero() {
                continue;
            }
            let shift = crate::weierstrass::t_power(ctx, t, i, crate::coeffring::VPolynomial::one(ctx.coeffs())).times(&phi_pow);
            if j == 0 {
                // e_i0 is the generator c_i itself.
                let g = np + step.c[..i as usize].iter().filter(|c| !c.is_zero()).count();
                mults[g] = mults[g].plus(&shift);
                continue;
            }
            let cutoff = step.trunc - j * d - i;
            let local: Vec<TruncatedSeries> = gens.iter().map(|g| g.series.retruncate(cutoff)).collect::<Result<_>>()?;
            queries += 1;
            match slice::ideal_member(&e.retruncate(cutoff)?, &local, cutoff)? {
                Membership::Found(cert) => {
                    for (g, h) in cert.multipliers.iter().enumerate() {
                        if !h.is_zero() {
                            let h = add_last(h, ctx);
                            mults[g] = mults[g].plus(&h.times(&shift));
                        }
                    }
                }
                Membership::NotFound => undecided.push((i, j)),
            }
        }
        phi_pow = phi_pow.times(&step.phi);
        j += 1;
    }
    if !undecided.is_empty() {
        return Ok(ThetaCertificate { certificate: None, undecided, queries });
    }
    let ps = engine.p_series_at(ctx, t)?;
    let target = ps.minus(&step.theta.substitute_var(t, &step.phi)?);
    let mut d_eff = step.trunc;
    let mut generators = Vec::with_capacity(gens.len());
    for (g, h) in gens.iter().zip(&mults) {
        if let Some(o) = h.order() {
            d_eff = d_eff.min(o + g.accuracy);
        }
        generators.push(add_last(&g.series, ctx));
    }
    let cert = MembershipCertificate::new(target, generators, mults, d_eff)?;
    if !cert.recheck() {
        return crate::error::internal("assembled θ certificate does not re-verify");
    }
    Ok(ThetaCertificate { certificate: Some(cert), undecided, queries })
}

/// Slice-wise comparison of two ideals in one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdealComparison {
    pub degree: i64,
    pub window: u32,
    pub slice_dim: usize,
    pub rank_left: usize,
    pub rank_right: usize,
    pub comparison: Comparison,
}

/// `ψ_i(x_i)` in `E*[[x_0..x_{k−1}]]` at truncation `trunc`.
pub fn psi_at(engine: &Engine, step: &ChainStep, k: u32, trunc: u32) -> Result<TruncatedSeries> {
    let ctx = engine.x_ctx(k, trunc);
    let map: Vec<usize> = (0..=step.k as usize).collect();
    step.psi.embed(&ctx, &map)
}

/// Compares the ideal of `A(k)*` with `([p](x_*)) + (ψ_0(x_0), …, ψ_{k−1}(x_{k−1}))`
/// on the slices of the given degrees, with x-degree cap `window`.
pub fn compare_with_psi(engine: &Engine, steps: &[ChainStep], k: u32, degrees: &[i64], window: u32) -> Result<Vec<IdealComparison>> {
    let step = &steps[k as usize];
    let ctx = engine.x_ctx(k, window);
    let check_acc =
        |acc: u32| if acc < window { config(format!("generator known only to degree {acc} < window {window}")) } else { Ok(()) };
    let mut left = Vec::new();
    for g in step.ideal(engine)? {
        check_acc(g.accuracy)?;
        left.push(g.series.retruncate(window)?.embed(&ctx, &(0..k as usize).collect::<Vec<_>>())?);
    }
    let mut right = engine.p_gens(&ctx, k)?;
    for prev in &steps[..k as usize] {
        check_acc(prev.psi_accuracy)?;
        right.push(psi_at(engine, prev, k, window)?);
    }
    let mut out = Vec::new();
    for &deg in degrees {
        let basis = slice_basis(&ctx, deg, window);
        let (lc, _) = ideal_columns(&left, &basis, &ctx)?;
        let (rc, _) = ideal_columns(&right, &basis, &ctx)?;
        let rank_left = slice::span_form(&ctx, lc.clone()).len();
        let rank_right = slice::span_form(&ctx, rc.clone()).len();
        out.push(IdealComparison {
            degree: deg,
            window,
            slice_dim: basis.len(),
            rank_left,
            rank_right,
            comparison: compare_spans(&ctx, lc, rc),
        });
    }
    Ok(out)
}

/// Membership of `χ_j·ψ_i(x_i)` in `([p](x_0), …, [p](x_{w−1}))` for `i < j`.
pub fn chi_psi_membership(engine: &Engine, steps: &[ChainStep], j: u32, i: u32) -> Result<Membership> {
    let params = engine.params;
    let w = params.w();
    if i >= j || j > w {
        return config("need i < j ≤ w");
    }
    let step = &steps[i as usize];
    let trunc = (chi_order(&params, j) + step.psi_accuracy).min(engine.max_trunc());
    let ctx = engine.x_ctx(w, trunc);
    let target = engine.chi(j, &ctx)?.times(&psi_at(engine, step, w, trunc)?);
    let gens = engine.p_gens(&ctx, w)?;
    slice::ideal_member(&target, &gens, slice::default_d_eff(&ctx, &gens))
}

/// Kernel of multiplication by `χ_j` on `E*BV_w` in degree `d`, compared
/// with the slice of `([p](x_*)) + (ψ_0, …, ψ_{j−1})`.
pub fn annihilator_check(engine: &Engine, steps: &[ChainStep], j: u32, d: i64, window: u32, margin: u32) -> Result<KernelReport> {
    let params = engine.params;
    let w = params.w();
    if j > w {
        return config("need j ≤ w");
    }
    let trunc = window + margin + chi_order(&params, j);
    let ctx = engine.x_ctx(w, trunc);
    let chi = engine.chi(j, &ctx)?;
    let gens = engine.p_gens(&ctx, w)?;
    let mut expected = gens.clone();
    for step in &steps[..j as usize] {
        if step.psi_accuracy < window {
            return config("ψ is not known to the window");
        }
        expected.push(psi_at(engine, step, w, trunc.min(step.trunc))?.embed(&ctx, &(0..w as usize).collect::<Vec<_>>())?);
    }
    kernel_check(&ctx, &chi, &gens, &expected, d, window, margin)
}

/// Kernel of multiplication by `v_m` on `E*BV_k` in degree `d`. Expected:
/// zero for `k < w`; the slice of `(α)` for `k = w`; plus `p^{N−1}` when `m = 0`.
pub fn regularity_check(engine: &Engine, k: u32, d: i64, window: u32, margin: u32) -> Result<KernelReport> {
    let params = engine.params;
    let w = params.w();
    if k > w {
        return config("need k ≤ w");
    }
    let ctx = engine.x_ctx(k, window + margin);
    let vm = engine.v_series(&ctx, params.m)?;
    let gens = engine.p_gens(&ctx, k)?;
    let mut expected = gens.clone();
    if k == w {
        expected.push(engine.chi(w, &ctx)?);
    }
    if params.m == 0 && params.prec > 1 {
        let spec = ctx.coeffs();
        let c = crate::coeffring::VPolynomial::from_i64(spec, params.p.pow(params.prec - 1) as i64);
        expected.push(TruncatedSeries::constant(&ctx, c));
    }
    kernel_check(&ctx, &vm, &gens, &expected, d, window, margin)
}

/// Quotient lengths for the freeness of `A(j)*[[x_j]]/(φ_j)` over `A(j)*`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreeRankReport {
    pub j: u32,
    pub degree: i64,
    pub window: u32,
    pub rank: u32,
    pub quotient_length: usize,
    pub predicted_length: usize,
}

impl FreeRankReport {
    pub fn passed(&self) -> bool {
        self.quotient_length == self.predicted_length
    }
}

/// Compares the length of the degree-`d` slice of `A(j)*[[x_j]]/(φ_j(x_j))`
/// with `Σ_{i<p^{m+j}}` of the lengths of the matching `A(j)*` slices.
pub fn free_rank_check(engine: &Engine, steps: &[ChainStep], j: u32, d: i64, window: u32) -> Result<FreeRankReport> {
    let step = &steps[j as usize];
    let rank = step.degree();
    let base_ctx = engine.x_ctx(j, window);
    let top_ctx = engine.x_ctx(j + 1, window);
    let ids: Vec<usize> = (0..j as usize).collect();
    let mut base = Vec::new();
    let mut top = Vec::new();
    for g in step.ideal(engine)? {
        if g.accuracy < window {
            return config("A(j)* generator not known to the window");
        }
        let g = g.series.retruncate(window)?;
        base.push(g.embed(&base_ctx, &ids)?);
        top.push(g.embed(&top_ctx, &ids)?);
    }
    let all: Vec<usize> = (0..=j as usize).collect();
    top.push(step.phi.embed(&top_ctx, &all)?);
    let quotient_length = quotient_slice(&top_ctx, &top, d, window)?.quotient_length;
    let mut predicted_length = 0;
    for i in 0..rank.min(window + 1) {
        predicted_length += quotient_slice(&base_ctx, &base, d - 2 * i as i64, window - i)?.quotient_length;
    }
    Ok(FreeRankReport { j, degree: d, window, rank, quotient_length, predicted_length })
}
