//! Weierstrass division in one distinguished variable `t` of a truncated
//! series ring, by successive approximation.
//!
//! Writing `φ = φ_low + t^d·U` with `U` a unit, each step moves the part of
//! the running remainder of `t`-degree `≥ d` into the quotient and feeds
//! back `−g_high·U⁻¹·φ_low`. Since `φ_low` lies in the maximal ideal the
//! feedback climbs the adic filtration and vanishes under the degree cutoff.

use crate::coeffring::VPolynomial;
use crate::error::{config, internal, precondition, Result};
use crate::series::{TruncatedSeries, XMonomial};

/// `(coefficient of t^k in φ) -> constant scalar`, used for the unit and
/// nilpotency checks.
fn constant_scalar(phi: &TruncatedSeries, t: usize, k: u32) -> crate::scalar::Scalar {
    let mut exps = vec![0u32; phi.ctx().nvars()];
    exps[t] = k;
    phi.coeff_of(&exps).constant_term()
}

/// Splits `g` into the part of `t`-degree `< d` and the part above,
/// shifted down by `t^d`.
pub fn split_at(g: &TruncatedSeries, t: usize, d: u32) -> (TruncatedSeries, TruncatedSeries) {
    let low = g.filter_terms(|m| m.exponent(t) < d);
    let high = g.map_monomials(g.ctx(), |m| {
        let e = m.exponent(t);
        (e >= d).then(|| m.with_exponent(t, e - d))
    });
    (low, high)
}

fn check_divisor(phi: &TruncatedSeries, t: usize, d: u32) -> Result<()> {
    if t >= phi.ctx().nvars() {
        return config(format!("no variable with index {t}"));
    }
    let ring = phi.coeffs().ring;
    let lead = constant_scalar(phi, t, d);
    if !ring.is_unit(&lead) {
        return precondition(format!("coefficient a_{d} of t^{d} is not a unit"));
    }
    for k in 0..d {
        let c = constant_scalar(phi, t, k);
        if !ring.is_nilpotent(&c) {
            return precondition(format!("coefficient a_{k} of t^{k} is not topologically nilpotent"));
        }
    }
    Ok(())
}

fn iteration_cap(phi: &TruncatedSeries) -> usize {
    let trunc = phi.ctx().trunc() as usize;
    let ring = phi.coeffs().ring;
    let prec = if ring.modulus().is_some() { ring.prec as usize } else { 1 };
    (trunc + 2) * (trunc + 2) * (prec + 1)
}

/// Returns `(q, r)` with `f = q·φ + r` up to the cutoff and `deg_t r < d`.
pub fn divrem(f: &TruncatedSeries, phi: &TruncatedSeries, t: usize, d: u32) -> Result<(TruncatedSeries, TruncatedSeries)> {
    if f.ctx() != phi.ctx() {
        return config("dividend and divisor live in different contexts");
    }
    check_divisor(phi, t, d)?;
    let (phi_low, u) = split_at(phi, t, d);
    let u_inv = u.inverse()?;
    let ctx = f.ctx();
    let mut q = TruncatedSeries::zero(ctx);
    let mut r = TruncatedSeries::zero(ctx);
    let mut g = f.clone();
    for _ in 0..iteration_cap(phi) {
        if g.is_zero() {
            return Ok((q, r));
        }
        let (g_low, g_high) = split_at(&g, t, d);
        r = r.plus(&g_low);
        let step = g_high.times(&u_inv);
        q = q.plus(&step);
        g = step.times(&phi_low).neg();
    }
    precondition("division did not converge within the truncation; divisor coefficients below t^d are not topologically nilpotent")
}

/// Coordinates of `c` in the basis `1, t, …, t^{d−1}` over the subring of
/// series in `φ(t)`: returns `b_0..b_{d−1}` with `c = Σ b_i(φ(t))·t^i`.
///
/// Each `b_i` lives in the context of `c`, the slot of `t` standing for
/// the new variable `y`. The recombination is checked before returning.
pub fn basis_coords(c: &TruncatedSeries, phi: &TruncatedSeries, t: usize, d: u32) -> Result<Vec<TruncatedSeries>> {
    let ctx = c.ctx();
    if !phi.constant_term().is_zero() {
        return precondition("divisor has a nonzero constant term");
    }
    let mut coords = vec![TruncatedSeries::zero(ctx); d as usize];
    let mut cur = c.clone();
    let mut j = 0u32;
    while !cur.is_zero() && j <= ctx.trunc() {
        let (q, r) = divrem(&cur, phi, t, d)?;
        for (m, coeff) in r.terms() {
            let i = m.exponent(t) as usize;
            let term = TruncatedSeries::monomial(ctx, m.with_exponent(t, j), coeff.clone());
            coords[i] = coords[i].plus(&term);
        }
        cur = q;
        j += 1;
    }
    if recombine(&coords, phi, t)? != *c {
        return internal("basis coordinates do not recombine to the input");
    }
    Ok(coords)
}

/// `Σ b_i(φ(t))·t^i`.
pub fn recombine(coords: &[TruncatedSeries], phi: &TruncatedSeries, t: usize) -> Result<TruncatedSeries> {
    let ctx = phi.ctx();
    let mut out = TruncatedSeries::zero(ctx);
    let mut t_pow = TruncatedSeries::one(ctx);
    let tv = TruncatedSeries::var(ctx, t);
    for b in coords {
        out = out.plus(&b.substitute_var(t, phi)?.times(&t_pow));
        t_pow = t_pow.times(&tv);
    }
    Ok(out)
}

/// The coefficient of `t^i` in `g`, as a series in the remaining variables.
pub fn t_coefficient(g: &TruncatedSeries, t: usize, i: u32) -> TruncatedSeries {
    g.map_monomials(g.ctx(), |m| (m.exponent(t) == i).then(|| m.with_exponent(t, 0)))
}

/// Convenience: `c·t^i` as a monomial series.
pub fn t_power(ctx: &crate::series::Ctx, t: usize, i: u32, c: VPolynomial) -> TruncatedSeries {
    let mut e = vec![0u32; ctx.nvars()];
    e[t] = i;
    TruncatedSeries::monomial(ctx, XMonomial::from_exponents(&e), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffring::CoeffSpec;
    use crate::error::Error;
    use crate::scalar::ScalarRing;
    use crate::series::{Ctx, SeriesContext};
    use proptest::prelude::*;

    fn ctx(p: u64, trunc: u32) -> Ctx {
        let spec = CoeffSpec::new(ScalarRing::prime_field(p).unwrap(), 1, 2).unwrap();
        SeriesContext::new(["x0", "t"], trunc, spec)
    }

    #[test]
    fn spec_examples() {
        let c = ctx(3, 8);
        let t = TruncatedSeries::var(&c, 1);
        let x0 = TruncatedSeries::var(&c, 0);
        let (q, r) = divrem(&t.pow(3), &t.pow(2), 1, 2).unwrap();
        assert_eq!(q, t);
        assert!(r.is_zero());

        let phi = t.pow(2).minus(&x0.times(&t));
        let (q, r) = divrem(&t.pow(2), &phi, 1, 2).unwrap();
        assert_eq!(q, TruncatedSeries::one(&c));
        assert_eq!(r, x0.times(&t));
    }

    #[test]
    fn basis_examples() {
        let c = ctx(3, 8);
        let t = TruncatedSeries::var(&c, 1);
        let phi = t.pow(2);
        let b = basis_coords(&t.pow(3), &phi, 1, 2).unwrap();
        assert!(b[0].is_zero());
        assert_eq!(b[1], t);
        let one = TruncatedSeries::one(&c);
        let b = basis_coords(&one, &phi, 1, 2).unwrap();
        assert_eq!(b[0], one);
        assert!(b[1].is_zero());
        let x0 = TruncatedSeries::var(&c, 0);
        let phi = t.pow(2).minus(&x0.times(&t));
        let b = basis_coords(&phi.times(&t), &phi, 1, 2).unwrap();
        assert!(b[0].is_zero());
        assert_eq!(b[1], t);
    }

    #[test]
    fn bad_divisors_are_rejected() {
        let c = ctx(3, 8);
        let t = TruncatedSeries::var(&c, 1);
        let one = TruncatedSeries::one(&c);
        let e = divrem(&t, &t.pow(2).plus(&one), 1, 2).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref s) if s.contains("a_0")));
        let e = divrem(&t, &t.pow(2).scale_scalar(&c.coeffs().ring.zero()), 1, 2).unwrap_err();
        assert!(matches!(e, Error::Precondition(ref s) if s.contains("a_2")));
    }

    fn arb(c: Ctx) -> impl Strategy<Value = TruncatedSeries> {
        let spec = c.coeffs();
        prop::collection::vec((0u32..5, 0u32..5, 0i64..5), 0..10).prop_map(move |ts| {
            let terms = ts.into_iter().map(|(a, b, k)| (XMonomial::from_exponents(&[a, b]), VPolynomial::from_i64(spec, k)));
            TruncatedSeries::from_terms(&c, terms).unwrap()
        })
    }

    proptest! {
        #[test]
        fn divrem_recombines(f in arb(ctx(5, 7)), low in arb(ctx(5, 7))) {
            let c = ctx(5, 7);
            let x0 = TruncatedSeries::var(&c, 0);
            let t = TruncatedSeries::var(&c, 1);
            // nilpotent lower part: multiples of x0 of t-degree < 2
            let low = split_at(&low, 1, 2).0.times(&x0);
            let phi = t.pow(2).plus(&t.pow(3)).plus(&low);
            let (q, r) = divrem(&f, &phi, 1, 2).unwrap();
            prop_assert!(r.terms().all(|(m, _)| m.exponent(1) < 2));
            prop_assert_eq!(q.times(&phi).plus(&r), f.clone());
            let phi0 = phi.filter_terms(|m| !m.is_one());
            basis_coords(&f, &phi0, 1, 2).unwrap();
        }
    }
}
