use super::aring::{self, DEFAULT_CHAIN_WINDOW};
use super::slice::{quotient_slice, slice_basis};
use super::*;
use crate::fgl::Flavor;

fn engine(p: u64, m: u32, n: u32, flavor: Flavor) -> Engine {
    let params = Params::new(p, m, n, flavor, None, None).unwrap();
    Engine::new(params, params.trunc).unwrap()
}

fn render(s: &TruncatedSeries) -> String {
    s.render()
}

#[test]
fn slice_enumeration() {
    let e = engine(2, 1, 1, Flavor::Araki);
    let ctx = e.x_ctx(1, 4);
    let b = slice_basis(&ctx, 2, 4);
    assert_eq!(b.len(), 4);
    let gens = e.p_gens(&ctx, 1).unwrap();
    assert_eq!(render(&gens[0]), "v1*x0^2");
    let q = quotient_slice(&ctx, &gens, 2, 4).unwrap();
    assert_eq!(q.rank, 3);
    assert_eq!(q.quotient_length, 1);
    assert_eq!(q.standard_monomials.len(), 1);
    assert_eq!(q.standard_monomials[0].0, crate::series::XMonomial::from_exponents(&[1]));
    assert!(slice_basis(&ctx, 3, 4).is_empty());
}

#[test]
fn lambda_series_examples() {
    let e = engine(2, 1, 1, Flavor::Araki);
    let ctx = e.x_ctx(2, 3);
    assert!(e.lambda_series(&[0, 0], &ctx).unwrap().is_zero());
    assert_eq!(e.lambda_series(&[1, 0], &ctx).unwrap(), TruncatedSeries::var(&ctx, 0));
    let s = e.lambda_series(&[1, 1], &ctx).unwrap();
    let f = e.law.f.embed(&ctx, &[0, 1]).unwrap();
    assert_eq!(s, f);
    assert!(render(&s).starts_with("x0 + x1 + v1*x0*x1"), "{}", render(&s));
}

#[test]
fn phi_examples() {
    let e = engine(2, 1, 2, Flavor::Araki);
    let ctx = e.xt_ctx(1, e.params.trunc);
    let t = TruncatedSeries::var(&ctx, 1);
    assert_eq!(e.phi(0, &ctx, 1).unwrap(), t.pow(2));
    let d = e.law.diff(&t, &TruncatedSeries::var(&ctx, 0)).unwrap();
    assert_eq!(e.phi(1, &ctx, 1).unwrap(), t.times(&d).pow(2));
    // Modulo I_{n+1} the law is additive.
    let reduced = e.phi(1, &ctx, 1).unwrap().reduce_mod_ideal(3);
    let x0 = TruncatedSeries::var(&reduced.ctx().clone(), 0);
    let tt = TruncatedSeries::var(&reduced.ctx().clone(), 1);
    assert_eq!(reduced, tt.times(&tt.plus(&x0)).pow(2));
}

#[test]
fn alpha_for_w_one_is_a_power() {
    for (p, m, n) in [(2, 1, 1), (3, 1, 1), (2, 2, 2)] {
        let e = engine(p, m, n, Flavor::Araki);
        let a = e.alpha().unwrap();
        let ctx = a.alpha.ctx().clone();
        assert_eq!(a.alpha, TruncatedSeries::var(&ctx, 0).pow(p.pow(m)));
        assert_eq!(a.alpha.degree(), Some(e.params.alpha_degree()));
    }
}

#[test]
fn alpha_and_alpha_prime_at_2_1_2() {
    let e = engine(2, 1, 2, Flavor::Araki);
    let a = e.alpha().unwrap();
    assert!(a.agreement.recheck());
    assert_eq!(e.params.alpha_degree(), 12);
    let ap = e.alpha_prime().unwrap();
    assert_eq!(ap.degree(), Some(12));
    let ctx = a.alpha.ctx().clone();
    let gens = e.p_gens(&ctx, 2).unwrap();
    let d_eff = slice::default_d_eff(&ctx, &gens);
    let m = ideal_member(&a.alpha.minus(&ap), &gens, d_eff).unwrap();
    assert!(m.certificate().unwrap().recheck());
    let red = residue_map(&a.alpha.reduce_mod_ideal(3)).unwrap();
    let expect: std::collections::BTreeMap<Vec<u32>, u64> = [(vec![4, 2], 1), (vec![2, 4], 1)].into_iter().collect();
    assert_eq!(red, expect);
}

#[test]
fn oversized_parameters_are_rejected() {
    assert!(Params::new(2, 0, 40, Flavor::Araki, None, None).is_err());
    assert!(Params::new(4294967291, 1, 1, Flavor::Araki, None, None).is_err());
    assert!(Params::new(2, 2, 1, Flavor::Araki, None, None).is_err());
}

#[test]
fn alpha_degree_formula() {
    let params = Params::new(3, 1, 2, Flavor::Araki, None, None).unwrap();
    assert_eq!(params.alpha_degree(), 24);
}

#[test]
fn alpha_prime_w_one() {
    let e = engine(2, 1, 1, Flavor::Araki);
    assert_eq!(render(&e.alpha_prime().unwrap()), "x0^2");
}

#[test]
fn v_alpha_prime_certificates() {
    let e = engine(2, 1, 1, Flavor::Hazewinkel);
    let c = e.v_alpha_prime_certificate(1).unwrap();
    assert!(c.multipliers[0].constant_term().is_constant());
    assert_eq!(render(&c.multipliers[0]), "1");
    let e = engine(2, 1, 2, Flavor::Araki);
    for i in 1..=2 {
        assert!(e.v_alpha_prime_certificate(i).unwrap().recheck());
    }
    assert!(e.v_alpha_prime_certificate(0).is_err());
}

#[test]
fn membership_examples() {
    let e = engine(2, 1, 2, Flavor::Araki);
    let ctx = e.x_ctx(2, 8);
    let gens = e.p_gens(&ctx, 2).unwrap();
    let z = gens[0].times(&TruncatedSeries::var(&ctx, 1));
    let c = ideal_member(&z, &gens, 6).unwrap();
    let c = c.certificate().unwrap();
    assert_eq!(c.multipliers[0], TruncatedSeries::var(&ctx, 1));
    assert!(c.multipliers[1].is_zero());
    assert_eq!(ideal_member(&TruncatedSeries::one(&ctx), &gens, 6).unwrap(), Membership::NotFound);
    assert!(ideal_member(&z, &gens, 9).is_err());
}

#[test]
fn membership_over_z_mod_p_power() {
    let e = engine(2, 0, 1, Flavor::Araki);
    let a = e.alpha().unwrap();
    let ap = e.alpha_prime().unwrap();
    let ctx = a.alpha.ctx().clone();
    let gens = e.p_gens(&ctx, 2).unwrap();
    let d_eff = slice::default_d_eff(&ctx, &gens);
    let m = ideal_member(&a.alpha.minus(&ap), &gens, d_eff).unwrap();
    assert!(m.certificate().unwrap().recheck());
}

#[test]
fn certificate_json_round_trip() {
    let e = engine(2, 1, 1, Flavor::Araki);
    let c = e.v_alpha_prime_certificate(1).unwrap();
    let back = MembershipCertificate::from_json(&c.to_json()).unwrap();
    assert_eq!(back, c);
    assert!(back.recheck());
    let mut doc = c.to_doc();
    doc.format_version = 99;
    assert!(MembershipCertificate::from_doc(&doc).is_err());
}

#[test]
fn chi_examples() {
    let e = engine(2, 1, 2, Flavor::Araki);
    let ctx = e.x_ctx(2, e.params.trunc);
    assert_eq!(e.chi(0, &ctx).unwrap(), TruncatedSeries::one(&ctx));
    assert_eq!(e.chi(2, &ctx).unwrap(), e.alpha().unwrap().alpha);
}

#[test]
fn chain_step_zero() {
    let e = engine(2, 1, 1, Flavor::Araki);
    let params = e.params;
    let e = Engine::new(params, aring::chain_trunc(&params, 0, DEFAULT_CHAIN_WINDOW)).unwrap();
    let s = aring::chain_step(&e, 0, DEFAULT_CHAIN_WINDOW).unwrap();
    assert!(s.remainder.is_zero());
    assert_eq!(render(&s.theta), "v1*t");
    let cert = aring::theta_certificate(&e, &s).unwrap();
    assert!(cert.certificate.unwrap().recheck());

    let e = engine(3, 0, 1, Flavor::Hazewinkel);
    let s = aring::chain_step(&e, 0, 2).unwrap();
    assert!(s.remainder.is_zero());
}
