use bpbv::bvring::{ideal_member, slice, Engine, Membership, MembershipCertificate, Params};
use bpbv::coeffring::VPolynomial;
use bpbv::fgl::Flavor;
use bpbv::series::{TruncatedSeries, XMonomial};
use proptest::prelude::*;

fn engine() -> Engine {
    let params = Params::new(2, 1, 2, Flavor::Hazewinkel, None, None).unwrap();
    Engine::new(params, params.trunc).unwrap()
}

/// Homogeneous multiplier of cohomological degree 2e: x-monomials of degree
/// e, plus v_1 times monomials of degree e + 1.
fn multiplier(ctx: &bpbv::series::Ctx, e: u32, picks: &[(u32, bool)]) -> TruncatedSeries {
    let spec = ctx.coeffs();
    let mut out = TruncatedSeries::zero(ctx);
    for &(split, with_v) in picks {
        let deg = if with_v { e + 1 } else { e };
        let a = split % (deg + 1);
        let mono = XMonomial::from_exponents(&[a, deg - a]);
        let c = if with_v { VPolynomial::var(spec, 1).unwrap() } else { VPolynomial::one(spec) };
        out = out.plus(&TruncatedSeries::monomial(ctx, mono, c));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn combinations_of_generators_are_certified(
        e in 0u32..3,
        left in proptest::collection::vec((0u32..8, any::<bool>()), 0..3),
        right in proptest::collection::vec((0u32..8, any::<bool>()), 0..3),
    ) {
        let eng = engine();
        let ctx = eng.x_ctx(2, eng.params.trunc);
        let gens = eng.p_gens(&ctx, 2).unwrap();
        let z = gens[0].times(&multiplier(&ctx, e, &left)).plus(&gens[1].times(&multiplier(&ctx, e, &right)));
        let d_eff = slice::default_d_eff(&ctx, &gens);
        let Membership::Found(cert) = ideal_member(&z, &gens, d_eff).unwrap() else {
            panic!("combination of generators not found");
        };
        prop_assert!(cert.recheck());
        let back = MembershipCertificate::from_json(&cert.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), cert.to_json());
        prop_assert!(back.recheck());
    }
}

#[test]
fn units_are_not_members() {
    let eng = engine();
    let ctx = eng.x_ctx(2, eng.params.trunc);
    let gens = eng.p_gens(&ctx, 2).unwrap();
    let x0 = TruncatedSeries::var(&ctx, 0);
    let d_eff = slice::default_d_eff(&ctx, &gens);
    assert_eq!(ideal_member(&x0, &gens, d_eff).unwrap(), Membership::NotFound);
}
