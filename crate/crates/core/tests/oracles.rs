//! Independent recomputations of values the engine derives.

use std::collections::BTreeMap;

use bpbv::bvring::{residue_map, Engine, Params};
use bpbv::dickson::{beta, beta_prime};
use bpbv::fgl::Flavor;

/// Plain polynomials over F_p in k variables.
type Poly = BTreeMap<Vec<u32>, u64>;

fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0) += ca * cb % p;
        }
    }
    out.into_iter().map(|(e, c)| (e, c % p)).filter(|(_, c)| *c != 0).collect()
}

fn add(a: &Poly, b: &Poly, p: u64, sign: u64) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert(0) += c * sign % p;
    }
    out.into_iter().map(|(e, c)| (e, c % p)).filter(|(_, c)| *c != 0).collect()
}

fn one(k: usize) -> Poly {
    [(vec![0; k], 1)].into_iter().collect()
}

fn monomial(k: usize, i: usize, e: u32) -> Poly {
    let mut v = vec![0; k];
    v[i] = e;
    [(v, 1)].into_iter().collect()
}

fn power(a: &Poly, e: u64, p: u64) -> Poly {
    (0..e).fold(one(a.keys().next().map_or(0, |v| v.len())), |acc, _| mul(&acc, a, p))
}

/// Product of the linear forms whose last nonzero coefficient is 1.
fn lines_product(p: u64, k: usize) -> Poly {
    let mut out = one(k);
    let total = p.pow(k as u32);
    for code in 1..total {
        let digits: Vec<u64> = (0..k).map(|i| code / p.pow(i as u32) % p).collect();
        let last = (0..k).rev().find(|&i| digits[i] != 0).unwrap();
        if digits[last] != 1 {
            continue;
        }
        let mut form = Poly::new();
        for (i, &d) in digits.iter().enumerate() {
            if d != 0 {
                form.insert(monomial(k, i, 1).into_keys().next().unwrap(), d);
            }
        }
        out = mul(&out, &form, p);
    }
    out
}

/// det(x_i^{p^j}) by permutation expansion.
fn moore_det(p: u64, k: usize) -> Poly {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for rest in perms(n - 1) {
            for pos in 0..n {
                let mut v = rest.clone();
                v.insert(pos, n - 1);
                out.push(v);
            }
        }
        out
    }
    let mut out = Poly::new();
    for sigma in perms(k) {
        let inversions = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| sigma[i] > sigma[j]).count();
        let mut term = one(k);
        for (i, &j) in sigma.iter().enumerate() {
            term = mul(&term, &monomial(k, i, p.pow(j as u32) as u32), p);
        }
        out = add(&out, &term, p, if inversions % 2 == 0 { 1 } else { p - 1 });
    }
    out
}

#[test]
fn dickson_invariants_match_direct_expansion() {
    for p in [2u64, 3] {
        for k in 1..=3usize {
            let lines = lines_product(p, k);
            assert_eq!(beta(p, k).unwrap().x_part().unwrap(), lines, "β for p={p} k={k}");
            // The Moore determinant agrees with the product of lines.
            assert_eq!(moore_det(p, k), lines, "moore p={p} k={k}");
            assert_eq!(beta_prime(p, k).unwrap().x_part().unwrap(), lines);
        }
    }
}

#[test]
fn alpha_mod_top_ideal_is_a_power_of_the_lines_product() {
    // Modulo (p, v_1, ..., v_n) the law is additive, so α reduces to the
    // product of the linear forms raised to p^m.
    for (p, m, n) in [(2, 1, 2), (3, 1, 2), (2, 2, 2), (2, 0, 1), (3, 0, 1)] {
        for flavor in [Flavor::Araki, Flavor::Hazewinkel] {
            let params = Params::new(p, m, n, flavor, None, None).unwrap();
            let e = Engine::new(params, params.trunc).unwrap();
            let want = power(&lines_product(p, params.w() as usize), p.pow(m), p);
            let alpha = e.alpha().unwrap().alpha;
            assert_eq!(residue_map(&alpha.reduce_mod_ideal(n + 1)).unwrap(), want, "{params}");
            let ap = e.alpha_prime().unwrap();
            assert_eq!(residue_map(&ap.reduce_mod_ideal(n + 1)).unwrap(), want, "{params}");
        }
    }
}

#[test]
fn alpha_degree_closed_form() {
    // 2p^m(1 + p + ... + p^{w-1}), summed directly.
    for (p, m, n) in [(2, 1, 1), (2, 1, 2), (3, 1, 1), (3, 1, 2), (2, 2, 2), (2, 0, 1), (3, 0, 1)] {
        let params = Params::new(p, m, n, Flavor::Araki, None, None).unwrap();
        let geometric: u64 = (0..params.w()).map(|i| p.pow(i)).sum();
        assert_eq!(params.alpha_degree(), (2 * p.pow(m) * geometric) as i64);
    }
}
