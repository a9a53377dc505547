#![no_main]

use bpbv::coeffring::{CoeffSpec, VPolynomial};
use bpbv::scalar::ScalarRing;
use libfuzzer_sys::fuzz_target;

// First byte picks the coefficient ring, the rest is the rendering.
fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let p = [2u64, 3, 5][(sel % 3) as usize];
    let prec = 1 + (sel / 3 % 3) as u32;
    let lo = 1 + (sel / 9 % 2) as u32;
    let Ok(spec) = CoeffSpec::new(ScalarRing::integers_mod(p, prec).unwrap(), lo, 3) else { return };
    if let Ok(poly) = VPolynomial::parse(spec, text) {
        let again = VPolynomial::parse(spec, &poly.render()).expect("rendering reparses");
        assert_eq!(again, poly);
    }
});
