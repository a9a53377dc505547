#![no_main]

use bpbv::dickson::SignedPoly;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let p = if sel & 1 == 0 { 2 } else { 3 };
    let k = 1 + (sel >> 1) as usize % 4;
    if let Ok(poly) = SignedPoly::parse(p, k, text) {
        let again = SignedPoly::parse(p, k, &poly.render()).expect("rendering reparses");
        assert_eq!(again, poly);
    }
});
