#![no_main]

use bpbv::series::TruncatedSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = TruncatedSeries::from_json(text) {
        let again = TruncatedSeries::from_json(&s.to_json()).expect("canonical form reparses");
        assert_eq!(again, s);
    }
});
