#![no_main]

use bpbv::fgl::{FglCacheDoc, FormalGroupLaw};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = serde_json::from_str::<FglCacheDoc>(text) else { return };
    // Loading recomputes the logarithm, which is exponential in D; keep headers small.
    if doc.trunc > 24 || doc.n > 3 || doc.p > 7 {
        return;
    }
    if let Ok(law) = FormalGroupLaw::from_cache_doc(&doc) {
        let again = FormalGroupLaw::from_cache_json(&law.to_cache_json()).expect("cache reparses");
        assert_eq!(again.to_cache_json(), law.to_cache_json());
    }
});
