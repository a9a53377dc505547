#![no_main]

use bpbv_cli::config::{apply_config_text, parse_degrees, Flags};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut flags = Flags::default();
    if apply_config_text(&mut flags, "fuzz", text).is_ok() {
        if let Some(d) = &flags.degrees {
            if let Ok(list) = parse_degrees(d) {
                assert!(list.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
});
