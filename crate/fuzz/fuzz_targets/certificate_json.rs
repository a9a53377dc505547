#![no_main]

use bpbv::bvring::MembershipCertificate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cert) = MembershipCertificate::from_json(text) {
        let again = MembershipCertificate::from_json(&cert.to_json()).expect("canonical form reparses");
        assert_eq!(again, cert);
        let _ = cert.recheck();
    }
});
