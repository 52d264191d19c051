#![no_main]

use libfuzzer_sys::fuzz_target;
use slicefkn::AffineCoeffs;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ell) = AffineCoeffs::parse(text) {
        assert_eq!(AffineCoeffs::parse(&ell.to_text()).unwrap(), ell);
    }
});
