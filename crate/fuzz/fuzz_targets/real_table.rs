#![no_main]

use libfuzzer_sys::fuzz_target;
use slicefkn::RealTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = RealTable::parse(text) {
        assert_eq!(RealTable::parse(&f.to_text()).unwrap(), f);
    }
});
