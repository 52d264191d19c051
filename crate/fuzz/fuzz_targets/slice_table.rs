#![no_main]

use libfuzzer_sys::fuzz_target;
use slicefkn::BoolTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = BoolTable::parse(text) {
        assert_eq!(BoolTable::parse(&f.to_text()).unwrap(), f);
    }
});
