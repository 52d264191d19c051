#![no_main]

use libfuzzer_sys::fuzz_target;
use slicefkn::decoder::candidate_table;
use slicefkn::slice::dist_sq;
use slicefkn::{decode, BoolTable};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = BoolTable::parse(text) else { return };
    if f.domain().n() > 12 {
        return;
    }
    let r = decode(&f).expect("decode accepts every parsed table");
    let g = candidate_table(f.domain(), &r.candidate);
    assert!((dist_sq(&f, &g).unwrap() - r.distance).abs() < 1e-12);
});
