#![no_main]

use libfuzzer_sys::fuzz_target;
use slicefkn::cube::{closest_dictator, project_affine_cube, CubeFn};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = CubeFn::parse(text) else { return };
    if f.dim() <= 12 {
        let (_, eps) = project_affine_cube(&f);
        assert!(eps >= -1e-9);
        let _ = closest_dictator(&f);
    }
});
