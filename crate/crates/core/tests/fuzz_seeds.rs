//! Replays the checked-in fuzz corpus through the same checks as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use slicefkn::cube::{closest_dictator, project_affine_cube, CubeFn};
use slicefkn::decoder::candidate_table;
use slicefkn::harness::Grid;
use slicefkn::slice::dist_sq;
use slicefkn::{decode, AffineCoeffs, BoolTable, RealTable};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = String::from_utf8_lossy(&fs::read(&p).unwrap()).into_owned();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn slice_table_seeds() {
    let mut parsed = 0;
    for (_, text) in corpus("slice_table") {
        if let Ok(f) = BoolTable::parse(&text) {
            assert_eq!(BoolTable::parse(&f.to_text()).unwrap(), f);
            parsed += 1;
        }
    }
    assert!(parsed >= 3);
}

#[test]
fn real_table_seeds() {
    for (p, text) in corpus("real_table") {
        let r = RealTable::parse(&text);
        if p.ends_with("nan") {
            assert!(r.is_err());
        }
        if let Ok(f) = r {
            assert_eq!(RealTable::parse(&f.to_text()).unwrap(), f);
        }
    }
}

#[test]
fn affine_seeds() {
    for (p, text) in corpus("affine_coeffs") {
        let r = AffineCoeffs::parse(&text);
        if p.ends_with("plain") || p.ends_with("offset") {
            let ell = r.unwrap();
            assert_eq!(AffineCoeffs::parse(&ell.to_text()).unwrap(), ell);
        } else {
            assert!(r.is_err(), "{}", p.display());
        }
    }
}

#[test]
fn cube_seeds() {
    for (_, text) in corpus("cube_table") {
        let Ok(f) = CubeFn::parse(&text) else {
            continue;
        };
        let (_, eps) = project_affine_cube(&f);
        assert!(eps >= -1e-9);
        let _ = closest_dictator(&f);
    }
}

#[test]
fn decode_seeds() {
    for (p, text) in corpus("decode_table") {
        let f = BoolTable::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let r = decode(&f).unwrap();
        let g = candidate_table(f.domain(), &r.candidate);
        assert!((dist_sq(&f, &g).unwrap() - r.distance).abs() < 1e-12);
    }
}

#[test]
fn grid_seeds() {
    for (p, text) in corpus("sweep_grid") {
        let r = Grid::parse_all(text.lines());
        assert_eq!(r.is_err(), p.ends_with("malformed"), "{}", p.display());
    }
}
