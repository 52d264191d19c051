use proptest::prelude::*;

use slicefkn::affine::{project_affine, random_coeffs, AffineCoeffs};
use slicefkn::cube::{fourier, inverse_fourier, CubeFn};
use slicefkn::decoder::candidate_table;
use slicefkn::hypergeom::HypergeomParams;
use slicefkn::slice::{binomial_u64, complement_bool, dist_sq, worker_rng};
use slicefkn::{decode, BoolTable, CandidateForm, SliceDomain};

/// `(n, k)` with at most `max_points` points and `1 <= n <= max_n`.
fn domain(max_n: u32, max_points: u64) -> impl Strategy<Value = SliceDomain> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), 0..=n))
        .prop_filter("small enough", move |&(n, k)| {
            binomial_u64(n, k) <= max_points
        })
        .prop_map(|(n, k)| SliceDomain::new(n, k).unwrap())
}

fn table(max_n: u32, max_points: u64) -> impl Strategy<Value = BoolTable> {
    domain(max_n, max_points).prop_flat_map(|d| {
        proptest::collection::vec(any::<bool>(), d.size() as usize)
            .prop_map(move |v| BoolTable::from_fn(d, |p| v[d.rank(p).unwrap() as usize]).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rank_unrank_roundtrip(d in domain(64, u64::MAX), r in any::<u64>()) {
        let r = r % d.size();
        let p = d.unrank(r).unwrap();
        prop_assert_eq!(p.bits().count_ones(), d.k());
        prop_assert_eq!(d.rank(p).unwrap(), r);
    }

    #[test]
    fn successor_is_next_rank(d in domain(20, 5000)) {
        for (r, p) in d.points().enumerate() {
            prop_assert_eq!(d.rank(p).unwrap(), r as u64);
        }
        prop_assert_eq!(d.points().count() as u64, d.size());
    }

    #[test]
    fn complement_reverses_rank(d in domain(24, 100_000), r in any::<u64>()) {
        let r = r % d.size();
        let p = d.unrank(r).unwrap();
        let c = d.complement().point(!p.bits() & d.mask()).unwrap();
        prop_assert_eq!(d.complement().rank(c).unwrap(), d.size() - 1 - r);
    }

    #[test]
    fn projection_residual_is_orthogonal(f in table(9, 200)) {
        let d = f.domain();
        let ell = project_affine(&f).unwrap().coeffs;
        let len = d.size() as f64;
        let resid: Vec<f64> = d
            .points()
            .enumerate()
            .map(|(r, p)| f.get(r) as u8 as f64 - ell.eval(p).unwrap())
            .collect();
        prop_assert!((resid.iter().sum::<f64>() / len).abs() < 1e-9);
        for i in 0..d.n() as usize {
            let dot: f64 = d.points().zip(&resid).filter(|(p, _)| p.contains(i)).map(|(_, r)| r).sum();
            prop_assert!((dot / len).abs() < 1e-9);
        }
    }

    #[test]
    fn variance_matches_enumeration(d in domain(12, 1000), seed in any::<u64>()) {
        prop_assume!(d.n() >= 2);
        let ell = random_coeffs(d, &mut worker_rng(seed, 0));
        let vals: Vec<f64> = d.points().map(|p| ell.eval(p).unwrap()).collect();
        let len = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / len;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
        prop_assert!((ell.variance().unwrap() - var).abs() < 1e-10);
    }

    #[test]
    fn decode_distance_is_a_true_distance(f in table(8, 70)) {
        let r = decode(&f).unwrap();
        let g = candidate_table(f.domain(), &r.candidate);
        prop_assert!((dist_sq(&f, &g).unwrap() - r.distance).abs() < 1e-12);
        prop_assert_eq!(r.set_size, r.candidate.set_size());
    }

    #[test]
    fn decode_is_consistent_under_negation(f in table(8, 70)) {
        let a = decode(&f).unwrap();
        let b = decode(&f.negate()).unwrap();
        prop_assert!((a.distance - b.distance).abs() < 1e-12);
        if (a.distance - 0.5).abs() > 1e-12 {
            prop_assert_eq!(b.candidate, a.candidate.flip());
        }
    }

    #[test]
    fn decode_respects_complement(f in table(8, 70)) {
        let d = f.domain();
        prop_assume!(2 * d.k() != d.n());
        let a = decode(&f).unwrap();
        let c = complement_bool(&f);
        let b = decode(&c).unwrap();
        prop_assert!((a.distance - b.distance).abs() < 1e-12);
        let pulled = candidate_table(c.domain(), &a.candidate.mirror());
        prop_assert!((dist_sq(&c, &pulled).unwrap() - b.distance).abs() < 1e-12);
    }

    #[test]
    fn exact_affine_functions_decode_exactly(
        (d, which) in (4u32..=10).prop_flat_map(|n| (2..=n - 2).prop_map(move |k| SliceDomain::new(n, k).unwrap()))
            .prop_flat_map(|d| (Just(d), 0..2 * d.n() as usize + 2))
    ) {
        let n = d.n() as usize;
        let (f, expect) = match which {
            0 => (BoolTable::constant(d, false).unwrap(), CandidateForm::constant(false)),
            1 => (BoolTable::constant(d, true).unwrap(), CandidateForm::constant(true)),
            w if w < n + 2 => {
                let i = w - 2;
                (BoolTable::from_fn(d, |p| p.contains(i)).unwrap(), CandidateForm::dict(i))
            }
            w => {
                let i = w - n - 2;
                (BoolTable::from_fn(d, |p| !p.contains(i)).unwrap(), CandidateForm::anti_dict(i))
            }
        };
        let r = decode(&f).unwrap();
        prop_assert!(r.epsilon < 1e-10);
        prop_assert_eq!(r.distance, 0.0);
        prop_assert_eq!(r.candidate, expect);
    }

    #[test]
    fn parseval_and_inverse(m in 1u32..=10, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = worker_rng(seed, 0);
        let vals: Vec<f64> = (0..1u64 << m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = CubeFn::new(m, vals.clone()).unwrap();
        let fc = fourier(&f);
        let energy = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
        prop_assert!((fc.parseval_sum() - energy).abs() < 1e-10);
        let back = inverse_fourier(&fc);
        for (a, b) in back.values().iter().zip(&vals) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn hypergeom_pmf_sums_to_one(n in 0u64..80, k in 0u64..80, t in 0u64..80) {
        prop_assume!(k <= n && t <= n);
        let h = HypergeomParams::new(n, k, t).unwrap();
        prop_assert!(h.sums_to_one());
        prop_assert!(h.argmax_pmf().contains(&h.mode()));
    }

    #[test]
    fn affine_text_roundtrip(d in domain(12, 1000), seed in any::<u64>()) {
        let ell = random_coeffs(d, &mut worker_rng(seed, 1));
        let back = AffineCoeffs::parse(&ell.to_text()).unwrap();
        prop_assert_eq!(back, ell);
    }

    #[test]
    fn table_text_roundtrip(f in table(10, 300)) {
        prop_assert_eq!(BoolTable::parse(&f.to_text()).unwrap(), f);
    }
}
