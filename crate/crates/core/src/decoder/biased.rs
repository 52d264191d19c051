//! Decoding under the product measure `mu_p`, directly or through the slice
//! `binom([N], floor(p N))` into which the cube embeds.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::candidate::{CandidateForm, Polarity};
use super::generate::{baseline, generate, small_eps_gate, AffineView, Branch};
use super::sample::Sample;
use super::{select, size_ratio, DecodeConfig, DecodeReport, Diagnostics, MeasureTag, SearchStage};
use crate::affine::EstimationPath;
use crate::cube::{mu_p_weights, CubeFn, MAX_CUBE_DIM};
use crate::error::{Error, Result};
use crate::hypergeom::{binomial, to_f64};
use crate::numeric::{csum, structured_solve};

/// Largest `N` accepted by the embedding.
pub const MAX_EMBEDDING_N: u64 = 1 << 20;

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("p = {p} is not in (0, 1)")))
    }
}

fn boolean_values(f: &CubeFn) -> Result<Vec<bool>> {
    f.values()
        .iter()
        .enumerate()
        .map(|(x, &v)| match v {
            0.0 => Ok(false),
            1.0 => Ok(true),
            _ => Err(Error::NotBoolean(x)),
        })
        .collect()
}

/// A measure on `{0,1}^n` that is exchangeable in the coordinates, given by
/// its atom weights and its first two moments `E[x_i]`, `E[x_i x_j]` (`i != j`).
struct Exchangeable {
    weights: Vec<f64>,
    first: f64,
    second: f64,
}

/// Decodes `f` under a measure whose weights depend only on `|x|`.
fn decode_weighted(
    f: &CubeFn,
    measure: &Exchangeable,
    p: f64,
    tag: MeasureTag,
    config: &DecodeConfig,
) -> Result<DecodeReport> {
    let n = f.dim() as usize;
    let values = boolean_values(f)?;
    let points: Vec<u64> = (0..values.len() as u64).collect();
    let sample = Sample::weighted(points, values, measure.weights.clone());

    // Projection onto span{1, x_1, ..., x_n}: the centred Gram matrix is
    // (q - r) I + (r - q^2) J with q = E[x_i], r = E[x_i x_j].
    let q = measure.first;
    let mean_f = sample.mean(Polarity::Direct);
    let cov: Vec<f64> = sample
        .correlations(n, Polarity::Direct)
        .iter()
        .map(|b| b - q * mean_f)
        .collect();
    let coeffs = structured_solve(q - measure.second, measure.second - q * q, &cov);
    let offset = mean_f - q * csum(coeffs.iter().copied());
    let ell = |x: u64| offset + csum((0..n).filter(|&i| x >> i & 1 == 1).map(|i| coeffs[i]));
    let epsilon = csum(f.values().iter().enumerate().map(|(x, &v)| {
        let r = v - ell(x as u64);
        measure.weights[x] * r * r
    }));

    let mut diagnostics = Diagnostics {
        p,
        small_eps_gate: small_eps_gate(p),
        complemented: false,
        coefficients: coeffs.clone(),
        offset,
        two_buckets: None,
        three_buckets: None,
        case: None,
        candidates_scored: 0,
        search: SearchStage::Generated,
        generated_distance: None,
        size_ratio: None,
    };
    let (branch, candidates) = if n >= 2 {
        let view = AffineView {
            coeffs: &coeffs,
            offset,
            marginal: q,
            epsilon,
            p,
        };
        let g = generate(&sample, &view)?;
        diagnostics.two_buckets = Some(g.two);
        diagnostics.three_buckets = Some(g.three);
        diagnostics.case = Some(g.case);
        (g.branch, g.candidates)
    } else {
        let branch = if epsilon < small_eps_gate(p) {
            Branch::SmallEps
        } else {
            Branch::LargeEpsCase1a
        };
        (branch, baseline(n))
    };
    let (best, distance) = select(&sample, n, &candidates, config, &mut diagnostics);
    diagnostics.size_ratio = size_ratio(best.set_size(), epsilon, p);
    Ok(DecodeReport {
        domain: tag,
        epsilon,
        epsilon_path: EstimationPath::Exact,
        branch,
        set_size: best.set_size(),
        candidate: best,
        distance,
        distance_path: EstimationPath::Exact,
        diagnostics,
    })
}

pub fn decode_mu_p(f: &CubeFn, p: f64) -> Result<DecodeReport> {
    decode_mu_p_with(f, p, &DecodeConfig::default())
}

/// Decodes under `mu_p` with exact weights. For `p > 1/2` the cube is
/// mirrored (`x -> 1 - x`), decoded under `mu_{1-p}`, and the candidate
/// mapped back, so `MaxOf` becomes `MinOf`.
pub fn decode_mu_p_with(f: &CubeFn, p: f64, config: &DecodeConfig) -> Result<DecodeReport> {
    check_p(p)?;
    if p > 0.5 {
        let mut r = decode_mu_p_with(&f.mirror(), 1.0 - p, config)?;
        r.domain = MeasureTag::MuP { n: f.dim(), p };
        r.candidate = r.candidate.mirror();
        r.diagnostics.complemented = true;
        return Ok(r);
    }
    let measure = Exchangeable {
        weights: mu_p_weights(f.dim(), p)?,
        first: p,
        second: p * p,
    };
    decode_weighted(f, &measure, p, MeasureTag::MuP { n: f.dim(), p }, config)
}

/// `floor(p N)`, with `p` read as the simplest nearby fraction so that
/// `0.3 * 2000` gives 600.
pub fn embedding_level(p: f64, big_n: u64) -> Result<u64> {
    check_p(p)?;
    let r = Ratio::<i64>::approximate_float(p)
        .ok_or_else(|| Error::OutOfRange(format!("p = {p} has no rational approximation")))?;
    let k = (BigInt::from(*r.numer()) * BigInt::from(big_n)) / BigInt::from(*r.denom());
    Ok(k.try_into().expect("0 <= floor(p N) <= N"))
}

/// Exact marginal on the first `n` coordinates of the uniform measure on
/// `binom([N], K)`, by weight: `C(N - n, K - j) / C(N, K)` for `|x| = j`.
pub fn embedding_marginal(n: u32, big_n: u64, big_k: u64) -> Result<Vec<BigRational>> {
    if (n as u64) > big_n {
        return Err(Error::OutOfRange(format!("N = {big_n} is below n = {n}")));
    }
    if big_k > big_n {
        return Err(Error::OutOfRange(format!(
            "level {big_k} exceeds N = {big_n}"
        )));
    }
    if big_n > MAX_EMBEDDING_N {
        return Err(Error::TooLarge(format!("N = {big_n}")));
    }
    let den = BigInt::from(binomial(big_n, big_k as i64));
    Ok((0..=n as i64)
        .map(|j| {
            BigRational::new(
                BigInt::from(binomial(big_n - n as u64, big_k as i64 - j)),
                den.clone(),
            )
        })
        .collect())
}

/// Exact total variation between the embedding marginal on `[n]` and `mu_p`,
/// where `p` is taken as the rational used for the level.
pub fn embedding_total_variation(n: u32, p: f64, big_n: u64) -> Result<BigRational> {
    let big_k = embedding_level(p, big_n)?;
    let marginal = embedding_marginal(n, big_n, big_k)?;
    let r = Ratio::<i64>::approximate_float(p).expect("checked in embedding_level");
    let pr = BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
    let qr = BigRational::from_integer(BigInt::from(1)) - &pr;
    let mut total = BigRational::zero();
    for (j, w) in marginal.iter().enumerate() {
        let mu = num_traits::pow(pr.clone(), j) * num_traits::pow(qr.clone(), n as usize - j);
        let count = BigRational::from_integer(BigInt::from(binomial(n as u64, j as i64)));
        total += count * (w - mu).abs();
    }
    Ok(total / BigRational::from_integer(BigInt::from(2)))
}

/// Decode through the slice and side-by-side comparison with direct mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub big_n: u64,
    pub level: u64,
    /// Decode of `f_N(x) = f(x_1, ..., x_n)` on `binom([N], level)`.
    pub embedded: DecodeReport,
    pub direct: DecodeReport,
    pub total_variation: f64,
    /// Same quantity as an exact fraction.
    pub total_variation_exact: String,
    pub candidates_agree: bool,
}

/// Decodes `f_N(x_1, ..., x_N) = f(x_1, ..., x_n)` on `binom([N], floor(p N))`.
///
/// `f_N` depends on `[n]` only, so its distance to any candidate supported on
/// `[n]` is an expectation under the exact slice marginal on `[n]`; the
/// decode runs on that marginal instead of the `C(N, floor(p N))`-point table.
pub fn decode_embedding(
    f: &CubeFn,
    p: f64,
    big_n: u64,
    config: &DecodeConfig,
) -> Result<EmbeddingReport> {
    let n = f.dim();
    if n > MAX_CUBE_DIM {
        return Err(Error::TooLarge(format!("cube dimension {n}")));
    }
    let level = embedding_level(p, big_n)?;
    let marginal = embedding_marginal(n, big_n, level)?;
    let by_weight: Vec<f64> = marginal.iter().map(to_f64).collect();
    let weights: Vec<f64> = (0..1u64 << n)
        .map(|x| by_weight[x.count_ones() as usize])
        .collect();
    let (nf, kf) = (big_n as f64, level as f64);
    let first = kf / nf;
    let second = if big_n > 1 {
        first * (kf - 1.0) / (nf - 1.0)
    } else {
        0.0
    };
    let measure = Exchangeable {
        weights,
        first,
        second,
    };
    let slice_p = first.min(1.0 - first);
    let tag = MeasureTag::MuP { n, p: first };
    let embedded = if first > 0.5 {
        let mirrored = Exchangeable {
            weights: (0..1u64 << n)
                .map(|x| by_weight[n as usize - x.count_ones() as usize])
                .collect(),
            first: 1.0 - first,
            second: (1.0 - first) * (nf - kf - 1.0) / (nf - 1.0),
        };
        let mut r = decode_weighted(&f.mirror(), &mirrored, slice_p, tag, config)?;
        r.candidate = r.candidate.mirror();
        r.diagnostics.complemented = true;
        r
    } else {
        decode_weighted(f, &measure, slice_p, tag, config)?
    };
    let direct = decode_mu_p_with(f, p, config)?;
    let tv = embedding_total_variation(n, p, big_n)?;
    Ok(EmbeddingReport {
        big_n,
        level,
        candidates_agree: embedded.candidate == direct.candidate,
        embedded,
        direct,
        total_variation: to_f64(&tv),
        total_variation_exact: crate::hypergeom::rational_string(&tv),
    })
}

/// A family member on `[n]` with each value flipped independently with
/// probability `noise`, used to exercise the decoder off the family.
pub fn perturbed_member<R: rand::Rng + ?Sized>(
    dim: u32,
    member: &CandidateForm,
    noise: f64,
    rng: &mut R,
) -> Result<CubeFn> {
    let flips: Vec<bool> = (0..1u64 << dim.min(MAX_CUBE_DIM))
        .map(|_| rng.gen_bool(noise))
        .collect();
    CubeFn::from_bool_fn(dim, |x| member.approximant_at(x) != flips[x as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::mu_p_dist_sq;

    #[test]
    fn dictator_any_p() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            let f = CubeFn::from_bool_fn(5, |x| x >> 1 & 1 == 1).unwrap();
            let r = decode_mu_p(&f, p).unwrap();
            assert_eq!(r.candidate, CandidateForm::dict(1), "p = {p}");
            assert!(r.distance.abs() < 1e-15);
        }
    }

    #[test]
    fn max_of_two_at_p_point_two() {
        let f = CubeFn::from_bool_fn(6, |x| x & 0b110 != 0).unwrap();
        let r = decode_mu_p(&f, 0.2).unwrap();
        assert_eq!(r.candidate, CandidateForm::max_of([1, 2], Polarity::Direct));
        assert!(r.distance.abs() < 1e-15);
        assert!(r.epsilon <= 0.04 + 1e-12);
    }

    #[test]
    fn projection_is_orthogonal_under_mu_p() {
        let f = CubeFn::from_bool_fn(5, |x| (x * 2654435761) >> 7 & 1 == 1).unwrap();
        let r = decode_mu_p(&f, 0.3).unwrap();
        let c = &r.diagnostics.coefficients;
        let off = r.diagnostics.offset;
        let ell = CubeFn::from_fn(5, |x| {
            off + (0..5)
                .filter(|&i| x >> i & 1 == 1)
                .map(|i| c[i])
                .sum::<f64>()
        })
        .unwrap();
        assert!((mu_p_dist_sq(&f, &ell, 0.3).unwrap() - r.epsilon).abs() < 1e-12);
        let w = mu_p_weights(5, 0.3).unwrap();
        for i in 0..5 {
            let dot: f64 = (0..32u64)
                .map(|x| w[x as usize] * (f.value(x) - ell.value(x)) * (x >> i & 1) as f64)
                .sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn high_p_gives_min() {
        let f = CubeFn::from_bool_fn(4, |x| x & 0b11 == 0b11).unwrap();
        let r = decode_mu_p(&f, 0.8).unwrap();
        assert_eq!(r.candidate, CandidateForm::min_of([0, 1], Polarity::Direct));
        assert!(r.distance.abs() < 1e-15);
    }

    #[test]
    fn embedding_level_uses_exact_fraction() {
        assert_eq!(embedding_level(0.3, 2000).unwrap(), 600);
        assert_eq!(embedding_level(0.3, 50).unwrap(), 15);
    }

    #[test]
    fn marginal_is_a_distribution() {
        let m = embedding_marginal(4, 20, 6).unwrap();
        let total: BigRational = m
            .iter()
            .enumerate()
            .map(|(j, w)| w * BigRational::from_integer(BigInt::from(binomial(4, j as i64))))
            .sum();
        assert_eq!(total, BigRational::from_integer(BigInt::from(1)));
        assert!(embedding_marginal(5, 4, 2).is_err());
    }

    #[test]
    fn total_variation_shrinks() {
        let tvs: Vec<f64> = [50, 100, 500, 2000]
            .iter()
            .map(|&big_n| to_f64(&embedding_total_variation(6, 0.3, big_n).unwrap()))
            .collect();
        assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
    }

    #[test]
    fn embedding_agrees_on_family_member() {
        let f = CubeFn::from_bool_fn(6, |x| x & 0b1001 != 0).unwrap();
        let r = decode_embedding(&f, 0.3, 2000, &DecodeConfig::default()).unwrap();
        assert!(r.candidates_agree);
        assert_eq!(r.level, 600);
    }
}
