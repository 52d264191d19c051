//! Closed-form identities checked against enumeration or exact arithmetic:
//! the variance of affine functions, the max-versus-sum tightness curve, and
//! the hypergeometric facts the decoder relies on.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{random_coeffs, AffineCoeffs, PairFormCoefficient};
use crate::error::{Error, Result};
use crate::hypergeom::{binomial, rational_string, to_f64, HypergeomParams};
use crate::numeric::CompensatedSum;
use crate::slice::{worker_rng, SliceDomain};

/// `E[l^2] - E[l]^2` by enumerating the slice.
pub fn enumerated_variance(ell: &AffineCoeffs) -> f64 {
    let d = ell.domain();
    let (mut s1, mut s2) = (CompensatedSum::new(), CompensatedSum::new());
    for pt in d.points() {
        let v = ell.eval(pt).expect("point of the domain");
        s1.add(v);
        s2.add(v * v);
    }
    let len = d.size() as f64;
    let mean = s1.value() / len;
    s2.value() / len - mean * mean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub n_range: (u32, u32),
    pub vectors_per_n: usize,
    pub seed: u64,
    pub instances: usize,
    /// Largest `|closed form - enumeration|` for the centred form.
    pub centered_error: f64,
    /// Same for the pair form with each leading coefficient.
    pub pair_error_two_n: f64,
    pub pair_error_two_n_minus_two: f64,
    /// Label of the pair-form coefficient that matches enumeration.
    pub matching_coefficient: Option<String>,
}

impl VarianceReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.centered_error <= tol && self.matching_coefficient.is_some()
    }
}

/// For each `n` in the range and each level `1 <= k <= n - 1`, compares the
/// closed forms with enumeration on `per_n` seeded random coefficient vectors
/// (split evenly over the levels) plus the unit vectors.
pub fn verify_variance(n_lo: u32, n_hi: u32, per_n: usize, seed: u64) -> Result<VarianceReport> {
    if n_lo < 3 || n_hi > 12 || n_lo > n_hi {
        return Err(Error::OutOfRange(format!(
            "variance check needs 3 <= n_lo <= n_hi <= 12, got {n_lo}..{n_hi}"
        )));
    }
    let mut cases: Vec<AffineCoeffs> = Vec::new();
    for n in n_lo..=n_hi {
        let mut rng = worker_rng(seed, n as u64);
        for j in 0..per_n {
            let k = 1 + (j as u32 % (n - 1));
            let d = SliceDomain::new(n, k)?;
            cases.push(random_coeffs(d, &mut rng));
        }
        for k in 1..n {
            let d = SliceDomain::new(n, k)?;
            let mut e = vec![0.0; n as usize];
            e[0] = 1.0;
            cases.push(AffineCoeffs::new(d, e)?);
            cases.push(AffineCoeffs::new(d, vec![0.7; n as usize])?);
        }
    }
    let errors: Vec<[f64; 3]> = cases
        .par_iter()
        .map(|ell| {
            let truth = enumerated_variance(ell);
            Ok([
                (ell.variance()? - truth).abs(),
                (ell.variance_pair_form(PairFormCoefficient::TwoN)? - truth).abs(),
                (ell.variance_pair_form(PairFormCoefficient::TwoNMinusTwo)? - truth).abs(),
            ])
        })
        .collect::<Result<_>>()?;
    let max_of = |j: usize| errors.iter().map(|e| e[j]).fold(0.0, f64::max);
    let (c, a, b) = (max_of(0), max_of(1), max_of(2));
    let matching = [
        (a, PairFormCoefficient::TwoN),
        (b, PairFormCoefficient::TwoNMinusTwo),
    ]
    .into_iter()
    .filter(|(e, _)| *e <= 1e-10)
    .map(|(_, f)| f.label().to_string())
    .next();
    Ok(VarianceReport {
        n_range: (n_lo, n_hi),
        vectors_per_n: per_n,
        seed,
        instances: cases.len(),
        centered_error: c,
        pair_error_two_n: a,
        pair_error_two_n_minus_two: b,
        matching_coefficient: matching,
    })
}

/// Exact `||max_{i in S} x_i - sum_{i in S} x_i||^2 = sum_{j >= 2} (j - 1)^2 Pr[X = j]`
/// with `X` hypergeometric `(n, k, s)`.
pub fn max_sum_gap(n: u64, k: u64, s: u64) -> Result<BigRational> {
    let h = HypergeomParams::new(n, k, s)?;
    let (_, hi) = h.support();
    let mut acc = BigUint::zero();
    for j in 2..=hi {
        acc += BigUint::from(((j - 1) * (j - 1)) as u64) * h.numerator(j);
    }
    Ok(BigRational::new(
        BigInt::from(acc),
        BigInt::from(h.denominator()),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub n: u64,
    pub k: u64,
    pub s: u64,
    pub value_exact: String,
    pub value: f64,
    /// `(p s)^2` with `p = k / n`.
    pub ps_sq: f64,
    pub ratio: f64,
}

/// One row per grid point with `p s <= 1/2`; other points are skipped.
pub fn tightness_curve(points: &[(u64, u64)], s_values: &[u64]) -> Result<Vec<TightnessRow>> {
    let mut rows = Vec::new();
    for &(n, k) in points {
        for &s in s_values {
            if s == 0 || s > n || 2 * s * k > n {
                continue;
            }
            let v = max_sum_gap(n, k, s)?;
            let ps = s as f64 * k as f64 / n as f64;
            let value = to_f64(&v);
            rows.push(TightnessRow {
                n,
                k,
                s,
                value_exact: rational_string(&v),
                value,
                ps_sq: ps * ps,
                ratio: value / (ps * ps),
            });
        }
    }
    Ok(rows)
}

/// Largest ratio in a tightness table, as `(ratio, row)`.
pub fn tightness_max(rows: &[TightnessRow]) -> Option<&TightnessRow> {
    rows.iter()
        .fold(None, |best: Option<&TightnessRow>, r| match best {
            Some(b) if b.ratio >= r.ratio => Some(b),
            _ => Some(r),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness3 {
    pub n: u64,
    pub k: u64,
    pub t: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeomReport {
    pub mode_max_n: u64,
    pub mode_checked: u64,
    pub mode_violations: u64,
    pub mode_witness: Option<Witness3>,
    pub ratio_checked: u64,
    pub ratio_violations: u64,
    pub tail_max_n: u64,
    pub tail_checked: u64,
    pub tail_violations: u64,
    /// Smallest `Pr[X >= 2] / ((t p)^2 / 8)` on the tail grid.
    pub tail_min_ratio: Option<Witness3>,
    pub gamma_max_n: u64,
    /// Largest `gamma` such that every grid point with `top2 >= 1 - gamma`
    /// has mode 0 and `t <= 3n / (2k)`; the witness is the point that caps it.
    pub gamma0: Option<Witness3>,
    /// Smallest `Pr[X = 0]` among grid points within that `gamma0`.
    pub min_p0_within_gamma0: Option<f64>,
}

impl HypergeomReport {
    pub fn passed(&self) -> bool {
        self.mode_violations == 0 && self.ratio_violations == 0 && self.tail_violations == 0
    }
}

/// `(1 - top2 mass, mode 0 and t <= 3n/(2k), Pr[X = 0], (n, k, t))`.
type GammaRow = (BigRational, bool, BigRational, (u64, u64, u64));

fn grid(max_n: u64) -> Vec<(u64, u64, u64)> {
    (0..=max_n)
        .flat_map(|n| (0..=n).flat_map(move |k| (0..=n).map(move |t| (n, k, t))))
        .collect()
}

/// `Pr[X = s+1] (s+1)(n-t-k+s+1) == Pr[X = s] (t-s)(k-s)` on integers over the support.
fn ratio_ok(h: &HypergeomParams) -> bool {
    let (lo, hi) = h.support();
    let (n, k, t) = (h.n as i64, h.k as i64, h.t as i64);
    (lo..=hi).all(|s| {
        let lhs = h.numerator(s + 1) * BigUint::from(((s + 1) * (n - t - k + s + 1)) as u64);
        let rhs = h.numerator(s) * BigUint::from(((t - s) * (k - s)) as u64);
        lhs == rhs
    })
}

/// Runs the mode and ratio checks on every `(n, k, t)` with `n <= mode_max_n`,
/// the `Pr[X >= 2] >= (tp)^2/8` bound on `2 <= k <= n/2`, `2 <= t <= 3n/(2k)`,
/// `n <= tail_max_n`, and the empirical `gamma_0` scan on
/// `4 <= k, t <= n/2`, `n <= gamma_max_n`.
pub fn verify_hypergeom(
    mode_max_n: u64,
    tail_max_n: u64,
    gamma_max_n: u64,
) -> Result<HypergeomReport> {
    let mode_grid = grid(mode_max_n);
    let mode_results: Vec<(bool, bool, (u64, u64, u64))> = mode_grid
        .par_iter()
        .map(|&(n, k, t)| {
            let h = HypergeomParams { n, k, t };
            (h.argmax_pmf().contains(&h.mode()), ratio_ok(&h), (n, k, t))
        })
        .collect();
    let mode_violations = mode_results.iter().filter(|r| !r.0).count() as u64;
    let ratio_violations = mode_results.iter().filter(|r| !r.1).count() as u64;
    let mode_witness = mode_results.iter().find(|r| !r.0).map(|r| Witness3 {
        n: r.2 .0,
        k: r.2 .1,
        t: r.2 .2,
        value: HypergeomParams {
            n: r.2 .0,
            k: r.2 .1,
            t: r.2 .2,
        }
        .mode() as f64,
    });

    let tail_grid: Vec<(u64, u64, u64)> = (4..=tail_max_n)
        .flat_map(|n| {
            (2..=n / 2).flat_map(move |k| (2..=(3 * n / (2 * k)).min(n)).map(move |t| (n, k, t)))
        })
        .collect();
    let tails: Vec<(bool, f64, (u64, u64, u64))> = tail_grid
        .par_iter()
        .map(|&(n, k, t)| {
            let h = HypergeomParams { n, k, t };
            let (_, hi) = h.support();
            let tail: BigUint = (2..=hi).map(|s| h.numerator(s)).sum();
            // tail / C(n,k) >= t^2 k^2 / (8 n^2)
            let lhs = &tail * BigUint::from(8 * n * n);
            let rhs = BigUint::from(t * t * k * k) * h.denominator();
            let ratio = to_f64(&BigRational::new(
                BigInt::from(lhs.clone()),
                BigInt::from(rhs.clone()),
            ));
            (lhs >= rhs, ratio, (n, k, t))
        })
        .collect();
    let tail_violations = tails.iter().filter(|r| !r.0).count() as u64;
    let tail_min_ratio = tails
        .iter()
        .fold(None::<&(bool, f64, (u64, u64, u64))>, |b, r| match b {
            Some(x) if x.1 <= r.1 => Some(x),
            _ => Some(r),
        })
        .map(|r| Witness3 {
            n: r.2 .0,
            k: r.2 .1,
            t: r.2 .2,
            value: r.1,
        });

    let gamma_grid: Vec<(u64, u64, u64)> = (8..=gamma_max_n)
        .flat_map(|n| (4..=n / 2).flat_map(move |k| (4..=n / 2).map(move |t| (n, k, t))))
        .collect();
    let gamma_rows: Vec<GammaRow> = gamma_grid
        .par_iter()
        .map(|&(n, k, t)| {
            let h = HypergeomParams { n, k, t };
            let (_, mass) = h.top2_mass();
            let gap = BigRational::one() - mass;
            let ok = h.mode() == 0 && 2 * k * t <= 3 * n;
            (gap, ok, h.pmf(0), (n, k, t))
        })
        .collect();
    let cap = gamma_rows.iter().filter(|r| !r.1).fold(
        None::<&(BigRational, bool, BigRational, (u64, u64, u64))>,
        |b, r| match b {
            Some(x) if x.0 <= r.0 => Some(x),
            _ => Some(r),
        },
    );
    let gamma0 = cap.map(|r| Witness3 {
        n: r.3 .0,
        k: r.3 .1,
        t: r.3 .2,
        value: to_f64(&r.0),
    });
    let min_p0_within_gamma0 = gamma_rows
        .iter()
        .filter(|r| cap.is_none_or(|c| r.0 < c.0))
        .map(|r| to_f64(&r.2))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));

    Ok(HypergeomReport {
        mode_max_n,
        mode_checked: mode_grid.len() as u64,
        mode_violations,
        mode_witness,
        ratio_checked: mode_grid.len() as u64,
        ratio_violations,
        tail_max_n,
        tail_checked: tail_grid.len() as u64,
        tail_violations,
        tail_min_ratio,
        gamma_max_n,
        gamma0,
        min_p0_within_gamma0,
    })
}

/// `sum_s pmf(s) == 1` for all `(n, k, t)` with `n <= max_n`; returns the failures.
pub fn pmf_normalization_failures(max_n: u64) -> Vec<(u64, u64, u64)> {
    grid(max_n)
        .into_par_iter()
        .filter(|&(n, k, t)| {
            let total: BigUint = {
                let h = HypergeomParams { n, k, t };
                let (lo, hi) = h.support();
                (lo..=hi).map(|s| h.numerator(s)).sum()
            };
            total != binomial(n, k as i64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::BoolTable;

    #[test]
    fn unit_vector_variance() {
        let d = SliceDomain::new(4, 2).unwrap();
        let ell = AffineCoeffs::new(d, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((enumerated_variance(&ell) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn small_variance_run_picks_two_n() {
        let r = verify_variance(4, 6, 10, 1).unwrap();
        assert!(r.centered_error < 1e-10);
        assert_eq!(r.matching_coefficient.as_deref(), Some("k(n-k)/(2n)"));
        assert!(r.pair_error_two_n_minus_two > 1e-3);
    }

    #[test]
    fn tightness_examples() {
        let v = max_sum_gap(10, 2, 2).unwrap();
        assert_eq!(v, BigRational::new(1.into(), 45.into()));
        assert!(max_sum_gap(10, 3, 1).unwrap().is_zero());
        let rows = tightness_curve(&[(10, 2)], &[2]).unwrap();
        assert!((rows[0].ps_sq - 0.16).abs() < 1e-15);
        assert!((rows[0].ratio - 0.138_888_888_888).abs() < 1e-9);
    }

    #[test]
    fn tightness_matches_enumeration() {
        for (n, k, s) in [(10u32, 2u32, 2usize), (9, 3, 3), (12, 2, 4)] {
            let d = SliceDomain::new(n, k).unwrap();
            let gap: f64 = d
                .points()
                .map(|p| {
                    let sum = (0..s).filter(|&i| p.contains(i)).count() as f64;
                    let max = if sum > 0.0 { 1.0 } else { 0.0 };
                    (max - sum) * (max - sum)
                })
                .sum::<f64>()
                / d.size() as f64;
            let exact = to_f64(&max_sum_gap(n as u64, k as u64, s as u64).unwrap());
            assert!((gap - exact).abs() < 1e-12);
            let _ = BoolTable::constant(d, false);
        }
    }

    #[test]
    fn small_hypergeom_grid() {
        let r = verify_hypergeom(20, 40, 24).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(pmf_normalization_failures(20).is_empty());
    }
}
