//! Exact hypergeometric law of `X = sum_{i in S} x_i` for a uniform point of
//! `binom([n], k)` and a fixed set `S` of size `t`.
//!
//! All probabilities are big-integer rationals over the common denominator
//! `C(n, k)`; floats are a view.

use std::io::Write;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PASCAL_ROWS: usize = 256;

fn pascal() -> &'static Vec<Vec<BigUint>> {
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(PASCAL_ROWS);
        rows.push(vec![BigUint::from(1u8)]);
        for n in 1..PASCAL_ROWS {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::from(1u8));
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::from(1u8));
            rows.push(row);
        }
        rows
    })
}

/// Exact `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    if (n as usize) < PASCAL_ROWS {
        return pascal()[n as usize][k as usize].clone();
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k as u64))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(n, k, t)`: population, slice level, marked-set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HypergeomParams {
    pub n: u64,
    pub k: u64,
    pub t: u64,
}

impl HypergeomParams {
    pub fn new(n: u64, k: u64, t: u64) -> Result<Self> {
        if k > n || t > n {
            return Err(Error::OutOfRange(format!(
                "hypergeometric parameters need k, t <= n (n = {n}, k = {k}, t = {t})"
            )));
        }
        Ok(Self { n, k, t })
    }

    /// Support `[max(0, t + k - n), min(t, k)]`.
    pub fn support(&self) -> (i64, i64) {
        let lo = (self.t + self.k).saturating_sub(self.n) as i64;
        (lo, self.t.min(self.k) as i64)
    }

    /// `C(n, k)`.
    pub fn denominator(&self) -> BigUint {
        binomial(self.n, self.k as i64)
    }

    /// `C(t, s) C(n - t, k - s)`.
    pub fn numerator(&self, s: i64) -> BigUint {
        if s < 0 {
            return BigUint::zero();
        }
        binomial(self.t, s) * binomial(self.n - self.t, self.k as i64 - s)
    }

    pub fn pmf(&self, s: i64) -> BigRational {
        ratio(self.numerator(s), self.denominator())
    }

    pub fn pmf_f64(&self, s: i64) -> f64 {
        to_f64(&self.pmf(s))
    }

    /// `floor((k + 1)(t + 1) / (n + 2))`.
    pub fn mode(&self) -> i64 {
        ((self.k + 1) * (self.t + 1) / (self.n + 2)) as i64
    }

    /// Every `s` attaining the maximal probability, by exact comparison.
    pub fn argmax_pmf(&self) -> Vec<i64> {
        let (lo, hi) = self.support();
        let nums: Vec<(i64, BigUint)> = (lo..=hi).map(|s| (s, self.numerator(s))).collect();
        let best = nums
            .iter()
            .map(|(_, v)| v)
            .max()
            .cloned()
            .unwrap_or_default();
        nums.into_iter()
            .filter(|(_, v)| *v == best)
            .map(|(s, _)| s)
            .collect()
    }

    /// `Pr[X = s+1] / Pr[X = s] = (t-s)(k-s) / ((s+1)(n-t-k+s+1))`.
    pub fn ratio(&self, s: i64) -> Result<BigRational> {
        let (lo, hi) = self.support();
        if s < lo || s > hi {
            return Err(Error::ZeroProbability(s));
        }
        let (n, k, t) = (self.n as i64, self.k as i64, self.t as i64);
        let num = (t - s) * (k - s);
        let den = (s + 1) * (n - t - k + s + 1);
        Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// `Pr[X >= r]`.
    pub fn prob_at_least(&self, r: i64) -> BigRational {
        let (lo, hi) = self.support();
        let mut acc = BigUint::zero();
        for s in r.max(lo)..=hi {
            acc += self.numerator(s);
        }
        ratio(acc, self.denominator())
    }

    /// The `m` maximising `Pr[X in {m, m+1}]`, scanning `m` over the support
    /// (smallest maximiser wins), and that probability.
    pub fn top2_mass(&self) -> (i64, BigRational) {
        let (lo, hi) = self.support();
        let mut best: Option<(i64, BigUint)> = None;
        for m in lo..=hi {
            let mass = self.numerator(m) + self.numerator(m + 1);
            if best.as_ref().is_none_or(|(_, b)| mass > *b) {
                best = Some((m, mass));
            }
        }
        let (m, mass) = best.expect("support is never empty");
        (m, ratio(mass, self.denominator()))
    }

    /// `sum_s pmf(s) == 1`, checked through Vandermonde on the numerators.
    pub fn sums_to_one(&self) -> bool {
        let (lo, hi) = self.support();
        let total: BigUint = (lo..=hi).map(|s| self.numerator(s)).sum();
        total == self.denominator()
    }

    /// Checks `pmf(s+1) == ratio(s) pmf(s)` across the support.
    pub fn ratio_recurrence_holds(&self) -> bool {
        let (lo, hi) = self.support();
        (lo..=hi).all(|s| match self.ratio(s) {
            Ok(r) => self.pmf(s + 1) == r * self.pmf(s),
            Err(_) => false,
        })
    }
}

/// Reduced rational as `"num/den"`.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// CSV of the pmf over the support: `s,numerator,denominator,pmf`.
pub fn write_pmf_csv<W: Write>(params: &HypergeomParams, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::OutOfRange(format!("csv output failed: {e}"));
    w.write_record(["s", "numerator", "denominator", "pmf"])
        .map_err(io)?;
    let (lo, hi) = params.support();
    for s in lo..=hi {
        let p = params.pmf(s);
        w.write_record([
            s.to_string(),
            p.numer().to_string(),
            p.denom().to_string(),
            format!("{}", to_f64(&p)),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::OutOfRange(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn hp(n: u64, k: u64, t: u64) -> HypergeomParams {
        HypergeomParams::new(n, k, t).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(hp(10, 3, 4).pmf(1), q(1, 2));
        assert_eq!(hp(10, 3, 4).pmf(-1), q(0, 1));
        assert_eq!(hp(10, 3, 0).pmf(0), q(1, 1));
        assert_eq!(hp(10, 3, 4).pmf(0), q(1, 6));
        assert!(HypergeomParams::new(3, 4, 1).is_err());
    }

    #[test]
    fn mode_examples() {
        assert_eq!(hp(10, 3, 4).mode(), 1);
        assert_eq!(hp(10, 3, 4).argmax_pmf(), vec![1]);
        assert_eq!(hp(9, 4, 0).mode(), 0);
        assert_eq!(hp(4, 2, 2).mode(), 1);
        assert_eq!(hp(4, 2, 2).argmax_pmf(), vec![1]);
        assert_eq!(hp(4, 2, 2).pmf(1), q(2, 3));
    }

    #[test]
    fn ratio_examples() {
        let p = hp(10, 3, 4);
        assert_eq!(p.ratio(0).unwrap(), q(3, 1));
        assert_eq!(p.ratio(1).unwrap(), q(3, 5));
        assert_eq!(p.ratio(3).unwrap(), q(0, 1));
        assert_eq!(p.pmf(2), q(3, 10));
        assert!(matches!(p.ratio(4), Err(Error::ZeroProbability(4))));
        assert!(hp(10, 8, 5).ratio(2).is_err());
        assert!(p.ratio_recurrence_holds());
    }

    #[test]
    fn tail_examples() {
        let p = hp(10, 2, 3);
        assert_eq!(p.prob_at_least(2), q(1, 15));
        assert!(to_f64(&p.prob_at_least(2)) >= (3.0f64 * 0.2).powi(2) / 8.0);
        assert_eq!(p.prob_at_least(0), q(1, 1));
        assert_eq!(hp(10, 4, 1).prob_at_least(2), q(0, 1));
    }

    #[test]
    fn top2_examples() {
        assert_eq!(hp(7, 3, 0).top2_mass(), (0, q(1, 1)));
        assert_eq!(hp(10, 3, 4).top2_mass(), (1, q(4, 5)));
        assert_eq!(hp(4, 2, 2).top2_mass(), (0, q(5, 6)));
    }

    #[test]
    fn pmf_sums_to_one_small_grid() {
        for n in 0..=30 {
            for k in 0..=n {
                for t in 0..=n {
                    assert!(hp(n, k, t).sums_to_one());
                }
            }
        }
    }

    #[test]
    fn large_binomial_falls_back() {
        assert_eq!(binomial(300, 2), BigUint::from(44850u32));
        assert_eq!(binomial(300, 301), BigUint::zero());
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        write_pmf_csv(&hp(10, 3, 4), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,numerator,denominator,pmf");
        assert_eq!(lines[2], "1,1,2,0.5");
        assert_eq!(lines.len(), 5);
    }
}
