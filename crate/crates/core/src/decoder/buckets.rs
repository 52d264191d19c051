//! Coefficient bucketing for the two decoder branches.

use serde::{Deserialize, Serialize};

use crate::affine::pair_profile;
use crate::error::{Error, Result};
use crate::numeric::dist_to_unit_lattice;

/// Half-width of the three buckets around `c_pivot + delta`.
pub const BUCKET_HALF_WIDTH: f64 = 0.25;

/// Two-value classification of the coefficients around `c_min` and `c_min + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBuckets {
    /// The smaller bucket (`|S| <= n/2`).
    pub set: Vec<usize>,
    /// Center of the bucket holding `set`.
    pub base: f64,
    /// Center of the other bucket.
    pub other: f64,
    /// `other - base`, in `{-1, +1}`.
    pub delta: i8,
    /// `|c_j - center(j)|^2` per coordinate.
    pub deviations: Vec<f64>,
    /// `8 eps / p`.
    pub radius_sq: f64,
    /// Whether every deviation is within `radius_sq`.
    pub certified: bool,
}

/// Nearest-center classification against `{c_min, c_min + 1}`. The bucket of
/// size at most `n/2` becomes `S`; on equal sizes the `c_min + 1` bucket wins.
pub fn bucket_two(c: &[f64], epsilon: f64, p: f64) -> Result<TwoBuckets> {
    if c.len() < 2 {
        return Err(Error::OutOfRange("bucketing needs n >= 2".into()));
    }
    let low = c.iter().copied().fold(f64::INFINITY, f64::min);
    let high = low + 1.0;
    let in_high: Vec<bool> = c.iter().map(|&v| v - low >= 0.5).collect();
    let n_high = in_high.iter().filter(|&&h| h).count();
    let take_high = 2 * n_high <= c.len();
    let set: Vec<usize> = (0..c.len()).filter(|&j| in_high[j] == take_high).collect();
    let (base, other) = if take_high { (high, low) } else { (low, high) };
    let deviations: Vec<f64> = c
        .iter()
        .zip(&in_high)
        .map(|(&v, &h)| {
            let center = if h { high } else { low };
            (v - center) * (v - center)
        })
        .collect();
    let radius_sq = if p > 0.0 {
        8.0 * epsilon / p
    } else {
        f64::INFINITY
    };
    let certified = deviations.iter().all(|&d| d <= radius_sq);
    Ok(TwoBuckets {
        set,
        base,
        other,
        delta: if other > base { 1 } else { -1 },
        deviations,
        radius_sq,
        certified,
    })
}

/// Three-value classification around a pivot coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeBuckets {
    pub pivot: usize,
    /// `|c_j - c_pivot + 1| < 1/4`.
    pub minus: Vec<usize>,
    /// `|c_j - c_pivot| < 1/4`.
    pub zero: Vec<usize>,
    /// `|c_j - c_pivot - 1| < 1/4`.
    pub plus: Vec<usize>,
    /// Everything else.
    pub rest: Vec<usize>,
    /// `d_i = c_i - 1` on `plus`, `c_i + 1` on `minus`, `c_i` elsewhere.
    pub shifted: Vec<f64>,
    /// Pairs violating `(d_i - d_j)^2 <= 7 dist(c_i - c_j, {0,+-1})^2 + 16`.
    pub bound_violations: usize,
}

/// Pivot = argmin_i `sum_j dist(c_i - c_j, {0,+-1})^2` (first on ties), then
/// strict buckets of half-width 1/4 around `c_pivot + {-1, 0, +1}`.
pub fn bucket_three(c: &[f64]) -> Result<ThreeBuckets> {
    if c.len() < 2 {
        return Err(Error::OutOfRange("bucketing needs n >= 2".into()));
    }
    let profile = pair_profile(c);
    let pivot = profile
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, &v)| if v < best.1 { (i, v) } else { best },
        )
        .0;
    let center = c[pivot];
    let (mut minus, mut zero, mut plus, mut rest) = (vec![], vec![], vec![], vec![]);
    let mut shifted = c.to_vec();
    for (j, &v) in c.iter().enumerate() {
        let gap = v - center;
        if (gap + 1.0).abs() < BUCKET_HALF_WIDTH {
            minus.push(j);
            shifted[j] = v + 1.0;
        } else if gap.abs() < BUCKET_HALF_WIDTH {
            zero.push(j);
        } else if (gap - 1.0).abs() < BUCKET_HALF_WIDTH {
            plus.push(j);
            shifted[j] = v - 1.0;
        } else {
            rest.push(j);
        }
    }
    let mut bound_violations = 0;
    for i in 0..c.len() {
        for j in 0..c.len() {
            let lhs = (shifted[i] - shifted[j]).powi(2);
            let rhs = 7.0 * dist_to_unit_lattice(c[i] - c[j]).powi(2) + 16.0;
            if lhs > rhs + 1e-9 * rhs.max(1.0) {
                bound_violations += 1;
            }
        }
    }
    Ok(ThreeBuckets {
        pivot,
        minus,
        zero,
        plus,
        rest,
        shifted,
        bound_violations,
    })
}
