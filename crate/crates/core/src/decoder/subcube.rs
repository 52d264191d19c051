//! Restrictions of a slice function to random embedded cubes
//! `{a_1, b_1} x ... x {a_k, b_k}`.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{pair_stat, AffineCoeffs};
use crate::cube::{closest_dictator, fkn_statistic, CubeAffine, CubeFn};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::slice::{dist_sq, BoolTable};

/// Largest sub-cube dimension `k` accepted.
pub const MAX_SUBCUBE_DIM: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcubeStats {
    pub trials: usize,
    /// `E_D ||f|_D - l|_D||^2`.
    pub restricted_residual: Estimate,
    /// `||f - l||^2` on the whole slice.
    pub global_residual: f64,
    /// `E_D sum_i dist(c_{b_i} - c_{a_i}, {0, +-1})^2`.
    pub fkn_statistic: Estimate,
    /// `k E_{i != j} dist(c_i - c_j, {0, +-1})^2`, the exact value of the line above.
    pub pair_statistic: f64,
    /// `E_D` of the restricted closest-dictator distance.
    pub dictator_distance: Estimate,
}

#[derive(Default)]
struct Moments {
    sum: CompensatedSum,
    sq: CompensatedSum,
}

impl Moments {
    fn add(&mut self, x: f64) {
        self.sum.add(x);
        self.sq.add(x * x);
    }

    fn finish(&self, trials: usize) -> Estimate {
        let m = trials as f64;
        let mean = self.sum.value() / m;
        let var = if trials > 1 {
            ((self.sq.value() / m - mean * mean) * m / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / m).sqrt(),
        }
    }
}

/// Samples `trials` sub-cubes (`a_i -> 0`, `b_i -> 1`) and averages the
/// restricted residual, the cube FKN statistic of the restricted affine part
/// and the restricted closest-dictator distance.
pub fn subcube_check<R: Rng + ?Sized>(
    f: &BoolTable,
    ell: &AffineCoeffs,
    rng: &mut R,
    trials: usize,
) -> Result<SubcubeStats> {
    let domain = f.domain();
    if ell.domain() != domain {
        return Err(Error::DomainMismatch(format!(
            "function on {domain}, affine part on {}",
            ell.domain()
        )));
    }
    let (n, k) = (domain.n() as usize, domain.k() as usize);
    if 2 * k > n || k == 0 {
        return Err(Error::OutOfRange(format!(
            "sub-cubes need 1 <= k and 2k <= n, got {domain}"
        )));
    }
    if k as u32 > MAX_SUBCUBE_DIM {
        return Err(Error::TooLarge(format!("sub-cube dimension {k}")));
    }
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    let c = ell.coeffs();
    let (mut resid, mut stat, mut dict) =
        (Moments::default(), Moments::default(), Moments::default());
    for _ in 0..trials {
        let idx = sample_indices(rng, n, 2 * k).into_vec();
        let (a, b) = idx.split_at(k);
        let word = |y: u64| {
            (0..k).fold(0u64, |w, i| {
                w | 1u64 << if y >> i & 1 == 1 { b[i] } else { a[i] }
            })
        };
        let restricted = CubeFn::from_bool_fn(k as u32, |y| {
            let x = domain
                .point(word(y))
                .expect("sub-cube points lie on the slice");
            f.get(domain.rank(x).expect("valid point") as usize)
        })?;
        let affine = CubeAffine {
            constant: ell.offset() + csum_pairs(a, b, c),
            linear: (0..k).map(|i| (c[a[i]] - c[b[i]]) / 2.0).collect(),
        };
        let mut acc = CompensatedSum::new();
        for (y, v) in restricted.values().iter().enumerate() {
            let r = v - affine.eval(y as u64);
            acc.add(r * r);
        }
        resid.add(acc.value() / restricted.values().len() as f64);
        stat.add(fkn_statistic(&affine));
        dict.add(closest_dictator(&restricted)?.1);
    }
    let ell_table = ell.to_table();
    let global_residual = dist_sq(f, &ell_table)?;
    Ok(SubcubeStats {
        trials,
        restricted_residual: resid.finish(trials),
        global_residual,
        fkn_statistic: stat.finish(trials),
        pair_statistic: pair_stat(ell)?.scaled,
        dictator_distance: dict.finish(trials),
    })
}

/// Constant Fourier coefficient of the restricted affine part: `sum_i (c_{a_i} + c_{b_i}) / 2`.
fn csum_pairs(a: &[usize], b: &[usize], c: &[f64]) -> f64 {
    crate::numeric::csum(a.iter().zip(b).map(|(&i, &j)| (c[i] + c[j]) / 2.0))
}
