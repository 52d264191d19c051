//! Exhaustive cube checks and the `mu_p` embedding comparison.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{closest_dictator, fkn_statistic, project_affine_cube, CubeFn, Dictator};
use crate::decoder::{
    decode_embedding, embedding_total_variation, perturbed_member, CandidateForm, DecodeConfig,
    Polarity,
};
use crate::error::{Error, Result};
use crate::hypergeom::{rational_string, to_f64};
use crate::slice::worker_rng;

/// Largest cube dimension swept exhaustively (`2^16` functions at `m = 4`).
pub const MAX_FKN_DIM: u32 = 4;

/// A ratio together with the function attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeWitness {
    pub ratio: f64,
    pub dim: u32,
    /// Truth table, bit `x` = `f(x)`.
    pub table: u64,
    pub epsilon: f64,
    pub dictator: Dictator,
    pub dictator_distance: f64,
    pub fkn_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeFknReport {
    pub max_dim: u32,
    /// Functions examined, `sum_m 2^(2^m)`.
    pub functions: u64,
    /// Largest `dist_dict / max(eps, 2^(-m-2))`.
    pub dictator_constant: CubeWitness,
    /// Largest `fkn_statistic / max(eps, 2^(-m-2))`.
    pub statistic_constant: CubeWitness,
    /// Functions with `eps = 0` that are not at distance 0 from a dictator.
    pub affine_not_dictator: u64,
    /// `x_0 xor x_1` on two coordinates: `eps` and dictator distance.
    pub xor_epsilon: f64,
    pub xor_dictator_distance: f64,
}

impl CubeFknReport {
    pub fn passed(&self) -> bool {
        self.dictator_constant.ratio.is_finite()
            && self.statistic_constant.ratio.is_finite()
            && self.affine_not_dictator == 0
            && self.xor_epsilon == 0.25
            && self.xor_dictator_distance == 0.5
    }
}

fn examine(dim: u32, table: u64) -> Result<CubeWitness> {
    let f = CubeFn::from_word(dim, table)?;
    let (ell, epsilon) = project_affine_cube(&f);
    let (dictator, dictator_distance) = closest_dictator(&f)?;
    Ok(CubeWitness {
        ratio: 0.0,
        dim,
        table,
        epsilon,
        dictator,
        dictator_distance,
        fkn_statistic: fkn_statistic(&ell),
    })
}

fn larger(a: CubeWitness, b: CubeWitness) -> CubeWitness {
    if b.ratio > a.ratio || (b.ratio == a.ratio && (b.dim, b.table) < (a.dim, a.table)) {
        b
    } else {
        a
    }
}

/// Every Boolean function on `{0,1}^m` for `1 <= m <= max_dim`.
pub fn verify_cube_fkn(max_dim: u32) -> Result<CubeFknReport> {
    if max_dim == 0 || max_dim > MAX_FKN_DIM {
        return Err(Error::OutOfRange(format!(
            "cube sweep needs 1 <= m <= {MAX_FKN_DIM}, got {max_dim}"
        )));
    }
    let all: Vec<CubeWitness> = (1..=max_dim)
        .flat_map(|m| (0..1u64 << (1u64 << m)).map(move |t| (m, t)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(m, t)| examine(m, t))
        .collect::<Result<_>>()?;
    let floor = |w: &CubeWitness| w.epsilon.max((-(w.dim as f64) - 2.0).exp2());
    let dictator_constant = all
        .iter()
        .map(|w| CubeWitness {
            ratio: w.dictator_distance / floor(w),
            ..w.clone()
        })
        .reduce(larger)
        .expect("non-empty sweep");
    let statistic_constant = all
        .iter()
        .map(|w| CubeWitness {
            ratio: w.fkn_statistic / floor(w),
            ..w.clone()
        })
        .reduce(larger)
        .expect("non-empty sweep");
    let affine_not_dictator = all
        .iter()
        .filter(|w| w.epsilon <= 1e-12 && w.dictator_distance > 0.0)
        .count() as u64;
    let xor = examine(2, 0b0110)?;
    Ok(CubeFknReport {
        max_dim,
        functions: all.len() as u64,
        dictator_constant,
        statistic_constant,
        affine_not_dictator,
        xor_epsilon: xor.epsilon,
        xor_dictator_distance: xor.dictator_distance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub big_n: u64,
    pub exact: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDisagreement {
    pub index: usize,
    /// Truth table, bit `x` = `f(x)`.
    pub table: u64,
    pub direct: CandidateForm,
    pub embedded: CandidateForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCheck {
    pub n: u32,
    pub p: f64,
    pub tv: Vec<TvPoint>,
    pub tv_decreasing: bool,
    pub big_n: u64,
    pub functions: usize,
    pub noise: f64,
    pub seed: u64,
    pub disagreements: Vec<EmbeddingDisagreement>,
}

impl EmbeddingCheck {
    pub fn passed(&self) -> bool {
        self.tv_decreasing && self.disagreements.is_empty()
    }
}

/// A random family member on `[n]`: `|S|` uniform in `1..=3`, random polarity.
fn random_member<R: Rng + ?Sized>(n: u32, rng: &mut R) -> CandidateForm {
    let size = rng.gen_range(1..=3.min(n as usize));
    let set = rand::seq::index::sample(rng, n as usize, size).into_vec();
    let pol = if rng.gen_bool(0.5) {
        Polarity::Direct
    } else {
        Polarity::Complement
    };
    CandidateForm::max_of(set, pol)
}

/// Exact total variation along `grid`, then `functions` seeded perturbed family
/// members decoded both directly and through `binom([big_n], floor(p big_n))`.
pub fn verify_embedding(
    n: u32,
    p: f64,
    grid: &[u64],
    big_n: u64,
    functions: usize,
    noise: f64,
    seed: u64,
) -> Result<EmbeddingCheck> {
    if grid.is_empty() {
        return Err(Error::OutOfRange("empty N grid".into()));
    }
    let tv = grid
        .iter()
        .map(|&g| {
            let v = embedding_total_variation(n, p, g)?;
            Ok(TvPoint {
                big_n: g,
                exact: rational_string(&v),
                value: to_f64(&v),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exact: Vec<_> = grid
        .iter()
        .map(|&g| embedding_total_variation(n, p, g))
        .collect::<Result<_>>()?;
    let tv_decreasing = exact.windows(2).all(|w| w[1] < w[0]);
    let config = DecodeConfig::default();
    let mut disagreements = Vec::new();
    for index in 0..functions {
        let mut rng = worker_rng(seed, index as u64);
        let member = random_member(n, &mut rng);
        let f = perturbed_member(n, &member, noise, &mut rng)?;
        let r = decode_embedding(&f, p, big_n, &config)?;
        if !r.candidates_agree {
            let table =
                f.values().iter().enumerate().fold(
                    0u64,
                    |acc, (x, &v)| if v == 1.0 { acc | 1 << x } else { acc },
                );
            disagreements.push(EmbeddingDisagreement {
                index,
                table,
                direct: r.direct.candidate,
                embedded: r.embedded.candidate,
            });
        }
    }
    Ok(EmbeddingCheck {
        n,
        p,
        tv,
        tv_decreasing,
        big_n,
        functions,
        noise,
        seed,
        disagreements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cube_sweep() {
        let r = verify_cube_fkn(3).unwrap();
        assert_eq!(r.functions, 4 + 16 + 256);
        assert!(r.passed(), "{r:?}");
        assert!(r.dictator_constant.ratio >= 1.0);
    }

    #[test]
    fn xor_values() {
        let w = examine(2, 0b0110).unwrap();
        assert_eq!(w.epsilon, 0.25);
        assert_eq!(w.dictator_distance, 0.5);
    }

    #[test]
    fn rejects_large_dim() {
        assert!(verify_cube_fkn(5).is_err());
    }

    #[test]
    fn embedding_small_run() {
        let r = verify_embedding(4, 0.3, &[50, 100], 200, 5, 0.02, 3).unwrap();
        assert!(r.tv_decreasing);
        assert!(r.passed(), "{r:?}");
    }
}
