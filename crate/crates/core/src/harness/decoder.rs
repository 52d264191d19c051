//! Decoder sweeps against a brute-force search over the whole family.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::project_affine;
use crate::decoder::{
    candidate_table, decode_with, subcube_check, CandidateForm, DecodeConfig, DecodeReport,
    Polarity,
};
use crate::error::{Error, Result};
use crate::slice::{dist_sq, worker_rng, BoolTable, SliceDomain};

/// Largest `n` for which the family is searched exhaustively.
pub const FAMILY_MAX_N: u32 = 16;

/// Minimum of `Pr[f != g]` over constants, (anti-)dictators and every
/// `max_S` (`min_S` when `k > n/2`) in both polarities, as a mismatch count.
/// Ties go to the first candidate in [`CandidateForm::tie_order`].
pub fn family_optimum(f: &BoolTable) -> Result<(CandidateForm, u64)> {
    let domain = f.domain();
    let n = domain.n();
    if n > FAMILY_MAX_N {
        return Err(Error::TooLarge(format!("family search over 2^{n} sets")));
    }
    let points: Vec<u64> = domain.points().map(|p| p.bits()).collect();
    let ones: Vec<bool> = f.values().iter().map(|b| *b).collect();
    let use_min = 2 * domain.k() > n;
    let count = |c: &CandidateForm| -> u64 {
        points
            .iter()
            .zip(&ones)
            .filter(|(x, v)| c.approximant_at(**x) != **v)
            .count() as u64
    };
    let mut best: Option<(CandidateForm, u64)> = None;
    let mut consider = |c: CandidateForm| {
        let d = count(&c);
        let better = match &best {
            None => true,
            Some((b, bd)) => d < *bd || (d == *bd && c.tie_order(b).is_lt()),
        };
        if better {
            best = Some((c, d));
        }
    };
    for i in 0..n as usize {
        consider(CandidateForm::dict(i));
        consider(CandidateForm::anti_dict(i));
    }
    for mask in 0u64..1 << n {
        let set: Vec<usize> = (0..n as usize).filter(|&i| mask >> i & 1 == 1).collect();
        for pol in [Polarity::Direct, Polarity::Complement] {
            consider(if use_min {
                CandidateForm::min_of(set.clone(), pol)
            } else {
                CandidateForm::max_of(set.clone(), pol)
            });
        }
    }
    Ok(best.expect("family is never empty"))
}

/// One instance where decode missed the family optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Miss {
    /// Truth table as a word, bit `r` = `f` at colex rank `r`.
    pub table: u64,
    pub decoded: CandidateForm,
    pub decoded_distance: f64,
    pub optimum: CandidateForm,
    pub optimum_distance: f64,
}

/// Largest `|S| p / sqrt(eps)` seen, with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeWitness {
    pub ratio: f64,
    pub table: u64,
    pub candidate: CandidateForm,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderSweep {
    pub n: u32,
    pub k: u32,
    pub functions: u64,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub misses: u64,
    /// First few misses, in table order.
    pub witnesses: Vec<Miss>,
    /// Distances that differ from an independent recomputation by more than `1e-12`.
    pub unsound: u64,
    /// Largest `|S| p / sqrt(eps)` over instances with `|S| > 1`.
    pub size_constant: Option<SizeWitness>,
    /// Largest `|S|` returned.
    pub max_set_size: usize,
    /// Branch tag counts, by tag.
    pub branches: Vec<(String, u64)>,
}

impl DecoderSweep {
    pub fn passed(&self) -> bool {
        self.misses == 0 && self.unsound == 0
    }
}

const MAX_WITNESSES: usize = 8;

struct Outcome {
    table: u64,
    report: DecodeReport,
    miss: Option<Miss>,
    unsound: bool,
}

fn check_one(domain: SliceDomain, table: u64, config: &DecodeConfig) -> Result<Outcome> {
    let f = BoolTable::from_word(domain, table)?;
    let report = decode_with(&f, config)?;
    let (opt, opt_count) = family_optimum(&f)?;
    let len = domain.size() as f64;
    let recomputed = dist_sq(&f, &candidate_table(domain, &report.candidate))?;
    let unsound = (recomputed - report.distance).abs() > 1e-12;
    let optimum_distance = opt_count as f64 / len;
    let miss = (recomputed > optimum_distance + 1e-12).then(|| Miss {
        table,
        decoded: report.candidate.clone(),
        decoded_distance: recomputed,
        optimum: opt,
        optimum_distance,
    });
    Ok(Outcome {
        table,
        report,
        miss,
        unsound,
    })
}

fn summarize(
    domain: SliceDomain,
    exhaustive: bool,
    seed: Option<u64>,
    outcomes: Vec<Outcome>,
) -> DecoderSweep {
    let p = domain.p_f64();
    let mut sweep = DecoderSweep {
        n: domain.n(),
        k: domain.k(),
        functions: outcomes.len() as u64,
        exhaustive,
        seed,
        misses: 0,
        witnesses: Vec::new(),
        unsound: 0,
        size_constant: None,
        max_set_size: 0,
        branches: Vec::new(),
    };
    let mut branches = std::collections::BTreeMap::<String, u64>::new();
    for o in outcomes {
        if let Some(m) = o.miss {
            sweep.misses += 1;
            if sweep.witnesses.len() < MAX_WITNESSES {
                sweep.witnesses.push(m);
            }
        }
        sweep.unsound += o.unsound as u64;
        let r = &o.report;
        *branches.entry(r.branch.tag().to_string()).or_default() += 1;
        sweep.max_set_size = sweep.max_set_size.max(r.set_size);
        if r.set_size > 1 {
            let ratio = r.set_size as f64 * p / r.epsilon.max(0.0).sqrt();
            if sweep.size_constant.as_ref().is_none_or(|w| ratio > w.ratio) {
                sweep.size_constant = Some(SizeWitness {
                    ratio,
                    table: o.table,
                    candidate: r.candidate.clone(),
                    epsilon: r.epsilon,
                });
            }
        }
    }
    sweep.branches = branches.into_iter().collect();
    sweep
}

/// Every Boolean function on a slice with at most 24 points.
pub fn sweep_decoder_exhaustive(
    domain: SliceDomain,
    config: &DecodeConfig,
) -> Result<DecoderSweep> {
    if domain.size() > 24 {
        return Err(Error::TooLarge(format!(
            "exhaustive decoder sweep over 2^{} functions",
            domain.size()
        )));
    }
    let outcomes = (0..1u64 << domain.size())
        .into_par_iter()
        .map(|t| check_one(domain, t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(domain, true, None, outcomes))
}

/// `count` uniformly random functions, drawn in order from `seed`.
pub fn sweep_decoder_random(
    domain: SliceDomain,
    count: u64,
    seed: u64,
    config: &DecodeConfig,
) -> Result<DecoderSweep> {
    if domain.size() > 64 {
        return Err(Error::TooLarge(format!(
            "random decoder sweep needs at most 64 points, {domain} has {}",
            domain.size()
        )));
    }
    let mask = if domain.size() == 64 {
        u64::MAX
    } else {
        (1u64 << domain.size()) - 1
    };
    let mut rng = worker_rng(seed, 0);
    let tables: Vec<u64> = (0..count).map(|_| rng.gen::<u64>() & mask).collect();
    let outcomes = tables
        .par_iter()
        .map(|&t| check_one(domain, t, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(domain, false, Some(seed), outcomes))
}

/// Sub-cube self-consistency on one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcubeCase {
    pub n: u32,
    pub k: u32,
    pub table: u64,
    pub restricted_mean: f64,
    pub stderr: f64,
    pub global: f64,
    /// `|restricted - global| / stderr`, or 0 when both agree exactly.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcubeReport {
    pub trials: usize,
    pub seed: u64,
    pub cases: Vec<SubcubeCase>,
    pub max_z: f64,
    pub failures: usize,
}

/// `instances` seeded random functions per domain, `trials` sub-cubes each;
/// a case fails when the restricted mean is more than 3 stderr from `||f - l||^2`.
pub fn verify_subcube(
    domains: &[SliceDomain],
    instances: usize,
    trials: usize,
    seed: u64,
) -> Result<SubcubeReport> {
    let mut cases = Vec::new();
    for (di, &domain) in domains.iter().enumerate() {
        if domain.size() > 64 {
            return Err(Error::TooLarge(format!("{domain} has more than 64 points")));
        }
        let mut rng = worker_rng(seed, 2 * di as u64);
        let tables: Vec<u64> = (0..instances).map(|_| rng.gen::<u64>()).collect();
        let mask = if domain.size() == 64 {
            u64::MAX
        } else {
            (1u64 << domain.size()) - 1
        };
        let run = tables
            .par_iter()
            .enumerate()
            .map(|(j, &t)| {
                let f = BoolTable::from_word(domain, t & mask)?;
                let ell = project_affine(&f)?.coeffs;
                let stream = (1u64 << 32) * (di as u64 + 1) + j as u64;
                let s = subcube_check(&f, &ell, &mut worker_rng(seed, stream), trials)?;
                let gap = (s.restricted_residual.mean - s.global_residual).abs();
                let se = s.restricted_residual.stderr;
                let z = if gap <= 1e-12 {
                    0.0
                } else if se > 0.0 {
                    gap / se
                } else {
                    f64::INFINITY
                };
                Ok(SubcubeCase {
                    n: domain.n(),
                    k: domain.k(),
                    table: t & mask,
                    restricted_mean: s.restricted_residual.mean,
                    stderr: se,
                    global: s.global_residual,
                    z,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        cases.extend(run);
    }
    let max_z = cases.iter().map(|c| c.z).fold(0.0, f64::max);
    let failures = cases.iter().filter(|c| c.z > 3.0).count();
    Ok(SubcubeReport {
        trials,
        seed,
        cases,
        max_z,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimum_of_family_members_is_zero() {
        let d = SliceDomain::new(6, 2).unwrap();
        let f = BoolTable::from_fn(d, |p| p.contains(0) || p.contains(3)).unwrap();
        let (c, miss) = family_optimum(&f).unwrap();
        assert_eq!(miss, 0);
        assert_eq!(c, CandidateForm::max_of([0, 3], Polarity::Direct));
    }

    #[test]
    fn small_exhaustive_sweep() {
        let d = SliceDomain::new(4, 2).unwrap();
        let s = sweep_decoder_exhaustive(d, &DecodeConfig::default()).unwrap();
        assert_eq!(s.functions, 64);
        assert!(s.passed(), "{s:?}");
    }
}
