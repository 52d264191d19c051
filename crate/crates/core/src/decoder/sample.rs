//! Weighted point sets on which candidates are scored.

use rand::Rng;
use rayon::prelude::*;

use super::candidate::{set_mask, CandidateForm, CandidateKind, Polarity};
use crate::affine::EstimationPath;
use crate::numeric::csum;
use crate::slice::{BoolTable, SliceDomain};

/// Number of equal rank blocks used for stratified sampling.
pub const STRATA: u64 = 64;

#[derive(Debug, Clone)]
struct Stratum {
    start: usize,
    end: usize,
    weight: f64,
}

/// Points with Boolean values and a probability weight each.
#[derive(Debug, Clone)]
pub(crate) struct Sample {
    points: Vec<u64>,
    values: Vec<bool>,
    /// `None` means uniform over `points`.
    weights: Option<Vec<f64>>,
    strata: Option<Vec<Stratum>>,
}

impl Sample {
    /// Every point of the slice, uniformly weighted.
    pub fn slice_exact(f: &BoolTable) -> Sample {
        let domain = f.domain();
        Sample {
            points: domain.points().map(|p| p.bits()).collect(),
            values: f.values().iter().map(|b| *b).collect(),
            weights: None,
            strata: None,
        }
    }

    /// Stratified sample: `STRATA` equal blocks of ranks, proportional allocation.
    pub fn slice_stratified<R: Rng + ?Sized>(f: &BoolTable, samples: usize, rng: &mut R) -> Sample {
        let domain = f.domain();
        let size = domain.size();
        let blocks = STRATA.min(size).max(1);
        let per = (samples as u64 / blocks).max(2) as usize;
        let mut points = Vec::with_capacity(per * blocks as usize);
        let mut values = Vec::with_capacity(per * blocks as usize);
        let mut weights = Vec::with_capacity(per * blocks as usize);
        let mut strata = Vec::with_capacity(blocks as usize);
        for b in 0..blocks {
            let lo = size * b / blocks;
            let hi = size * (b + 1) / blocks;
            let w = (hi - lo) as f64 / size as f64;
            let start = points.len();
            for _ in 0..per {
                let r = rng.gen_range(lo..hi);
                points.push(domain.unrank(r).expect("rank in range").bits());
                values.push(f.get(r as usize));
                weights.push(w / per as f64);
            }
            strata.push(Stratum {
                start,
                end: points.len(),
                weight: w,
            });
        }
        Sample {
            points,
            values,
            weights: Some(weights),
            strata: Some(strata),
        }
    }

    /// Explicit atoms, e.g. the cube under `mu_p`.
    pub fn weighted(points: Vec<u64>, values: Vec<bool>, weights: Vec<f64>) -> Sample {
        Sample {
            points,
            values,
            weights: Some(weights),
            strata: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    fn weight(&self, j: usize) -> f64 {
        match &self.weights {
            Some(w) => w[j],
            None => 1.0 / self.points.len() as f64,
        }
    }

    /// `E[target]` where target is `f` or `1 - f`.
    pub fn mean(&self, polarity: Polarity) -> f64 {
        let flip = polarity == Polarity::Complement;
        csum((0..self.points.len()).map(|j| {
            if self.values[j] != flip {
                self.weight(j)
            } else {
                0.0
            }
        }))
    }

    /// `E[target * x_i]` for every coordinate.
    pub fn correlations(&self, n: usize, polarity: Polarity) -> Vec<f64> {
        let flip = polarity == Polarity::Complement;
        (0..n)
            .map(|i| {
                csum((0..self.points.len()).map(|j| {
                    if self.values[j] != flip && self.points[j] >> i & 1 == 1 {
                        self.weight(j)
                    } else {
                        0.0
                    }
                }))
            })
            .collect()
    }

    fn mismatches(&self, cand: &CandidateForm) -> impl Iterator<Item = bool> + '_ {
        let eval = Evaluator::new(cand);
        self.points
            .iter()
            .zip(&self.values)
            .map(move |(&x, &v)| eval.at(x) != v)
    }

    /// `Pr[f != approximant]` under the sample's weights.
    pub fn distance(&self, cand: &CandidateForm) -> f64 {
        match &self.weights {
            None => self.mismatches(cand).filter(|&m| m).count() as f64 / self.points.len() as f64,
            Some(w) => csum(
                self.mismatches(cand)
                    .zip(w)
                    .map(|(m, &w)| if m { w } else { 0.0 }),
            ),
        }
    }

    /// Standard error of [`Sample::distance`] for the stratified estimator.
    pub fn stderr(&self, cand: &CandidateForm) -> Option<f64> {
        let strata = self.strata.as_ref()?;
        let miss: Vec<bool> = self.mismatches(cand).collect();
        let var = csum(strata.iter().map(|s| {
            let nh = (s.end - s.start) as f64;
            let ph = miss[s.start..s.end].iter().filter(|&&m| m).count() as f64 / nh;
            let s2 = ph * (1.0 - ph) * nh / (nh - 1.0);
            s.weight * s.weight * s2 / nh
        }));
        Some(var.sqrt())
    }

    pub fn path(&self, cand: &CandidateForm) -> EstimationPath {
        match self.stderr(cand) {
            None => EstimationPath::Exact,
            Some(stderr) => EstimationPath::MonteCarlo {
                samples: self.points.len(),
                stderr,
            },
        }
    }

    /// Every candidate with its distance, scored in parallel.
    pub fn scores(&self, cands: &[CandidateForm]) -> Vec<(CandidateForm, f64)> {
        cands
            .par_iter()
            .map(|c| (c.clone(), self.distance(c)))
            .collect()
    }

    /// Scores every candidate in parallel and returns the winner: least
    /// distance, ties (within `1e-12`) broken by [`CandidateForm::tie_order`].
    pub fn best(&self, cands: &[CandidateForm]) -> Option<(CandidateForm, f64)> {
        let scores: Vec<f64> = cands.par_iter().map(|c| self.distance(c)).collect();
        let mut best: Option<(usize, f64)> = None;
        for (j, &d) in scores.iter().enumerate() {
            best = match best {
                None => Some((j, d)),
                Some((b, bd)) => {
                    let better = if (d - bd).abs() <= 1e-12 {
                        cands[j].tie_order(&cands[b]).is_lt()
                    } else {
                        d < bd
                    };
                    if better {
                        Some((j, d))
                    } else {
                        Some((b, bd))
                    }
                }
            };
        }
        best.map(|(j, d)| (cands[j].clone(), d))
    }
}

/// Precomputed masks for fast evaluation of a candidate's approximant.
struct Evaluator {
    kind: u8,
    mask: u64,
    invert: bool,
}

impl Evaluator {
    fn new(c: &CandidateForm) -> Evaluator {
        let (kind, mask) = match &c.kind {
            CandidateKind::Const(b) => (if *b { 1 } else { 0 }, 0),
            CandidateKind::Dict(i) => (2, 1u64 << i),
            CandidateKind::AntiDict(i) => (3, 1u64 << i),
            CandidateKind::MaxOf(s) => (2, set_mask(s)),
            CandidateKind::MinOf(s) => (4, set_mask(s)),
        };
        Evaluator {
            kind,
            mask,
            invert: c.polarity == Polarity::Complement,
        }
    }

    #[inline]
    fn at(&self, x: u64) -> bool {
        let g = match self.kind {
            0 => false,
            1 => true,
            2 => x & self.mask != 0,
            3 => x & self.mask == 0,
            _ => x & self.mask == self.mask,
        };
        g != self.invert
    }
}

/// Exact Boolean table of a candidate's approximant on a slice.
pub fn candidate_table(domain: SliceDomain, cand: &CandidateForm) -> BoolTable {
    BoolTable::from_fn(domain, |p| cand.approximant_at(p.bits())).expect("domain already validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::worker_rng;

    #[test]
    fn evaluator_agrees_with_candidate() {
        let cands = [
            CandidateForm::constant(true),
            CandidateForm::anti_dict(2),
            CandidateForm::max_of([0, 3], Polarity::Complement),
            CandidateForm::min_of([1, 2], Polarity::Direct),
        ];
        for c in &cands {
            let e = Evaluator::new(c);
            for x in 0..16u64 {
                assert_eq!(e.at(x), c.approximant_at(x));
            }
        }
    }

    #[test]
    fn exact_and_stratified_distances() {
        let d = SliceDomain::new(10, 3).unwrap();
        let f = BoolTable::from_fn(d, |p| p.contains(0) || p.contains(1)).unwrap();
        let exact = Sample::slice_exact(&f);
        let c = CandidateForm::dict(0);
        let truth = exact.distance(&c);
        assert_eq!(truth, 28.0 / 120.0);
        assert_eq!(
            exact.distance(&CandidateForm::max_of([0, 1], Polarity::Direct)),
            0.0
        );
        let mut rng = worker_rng(5, 0);
        let s = Sample::slice_stratified(&f, 6400, &mut rng);
        let est = s.distance(&c);
        let se = s.stderr(&c).unwrap();
        assert!((est - truth).abs() < 4.0 * se + 1e-12, "{est} {truth} {se}");
    }
}
