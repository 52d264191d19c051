//! Candidate generation from the bucketed affine coefficients.

use serde::{Deserialize, Serialize};

use super::buckets::{bucket_three, bucket_two, ThreeBuckets, TwoBuckets};
use super::candidate::{CandidateForm, Polarity};
use super::sample::Sample;
use crate::error::Result;

/// Which part of the argument the instance falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    ExactK0,
    ExactK1,
    SmallEps,
    LargeEpsCase1a,
    LargeEpsCase1b,
    LargeEpsCase2,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::ExactK0 => "exact-k0",
            Branch::ExactK1 => "exact-k1",
            Branch::SmallEps => "small-eps",
            Branch::LargeEpsCase1a => "large-eps-case1a",
            Branch::LargeEpsCase1b => "large-eps-case1b",
            Branch::LargeEpsCase2 => "large-eps-case2",
        }
    }
}

/// The three-bucket picture after orienting so that `|S_-| <= |S_+|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
    /// Whether orienting replaced `f` by `1 - f`.
    pub flipped: bool,
    /// Expected value of the remainder, `E[offset + sum_i d_i x_i]`, in the oriented frame.
    pub m: f64,
    /// `m` rounded to the nearest integer.
    pub mu: i64,
}

/// Affine data the generators work from.
pub(crate) struct AffineView<'a> {
    pub coeffs: &'a [f64],
    pub offset: f64,
    /// `E[x_i]`, the same for every coordinate.
    pub marginal: f64,
    pub epsilon: f64,
    pub p: f64,
}

pub(crate) struct Generated {
    pub branch: Branch,
    pub two: TwoBuckets,
    pub three: ThreeBuckets,
    pub case: CaseSummary,
    pub candidates: Vec<CandidateForm>,
}

/// Branch gate `eps < p / 128`.
pub fn small_eps_gate(p: f64) -> f64 {
    p / 128.0
}

fn classify(view: &AffineView, three: &ThreeBuckets, n: usize) -> (Branch, CaseSummary) {
    let remainder = view.offset + view.marginal * three.shifted.iter().sum::<f64>();
    let (s_plus, s_minus, flipped, m) = if three.minus.len() > three.plus.len() {
        (
            three.minus.clone(),
            three.plus.clone(),
            true,
            1.0 - remainder,
        )
    } else {
        (three.plus.clone(), three.minus.clone(), false, remainder)
    };
    let mu = m.round() as i64;
    let branch = if view.epsilon < small_eps_gate(view.p) {
        Branch::SmallEps
    } else if 2 * s_plus.len() <= n - s_minus.len() {
        if mu <= 0 {
            Branch::LargeEpsCase1a
        } else {
            Branch::LargeEpsCase1b
        }
    } else {
        Branch::LargeEpsCase2
    };
    (
        branch,
        CaseSummary {
            s_plus,
            s_minus,
            flipped,
            m,
            mu,
        },
    )
}

/// `S` sorted by decreasing correlation with the target; ties by index.
fn by_correlation(set: &[usize], corr: &[f64]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_by(|&a, &b| corr[b].total_cmp(&corr[a]).then(a.cmp(&b)));
    s
}

/// `MaxOf` of every correlation-ordered prefix of `set`, for both polarities.
pub(crate) fn prefixes(set: &[usize], corr: &[Vec<f64>; 2], out: &mut Vec<CandidateForm>) {
    for (pol, c) in [Polarity::Direct, Polarity::Complement]
        .into_iter()
        .zip(corr)
    {
        let order = by_correlation(set, c);
        for len in 0..=order.len() {
            out.push(CandidateForm::max_of(order[..len].iter().copied(), pol));
        }
    }
}

/// Always-on baseline: constants and (anti-)dictators.
pub(crate) fn baseline(n: usize) -> Vec<CandidateForm> {
    let mut v = vec![
        CandidateForm::constant(false),
        CandidateForm::constant(true),
    ];
    for i in 0..n {
        v.push(CandidateForm::dict(i));
        v.push(CandidateForm::anti_dict(i));
    }
    v
}

/// Runs both bucketings, records the branch, and emits every candidate the
/// two arguments can point to, with all correlation-ordered trims.
pub(crate) fn generate(sample: &Sample, view: &AffineView) -> Result<Generated> {
    let n = view.coeffs.len();
    let two = bucket_two(view.coeffs, view.epsilon, view.p)?;
    // Bucketing -c as well keeps the candidate list closed under f -> 1 - f.
    let negated: Vec<f64> = view.coeffs.iter().map(|c| -c).collect();
    let two_negated = bucket_two(&negated, view.epsilon, view.p)?;
    let three = bucket_three(view.coeffs)?;
    let (branch, case) = classify(view, &three, n);

    let corr = [
        sample.correlations(n, Polarity::Direct),
        sample.correlations(n, Polarity::Complement),
    ];
    let mut candidates = baseline(n);
    let mut in_union = vec![false; n];
    for &i in three.plus.iter().chain(&three.minus) {
        in_union[i] = true;
    }
    let t: Vec<usize> = (0..n).filter(|&i| !in_union[i]).collect();
    for set in [&two.set, &two_negated.set, &three.plus, &three.minus, &t] {
        prefixes(set, &corr, &mut candidates);
    }
    candidates.sort_by(|a, b| a.tie_order(b));
    candidates.dedup();
    Ok(Generated {
        branch,
        two,
        three,
        case,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::project_affine;
    use crate::slice::{BoolTable, SliceDomain};

    fn run(f: &BoolTable) -> Generated {
        let proj = project_affine(f).unwrap();
        let d = f.domain();
        let sample = Sample::slice_exact(f);
        let view = AffineView {
            coeffs: proj.coeffs.coeffs(),
            offset: proj.coeffs.offset(),
            marginal: d.p_f64(),
            epsilon: proj.epsilon,
            p: d.p_f64(),
        };
        generate(&sample, &view).unwrap()
    }

    #[test]
    fn max_of_two_is_generated() {
        let d = SliceDomain::new(10, 2).unwrap();
        let f = BoolTable::from_fn(d, |p| p.contains(1) || p.contains(2)).unwrap();
        let g = run(&f);
        assert!(g
            .candidates
            .contains(&CandidateForm::max_of([1, 2], Polarity::Direct)));
        assert_ne!(g.branch, Branch::SmallEps);
    }

    #[test]
    fn empty_set_gives_constants() {
        let d = SliceDomain::new(8, 3).unwrap();
        let f = BoolTable::constant(d, true).unwrap();
        let g = run(&f);
        assert!(g.two.set.is_empty());
        assert!(g.candidates.contains(&CandidateForm::constant(false)));
        assert!(g.candidates.contains(&CandidateForm::constant(true)));
        assert_eq!(g.branch, Branch::SmallEps);
    }

    #[test]
    fn complement_set_candidate_in_case_two_shape() {
        // 1 - max(x6, x7) on binom(8, 2): the large bucket is everything but {6, 7}.
        let d = SliceDomain::new(8, 2).unwrap();
        let f = BoolTable::from_fn(d, |p| !(p.contains(6) || p.contains(7))).unwrap();
        let g = run(&f);
        assert!(g
            .candidates
            .contains(&CandidateForm::max_of([6, 7], Polarity::Complement)));
    }
}
