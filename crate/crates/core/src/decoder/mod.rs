//! Recovery of a structured approximant for Boolean functions on a slice.
//!
//! [`decode`] projects `f` onto the affine functions, buckets the coefficients
//! two ways, and scores every candidate both arguments point to, together
//! with the constants and (anti-)dictators. The least-distance candidate wins,
//! so the branch tag is a diagnostic and never affects correctness.

mod biased;
mod buckets;
mod candidate;
mod generate;
mod sample;
mod subcube;

use serde::{Deserialize, Serialize};

pub use biased::{
    decode_embedding, decode_mu_p, decode_mu_p_with, embedding_level, embedding_marginal,
    embedding_total_variation, perturbed_member, EmbeddingReport, MAX_EMBEDDING_N,
};
pub use buckets::{bucket_three, bucket_two, ThreeBuckets, TwoBuckets, BUCKET_HALF_WIDTH};
pub use candidate::{CandidateForm, CandidateKind, Polarity};
pub use generate::{small_eps_gate, Branch, CaseSummary};
pub use sample::{candidate_table, STRATA};
pub use subcube::{subcube_check, Estimate, SubcubeStats, MAX_SUBCUBE_DIM};

use crate::affine::{project_affine_with, EstimateConfig, EstimationPath};
use crate::error::Result;
use crate::slice::{complement_bool, worker_rng, BoolTable};
use generate::{generate, AffineView};
use sample::Sample;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Projection and distance estimation: exact below `exact_limit` points,
    /// stratified Monte Carlo above.
    pub estimate: EstimateConfig,
    /// Refines the generated candidates by toggle/swap descent.
    pub local_search: bool,
    /// Scores every set `S` in both polarities when `2^(n+1)` times the number
    /// of scored points is at most this. Zero disables the exact stage.
    pub exhaustive_work_limit: u64,
}

/// Default budget for the exact stage, in point evaluations.
pub const EXHAUSTIVE_WORK_LIMIT: u64 = 50_000_000;

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            estimate: EstimateConfig::default(),
            local_search: true,
            exhaustive_work_limit: EXHAUSTIVE_WORK_LIMIT,
        }
    }
}

impl DecodeConfig {
    /// Generated candidates only: no local search, no exact stage.
    pub fn pipeline_only() -> Self {
        Self {
            local_search: false,
            exhaustive_work_limit: 0,
            ..Self::default()
        }
    }
}

/// How the winning candidate was searched for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStage {
    /// Closed-form answer (`k <= 1`).
    Exact,
    Generated,
    LocalSearch,
    /// The whole family was scored.
    Exhaustive,
}

/// Which measure the distances refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "kebab-case")]
pub enum MeasureTag {
    Slice { n: u32, k: u32 },
    MuP { n: u32, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `min(k/n, 1 - k/n)`, or `min(p, 1 - p)` on the cube.
    pub p: f64,
    pub small_eps_gate: f64,
    /// Whether `f` was decoded on the complementary slice and mapped back.
    pub complemented: bool,
    /// Affine coefficients in the frame the buckets were computed in.
    pub coefficients: Vec<f64>,
    pub offset: f64,
    pub two_buckets: Option<TwoBuckets>,
    pub three_buckets: Option<ThreeBuckets>,
    pub case: Option<CaseSummary>,
    pub candidates_scored: usize,
    /// The stage that produced the winner.
    pub search: SearchStage,
    /// Best distance among the generated candidates alone.
    pub generated_distance: Option<f64>,
    /// `|S| p / sqrt(eps)`, when `eps > 0` and `|S| > 1`.
    pub size_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub domain: MeasureTag,
    pub epsilon: f64,
    pub epsilon_path: EstimationPath,
    pub branch: Branch,
    pub candidate: CandidateForm,
    pub distance: f64,
    pub distance_path: EstimationPath,
    pub set_size: usize,
    pub diagnostics: Diagnostics,
}

impl DecodeReport {
    pub fn stderr(&self) -> Option<f64> {
        self.distance_path.stderr()
    }
}

/// A report plus the run settings, as written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub library_version: String,
    pub seed: u64,
    pub mode: ModeFlags,
    #[serde(flatten)]
    pub report: DecodeReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFlags {
    pub measure: String,
    pub exact_limit: u64,
    pub samples: usize,
    pub local_search: bool,
    pub exhaustive_work_limit: u64,
    pub embedding_n: Option<u64>,
}

impl ReportDocument {
    pub fn new(
        report: DecodeReport,
        config: &DecodeConfig,
        measure: &str,
        embedding_n: Option<u64>,
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.estimate.seed,
            mode: ModeFlags {
                measure: measure.to_string(),
                exact_limit: config.estimate.exact_limit,
                samples: config.estimate.samples,
                local_search: config.local_search,
                exhaustive_work_limit: config.exhaustive_work_limit,
                embedding_n,
            },
            report,
        }
    }
}

pub fn decode(f: &BoolTable) -> Result<DecodeReport> {
    decode_with(f, &DecodeConfig::default())
}

pub fn decode_with(f: &BoolTable, config: &DecodeConfig) -> Result<DecodeReport> {
    let domain = f.domain();
    let (n, k) = (domain.n(), domain.k());
    if 2 * k > n {
        let mut report = decode_with(&complement_bool(f), config)?;
        report.domain = MeasureTag::Slice { n, k };
        report.candidate = report.candidate.mirror();
        report.diagnostics.complemented = true;
        return Ok(report);
    }
    let p = domain.p_f64();
    let mut diagnostics = Diagnostics {
        p,
        small_eps_gate: small_eps_gate(p),
        complemented: false,
        coefficients: Vec::new(),
        offset: 0.0,
        two_buckets: None,
        three_buckets: None,
        case: None,
        candidates_scored: 0,
        search: SearchStage::Exact,
        generated_distance: None,
        size_ratio: None,
    };
    let exact_report = |branch, candidate: CandidateForm, diagnostics| DecodeReport {
        domain: MeasureTag::Slice { n, k },
        epsilon: 0.0,
        epsilon_path: EstimationPath::Exact,
        branch,
        set_size: candidate.set_size(),
        candidate,
        distance: 0.0,
        distance_path: EstimationPath::Exact,
        diagnostics,
    };
    if k == 0 {
        return Ok(exact_report(
            Branch::ExactK0,
            CandidateForm::constant(f.get(0)),
            diagnostics,
        ));
    }
    if k == 1 {
        // The point {i} has rank i, so f = max{x_i : f({i}) = 1}.
        let ones: Vec<usize> = (0..n as usize).filter(|&i| f.get(i)).collect();
        let zeros: Vec<usize> = (0..n as usize).filter(|&i| !f.get(i)).collect();
        let cands = [
            CandidateForm::max_of(ones, Polarity::Direct),
            CandidateForm::max_of(zeros, Polarity::Complement),
        ];
        let sample = Sample::slice_exact(f);
        let (best, _) = sample.best(&cands).expect("two candidates");
        diagnostics.candidates_scored = 2;
        return Ok(exact_report(Branch::ExactK1, best, diagnostics));
    }

    let proj = project_affine_with(f, &config.estimate)?;
    let sample = if domain.size() <= config.estimate.exact_limit {
        Sample::slice_exact(f)
    } else {
        let mut rng = worker_rng(config.estimate.seed, 2);
        Sample::slice_stratified(f, config.estimate.samples, &mut rng)
    };
    let view = AffineView {
        coeffs: proj.coeffs.coeffs(),
        offset: proj.coeffs.offset(),
        marginal: p,
        epsilon: proj.epsilon,
        p,
    };
    let generated = generate(&sample, &view)?;
    let (best, distance) = select(
        &sample,
        n as usize,
        &generated.candidates,
        config,
        &mut diagnostics,
    );
    diagnostics.coefficients = proj.coeffs.coeffs().to_vec();
    diagnostics.offset = proj.coeffs.offset();
    diagnostics.two_buckets = Some(generated.two);
    diagnostics.three_buckets = Some(generated.three);
    diagnostics.case = Some(generated.case);
    diagnostics.size_ratio = size_ratio(best.set_size(), proj.epsilon, p);
    Ok(DecodeReport {
        domain: MeasureTag::Slice { n, k },
        epsilon: proj.epsilon,
        epsilon_path: proj.path,
        branch: generated.branch,
        set_size: best.set_size(),
        distance_path: sample.path(&best),
        candidate: best,
        distance,
        diagnostics,
    })
}

pub(crate) fn size_ratio(set_size: usize, epsilon: f64, p: f64) -> Option<f64> {
    (set_size > 1 && epsilon > 0.0).then(|| set_size as f64 * p / epsilon.sqrt())
}

/// Scores the generated candidates, then runs the configured refinements.
pub(crate) fn select(
    sample: &Sample,
    n: usize,
    candidates: &[CandidateForm],
    config: &DecodeConfig,
    diagnostics: &mut Diagnostics,
) -> (CandidateForm, f64) {
    let scores = sample.scores(candidates);
    let mut best = sample.best(candidates).expect("baseline is never empty");
    diagnostics.candidates_scored = candidates.len();
    diagnostics.generated_distance = Some(best.1);
    diagnostics.search = SearchStage::Generated;
    if config.local_search {
        let (c, d, count) = local_search(sample, n, &scores, best.clone());
        diagnostics.candidates_scored += count;
        if c != best.0 {
            diagnostics.search = SearchStage::LocalSearch;
        }
        best = (c, d);
    }
    let work = (sample.len() as u64).saturating_mul(1u64 << (n + 1).min(63));
    if n < 63 && work <= config.exhaustive_work_limit {
        let family = family_sets(n);
        diagnostics.candidates_scored += family.len();
        let (c, d) = sample.best(&family).expect("non-empty");
        if better(&(c.clone(), d), &best) {
            diagnostics.search = SearchStage::Exhaustive;
            best = (c, d);
        }
    }
    best
}

fn better(a: &(CandidateForm, f64), b: &(CandidateForm, f64)) -> bool {
    a.1 < b.1 - 1e-12 || ((a.1 - b.1).abs() <= 1e-12 && a.0.tie_order(&b.0).is_lt())
}

/// `max_S` for every `S`, both polarities, plus the anti-dictators.
fn family_sets(n: usize) -> Vec<CandidateForm> {
    let mut v = Vec::with_capacity((2usize << n) + n);
    for mask in 0u64..1 << n {
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        v.push(CandidateForm::max_of(set.clone(), Polarity::Direct));
        v.push(CandidateForm::max_of(set, Polarity::Complement));
    }
    v.extend((0..n).map(CandidateForm::anti_dict));
    v
}

/// A candidate as `(S, polarity)` with shape `max_S`, if it has that form.
fn as_max_form(c: &CandidateForm) -> Option<(Vec<usize>, Polarity)> {
    match &c.kind {
        CandidateKind::Const(b) => Some((
            Vec::new(),
            if *b {
                Polarity::Complement
            } else {
                Polarity::Direct
            },
        )),
        CandidateKind::Dict(i) => Some((vec![*i], Polarity::Direct)),
        CandidateKind::AntiDict(i) => Some((vec![*i], Polarity::Complement)),
        CandidateKind::MaxOf(s) => Some((s.clone(), c.polarity)),
        CandidateKind::MinOf(_) => None,
    }
}

/// Steepest descent over `max_S` candidates with one-coordinate toggles and
/// swaps, polarity fixed. It starts, for each polarity, from the best scored
/// candidate of that polarity and from the empty set. Returns the best
/// candidate found (never worse than `incumbent`), its distance and the
/// number of candidates scored.
pub(crate) fn local_search(
    sample: &Sample,
    n: usize,
    scored: &[(CandidateForm, f64)],
    incumbent: (CandidateForm, f64),
) -> (CandidateForm, f64, usize) {
    let mut starts: Vec<(Vec<usize>, Polarity)> = Vec::new();
    for pol in [Polarity::Direct, Polarity::Complement] {
        starts.push((Vec::new(), pol));
        let best_in_pol = scored
            .iter()
            .filter_map(|(c, d)| as_max_form(c).filter(|(_, p)| *p == pol).map(|f| (f, *d)))
            .fold(
                None::<((Vec<usize>, Polarity), f64)>,
                |acc, (f, d)| match acc {
                    Some((_, bd)) if bd <= d => acc,
                    _ => Some((f, d)),
                },
            );
        if let Some((f, _)) = best_in_pol {
            starts.push(f);
        }
    }
    let mut best = incumbent;
    let mut count = 0;
    for (set, pol) in starts {
        let mut cur = CandidateForm::max_of(set, pol);
        let mut dist = sample.distance(&cur);
        count += 1;
        loop {
            let s = as_max_form(&cur).expect("search stays in max form").0;
            let mut moves: Vec<CandidateForm> = Vec::new();
            for i in 0..n {
                let mut t = s.clone();
                match t.iter().position(|&j| j == i) {
                    Some(pos) => {
                        t.remove(pos);
                        for j in (0..n).filter(|j| !s.contains(j)) {
                            let mut u = t.clone();
                            u.push(j);
                            moves.push(CandidateForm::max_of(u, pol));
                        }
                    }
                    None => t.push(i),
                }
                moves.push(CandidateForm::max_of(t, pol));
            }
            moves.push(cur.clone());
            count += moves.len();
            let (cand, d) = sample.best(&moves).expect("non-empty");
            if cand == cur || d >= dist - 1e-12 {
                break;
            }
            cur = cand;
            dist = d;
        }
        if better(&(cur.clone(), dist), &best) {
            best = (cur, dist);
        }
    }
    (best.0, best.1, count)
}
