//! Affine functions `sum_i c_i x_i` on a slice: evaluation, moments,
//! least-squares projection and the pair statistic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::numeric::{csum, dist_to_unit_lattice, structured_solve, CompensatedSum};
use crate::slice::{
    worker_rng, BoolTable, RealTable, SliceDomain, SliceFunction, SlicePoint, EXACT_RATIONAL_LIMIT,
};

/// Coefficients of `l(x) = offset + sum_i c_i x_i`.
///
/// On slices with `1 <= k` the constant is absorbed through `sum_i x_i = k`,
/// so every canonical output of this module has `offset == 0`; the offset is
/// only nonzero on the one-point slice `k = 0`, where the linear part vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCoeffs {
    domain: SliceDomain,
    coeffs: Vec<f64>,
    offset: f64,
}

impl AffineCoeffs {
    pub fn new(domain: SliceDomain, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_offset(domain, coeffs, 0.0)
    }

    pub fn with_offset(domain: SliceDomain, coeffs: Vec<f64>, offset: f64) -> Result<Self> {
        if coeffs.len() != domain.n() as usize {
            return Err(Error::DomainMismatch(format!(
                "{} coefficients for n = {}",
                coeffs.len(),
                domain.n()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite(coeffs.len()));
        }
        Ok(Self {
            domain,
            coeffs,
            offset,
        })
    }

    pub fn domain(&self) -> SliceDomain {
        self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn eval(&self, pt: SlicePoint) -> Result<f64> {
        if !self.domain.contains(pt.bits()) {
            return Err(Error::DomainMismatch(format!(
                "point {:#b} is not in {}",
                pt.bits(),
                self.domain
            )));
        }
        Ok(self.eval_bits(pt.bits()))
    }

    pub(crate) fn eval_bits(&self, bits: u64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.offset);
        let mut b = bits;
        while b != 0 {
            acc.add(self.coeffs[b.trailing_zeros() as usize]);
            b &= b - 1;
        }
        acc.value()
    }

    pub fn to_table(&self) -> RealTable {
        RealTable::from_fn(self.domain, |p| self.eval_bits(p.bits()))
            .expect("finite coefficients give finite values")
    }

    pub fn mean(&self) -> f64 {
        let n = self.domain.n() as f64;
        let k = self.domain.k() as f64;
        self.offset + k / n * csum(self.coeffs.iter().copied())
    }

    /// `k(n-k) / (n(n-1)) * sum_i (c_i - cbar)^2`.
    pub fn variance(&self) -> Result<f64> {
        let n = self.domain.n();
        if n < 2 {
            return Err(Error::OutOfRange("variance needs n >= 2".into()));
        }
        let (nf, kf) = (n as f64, self.domain.k() as f64);
        let cbar = csum(self.coeffs.iter().copied()) / nf;
        let ss = csum(self.coeffs.iter().map(|c| (c - cbar) * (c - cbar)));
        Ok(kf * (nf - kf) / (nf * (nf - 1.0)) * ss)
    }

    /// Variance via `coefficient * E_{i != j} (c_i - c_j)^2`.
    pub fn variance_pair_form(&self, coefficient: PairFormCoefficient) -> Result<f64> {
        let e = pair_mean_sq(&self.coeffs)?;
        Ok(coefficient.value(self.domain)? * e)
    }

    /// `E_{i != j} (c_i - c_j)^2` over ordered pairs.
    pub fn pair_mean_sq(&self) -> Result<f64> {
        pair_mean_sq(&self.coeffs)
    }

    /// `l(1 - x)` as an affine function on `binom([n], n - k)`.
    pub fn complement(&self) -> AffineCoeffs {
        let target = self.domain.complement();
        let constant = self.offset + csum(self.coeffs.iter().copied());
        let k2 = target.k();
        if k2 == 0 {
            AffineCoeffs {
                domain: target,
                coeffs: self.coeffs.iter().map(|c| -c).collect(),
                offset: constant,
            }
        } else {
            let share = constant / k2 as f64;
            AffineCoeffs {
                domain: target,
                coeffs: self.coeffs.iter().map(|c| share - c).collect(),
                offset: 0.0,
            }
        }
    }

    /// Text form: `affine n k`, then one coefficient per line, then
    /// `offset v` when the offset is nonzero.
    pub fn to_text(&self) -> String {
        let mut s = format!("affine {} {}\n", self.domain.n(), self.domain.k());
        for c in &self.coeffs {
            s.push_str(&format!("{c}\n"));
        }
        if self.offset != 0.0 {
            s.push_str(&format!("offset {}\n", self.offset));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("affine") {
            return Err(parse_err(1, "expected header `affine n k`"));
        }
        let mut num = |what: &str| -> Result<u32> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(1, format!("missing or invalid {what}")))
        };
        let (n, k) = (num("n")?, num("k")?);
        let domain = SliceDomain::new(n, k).map_err(|e| parse_err(1, e.to_string()))?;
        let mut coeffs = Vec::with_capacity(n as usize);
        let mut offset = 0.0;
        for (i, line) in lines {
            let line = line.trim();
            let parse_val = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| parse_err(i + 1, format!("not a decimal: {s:?}")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(parse_err(i + 1, "non-finite value"))
                }
            };
            if let Some(rest) = line.strip_prefix("offset") {
                if coeffs.len() != n as usize {
                    return Err(parse_err(i + 1, "offset before all coefficients"));
                }
                offset = parse_val(rest.trim())?;
            } else if coeffs.len() < n as usize {
                coeffs.push(parse_val(line)?);
            } else {
                return Err(parse_err(i + 1, "too many coefficients"));
            }
        }
        if coeffs.len() != n as usize {
            return Err(parse_err(
                coeffs.len() + 2,
                format!("expected {n} coefficients, found {}", coeffs.len()),
            ));
        }
        Self::with_offset(domain, coeffs, offset)
    }
}

fn pair_mean_sq(c: &[f64]) -> Result<f64> {
    let n = c.len();
    if n < 2 {
        return Err(Error::OutOfRange("pair statistics need n >= 2".into()));
    }
    let mut acc = CompensatedSum::new();
    for (i, ci) in c.iter().enumerate() {
        for (j, cj) in c.iter().enumerate() {
            if i != j {
                acc.add((ci - cj) * (ci - cj));
            }
        }
    }
    Ok(acc.value() / (n * (n - 1)) as f64)
}

/// Leading coefficient of the pair-expectation variance form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFormCoefficient {
    /// `k(n-k) / (2n)`: agrees with direct enumeration.
    TwoN,
    /// `k(n-k) / (2(n-2))`: the alternative normalisation, kept for comparison.
    TwoNMinusTwo,
}

impl PairFormCoefficient {
    pub fn value(self, domain: SliceDomain) -> Result<f64> {
        let (n, k) = (domain.n() as f64, domain.k() as f64);
        match self {
            PairFormCoefficient::TwoN => Ok(k * (n - k) / (2.0 * n)),
            PairFormCoefficient::TwoNMinusTwo => {
                if domain.n() <= 2 {
                    return Err(Error::OutOfRange("2(n-2) form needs n > 2".into()));
                }
                Ok(k * (n - k) / (2.0 * (n - 2.0)))
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairFormCoefficient::TwoN => "k(n-k)/(2n)",
            PairFormCoefficient::TwoNMinusTwo => "k(n-k)/(2(n-2))",
        }
    }
}

/// Exact enumeration or sampling, with a fixed seed for the latter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    /// Domains with at most this many points are enumerated.
    pub exact_limit: u64,
    /// Sample count for larger domains.
    pub samples: usize,
    pub seed: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            exact_limit: EXACT_RATIONAL_LIMIT,
            samples: 100_000,
            seed: 0,
        }
    }
}

/// How a reported quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "kebab-case")]
pub enum EstimationPath {
    Exact,
    MonteCarlo { samples: usize, stderr: f64 },
}

impl EstimationPath {
    pub fn stderr(&self) -> Option<f64> {
        match self {
            EstimationPath::Exact => None,
            EstimationPath::MonteCarlo { stderr, .. } => Some(*stderr),
        }
    }
}

/// Best affine approximation and its squared distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: AffineCoeffs,
    pub epsilon: f64,
    pub path: EstimationPath,
}

/// Gram entries `(alpha, beta)` of `M = alpha I + beta J` for `E[x_i x_j]` on a slice.
pub fn slice_gram(domain: SliceDomain) -> (f64, f64) {
    let (n, k) = (domain.n() as f64, domain.k() as f64);
    let density = k / n;
    let alpha = density * (n - k) / (n - 1.0);
    let beta = density * (k - 1.0) / (n - 1.0);
    (alpha, beta)
}

/// Least-squares projection onto the affine functions, with default estimation settings.
pub fn project_affine<F: SliceFunction + ?Sized>(f: &F) -> Result<Projection> {
    project_affine_with(f, &EstimateConfig::default())
}

/// Least-squares projection via the structured normal equations
/// `(alpha I + beta J) c = b`, `b_i = E[f x_i]`.
pub fn project_affine_with<F: SliceFunction + ?Sized>(
    f: &F,
    config: &EstimateConfig,
) -> Result<Projection> {
    let domain = f.domain();
    let n = domain.n() as usize;
    let k = domain.k();
    let len = domain.len()?;
    if k == 0 || k == domain.n() {
        // Single point: fit it exactly.
        let v = f.value_at(0);
        let coeffs = if k == 0 {
            AffineCoeffs::with_offset(domain, vec![0.0; n], v)?
        } else {
            AffineCoeffs::new(domain, vec![v / n as f64; n])?
        };
        return Ok(Projection {
            coeffs,
            epsilon: 0.0,
            path: EstimationPath::Exact,
        });
    }

    let (alpha, beta) = slice_gram(domain);
    if domain.size() <= config.exact_limit {
        let mut sums = vec![CompensatedSum::new(); n];
        for (idx, pt) in domain.points().enumerate() {
            let v = f.value_at(idx);
            if !v.is_finite() {
                return Err(Error::NonFinite(idx));
            }
            if v != 0.0 {
                for i in pt.indices() {
                    sums[i].add(v);
                }
            }
        }
        let b: Vec<f64> = sums.iter().map(|s| s.value() / len as f64).collect();
        let coeffs = AffineCoeffs::new(domain, structured_solve(alpha, beta, &b))?;
        let mut acc = CompensatedSum::new();
        for (idx, pt) in domain.points().enumerate() {
            let r = f.value_at(idx) - coeffs.eval_bits(pt.bits());
            acc.add(r * r);
        }
        Ok(Projection {
            coeffs,
            epsilon: acc.value() / len as f64,
            path: EstimationPath::Exact,
        })
    } else {
        let samples = config.samples.max(2);
        let mut rng = worker_rng(config.seed, 0);
        let mut sums = vec![CompensatedSum::new(); n];
        for _ in 0..samples {
            let pt = domain.sample_uniform(&mut rng);
            let v = f.value_at(domain.rank(pt)? as usize);
            for i in pt.indices() {
                sums[i].add(v);
            }
        }
        let b: Vec<f64> = sums.iter().map(|s| s.value() / samples as f64).collect();
        let coeffs = AffineCoeffs::new(domain, structured_solve(alpha, beta, &b))?;
        let mut rng = worker_rng(config.seed, 1);
        let (mean, stderr) = sample_mean(samples, || {
            let pt = domain.sample_uniform(&mut rng);
            let idx = domain.rank(pt).expect("sampled points are valid") as usize;
            let r = f.value_at(idx) - coeffs.eval_bits(pt.bits());
            r * r
        });
        Ok(Projection {
            coeffs,
            epsilon: mean,
            path: EstimationPath::MonteCarlo { samples, stderr },
        })
    }
}

/// Mean and standard error of `samples` draws.
pub(crate) fn sample_mean(samples: usize, mut draw: impl FnMut() -> f64) -> (f64, f64) {
    let mut sum = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    for _ in 0..samples {
        let x = draw();
        sum.add(x);
        sq.add(x * x);
    }
    let m = samples as f64;
    let mean = sum.value() / m;
    let var = ((sq.value() / m - mean * mean) * m / (m - 1.0)).max(0.0);
    (mean, (var / m).sqrt())
}

/// `E_{i != j} dist(c_i - c_j, {0, +-1})^2` and `k` times it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStat {
    pub value: f64,
    pub scaled: f64,
}

pub fn pair_stat(ell: &AffineCoeffs) -> Result<PairStat> {
    let c = ell.coeffs();
    let n = c.len();
    if n < 2 {
        return Err(Error::OutOfRange("pair statistic needs n >= 2".into()));
    }
    let mut acc = CompensatedSum::new();
    for (i, ci) in c.iter().enumerate() {
        for (j, cj) in c.iter().enumerate() {
            if i != j {
                let d = dist_to_unit_lattice(ci - cj);
                acc.add(d * d);
            }
        }
    }
    let value = acc.value() / (n * (n - 1)) as f64;
    Ok(PairStat {
        value,
        scaled: ell.domain().k() as f64 * value,
    })
}

/// Per-coordinate sums `sum_j dist(c_i - c_j, {0, +-1})^2`.
pub fn pair_profile(c: &[f64]) -> Vec<f64> {
    c.iter()
        .map(|ci| csum(c.iter().map(|cj| dist_to_unit_lattice(ci - cj).powi(2))))
        .collect()
}

/// Draws a random coefficient vector with standard normal-ish entries (sum of uniforms).
pub fn random_coeffs<R: Rng + ?Sized>(domain: SliceDomain, rng: &mut R) -> AffineCoeffs {
    let c = (0..domain.n())
        .map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>())
        .collect();
    AffineCoeffs::new(domain, c).expect("finite draws")
}

/// Exact Boolean-table view of a coordinate function, used by tests and the harness.
pub fn coordinate_table(domain: SliceDomain, i: usize, negated: bool) -> Result<BoolTable> {
    BoolTable::from_fn(domain, |p| p.contains(i) != negated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::{complement_bool, dist_sq};

    fn dom(n: u32, k: u32) -> SliceDomain {
        SliceDomain::new(n, k).unwrap()
    }

    fn enumerated_variance(ell: &AffineCoeffs) -> f64 {
        let d = ell.domain();
        let vals: Vec<f64> = d.points().map(|p| ell.eval(p).unwrap()).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64
    }

    #[test]
    fn eval_examples() {
        let d = dom(5, 2);
        let e3 = AffineCoeffs::new(d, vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(e3.eval(d.point(0b00101).unwrap()).unwrap(), 1.0);
        let ones = AffineCoeffs::new(d, vec![1.0; 5]).unwrap();
        assert!(d.points().all(|p| ones.eval(p).unwrap() == 2.0));
        let c = AffineCoeffs::new(d, vec![1.0, -1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c.eval(d.point(0b00101).unwrap()).unwrap(), 1.0);
        assert!(c.eval(d.first()).is_ok());
        assert!(matches!(
            c.eval(dom(5, 3).first()),
            Err(Error::DomainMismatch(_))
        ));
    }

    #[test]
    fn moments_of_a_coordinate() {
        let d = dom(4, 2);
        let e1 = AffineCoeffs::new(d, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((e1.mean() - 0.5).abs() < 1e-15);
        assert!((e1.variance().unwrap() - 0.25).abs() < 1e-15);
        assert!((enumerated_variance(&e1) - 0.25).abs() < 1e-15);
        let pf = e1.variance_pair_form(PairFormCoefficient::TwoN).unwrap();
        assert!((pf - 0.25).abs() < 1e-15);
        let printed = e1
            .variance_pair_form(PairFormCoefficient::TwoNMinusTwo)
            .unwrap();
        assert!((printed - 0.5).abs() < 1e-15);
        let constant = AffineCoeffs::new(d, vec![0.3; 4]).unwrap();
        assert_eq!(constant.variance().unwrap(), 0.0);
        assert!(AffineCoeffs::new(dom(1, 1), vec![1.0])
            .unwrap()
            .variance()
            .is_err());
    }

    #[test]
    fn projection_of_affine_and_constant() {
        let d = dom(5, 2);
        let x3 = coordinate_table(d, 2, false).unwrap();
        let proj = project_affine(&x3).unwrap();
        for (i, c) in proj.coeffs.coeffs().iter().enumerate() {
            let want = if i == 2 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-12);
        }
        assert!(proj.epsilon < 1e-24);

        for (n, k) in [(5, 2), (7, 3), (6, 1), (6, 5)] {
            let d = dom(n, k);
            let one = BoolTable::constant(d, true).unwrap();
            let proj = project_affine(&one).unwrap();
            for c in proj.coeffs.coeffs() {
                assert!((c - 1.0 / k as f64).abs() < 1e-12);
            }
            assert!(proj.epsilon < 1e-24);
        }
    }

    #[test]
    fn projection_degenerate_slices() {
        let f = BoolTable::constant(dom(4, 0), true).unwrap();
        let proj = project_affine(&f).unwrap();
        assert_eq!(proj.epsilon, 0.0);
        assert_eq!(proj.coeffs.eval(dom(4, 0).first()).unwrap(), 1.0);
        let f = BoolTable::constant(dom(4, 4), true).unwrap();
        let proj = project_affine(&f).unwrap();
        assert_eq!(proj.coeffs.eval(dom(4, 4).first()).unwrap(), 1.0);
    }

    #[test]
    fn projection_max_of_two() {
        let d = dom(10, 2);
        let f = BoolTable::from_fn(d, |p| p.contains(0) || p.contains(1)).unwrap();
        let proj = project_affine(&f).unwrap();
        assert!(proj.epsilon <= 1.0 / 45.0 + 1e-15);
        let resid = dist_sq(&f, &proj.coeffs.to_table()).unwrap();
        assert!((resid - proj.epsilon).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_projection_reports_stderr() {
        let d = dom(8, 3);
        let f = BoolTable::from_fn(d, |p| p.contains(0)).unwrap();
        let cfg = EstimateConfig {
            exact_limit: 10,
            samples: 20_000,
            seed: 5,
        };
        let proj = project_affine_with(&f, &cfg).unwrap();
        assert!(matches!(proj.path, EstimationPath::MonteCarlo { .. }));
        assert!((proj.coeffs.coeffs()[0] - 1.0).abs() < 0.1);
    }

    #[test]
    fn pair_stat_examples() {
        let d = dom(4, 2);
        let z = pair_stat(&AffineCoeffs::new(d, vec![0.7; 4]).unwrap()).unwrap();
        assert_eq!(z.value, 0.0);
        let z = pair_stat(&AffineCoeffs::new(d, vec![0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(z.value, 0.0);
        let h = pair_stat(&AffineCoeffs::new(d, vec![0.0, 0.0, 0.0, 0.5]).unwrap()).unwrap();
        assert!((h.value - 0.125).abs() < 1e-15);
        assert!((h.scaled - 0.25).abs() < 1e-15);
    }

    #[test]
    fn complement_examples() {
        let d = dom(6, 2);
        let x1 = coordinate_table(d, 1, false).unwrap();
        let not_x1 = coordinate_table(d.complement(), 1, true).unwrap();
        assert_eq!(complement_bool(&x1), not_x1);

        let ell = AffineCoeffs::new(d, vec![0.5, -1.0, 2.0, 0.0, 0.25, 3.0]).unwrap();
        let back = ell.complement();
        for y in back.domain().points() {
            let x = d.point(!y.bits() & d.mask()).unwrap();
            assert!((back.eval(y).unwrap() - ell.eval(x).unwrap()).abs() < 1e-12);
        }
        let to_zero = AffineCoeffs::new(dom(3, 3), vec![1.0, 2.0, 4.0])
            .unwrap()
            .complement();
        assert_eq!(to_zero.eval(dom(3, 0).first()).unwrap(), 7.0);
    }

    #[test]
    fn text_round_trip() {
        let d = dom(3, 1);
        let ell = AffineCoeffs::new(d, vec![0.1, -2.5, 1e-17]).unwrap();
        assert_eq!(AffineCoeffs::parse(&ell.to_text()).unwrap(), ell);
        let off = AffineCoeffs::with_offset(dom(3, 0), vec![0.0; 3], 1.0).unwrap();
        assert_eq!(AffineCoeffs::parse(&off.to_text()).unwrap(), off);
        assert!(AffineCoeffs::parse("affine 3 1\n1\n2\n").is_err());
        assert!(AffineCoeffs::parse("affine 3 1\n1\n2\n3\n4\n").is_err());
        assert!(AffineCoeffs::parse("affine 3 1\n1\ninf\n3\n").is_err());
    }
}
