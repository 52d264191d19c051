//! Functions on the Boolean cube `{0,1}^m`: Fourier-Walsh expansion,
//! degree-one truncation, closest dictatorship and the `mu_p` measure.
//!
//! Index `x` encodes the point with `x_i = (x >> i) & 1`. Characters are
//! `chi_S(x) = (-1)^{|S & x|}` and `f^(S) = E[f chi_S]` under the uniform measure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::numeric::{csum, dist_to_unit_lattice, CompensatedSum};

/// Largest dimension stored densely.
pub const MAX_CUBE_DIM: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct CubeFn {
    dim: u32,
    values: Vec<f64>,
}

impl CubeFn {
    pub fn new(dim: u32, values: Vec<f64>) -> Result<Self> {
        if dim > MAX_CUBE_DIM {
            return Err(Error::TooLarge(format!(
                "cube dimension {dim} exceeds {MAX_CUBE_DIM}"
            )));
        }
        if values.len() != 1usize << dim {
            return Err(Error::DomainMismatch(format!(
                "{} values for a cube of dimension {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dim, values })
    }

    pub fn from_fn(dim: u32, f: impl Fn(u64) -> f64) -> Result<Self> {
        if dim > MAX_CUBE_DIM {
            return Err(Error::TooLarge(format!(
                "cube dimension {dim} exceeds {MAX_CUBE_DIM}"
            )));
        }
        Self::new(dim, (0..1u64 << dim).map(f).collect())
    }

    pub fn from_bool_fn(dim: u32, f: impl Fn(u64) -> bool) -> Result<Self> {
        Self::from_fn(dim, |x| if f(x) { 1.0 } else { 0.0 })
    }

    /// Truth table packed in a word: entry `x` is bit `x` (dimension at most 6).
    pub fn from_word(dim: u32, word: u64) -> Result<Self> {
        if dim > 6 {
            return Err(Error::TooLarge(format!(
                "dimension {dim} does not fit a word"
            )));
        }
        Self::from_bool_fn(dim, |x| word >> x & 1 == 1)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: u64) -> f64 {
        self.values[x as usize]
    }

    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    fn check_boolean(&self) -> Result<()> {
        match self.values.iter().position(|&v| v != 0.0 && v != 1.0) {
            Some(i) => Err(Error::NotBoolean(i)),
            None => Ok(()),
        }
    }

    /// `1 - f`.
    pub fn negate(&self) -> CubeFn {
        CubeFn {
            dim: self.dim,
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    /// `x -> f(1 - x)`.
    pub fn mirror(&self) -> CubeFn {
        let mut values = self.values.clone();
        values.reverse();
        CubeFn {
            dim: self.dim,
            values,
        }
    }

    /// Text form of a Boolean function: `cube m` then `2^m` characters in `{0,1}`.
    pub fn to_text(&self) -> Result<String> {
        self.check_boolean()?;
        let mut s = format!("cube {}\n", self.dim);
        s.extend(
            self.values
                .iter()
                .map(|&v| if v == 1.0 { '1' } else { '0' }),
        );
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("cube") {
            return Err(parse_err(1, "expected header `cube m`"));
        }
        let dim: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(1, "missing or invalid m"))?;
        if parts.next().is_some() {
            return Err(parse_err(1, "trailing tokens in header"));
        }
        if dim > MAX_CUBE_DIM {
            return Err(parse_err(
                1,
                format!("dimension {dim} exceeds {MAX_CUBE_DIM}"),
            ));
        }
        let body = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing truth-table line"))?
            .trim_end();
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(parse_err(3, "unexpected content after the truth table"));
        }
        let len = 1usize << dim;
        if body.len() != len {
            return Err(parse_err(
                2,
                format!("expected {len} characters, found {}", body.len()),
            ));
        }
        let mut values = Vec::with_capacity(len);
        for (i, ch) in body.bytes().enumerate() {
            values.push(match ch {
                b'0' => 0.0,
                b'1' => 1.0,
                _ => {
                    return Err(parse_err(
                        2,
                        format!("invalid character at column {}", i + 1),
                    ))
                }
            });
        }
        Ok(Self { dim, values })
    }
}

/// Fourier coefficients indexed by subset mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    dim: u32,
    coeffs: Vec<f64>,
}

impl FourierCoeffs {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn get(&self, mask: u64) -> f64 {
        self.coeffs[mask as usize]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `sum_S f^(S)^2`.
    pub fn parseval_sum(&self) -> f64 {
        csum(self.coeffs.iter().map(|c| c * c))
    }

    /// `sum_{|S| >= 2} f^(S)^2`.
    pub fn weight_above_one(&self) -> f64 {
        csum(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(s, _)| s.count_ones() >= 2)
                .map(|(_, c)| c * c),
        )
    }
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

pub fn fourier(f: &CubeFn) -> FourierCoeffs {
    let mut coeffs = f.values.clone();
    walsh_hadamard(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    FourierCoeffs { dim: f.dim, coeffs }
}

pub fn inverse_fourier(fc: &FourierCoeffs) -> CubeFn {
    let mut values = fc.coeffs.clone();
    walsh_hadamard(&mut values);
    CubeFn {
        dim: fc.dim,
        values,
    }
}

/// Degree-at-most-one part of a cube function, in the Fourier basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeAffine {
    /// `f^(empty)`.
    pub constant: f64,
    /// `f^({i})`.
    pub linear: Vec<f64>,
}

impl CubeAffine {
    pub fn eval(&self, x: u64) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.constant);
        for (i, c) in self.linear.iter().enumerate() {
            acc.add(if x >> i & 1 == 1 { -c } else { *c });
        }
        acc.value()
    }

    pub fn to_cube_fn(&self) -> CubeFn {
        let dim = self.linear.len() as u32;
        CubeFn::from_fn(dim, |x| self.eval(x)).expect("dimension within range")
    }
}

/// Truncation to degree one; optimal in `L2` by Parseval, with error
/// `sum_{|S| >= 2} f^(S)^2`.
pub fn project_affine_cube(f: &CubeFn) -> (CubeAffine, f64) {
    let fc = fourier(f);
    let linear = (0..f.dim).map(|i| fc.get(1 << i)).collect();
    (
        CubeAffine {
            constant: fc.get(0),
            linear,
        },
        fc.weight_above_one(),
    )
}

/// The `2m + 2` dictatorship candidates, in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coord", rename_all = "kebab-case")]
pub enum Dictator {
    Zero,
    One,
    Var(usize),
    NotVar(usize),
}

impl Dictator {
    pub fn eval(&self, x: u64) -> bool {
        match *self {
            Dictator::Zero => false,
            Dictator::One => true,
            Dictator::Var(i) => x >> i & 1 == 1,
            Dictator::NotVar(i) => x >> i & 1 == 0,
        }
    }

    pub fn all(dim: u32) -> impl Iterator<Item = Dictator> {
        [Dictator::Zero, Dictator::One]
            .into_iter()
            .chain((0..dim as usize).flat_map(|i| [Dictator::Var(i), Dictator::NotVar(i)]))
    }
}

impl fmt::Display for Dictator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dictator::Zero => write!(f, "0"),
            Dictator::One => write!(f, "1"),
            Dictator::Var(i) => write!(f, "x{i}"),
            Dictator::NotVar(i) => write!(f, "1-x{i}"),
        }
    }
}

/// Exact minimiser of `Pr[f != g]` over `{0, 1, x_i, 1 - x_i}`; first candidate wins ties.
pub fn closest_dictator(f: &CubeFn) -> Result<(Dictator, f64)> {
    f.check_boolean()?;
    let size = f.values.len();
    let mut best = (Dictator::Zero, usize::MAX);
    for cand in Dictator::all(f.dim) {
        let miss = f
            .values
            .iter()
            .enumerate()
            .filter(|(x, &v)| cand.eval(*x as u64) != (v == 1.0))
            .count();
        if miss < best.1 {
            best = (cand, miss);
        }
    }
    Ok((best.0, best.1 as f64 / size as f64))
}

/// `sum_i dist(2 l^({i}), {0, +-1})^2`.
pub fn fkn_statistic(ell: &CubeAffine) -> f64 {
    csum(
        ell.linear
            .iter()
            .map(|c| dist_to_unit_lattice(2.0 * c).powi(2)),
    )
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("p = {p} is not in (0, 1)")))
    }
}

/// Atom weights `p^|x| (1-p)^(m-|x|)`.
pub fn mu_p_weights(dim: u32, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    if dim > MAX_CUBE_DIM {
        return Err(Error::TooLarge(format!("cube dimension {dim}")));
    }
    let pow_p: Vec<f64> = (0..=dim).map(|j| p.powi(j as i32)).collect();
    let pow_q: Vec<f64> = (0..=dim).map(|j| (1.0 - p).powi(j as i32)).collect();
    Ok((0..1u64 << dim)
        .map(|x| {
            let w = x.count_ones();
            pow_p[w as usize] * pow_q[(dim - w) as usize]
        })
        .collect())
}

pub fn mu_p_mean(f: &CubeFn, p: f64) -> Result<f64> {
    let w = mu_p_weights(f.dim, p)?;
    Ok(csum(w.iter().zip(&f.values).map(|(w, v)| w * v)))
}

pub fn mu_p_dist_sq(f: &CubeFn, g: &CubeFn, p: f64) -> Result<f64> {
    if f.dim != g.dim {
        return Err(Error::DomainMismatch(format!(
            "cube dimensions {} and {}",
            f.dim, g.dim
        )));
    }
    let w = mu_p_weights(f.dim, p)?;
    Ok(csum(
        w.iter()
            .zip(f.values.iter().zip(&g.values))
            .map(|(w, (a, b))| w * (a - b) * (a - b)),
    ))
}
