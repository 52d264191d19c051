//! The slice `{x in {0,1}^n : |x| = k}` under the uniform measure.
//!
//! Points are `u64` words with bit `i` standing for coordinate `x_i`
//! (coordinates are 0-based throughout the crate). Tables are indexed by the
//! colexicographic combinadic rank: a point with set positions
//! `p_1 < ... < p_k` has rank `sum_j C(p_j, j)`. For a fixed popcount this is
//! the same order as the numeric order of the words, so the successor is
//! Gosper's hack.

use std::fmt;
use std::sync::OnceLock;

use bitvec::prelude::*;
use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{parse_err, Error, Result};
use crate::numeric::CompensatedSum;

/// Largest supported ground-set size (one machine word per point).
pub const MAX_N: u32 = 64;

/// Domains up to this many points may be handled with exact rational arithmetic.
pub const EXACT_RATIONAL_LIMIT: u64 = 1_000_000;

fn pascal() -> &'static [[u64; 65]; 65] {
    static TABLE: OnceLock<Box<[[u64; 65]; 65]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Box::new([[0u64; 65]; 65]);
        for n in 0..=64 {
            t[n][0] = 1;
            for k in 1..=n {
                // C(64, 32) < 2^64, so no row overflows.
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            }
        }
        t
    })
}

/// `C(n, k)` for `n <= 64`; zero when `k > n`.
pub fn binomial_u64(n: u32, k: u32) -> u64 {
    if k > n || n > MAX_N {
        return 0;
    }
    pascal()[n as usize][k as usize]
}

/// Seeded generator for worker `stream` derived from a master seed.
pub fn worker_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// The slice `binom([n], k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SliceDomain {
    n: u32,
    k: u32,
}

impl SliceDomain {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::TooWide(n));
        }
        if n == 0 || k > n {
            return Err(Error::InvalidDomain { n, k });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of points, `C(n, k)`.
    pub fn size(&self) -> u64 {
        binomial_u64(self.n, self.k)
    }

    /// `C(n, k)` as a big integer.
    pub fn size_big(&self) -> BigUint {
        num_integer::binomial(BigUint::from(self.n), BigUint::from(self.k))
    }

    /// Table length; fails if the domain does not fit in memory-addressable size.
    pub fn len(&self) -> Result<usize> {
        usize::try_from(self.size())
            .map_err(|_| Error::TooLarge(format!("C({}, {}) points", self.n, self.k)))
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `k / n`.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.k as u64, self.n as u64)
    }

    /// `min(k/n, 1 - k/n)`.
    pub fn p(&self) -> Ratio<u64> {
        let lower = self.k.min(self.n - self.k);
        Ratio::new(lower as u64, self.n as u64)
    }

    pub fn p_f64(&self) -> f64 {
        self.k.min(self.n - self.k) as f64 / self.n as f64
    }

    /// The domain reached by `x -> 1 - x`.
    pub fn complement(&self) -> SliceDomain {
        SliceDomain {
            n: self.n,
            k: self.n - self.k,
        }
    }

    pub fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn contains(&self, bits: u64) -> bool {
        bits & !self.mask() == 0 && bits.count_ones() == self.k
    }

    pub fn point(&self, bits: u64) -> Result<SlicePoint> {
        if self.contains(bits) {
            Ok(SlicePoint(bits))
        } else {
            Err(Error::DomainMismatch(format!(
                "word {bits:#b} is not a point of binom([{}], {})",
                self.n, self.k
            )))
        }
    }

    /// The point of smallest colex rank.
    pub fn first(&self) -> SlicePoint {
        SlicePoint(if self.k == 64 {
            u64::MAX
        } else {
            (1u64 << self.k) - 1
        })
    }

    /// Colex combinadic rank.
    pub fn rank(&self, pt: SlicePoint) -> Result<u64> {
        if !self.contains(pt.0) {
            return Err(Error::DomainMismatch(format!(
                "word {:#b} has popcount {} (expected {} within {} bits)",
                pt.0,
                pt.0.count_ones(),
                self.k,
                self.n
            )));
        }
        Ok(rank_unchecked(pt.0))
    }

    pub fn unrank(&self, index: u64) -> Result<SlicePoint> {
        let size = self.size();
        if index >= size {
            return Err(Error::IndexOutOfRange { index, size });
        }
        let mut rest = index;
        let mut bits = 0u64;
        let mut hi = self.n;
        for j in (1..=self.k).rev() {
            // Largest position p < hi with C(p, j) <= rest.
            let mut p = hi - 1;
            while binomial_u64(p, j) > rest {
                p -= 1;
            }
            bits |= 1u64 << p;
            rest -= binomial_u64(p, j);
            hi = p;
        }
        Ok(SlicePoint(bits))
    }

    /// The point of rank `rank(pt) + 1`, or `None` after the last point.
    pub fn next_point(&self, pt: SlicePoint) -> Option<SlicePoint> {
        let x = pt.0;
        if x == 0 {
            return None;
        }
        let c = x & x.wrapping_neg();
        let (r, overflow) = x.overflowing_add(c);
        if overflow || r & !self.mask() != 0 {
            return None;
        }
        let next = (((r ^ x) >> 2) / c) | r;
        if next & !self.mask() != 0 {
            None
        } else {
            Some(SlicePoint(next))
        }
    }

    /// All points in colex order.
    pub fn points(&self) -> Points {
        Points {
            domain: *self,
            next: Some(self.first()),
        }
    }

    /// Uniform point via a partial Fisher-Yates selection of `k` of the `n` indices.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> SlicePoint {
        let n = self.n as usize;
        let k = self.k as usize;
        if k == 0 {
            return SlicePoint(0);
        }
        if k == n {
            return SlicePoint(self.mask());
        }
        let mut idx: Vec<u8> = (0..n as u8).collect();
        let mut bits = 0u64;
        for i in 0..k {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
            bits |= 1u64 << idx[i];
        }
        SlicePoint(bits)
    }
}

impl fmt::Display for SliceDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "binom([{}], {})", self.n, self.k)
    }
}

fn rank_unchecked(mut bits: u64) -> u64 {
    let mut rank = 0;
    let mut j = 1;
    while bits != 0 {
        let p = bits.trailing_zeros();
        rank += binomial_u64(p, j);
        j += 1;
        bits &= bits - 1;
    }
    rank
}

/// A point of a slice, as a bit word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlicePoint(u64);

impl SlicePoint {
    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    /// Set coordinates in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

/// Colex-order iterator over a slice.
#[derive(Debug, Clone)]
pub struct Points {
    domain: SliceDomain,
    next: Option<SlicePoint>,
}

impl Iterator for Points {
    type Item = SlicePoint;

    fn next(&mut self) -> Option<SlicePoint> {
        let cur = self.next?;
        self.next = self.domain.next_point(cur);
        Some(cur)
    }
}

/// Anything with a real value at every rank of a slice.
pub trait SliceFunction {
    fn domain(&self) -> SliceDomain;
    fn value_at(&self, index: usize) -> f64;

    fn exact_value_at(&self, index: usize) -> BigRational {
        BigRational::from_float(self.value_at(index)).expect("table values are finite")
    }
}

/// A Boolean function on a slice, indexed by colex rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolTable {
    domain: SliceDomain,
    values: BitVec<u64, Lsb0>,
}

impl BoolTable {
    pub fn new(domain: SliceDomain, values: BitVec<u64, Lsb0>) -> Result<Self> {
        let len = domain.len()?;
        if values.len() != len {
            return Err(Error::DomainMismatch(format!(
                "table has {} entries but {domain} has {len} points",
                values.len()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: SliceDomain, mut f: impl FnMut(SlicePoint) -> bool) -> Result<Self> {
        let len = domain.len()?;
        let mut values = BitVec::with_capacity(len);
        for pt in domain.points() {
            values.push(f(pt));
        }
        Ok(Self { domain, values })
    }

    /// Table whose entry at rank `j` is bit `j` of `word` (domains of at most 64 points).
    pub fn from_word(domain: SliceDomain, word: u64) -> Result<Self> {
        let len = domain.len()?;
        if len > 64 {
            return Err(Error::TooLarge(format!("{domain} has more than 64 points")));
        }
        let mut values = BitVec::with_capacity(len);
        for j in 0..len {
            values.push(word >> j & 1 == 1);
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: SliceDomain, value: bool) -> Result<Self> {
        Self::from_fn(domain, |_| value)
    }

    pub fn domain(&self) -> SliceDomain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.values[index]
    }

    pub fn values(&self) -> &BitSlice<u64, Lsb0> {
        &self.values
    }

    pub fn count_ones(&self) -> usize {
        self.values.count_ones()
    }

    /// `1 - f` on the same domain.
    pub fn negate(&self) -> BoolTable {
        BoolTable {
            domain: self.domain,
            values: !self.values.clone(),
        }
    }

    /// Number of ranks where the two tables differ.
    pub fn disagreements(&self, other: &BoolTable) -> Result<u64> {
        check_same(self.domain, other.domain)?;
        Ok((self.values.clone() ^ &other.values).count_ones() as u64)
    }

    pub fn to_real(&self) -> RealTable {
        RealTable {
            domain: self.domain,
            values: self
                .values
                .iter()
                .map(|b| if *b { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Text form: `slice n k` then one line of `C(n,k)` characters in `{0,1}`.
    pub fn to_text(&self) -> String {
        let mut s = format!("slice {} {}\n", self.domain.n, self.domain.k);
        s.extend(self.values.iter().map(|b| if *b { '1' } else { '0' }));
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let domain = parse_slice_header(lines.next())?;
        let body = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing truth-table line"))?
            .trim_end();
        if lines.any(|l| !l.trim().is_empty()) {
            return Err(parse_err(3, "unexpected content after the truth table"));
        }
        let len = domain.len()?;
        if body.len() != len {
            return Err(parse_err(
                2,
                format!("expected {len} characters, found {}", body.len()),
            ));
        }
        let mut values = BitVec::with_capacity(len);
        for (i, ch) in body.bytes().enumerate() {
            match ch {
                b'0' => values.push(false),
                b'1' => values.push(true),
                _ => {
                    return Err(parse_err(
                        2,
                        format!("invalid character at column {}", i + 1),
                    ))
                }
            }
        }
        Ok(Self { domain, values })
    }
}

impl SliceFunction for BoolTable {
    fn domain(&self) -> SliceDomain {
        self.domain
    }

    fn value_at(&self, index: usize) -> f64 {
        if self.values[index] {
            1.0
        } else {
            0.0
        }
    }

    fn exact_value_at(&self, index: usize) -> BigRational {
        BigRational::from_integer(BigInt::from(self.values[index] as u8))
    }
}

/// A real-valued function on a slice, indexed by colex rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTable {
    domain: SliceDomain,
    values: Vec<f64>,
}

impl RealTable {
    pub fn new(domain: SliceDomain, values: Vec<f64>) -> Result<Self> {
        let len = domain.len()?;
        if values.len() != len {
            return Err(Error::DomainMismatch(format!(
                "table has {} entries but {domain} has {len} points",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: SliceDomain, mut f: impl FnMut(SlicePoint) -> f64) -> Result<Self> {
        let values: Vec<f64> = domain.points().map(&mut f).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> SliceDomain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Some(table)` when every entry is exactly 0 or 1.
    pub fn as_boolean(&self) -> Option<BoolTable> {
        let mut values = BitVec::with_capacity(self.values.len());
        for &v in &self.values {
            if v == 0.0 {
                values.push(false);
            } else if v == 1.0 {
                values.push(true);
            } else {
                return None;
            }
        }
        Some(BoolTable {
            domain: self.domain,
            values,
        })
    }

    /// Text form: `slice n k` then one decimal per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("slice {} {}\n", self.domain.n, self.domain.k);
        for v in &self.values {
            s.push_str(&format!("{v}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let domain = parse_slice_header(lines.next())?;
        let len = domain.len()?;
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if values.len() == len {
                return Err(parse_err(i + 2, "more values than points in the domain"));
            }
            let v: f64 = line
                .parse()
                .map_err(|_| parse_err(i + 2, format!("not a decimal: {line:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(i + 2, "non-finite value"));
            }
            values.push(v);
        }
        if values.len() != len {
            return Err(parse_err(
                values.len() + 2,
                format!("expected {len} values, found {}", values.len()),
            ));
        }
        Ok(Self { domain, values })
    }
}

impl SliceFunction for RealTable {
    fn domain(&self) -> SliceDomain {
        self.domain
    }

    fn value_at(&self, index: usize) -> f64 {
        self.values[index]
    }
}

pub(crate) fn parse_slice_header(line: Option<&str>) -> Result<SliceDomain> {
    let line = line.ok_or_else(|| parse_err(1, "empty input"))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some("slice") {
        return Err(parse_err(1, "expected header `slice n k`"));
    }
    let n: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(1, "missing or invalid n"))?;
    let k: u32 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(1, "missing or invalid k"))?;
    if parts.next().is_some() {
        return Err(parse_err(1, "trailing tokens in header"));
    }
    let domain = SliceDomain::new(n, k).map_err(|e| parse_err(1, e.to_string()))?;
    // Reject huge domains before the body is examined.
    domain.len().map_err(|e| parse_err(1, e.to_string()))?;
    Ok(domain)
}

fn check_same(a: SliceDomain, b: SliceDomain) -> Result<()> {
    if a != b {
        return Err(Error::DomainMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// `E[(f - g)^2]` under the uniform measure, with compensated summation.
pub fn dist_sq<F, G>(f: &F, g: &G) -> Result<f64>
where
    F: SliceFunction + ?Sized,
    G: SliceFunction + ?Sized,
{
    let domain = f.domain();
    check_same(domain, g.domain())?;
    let len = domain.len()?;
    let mut acc = CompensatedSum::new();
    for i in 0..len {
        let d = f.value_at(i) - g.value_at(i);
        acc.add(d * d);
    }
    Ok(acc.value() / len as f64)
}

/// Exact `E[(f - g)^2]`, using the exact binary value of every entry.
pub fn dist_sq_exact<F, G>(f: &F, g: &G) -> Result<BigRational>
where
    F: SliceFunction + ?Sized,
    G: SliceFunction + ?Sized,
{
    let domain = f.domain();
    check_same(domain, g.domain())?;
    if domain.size() > EXACT_RATIONAL_LIMIT {
        return Err(Error::TooLarge(format!(
            "exact mode needs at most {EXACT_RATIONAL_LIMIT} points, {domain} has {}",
            domain.size()
        )));
    }
    let len = domain.len()?;
    let mut acc = BigRational::zero();
    for i in 0..len {
        let d = f.exact_value_at(i) - g.exact_value_at(i);
        acc += &d * &d;
    }
    Ok(acc / BigRational::from_u64(len as u64).expect("nonzero length"))
}

/// Pointwise nearest value in `{0, 1}`; exactly `1/2` rounds to 1.
pub fn round_to_boolean(g: &RealTable) -> BoolTable {
    let values = g.values.iter().map(|&v| v >= 0.5).collect();
    BoolTable {
        domain: g.domain,
        values,
    }
}

/// `f(1 - x)` as a table on `binom([n], n - k)`.
///
/// Complementing reverses the numeric (hence colex) order of the words, so the
/// pulled-back table is the original read backwards.
pub fn complement_bool(f: &BoolTable) -> BoolTable {
    let mut values = f.values.clone();
    values.reverse();
    BoolTable {
        domain: f.domain.complement(),
        values,
    }
}

pub fn complement_real(f: &RealTable) -> RealTable {
    let mut values = f.values.clone();
    values.reverse();
    RealTable {
        domain: f.domain.complement(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn dom(n: u32, k: u32) -> SliceDomain {
        SliceDomain::new(n, k).unwrap()
    }

    /// Independent colex oracle: all k-subsets of [n] sorted by
    /// (largest element, next largest, ...), i.e. by the reversed index list.
    fn colex_oracle(n: u32, k: u32) -> Vec<u64> {
        let mut words: Vec<u64> = (0u64..1 << n).filter(|w| w.count_ones() == k).collect();
        words.sort_by_key(|w| {
            let mut idx: Vec<u32> = (0..n).filter(|i| w >> i & 1 == 1).collect();
            idx.reverse();
            idx
        });
        words
    }

    #[test]
    fn rank_examples() {
        assert_eq!(dom(4, 2).rank(SlicePoint(0b0011)).unwrap(), 0);
        assert_eq!(dom(4, 2).rank(SlicePoint(0b1100)).unwrap(), 5);
        assert_eq!(dom(5, 2).rank(SlicePoint(0b01010)).unwrap(), 4);
        let oracle = colex_oracle(5, 2);
        assert_eq!(oracle[4], 0b01010);
    }

    #[test]
    fn rank_rejects_wrong_popcount() {
        assert!(matches!(
            dom(4, 2).rank(SlicePoint(0b0111)),
            Err(Error::DomainMismatch(_))
        ));
        assert!(dom(4, 2).rank(SlicePoint(0b10001)).is_err());
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(dom(4, 2).unrank(0).unwrap().bits(), 0b0011);
        assert_eq!(dom(4, 2).unrank(5).unwrap().bits(), 0b1100);
        assert_eq!(dom(5, 2).unrank(4).unwrap().bits(), 0b01010);
        assert!(matches!(
            dom(4, 2).unrank(6),
            Err(Error::IndexOutOfRange { index: 6, size: 6 })
        ));
    }

    #[test]
    fn next_point_examples() {
        let d = dom(4, 2);
        assert_eq!(d.next_point(SlicePoint(0b0011)), Some(SlicePoint(0b0101)));
        assert_eq!(d.next_point(SlicePoint(0b0110)), Some(SlicePoint(0b1001)));
        assert_eq!(d.next_point(SlicePoint(0b1100)), None);
        assert_eq!(dom(3, 0).points().count(), 1);
        assert_eq!(dom(64, 64).points().count(), 1);
        assert_eq!(dom(64, 63).points().count(), 64);
    }

    #[test]
    fn enumeration_matches_oracle() {
        for n in 1..=10 {
            for k in 0..=n {
                let got: Vec<u64> = dom(n, k).points().map(|p| p.bits()).collect();
                assert_eq!(got, colex_oracle(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn rank_unrank_exhaustive_to_twenty() {
        for n in 1..=20 {
            for k in 0..=n {
                let d = dom(n, k);
                let mut count = 0u64;
                for (i, pt) in d.points().enumerate() {
                    assert_eq!(d.rank(pt).unwrap(), i as u64);
                    assert_eq!(d.unrank(i as u64).unwrap(), pt);
                    count += 1;
                }
                assert_eq!(count, d.size());
            }
        }
    }

    #[test]
    fn wide_domain_rank_extremes() {
        let d = dom(64, 32);
        let last = d.unrank(d.size() - 1).unwrap();
        assert_eq!(last.bits(), u64::MAX << 32);
        assert_eq!(d.rank(last).unwrap(), d.size() - 1);
        assert_eq!(d.next_point(last), None);
        assert_eq!(d.size_big(), BigUint::from(d.size()));
        assert!(matches!(SliceDomain::new(65, 3), Err(Error::TooWide(65))));
    }

    #[test]
    fn sampling_edges_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(dom(7, 0).sample_uniform(&mut rng).bits(), 0);
        assert_eq!(dom(7, 7).sample_uniform(&mut rng).bits(), 0b1111111);
        let a: Vec<_> = {
            let mut r = worker_rng(9, 2);
            (0..20).map(|_| dom(10, 4).sample_uniform(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = worker_rng(9, 2);
            (0..20).map(|_| dom(10, 4).sample_uniform(&mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(a.iter().all(|p| dom(10, 4).contains(p.bits())));
    }

    #[test]
    fn dist_sq_examples() {
        let d = dom(5, 2);
        let f = BoolTable::from_word(d, 0b0000010011).unwrap();
        assert_eq!(dist_sq(&f, &f).unwrap(), 0.0);
        let g = BoolTable::from_word(d, 0b0000010111).unwrap();
        assert_eq!(dist_sq(&f, &g).unwrap(), 0.1);

        let d = dom(10, 2);
        let max12 = BoolTable::from_fn(d, |p| p.contains(0) || p.contains(1)).unwrap();
        let sum12 = RealTable::from_fn(d, |p| {
            p.contains(0) as u8 as f64 + p.contains(1) as u8 as f64
        })
        .unwrap();
        assert!((dist_sq(&max12, &sum12).unwrap() - 1.0 / 45.0).abs() < 1e-15);
        assert_eq!(
            dist_sq_exact(&max12, &sum12).unwrap(),
            BigRational::new(1.into(), 45.into())
        );
    }

    #[test]
    fn dist_sq_rejects_mismatch() {
        let f = BoolTable::constant(dom(5, 2), true).unwrap();
        let g = BoolTable::constant(dom(5, 3), true).unwrap();
        assert!(matches!(dist_sq(&f, &g), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn rounding_examples() {
        let d = dom(6, 3);
        let r = round_to_boolean(&RealTable::from_fn(d, |_| 0.2).unwrap());
        assert_eq!(r, BoolTable::constant(d, false).unwrap());
        let r = round_to_boolean(&RealTable::from_fn(d, |_| 0.5).unwrap());
        assert_eq!(r, BoolTable::constant(d, true).unwrap());
        let sum =
            RealTable::from_fn(d, |p| (p.contains(1) as u8 + p.contains(4) as u8) as f64).unwrap();
        let max = BoolTable::from_fn(d, |p| p.contains(1) || p.contains(4)).unwrap();
        assert_eq!(round_to_boolean(&sum), max);
    }

    #[test]
    fn complement_matches_rank_oracle() {
        let d = dom(7, 3);
        let f = BoolTable::from_fn(d, |p| p.bits() % 3 == 1).unwrap();
        let g = complement_bool(&f);
        assert_eq!(g.domain(), dom(7, 4));
        for (j, y) in g.domain().points().enumerate() {
            let x = !y.bits() & d.mask();
            let i = d.rank(d.point(x).unwrap()).unwrap() as usize;
            assert_eq!(g.get(j), f.get(i));
        }
    }

    #[test]
    fn text_round_trip_and_errors() {
        let d = dom(5, 2);
        let f = BoolTable::from_word(d, 0b1001101100).unwrap();
        let text = f.to_text();
        assert_eq!(text, "slice 5 2\n0011011001\n");
        assert_eq!(BoolTable::parse(&text).unwrap(), f);
        assert!(BoolTable::parse("slice 5 2\n001101100\n").is_err());
        assert!(BoolTable::parse("slice 5 2\n00110110x1\n").is_err());
        assert!(BoolTable::parse("slice 5 6\n0\n").is_err());
        assert!(BoolTable::parse("slice 70 2\n0\n").is_err());
        assert!(BoolTable::parse("cube 3\n00000000\n").is_err());

        let r = RealTable::from_fn(d, |p| p.bits() as f64 / 7.0).unwrap();
        assert_eq!(RealTable::parse(&r.to_text()).unwrap(), r);
        assert!(RealTable::parse("slice 2 1\n1.0\nnan\n").is_err());
        assert!(RealTable::parse("slice 2 1\n1.0\n").is_err());
    }
}
