//! Exhaustive search for Boolean functions that are exactly affine on a slice.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::slice_gram;
use crate::error::{Error, Result};
use crate::numeric::structured_solve;
use crate::slice::SliceDomain;

/// Residual below which a function counts as affine.
pub const AFFINE_TOLERANCE: f64 = 1e-10;
/// Largest slice for which all `2^C(n,k)` functions are enumerated.
pub const MAX_POINTS: u64 = 20;
/// Functions per checkpointed block.
pub const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: u32,
    pub k: u32,
    /// `2^C(n, k)`.
    pub search_space: u64,
    /// Functions actually examined; equals `search_space` on completion.
    pub examined: u64,
    /// Affine Boolean tables as words (bit `r` = value at colex rank `r`), sorted.
    pub found: Vec<u64>,
    /// `0, 1, x_i, 1 - x_i` as words, sorted.
    pub expected: Vec<u64>,
}

impl ClassificationReport {
    pub fn count(&self) -> usize {
        self.found.len()
    }

    pub fn complete(&self) -> bool {
        self.examined == self.search_space
    }

    /// Complete, exactly `2n + 2` functions found, and they are the expected ones.
    pub fn passed(&self) -> bool {
        self.complete()
            && self.found.len() == 2 * self.n as usize + 2
            && self.found == self.expected
    }
}

/// Resumable state of a sweep: the next block to process and what was found so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: u32,
    pub k: u32,
    pub next_block: u64,
    pub found: Vec<u64>,
}

struct Layout {
    /// Coordinates of each point, by rank.
    members: Vec<Vec<usize>>,
    words: Vec<u64>,
    alpha: f64,
    beta: f64,
    n: usize,
}

impl Layout {
    fn new(domain: SliceDomain) -> Layout {
        let (alpha, beta) = slice_gram(domain);
        Layout {
            members: domain.points().map(|p| p.indices().collect()).collect(),
            words: domain.points().map(|p| p.bits()).collect(),
            alpha,
            beta,
            n: domain.n() as usize,
        }
    }

    /// Residual of the least-squares affine fit of the table `w`.
    fn residual(&self, w: u64) -> f64 {
        let len = self.members.len() as f64;
        let mut b = vec![0.0; self.n];
        for (r, m) in self.members.iter().enumerate() {
            if w >> r & 1 == 1 {
                for &i in m {
                    b[i] += 1.0;
                }
            }
        }
        b.iter_mut().for_each(|v| *v /= len);
        let c = structured_solve(self.alpha, self.beta, &b);
        let mut acc = 0.0;
        for (r, m) in self.members.iter().enumerate() {
            let fit: f64 = m.iter().map(|&i| c[i]).sum();
            let v = (w >> r & 1) as f64;
            acc += (v - fit) * (v - fit);
        }
        acc / len
    }

    fn table_of(&self, f: impl Fn(u64) -> bool) -> u64 {
        self.words
            .iter()
            .enumerate()
            .fold(0, |acc, (r, &x)| if f(x) { acc | 1 << r } else { acc })
    }

    fn expected(&self) -> Vec<u64> {
        let mut v = vec![self.table_of(|_| false), self.table_of(|_| true)];
        for i in 0..self.n {
            v.push(self.table_of(|x| x >> i & 1 == 1));
            v.push(self.table_of(|x| x >> i & 1 == 0));
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Enumerates every Boolean function on `binom([n], k)` and keeps those whose
/// affine residual is at most [`AFFINE_TOLERANCE`].
pub fn verify_affine_classification(n: u32, k: u32) -> Result<ClassificationReport> {
    run_classification(n, k, None, None)
}

/// As [`verify_affine_classification`], saving progress to `checkpoint` after
/// each block and resuming from it if it exists. `max_blocks` bounds the work
/// done in this call.
pub fn run_classification(
    n: u32,
    k: u32,
    checkpoint: Option<&Path>,
    max_blocks: Option<u64>,
) -> Result<ClassificationReport> {
    let domain = SliceDomain::new(n, k)?;
    if k < 2 || k + 2 > n {
        return Err(Error::OutOfRange(format!(
            "classification needs 2 <= k <= n - 2, got {domain}"
        )));
    }
    let size = domain.size();
    if size > MAX_POINTS {
        return Err(Error::TooLarge(format!(
            "{domain} has {size} points; at most {MAX_POINTS} are enumerable"
        )));
    }
    let layout = Layout::new(domain);
    let search_space = 1u64 << size;
    let blocks = search_space.div_ceil(BLOCK);

    let mut state = match checkpoint {
        Some(path) if path.exists() => {
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| {
                Error::OutOfRange(format!("bad checkpoint {}: {e}", path.display()))
            })?;
            if (cp.n, cp.k) != (n, k) {
                return Err(Error::DomainMismatch(format!(
                    "checkpoint is for binom({}, {})",
                    cp.n, cp.k
                )));
            }
            cp
        }
        _ => Checkpoint {
            n,
            k,
            next_block: 0,
            found: Vec::new(),
        },
    };

    let stop = max_blocks.map_or(blocks, |m| (state.next_block + m).min(blocks));
    while state.next_block < stop {
        let lo = state.next_block * BLOCK;
        let hi = (lo + BLOCK).min(search_space);
        let mut hits: Vec<u64> = (lo..hi)
            .into_par_iter()
            .filter(|&w| layout.residual(w) <= AFFINE_TOLERANCE)
            .collect();
        hits.sort_unstable();
        state.found.extend(hits);
        state.next_block += 1;
        if let Some(path) = checkpoint {
            let text = serde_json::to_string(&state).expect("checkpoint serializes");
            fs::write(path, text).map_err(|e| io_error(path, e))?;
        }
    }
    Ok(ClassificationReport {
        n,
        k,
        search_space,
        examined: (state.next_block * BLOCK).min(search_space),
        found: state.found,
        expected: layout.expected(),
    })
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::OutOfRange(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_two_has_ten() {
        let r = verify_affine_classification(4, 2).unwrap();
        assert_eq!(r.count(), 10);
        assert!(r.passed());
    }

    #[test]
    fn resumes_from_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cp.json");
        // binom(6,2) has 15 points: 2^15 functions fit in one block.
        let partial = run_classification(6, 2, Some(&path), Some(0)).unwrap();
        assert_eq!(partial.examined, 0);
        let done = run_classification(6, 2, Some(&path), None).unwrap();
        assert!(done.passed());
        let again = run_classification(6, 2, Some(&path), None).unwrap();
        assert_eq!(again, done);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(verify_affine_classification(4, 1).is_err());
        assert!(verify_affine_classification(8, 4).is_err());
    }
}
