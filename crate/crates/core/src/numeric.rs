//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of reals.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `dist(x, {0, +1, -1})`.
pub fn dist_to_unit_lattice(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        a - 1.0
    } else {
        a.min(1.0 - a)
    }
}

/// Solves `(alpha I + beta J) x = rhs` using the rank-one closed form
/// `(1/alpha) (I - beta / (alpha + n beta) J)`.
pub fn structured_solve(alpha: f64, beta: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len() as f64;
    let total = csum(rhs.iter().copied());
    let shift = beta / (alpha + n * beta) * total;
    rhs.iter().map(|b| (b - shift) / alpha).collect()
}
