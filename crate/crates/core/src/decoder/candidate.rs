use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which of `f`, `1 - f` a candidate approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "f")]
    Direct,
    #[serde(rename = "1-f")]
    Complement,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Direct => Polarity::Complement,
            Polarity::Complement => Polarity::Direct,
        }
    }
}

/// Shape of the approximating function. Coordinates are 0-based and sets are
/// kept sorted. `max {} = 0`, `min {} = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg", rename_all = "kebab-case")]
pub enum CandidateKind {
    Const(bool),
    Dict(usize),
    AntiDict(usize),
    MaxOf(Vec<usize>),
    MinOf(Vec<usize>),
}

impl CandidateKind {
    fn order(&self) -> u8 {
        match self {
            CandidateKind::Const(false) => 0,
            CandidateKind::Const(true) => 1,
            CandidateKind::Dict(_) => 2,
            CandidateKind::AntiDict(_) => 3,
            CandidateKind::MaxOf(_) => 4,
            CandidateKind::MinOf(_) => 5,
        }
    }
}

/// One member of the approximating family, in canonical form.
///
/// Canonical form: sets of size 0 become constants, sets of size 1 become
/// `Dict`, and constants and (anti-)dictators always carry
/// [`Polarity::Direct`] since their complements are again family members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateForm {
    pub kind: CandidateKind,
    pub polarity: Polarity,
}

impl CandidateForm {
    /// Builds a candidate and brings it to canonical form.
    pub fn new(kind: CandidateKind, polarity: Polarity) -> CandidateForm {
        CandidateForm { kind, polarity }.canonical()
    }

    pub fn max_of(set: impl IntoIterator<Item = usize>, polarity: Polarity) -> CandidateForm {
        CandidateForm {
            kind: CandidateKind::MaxOf(set.into_iter().collect()),
            polarity,
        }
        .canonical()
    }

    pub fn min_of(set: impl IntoIterator<Item = usize>, polarity: Polarity) -> CandidateForm {
        CandidateForm {
            kind: CandidateKind::MinOf(set.into_iter().collect()),
            polarity,
        }
        .canonical()
    }

    pub fn constant(value: bool) -> CandidateForm {
        CandidateForm {
            kind: CandidateKind::Const(value),
            polarity: Polarity::Direct,
        }
    }

    pub fn dict(i: usize) -> CandidateForm {
        CandidateForm {
            kind: CandidateKind::Dict(i),
            polarity: Polarity::Direct,
        }
    }

    pub fn anti_dict(i: usize) -> CandidateForm {
        CandidateForm {
            kind: CandidateKind::AntiDict(i),
            polarity: Polarity::Direct,
        }
    }

    fn canonical(self) -> CandidateForm {
        use CandidateKind::*;
        let CandidateForm { kind, polarity } = self;
        let kind = match kind {
            MaxOf(s) => match sorted_set(s).as_slice() {
                [] => Const(false),
                [i] => Dict(*i),
                s => MaxOf(s.to_vec()),
            },
            MinOf(s) => match sorted_set(s).as_slice() {
                [] => Const(true),
                [i] => Dict(*i),
                s => MinOf(s.to_vec()),
            },
            other => other,
        };
        match (kind, polarity) {
            (Const(b), Polarity::Complement) => CandidateForm::constant(!b),
            (Dict(i), Polarity::Complement) => CandidateForm::anti_dict(i),
            (AntiDict(i), Polarity::Complement) => CandidateForm::dict(i),
            (kind, polarity) => CandidateForm { kind, polarity },
        }
    }

    /// Value of the shape `g` at a point.
    pub fn shape_at(&self, x: u64) -> bool {
        match &self.kind {
            CandidateKind::Const(b) => *b,
            CandidateKind::Dict(i) => x >> i & 1 == 1,
            CandidateKind::AntiDict(i) => x >> i & 1 == 0,
            CandidateKind::MaxOf(s) => x & set_mask(s) != 0,
            CandidateKind::MinOf(s) => {
                let m = set_mask(s);
                x & m == m
            }
        }
    }

    /// The function this candidate claims `f` is close to: `g` for polarity
    /// `f`, `1 - g` for polarity `1 - f`.
    pub fn approximant_at(&self, x: u64) -> bool {
        self.shape_at(x) != (self.polarity == Polarity::Complement)
    }

    /// The equivalent candidate for `1 - f`.
    pub fn flip(&self) -> CandidateForm {
        CandidateForm {
            kind: self.kind.clone(),
            polarity: self.polarity.flip(),
        }
        .canonical()
    }

    /// The candidate for `x -> f(1 - x)`: max and min exchange.
    pub fn mirror(&self) -> CandidateForm {
        use CandidateKind::*;
        match &self.kind {
            Const(_) => self.clone(),
            Dict(i) => CandidateForm::anti_dict(*i),
            AntiDict(i) => CandidateForm::dict(*i),
            MaxOf(s) => CandidateForm {
                kind: MinOf(s.clone()),
                polarity: self.polarity.flip(),
            }
            .canonical(),
            MinOf(s) => CandidateForm {
                kind: MaxOf(s.clone()),
                polarity: self.polarity.flip(),
            }
            .canonical(),
        }
    }

    /// The coordinate set `S` (empty for constants).
    pub fn set(&self) -> Vec<usize> {
        match &self.kind {
            CandidateKind::Const(_) => Vec::new(),
            CandidateKind::Dict(i) | CandidateKind::AntiDict(i) => vec![*i],
            CandidateKind::MaxOf(s) | CandidateKind::MinOf(s) => s.clone(),
        }
    }

    pub fn set_size(&self) -> usize {
        match &self.kind {
            CandidateKind::Const(_) => 0,
            CandidateKind::Dict(_) | CandidateKind::AntiDict(_) => 1,
            CandidateKind::MaxOf(s) | CandidateKind::MinOf(s) => s.len(),
        }
    }

    /// Tie-breaking order among equal distances: smaller `|S|`, then
    /// lexicographic `S`, then polarity `f` before `1 - f`, then kind.
    pub fn tie_order(&self, other: &CandidateForm) -> Ordering {
        self.set_size()
            .cmp(&other.set_size())
            .then_with(|| self.set().cmp(&other.set()))
            .then_with(|| self.polarity.cmp(&other.polarity))
            .then_with(|| self.kind.order().cmp(&other.kind.order()))
    }
}

fn sorted_set(mut s: Vec<usize>) -> Vec<usize> {
    s.sort_unstable();
    s.dedup();
    s
}

pub(crate) fn set_mask(s: &[usize]) -> u64 {
    s.iter().fold(0u64, |m, &i| m | 1u64 << i)
}

impl fmt::Display for CandidateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &[usize]| {
            s.iter()
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let shape = match &self.kind {
            CandidateKind::Const(b) => format!("{}", *b as u8),
            CandidateKind::Dict(i) => format!("x{i}"),
            CandidateKind::AntiDict(i) => format!("1 - x{i}"),
            CandidateKind::MaxOf(s) => format!("max({})", list(s)),
            CandidateKind::MinOf(s) => format!("min({})", list(s)),
        };
        match self.polarity {
            Polarity::Direct => write!(f, "f ~ {shape}"),
            Polarity::Complement => write!(f, "1 - f ~ {shape}"),
        }
    }
}
