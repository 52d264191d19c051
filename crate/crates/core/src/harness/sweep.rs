//! Target selection, parameter grids and the versioned report envelope.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::classification::run_classification;
use super::cube::{verify_cube_fkn, verify_embedding};
use super::decoder::{sweep_decoder_exhaustive, sweep_decoder_random, verify_subcube};
use super::formulas::{tightness_curve, tightness_max, verify_hypergeom, verify_variance};
use crate::decoder::{DecodeConfig, REPORT_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::slice::SliceDomain;

/// Largest slice swept over every function by the decoder target.
pub const EXHAUSTIVE_DECODER_POINTS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Classification,
    Variance,
    Tightness,
    Hypergeom,
    CubeFkn,
    Decoder,
    Subcube,
    Embedding,
}

impl Target {
    pub const ALL: [Target; 8] = [
        Target::Classification,
        Target::Variance,
        Target::Tightness,
        Target::Hypergeom,
        Target::CubeFkn,
        Target::Decoder,
        Target::Subcube,
        Target::Embedding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Classification => "classification",
            Target::Variance => "variance",
            Target::Tightness => "tightness",
            Target::Hypergeom => "hypergeom",
            Target::CubeFkn => "cube-fkn",
            Target::Decoder => "decoder",
            Target::Subcube => "subcube",
            Target::Embedding => "embedding",
        }
    }

    pub fn randomized(self) -> bool {
        matches!(
            self,
            Target::Variance | Target::Decoder | Target::Subcube | Target::Embedding
        )
    }

    /// Keys the target reads from the grid.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Target::Classification => &["n", "k", "domains"],
            Target::Variance => &["n"],
            Target::Tightness => &["n", "k", "s"],
            Target::Hypergeom => &["mode", "tail", "gamma"],
            Target::CubeFkn => &["m"],
            Target::Decoder => &["n", "k", "domains"],
            Target::Subcube => &["n", "k", "domains", "instances"],
            Target::Embedding => &["n", "p", "N", "big", "noise"],
        }
    }

    /// Grid used when none is given.
    pub fn default_grid(self) -> Grid {
        let text: &[&str] = match self {
            Target::Classification => &["domains=4:2,5:2,5:3,6:2,6:4,6:3"],
            Target::Variance => &["n=4..12"],
            Target::Tightness => &["n=10,20,40,100,200", "k=2,4,5,10", "s=1..8"],
            Target::Hypergeom => &["mode=60", "tail=200", "gamma=200"],
            Target::CubeFkn => &["m=4"],
            Target::Decoder => &["domains=5:2,6:3"],
            Target::Subcube => &["domains=8:3,10:2", "instances=20"],
            Target::Embedding => &[
                "n=6",
                "p=0.3",
                "N=50,100,500,2000",
                "big=2000",
                "noise=0.02",
            ],
        };
        Grid::parse_all(text.iter().copied()).expect("default grids parse")
    }

    /// Default sample count: vectors per `n`, random functions, sub-cubes, or test functions.
    pub fn default_samples(self) -> usize {
        match self {
            Target::Variance => 100,
            Target::Decoder => 100_000,
            Target::Subcube => 10_000,
            Target::Embedding => 50,
            _ => 0,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown target `{s}`")))
    }
}

/// Named parameter lists, e.g. `n=4..12`, `p=0.3`, `domains=8:3,10:2`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grid(pub BTreeMap<String, Vec<String>>);

impl Grid {
    /// Parses one `key=values` entry: comma-separated values, where an
    /// inclusive integer range `a..b` expands to its members.
    pub fn parse_entry(entry: &str) -> Result<(String, Vec<String>)> {
        let bad = |why: &str| Error::OutOfRange(format!("grid entry `{entry}`: {why}"));
        let (key, rhs) = entry
            .split_once('=')
            .ok_or_else(|| bad("expected key=values"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(bad("empty key"));
        }
        let mut values = Vec::new();
        for part in rhs.split(',').map(str::trim) {
            if part.is_empty() {
                return Err(bad("empty value"));
            }
            if let Some((a, b)) = part.split_once("..") {
                let a: u64 = a
                    .trim()
                    .parse()
                    .map_err(|_| bad("range bounds must be integers"))?;
                let b: u64 = b
                    .trim()
                    .parse()
                    .map_err(|_| bad("range bounds must be integers"))?;
                if a > b || b - a > 1_000_000 {
                    return Err(bad("empty or oversized range"));
                }
                values.extend((a..=b).map(|v| v.to_string()));
            } else {
                values.push(part.to_string());
            }
        }
        Ok((key.to_string(), values))
    }

    pub fn parse_all<'a>(entries: impl IntoIterator<Item = &'a str>) -> Result<Grid> {
        let mut g = Grid::default();
        for e in entries {
            let (k, v) = Grid::parse_entry(e)?;
            g.0.insert(k, v);
        }
        Ok(g)
    }

    fn values(&self, key: &str) -> Result<&[String]> {
        self.0
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::OutOfRange(format!("grid is missing `{key}`")))
    }

    fn ints(&self, key: &str) -> Result<Vec<u64>> {
        self.values(key)?
            .iter()
            .map(|v| {
                v.parse::<u32>().map(u64::from).map_err(|_| {
                    Error::OutOfRange(format!("`{key}` needs non-negative integers, got `{v}`"))
                })
            })
            .collect()
    }

    fn int(&self, key: &str) -> Result<u64> {
        self.ints(key)?
            .into_iter()
            .max()
            .ok_or_else(|| Error::OutOfRange(format!("`{key}` is empty")))
    }

    fn real(&self, key: &str) -> Result<f64> {
        let v = &self.values(key)?[0];
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::OutOfRange(format!("`{key}` needs a number, got `{v}`")))
    }

    /// `(n, k)` pairs: the `domains` list of `n:k` entries if present, else
    /// every combination of the `n` and `k` lists with `k <= n`.
    fn domains(&self) -> Result<Vec<(u32, u32)>> {
        if self.0.contains_key("domains") {
            return self
                .values("domains")?
                .iter()
                .map(|v| {
                    v.split_once(':')
                        .and_then(|(n, k)| Some((n.trim().parse().ok()?, k.trim().parse().ok()?)))
                        .ok_or_else(|| Error::OutOfRange(format!("domain `{v}` is not n:k")))
                })
                .collect();
        }
        let (ns, ks) = (self.ints("n")?, self.ints("k")?);
        Ok(ns
            .iter()
            .flat_map(|&n| {
                ks.iter()
                    .filter(move |&&k| k <= n)
                    .map(move |&k| (n as u32, k as u32))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// A harness run: which check, over which parameters, with which randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub target: Target,
    pub grid: Grid,
    pub seed: Option<u64>,
    /// See [`Target::default_samples`].
    pub samples: usize,
    /// Checkpoint file for resumable classification sweeps.
    pub checkpoint: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn new(target: Target) -> Self {
        Self {
            target,
            grid: target.default_grid(),
            seed: None,
            samples: target.default_samples(),
            checkpoint: None,
            output: None,
            format: OutputFormat::Json,
        }
    }

    /// Grid entries non-empty, only known keys, and a seed for randomized targets.
    pub fn validate(&self) -> Result<()> {
        if self.grid.0.is_empty() {
            return Err(Error::OutOfRange("empty parameter grid".into()));
        }
        for key in self.grid.0.keys() {
            if !self.target.keys().contains(&key.as_str()) {
                return Err(Error::OutOfRange(format!(
                    "target {} does not use grid key `{key}` (expects {:?})",
                    self.target,
                    self.target.keys()
                )));
            }
        }
        if self.target.randomized() && self.seed.is_none() {
            return Err(Error::OutOfRange(format!(
                "target {} is randomized and needs --seed",
                self.target
            )));
        }
        if matches!(self.format, OutputFormat::Csv) && self.target != Target::Tightness {
            return Err(Error::OutOfRange(format!(
                "CSV output is available for tightness only, not {}",
                self.target
            )));
        }
        Ok(())
    }
}

/// What a run produced: the report body, a verdict and optional CSV rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub passed: bool,
    pub report: Value,
    pub csv: Option<String>,
}

/// The JSON document written for a run.
pub fn envelope(config: &SweepConfig, outcome: &SweepOutcome) -> Value {
    json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "library_version": env!("CARGO_PKG_VERSION"),
        "target": config.target,
        "grid": config.grid,
        "seed": config.seed,
        "samples": config.samples,
        "passed": outcome.passed,
        "report": outcome.report,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let g = &config.grid;
    let seed = config.seed.unwrap_or(0);
    match config.target {
        Target::Classification => {
            let mut reports = Vec::new();
            for (n, k) in g.domains()? {
                let cp = config
                    .checkpoint
                    .as_ref()
                    .map(|p| p.with_extension(format!("{n}-{k}.json")));
                reports.push(run_classification(n, k, cp.as_deref(), None)?);
            }
            if reports.is_empty() {
                return Err(Error::OutOfRange("no domains in the grid".into()));
            }
            Ok(SweepOutcome {
                passed: reports.iter().all(|r| r.passed()),
                report: to_value(&reports),
                csv: None,
            })
        }
        Target::Variance => {
            let ns = g.ints("n")?;
            let (lo, hi) = (*ns.iter().min().unwrap(), *ns.iter().max().unwrap());
            let r = verify_variance(lo as u32, hi as u32, config.samples, seed)?;
            Ok(SweepOutcome {
                passed: r.passed(1e-10),
                report: to_value(&r),
                csv: None,
            })
        }
        Target::Tightness => {
            let ns = g.ints("n")?;
            let ks = g.ints("k")?;
            let points: Vec<(u64, u64)> = ns
                .iter()
                .flat_map(|&n| ks.iter().filter(move |&&k| k <= n).map(move |&k| (n, k)))
                .collect();
            let rows = tightness_curve(&points, &g.ints("s")?)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r)
                    .map_err(|e| Error::OutOfRange(format!("csv output failed: {e}")))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::OutOfRange(format!("csv output failed: {e}")))?;
            let report = json!({ "max": tightness_max(&rows), "rows": rows });
            Ok(SweepOutcome {
                passed: true,
                report,
                csv: Some(String::from_utf8(bytes).expect("csv is utf-8")),
            })
        }
        Target::Hypergeom => {
            let r = verify_hypergeom(g.int("mode")?, g.int("tail")?, g.int("gamma")?)?;
            Ok(SweepOutcome {
                passed: r.passed(),
                report: to_value(&r),
                csv: None,
            })
        }
        Target::CubeFkn => {
            let r = verify_cube_fkn(g.int("m")? as u32)?;
            Ok(SweepOutcome {
                passed: r.passed(),
                report: to_value(&r),
                csv: None,
            })
        }
        Target::Decoder => {
            let decode = DecodeConfig::default();
            let mut sweeps = Vec::new();
            for (n, k) in g.domains()? {
                let d = SliceDomain::new(n, k)?;
                sweeps.push(if d.size() <= EXHAUSTIVE_DECODER_POINTS {
                    sweep_decoder_exhaustive(d, &decode)?
                } else {
                    sweep_decoder_random(d, config.samples as u64, seed, &decode)?
                });
            }
            Ok(SweepOutcome {
                passed: sweeps.iter().all(|s| s.passed()),
                report: to_value(&sweeps),
                csv: None,
            })
        }
        Target::Subcube => {
            let domains = g
                .domains()?
                .into_iter()
                .map(|(n, k)| SliceDomain::new(n, k))
                .collect::<Result<Vec<_>>>()?;
            let instances = g.int("instances").unwrap_or(20) as usize;
            let r = verify_subcube(&domains, instances, config.samples, seed)?;
            Ok(SweepOutcome {
                passed: r.failures == 0,
                report: to_value(&r),
                csv: None,
            })
        }
        Target::Embedding => {
            let r = verify_embedding(
                g.int("n")? as u32,
                g.real("p")?,
                &g.ints("N")?,
                g.int("big")?,
                config.samples,
                g.real("noise")?,
                seed,
            )?;
            Ok(SweepOutcome {
                passed: r.passed(),
                report: to_value(&r),
                csv: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_entries() {
        let (k, v) = Grid::parse_entry("n=4..6,9").unwrap();
        assert_eq!(k, "n");
        assert_eq!(v, ["4", "5", "6", "9"]);
        assert!(Grid::parse_entry("n").is_err());
        assert!(Grid::parse_entry("n=6..4").is_err());
        assert!(Grid::parse_entry("n=1,,2").is_err());
        let g = Grid::parse_all(["p=x", "m=-1"]).unwrap();
        assert!(g.real("p").is_err());
        assert!(g.ints("m").is_err());
    }

    #[test]
    fn listed_and_crossed_domains() {
        let g = Grid::parse_all(["domains=8:3,10:2"]).unwrap();
        assert_eq!(g.domains().unwrap(), vec![(8, 3), (10, 2)]);
        let g = Grid::parse_all(["n=2..3", "k=2,3"]).unwrap();
        assert_eq!(g.domains().unwrap(), vec![(2, 2), (3, 2), (3, 3)]);
        assert!(Grid::parse_all(["domains=8"]).unwrap().domains().is_err());
    }

    #[test]
    fn defaults_validate_with_seed() {
        for t in Target::ALL {
            let mut c = SweepConfig::new(t);
            c.seed = Some(1);
            c.validate().unwrap();
            assert_eq!(t.name().parse::<Target>().unwrap(), t);
        }
    }

    #[test]
    fn randomized_targets_need_a_seed() {
        assert!(SweepConfig::new(Target::Decoder).validate().is_err());
        assert!(SweepConfig::new(Target::CubeFkn).validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut c = SweepConfig::new(Target::CubeFkn);
        c.grid = Grid::parse_all(["q=1"]).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_classification_run() {
        let mut c = SweepConfig::new(Target::Classification);
        c.grid = Grid::parse_all(["domains=4:2"]).unwrap();
        let out = run_sweep(&c).unwrap();
        assert!(out.passed);
        let doc = envelope(&c, &out);
        assert_eq!(doc["report"][0]["found"].as_array().unwrap().len(), 10);
        assert_eq!(doc["target"], "classification");
    }

    #[test]
    fn tightness_csv() {
        let mut c = SweepConfig::new(Target::Tightness);
        c.grid = Grid::parse_all(["n=10", "k=2", "s=2"]).unwrap();
        let out = run_sweep(&c).unwrap();
        let csv = out.csv.unwrap();
        assert!(csv.starts_with("n,k,s,value_exact"));
        assert!(csv.contains("1/45"));
    }
}
