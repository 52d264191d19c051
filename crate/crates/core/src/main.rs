use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use slicefkn::cube::CubeFn;
use slicefkn::decoder::{decode_embedding, decode_mu_p_with, ReportDocument};
use slicefkn::harness::{envelope, run_sweep, Grid, OutputFormat, SweepConfig, Target};
use slicefkn::hypergeom::{rational_string, to_f64, write_pmf_csv};
use slicefkn::{
    decode_with, project_affine_with, BoolTable, DecodeConfig, EstimateConfig, HypergeomParams,
    RealTable,
};

#[derive(Parser)]
#[command(
    name = "slicefkn",
    version,
    about = "Affine closeness and junta recovery on slices of the hypercube"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct EstimateArgs {
    /// Monte Carlo sample count for domains above the exact limit.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domains with at most this many points are enumerated.
    #[arg(long, default_value_t = 1_000_000)]
    exact_limit: u64,
}

impl EstimateArgs {
    fn config(&self) -> EstimateConfig {
        EstimateConfig {
            exact_limit: self.exact_limit,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Grid entry `key=values`, values as `a..b` or comma lists; repeatable.
    #[arg(long = "grid")]
    grid: Vec<String>,
    /// Required by randomized targets.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Checkpoint path prefix for resumable classification sweeps.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Decoder,
    Tightness,
}

#[derive(Clone, Copy, ValueEnum)]
enum HypergeomQuery {
    Pmf,
    Mode,
    Tail,
}

#[derive(Subcommand)]
enum Command {
    /// Decode a slice table, or a cube table under mu_p.
    Decode {
        table: PathBuf,
        /// Decode a `cube m` table under the product measure with this p.
        #[arg(long)]
        mu_p: Option<f64>,
        /// Also decode through the slice binom([N], floor(pN)) and compare.
        #[arg(long, requires = "mu_p")]
        embedding_n: Option<u64>,
        #[command(flatten)]
        estimate: EstimateArgs,
        /// Skip the local-search and exact stages.
        #[arg(long)]
        pipeline_only: bool,
        /// Write the JSON report here and print a summary instead.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Best affine approximation of a slice table.
    Project {
        table: PathBuf,
        #[command(flatten)]
        estimate: EstimateArgs,
    },
    /// Run a verification target.
    Verify {
        #[arg(value_parser = parse_target)]
        target: Target,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Run a sweep.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Exact hypergeometric queries.
    Hypergeom {
        #[arg(value_enum)]
        query: HypergeomQuery,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        t: u64,
        /// Threshold for `tail`: Pr[X >= s].
        #[arg(long)]
        s: Option<i64>,
    },
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: slicefkn::Error| e.to_string())
}

/// Run failures: bad input maps to exit code 2, a failed check to 1.
enum Failure {
    Usage(String),
    Violation,
}

impl From<slicefkn::Error> for Failure {
    fn from(e: slicefkn::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn decode_cmd(
    table: &Path,
    mu_p: Option<f64>,
    embedding_n: Option<u64>,
    estimate: &EstimateArgs,
    pipeline_only: bool,
    json_out: Option<&Path>,
) -> Result<(), Failure> {
    let text = read(table)?;
    let mut config = if pipeline_only {
        DecodeConfig::pipeline_only()
    } else {
        DecodeConfig::default()
    };
    config.estimate = estimate.config();
    let is_cube = text.trim_start().starts_with("cube");
    let doc = match (is_cube, mu_p) {
        (true, Some(p)) => {
            let f = CubeFn::parse(&text)?;
            match embedding_n {
                Some(big_n) => {
                    let r = decode_embedding(&f, p, big_n, &config)?;
                    let mut v = serde_json::to_value(ReportDocument::new(
                        r.embedded.clone(),
                        &config,
                        "embedding",
                        Some(big_n),
                    ))
                    .expect("json serializes");
                    v["embedding"] = json!({
                        "big_n": r.big_n,
                        "level": r.level,
                        "total_variation": r.total_variation,
                        "total_variation_exact": r.total_variation_exact,
                        "direct_candidate": r.direct.candidate,
                        "direct_distance": r.direct.distance,
                        "candidates_agree": r.candidates_agree,
                    });
                    v
                }
                None => {
                    let r = decode_mu_p_with(&f, p, &config)?;
                    serde_json::to_value(ReportDocument::new(r, &config, "mu-p", None))
                        .expect("json serializes")
                }
            }
        }
        (true, None) => return Err(Failure::Usage("cube tables need --mu-p".into())),
        (false, Some(_)) => return Err(Failure::Usage("--mu-p needs a `cube m` table".into())),
        (false, None) => {
            let f = BoolTable::parse(&text)?;
            let r = decode_with(&f, &config)?;
            serde_json::to_value(ReportDocument::new(r, &config, "slice", None))
                .expect("json serializes")
        }
    };
    match json_out {
        Some(path) => {
            emit(&pretty(&doc), Some(path))?;
            let summary = format!(
                "candidate {} distance {} epsilon {} branch {}\n",
                doc["candidate"], doc["distance"], doc["epsilon"], doc["branch"]
            );
            emit(&summary, None)
        }
        None => emit(&pretty(&doc), None),
    }
}

fn project_cmd(table: &Path, estimate: &EstimateArgs) -> Result<(), Failure> {
    let text = read(table)?;
    let config = estimate.config();
    let proj = match BoolTable::parse(&text) {
        Ok(f) => project_affine_with(&f, &config)?,
        Err(_) => project_affine_with(&RealTable::parse(&text)?, &config)?,
    };
    let doc = json!({
        "n": proj.coeffs.domain().n(),
        "k": proj.coeffs.domain().k(),
        "coefficients": proj.coeffs.coeffs(),
        "offset": proj.coeffs.offset(),
        "epsilon": proj.epsilon,
        "epsilon_path": proj.path,
    });
    emit(&pretty(&doc), None)
}

fn sweep_cmd(target: Target, args: &SweepArgs) -> Result<(), Failure> {
    let mut config = SweepConfig::new(target);
    if !args.grid.is_empty() {
        config.grid = Grid::parse_all(args.grid.iter().map(String::as_str))?;
    }
    config.seed = args.seed;
    if let Some(s) = args.samples {
        config.samples = s;
    }
    config.checkpoint = args.checkpoint.clone();
    config.output = args.out.clone();
    config.format = match args.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    let outcome = run_sweep(&config)?;
    let text = match (&config.format, &outcome.csv) {
        (OutputFormat::Csv, Some(csv)) => csv.clone(),
        _ => pretty(&envelope(&config, &outcome)),
    };
    emit(&text, config.output.as_deref())?;
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}

fn hypergeom_cmd(
    query: HypergeomQuery,
    n: u64,
    k: u64,
    t: u64,
    s: Option<i64>,
) -> Result<(), Failure> {
    let h = HypergeomParams::new(n, k, t)?;
    match query {
        HypergeomQuery::Pmf => {
            let mut buf = Vec::new();
            write_pmf_csv(&h, &mut buf)?;
            emit(&String::from_utf8(buf).expect("csv is utf-8"), None)
        }
        HypergeomQuery::Mode => {
            let argmax = h.argmax_pmf();
            let mode = h.mode();
            let doc = json!({
                "n": n, "k": k, "t": t,
                "mode": mode,
                "argmax": argmax,
                "mode_is_argmax": argmax.contains(&mode),
            });
            emit(&pretty(&doc), None)?;
            if argmax.contains(&mode) {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        HypergeomQuery::Tail => {
            let s = s.ok_or_else(|| Failure::Usage("tail needs --s".into()))?;
            let v = h.prob_at_least(s);
            let doc = json!({
                "n": n, "k": k, "t": t, "s": s,
                "prob_at_least_exact": rational_string(&v),
                "prob_at_least": to_f64(&v),
            });
            emit(&pretty(&doc), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Decode {
            table,
            mu_p,
            embedding_n,
            estimate,
            pipeline_only,
            json,
        } => decode_cmd(
            table,
            *mu_p,
            *embedding_n,
            estimate,
            *pipeline_only,
            json.as_deref(),
        ),
        Command::Project { table, estimate } => project_cmd(table, estimate),
        Command::Verify { target, args } => sweep_cmd(*target, args),
        Command::Sweep { kind, args } => sweep_cmd(
            match kind {
                SweepKind::Decoder => Target::Decoder,
                SweepKind::Tightness => Target::Tightness,
            },
            args,
        ),
        Command::Hypergeom { query, n, k, t, s } => hypergeom_cmd(*query, *n, *k, *t, *s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
