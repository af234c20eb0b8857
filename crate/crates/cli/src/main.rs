//! `epiholder` command-line tool.
//!
//! Exit codes: 0 success, 1 a verified inequality failed, 2 bad input or a
//! numerical error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use epiholder::constants::derive_constants;
use epiholder::extension::{gehring_martio_check, write_decades_csv};
use epiholder::harmonic::{wos_evaluate, BoundaryData, HarmonicField, WosEstimate};
use epiholder::hoelder::{
    pair_quotients, random_pairs, theorem_check, vertical_pairs, write_pairs_csv, Pair,
    SeminormEstimate, SeminormMode,
};
use epiholder::rng::with_workers;
use epiholder::scenario::{Scenario, ScenarioConfig};
use epiholder::{Error, ScalarField};

#[derive(Parser)]
#[command(name = "epiholder", version, about = "Hoelder estimates for harmonic functions on Lipschitz epigraphs")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Run {
    #[arg(long)]
    config: PathBuf,
    /// Output file for the JSON report (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces every seed in the scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constant bundle for the given dimension, exponent, Lipschitz bound and vertical constant.
    Constants {
        #[arg(long)]
        dim: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lip: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// Run the full check of a scenario; exit 1 if an inequality fails.
    Verify {
        #[command(flatten)]
        run: Run,
        /// Also write one CSV row per vertical pair.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Estimate one seminorm of the scenario field.
    Seminorm {
        #[command(flatten)]
        run: Run,
        /// vertical, global or local
        #[arg(long)]
        mode: String,
        /// Also write one CSV row per sampled pair.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Weighted curve-length ratios of lift curves, per separation decade.
    Extension {
        #[command(flatten)]
        run: Run,
        /// CSV file for the per-decade table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Walk-on-spheres estimates at the scenario's evaluation points.
    WosEval {
        #[command(flatten)]
        run: Run,
    },
}

enum Failure {
    Input(String),
    Inequality,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(io_err(p)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(e.to_string())),
    }
}

fn create(path: &Path) -> Result<File, Failure> {
    File::create(path).map_err(io_err(path))
}

fn load(run: &Run) -> Result<Scenario, Failure> {
    let text = std::fs::read_to_string(&run.config).map_err(io_err(&run.config))?;
    let mut config = ScenarioConfig::from_json(&text)?;
    if let Some(seed) = run.seed {
        config = config.with_seed(seed);
    }
    let base = run.config.parent().unwrap_or(Path::new("."));
    Ok(Scenario::from_config(config, base)?)
}

#[derive(Serialize)]
struct WosRow {
    point: Vec<f64>,
    estimate: WosEstimate,
    /// Closed-form value when the scenario field has one.
    reference: Option<f64>,
}

#[derive(Serialize)]
struct WosReport {
    scenario: String,
    rows: Vec<WosRow>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Constants { dim, alpha, lip, c } => emit(&derive_constants(dim, alpha, lip, c)?, None),
        Command::Verify { run, csv } => {
            let s = load(&run)?;
            let c = &s.config;
            let report = theorem_check(&s.field, &s.domain, c.alpha, &c.samplers, c.tol, c.inflation)?;
            if let Some(path) = csv {
                let pairs = vertical_pairs(&s.domain, &c.samplers.vertical)?;
                let q = pair_quotients(&s.field, c.alpha, &pairs)?;
                write_pairs_csv(create(&path)?, &pairs, &q)?;
            }
            emit(&report, run.out.as_deref())?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Inequality)
            }
        }
        Command::Seminorm { run, mode, csv } => {
            let mode: SeminormMode = mode.parse()?;
            let s = load(&run)?;
            let c = &s.config;
            let pairs: Vec<Pair> = match mode {
                SeminormMode::Vertical => vertical_pairs(&s.domain, &c.samplers.vertical)?,
                SeminormMode::Global => random_pairs(&s.domain, &c.samplers.pairs, false)?,
                SeminormMode::Local => random_pairs(&s.domain, &c.samplers.pairs, true)?,
            };
            let q = pair_quotients(&s.field, c.alpha, &pairs)?;
            let mut best = 0;
            for (i, v) in q.iter().enumerate() {
                if *v > q[best] {
                    best = i;
                }
            }
            let est = SeminormEstimate {
                mode,
                value: q[best],
                witness: Some(pairs[best].clone()),
                n_samples: pairs.len(),
                alpha: c.alpha,
            };
            if let Some(path) = csv {
                write_pairs_csv(create(&path)?, &pairs, &q)?;
            }
            emit(&est, run.out.as_deref())
        }
        Command::Extension { run, csv } => {
            let s = load(&run)?;
            let c = &s.config;
            let report = gehring_martio_check(&s.domain, c.alpha, &c.extension, &c.quadrature)?;
            if let Some(path) = csv {
                write_decades_csv(create(&path)?, &report.rows)?;
            }
            emit(&report, run.out.as_deref())
        }
        Command::WosEval { run } => {
            let s = load(&run)?;
            let c = &s.config;
            if c.wos_points.is_empty() {
                return Err(Failure::Input("scenario lists no wos_points".into()));
            }
            let data = BoundaryData::of_field(&s.field, &s.domain.graph)?;
            let reference = match &s.field {
                HarmonicField::Wos(_) => None,
                f => Some(f),
            };
            let rows = c
                .wos_points
                .iter()
                .map(|p| -> Result<WosRow, Failure> {
                    Ok(WosRow {
                        point: p.coords().to_vec(),
                        estimate: wos_evaluate(&s.domain, &data, p, &c.wos)?,
                        reference: reference.map(|f| f.value(p)).transpose()?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            emit(&WosReport { scenario: c.name.clone(), rows }, run.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let workers = cli.workers;
    match with_workers(workers, move || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Inequality) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
