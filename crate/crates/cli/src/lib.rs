//! Command-line front end for `csma-core`.
//!
//! Every command produces a CSV table. Without `--out` the table goes to
//! standard output; with it the table is written to the file and a short
//! summary is printed instead.

pub mod config;
pub mod figures;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use csma_core::report::{
    fmt_g17, partition_table, results_rows, roots_rows, summary_line, threshold_row, Table, RESULTS_HEADER,
    ROOTS_HEADER, THRESHOLD_HEADER,
};
use csma_core::{
    all_roots, optimal_beta_finite, partition_recursive, simulate, threshold_interval, throughput_collision_free,
    throughput_finite, throughput_infinite, ModelParams, SimStats, Topology,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::figures::FigureOptions;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CSMA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "csma", version, about = "CSMA sensing-range analysis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partition function table `ln Z_i` for `i = 0..=imax`.
    Partition {
        #[arg(long)]
        beta: usize,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long)]
        imax: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// All roots of the characteristic polynomial.
    Roots {
        #[arg(long)]
        beta: usize,
        /// One or more activation rates.
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_hyphen_values = true)]
        sigma: Vec<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Throughput of the middle node of a line network.
    Throughput {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eta: u32,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        /// Half-size of a finite line; omit for the infinite line.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 0.5)]
        psi: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Throughput-optimal sensing range at one activation rate.
    Optimize {
        #[arg(long)]
        eta: u32,
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        /// Also optimize a finite line of half-size `n`.
        #[arg(long)]
        n: Option<u32>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Threshold interval and optimal sensing range over a sigma sweep.
    Threshold {
        #[arg(long)]
        eta: u32,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        sigma_from: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma_to: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build a topology and print it in the text format.
    Topology {
        #[arg(long, value_enum)]
        kind: TopologyKind,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        rows: u32,
        #[arg(long, default_value_t = 4)]
        cols: u32,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 3.0)]
        side: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the simulations described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Emit the data behind a figure.
    Figure {
        /// fig3, fig4, fig5, fig6, fig7, fig8 or fig10.
        name: String,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        batches: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TopologyKind {
    Line,
    Grid,
    Random,
}

/// Output of a command: the main artifact plus summary lines.
#[derive(Debug, Default)]
pub struct Output {
    pub body: String,
    pub summary: Vec<String>,
}

impl From<Table> for Output {
    fn from(t: Table) -> Self {
        Output {
            summary: vec![format!("{} rows", t.rows.len())],
            body: t.to_csv(),
        }
    }
}

/// Thread pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker threads")
}

/// Runs a command and writes its output.
pub fn run(cli: Cli) -> Result<()> {
    let (output, out) = execute(cli.command)?;
    match out {
        Some(path) => {
            write_file(&path, &output.body)?;
            for line in &output.summary {
                println!("{line}");
            }
            println!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(output.body.as_bytes()).context("writing to standard output")?;
        }
    }
    Ok(())
}

pub fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Computes a command's output and the path it should go to.
pub fn execute(command: Command) -> Result<(Output, Option<PathBuf>)> {
    let pool = thread_pool()?;
    match command {
        Command::Partition { beta, sigma, imax, out } => {
            let table = partition_recursive(beta, sigma, imax)?;
            Ok((partition_table(&table).into(), out.out))
        }
        Command::Roots { beta, sigma, out } => {
            let mut t = Table::new(ROOTS_HEADER);
            for s in sigma {
                roots_rows(&mut t, &all_roots(beta, s)?);
            }
            Ok((t.into(), out.out))
        }
        Command::Throughput {
            beta,
            eta,
            sigma,
            n,
            psi,
            out,
        } => Ok((throughput_table(beta, eta, sigma, n, psi)?.into(), out.out)),
        Command::Optimize { eta, sigma, n, out } => {
            let res = threshold_interval(eta)?;
            let beta_star = res.optimal_beta(sigma)?;
            let finite = match n {
                Some(n) => {
                    if n < eta + 1 + (eta + 1) {
                        bail!("n = {n} too small for eta = {eta}; need n >= {}", 2 * eta + 2);
                    }
                    Some((n, optimal_beta_finite(n, eta, sigma, n - eta - 1)?.0))
                }
                None => None,
            };
            let mut t = Table::new(THRESHOLD_HEADER);
            t.push(threshold_row(&res, sigma, beta_star, finite));
            Ok((t.into(), out.out))
        }
        Command::Threshold {
            eta,
            n,
            sigma_from,
            sigma_to,
            points,
            out,
        } => {
            let res = threshold_interval(eta)?;
            let (lo, hi) = if sigma_from > 0.0 && sigma_to > 0.0 {
                (sigma_from, sigma_to)
            } else {
                // Pad the analytic bounds on both sides.
                let pad = 0.25 * (res.bound_high - res.bound_low);
                (res.bound_low - pad, res.bound_high + pad)
            };
            if !(lo > 0.0 && hi > lo) || points < 2 {
                bail!("need 0 < sigma-from < sigma-to and at least 2 points");
            }
            if let Some(n) = n {
                if n < 2 * eta + 2 {
                    bail!("n = {n} too small for eta = {eta}; need n >= {}", 2 * eta + 2);
                }
            }
            let sigmas: Vec<f64> = (0..points)
                .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                .collect();
            let rows: Vec<Vec<String>> = pool.install(|| {
                sigmas
                    .par_iter()
                    .map(|&s| -> Result<Vec<String>> {
                        let finite = match n {
                            Some(n) => Some((n, optimal_beta_finite(n, eta, s, n - eta - 1)?.0)),
                            None => None,
                        };
                        Ok(threshold_row(&res, s, res.optimal_beta(s)?, finite))
                    })
                    .collect::<Result<_>>()
            })?;
            let mut t = Table::new(THRESHOLD_HEADER);
            rows.into_iter().for_each(|r| t.push(r));
            Ok((t.into(), out.out))
        }
        Command::Topology {
            kind,
            n,
            rows,
            cols,
            spacing,
            m,
            count,
            side,
            seed,
            out,
        } => {
            let top = match kind {
                TopologyKind::Line => Topology::line(n)?,
                TopologyKind::Grid => Topology::wrapped_grid(rows, cols, spacing, m)?,
                TopologyKind::Random => Topology::random(count, side, m, seed)?,
            };
            let output = Output {
                summary: vec![format!("{} nodes, {} links", top.len(), top.links.len())],
                body: top.to_text(),
            };
            Ok((output, out.out))
        }
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let output = run_experiment(&cfg, &pool)?;
            Ok((output, out.out.or(cfg.out)))
        }
        Command::Figure {
            name,
            eta,
            n,
            seed,
            horizon,
            batches,
            out,
        } => {
            let opts = FigureOptions {
                eta,
                n,
                seed,
                horizon,
                batches,
            };
            let table = pool.install(|| figures::figure(&name, &opts))?;
            Ok((table.into(), out.out))
        }
    }
}

pub const THROUGHPUT_HEADER: &[&str] = &["beta", "eta", "sigma", "n", "kind", "throughput"];

fn throughput_table(beta: f64, eta: u32, sigma: f64, n: Option<u32>, psi: f64) -> Result<Table> {
    let mut t = Table::new(THROUGHPUT_HEADER);
    let (kind, value) = match n {
        Some(n) => {
            if beta < 0.0 || beta.fract() != 0.0 {
                bail!("finite lines need an integer sensing range, got {beta}");
            }
            let params = ModelParams::new(beta as u32, eta, sigma, n).with_psi(psi);
            ("finite", throughput_finite(&params)?.value)
        }
        None => ("infinite", throughput_infinite(beta, eta, sigma)?.value),
    };
    t.push(vec![
        fmt_g17(beta),
        eta.to_string(),
        fmt_g17(sigma),
        n.map_or_else(String::new, |n| n.to_string()),
        kind.to_string(),
        fmt_g17(value),
    ]);
    if n.is_none() && beta >= f64::from(eta) + 1.0 {
        let cf = throughput_collision_free(beta, sigma)?;
        t.push(vec![
            fmt_g17(beta),
            eta.to_string(),
            fmt_g17(sigma),
            String::new(),
            "collision_free".into(),
            fmt_g17(cf),
        ]);
    }
    Ok(t)
}

/// Runs every grid point of an experiment, in parallel, in grid order.
pub fn run_experiment(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<Output> {
    let top = cfg.topology.build()?;
    let id = cfg.topology.id();
    let points = cfg.grid();
    let stats: Vec<SimStats> = pool.install(|| {
        points
            .par_iter()
            .map(|p| simulate(&top, p))
            .collect::<csma_core::Result<_>>()
    })?;
    let mut t = Table::new(RESULTS_HEADER);
    let mut summary = Vec::with_capacity(points.len());
    for (p, s) in points.iter().zip(&stats) {
        results_rows(&mut t, &id, p, s);
        summary.push(summary_line(&id, p, s));
    }
    Ok(Output {
        body: t.to_csv(),
        summary,
    })
}
