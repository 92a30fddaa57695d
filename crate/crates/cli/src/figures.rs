//! Data grids behind the published figures.

use anyhow::{bail, Result};
use csma_core::report::{fmt_g17, results_rows, roots_rows, threshold_row, Table, RESULTS_HEADER, ROOTS_HEADER, THRESHOLD_HEADER};
use csma_core::{
    all_roots, optimal_beta_finite, partition_recursive, simulate, threshold_interval,
    throughput_finite_with, throughput_infinite, ModelParams, SimConfig, SimStats, Topology,
};
use rayon::prelude::*;

pub const FIGURES: &[&str] = &["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig10"];

pub const COMPARISON_HEADER: &[&str] = &["n", "eta", "sigma", "beta", "theta_n", "theta", "abs_error"];
pub const LIMIT_HEADER: &[&str] = &["beta", "eta", "sigma", "throughput"];

/// Optional overrides of the default figure parameters.
#[derive(Debug, Clone, Default)]
pub struct FigureOptions {
    pub eta: Option<f64>,
    pub n: Option<u32>,
    pub seed: Option<u64>,
    pub horizon: Option<f64>,
    pub batches: Option<usize>,
}

pub fn figure(name: &str, opts: &FigureOptions) -> Result<Table> {
    match name {
        "fig3" => fig3(opts),
        "fig4" => fig4(),
        "fig5" => fig5(opts),
        "fig6" => fig6(opts),
        "fig7" => fig7(opts),
        "fig8" => fig8(opts),
        "fig10" => fig10(opts),
        other => bail!("unknown figure {other:?}; expected one of {}", FIGURES.join(", ")),
    }
}

/// `count` points spaced evenly in `log10` over `[10^lo, 10^hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / (count - 1) as f64))
        .collect()
}

fn integer_eta(opts: &FigureOptions, default: u32) -> Result<u32> {
    match opts.eta {
        None => Ok(default),
        Some(e) if e >= 0.0 && e.fract() == 0.0 => Ok(e as u32),
        Some(e) => bail!("this figure needs an integer interference range, got {e}"),
    }
}

/// Infinite-line throughput against `sigma` for several sensing ranges.
pub fn fig3(opts: &FigureOptions) -> Result<Table> {
    let eta = integer_eta(opts, 7)?;
    let mut t = Table::new(LIMIT_HEADER);
    for beta in eta - eta.min(1)..=eta + 3 {
        for sigma in log_grid(-2.0, 4.0, 61) {
            let th = throughput_infinite(f64::from(beta), eta, sigma)?;
            t.push(vec![beta.to_string(), eta.to_string(), fmt_g17(sigma), fmt_g17(th.value)]);
        }
    }
    Ok(t)
}

/// Root portrait at `beta = 4`.
pub fn fig4() -> Result<Table> {
    let mut t = Table::new(ROOTS_HEADER);
    for sigma in log_grid(-3.0, 3.0, 61) {
        roots_rows(&mut t, &all_roots(4, sigma)?);
    }
    Ok(t)
}

fn comparison_row(t: &mut Table, n: u32, eta: u32, sigma: f64, beta: u32) -> Result<()> {
    let table = partition_recursive(beta as usize, sigma, 2 * n as usize + 1)?;
    let finite = throughput_finite_with(&ModelParams::new(beta, eta, sigma, n), &table)?.value;
    let limit = throughput_infinite(f64::from(beta), eta, sigma)?.value;
    t.push(vec![
        n.to_string(),
        eta.to_string(),
        fmt_g17(sigma),
        beta.to_string(),
        fmt_g17(finite),
        fmt_g17(limit),
        fmt_g17((finite - limit).abs()),
    ]);
    Ok(())
}

/// Finite against infinite throughput over `beta` at `n = 100`.
pub fn fig5(opts: &FigureOptions) -> Result<Table> {
    let eta = integer_eta(opts, 4)?;
    let n = opts.n.unwrap_or(100);
    let mut t = Table::new(COMPARISON_HEADER);
    for sigma in [0.25, 5.0] {
        for beta in 1..=n {
            comparison_row(&mut t, n, eta, sigma, beta)?;
        }
    }
    Ok(t)
}

/// Finite against infinite throughput over `n` at `beta = 16`.
pub fn fig6(opts: &FigureOptions) -> Result<Table> {
    let eta = integer_eta(opts, 4)?;
    let beta = 16;
    let n_max = opts.n.unwrap_or(200);
    let n_min = beta.max(eta + 1);
    if n_max < n_min {
        bail!("n must be at least {n_min}");
    }
    let mut t = Table::new(COMPARISON_HEADER);
    for sigma in [0.25, 5.0] {
        for n in n_min..=n_max {
            comparison_row(&mut t, n, eta, sigma, beta)?;
        }
    }
    Ok(t)
}

/// Optimal sensing range around the threshold interval, finite and infinite.
pub fn fig7(opts: &FigureOptions) -> Result<Table> {
    let eta = integer_eta(opts, 5)?;
    let sizes = match opts.n {
        Some(n) => vec![n],
        None => vec![15, 20, 25, 30],
    };
    let res = threshold_interval(eta)?;
    let mut t = Table::new(THRESHOLD_HEADER);
    for &n in &sizes {
        if n < 2 * eta + 2 {
            bail!("n = {n} too small for eta = {eta}; need n >= {}", 2 * eta + 2);
        }
        for k in 0..=80 {
            let sigma = f64::from(300 + k) / 2000.0;
            let continuous = res.optimal_beta(sigma)?;
            let (finite, _) = optimal_beta_finite(n, eta, sigma, n - eta - 1)?;
            t.push(threshold_row(&res, sigma, continuous, Some((n, finite))));
        }
    }
    Ok(t)
}

fn run_sweep(top: &Topology, id: &str, betas: &[f64], sigmas: &[f64], base: &SimConfig) -> Result<Table> {
    let points: Vec<SimConfig> = betas
        .iter()
        .flat_map(|&beta| sigmas.iter().map(move |&sigma| SimConfig { beta, sigma, ..base.clone() }))
        .collect();
    let stats: Vec<SimStats> = points
        .par_iter()
        .map(|cfg| simulate(top, cfg))
        .collect::<csma_core::Result<_>>()?;
    let mut t = Table::new(RESULTS_HEADER);
    for (cfg, s) in points.iter().zip(&stats) {
        let only_all = SimStats {
            nodes: Vec::new(),
            ..s.clone()
        };
        results_rows(&mut t, id, cfg, &only_all);
    }
    Ok(t)
}

fn sim_base(opts: &FigureOptions, eta: f64) -> SimConfig {
    let mut base = SimConfig::new(0.0, eta, 1.0, opts.horizon.unwrap_or(2e4), opts.seed.unwrap_or(1));
    if let Some(b) = opts.batches {
        base.batches = b;
    }
    base
}

/// Average per-node throughput on the wrapped 4x4 grid.
pub fn fig8(opts: &FigureOptions) -> Result<Table> {
    let eta = opts.eta.unwrap_or(1.0);
    let top = Topology::wrapped_grid(4, 4, 1.0, 1.0)?;
    let sigmas = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
    run_sweep(&top, "grid-4x4", &[0.0, 1.0, 1.5, 2.0], &sigmas, &sim_base(opts, eta))
}

/// Average per-node throughput on a random 16-node network.
pub fn fig10(opts: &FigureOptions) -> Result<Table> {
    let eta = opts.eta.unwrap_or(1.6);
    let seed = opts.seed.unwrap_or(1);
    let top = Topology::random(16, 3.0, 1.0, seed)?;
    let sigmas = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
    run_sweep(
        &top,
        &format!("random-16-s{seed}"),
        &[0.2, 0.3, 1.0, 1.3, 1.5],
        &sigmas,
        &sim_base(opts, eta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(-2.0, 4.0, 61);
        assert_eq!(g.len(), 61);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[60] - 1e4).abs() < 1e-9);
        assert!((g[20] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_figure_rejected() {
        assert!(figure("fig9", &FigureOptions::default()).is_err());
    }

    #[test]
    fn fractional_eta_rejected_for_line_figures() {
        let opts = FigureOptions {
            eta: Some(1.5),
            ..Default::default()
        };
        assert!(fig3(&opts).is_err());
    }

    #[test]
    fn fig5_shape() {
        let t = fig5(&FigureOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 200);
        assert_eq!(t.header, COMPARISON_HEADER);
    }
}
