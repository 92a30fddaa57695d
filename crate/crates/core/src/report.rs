//! CSV tables with stable headers and locale-independent number formatting.

use std::fmt::Write as _;

use crate::optimize::ThresholdResult;
use crate::partition::PartitionTable;
use crate::roots::RootSet;
use crate::simulate::{NodeStats, SimConfig, SimStats};

pub const PARTITION_HEADER: &[&str] = &["i", "log_Z", "Z_if_representable"];
pub const ROOTS_HEADER: &[&str] = &["beta", "sigma", "j", "re_lambda", "im_lambda", "method"];
pub const THRESHOLD_HEADER: &[&str] = &[
    "eta",
    "sigma",
    "beta_star_continuous",
    "beta_star_finite_n",
    "n",
    "sigma_min",
    "sigma_max",
    "bound_low",
    "bound_high",
    "approx_min",
    "approx_max",
];
pub const RESULTS_HEADER: &[&str] = &[
    "topology_id",
    "beta",
    "eta",
    "sigma",
    "seed",
    "node_id",
    "attempts",
    "blocked",
    "collided",
    "success",
    "throughput",
    "stderr",
];

/// Formats a float with 17 significant digits in the style of C's `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Header plus string rows, rendered as comma-separated text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn partition_table(table: &PartitionTable) -> Table {
    let mut t = Table::new(PARTITION_HEADER);
    let linear = table.linear_values();
    for (i, (&lz, &z)) in table.log_values.iter().zip(&linear).enumerate() {
        let z = if z.is_finite() { fmt_g17(z) } else { String::new() };
        t.push(vec![i.to_string(), fmt_g17(lz), z]);
    }
    t
}

pub fn roots_rows(table: &mut Table, set: &RootSet) {
    for (j, (root, method)) in set.roots.iter().zip(&set.methods).enumerate() {
        table.push(vec![
            set.beta.to_string(),
            fmt_g17(set.sigma),
            j.to_string(),
            fmt_g17(root.re),
            fmt_g17(root.im),
            method.as_str().to_string(),
        ]);
    }
}

/// One threshold row at activation rate `sigma`; `finite` holds
/// `(n, beta*_n)` when a finite network was also optimized.
pub fn threshold_row(
    res: &ThresholdResult,
    sigma: f64,
    beta_star: f64,
    finite: Option<(u32, u32)>,
) -> Vec<String> {
    let (n, bn) = match finite {
        Some((n, b)) => (n.to_string(), b.to_string()),
        None => (String::new(), String::new()),
    };
    vec![
        res.eta.to_string(),
        fmt_g17(sigma),
        fmt_g17(beta_star),
        bn,
        n,
        fmt_g17(res.sigma_min),
        fmt_g17(res.sigma_max),
        fmt_g17(res.bound_low),
        fmt_g17(res.bound_high),
        fmt_g17(res.approx_min),
        fmt_g17(res.approx_max),
    ]
}

/// Appends one row per transmitter and an `ALL` row.
pub fn results_rows(table: &mut Table, topology_id: &str, cfg: &SimConfig, stats: &SimStats) {
    let row = |s: &NodeStats| {
        vec![
            topology_id.to_string(),
            fmt_g17(cfg.beta),
            fmt_g17(cfg.eta),
            fmt_g17(cfg.sigma),
            cfg.seed.to_string(),
            s.node.map_or_else(|| "ALL".to_string(), |v| v.to_string()),
            s.attempts.to_string(),
            s.blocked.to_string(),
            s.collided.to_string(),
            s.success.to_string(),
            fmt_g17(s.throughput),
            fmt_g17(s.stderr),
        ]
    };
    for s in &stats.nodes {
        table.push(row(s));
    }
    table.push(row(&stats.aggregate));
}

/// Short human-readable summary of a run.
pub fn summary_line(topology_id: &str, cfg: &SimConfig, stats: &SimStats) -> String {
    let mut s = String::new();
    let a = &stats.aggregate;
    let _ = write!(
        s,
        "{topology_id} beta={} eta={} sigma={} seed={}: throughput {:.6} +/- {:.6} (success {}, collided {}, blocked {})",
        cfg.beta, cfg.eta, cfg.sigma, cfg.seed, a.throughput, a.stderr, a.success, a.collided, a.blocked
    );
    s
}
