//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment. List values are comma-separated.
//!
//! ```text
//! [experiment]
//! name = line3
//! out = results.csv
//!
//! [topology]
//! kind = line        # line | grid | random | file
//! n = 3
//!
//! [parameters]
//! beta = 2
//! eta = 1
//! sigma = 0.5, 1
//! seed = 1, 2, 3
//!
//! [simulation]
//! horizon = 1e6
//! warmup_fraction = 0.1
//! batches = 20
//! psi = 0.5          # optional; directional destinations on a line
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use csma_core::{Destination, SimConfig, Topology};

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySpec {
    Line { n: u32 },
    Grid { rows: u32, cols: u32, spacing: f64, m: f64 },
    Random { count: usize, side: f64, m: f64, seed: u64 },
    File { path: PathBuf },
}

impl TopologySpec {
    pub fn build(&self) -> Result<Topology> {
        Ok(match self {
            TopologySpec::Line { n } => Topology::line(*n)?,
            TopologySpec::Grid { rows, cols, spacing, m } => Topology::wrapped_grid(*rows, *cols, *spacing, *m)?,
            TopologySpec::Random { count, side, m, seed } => Topology::random(*count, *side, *m, *seed)?,
            TopologySpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading topology {}", path.display()))?;
                Topology::from_text(&text).with_context(|| format!("parsing topology {}", path.display()))?
            }
        })
    }

    /// Short identifier used in result tables.
    pub fn id(&self) -> String {
        match self {
            TopologySpec::Line { n } => format!("line-n{n}"),
            TopologySpec::Grid { rows, cols, .. } => format!("grid-{rows}x{cols}"),
            TopologySpec::Random { count, seed, .. } => format!("random-{count}-s{seed}"),
            TopologySpec::File { path } => path
                .file_stem()
                .map_or_else(|| "file".to_string(), |s| s.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub out: Option<PathBuf>,
    pub topology: TopologySpec,
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub seed: Vec<u64>,
    pub horizon: f64,
    pub warmup_fraction: f64,
    pub batches: usize,
    pub psi: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        // Relative paths inside the config resolve against its directory.
        let base = path.parent().unwrap_or(Path::new(""));
        if let TopologySpec::File { path: p } = &mut cfg.topology {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut sections = Sections(sections);

        let name = sections.take("experiment", "name").map(|(_, v)| v).unwrap_or_else(|| "experiment".into());
        let out = sections.take("experiment", "out").map(|(_, v)| PathBuf::from(v));

        let (kind_line, kind) = sections
            .take("topology", "kind")
            .ok_or_else(|| anyhow!("missing [topology] kind"))?;
        let topology = match kind.as_str() {
            "line" => TopologySpec::Line { n: sections.required("topology", "n")? },
            "grid" => TopologySpec::Grid {
                rows: sections.optional("topology", "rows")?.unwrap_or(4),
                cols: sections.optional("topology", "cols")?.unwrap_or(4),
                spacing: sections.optional("topology", "spacing")?.unwrap_or(1.0),
                m: sections.optional("topology", "m")?.unwrap_or(1.0),
            },
            "random" => TopologySpec::Random {
                count: sections.optional("topology", "count")?.unwrap_or(16),
                side: sections.optional("topology", "side")?.unwrap_or(3.0),
                m: sections.optional("topology", "m")?.unwrap_or(1.0),
                seed: sections.optional("topology", "seed")?.unwrap_or(1),
            },
            "file" => TopologySpec::File {
                path: PathBuf::from(sections.required::<String>("topology", "path")?),
            },
            other => bail!("line {kind_line}: unknown topology kind {other:?}"),
        };

        let beta = sections.list("parameters", "beta")?;
        let eta = sections.list("parameters", "eta")?;
        let sigma = sections.list("parameters", "sigma")?;
        let seed = match sections.take("parameters", "seed") {
            Some((line, v)) => parse_list(line, &v)?,
            None => vec![1],
        };

        let horizon = sections.required("simulation", "horizon")?;
        let warmup_fraction = sections.optional("simulation", "warmup_fraction")?.unwrap_or(0.1);
        let batches = sections.optional("simulation", "batches")?.unwrap_or(20);
        let psi = sections.optional("simulation", "psi")?;

        sections.reject_leftovers()?;
        let cfg = ExperimentConfig {
            name,
            out,
            topology,
            beta,
            eta,
            sigma,
            seed,
            horizon,
            warmup_fraction,
            batches,
            psi,
        };
        // Surface invalid settings before any simulation starts.
        cfg.base_sim().validate()?;
        Ok(cfg)
    }

    pub fn base_sim(&self) -> SimConfig {
        SimConfig {
            beta: self.beta[0],
            eta: self.eta[0],
            sigma: self.sigma[0],
            destination: self.psi.map_or(Destination::Uniform, |psi| Destination::Directional { psi }),
            horizon: self.horizon,
            warmup_fraction: self.warmup_fraction,
            seed: self.seed[0],
            batches: self.batches,
        }
    }

    /// Every grid point in `(beta, eta, sigma, seed)` lexicographic order.
    pub fn grid(&self) -> Vec<SimConfig> {
        let base = self.base_sim();
        let mut out = Vec::new();
        for &beta in &self.beta {
            for &eta in &self.eta {
                for &sigma in &self.sigma {
                    for &seed in &self.seed {
                        out.push(SimConfig {
                            beta,
                            eta,
                            sigma,
                            seed,
                            ..base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("experiment", &["name", "out"]),
    ("topology", &["kind", "n", "rows", "cols", "spacing", "m", "count", "side", "seed", "path"]),
    ("parameters", &["beta", "eta", "sigma", "seed"]),
    ("simulation", &["horizon", "warmup_fraction", "batches", "psi"]),
];

type Entries = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn parse_sections(text: &str) -> Result<Entries> {
    let mut sections: Entries = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {line_no}: unterminated section header"))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                bail!("line {line_no}: unknown section [{name}]");
            }
            sections.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {line_no}: expected key = value"))?;
        let section = current
            .as_ref()
            .ok_or_else(|| anyhow!("line {line_no}: key outside of any section"))?;
        let key = key.trim().to_string();
        let known = KEYS.iter().find(|(s, _)| s == section).map_or(&[][..], |(_, k)| *k);
        if !known.contains(&key.as_str()) {
            bail!("line {line_no}: unknown key {key:?} in [{section}]");
        }
        let entries = sections.get_mut(section).expect("section registered");
        if let Some((first, _)) = entries.get(&key) {
            bail!("line {line_no}: duplicate key {key:?} (first set on line {first})");
        }
        entries.insert(key, (line_no, value.trim().to_string()));
    }
    Ok(sections)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("line {line}: invalid value {value:?} for {key}: {e}"))
}

fn parse_list<T: FromStr>(line: usize, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(line, "list", s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("line {line}: empty list");
    }
    Ok(items)
}

struct Sections(Entries);

impl Sections {
    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.0.get_mut(section).and_then(|s| s.remove(key))
    }

    fn optional<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.take(section, key)
            .map(|(line, v)| parse_value(line, key, &v))
            .transpose()
    }

    fn required<T: FromStr>(&mut self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.optional(section, key)?
            .ok_or_else(|| anyhow!("missing [{section}] {key}"))
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self
            .take(section, key)
            .ok_or_else(|| anyhow!("missing [{section}] {key}"))?;
        parse_list(line, &v)
    }

    fn reject_leftovers(&self) -> Result<()> {
        let first = self
            .0
            .iter()
            .flat_map(|(s, keys)| keys.iter().map(move |(k, (line, _))| (*line, s, k)))
            .min();
        match first {
            Some((line, section, key)) => bail!("line {line}: key {key:?} in [{section}] does not apply here"),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[topology]
kind = line
n = 3
[parameters]
beta = 2
eta = 1
sigma = 1
[simulation]
horizon = 1000
";

    #[test]
    fn minimal_config_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.topology, TopologySpec::Line { n: 3 });
        assert_eq!(cfg.seed, vec![1]);
        assert_eq!(cfg.batches, 20);
        assert_eq!(cfg.warmup_fraction, 0.1);
        assert_eq!(cfg.grid().len(), 1);
    }

    #[test]
    fn grid_is_cartesian_product() {
        let text = MINIMAL.replace("sigma = 1", "sigma = 0.5, 1, 2\nseed = 4,5");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let grid = cfg.grid();
        assert_eq!(grid.len(), 6);
        assert_eq!((grid[0].sigma, grid[0].seed), (0.5, 4));
        assert_eq!((grid[5].sigma, grid[5].seed), (2.0, 5));
    }

    #[test]
    fn errors_report_line_numbers() {
        let cases = [
            (MINIMAL.replace("n = 3", "n = three"), "line 3"),
            (MINIMAL.replace("eta = 1", "eta"), "line 6"),
            (MINIMAL.replace("eta = 1", "gamma = 1"), "line 6"),
            (MINIMAL.replace("[simulation]", "[sim]"), "line 8"),
            (format!("{MINIMAL}horizon = 5\n"), "line 10"),
            (MINIMAL.replace("sigma = 1", "sigma = ,"), "line 7"),
        ];
        for (text, want) in cases {
            let err = format!("{:#}", ExperimentConfig::parse(&text).unwrap_err());
            assert!(err.contains(want), "{err}");
        }
    }

    #[test]
    fn single_batch_rejected() {
        let text = format!("{MINIMAL}batches = 1\n");
        let err = format!("{:#}", ExperimentConfig::parse(&text).unwrap_err());
        assert!(err.contains("batches"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = format!("# header\n\n{}", MINIMAL.replace("n = 3", "n = 3  # half size"));
        assert!(ExperimentConfig::parse(&text).is_ok());
    }
}
