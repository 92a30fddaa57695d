//! Geometric network instances.
//!
//! Links, sensing and interference are all defined by (possibly toroidal)
//! Euclidean distance. Receive-only nodes take part in interference checks
//! but never transmit.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Slack applied to every `dist <= range` comparison.
pub const DISTANCE_SLACK: f64 = 1e-12;
/// Placement attempts made by [`Topology::random`] before giving up.
pub const RANDOM_RETRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub transmitter: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub nodes: Vec<Node>,
    /// Directed links `(u, v)`, sorted.
    pub links: Vec<(usize, usize)>,
    /// Transmission range used to form the links.
    pub m: f64,
    /// Torus side lengths `(width, height)` when distances wrap around.
    pub wrap: Option<(f64, f64)>,
    out_links: Vec<Vec<usize>>,
}

fn within(distance: f64, range: f64) -> bool {
    distance <= range + DISTANCE_SLACK
}

impl Topology {
    /// Builds a topology with links between every pair within distance `m`.
    pub fn from_nodes(nodes: Vec<Node>, m: f64, wrap: Option<(f64, f64)>) -> Result<Self> {
        let mut top = Topology {
            nodes,
            links: Vec::new(),
            m,
            wrap,
            out_links: Vec::new(),
        };
        let count = top.nodes.len();
        let mut links = Vec::new();
        for u in 0..count {
            for v in 0..count {
                if u != v && within(top.distance(u, v), m) {
                    links.push((u, v));
                }
            }
        }
        top.set_links(links)?;
        Ok(top)
    }

    /// Builds a topology with an explicit link list.
    pub fn with_links(
        nodes: Vec<Node>,
        links: Vec<(usize, usize)>,
        m: f64,
        wrap: Option<(f64, f64)>,
    ) -> Result<Self> {
        let mut top = Topology {
            nodes,
            links: Vec::new(),
            m,
            wrap,
            out_links: Vec::new(),
        };
        top.set_links(links)?;
        Ok(top)
    }

    fn set_links(&mut self, mut links: Vec<(usize, usize)>) -> Result<()> {
        let count = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Topology(format!("node ids must be 0..{count} in order")));
            }
        }
        links.sort_unstable();
        links.dedup();
        let mut out_links = vec![Vec::new(); count];
        for &(u, v) in &links {
            if u >= count || v >= count || u == v {
                return Err(Error::Topology(format!("invalid link {u} -> {v}")));
            }
            out_links[u].push(v);
        }
        if let Some(node) = self
            .nodes
            .iter()
            .find(|n| n.transmitter && out_links[n.id].is_empty())
        {
            return Err(Error::Topology(format!(
                "transmitter {} has no outgoing link",
                node.id
            )));
        }
        self.links = links;
        self.out_links = out_links;
        Ok(())
    }

    /// Line of transmitters `-n..=n` at unit spacing with receive-only
    /// endpoints at `-(n+1)` and `n+1`. Node `i` sits at `x = i - (n + 1)`.
    pub fn line(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Topology("line needs n >= 1".into()));
        }
        let half = i64::from(n) + 1;
        let nodes = (-half..=half)
            .enumerate()
            .map(|(id, x)| Node {
                id,
                x: x as f64,
                y: 0.0,
                transmitter: x.abs() < half,
            })
            .collect();
        Topology::from_nodes(nodes, 1.0, None)
    }

    /// `rows x cols` grid with the given spacing, wrapped into a torus.
    pub fn wrapped_grid(rows: u32, cols: u32, spacing: f64, m: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Topology("grid needs at least 2 rows and 2 columns".into()));
        }
        let mut nodes = Vec::with_capacity((rows * cols) as usize);
        for r in 0..rows {
            for c in 0..cols {
                nodes.push(Node {
                    id: nodes.len(),
                    x: f64::from(c) * spacing,
                    y: f64::from(r) * spacing,
                    transmitter: true,
                });
            }
        }
        let wrap = (f64::from(cols) * spacing, f64::from(rows) * spacing);
        Topology::from_nodes(nodes, m, Some(wrap))
    }

    /// `count` nodes uniform on `[0, side]^2`, redrawn until the distance-`m`
    /// graph is connected.
    pub fn random(count: usize, side: f64, m: f64, seed: u64) -> Result<Self> {
        if count < 2 || !(side > 0.0) {
            return Err(Error::Topology("random placement needs count >= 2 and side > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_RETRIES {
            let nodes: Vec<Node> = (0..count)
                .map(|id| Node {
                    id,
                    x: rng.gen_range(0.0..side),
                    y: rng.gen_range(0.0..side),
                    transmitter: true,
                })
                .collect();
            let top = Topology {
                nodes,
                links: Vec::new(),
                m,
                wrap: None,
                out_links: Vec::new(),
            };
            if !top.distance_graph_connected() {
                continue;
            }
            return Topology::from_nodes(top.nodes, m, None);
        }
        Err(Error::Topology(format!(
            "no connected placement of {count} nodes on side {side} with range {m} after \
             {RANDOM_RETRIES} attempts; increase m or shrink the region"
        )))
    }

    fn distance_graph_connected(&self) -> bool {
        let count = self.nodes.len();
        let mut seen = vec![false; count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..count {
                if !seen[v] && within(self.distance(u, v), self.m) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn transmitters(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(|n| n.transmitter).map(|n| n.id)
    }

    pub fn out_links(&self, node: usize) -> &[usize] {
        &self.out_links[node]
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (&self.nodes[u], &self.nodes[v]);
        let mut dx = (a.x - b.x).abs();
        let mut dy = (a.y - b.y).abs();
        if let Some((w, h)) = self.wrap {
            dx = dx.min(w - dx);
            dy = dy.min(h - dy);
        }
        dx.hypot(dy)
    }

    /// `{w != v : dist(v, w) <= beta}` for every node.
    pub fn blockers(&self, beta: f64) -> Vec<Vec<usize>> {
        self.neighbourhoods(beta, false)
    }

    /// `{w : dist(v, w) <= eta}` for every node, `v` included.
    pub fn interferers(&self, eta: f64) -> Vec<Vec<usize>> {
        self.neighbourhoods(eta, true)
    }

    fn neighbourhoods(&self, range: f64, include_self: bool) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|v| {
                (0..self.len())
                    .filter(|&w| (include_self || w != v) && within(self.distance(v, w), range))
                    .collect()
            })
            .collect()
    }

    /// Serializes to the line-oriented topology file format.
    pub fn to_text(&self) -> String {
        let wrap = match self.wrap {
            None => "none".to_string(),
            Some((w, h)) if w == h => format!("{w}"),
            Some((w, h)) => format!("{w}x{h}"),
        };
        let mut out = format!("nodes {} m {} wrap {}\n", self.len(), self.m, wrap);
        for n in &self.nodes {
            let role = if n.transmitter { "tx" } else { "rx" };
            let _ = writeln!(out, "node {} {} {} {}", n.id, n.x, n.y, role);
        }
        for &(u, v) in &self.links {
            let _ = writeln!(out, "link {u} {v}");
        }
        out
    }

    /// Parses the topology file format. Blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut header: Option<(usize, f64, Option<(f64, f64)>)> = None;
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let err = |message: String| Error::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            match fields[0] {
                "nodes" => {
                    if fields.len() != 6 || fields[2] != "m" || fields[4] != "wrap" {
                        return Err(err("expected `nodes <count> m <m> wrap <w|none>`".into()));
                    }
                    let count = parse_field::<usize>(fields[1], line)?;
                    let m = parse_field::<f64>(fields[3], line)?;
                    let wrap = match fields[5] {
                        "none" => None,
                        w => match w.split_once('x') {
                            Some((a, b)) => Some((parse_field(a, line)?, parse_field(b, line)?)),
                            None => {
                                let side = parse_field(w, line)?;
                                Some((side, side))
                            }
                        },
                    };
                    header = Some((count, m, wrap));
                }
                "node" => {
                    if header.is_none() {
                        return Err(err("`node` before `nodes` header".into()));
                    }
                    if fields.len() != 5 {
                        return Err(err("expected `node <id> <x> <y> <tx|rx>`".into()));
                    }
                    let transmitter = match fields[4] {
                        "tx" => true,
                        "rx" => false,
                        other => return Err(err(format!("unknown role `{other}`"))),
                    };
                    nodes.push(Node {
                        id: parse_field(fields[1], line)?,
                        x: parse_field(fields[2], line)?,
                        y: parse_field(fields[3], line)?,
                        transmitter,
                    });
                }
                "link" => {
                    if fields.len() != 3 {
                        return Err(err("expected `link <u> <v>`".into()));
                    }
                    links.push((parse_field(fields[1], line)?, parse_field(fields[2], line)?));
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let (count, m, wrap) = header.ok_or(Error::Parse {
            line: 0,
            message: "missing `nodes` header".into(),
        })?;
        if nodes.len() != count {
            return Err(Error::Topology(format!(
                "header declares {count} nodes, found {}",
                nodes.len()
            )));
        }
        Topology::with_links(nodes, links, m, wrap)
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{field}`"),
    })
}
