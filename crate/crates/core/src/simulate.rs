//! Continuous-time discrete-event simulation of CSMA with perfect capture.
//!
//! Every idle transmitter holds an exponential backoff timer. When it
//! expires the node either finds an active node within its sensing range
//! and draws a fresh timer, or starts a transmission of exponential length.
//! The transmission succeeds iff, at its start, no node within the
//! interference range of the receiver (other than the sender) is active.
//! Failed transmissions still occupy the channel for their full length.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{domain, Error, Result};
use crate::topology::Topology;

/// How a transmitter picks its receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Destination {
    /// Uniform over outgoing links.
    Uniform,
    /// Right neighbour (larger `x`) with probability `psi`, else left.
    /// Requires every transmitter to have exactly one link on each side.
    Directional { psi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub beta: f64,
    pub eta: f64,
    pub sigma: f64,
    pub destination: Destination,
    pub horizon: f64,
    pub warmup_fraction: f64,
    pub seed: u64,
    pub batches: usize,
}

impl SimConfig {
    pub fn new(beta: f64, eta: f64, sigma: f64, horizon: f64, seed: u64) -> Self {
        SimConfig {
            beta,
            eta,
            sigma,
            destination: Destination::Uniform,
            horizon,
            warmup_fraction: 0.1,
            seed,
            batches: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.beta >= 0.0 && self.eta >= 0.0) {
            return Err(domain("sensing and interference ranges must be >= 0"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(domain(format!(
                "warmup fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.batches < 2 {
            return Err(domain(format!(
                "need at least 2 batches to estimate variance, got {}",
                self.batches
            )));
        }
        if let Destination::Directional { psi } = self.destination {
            if !(0.0..=1.0).contains(&psi) {
                return Err(domain(format!("psi must lie in [0, 1], got {psi}")));
            }
        }
        Ok(())
    }

    fn warmup(&self) -> f64 {
        self.horizon * self.warmup_fraction
    }
}

/// Counters and batch-means throughput for one transmitter (or the network
/// average when `node` is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub node: Option<usize>,
    pub attempts: u64,
    pub blocked: u64,
    pub collided: u64,
    pub success: u64,
    pub throughput: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// One entry per transmitter, in node order.
    pub nodes: Vec<NodeStats>,
    /// Counters summed over transmitters; throughput averaged per node.
    pub aggregate: NodeStats,
    pub observed_time: f64,
}

impl SimStats {
    pub fn node(&self, id: usize) -> Option<&NodeStats> {
        self.nodes.iter().find(|s| s.node == Some(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    TransmissionEnd,
    BackoffExpiry,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    node: usize,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest (time, node, kind).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.kind.cmp(&self.kind))
    }
}

#[derive(Debug, Default, Clone)]
struct Counters {
    attempts: u64,
    blocked: u64,
    collided: u64,
    success: u64,
}

/// Event-driven engine. Exposed so callers can observe the activity state
/// between events.
pub struct Engine<'a> {
    top: &'a Topology,
    cfg: SimConfig,
    blockers: Vec<Vec<usize>>,
    interferers: Vec<Vec<usize>>,
    /// `(left, right)` receivers for directional destinations.
    sides: Vec<Option<(usize, usize)>>,
    active: Vec<bool>,
    /// Number of active nodes within sensing range of each node.
    sensed_busy: Vec<u32>,
    rngs: Vec<ChaCha8Rng>,
    backoff: Exp<f64>,
    duration: Exp<f64>,
    queue: BinaryHeap<Event>,
    now: f64,
    counters: Vec<Counters>,
    batch_success: Vec<Vec<u64>>,
}

impl<'a> Engine<'a> {
    pub fn new(top: &'a Topology, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let count = top.len();
        let sides = match cfg.destination {
            Destination::Uniform => vec![None; count],
            Destination::Directional { .. } => directional_sides(top)?,
        };
        let rngs = (0..count)
            .map(|v| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(v as u64);
                rng
            })
            .collect();
        let mut engine = Engine {
            top,
            cfg: cfg.clone(),
            blockers: top.blockers(cfg.beta),
            interferers: top.interferers(cfg.eta),
            sides,
            active: vec![false; count],
            sensed_busy: vec![0; count],
            rngs,
            backoff: Exp::new(cfg.sigma).map_err(|e| domain(e.to_string()))?,
            duration: Exp::new(1.0).map_err(|e| domain(e.to_string()))?,
            queue: BinaryHeap::new(),
            now: 0.0,
            counters: vec![Counters::default(); count],
            batch_success: vec![vec![0; cfg.batches]; count],
        };
        for v in top.transmitters() {
            let delay = engine.backoff.sample(&mut engine.rngs[v]);
            engine.queue.push(Event {
                time: delay,
                node: v,
                kind: EventKind::BackoffExpiry,
            });
        }
        Ok(engine)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn next_event_time(&self) -> Option<f64> {
        self.queue.peek().map(|e| e.time)
    }

    /// Processes the next event. Returns `false` once the horizon is reached.
    pub fn step(&mut self) -> bool {
        let Some(event) = self.queue.peek().copied() else {
            return false;
        };
        if event.time > self.cfg.horizon {
            self.now = self.cfg.horizon;
            return false;
        }
        self.queue.pop();
        self.now = event.time;
        match event.kind {
            EventKind::BackoffExpiry => self.attempt(event.node),
            EventKind::TransmissionEnd => self.finish(event.node),
        }
        true
    }

    pub fn run(&mut self) {
        while self.step() {}
    }

    fn counting(&self) -> bool {
        self.now >= self.cfg.warmup()
    }

    fn attempt(&mut self, v: usize) {
        let counting = self.counting();
        if self.sensed_busy[v] > 0 {
            if counting {
                self.counters[v].attempts += 1;
                self.counters[v].blocked += 1;
            }
            let delay = self.backoff.sample(&mut self.rngs[v]);
            self.schedule(v, delay, EventKind::BackoffExpiry);
            return;
        }
        debug_assert!(
            self.blockers[v].iter().all(|&w| !self.active[w]),
            "hard-core constraint violated at node {v}"
        );
        let receiver = self.pick_receiver(v);
        let collided = self.interferers[receiver]
            .iter()
            .any(|&w| w != v && self.active[w]);

        self.active[v] = true;
        for &w in &self.blockers[v] {
            self.sensed_busy[w] += 1;
        }
        if counting {
            let c = &mut self.counters[v];
            c.attempts += 1;
            if collided {
                c.collided += 1;
            } else {
                c.success += 1;
                let batch = self.batch_of(self.now);
                self.batch_success[v][batch] += 1;
            }
        }
        let length = self.duration.sample(&mut self.rngs[v]);
        self.schedule(v, length, EventKind::TransmissionEnd);
    }

    fn finish(&mut self, v: usize) {
        self.active[v] = false;
        for &w in &self.blockers[v] {
            self.sensed_busy[w] -= 1;
        }
        let delay = self.backoff.sample(&mut self.rngs[v]);
        self.schedule(v, delay, EventKind::BackoffExpiry);
    }

    fn schedule(&mut self, node: usize, delay: f64, kind: EventKind) {
        self.queue.push(Event {
            time: self.now + delay,
            node,
            kind,
        });
    }

    fn pick_receiver(&mut self, v: usize) -> usize {
        match (self.cfg.destination, self.sides[v]) {
            (Destination::Directional { psi }, Some((left, right))) => {
                if self.rngs[v].gen::<f64>() < psi {
                    right
                } else {
                    left
                }
            }
            _ => {
                let links = self.top.out_links(v);
                links[self.rngs[v].gen_range(0..links.len())]
            }
        }
    }

    fn batch_of(&self, time: f64) -> usize {
        let warmup = self.cfg.warmup();
        let width = (self.cfg.horizon - warmup) / self.cfg.batches as f64;
        (((time - warmup) / width) as usize).min(self.cfg.batches - 1)
    }

    /// Summarizes the counters accumulated so far.
    pub fn stats(&self) -> SimStats {
        let batches = self.cfg.batches;
        let observed = self.cfg.horizon - self.cfg.warmup();
        let width = observed / batches as f64;
        let transmitters: Vec<usize> = self.top.transmitters().collect();

        let mut nodes = Vec::with_capacity(transmitters.len());
        let mut network_batches = vec![0.0; batches];
        for &v in &transmitters {
            let rates: Vec<f64> = self.batch_success[v]
                .iter()
                .map(|&s| s as f64 / width)
                .collect();
            for (acc, r) in network_batches.iter_mut().zip(&rates) {
                *acc += r / transmitters.len() as f64;
            }
            let (mean, stderr) = batch_means(&rates);
            let c = &self.counters[v];
            nodes.push(NodeStats {
                node: Some(v),
                attempts: c.attempts,
                blocked: c.blocked,
                collided: c.collided,
                success: c.success,
                throughput: mean,
                stderr,
            });
        }
        let (mean, stderr) = batch_means(&network_batches);
        let aggregate = NodeStats {
            node: None,
            attempts: nodes.iter().map(|s| s.attempts).sum(),
            blocked: nodes.iter().map(|s| s.blocked).sum(),
            collided: nodes.iter().map(|s| s.collided).sum(),
            success: nodes.iter().map(|s| s.success).sum(),
            throughput: mean,
            stderr,
        };
        SimStats {
            nodes,
            aggregate,
            observed_time: observed,
        }
    }
}

fn directional_sides(top: &Topology) -> Result<Vec<Option<(usize, usize)>>> {
    let mut sides = vec![None; top.len()];
    for v in top.transmitters() {
        let x = top.nodes[v].x;
        let left: Vec<usize> = top
            .out_links(v)
            .iter()
            .copied()
            .filter(|&w| top.nodes[w].x < x)
            .collect();
        let right: Vec<usize> = top
            .out_links(v)
            .iter()
            .copied()
            .filter(|&w| top.nodes[w].x > x)
            .collect();
        match (left.as_slice(), right.as_slice()) {
            ([l], [r]) => sides[v] = Some((*l, *r)),
            _ => {
                return Err(Error::Topology(format!(
                    "directional destinations need one left and one right link at node {v}"
                )))
            }
        }
    }
    Ok(sides)
}

/// Mean and standard error of the mean of batch values.
pub fn batch_means(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Runs one replication to the horizon.
pub fn simulate(top: &Topology, cfg: &SimConfig) -> Result<SimStats> {
    let mut engine = Engine::new(top, cfg)?;
    engine.run();
    Ok(engine.stats())
}

/// Samples the transmitter activity vector every `spacing` time units after
/// warmup. Keys are bitmasks over the transmitters in node order.
pub fn sample_occupancy(top: &Topology, cfg: &SimConfig, spacing: f64) -> Result<HashMap<u64, u64>> {
    if !(spacing > 0.0) {
        return Err(domain("sampling spacing must be positive"));
    }
    let transmitters: Vec<usize> = top.transmitters().collect();
    if transmitters.len() > 64 {
        return Err(domain("occupancy sampling supports at most 64 transmitters"));
    }
    let mut engine = Engine::new(top, cfg)?;
    let mut counts = HashMap::new();
    let mut next_sample = cfg.warmup().max(spacing);
    while next_sample <= cfg.horizon {
        // The state is constant until the next event fires.
        while engine.next_event_time().is_some_and(|t| t <= next_sample) {
            engine.step();
        }
        let mask = transmitters
            .iter()
            .enumerate()
            .filter(|(_, &v)| engine.active()[v])
            .fold(0u64, |acc, (bit, _)| acc | (1 << bit));
        *counts.entry(mask).or_insert(0) += 1;
        next_sample += spacing;
    }
    Ok(counts)
}

/// Best sensing range at one activation rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalOptimum {
    pub sigma: f64,
    pub beta: f64,
    pub throughput: f64,
    pub stderr: f64,
    /// Set when the winner beats the runner-up by more than two combined
    /// standard errors.
    pub significant: bool,
    /// `(beta, throughput, stderr)` for every candidate.
    pub candidates: Vec<(f64, f64, f64)>,
}

/// Runs [`simulate`] for every `(sigma, beta)` pair and reports the
/// empirical argmax over `beta` of the network-average throughput.
pub fn estimate_threshold_empirical(
    top: &Topology,
    eta: f64,
    sigma_grid: &[f64],
    beta_grid: &[f64],
    base: &SimConfig,
) -> Result<Vec<EmpiricalOptimum>> {
    if sigma_grid.is_empty() || beta_grid.is_empty() {
        return Err(domain("sigma and beta grids must be non-empty"));
    }
    let mut out = Vec::with_capacity(sigma_grid.len());
    for &sigma in sigma_grid {
        let mut candidates = Vec::with_capacity(beta_grid.len());
        for &beta in beta_grid {
            let cfg = SimConfig {
                beta,
                eta,
                sigma,
                ..base.clone()
            };
            let stats = simulate(top, &cfg)?;
            candidates.push((beta, stats.aggregate.throughput, stats.aggregate.stderr));
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        // Stable sort keeps the smaller beta first on exact ties.
        order.sort_by(|&a, &b| candidates[b].1.total_cmp(&candidates[a].1));
        let best = candidates[order[0]];
        let significant = match order.get(1) {
            None => true,
            Some(&second) => {
                let runner = candidates[second];
                best.1 - runner.1 > 2.0 * best.2.hypot(runner.2)
            }
        };
        out.push(EmpiricalOptimum {
            sigma,
            beta: best.0,
            throughput: best.1,
            stderr: best.2,
            significant,
            candidates,
        });
    }
    Ok(out)
}
