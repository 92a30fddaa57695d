//! Throughput of the middle node of a line network.
//!
//! `throughput_finite` is exact for `2n + 1` transmitters with integer
//! ranges. `throughput_infinite` is its `n -> infinity` limit and accepts a
//! real sensing range.

use std::collections::BTreeSet;

use crate::error::{domain, Result};
use crate::partition::{check_sigma, partition_recursive, PartitionTable};
use crate::roots::dominant_mu;

/// Parameters of the line model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Sensing range in node-index distance.
    pub beta: u32,
    /// Interference range in node-index distance.
    pub eta: u32,
    /// Activation (backoff) rate.
    pub sigma: f64,
    /// Probability that a transmission targets the right neighbour.
    pub psi: f64,
    /// Half-size: the line carries `2n + 1` transmitters.
    pub n: u32,
}

impl ModelParams {
    pub fn new(beta: u32, eta: u32, sigma: f64, n: u32) -> Self {
        ModelParams {
            beta,
            eta,
            sigma,
            psi: 0.5,
            n,
        }
    }

    pub fn with_psi(mut self, psi: f64) -> Self {
        self.psi = psi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if !(0.0..=1.0).contains(&self.psi) {
            return Err(domain(format!("psi must lie in [0, 1], got {}", self.psi)));
        }
        if self.n == 0 {
            return Err(domain("half-size n must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThroughputKind {
    Finite,
    Infinite,
    CollisionFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputResult {
    pub beta: f64,
    pub eta: f64,
    pub sigma: f64,
    /// `Some(n)` for finite networks.
    pub n: Option<u32>,
    pub value: f64,
    pub kind: ThroughputKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

/// Hidden, exposed and blocking nodes for a transmission from node 0 to its
/// right (or left) neighbour.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeSets {
    pub hidden: BTreeSet<i64>,
    pub exposed: BTreeSet<i64>,
    pub blocking: BTreeSet<i64>,
}

pub fn hidden_exposed_sets(beta: u32, eta: u32, n: u32, direction: Direction) -> NodeSets {
    let (beta, eta, n) = (i64::from(beta), i64::from(eta), i64::from(n));
    let receiver = match direction {
        Direction::Right => 1,
        Direction::Left => -1,
    };
    let mut sets = NodeSets::default();
    for v in -n..=n {
        let sensed = v.abs() <= beta;
        let interferes = (v - receiver).abs() <= eta;
        match (sensed, interferes) {
            (false, true) => sets.hidden.insert(v),
            (true, false) => sets.exposed.insert(v),
            (true, true) => sets.blocking.insert(v),
            (false, false) => false,
        };
    }
    sets
}

/// Indices `(a, b, c)` with `theta_n = sigma Z_a Z_b / Z_c`.
fn finite_indices(params: &ModelParams) -> Result<(usize, usize, usize)> {
    let (beta, eta, n) = (
        i64::from(params.beta),
        i64::from(params.eta),
        i64::from(params.n),
    );
    let a = n - beta.max(eta - 1);
    let b = n - beta.max(eta + 1);
    if b < 0 {
        return Err(domain(format!(
            "n = {n} too small for beta = {beta}, eta = {eta}: need n >= max(beta, eta + 1)"
        )));
    }
    Ok((a as usize, b as usize, (2 * n + 1) as usize))
}

/// `theta_n = sigma Z_{n - max(beta, eta-1)} Z_{n - max(beta, eta+1)} / Z_{2n+1}`.
///
/// The direction probability `psi` cancels and is ignored.
pub fn throughput_finite(params: &ModelParams) -> Result<ThroughputResult> {
    params.validate()?;
    let (a, b, c) = finite_indices(params)?;
    let table = partition_recursive(params.beta as usize, params.sigma, c)?;
    Ok(finite_from_table(params, &table, (a, b, c)))
}

/// Same as [`throughput_finite`], reusing a table that covers `Z_{2n+1}`.
pub fn throughput_finite_with(params: &ModelParams, table: &PartitionTable) -> Result<ThroughputResult> {
    params.validate()?;
    if table.beta != params.beta as usize || table.sigma != params.sigma {
        return Err(domain("partition table does not match the model parameters"));
    }
    let idx = finite_indices(params)?;
    if table.i_max() < idx.2 {
        return Err(domain("partition table too short"));
    }
    Ok(finite_from_table(params, table, idx))
}

fn finite_from_table(
    params: &ModelParams,
    table: &PartitionTable,
    (a, b, c): (usize, usize, usize),
) -> ThroughputResult {
    let lz = &table.log_values;
    let value = params.sigma * (lz[a] + lz[b] - lz[c]).exp();
    ThroughputResult {
        beta: f64::from(params.beta),
        eta: f64::from(params.eta),
        sigma: params.sigma,
        n: Some(params.n),
        value,
        kind: ThroughputKind::Finite,
    }
}

/// Piecewise exponent `f(beta)`: `2 eta` below `eta - 1`, `eta + beta + 1`
/// on `[eta - 1, eta + 1]` and `2 beta` above.
pub fn blocked_exponent(beta: f64, eta: f64) -> f64 {
    if beta <= eta - 1.0 {
        2.0 * eta
    } else if beta <= eta + 1.0 {
        eta + beta + 1.0
    } else {
        2.0 * beta
    }
}

/// `theta = sigma lambda_0^(beta - f(beta)) / ((beta + 1) lambda_0 - beta)`.
pub fn throughput_infinite(beta: f64, eta: u32, sigma: f64) -> Result<ThroughputResult> {
    let eta_f = f64::from(eta);
    let mu = dominant_mu(beta, sigma)?;
    let exponent = beta - blocked_exponent(beta, eta_f);
    // (beta + 1) lambda_0 - beta = 1 + (beta + 1) mu
    let value = sigma * (exponent * mu.ln_1p()).exp() / (beta + 1.0).mul_add(mu, 1.0);
    Ok(ThroughputResult {
        beta,
        eta: eta_f,
        sigma,
        n: None,
        value,
        kind: ThroughputKind::Infinite,
    })
}

/// `theta = g(beta) lambda_0^(beta - eta - 1) / (beta + 1)` with
/// `g = (lambda_0 - 1) / (lambda_0 - beta / (beta + 1))`. Equal to
/// [`throughput_infinite`] for `beta` in `[eta - 1, eta + 1]`.
pub fn throughput_middle_branch(beta: f64, eta: u32, sigma: f64) -> Result<f64> {
    let mu = dominant_mu(beta, sigma)?;
    let lambda = 1.0 + mu;
    let g = mu / (lambda - beta / (beta + 1.0));
    Ok(g * ((beta - f64::from(eta) - 1.0) * mu.ln_1p()).exp() / (beta + 1.0))
}

/// Collision-free throughput `(lambda_0 - 1) / ((beta + 1) lambda_0 - beta)`,
/// valid whenever `beta >= eta + 1`.
pub fn throughput_collision_free(beta: f64, sigma: f64) -> Result<f64> {
    let mu = dominant_mu(beta, sigma)?;
    Ok(mu / (beta + 1.0).mul_add(mu, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::dominant_root;

    fn set(v: &[i64]) -> BTreeSet<i64> {
        v.iter().copied().collect()
    }

    #[test]
    fn hidden_node_example() {
        let s = hidden_exposed_sets(1, 2, 10, Direction::Right);
        assert_eq!(s.hidden, set(&[2, 3]));
    }

    #[test]
    fn exposed_node_example() {
        let s = hidden_exposed_sets(2, 2, 10, Direction::Right);
        assert_eq!(s.exposed, set(&[-2]));
        let l = hidden_exposed_sets(2, 2, 10, Direction::Left);
        assert_eq!(l.exposed, set(&[2]));
    }

    #[test]
    fn no_hidden_nodes_once_sensing_covers_interference() {
        for eta in 0..6 {
            let s = hidden_exposed_sets(eta + 1, eta, 20, Direction::Right);
            assert!(s.hidden.is_empty());
        }
    }

    #[test]
    fn set_partition_invariant() {
        for beta in 0..5 {
            for eta in 0..5 {
                for dir in [Direction::Right, Direction::Left] {
                    let s = hidden_exposed_sets(beta, eta, 8, dir);
                    let sensed: BTreeSet<i64> = (-(beta as i64)..=beta as i64).collect();
                    let union: BTreeSet<i64> = s.exposed.union(&s.blocking).copied().collect();
                    assert_eq!(union, sensed);
                    assert!(s.hidden.is_disjoint(&union));
                }
            }
        }
    }

    #[test]
    fn fibonacci_throughput() {
        let r = throughput_finite(&ModelParams::new(1, 0, 1.0, 5)).unwrap();
        assert!((r.value - 64.0 / 233.0).abs() < 1e-15);
        assert_eq!(r.kind, ThroughputKind::Finite);
    }

    #[test]
    fn finite_rejects_small_n() {
        assert!(throughput_finite(&ModelParams::new(1, 3, 1.0, 3)).is_err());
        assert!(throughput_finite(&ModelParams::new(1, 3, 1.0, 4)).is_ok());
        assert!(throughput_finite(&ModelParams::new(1, 3, 1.0, 4).with_psi(1.5)).is_err());
    }

    #[test]
    fn finite_is_linear_in_small_sigma() {
        let a = throughput_finite(&ModelParams::new(3, 2, 1e-8, 100)).unwrap().value;
        let b = throughput_finite(&ModelParams::new(3, 2, 2e-8, 100)).unwrap().value;
        assert!((a / 1e-8 - 1.0).abs() < 1e-6);
        assert!((b / a - 2.0).abs() < 1e-6);
    }

    #[test]
    fn psi_cancels() {
        let base = ModelParams::new(2, 3, 0.7, 12);
        let values: Vec<f64> = [0.0, 0.3, 0.5, 1.0]
            .iter()
            .map(|&psi| throughput_finite(&base.with_psi(psi)).unwrap().value)
            .collect();
        assert!(values.iter().all(|v| v.to_bits() == values[0].to_bits()));
    }

    #[test]
    fn exponent_branches() {
        assert_eq!(blocked_exponent(6.0, 7.0), 14.0);
        assert_eq!(blocked_exponent(7.0, 7.0), 15.0);
        assert_eq!(blocked_exponent(9.0, 7.0), 18.0);
        // continuity at the knots
        assert_eq!(blocked_exponent(6.0, 7.0), 7.0 + 6.0 + 1.0);
        assert_eq!(blocked_exponent(8.0, 7.0), 2.0 * 8.0);
    }

    #[test]
    fn golden_ratio_throughput() {
        let phi = dominant_root(1.0, 1.0).unwrap();
        let expect = (phi - 1.0) / (2.0 * phi - 1.0);
        let got = throughput_infinite(1.0, 0, 1.0).unwrap().value;
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.276_393).abs() < 1e-6);
        assert!((throughput_collision_free(1.0, 1.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn large_sigma_limits() {
        let eta = 7;
        for beta in [8.0, 9.0, 12.0] {
            let t = throughput_infinite(beta, eta, 1e14).unwrap().value;
            assert!((t * (beta + 1.0) - 1.0).abs() < 0.01, "beta={beta}: {t}");
        }
        for beta in [3.0, 6.0, 7.0] {
            let far = throughput_infinite(beta, eta, 1e14).unwrap().value;
            let near = throughput_infinite(beta, eta, 1e8).unwrap().value;
            assert!(far < near && far < 0.01, "beta={beta}: {far}");
        }
        let t = throughput_collision_free(7.0, 1e16).unwrap();
        assert!((t - 0.125).abs() < 1e-3);
    }

    #[test]
    fn small_sigma_is_sigma() {
        for beta in [0.0, 1.0, 4.5] {
            let t = throughput_collision_free(beta, 1e-9).unwrap();
            assert!((t / 1e-9 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn collision_free_matches_infinite_above_knot() {
        for eta in 0..6u32 {
            for k in 0..40 {
                let beta = f64::from(eta) + 1.0 + 0.25 * f64::from(k);
                for sigma in [0.05, 1.0, 30.0] {
                    let a = throughput_infinite(beta, eta, sigma).unwrap().value;
                    let b = throughput_collision_free(beta, sigma).unwrap();
                    assert!((a - b).abs() <= 1e-12 * b);
                }
            }
        }
    }

    #[test]
    fn finite_converges_to_infinite() {
        for &(beta, eta, sigma) in &[(3u32, 3u32, 0.5), (4, 3, 1.0), (2, 3, 0.2)] {
            let limit = throughput_infinite(f64::from(beta), eta, sigma).unwrap().value;
            let gaps: Vec<f64> = [25u32, 50, 100, 200]
                .iter()
                .map(|&n| {
                    let t = throughput_finite(&ModelParams::new(beta, eta, sigma, n)).unwrap();
                    (t.value - limit).abs()
                })
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-13), "{gaps:?}");
            assert!(gaps[3] < 1e-6, "{gaps:?}");
        }
    }
}
