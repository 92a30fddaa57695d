use std::collections::HashMap;

use csma_core::simulate::sample_occupancy;
use csma_core::{
    partition_bruteforce, simulate, throughput_finite, Destination, ModelParams, SimConfig, Topology,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn line_check(n: u32, beta: u32, eta: u32, sigma: f64, horizon: f64, seeds: &[u64]) {
    let top = Topology::line(n).unwrap();
    let centre = n as usize + 1;
    let expect = throughput_finite(&ModelParams::new(beta, eta, sigma, n)).unwrap().value;
    for &seed in seeds {
        let cfg = SimConfig::new(f64::from(beta), f64::from(eta), sigma, horizon, seed);
        let stats = simulate(&top, &cfg).unwrap();
        let s = stats.node(centre).unwrap();
        assert!(
            (s.throughput - expect).abs() <= 3.0 * s.stderr,
            "n={n} beta={beta} eta={eta} seed={seed}: {} +/- {} vs {expect}",
            s.throughput,
            s.stderr
        );
        if beta > eta {
            assert_eq!(stats.aggregate.collided, 0);
        }
    }
}

#[test]
fn collision_free_line_matches_analytic() {
    line_check(3, 2, 1, 1.0, 2e5, &[11, 12]);
}

#[test]
fn hidden_node_line_matches_analytic() {
    line_check(5, 1, 2, 1.0, 2e5, &[21, 22]);
}

#[test]
fn direction_bias_does_not_matter() {
    let top = Topology::line(3).unwrap();
    let run = |psi| {
        let mut cfg = SimConfig::new(1.0, 2.0, 1.0, 2e5, 5);
        cfg.destination = Destination::Directional { psi };
        simulate(&top, &cfg).unwrap().node(4).cloned().unwrap()
    };
    let (a, b) = (run(0.2), run(0.8));
    assert!((a.throughput - b.throughput).abs() <= 3.0 * a.stderr.hypot(b.stderr));
}

/// Product-form weights `sigma^{|x|}` over feasible activity vectors of the
/// transmitters of `line(n)`.
fn product_form(n: u32, beta: usize, sigma: f64) -> HashMap<u64, f64> {
    let count = 2 * n as usize + 1;
    let z = partition_bruteforce(count, beta, sigma).unwrap();
    (0u64..1 << count)
        .filter(|&x| (1..=beta).all(|d| x & (x >> d) == 0))
        .map(|x| (x, sigma.powi(x.count_ones() as i32) / z))
        .collect()
}

#[test]
fn occupancy_matches_product_form() {
    for (beta, sigma) in [(1usize, 0.5), (2, 2.0)] {
        let top = Topology::line(2).unwrap();
        let cfg = SimConfig::new(beta as f64, 0.0, sigma, 2e5, 3);
        let observed = sample_occupancy(&top, &cfg, 20.0).unwrap();
        let pi = product_form(2, beta, sigma);
        assert!(observed.keys().all(|x| pi.contains_key(x)), "infeasible state seen");
        let total: u64 = observed.values().sum();
        let stat: f64 = pi
            .iter()
            .map(|(x, p)| {
                let e = p * total as f64;
                let o = *observed.get(x).unwrap_or(&0) as f64;
                (o - e).powi(2) / e
            })
            .sum();
        let crit = ChiSquared::new((pi.len() - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(stat < crit, "beta={beta} sigma={sigma}: chi2 {stat} >= {crit}");
    }
}

#[test]
fn grid_blocking_everything_never_collides() {
    let top = Topology::wrapped_grid(4, 4, 1.0, 1.0).unwrap();
    let stats = simulate(&top, &SimConfig::new(2.0, 1.0, 20.0, 5000.0, 8)).unwrap();
    assert_eq!(stats.aggregate.collided, 0);
    assert!(stats.aggregate.throughput > 0.0);
}
