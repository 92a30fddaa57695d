//! Partition function `Z_i` of the hard-core model on a line of `i` nodes.
//!
//! Three independent routes are provided: the order-`beta + 1` linear
//! recursion (the production path, evaluated in log space), the spectral
//! expansion over the roots of `lambda^(beta+1) - lambda^beta - sigma`, and
//! brute-force enumeration of feasible activity vectors.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::roots::RootSet;

/// Largest line that [`partition_bruteforce`] will enumerate.
pub const BRUTEFORCE_MAX_NODES: usize = 24;

/// `ln Z_i` for `i = 0..=i_max` at fixed sensing range and activation rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    pub beta: usize,
    pub sigma: f64,
    pub log_values: Vec<f64>,
}

impl PartitionTable {
    pub fn i_max(&self) -> usize {
        self.log_values.len() - 1
    }

    /// `ln Z_i`, or `None` past the end of the table.
    pub fn log_z(&self, i: usize) -> Option<f64> {
        self.log_values.get(i).copied()
    }

    /// `Z_i` in linear scale. Overflows to infinity for large `i`.
    pub fn z(&self, i: usize) -> Option<f64> {
        self.log_z(i).map(f64::exp)
    }

    /// `Z_0..=Z_{i_max}` from the recursion run in linear scale. Exact for
    /// integer `sigma` while values stay below `2^53`; infinite past overflow.
    pub fn linear_values(&self) -> Vec<f64> {
        let mut z: Vec<f64> = Vec::with_capacity(self.log_values.len());
        for i in 0..self.log_values.len() {
            let value = if i <= self.beta + 1 {
                (i as f64).mul_add(self.sigma, 1.0)
            } else {
                z[i - 1] + self.sigma * z[i - self.beta - 1]
            };
            z.push(value);
        }
        z
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("activation rate must be positive, got {sigma}")));
    }
    Ok(())
}

/// Runs the recursion `Z_i = Z_{i-1} + sigma Z_{i-beta-1}` with boundary
/// values `Z_i = 1 + i sigma` for `i <= beta + 1`.
pub fn partition_recursive(beta: usize, sigma: f64, i_max: usize) -> Result<PartitionTable> {
    check_sigma(sigma)?;
    let mut log_values = Vec::with_capacity(i_max + 1);
    for i in 0..=i_max {
        let value = if i <= beta + 1 {
            (i as f64).mul_add(sigma, 1.0).ln()
        } else {
            let prev = log_values[i - 1];
            let back: f64 = log_values[i - beta - 1];
            // ln(Z_{i-1} + sigma Z_{i-b-1}) = ln Z_{i-1} + ln(1 + sigma Z_{i-b-1} / Z_{i-1})
            prev + (sigma * (back - prev).exp()).ln_1p()
        };
        log_values.push(value);
    }
    Ok(PartitionTable {
        beta,
        sigma,
        log_values,
    })
}

/// `Z_i = sum_j c_j lambda_j^i`, the real part of the spectral expansion.
pub fn partition_spectral(roots: &RootSet, i: usize) -> Result<f64> {
    let exponent = i32::try_from(i).map_err(|_| domain("index too large"))?;
    let total: Complex64 = roots
        .roots
        .iter()
        .zip(&roots.residues)
        .map(|(lambda, c)| c * lambda.powi(exponent))
        .sum();
    if total.im.abs() > 1e-9 * total.re.abs() {
        return Err(Error::Numerical(format!(
            "spectral sum for i = {i} has imaginary part {:e} (real part {:e})",
            total.im, total.re
        )));
    }
    Ok(total.re)
}

/// Like [`partition_spectral`], but first checks that `roots` belongs to
/// `(beta, sigma)`.
pub fn partition_spectral_for(roots: &RootSet, beta: usize, sigma: f64, i: usize) -> Result<f64> {
    if roots.beta != beta || roots.sigma != sigma {
        return Err(domain(format!(
            "root set is for (beta={}, sigma={}), asked for (beta={beta}, sigma={sigma})",
            roots.beta, roots.sigma
        )));
    }
    partition_spectral(roots, i)
}

/// Exact `Z` by summing `sigma^{#active}` over every activity vector of
/// `num_nodes` consecutive nodes with no two active nodes within `beta`.
pub fn partition_bruteforce(num_nodes: usize, beta: usize, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if num_nodes > BRUTEFORCE_MAX_NODES {
        return Err(domain(format!(
            "brute force is limited to {BRUTEFORCE_MAX_NODES} nodes, got {num_nodes}"
        )));
    }
    let mut weight_by_count = vec![0u64; num_nodes + 1];
    for state in 0u32..(1u32 << num_nodes) {
        let feasible = (1..=beta.min(num_nodes)).all(|d| state & (state >> d) == 0);
        if feasible {
            weight_by_count[state.count_ones() as usize] += 1;
        }
    }
    Ok(weight_by_count
        .iter()
        .enumerate()
        .map(|(k, &count)| count as f64 * sigma.powi(k as i32))
        .sum())
}

/// Power-series coefficients of the generating function
/// `G(x) = (x - 1 + sigma x^(b+1) - sigma x) / ((x - 1)(1 - x - sigma x^(b+1)))`
/// up to and including `x^order`, by series long division.
pub fn generating_function_coefficients(beta: usize, sigma: f64, order: usize) -> Vec<f64> {
    let len = order + 1;
    let mut numerator = vec![0.0; len.max(beta + 2)];
    numerator[0] -= 1.0;
    numerator[1] += 1.0 - sigma;
    numerator[beta + 1] += sigma;

    // (x - 1)(1 - x - sigma x^(b+1)) = -1 + 2x - x^2 + sigma x^(b+1) - sigma x^(b+2)
    let mut denominator = vec![0.0; len.max(beta + 3)];
    denominator[0] -= 1.0;
    denominator[1] += 2.0;
    denominator[2] -= 1.0;
    denominator[beta + 1] += sigma;
    denominator[beta + 2] -= sigma;

    let mut out: Vec<f64> = Vec::with_capacity(len);
    for k in 0..len {
        let acc: f64 = (1..=k).map(|j| denominator[j] * out[k - j]).sum();
        out.push((numerator[k] - acc) / denominator[0]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::all_roots;
    use proptest::prelude::*;

    fn linear(table: &PartitionTable) -> Vec<f64> {
        table.log_values.iter().map(|v| v.exp()).collect()
    }

    fn assert_close(got: &[f64], want: &[f64], rel: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= rel * w.abs(), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn fibonacci_for_unit_range() {
        let t = partition_recursive(1, 1.0, 5).unwrap();
        assert_close(&linear(&t), &[1.0, 2.0, 3.0, 5.0, 8.0, 13.0], 1e-14);
    }

    #[test]
    fn gap_three_counts() {
        let t = partition_recursive(2, 1.0, 5).unwrap();
        assert_close(&linear(&t), &[1.0, 2.0, 3.0, 4.0, 6.0, 9.0], 1e-14);
    }

    #[test]
    fn boundary_rule() {
        let t = partition_recursive(3, 0.5, 2).unwrap();
        assert_close(&linear(&t), &[1.0, 1.5, 2.0], 1e-15);
        assert_eq!(t.i_max(), 2);
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(matches!(partition_recursive(1, 0.0, 3), Err(Error::Domain(_))));
        assert!(matches!(partition_recursive(1, -1.0, 3), Err(Error::Domain(_))));
        assert!(matches!(partition_recursive(1, f64::NAN, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(partition_bruteforce(5, 1, 1.0).unwrap(), 13.0);
        assert_eq!(partition_bruteforce(3, 2, 2.0).unwrap(), 7.0);
        assert_eq!(partition_bruteforce(0, 3, 5.0).unwrap(), 1.0);
        assert!(partition_bruteforce(25, 1, 1.0).is_err());
    }

    #[test]
    fn recursion_matches_bruteforce() {
        for beta in 0..=5 {
            for &sigma in &[0.1, 0.5, 1.0, 5.0] {
                let t = partition_recursive(beta, sigma, 16).unwrap();
                for nodes in 1..=16 {
                    let exact = partition_bruteforce(nodes, beta, sigma).unwrap();
                    let z = t.z(nodes).unwrap();
                    assert!((z - exact).abs() <= 1e-12 * exact, "b={beta} s={sigma} i={nodes}");
                }
            }
        }
    }

    #[test]
    fn spectral_examples() {
        let r = all_roots(1, 1.0).unwrap();
        assert!((partition_spectral(&r, 5).unwrap() - 13.0).abs() < 1e-12);
        let r = all_roots(0, 2.0).unwrap();
        assert!((partition_spectral(&r, 3).unwrap() - 27.0).abs() < 1e-12);
        let r = all_roots(4, 0.25).unwrap();
        let t = partition_recursive(4, 0.25, 40).unwrap();
        let z = t.z(40).unwrap();
        assert!((partition_spectral(&r, 40).unwrap() - z).abs() <= 1e-9 * z);
    }

    #[test]
    fn spectral_rejects_mismatched_roots() {
        let r = all_roots(2, 1.0).unwrap();
        assert!(partition_spectral_for(&r, 3, 1.0, 4).is_err());
        assert!(partition_spectral_for(&r, 2, 0.5, 4).is_err());
        assert!(partition_spectral_for(&r, 2, 1.0, 4).is_ok());
    }

    #[test]
    fn generating_function_matches_table() {
        for beta in 0..=4 {
            for &sigma in &[0.3, 1.0, 2.5] {
                let coeffs = generating_function_coefficients(beta, sigma, 12);
                let t = partition_recursive(beta, sigma, 12).unwrap();
                assert_close(&coeffs, &linear(&t), 1e-12);
            }
        }
    }

    #[test]
    fn log_space_survives_overflow() {
        let t = partition_recursive(2, 10.0, 5000).unwrap();
        assert!(t.z(5000).unwrap().is_infinite());
        assert!(t.log_z(5000).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn table_invariants(beta in 0usize..8, sigma in 0.01f64..20.0, i_max in 0usize..400) {
            let t = partition_recursive(beta, sigma, i_max).unwrap();
            for i in 0..=i_max.min(beta + 1) {
                prop_assert!((t.log_values[i] - (1.0 + i as f64 * sigma).ln()).abs() < 1e-15);
            }
            for i in (beta + 2)..=i_max {
                // Z_i / Z_{i-1} = 1 + sigma Z_{i-b-1} / Z_{i-1}
                let lhs = (t.log_values[i] - t.log_values[i - 1]).exp();
                let rhs = 1.0 + sigma * (t.log_values[i - beta - 1] - t.log_values[i - 1]).exp();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }
            for w in t.log_values.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
        }

        #[test]
        fn increasing_in_sigma(beta in 0usize..6, sigma in 0.01f64..10.0, bump in 1.001f64..2.0) {
            let low = partition_recursive(beta, sigma, 60).unwrap();
            let high = partition_recursive(beta, sigma * bump, 60).unwrap();
            for i in 1..=60 {
                prop_assert!(high.log_values[i] > low.log_values[i]);
            }
        }
    }
}
