//! Throughput-optimal sensing range and the activation-rate threshold.
//!
//! On `[eta - 1, eta + 1]` the sign of `d theta / d beta` is the sign of
//! `1 - F(beta, sigma)` with
//! `F = (eta + 2 + beta / (1 + mu_0 + beta mu_0)) ln(1 + mu_0)`.
//! `F` increases in `sigma`, so `sigma(beta)` defined by `F = 1` is unique;
//! the threshold interval is `[sigma(eta - 1), sigma(eta + 1)]`.

use crate::error::{domain, Error, Result};
use crate::partition::{check_sigma, partition_recursive};
use crate::roots::dominant_mu;
use crate::throughput::{throughput_finite_with, throughput_infinite, ModelParams};

const SAMPLE_COUNT: usize = 41;

/// Golden-ratio conjugate `(sqrt 5 - 1) / 2`.
pub fn tau() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Limit of `(sigma_max - sigma_min)(eta + 1)^2`: `2 e^tau / (7 + 4 tau)`.
pub fn width_constant() -> f64 {
    let t = tau();
    2.0 * t.exp() / (7.0 + 4.0 * t)
}

/// `alpha` correction in `mu = tau / (eta + alpha)` for `beta = eta + gamma`.
pub fn alpha(gamma: f64) -> f64 {
    let t = tau();
    ((5.0 + 2.0 * gamma) * t + 1.0) / (2.0 * (2.0 * t + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub eta: u32,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `kappa (1 + kappa)^(eta - 1)` with `kappa = tau / (eta + 1)`.
    pub bound_low: f64,
    /// `kappa (1 + kappa)^(eta + 1)`.
    pub bound_high: f64,
    pub approx_min: f64,
    pub approx_max: f64,
    /// `(sigma, beta*)` on an even grid over `[bound_low, bound_high]`.
    pub beta_star_samples: Vec<(f64, f64)>,
}

impl ThresholdResult {
    /// Continuous optimum `beta*` for this `eta`.
    pub fn optimal_beta(&self, sigma: f64) -> Result<f64> {
        check_sigma(sigma)?;
        let eta = f64::from(self.eta);
        let lower = (eta - 1.0).max(0.0);
        let upper = eta + 1.0;
        let beta = if sigma <= self.sigma_min {
            lower
        } else if sigma >= self.sigma_max {
            upper
        } else {
            solve_beta(self.eta, sigma, lower, upper)?
        };
        verify_local_max(self.eta, sigma, beta)?;
        Ok(beta)
    }

    pub fn width(&self) -> f64 {
        self.sigma_max - self.sigma_min
    }
}

/// `F(beta, sigma)`.
pub fn big_f(beta: f64, eta: u32, sigma: f64) -> Result<f64> {
    let mu = dominant_mu(beta, sigma)?;
    Ok(f_from_mu(beta, f64::from(eta), mu))
}

fn f_from_mu(beta: f64, eta: f64, mu: f64) -> f64 {
    (eta + 2.0 + beta / (1.0 + mu + beta * mu)) * mu.ln_1p()
}

/// The unique `sigma` with `F(beta, sigma) = 1`.
pub fn sigma_of_beta(beta: f64, eta: u32) -> Result<f64> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(domain(format!("sensing range must be >= 0, got {beta}")));
    }
    let excess = |sigma: f64| big_f(beta, eta, sigma).map(|f| f - 1.0);
    let mut lo = 1e-12;
    let mut hi = 1.0;
    let mut doublings = 0;
    while excess(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical(format!(
                "could not bracket sigma(beta) for beta={beta}, eta={eta}"
            )));
        }
    }
    if excess(lo)? > 0.0 {
        return Err(Error::Numerical(format!(
            "F(beta, 1e-12) already exceeds 1 for beta={beta}, eta={eta}"
        )));
    }
    for _ in 0..300 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    let residual = excess(sigma)?.abs();
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "sigma(beta) residual {residual:e} for beta={beta}, eta={eta}"
        )));
    }
    Ok(sigma)
}

/// Threshold interval, its analytic enclosure and closed-form estimates.
pub fn threshold_interval(eta: u32) -> Result<ThresholdResult> {
    if eta == 0 {
        return Err(domain("threshold interval needs eta >= 1"));
    }
    let e = f64::from(eta);
    let sigma_min = sigma_of_beta(e - 1.0, eta)?;
    let sigma_max = sigma_of_beta(e + 1.0, eta)?;

    let kappa = tau() / (e + 1.0);
    let bound_low = kappa * (1.0 + kappa).powf(e - 1.0);
    let bound_high = kappa * (1.0 + kappa).powf(e + 1.0);

    let mu_minus = tau() / (e + alpha(-1.0));
    let mu_plus = tau() / (e + alpha(1.0));
    let approx_min = mu_minus * (1.0 + mu_minus).powf(e - 1.0);
    let approx_max = mu_plus * (1.0 + mu_plus).powf(e + 1.0);

    let mut result = ThresholdResult {
        eta,
        sigma_min,
        sigma_max,
        bound_low,
        bound_high,
        approx_min,
        approx_max,
        beta_star_samples: Vec::with_capacity(SAMPLE_COUNT),
    };
    let step = (bound_high - bound_low) / (SAMPLE_COUNT - 1) as f64;
    for k in 0..SAMPLE_COUNT {
        let sigma = bound_low + step * k as f64;
        let beta = result.optimal_beta(sigma)?;
        result.beta_star_samples.push((sigma, beta));
    }
    Ok(result)
}

fn solve_beta(eta: u32, sigma: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    // F decreases in beta along the solution curve: F(lo) > 1 > F(hi).
    let excess = |beta: f64| big_f(beta, eta, sigma).map(|f| f - 1.0);
    if excess(lo)? < 0.0 || excess(hi)? > 0.0 {
        return Err(Error::Numerical(format!(
            "F does not straddle 1 on [{lo}, {hi}] at sigma={sigma}"
        )));
    }
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn verify_local_max(eta: u32, sigma: f64, beta: f64) -> Result<()> {
    let center = throughput_infinite(beta, eta, sigma)?.value;
    for probe in [beta - 0.01, beta + 0.01] {
        if probe < 0.0 {
            continue;
        }
        let side = throughput_infinite(probe, eta, sigma)?.value;
        if side > center * (1.0 + 1e-12) {
            return Err(Error::Numerical(format!(
                "beta* = {beta} is not a local maximum at sigma={sigma}: theta({probe}) = {side} > {center}"
            )));
        }
    }
    Ok(())
}

/// Continuous optimum `beta* = argmax_beta theta(beta, eta, sigma)`.
pub fn optimal_beta_continuous(eta: u32, sigma: f64) -> Result<f64> {
    threshold_interval(eta)?.optimal_beta(sigma)
}

/// Integer optimum for a finite line, by exhaustive search over
/// `0..=beta_max`. Ties go to the smaller range. Returns `(beta*, theta_n)`.
pub fn optimal_beta_finite(n: u32, eta: u32, sigma: f64, beta_max: u32) -> Result<(u32, f64)> {
    check_sigma(sigma)?;
    if i64::from(beta_max) > i64::from(n) - i64::from(eta) - 1 {
        return Err(domain(format!(
            "beta_max = {beta_max} exceeds n - eta - 1 = {}",
            i64::from(n) - i64::from(eta) - 1
        )));
    }
    let mut best = (0u32, f64::NEG_INFINITY);
    for beta in 0..=beta_max {
        let params = ModelParams::new(beta, eta, sigma, n);
        let table = partition_recursive(beta as usize, sigma, 2 * n as usize + 1)?;
        let value = throughput_finite_with(&params, &table)?.value;
        if value > best.1 {
            best = (beta, value);
        }
    }
    Ok(best)
}
