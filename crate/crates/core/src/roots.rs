//! Roots of `lambda^(beta+1) - lambda^beta - sigma = 0`.
//!
//! The dominant root `lambda_0` is found on the substitution
//! `mu = lambda - 1`, where it solves the monotone equation
//! `mu (1 + mu)^beta = sigma`. The full root set is seeded from the
//! Lagrange inversion series, one for small and one for large `sigma`,
//! and then polished with damped Newton iterations on the polynomial.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::partition::check_sigma;
use crate::special::{ln_factorial, ln_pochhammer};

/// Relative term size at which series summation stops.
pub const SERIES_TOL: f64 = 1e-14;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: u64 = 100_000;
/// Minimum separation between two polished roots.
pub const DISTINCT_TOL: f64 = 1e-8;

/// How a root was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RootMethod {
    /// Small-`sigma` series converged; Newton refined the sum.
    SeriesSmall,
    /// Large-`sigma` series converged; Newton refined the sum.
    SeriesLarge,
    /// Closed form or a direct Newton solve without a series seed.
    Newton,
    /// The series hit its term cap and its partial sum was polished.
    Polish,
}

impl RootMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RootMethod::SeriesSmall => "series_small",
            RootMethod::SeriesLarge => "series_large",
            RootMethod::Newton => "newton",
            RootMethod::Polish => "polish",
        }
    }
}

impl std::fmt::Display for RootMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All `beta + 1` roots together with their partial-fraction residues
/// `c_j = lambda_j^(beta+1) / ((beta+1) lambda_j - beta)`.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub beta: usize,
    pub sigma: f64,
    /// `roots[0]` is the dominant real root.
    pub roots: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub methods: Vec<RootMethod>,
}

impl RootSet {
    pub fn dominant(&self) -> f64 {
        self.roots[0].re
    }

    /// `|p(lambda_j)|` for every root.
    pub fn residuals(&self) -> Vec<f64> {
        self.roots
            .iter()
            .map(|&l| polynomial(self.beta, self.sigma, l).norm())
            .collect()
    }
}

/// Partial sum of a root series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub converged: bool,
    pub terms: u64,
}

/// `xi(beta) = beta^beta / (beta+1)^(beta+1)`, the radius separating the
/// domains of the two series. `xi(0) = 1` under the convention `0^0 = 1`.
pub fn convergence_radius(beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    (beta * beta.ln() - (beta + 1.0) * (beta + 1.0).ln()).exp()
}

/// `mu_0 = lambda_0 - 1`, the unique positive solution of
/// `mu (1 + mu)^beta = sigma`. Accepts real `beta >= 0`.
pub fn dominant_mu(beta: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(domain(format!("sensing range must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(sigma);
    }
    // h(mu) = ln mu + beta ln(1+mu) - ln sigma is increasing and concave; the
    // root lies in (0, sigma].
    let target = sigma.ln();
    let h = |mu: f64| mu.ln() + beta * mu.ln_1p() - target;
    let dh = |mu: f64| 1.0 / mu + beta / (1.0 + mu);

    let mut lo = 0.0_f64;
    let mut hi = sigma;
    // Tighten the lower end to sigma / (1+sigma)^beta, which also satisfies h <= 0.
    let guess_lo = (target - beta * sigma.ln_1p()).exp();
    if guess_lo > 0.0 && h(guess_lo) <= 0.0 {
        lo = guess_lo;
    }
    let mut mu = if lo > 0.0 { lo } else { 0.5 * hi };
    for _ in 0..200 {
        let value = h(mu);
        if value == 0.0 {
            return Ok(mu);
        }
        if value < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let mut next = mu - value / dh(mu);
        if !(next > lo && next < hi) {
            next = if lo > 0.0 { 0.5 * (lo + hi) } else { 0.5 * hi };
        }
        if (next - mu).abs() <= 1e-16 * mu {
            return Ok(next);
        }
        mu = next;
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(mu);
        }
    }
    Err(Error::Numerical(format!(
        "dominant root did not converge for beta={beta}, sigma={sigma}"
    )))
}

/// The dominant root `lambda_0 = 1 + mu_0`.
pub fn dominant_root(beta: f64, sigma: f64) -> Result<f64> {
    Ok(1.0 + dominant_mu(beta, sigma)?)
}

fn polynomial(beta: usize, sigma: f64, lambda: Complex64) -> Complex64 {
    lambda.powi(beta as i32) * (lambda - 1.0) - sigma
}

fn polynomial_derivative(beta: usize, lambda: Complex64) -> Complex64 {
    if beta == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let b = beta as f64;
    lambda.powi(beta as i32 - 1) * (lambda * (b + 1.0) - b)
}

fn sum_series<F>(mut term: F, tol: f64) -> SeriesValue
where
    F: FnMut(u64) -> Option<Complex64>,
{
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 1..=SERIES_MAX_TERMS {
        // `None` marks an exactly vanishing coefficient, which says nothing
        // about the size of the tail.
        let Some(t) = term(l) else { continue };
        sum += t;
        if t.norm() < tol * sum.norm() {
            return SeriesValue {
                value: sum,
                converged: true,
                terms: l,
            };
        }
    }
    SeriesValue {
        value: sum,
        converged: false,
        terms: SERIES_MAX_TERMS,
    }
}

/// Small-`sigma` series for root `j`. Root 0 is
/// `1 + sum_l (-1)^(l-1) (beta l)_(l-1) / l! sigma^l`; roots `j >= 1` use
/// `sum_l (l/beta)_(l-1) / l! w_j^l` with
/// `w_j = sigma^(1/beta) exp(2 pi i (j - 1/2) / beta)`.
pub fn series_small_sigma(beta: usize, sigma: f64, j: usize, tol: f64) -> Result<SeriesValue> {
    if !(sigma >= 0.0) {
        return Err(domain(format!("sigma must be >= 0, got {sigma}")));
    }
    if j > beta {
        return Err(domain(format!("root index {j} out of range for beta={beta}")));
    }
    if beta == 0 {
        // (0)_(l-1) vanishes for l >= 2: the series is exactly 1 + sigma.
        return Ok(SeriesValue {
            value: Complex64::new(1.0 + sigma, 0.0),
            converged: true,
            terms: 1,
        });
    }
    let radius = convergence_radius(beta as f64);
    if sigma > radius {
        return Err(Error::SeriesDivergence { sigma, radius });
    }
    if sigma == 0.0 {
        let value = if j == 0 { 1.0 } else { 0.0 };
        return Ok(SeriesValue {
            value: Complex64::new(value, 0.0),
            converged: true,
            terms: 0,
        });
    }
    let b = beta as f64;
    if j == 0 {
        let ln_sigma = sigma.ln();
        let mut s = sum_series(
            |l| {
                let p = ln_pochhammer(b * l as f64, l - 1);
                let mag = (p.ln_abs - ln_factorial(l) + l as f64 * ln_sigma).exp();
                let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                Some(Complex64::new(sign * mag, 0.0))
            },
            tol,
        );
        s.value += 1.0;
        return Ok(s);
    }
    let ln_w = sigma.ln() / b;
    let phase = 2.0 * PI * (j as f64 - 0.5) / b;
    Ok(sum_series(
        |l| {
            let lf = l as f64;
            let p = ln_pochhammer(lf / b, l - 1);
            let mag = (p.ln_abs - ln_factorial(l) + lf * ln_w).exp();
            Some(Complex64::from_polar(mag, reduce_angle(lf * phase)))
        },
        tol,
    ))
}

/// Large-`sigma` series: `1 / lambda_j = sum_l (-l/(beta+1))_(l-1) / l! v_j^(-l)`
/// with `v_j = sigma^(1/(beta+1)) exp(2 pi i j / (beta+1))`. The returned
/// value is `lambda_j` itself.
pub fn series_large_sigma(beta: usize, sigma: f64, j: usize, tol: f64) -> Result<SeriesValue> {
    check_sigma(sigma)?;
    if j > beta {
        return Err(domain(format!("root index {j} out of range for beta={beta}")));
    }
    let radius = convergence_radius(beta as f64);
    if sigma < radius {
        return Err(Error::SeriesDivergence { sigma, radius });
    }
    let d = beta as f64 + 1.0;
    let ln_inv_v = -sigma.ln() / d;
    let phase = -2.0 * PI * j as f64 / d;
    let mut s = sum_series(
        |l| {
            let lf = l as f64;
            let p = ln_pochhammer(-lf / d, l - 1);
            if p.is_zero() {
                return None;
            }
            let mag = (p.ln_abs - ln_factorial(l) + lf * ln_inv_v).exp();
            Some(Complex64::from_polar(f64::from(p.sign) * mag, reduce_angle(lf * phase)))
        },
        tol,
    );
    s.value = s.value.inv();
    Ok(s)
}

fn reduce_angle(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}

/// Damped Newton on the polynomial. Returns the polished root.
fn polish(beta: usize, sigma: f64, start: Complex64) -> Complex64 {
    let mut z = start;
    let mut fz = polynomial(beta, sigma, z);
    for _ in 0..200 {
        let dz = polynomial_derivative(beta, z);
        if dz.norm() == 0.0 {
            break;
        }
        let step = fz / dz;
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate = z - step * damping;
            let fc = polynomial(beta, sigma, candidate);
            if fc.norm() < fz.norm() {
                z = candidate;
                fz = fc;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted || (step * damping).norm() <= 1e-16 * z.norm().max(1e-300) {
            break;
        }
    }
    z
}

/// Every root of `lambda^(beta+1) - lambda^beta - sigma`, with residues.
///
/// Seeds come from the small-`sigma` series when `sigma < 0.9 xi`, the
/// large-`sigma` series when `sigma > 1.1 xi`, and whichever side of `xi`
/// `sigma` falls on in between.
pub fn all_roots(beta: usize, sigma: f64) -> Result<RootSet> {
    check_sigma(sigma)?;
    let b = beta as f64;
    let mu0 = dominant_mu(b, sigma)?;
    let mut roots = vec![Complex64::new(1.0 + mu0, 0.0)];
    let mut methods = vec![if beta == 0 {
        RootMethod::Newton
    } else {
        RootMethod::SeriesSmall
    }];

    if beta > 0 {
        let radius = convergence_radius(b);
        let use_small = sigma < radius;
        // The dominant root comes from the monotone solve; its method tag
        // follows the series family that seeds the others.
        methods[0] = if use_small {
            RootMethod::SeriesSmall
        } else {
            RootMethod::SeriesLarge
        };
        for j in 1..=beta {
            let seed = if use_small {
                series_small_sigma(beta, sigma, j, SERIES_TOL)?
            } else {
                series_large_sigma(beta, sigma, j, SERIES_TOL)?
            };
            let method = match (seed.converged, use_small) {
                (false, _) => RootMethod::Polish,
                (true, true) => RootMethod::SeriesSmall,
                (true, false) => RootMethod::SeriesLarge,
            };
            let mut root = polish(beta, sigma, seed.value);
            if root.im.abs() <= 1e-12 * root.norm() {
                root.im = 0.0;
            }
            roots.push(root);
            methods.push(method);
        }
    }

    let set = finish(beta, sigma, roots, methods)?;
    Ok(set)
}

fn finish(
    beta: usize,
    sigma: f64,
    roots: Vec<Complex64>,
    methods: Vec<RootMethod>,
) -> Result<RootSet> {
    for a in 0..roots.len() {
        for c in (a + 1)..roots.len() {
            let distance = (roots[a] - roots[c]).norm();
            if distance < DISTINCT_TOL {
                return Err(Error::RootCollision {
                    first: a,
                    second: c,
                    distance,
                });
            }
        }
    }
    let lambda0 = roots[0].re;
    if let Some((j, r)) = roots
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, r)| r.norm() >= lambda0)
    {
        return Err(Error::Numerical(format!(
            "root {j} (|{r}| = {}) is not dominated by lambda_0 = {lambda0}",
            r.norm()
        )));
    }
    let tolerance = 1e-10 * (1.0 + sigma);
    for (j, &r) in roots.iter().enumerate() {
        let residual = polynomial(beta, sigma, r).norm();
        if residual > tolerance {
            return Err(Error::Numerical(format!(
                "root {j} = {r} has residual {residual:e}"
            )));
        }
    }
    let b = beta as f64;
    let mut residues = Vec::with_capacity(roots.len());
    for &r in &roots {
        let denominator = r * (b + 1.0) - b;
        if denominator.norm() < 1e-12 {
            return Err(Error::Numerical(format!(
                "residue denominator vanishes at root {r}"
            )));
        }
        residues.push(r.powi(beta as i32 + 1) / denominator);
    }
    Ok(RootSet {
        beta,
        sigma,
        roots,
        residues,
        methods,
    })
}
