//! Log-space Pochhammer symbols for the root series.

use statrs::function::gamma::ln_gamma;

/// A real number stored as `sign * exp(ln_abs)`; `sign == 0` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn value(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)` in signed log form.
///
/// Every gamma function argument is kept positive: for negative `x` the
/// product is split into its negative factors and its positive factors.
pub fn ln_pochhammer(x: f64, n: u64) -> SignedLog {
    if n == 0 {
        return SignedLog::ONE;
    }
    let nf = n as f64;
    if x > 0.0 {
        return SignedLog {
            sign: 1,
            ln_abs: ln_gamma(x + nf) - ln_gamma(x),
        };
    }
    if x.fract() == 0.0 && -x <= nf - 1.0 {
        return SignedLog::ZERO;
    }
    // K = number of factors x + k that are negative.
    let negatives = (-x).ceil().min(nf);
    let sign = if (negatives as u64).is_multiple_of(2) { 1 } else { -1 };
    // |prod_{k<K} (x+k)| = Gamma(1-x) / Gamma(1-x-K)
    let mut ln_abs = ln_gamma(1.0 - x) - ln_gamma(1.0 - x - negatives);
    if negatives < nf {
        // prod_{k=K}^{n-1} (x+k) = Gamma(x+n) / Gamma(x+K)
        ln_abs += ln_gamma(x + nf) - ln_gamma(x + negatives);
    }
    SignedLog { sign, ln_abs }
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: f64, n: u64) -> f64 {
        (0..n).map(|k| x + k as f64).product()
    }

    #[test]
    fn matches_direct_product() {
        for &x in &[0.3, 1.0, 2.5, 7.0, -0.25, -1.5, -2.0 / 3.0, -3.0, -4.0, -5.5] {
            for n in 0..9 {
                let expect = direct(x, n);
                let got = ln_pochhammer(x, n).value();
                let scale = expect.abs().max(1e-300);
                assert!(
                    (got - expect).abs() <= 1e-12 * scale,
                    "(x={x})_{n}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn vanishes_when_a_factor_is_zero() {
        assert!(ln_pochhammer(-2.0, 3).is_zero());
        assert!(!ln_pochhammer(-2.0, 2).is_zero());
        // (-l/(b+1))_{l-1} with b = 2, l = 6
        assert!(ln_pochhammer(-6.0 / 3.0, 5).is_zero());
    }

    #[test]
    fn large_arguments_stay_finite() {
        let p = ln_pochhammer(4000.0, 999);
        assert_eq!(p.sign, 1);
        assert!(p.ln_abs.is_finite() && p.ln_abs > 1000.0);
        let q = ln_pochhammer(-5000.0 / 3.0, 4999);
        assert!(q.ln_abs.is_finite());
    }
}
