//! The wrapped normal distribution: the fractional part of `N(m, σ²)`.
//!
//! Its density on `[0, 1)` is `f(x) = Σ_k φ_σ(x + k − m)`. By Poisson summation,
//! `f(x) = 1 + 2 Σ_{n≥1} q^{n²} cos(2πn(x − m))` with `q = exp(−2π²σ²)`, so the
//! maximum sits at `x = m` and the minimum at `x = m + 1/2`, and
//!
//! ```text
//! c(σ) = max f / min f = θ₃(q) / θ₄(q),
//! ```
//!
//! independent of `m`. For `σ ≥ 1/4` the Fourier series is used (`q ≤ 0.292`); below
//! that the direct sum over shifted Gaussians converges faster and is evaluated in
//! log space so that `c(σ)` stays finite down to very small `σ`. Both series are
//! truncated once the next term drops below `10⁻¹⁸`; the remaining tail is smaller
//! than that term times a geometric factor below `0.1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const SWITCH: f64 = 0.25;
const EPS: f64 = 1e-18;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "standard deviation must be positive, got {sigma}"
        )));
    }
    Ok(())
}

/// `(θ₃(q), θ₄(q))` for `q = exp(−2π²σ²)`.
fn theta_pair(sigma: f64) -> (f64, f64) {
    let log_q = -2.0 * PI * PI * sigma * sigma;
    let (mut t3, mut t4) = (1.0, 1.0);
    let mut n = 1.0f64;
    loop {
        let term = (log_q * n * n).exp();
        if term < EPS {
            break;
        }
        t3 += 2.0 * term;
        t4 += if n as u64 % 2 == 1 {
            -2.0 * term
        } else {
            2.0 * term
        };
        n += 1.0;
    }
    (t3, t4)
}

/// `ln c(σ)` from the Fourier series.
pub(crate) fn log_ratio_fourier(sigma: f64) -> f64 {
    let (t3, t4) = theta_pair(sigma);
    t3.ln() - t4.ln()
}

/// `ln c(σ)` from the shifted-Gaussian sums.
pub(crate) fn log_ratio_direct(sigma: f64) -> f64 {
    let a = 1.0 / (2.0 * sigma * sigma);
    // Σ_k exp(−k²a) = 1 + 2 Σ_{k≥1} exp(−k²a)
    let mut peak = 1.0;
    // Σ_k exp(−(k+½)²a) = 2 exp(−a/4) (1 + Σ_{k≥1} exp(−(k²+k)a))
    let mut trough = 1.0;
    let mut k = 1.0f64;
    loop {
        let t_peak = (-k * k * a).exp();
        let t_trough = (-(k * k + k) * a).exp();
        if t_peak < EPS && t_trough < EPS {
            break;
        }
        peak += 2.0 * t_peak;
        trough += t_trough;
        k += 1.0;
    }
    peak.ln() + a / 4.0 - 2f64.ln() - trough.ln()
}

/// `ln c(σ)`.
pub fn wrapped_log_density_ratio(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(if sigma >= SWITCH {
        log_ratio_fourier(sigma)
    } else {
        log_ratio_direct(sigma)
    })
}

/// `c(σ)`: largest over smallest density of the wrapped normal with standard
/// deviation `σ`. Overflows to infinity only for `σ` below about `0.013`.
pub fn wrapped_density_bounds(sigma: f64) -> Result<f64> {
    Ok(wrapped_log_density_ratio(sigma)?.exp().max(1.0))
}

/// Density at `x` of the fractional part of `N(mean, σ²)`.
pub fn wrapped_density(x: f64, mean: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let d = (x - mean).rem_euclid(1.0);
    if sigma >= SWITCH {
        let log_q = -2.0 * PI * PI * sigma * sigma;
        let mut f = 1.0;
        let mut n = 1.0f64;
        loop {
            let term = (log_q * n * n).exp();
            if term < EPS {
                break;
            }
            f += 2.0 * term * (2.0 * PI * n * d).cos();
            n += 1.0;
        }
        Ok(f)
    } else {
        let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
        let mut f = 0.0;
        // offsets d + k closest to zero first, moving outward both ways
        for start in [0.0, -1.0] {
            let step = if start == 0.0 { 1.0 } else { -1.0 };
            let mut k = start;
            loop {
                let y = (d + k) / sigma;
                let term = (-0.5 * y * y).exp();
                f += term;
                if term < EPS && (d + k).abs() > 1.0 {
                    break;
                }
                k += step;
            }
        }
        Ok(f * norm)
    }
}
