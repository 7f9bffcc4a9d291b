//! One-parameter Mittag-Leffler function `E_α(z) = Σ z^k / Γ(1 + kα)`.
//!
//! Series with positive terms are summed in `f64` after scaling by the
//! largest term. Series that cancel (negative or complex `z`) are summed in
//! extended precision sized to the largest term plus the requested digits.

use num_complex::Complex;

use super::gamma::ln_gamma_f64;
use super::hiprec::{precision_digits, series_big};
use super::SpecialFnError;
use crate::Scalar;

/// Largest working precision the extended path will use.
const MAX_BITS: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub struct MLSeriesSpec<T> {
    pub alpha: T,
    /// Maximum number of series terms.
    pub truncation: usize,
    /// Relative tail bound for positive-term series.
    pub tolerance: T,
    /// Largest admissible `|z|`.
    pub domain_guard: T,
    /// Decimal digits carried beyond the cancellation in the extended path.
    pub digits: u32,
}

impl<T: Scalar> MLSeriesSpec<T> {
    pub fn new(alpha: T) -> Self {
        MLSeriesSpec {
            alpha,
            truncation: 100_000,
            tolerance: T::lit(1e-17),
            domain_guard: T::lit(50.0),
            digits: precision_digits(),
        }
    }
}

/// Term-count and scale of a series over `j = offset + i·step`.
struct Plan {
    count: usize,
    log_max: f64,
}

fn plan(alpha: f64, r: f64, offset: usize, step: usize, drop: f64, cap: usize) -> Result<Plan, SpecialFnError> {
    let ln_r = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
    let log_term = |j: usize| {
        if j == 0 {
            -ln_gamma_f64(1.0)
        } else {
            j as f64 * ln_r - ln_gamma_f64(1.0 + j as f64 * alpha)
        }
    };
    let mut log_max = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..cap {
        let lt = log_term(offset + i * step);
        if lt > log_max {
            log_max = lt;
        }
        if i > 0 && lt <= prev && lt < log_max - drop {
            return Ok(Plan { count: i + 1, log_max });
        }
        prev = lt;
    }
    Err(SpecialFnError::NonConvergence { terms: cap })
}

/// `Σ x^j/Γ(1+jα)` over the sub-series for `x ≥ 0`, returned as `(S, L)` with value `S·e^L`.
pub(crate) fn positive_series_scaled(
    alpha: f64,
    x: f64,
    offset: usize,
    step: usize,
    tol: f64,
    cap: usize,
) -> Result<(f64, f64), SpecialFnError> {
    if x == 0.0 {
        return Ok((if offset == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    let drop = -tol.ln() + 5.0;
    let pl = plan(alpha, x, offset, step, drop, cap)?;
    let ln_x = x.ln();
    let mut s = 0.0;
    for i in 0..pl.count {
        let j = offset + i * step;
        let lt = j as f64 * ln_x - ln_gamma_f64(1.0 + j as f64 * alpha);
        s += (lt - pl.log_max).exp();
    }
    Ok((s, pl.log_max))
}

/// Sub-series `Σ z^j/Γ(1+jα)` for `j = offset + i·step` at complex `z`.
pub(crate) fn complex_series(
    alpha: f64,
    z: Complex<f64>,
    offset: usize,
    step: usize,
    digits: u32,
    cap: usize,
) -> Result<Complex<f64>, SpecialFnError> {
    let r = z.norm();
    if r == 0.0 {
        return Ok(Complex::new(if offset == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    if z.im == 0.0 && z.re > 0.0 {
        let (s, l) = positive_series_scaled(alpha, r, offset, step, 1e-17, cap)?;
        return Ok(Complex::new(s * l.exp(), 0.0));
    }
    let probe = plan(alpha, r, offset, step, 40.0, cap)?;
    if probe.log_max < 1.0 {
        // terms never exceed e: f64 accumulation loses at most a few ulps
        let mut term = z.powu(offset as u32);
        let w = z.powu(step as u32);
        let mut s = Complex::new(0.0, 0.0);
        for i in 0..probe.count {
            let j = offset + i * step;
            s += term * (-ln_gamma_f64(1.0 + j as f64 * alpha)).exp();
            term *= w;
        }
        return Ok(s);
    }
    let bits = (digits as f64 * std::f64::consts::LOG2_10 + probe.log_max / std::f64::consts::LN_2 + 32.0).ceil();
    let bits = ((bits as usize).div_ceil(64) * 64).max(128);
    if bits > MAX_BITS {
        return Err(SpecialFnError::DomainGuardExceeded { z: r });
    }
    let drop = bits as f64 * std::f64::consts::LN_2 + 5.0;
    let pl = plan(alpha, r, offset, step, drop, cap)?;
    let (re, im) = series_big(alpha, (z.re, z.im), offset, step, pl.count, bits);
    Ok(Complex::new(re, im))
}

/// `E_α(z)` with relative accuracy near 1e-12 or better inside the domain guard.
pub fn mittag_leffler<T: Scalar>(spec: &MLSeriesSpec<T>, z: Complex<T>) -> Result<Complex<T>, SpecialFnError> {
    let zf = Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy());
    if zf.norm() > spec.domain_guard.to_f64_lossy() {
        return Err(SpecialFnError::DomainGuardExceeded { z: zf.norm() });
    }
    let alpha = spec.alpha.to_f64_lossy();
    if !(alpha > 0.0) {
        return Err(SpecialFnError::InvalidOrder(alpha));
    }
    let v = if zf.im == 0.0 && zf.re > 0.0 {
        let (s, l) = positive_series_scaled(alpha, zf.re, 0, 1, spec.tolerance.to_f64_lossy(), spec.truncation)?;
        Complex::new(s * l.exp(), 0.0)
    } else {
        complex_series(alpha, zf, 0, 1, spec.digits, spec.truncation)?
    };
    Ok(Complex::new(T::lit(v.re), T::lit(v.im)))
}

/// Real-argument convenience wrapper.
pub fn mittag_leffler_real<T: Scalar>(alpha: T, x: T) -> Result<T, SpecialFnError> {
    let spec = MLSeriesSpec::new(alpha);
    Ok(mittag_leffler(&spec, Complex::new(x, T::zero()))?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_reductions() {
        assert!((mittag_leffler_real(1.0f64, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(mittag_leffler_real(0.5, 0.0).unwrap(), 1.0);
        assert!((mittag_leffler_real(2.0f64, 1.0).unwrap() - 1.543_080_634_815_243_7).abs() < 1e-15);
    }

    #[test]
    fn negative_argument_is_accurate() {
        for x in [-5.0f64, -12.5, -30.0] {
            let v = mittag_leffler_real(1.0, x).unwrap();
            assert!((v / x.exp() - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn imaginary_argument_gives_cis() {
        let spec = MLSeriesSpec::new(1.0);
        let v = mittag_leffler(&spec, Complex::new(0.0, 20.0)).unwrap();
        assert!((v.re - 20f64.cos()).abs() < 1e-13);
        assert!((v.im - 20f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn guard_is_enforced() {
        let spec = MLSeriesSpec::new(0.5);
        assert!(matches!(
            mittag_leffler(&spec, Complex::new(-60.0, 0.0)),
            Err(SpecialFnError::DomainGuardExceeded { .. })
        ));
    }

    #[test]
    fn half_order_matches_erfc_identity() {
        // E_{1/2}(-x) = e^{x²} erfc(x); at x = 1: 0.42758357615580700
        let v = mittag_leffler_real(0.5f64, -1.0).unwrap();
        assert!((v - 0.427_583_576_155_807).abs() < 1e-14);
    }
}
