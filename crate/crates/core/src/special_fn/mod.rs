//! Mittag-Leffler function, α-generalized hyperbolic and trigonometric
//! functions, and Jumarie fractional derivatives.

pub mod gamma;
pub mod hiprec;
mod jumarie;
mod mittag_leffler;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::Scalar;

pub use gamma::{gamma, gamma_f64, ln_gamma, ln_gamma_f64};
pub use jumarie::{jumarie_l1, jumarie_quadrature, jumarie_quadrature_with, QuadratureOptions};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_real, MLSeriesSpec};

use mittag_leffler::{complex_series, positive_series_scaled};

/// Denominators below this magnitude count as poles.
pub const POLE_EPS: f64 = 1e-13;
/// Largest admissible `x^α` for the generalized functions.
pub const GEN_GUARD: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("argument magnitude {z} exceeds the series domain guard")]
    DomainGuardExceeded { z: f64 },
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("pole at x = {0}")]
    PoleAt(f64),
    #[error("gamma pole at {0}")]
    GammaPole(f64),
    #[error("x = {0} is within one cell of the domain endpoints")]
    EndpointTooClose(f64),
    #[error("fractional order {0} outside the admissible range")]
    InvalidOrder(f64),
    #[error("{0}")]
    Domain(String),
}

/// Fractional order `0 < α ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct FractionalOrder<T>(T);

impl<T: Scalar> FractionalOrder<T> {
    pub fn new(alpha: T) -> Result<Self, SpecialFnError> {
        if alpha > T::zero() && alpha <= T::one() {
            Ok(FractionalOrder(alpha))
        } else {
            Err(SpecialFnError::InvalidOrder(alpha.to_f64_lossy()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == T::one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenFn {
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Sin,
    Cos,
    Tan,
    Cot,
}

impl GenFn {
    pub const ALL: [GenFn; 8] =
        [GenFn::Sinh, GenFn::Cosh, GenFn::Tanh, GenFn::Coth, GenFn::Sin, GenFn::Cos, GenFn::Tan, GenFn::Cot];

    pub fn name(self) -> &'static str {
        match self {
            GenFn::Sinh => "sinh",
            GenFn::Cosh => "cosh",
            GenFn::Tanh => "tanh",
            GenFn::Coth => "coth",
            GenFn::Sin => "sin",
            GenFn::Cos => "cos",
            GenFn::Tan => "tan",
            GenFn::Cot => "cot",
        }
    }

    pub fn parse(s: &str) -> Option<GenFn> {
        let base = s.trim_end_matches("_alpha").trim_end_matches("_a");
        GenFn::ALL.into_iter().find(|g| g.name() == base)
    }

    pub fn is_even(self) -> bool {
        matches!(self, GenFn::Cosh | GenFn::Cos)
    }
}

/// `sinh_α`, `cosh_α`, … at `x ≥ 0` (arguments enter as `x^α`).
///
/// The hyperbolic pair uses the odd/even halves of the `E_α(x^α)` series,
/// which have positive terms; the trigonometric pair uses `E_α(±i x^α)`.
pub fn generalized_fn<T: Scalar>(name: GenFn, alpha: T, x: T) -> Result<T, SpecialFnError> {
    let a = alpha.to_f64_lossy();
    let xf = x.to_f64_lossy();
    if xf < 0.0 {
        return Err(SpecialFnError::Domain(format!("generalized {} needs x ≥ 0, got {xf}", name.name())));
    }
    if !(a > 0.0) {
        return Err(SpecialFnError::InvalidOrder(a));
    }
    let big_x = xf.powf(a);
    if big_x > GEN_GUARD {
        return Err(SpecialFnError::DomainGuardExceeded { z: big_x });
    }
    let cap = 100_000;
    let v = match name {
        GenFn::Sinh | GenFn::Cosh | GenFn::Tanh | GenFn::Coth => {
            let (so, lo) = positive_series_scaled(a, big_x, 1, 2, 1e-17, cap)?;
            let (se, le) = positive_series_scaled(a, big_x, 0, 2, 1e-17, cap)?;
            match name {
                GenFn::Sinh => so * lo.exp(),
                GenFn::Cosh => se * le.exp(),
                GenFn::Tanh => so / se * (lo - le).exp(),
                _ => {
                    let s = so * (lo - le).exp();
                    if s.abs() < POLE_EPS * se {
                        return Err(SpecialFnError::PoleAt(xf));
                    }
                    se / s
                }
            }
        }
        GenFn::Sin | GenFn::Cos | GenFn::Tan | GenFn::Cot => {
            let digits = hiprec::precision_digits();
            let iz = Complex::new(0.0, big_x);
            let s = complex_series(a, iz, 1, 2, digits, cap)?.im;
            let c = complex_series(a, iz, 0, 2, digits, cap)?.re;
            match name {
                GenFn::Sin => s,
                GenFn::Cos => c,
                GenFn::Tan if c.abs() < POLE_EPS => return Err(SpecialFnError::PoleAt(xf)),
                GenFn::Tan => s / c,
                _ if s.abs() < POLE_EPS => return Err(SpecialFnError::PoleAt(xf)),
                _ => c / s,
            }
        }
    };
    Ok(T::lit(v))
}

/// [`generalized_fn`] extended to `x < 0` by parity (odd for all but `cosh_α`, `cos_α`).
pub fn generalized_fn_signed<T: Scalar>(name: GenFn, alpha: T, x: T) -> Result<T, SpecialFnError> {
    if x >= T::zero() {
        return generalized_fn(name, alpha, x);
    }
    let v = generalized_fn(name, alpha, -x)?;
    Ok(if name.is_even() { v } else { -v })
}

/// `coefficient · x^γ`, the argument of the power rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawTerm<T> {
    pub gamma: T,
    pub coefficient: T,
}

/// `D^α[c x^γ] = c Γ(1+γ)/Γ(1+γ−α) x^{γ−α}`.
pub fn jumarie_power_rule<T: Scalar>(alpha: T, t: PowerLawTerm<T>, x: T) -> Result<T, SpecialFnError> {
    let (a, g, xf) = (alpha.to_f64_lossy(), t.gamma.to_f64_lossy(), x.to_f64_lossy());
    if !(xf > 0.0) {
        return Err(SpecialFnError::Domain(format!("power rule needs x > 0, got {xf}")));
    }
    if !(g > 0.0) {
        return Err(SpecialFnError::Domain(format!("power rule needs γ > 0, got {g}")));
    }
    let lower = 1.0 + g - a;
    if gamma::is_gamma_pole(lower) {
        return Err(SpecialFnError::GammaPole(lower));
    }
    let ratio = gamma_f64(1.0 + g) / gamma_f64(lower);
    Ok(t.coefficient * T::lit(ratio * xf.powf(g - a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_limits() {
        for x in [0.5f64, 1.0, 2.0] {
            assert!((generalized_fn(GenFn::Tanh, 1.0, x).unwrap() - x.tanh()).abs() < 1e-12);
        }
        assert!((generalized_fn(GenFn::Sin, 1.0f64, 1.0).unwrap() - 0.841_470_984_807_896_5).abs() < 1e-13);
        assert!((generalized_fn(GenFn::Tan, 1.0f64, 1.3).unwrap() - 1.3f64.tan()).abs() < 1e-12);
    }

    #[test]
    fn values_at_zero() {
        for a in [0.3, 0.7, 1.0] {
            assert_eq!(generalized_fn(GenFn::Sinh, a, 0.0).unwrap(), 0.0);
            assert_eq!(generalized_fn(GenFn::Cosh, a, 0.0).unwrap(), 1.0);
        }
        assert!(matches!(generalized_fn(GenFn::Coth, 0.5, 0.0), Err(SpecialFnError::PoleAt(_))));
    }

    #[test]
    fn hyperbolic_identity_is_product_of_ml() {
        let (a, x) = (0.6f64, 1.7f64);
        let c = generalized_fn(GenFn::Cosh, a, x).unwrap();
        let s = generalized_fn(GenFn::Sinh, a, x).unwrap();
        let xa = x.powf(a);
        let prod = mittag_leffler_real(a, xa).unwrap() * mittag_leffler_real(a, -xa).unwrap();
        assert!((c * c - s * s - prod).abs() < 1e-10);
        assert!((c * c - s * s - 1.0).abs() > 1e-3);
    }

    #[test]
    fn parity_extension() {
        let v = generalized_fn_signed(GenFn::Tanh, 0.8, -1.2).unwrap();
        assert_eq!(v, -generalized_fn(GenFn::Tanh, 0.8, 1.2).unwrap());
        assert_eq!(GenFn::parse("coth_alpha"), Some(GenFn::Coth));
    }

    #[test]
    fn power_rule_examples() {
        let t = |g| PowerLawTerm { gamma: g, coefficient: 1.0 };
        assert!((jumarie_power_rule(1.0f64, t(2.0), 3.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((jumarie_power_rule(0.5f64, t(1.0), 1.0).unwrap() - 1.128_379_167_095_512_6).abs() < 1e-14);
        assert!((jumarie_power_rule(0.5f64, t(0.5), 1.0).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        assert!(FractionalOrder::new(1.2).is_err());
    }
}
