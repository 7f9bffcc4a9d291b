//! Travelling-wave reduction `ξ = kx + my + ct` and decay integration.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::pde_ast::{DerivFactor, Expr, PdeDefinition, Term};
use crate::poly::Monomial;
use crate::Rational;

/// Name of the travelling-wave variable in reduced ODEs.
pub const XI: &str = "xi";

/// Coefficient of one independent variable in `ξ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameCoeff {
    Symbol(String),
    Value(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WaveFrame {
    /// PDE variable → coefficient. In fractional frames each symbol stands
    /// for the α-power atom (`k_α` for `k^α`).
    pub coeffs: BTreeMap<String, FrameCoeff>,
    pub fractional: bool,
}

impl WaveFrame {
    /// Standard symbolic frame: `x → k`, `y → m`, `t → c` (α-atoms when fractional).
    pub fn symbolic(variables: &[String], fractional: bool) -> Self {
        let coeffs = variables
            .iter()
            .filter_map(|v| frame_symbol(v, fractional).map(|s| (v.clone(), FrameCoeff::Symbol(s))))
            .collect();
        WaveFrame { coeffs, fractional }
    }

    pub fn for_pde(p: &PdeDefinition) -> Self {
        Self::symbolic(&p.variables, p.is_fractional())
    }

    /// Frame symbols in variable order.
    pub fn symbols(&self) -> Vec<String> {
        self.coeffs
            .values()
            .filter_map(|c| match c {
                FrameCoeff::Symbol(s) => Some(s.clone()),
                FrameCoeff::Value(_) => None,
            })
            .collect()
    }

    /// Symbol attached to the time variable, if any.
    pub fn speed_symbol(&self) -> Option<String> {
        match self.coeffs.get("t") {
            Some(FrameCoeff::Symbol(s)) => Some(s.clone()),
            _ => None,
        }
    }
}

/// `x → k`, `y → m`, `t → c`; fractional frames use `k_α`, `m_α`, `c_α`.
pub fn frame_symbol(var: &str, fractional: bool) -> Option<String> {
    let base = match var {
        "x" => "k",
        "y" => "m",
        "t" => "c",
        _ => return None,
    };
    Some(if fractional { format!("{base}_α") } else { base.to_string() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedOde {
    /// Expression whose derivatives are all in [`XI`].
    pub expr: Expr,
    pub frame: WaveFrame,
    pub integration_count: u32,
    /// Parameter monomial divided out after substitution.
    pub cleared_factor: Monomial,
}

impl ReducedOde {
    pub fn order(&self) -> u32 {
        self.expr.max_order()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WaveError {
    #[error("wave frame has no coefficient for variable `{0}`")]
    FrameMissingVariable(String),
    #[error("expression is not an exact ξ-derivative (remainder: {0})")]
    NotExactDerivative(String),
}

/// Substitutes `∂^{j1}_x ∂^{j2}_y ∂^{j3}_t u → k^{j1} m^{j2} c^{j3} u^{(j1+j2+j3)}`
/// and divides out the common parameter monomial.
pub fn reduce(p: &PdeDefinition, f: &WaveFrame) -> Result<ReducedOde, WaveError> {
    let mut terms = Vec::with_capacity(p.lhs_minus_rhs.terms().len());
    for t in p.lhs_minus_rhs.terms() {
        let mut coeff = t.coeff.clone();
        let mut params = t.params.clone();
        let mut factors = Vec::with_capacity(t.factors.len());
        for fac in &t.factors {
            for (var, order) in &fac.orders {
                let e = order * fac.power;
                match f.coeffs.get(var) {
                    Some(FrameCoeff::Symbol(s)) => params = params.mul(&Monomial::var_pow(s, e)),
                    Some(FrameCoeff::Value(v)) => coeff *= num_traits::pow(v.clone(), e as usize),
                    None => return Err(WaveError::FrameMissingVariable(var.clone())),
                }
            }
            factors.push(DerivFactor::d(XI, fac.total_order()).with_power(fac.power));
        }
        terms.push(Term::new(coeff, params, factors));
    }
    let expr = Expr::from_terms(terms);
    let cleared = expr.param_content();
    let expr = expr.div_params(&cleared).expect("content divides every term");
    Ok(ReducedOde { expr, frame: f.clone(), integration_count: 0, cleared_factor: cleared })
}

/// Antiderivative in ξ with zero integration constants, `times` times.
///
/// The result is rescaled to integer coefficients with a positive leading term.
pub fn integrate_decay(o: &ReducedOde, times: u32) -> Result<ReducedOde, WaveError> {
    let mut e = o.expr.clone();
    for _ in 0..times {
        e = antiderivative(&e)?;
    }
    Ok(ReducedOde {
        expr: clear_denominators(&e),
        frame: o.frame.clone(),
        integration_count: o.integration_count + times,
        cleared_factor: o.cleared_factor.clone(),
    })
}

/// Integrates as many times as the expression allows (at most `max`), returning the count.
pub fn integrate_decay_max(o: &ReducedOde, max: u32) -> (ReducedOde, u32) {
    let mut cur = o.clone();
    let mut n = 0;
    while n < max {
        match integrate_decay(&cur, 1) {
            Ok(next) => {
                cur = next;
                n += 1;
            }
            Err(_) => break,
        }
    }
    (cur, n)
}

fn order_power(t: &Term, order: u32) -> u32 {
    t.factors.iter().find(|f| f.total_order() == order).map_or(0, |f| f.power)
}

fn without_order(t: &Term, order: u32) -> Term {
    Term::new(
        t.coeff.clone(),
        t.params.clone(),
        t.factors.iter().filter(|f| f.total_order() != order).cloned().collect(),
    )
}

/// Finds `F` with `D_ξ F = e`. Peels the top derivative order: if
/// `e = A·u^{(N)} + B` with `A`, `B` free of `u^{(N)}`, then
/// `F₁ = ∫ A du^{(N−1)}` and `e − D F₁` has order below `N`.
fn antiderivative(e: &Expr) -> Result<Expr, WaveError> {
    let mut rem = e.clone();
    let mut acc = Expr::zero();
    while !rem.is_zero() {
        let n = rem.max_order();
        if n == 0 {
            return Err(WaveError::NotExactDerivative(rem.to_string()));
        }
        let mut lifted = Vec::new();
        for t in rem.terms() {
            match order_power(t, n) {
                0 => {}
                1 => {
                    let a = without_order(t, n);
                    let p = order_power(&a, n - 1);
                    let mut base = without_order(&a, n - 1);
                    base.factors.push(DerivFactor::d(XI, n - 1).with_power(p + 1));
                    base.coeff /= Rational::from_integer((p + 1).into());
                    lifted.push(Term::new(base.coeff, base.params, base.factors));
                }
                _ => return Err(WaveError::NotExactDerivative(rem.to_string())),
            }
        }
        let f1 = Expr::from_terms(lifted);
        let next = rem.sub(&f1.differentiate(XI));
        debug_assert!(next.is_zero() || next.max_order() < n);
        acc = acc.add(&f1);
        rem = next;
    }
    Ok(acc)
}

/// Scales to integer coefficients with unit content and a positive leading term.
pub fn clear_denominators(e: &Expr) -> Expr {
    if e.is_zero() {
        return e.clone();
    }
    let mut lcm = num_bigint::BigInt::one();
    let mut gcd = num_bigint::BigInt::zero();
    for t in e.terms() {
        lcm = lcm.lcm(t.coeff.denom());
        gcd = gcd.gcd(t.coeff.numer());
    }
    let mut s = Rational::new(lcm, gcd);
    if e.terms()[0].coeff.is_negative() {
        s = -s;
    }
    e.scale(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_ast::parse_pde;
    use crate::scalar::int;

    fn d(n: u32) -> Expr {
        Expr::factor(DerivFactor::d(XI, n))
    }
    fn p(name: &str) -> Expr {
        Expr::param(name)
    }

    #[test]
    fn second_x_derivative_gets_k_squared() {
        let pde = parse_pde("pde s vars(x,t) : u_xx = 0").unwrap();
        let o = reduce(&pde, &WaveFrame::for_pde(&pde)).unwrap();
        assert_eq!(o.expr, d(2));
        assert_eq!(o.cleared_factor, Monomial::var_pow("k", 2));
    }

    #[test]
    fn kp_integrates_twice_to_quadratic_form() {
        let pde = parse_pde(
            "pde kp vars(x,y,t) : u_yy = (u_t + 6*u*u_x + u_xxx)_x",
        )
        .unwrap();
        let o = reduce(&pde, &WaveFrame::for_pde(&pde)).unwrap();
        let i = integrate_decay(&o, 2).unwrap();
        assert_eq!(i.integration_count, 2);
        // k^4 u'' + 3k^2 u^2 + (kc - m^2) u
        let want = p("k")
            .pow(4)
            .mul(&d(2))
            .add(&p("k").pow(2).mul(&Expr::u().pow(2)).scale(&int(3)))
            .add(&p("k").mul(&p("c")).sub(&p("m").pow(2)).mul(&Expr::u()));
        assert_eq!(i.expr, want);
    }

    #[test]
    fn integrate_then_differentiate_recovers_input() {
        let e = d(3).mul(&Expr::u()).add(&d(1).mul(&d(2))).scale(&int(2));
        let o = ReducedOde {
            expr: e.clone(),
            frame: WaveFrame::symbolic(&["x".into()], false),
            integration_count: 0,
            cleared_factor: Monomial::one(),
        };
        let f = antiderivative(&e).unwrap();
        assert_eq!(f.differentiate(XI), e);
        assert!(integrate_decay(&o, 1).is_ok());
    }

    #[test]
    fn non_exact_terms_are_rejected() {
        let o = ReducedOde {
            expr: Expr::u().pow(2),
            frame: WaveFrame::symbolic(&["x".into()], false),
            integration_count: 0,
            cleared_factor: Monomial::one(),
        };
        assert!(matches!(integrate_decay(&o, 1), Err(WaveError::NotExactDerivative(_))));
        let sq = ReducedOde { expr: d(2).pow(2), ..o };
        assert!(integrate_decay(&sq, 1).is_err());
    }

    #[test]
    fn u_xixi_integrates_to_u_xi() {
        let o = ReducedOde {
            expr: d(2),
            frame: WaveFrame::symbolic(&["x".into()], false),
            integration_count: 0,
            cleared_factor: Monomial::one(),
        };
        assert_eq!(integrate_decay(&o, 1).unwrap().expr, d(1));
    }

    #[test]
    fn missing_frame_variable_is_an_error() {
        let pde = parse_pde("pde s vars(x,t) : u_xt = 0").unwrap();
        let f = WaveFrame::symbolic(&["x".into()], false);
        assert_eq!(reduce(&pde, &f), Err(WaveError::FrameMissingVariable("t".into())));
    }

    #[test]
    fn fractional_frame_uses_alpha_atoms() {
        let pde = parse_pde("pde f vars(x,t) frac(alpha) : u_t + u_xx = 0").unwrap();
        let o = reduce(&pde, &WaveFrame::for_pde(&pde)).unwrap();
        let want = p("c_α").mul(&d(1)).add(&p("k_α").pow(2).mul(&d(2)));
        assert_eq!(o.expr, want);
    }
}
