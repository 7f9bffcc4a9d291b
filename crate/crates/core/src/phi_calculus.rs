//! φ-substitution calculus for the sub-equation `dφ/dξ = r0 + r2 φ²`.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::pde_ast::Term;
use crate::poly::Poly;
use crate::travelling_wave::ReducedOde;
use crate::Rational;

/// Symbol of the Riccati constant.
pub const SIGMA: &str = "σ";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileMode {
    /// `φ = tanh ξ`: `r0 = 1`, `r2 = −1`.
    ClassicalTanh,
    /// `D^α Φ = σ + Φ²`.
    Riccati,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubEquationProfile {
    pub r0: Poly,
    pub r2: Poly,
    pub mode: ProfileMode,
    pub fractional: bool,
}

impl SubEquationProfile {
    pub fn classical_tanh() -> Self {
        SubEquationProfile {
            r0: Poly::one(),
            r2: Poly::int(-1),
            mode: ProfileMode::ClassicalTanh,
            fractional: false,
        }
    }

    pub fn riccati(fractional: bool) -> Self {
        SubEquationProfile { r0: Poly::var(SIGMA), r2: Poly::one(), mode: ProfileMode::Riccati, fractional }
    }

    /// `r0 + r2 φ²`.
    pub fn rhs(&self) -> PhiPoly {
        PhiPoly::new(vec![self.r0.clone(), Poly::zero(), self.r2.clone()])
    }
}

/// Polynomial in φ with multivariate polynomial coefficients; `coeffs[i]` multiplies `φ^i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhiPoly {
    coeffs: Vec<Poly>,
}

impl PhiPoly {
    pub fn new(mut coeffs: Vec<Poly>) -> Self {
        while coeffs.last().is_some_and(Poly::is_zero) {
            coeffs.pop();
        }
        PhiPoly { coeffs }
    }

    pub fn zero() -> Self {
        PhiPoly::default()
    }

    pub fn constant(c: Poly) -> Self {
        PhiPoly::new(vec![c])
    }

    pub fn phi_pow(n: usize) -> Self {
        let mut v = vec![Poly::zero(); n + 1];
        v[n] = Poly::one();
        PhiPoly::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in φ; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Poly {
        self.coeffs.get(i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn add(&self, other: &PhiPoly) -> PhiPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        PhiPoly::new((0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &PhiPoly) -> PhiPoly {
        self.add(&other.scale_poly(&Poly::int(-1)))
    }

    pub fn scale_poly(&self, c: &Poly) -> PhiPoly {
        PhiPoly::new(self.coeffs.iter().map(|p| p * c).collect())
    }

    pub fn mul(&self, other: &PhiPoly) -> PhiPoly {
        if self.is_zero() || other.is_zero() {
            return PhiPoly::zero();
        }
        let mut out = vec![Poly::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        PhiPoly::new(out)
    }

    pub fn pow(&self, n: u32) -> PhiPoly {
        (0..n).fold(PhiPoly::constant(Poly::one()), |acc, _| acc.mul(self))
    }

    /// d/dφ.
    pub fn derivative(&self) -> PhiPoly {
        PhiPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.scale(&Rational::from_integer((i as i64).into())))
                .collect(),
        )
    }

    /// Applies the substitution `var → value` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> PhiPoly {
        PhiPoly::new(self.coeffs.iter().map(f).collect())
    }

    pub fn eval_f64(&self, phi: f64, values: &std::collections::BTreeMap<String, f64>) -> Result<f64, String> {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * phi + c.eval(values)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for PhiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*φ")?,
                _ => write!(f, "({c})*φ^{i}")?,
            }
        }
        Ok(())
    }
}

/// The identity produced by ansatz substitution; row `i` is the coefficient of `φ^i`.
pub type PhiPolynomial = PhiPoly;

/// Row `j` holds `D^j = Σ_d rows[j-1][d] · (d/dφ)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiDiffTable {
    pub profile: SubEquationProfile,
    pub rows: Vec<Vec<PhiPoly>>,
}

impl PhiDiffTable {
    pub fn max_order(&self) -> usize {
        self.rows.len()
    }

    /// Coefficient of `(d/dφ)^d` in row `j`.
    pub fn entry(&self, j: usize, d: usize) -> PhiPoly {
        self.rows.get(j - 1).and_then(|r| r.get(d)).cloned().unwrap_or_default()
    }

    /// `D^j S`; `j = 0` returns `S`.
    pub fn apply(&self, j: usize, s: &PhiPoly) -> PhiPoly {
        if j == 0 {
            return s.clone();
        }
        let mut out = PhiPoly::zero();
        let mut ds = s.clone();
        for d in 0..=j {
            out = out.add(&self.entry(j, d).mul(&ds));
            ds = ds.derivative();
        }
        out
    }
}

/// `(r0 + r2φ²)·d/dφ` composed onto an operator row.
fn apply_once(row: &[PhiPoly], w: &PhiPoly) -> Vec<PhiPoly> {
    let mut out = vec![PhiPoly::zero(); row.len() + 1];
    for (d, c) in row.iter().enumerate() {
        out[d] = out[d].add(&w.mul(&c.derivative()));
        out[d + 1] = out[d + 1].add(&w.mul(c));
    }
    out
}

pub fn derivative_table(profile: &SubEquationProfile, max_order: usize) -> PhiDiffTable {
    let w = profile.rhs();
    let mut rows = Vec::with_capacity(max_order);
    let mut cur = vec![PhiPoly::constant(Poly::one())];
    for _ in 0..max_order {
        cur = apply_once(&cur, &w);
        rows.push(cur.clone());
    }
    PhiDiffTable { profile: profile.clone(), rows }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ansatz {
    pub degree: u32,
    /// `a_0 .. a_n`.
    pub coeffs: Vec<String>,
}

impl Ansatz {
    pub fn new(degree: u32) -> Self {
        Ansatz { degree, coeffs: (0..=degree).map(coeff_name).collect() }
    }

    /// `S = Σ a_i φ^i`.
    pub fn series(&self) -> PhiPoly {
        PhiPoly::new(self.coeffs.iter().map(|a| Poly::var(a)).collect())
    }

    pub fn leading(&self) -> &str {
        self.coeffs.last().expect("degree ≥ 0")
    }
}

pub fn coeff_name(i: u32) -> String {
    format!("a_{i}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BalanceError {
    #[error("homogeneous balance gives n = {0}, not a positive integer; pass --degree to override")]
    NonIntegerBalance(Rational),
    #[error("ODE needs a derivative term and a nonlinear term to balance")]
    Degenerate,
}

/// Top φ-degree of a term as `slope·n + offset`.
fn term_line(t: &Term) -> (i64, i64) {
    t.factors
        .iter()
        .fold((0, 0), |(a, b), f| (a + f.power as i64, b + (f.power * f.total_order()) as i64))
}

/// Homogeneous balance: the largest positive `n` at which two terms with
/// different slopes jointly attain the maximal φ-degree.
pub fn balance_degree(o: &ReducedOde, _profile: &SubEquationProfile) -> Result<u32, BalanceError> {
    let mut lines: Vec<(i64, i64)> = o.expr.terms().iter().map(term_line).collect();
    lines.sort();
    lines.dedup();
    let mut best: Option<Rational> = None;
    let mut non_integer: Option<Rational> = None;
    for (i, &(a1, b1)) in lines.iter().enumerate() {
        for &(a2, b2) in &lines[i + 1..] {
            if a1 == a2 {
                continue;
            }
            let n = Rational::new((b2 - b1).into(), (a1 - a2).into());
            if n <= Rational::zero() {
                continue;
            }
            let top = Rational::from_integer(a1.into()) * &n + Rational::from_integer(b1.into());
            let attains_max = lines
                .iter()
                .all(|&(a, b)| Rational::from_integer(a.into()) * &n + Rational::from_integer(b.into()) <= top);
            if !attains_max {
                continue;
            }
            if n.is_integer() {
                if best.as_ref().is_none_or(|b| &n > b) {
                    best = Some(n);
                }
            } else {
                non_integer = Some(n);
            }
        }
    }
    match (best, non_integer) {
        (Some(n), _) => Ok(n.to_integer().try_into().expect("small balance degree")),
        (None, Some(n)) => Err(BalanceError::NonIntegerBalance(n)),
        (None, None) => Err(BalanceError::Degenerate),
    }
}

/// Substitutes `u^{(j)} → D^j S` and expands into a polynomial identity in φ.
pub fn substitute_ansatz(o: &ReducedOde, a: &Ansatz, profile: &SubEquationProfile) -> PhiPolynomial {
    let table = derivative_table(profile, o.order().max(1) as usize);
    let s = a.series();
    let mut derivs: Vec<PhiPoly> = (0..=table.max_order()).map(|j| table.apply(j, &s)).collect();
    derivs.truncate(o.order() as usize + 1);
    let mut out = PhiPoly::zero();
    for t in o.expr.terms() {
        let coeff = Poly::term(t.coeff.clone(), t.params.clone());
        let mut acc = PhiPoly::constant(coeff);
        for f in &t.factors {
            acc = acc.mul(&derivs[f.total_order() as usize].pow(f.power));
        }
        out = out.add(&acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_ast::{DerivFactor, Expr};
    use crate::poly::Monomial;
    use crate::scalar::int;
    use crate::travelling_wave::{WaveFrame, XI};

    fn one_minus_phi2() -> PhiPoly {
        PhiPoly::new(vec![Poly::one(), Poly::zero(), Poly::int(-1)])
    }
    fn phi() -> PhiPoly {
        PhiPoly::phi_pow(1)
    }
    fn k(c: i64) -> PhiPoly {
        PhiPoly::constant(Poly::int(c))
    }

    #[test]
    fn classical_second_order_row() {
        let t = derivative_table(&SubEquationProfile::classical_tanh(), 2);
        let w = one_minus_phi2();
        assert_eq!(t.entry(2, 2), w.pow(2));
        assert_eq!(t.entry(2, 1), k(-2).mul(&phi()).mul(&w));
        assert!(t.entry(2, 0).is_zero());
    }

    #[test]
    fn classical_third_order_row() {
        let t = derivative_table(&SubEquationProfile::classical_tanh(), 3);
        let w = one_minus_phi2();
        let one_minus_3phi2 = PhiPoly::new(vec![Poly::one(), Poly::zero(), Poly::int(-3)]);
        assert_eq!(t.entry(3, 3), w.pow(3));
        assert_eq!(t.entry(3, 2), k(-6).mul(&phi()).mul(&w.pow(2)));
        assert_eq!(t.entry(3, 1), k(-2).mul(&w).mul(&one_minus_3phi2));
    }

    #[test]
    fn riccati_first_row_is_definition() {
        let p = SubEquationProfile::riccati(true);
        let t = derivative_table(&p, 1);
        assert_eq!(t.entry(1, 1), p.rhs());
        assert!(t.entry(1, 0).is_zero());
    }

    #[test]
    fn composition_law_holds() {
        let p = SubEquationProfile::riccati(false);
        let t3 = derivative_table(&p, 3);
        let t4 = derivative_table(&p, 4);
        assert_eq!(apply_once(&t3.rows[2], &p.rhs()), t4.rows[3]);
    }

    fn ode(expr: Expr) -> ReducedOde {
        ReducedOde {
            expr,
            frame: WaveFrame::symbolic(&["x".into(), "t".into()], false),
            integration_count: 0,
            cleared_factor: Monomial::one(),
        }
    }
    fn d(n: u32) -> Expr {
        Expr::factor(DerivFactor::d(XI, n))
    }

    #[test]
    fn balance_examples() {
        let prof = SubEquationProfile::classical_tanh();
        let sww = ode(d(3).add(&d(1).pow(2)).add(&d(1)));
        assert_eq!(balance_degree(&sww, &prof), Ok(1));
        let kp = ode(d(2).add(&Expr::u().pow(2)).add(&Expr::u()));
        assert_eq!(balance_degree(&kp, &prof), Ok(2));
        let toy = ode(d(2).sub(&Expr::u().mul(&d(1))));
        assert_eq!(balance_degree(&toy, &prof), Ok(1));
        let scaled = ode(toy.expr.scale(&int(-7)));
        assert_eq!(balance_degree(&scaled, &prof), Ok(1));
    }

    #[test]
    fn non_integer_balance_is_reported() {
        // u'' vs u^3: n + 2 = 3n
        let o = ode(d(2).add(&Expr::u().pow(3)));
        assert_eq!(
            balance_degree(&o, &SubEquationProfile::classical_tanh()),
            Ok(1),
        );
        // u''' vs u^3: n + 3 = 3n → 3/2
        let o = ode(d(3).add(&Expr::u().pow(3)));
        assert!(matches!(
            balance_degree(&o, &SubEquationProfile::classical_tanh()),
            Err(BalanceError::NonIntegerBalance(_))
        ));
    }

    #[test]
    fn zero_ode_gives_zero_identity() {
        let o = ode(Expr::zero());
        assert!(substitute_ansatz(&o, &Ansatz::new(1), &SubEquationProfile::classical_tanh()).is_zero());
    }
}
