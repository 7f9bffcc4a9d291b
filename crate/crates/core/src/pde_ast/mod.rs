//! Differential-polynomial expressions in a single unknown `u`.
//!
//! An [`Expr`] is a normalized sum of [`Term`]s: a rational coefficient, a
//! monomial in named parameters, and a product of derivative factors of `u`.
//! In fractional PDEs every derivative order is stored as a multiple of the
//! single order symbol α, so `u_{x:2}` means `∂^{2α}u/∂x^{2α}` there.

mod parse;
mod print;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::poly::Monomial;
use crate::Rational;

pub use parse::parse_pde;
pub use print::{print_expr, print_pde};

/// One factor `(∂^orders u)^power`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DerivFactor {
    pub orders: BTreeMap<String, u32>,
    pub power: u32,
}

impl DerivFactor {
    pub fn u() -> Self {
        DerivFactor { orders: BTreeMap::new(), power: 1 }
    }

    pub fn d(var: &str, order: u32) -> Self {
        let mut orders = BTreeMap::new();
        if order > 0 {
            orders.insert(var.to_string(), order);
        }
        DerivFactor { orders, power: 1 }
    }

    pub fn with_power(mut self, power: u32) -> Self {
        self.power = power;
        self
    }

    pub fn total_order(&self) -> u32 {
        self.orders.values().sum()
    }

    pub fn order_in(&self, var: &str) -> u32 {
        self.orders.get(var).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub params: Monomial,
    pub factors: Vec<DerivFactor>,
}

impl Term {
    pub fn new(coeff: Rational, params: Monomial, factors: Vec<DerivFactor>) -> Self {
        let mut t = Term { coeff, params, factors };
        t.merge_factors();
        t
    }

    fn merge_factors(&mut self) {
        let mut merged: BTreeMap<BTreeMap<String, u32>, u32> = BTreeMap::new();
        for f in self.factors.drain(..) {
            if f.power > 0 {
                *merged.entry(f.orders).or_insert(0) += f.power;
            }
        }
        self.factors = merged.into_iter().map(|(orders, power)| DerivFactor { orders, power }).collect();
    }

    /// Degree in `u` and its derivatives.
    pub fn u_degree(&self) -> u32 {
        self.factors.iter().map(|f| f.power).sum()
    }

    /// Σ power·order over all factors.
    pub fn derivative_weight(&self) -> u32 {
        self.factors.iter().map(|f| f.power * f.total_order()).sum()
    }

    pub fn mul(&self, other: &Term) -> Term {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Term::new(&self.coeff * &other.coeff, self.params.mul(&other.params), factors)
    }

    fn signature(&self) -> (Vec<DerivFactor>, Monomial) {
        (self.factors.clone(), self.params.clone())
    }
}

/// Canonical order: total derivative weight descending, then factor
/// structure (variable names, orders, powers), then parameters.
fn canonical_cmp(a: &Term, b: &Term) -> Ordering {
    b.derivative_weight()
        .cmp(&a.derivative_weight())
        .then_with(|| {
            let ka: Vec<_> = a.factors.iter().rev().collect();
            let kb: Vec<_> = b.factors.iter().rev().collect();
            ka.cmp(&kb)
        })
        .then_with(|| a.params.cmp(&b.params))
}

/// Normalized differential polynomial. The empty term list is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn constant(c: Rational) -> Self {
        Expr::from_terms(vec![Term::new(c, Monomial::one(), vec![])])
    }

    pub fn param(name: &str) -> Self {
        Expr::from_terms(vec![Term::new(Rational::one(), Monomial::var(name), vec![])])
    }

    pub fn factor(f: DerivFactor) -> Self {
        Expr::from_terms(vec![Term::new(Rational::one(), Monomial::one(), vec![f])])
    }

    pub fn u() -> Self {
        Expr::factor(DerivFactor::u())
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut e = Expr { terms };
        e.normalize();
        e
    }

    /// Merges equal signatures, drops zero coefficients and sorts canonically.
    pub fn normalize(&mut self) {
        let mut acc: BTreeMap<(Vec<DerivFactor>, Monomial), Rational> = BTreeMap::new();
        for mut t in self.terms.drain(..) {
            t.merge_factors();
            *acc.entry(t.signature()).or_insert_with(Rational::zero) += t.coeff;
        }
        let mut terms: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((factors, params), coeff)| Term { coeff, params, factors })
            .collect();
        terms.sort_by(canonical_cmp);
        self.terms = terms;
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Expr) -> Expr {
        Expr::from_terms(self.terms.iter().chain(other.terms.iter()).cloned().collect())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        Expr::from_terms(
            self.terms
                .iter()
                .map(|t| Term { coeff: &t.coeff * c, ..t.clone() })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.mul(b));
            }
        }
        Expr::from_terms(out)
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut acc = Expr::constant(Rational::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Total derivative with respect to `var` (one order unit), by the product rule.
    ///
    /// In fractional mode this is the Leibniz-form rule `D^α[fg] = g·D^α f + f·D^α g`,
    /// which has the same algebra as the integer case.
    pub fn differentiate(&self, var: &str) -> Expr {
        let mut out = Vec::new();
        for t in &self.terms {
            for (i, f) in t.factors.iter().enumerate() {
                let mut factors = t.factors.clone();
                factors[i].power -= 1;
                let mut raised = f.clone();
                raised.power = 1;
                *raised.orders.entry(var.to_string()).or_insert(0) += 1;
                factors.push(raised);
                let coeff = &t.coeff * Rational::from_integer(f.power.into());
                out.push(Term::new(coeff, t.params.clone(), factors));
            }
        }
        Expr::from_terms(out)
    }

    pub fn differentiate_n(&self, var: &str, n: u32) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.differentiate(var))
    }

    /// Variables appearing in any derivative multi-index.
    pub fn derivative_vars(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .terms
            .iter()
            .flat_map(|t| t.factors.iter().flat_map(|f| f.orders.keys().cloned()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.iter().flat_map(|t| t.params.vars().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn max_order(&self) -> u32 {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(DerivFactor::total_order))
            .max()
            .unwrap_or(0)
    }

    /// GCD monomial of all parameter monomials.
    pub fn param_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.params.clone(), |g, t| g.gcd(&t.params))
    }

    pub fn div_params(&self, m: &Monomial) -> Option<Expr> {
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            out.push(Term { params: t.params.div(m)?, ..t.clone() });
        }
        Some(Expr::from_terms(out))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_expr(self, false))
    }
}

/// Unexpanded expression tree as written in the DSL, possibly with
/// derivative operators applied to compound subexpressions.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprTree {
    Num(Rational),
    Param(String),
    U(BTreeMap<String, u32>),
    Sum(Vec<ExprTree>),
    Product(Vec<ExprTree>),
    Neg(Box<ExprTree>),
    Pow(Box<ExprTree>, u32),
    Deriv(Box<ExprTree>, BTreeMap<String, u32>),
}

/// Pushes every derivative onto atomic `u` factors and returns the normalized expansion.
pub fn expand_derivatives(e: &ExprTree) -> Expr {
    match e {
        ExprTree::Num(c) => Expr::constant(c.clone()),
        ExprTree::Param(p) => Expr::param(p),
        ExprTree::U(orders) => Expr::factor(DerivFactor { orders: orders.clone(), power: 1 }),
        ExprTree::Sum(items) => items.iter().fold(Expr::zero(), |acc, t| acc.add(&expand_derivatives(t))),
        ExprTree::Product(items) => items
            .iter()
            .fold(Expr::constant(Rational::one()), |acc, t| acc.mul(&expand_derivatives(t))),
        ExprTree::Neg(inner) => expand_derivatives(inner).scale(&-Rational::one()),
        ExprTree::Pow(inner, n) => expand_derivatives(inner).pow(*n),
        ExprTree::Deriv(inner, orders) => {
            let mut acc = expand_derivatives(inner);
            for (var, n) in orders {
                acc = acc.differentiate_n(var, *n);
            }
            acc
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeDefinition {
    pub name: String,
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub lhs_minus_rhs: Expr,
    /// Order symbol of a fractional PDE (`None` for integer order).
    pub fractional: Option<String>,
}

impl PdeDefinition {
    pub fn is_fractional(&self) -> bool {
        self.fractional.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PdeError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared variable `{name}` at {line}:{col}")]
    UndeclaredVariable { name: String, line: usize, col: usize },
    #[error("undeclared parameter `{name}` at {line}:{col}")]
    UndeclaredParameter { name: String, line: usize, col: usize },
    #[error("fractional and integer derivative orders mixed at {line}:{col}")]
    MixedOrders { line: usize, col: usize },
    #[error("unsupported independent variable `{0}` (allowed: x, y, t)")]
    UnsupportedVariable(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn u_d(var: &str, n: u32) -> Expr {
        Expr::factor(DerivFactor::d(var, n))
    }

    #[test]
    fn square_second_derivative_matches_product_rule() {
        // (u^2)_xx = 2 u u_xx + 2 u_x^2
        let got = Expr::u().pow(2).differentiate_n("x", 2);
        let want = Expr::u()
            .mul(&u_d("x", 2))
            .scale(&int(2))
            .add(&u_d("x", 1).pow(2).scale(&int(2)));
        assert_eq!(got, want);
    }

    #[test]
    fn power_rule_for_u_to_the_n() {
        for n in [2u32, 3] {
            let got = Expr::u().pow(n).differentiate("x");
            let want = Expr::u().pow(n - 1).mul(&u_d("x", 1)).scale(&int(n as i64));
            assert_eq!(got, want);
        }
    }

    #[test]
    fn derivative_of_zero_is_zero() {
        assert!(Expr::zero().differentiate("x").is_zero());
    }

    #[test]
    fn normalization_is_idempotent_and_cancels() {
        let e = u_d("x", 2).sub(&u_d("x", 2));
        assert!(e.is_zero());
        let mut f = Expr::u().mul(&u_d("t", 1)).add(&u_d("x", 2));
        let g = f.clone();
        f.normalize();
        assert_eq!(f, g);
    }

    #[test]
    fn canonical_order_puts_highest_derivative_first() {
        let e = Expr::u().add(&u_d("x", 4)).add(&u_d("x", 2));
        let w: Vec<u32> = e.terms().iter().map(Term::derivative_weight).collect();
        assert_eq!(w, vec![4, 2, 0]);
    }
}
