//! Closed-form travelling-wave solutions built from solved branches, and
//! their verification by residual.

mod residual;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra_system::Branch;
use crate::phi_calculus::{coeff_name, ProfileMode, SubEquationProfile, SIGMA};
use crate::poly::Poly;
use crate::scalar::json_e12;
use crate::special_fn::{gamma, generalized_fn_signed, FractionalOrder, GenFn, SpecialFnError};
use crate::travelling_wave::frame_symbol;
use crate::Scalar;

pub use residual::{
    alpha_limit_check, residual_fractional, residual_ode, residual_pde, riccati_probe, AlphaDeviation,
    EquationForm, FractionalGrid, Grid, ResidualReport,
};

/// Relative tolerance for a branch constraint to count as satisfied.
pub const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("denominator `{0}` vanishes at the given parameter values")]
    DenominatorZero(String),
    #[error("no value for `{0}`")]
    MissingParameter(String),
    #[error("every grid point lies within the pole exclusion radius")]
    PoleOnGrid,
    #[error("pole at ξ = {0}")]
    Pole(f64),
    #[error("integer-order residuals need α = 1, got α = {0}")]
    NotClassical(f64),
    #[error("no {0} family among the fractional solutions")]
    FamilyMismatch(String),
    #[error("solution is singular on the fractional grid at ξ = {0}")]
    SingularOnInterval(f64),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Tanh,
    Coth,
    Tan,
    Cot,
    Rational,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Tanh => "tanh",
            FamilyKind::Coth => "coth",
            FamilyKind::Tan => "tan",
            FamilyKind::Cot => "cot",
            FamilyKind::Rational => "rational",
        }
    }

    /// Families admitted by the sign of `σ`.
    pub fn for_sigma(sigma: f64) -> Vec<FamilyKind> {
        if sigma < 0.0 {
            vec![FamilyKind::Tanh, FamilyKind::Coth]
        } else if sigma > 0.0 {
            vec![FamilyKind::Tan, FamilyKind::Cot]
        } else {
            vec![FamilyKind::Rational]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyMode {
    Classical,
    AlphaGeneralized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Family {
    pub kind: FamilyKind,
    pub mode: FamilyMode,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            FamilyMode::Classical => write!(f, "{}", self.kind.name()),
            FamilyMode::AlphaGeneralized => write!(f, "{}_alpha", self.kind.name()),
        }
    }
}

/// Numeric `ξ = Σ coeff · var` (for example `k x + m y + c t`).
#[derive(Clone, Debug, PartialEq)]
pub struct NumericFrame<T> {
    pub coeffs: BTreeMap<String, T>,
}

impl<T: Scalar> NumericFrame<T> {
    /// Point coordinates missing from `point` count as zero.
    pub fn xi(&self, point: &BTreeMap<String, T>) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, (v, k)| acc + *k * point.get(v).copied().unwrap_or_else(T::zero))
    }
}

/// `sign(x)·|x|^α`, the odd extension used for α-powers of signed quantities.
pub fn signed_pow<T: Scalar>(x: T, alpha: T) -> T {
    if x < T::zero() {
        -(-x).powf(alpha)
    } else {
        x.powf(alpha)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormSolution<T> {
    pub family: Family,
    /// `ClassicalTanh` means `φ = tanh ξ` itself (the `σ = −1` normalization with the sign absorbed).
    pub profile: ProfileMode,
    /// `a_0 .. a_n`.
    pub coeffs: Vec<T>,
    pub frame: NumericFrame<T>,
    pub sigma: T,
    pub omega: T,
    pub alpha: FractionalOrder<T>,
    /// Every bound symbol: parameters, frame atoms, `σ` and the `a_i`.
    pub values: BTreeMap<String, T>,
    pub constraint_residuals: Vec<T>,
    pub constraint_violated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructOptions<T> {
    pub alpha: T,
    pub omega: T,
}

impl<T: Scalar> Default for ConstructOptions<T> {
    fn default() -> Self {
        ConstructOptions { alpha: T::one(), omega: T::zero() }
    }
}

/// Evaluation with a scale: `(p(values), Σ |term|)`.
fn eval_with_scale<T: Scalar>(p: &Poly, values: &BTreeMap<String, T>) -> Result<(T, T), VerifyError> {
    let mut v = T::zero();
    let mut s = T::zero();
    for (m, c) in p.terms() {
        let t = T::from_rational(c) * m.eval(values).map_err(VerifyError::MissingParameter)?;
        v = v + t;
        s = s + t.abs();
    }
    Ok((v, s))
}

fn nonzero<T: Scalar>(p: &Poly, values: &BTreeMap<String, T>) -> Result<(), VerifyError> {
    let (v, s) = eval_with_scale(p, values)?;
    if v.abs() <= T::lit(1e-14) * s.max(T::one()) {
        return Err(VerifyError::DenominatorZero(p.to_string()));
    }
    Ok(())
}

/// One solution per family admitted by the profile (and the sign of `σ`).
///
/// `params` binds PDE parameters, the frame base values (`k`, `m`, `c`),
/// `σ` in Riccati mode and any free unknowns; free unknowns left unbound
/// default to zero. Fractional profiles bind the α-atoms `k_α = sign(k)|k|^α`.
pub fn construct_solutions<T: Scalar>(
    b: &Branch,
    profile: &SubEquationProfile,
    params: &BTreeMap<String, T>,
    opts: &ConstructOptions<T>,
) -> Result<Vec<ClosedFormSolution<T>>, VerifyError> {
    let alpha = if profile.fractional { opts.alpha } else { T::one() };
    let order = FractionalOrder::new(alpha)?;
    let mut values = params.clone();
    let mut frame = NumericFrame { coeffs: BTreeMap::new() };
    for var in ["x", "y", "t"] {
        let base = frame_symbol(var, false).expect("standard variable");
        if let Some(&v) = params.get(&base) {
            frame.coeffs.insert(var.to_string(), v);
            if profile.fractional {
                values.insert(frame_symbol(var, true).expect("standard variable"), signed_pow(v, alpha));
            }
        }
    }
    let sigma = match profile.mode {
        ProfileMode::ClassicalTanh => -T::one(),
        ProfileMode::Riccati => *params.get(SIGMA).ok_or_else(|| VerifyError::MissingParameter(SIGMA.into()))?,
    };
    values.insert(SIGMA.to_string(), sigma);
    for f in &b.free {
        values.entry(f.clone()).or_insert_with(T::zero);
    }

    // assignments may refer to one another; bind in dependency order
    let mut pending: Vec<_> = b.assignments.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut rest = Vec::new();
        for (name, r) in pending {
            if r.vars().iter().all(|v| values.contains_key(v)) {
                nonzero(&r.den, &values)?;
                let v = r.eval(&values).map_err(VerifyError::MissingParameter)?;
                values.insert(name.clone(), v);
            } else {
                rest.push((name, r));
            }
        }
        if rest.len() == before {
            let missing = rest[0].1.vars().into_iter().find(|v| !values.contains_key(v)).expect("unbound variable");
            return Err(VerifyError::MissingParameter(missing));
        }
        pending = rest;
    }
    for d in &b.denominators {
        nonzero(d, &values)?;
    }

    let degree = b
        .assignments
        .keys()
        .chain(&b.free)
        .filter_map(|n| n.strip_prefix("a_").and_then(|i| i.parse::<u32>().ok()))
        .max()
        .unwrap_or(0);
    let coeffs = (0..=degree)
        .map(|i| values.get(&coeff_name(i)).copied().unwrap_or_else(T::zero))
        .collect::<Vec<_>>();

    let mut constraint_residuals = Vec::with_capacity(b.constraints.len());
    let mut violated = false;
    for c in &b.constraints {
        let (v, s) = eval_with_scale(c, &values)?;
        if v.abs() > T::lit(CONSTRAINT_TOL) * s.max(T::one()) {
            violated = true;
        }
        constraint_residuals.push(v);
    }

    let (kinds, mode) = match profile.mode {
        ProfileMode::ClassicalTanh => (vec![FamilyKind::Tanh, FamilyKind::Coth], FamilyMode::Classical),
        ProfileMode::Riccati => (
            FamilyKind::for_sigma(sigma.to_f64_lossy()),
            if profile.fractional { FamilyMode::AlphaGeneralized } else { FamilyMode::Classical },
        ),
    };
    Ok(kinds
        .into_iter()
        .map(|kind| ClosedFormSolution {
            family: Family { kind, mode },
            profile: profile.mode,
            coeffs: coeffs.clone(),
            frame: frame.clone(),
            sigma,
            omega: opts.omega,
            alpha: order,
            values: values.clone(),
            constraint_residuals: constraint_residuals.clone(),
            constraint_violated: violated,
        })
        .collect())
}

fn horner<T: Scalar>(p: &[T], x: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

impl<T: Scalar> ClosedFormSolution<T> {
    /// `(r0, r2)` of the sub-equation `φ' = r0 + r2 φ²` the family satisfies.
    pub fn riccati_coefficients(&self) -> (T, T) {
        match self.profile {
            ProfileMode::ClassicalTanh => (T::one(), -T::one()),
            ProfileMode::Riccati => (self.sigma, T::one()),
        }
    }

    fn generalized(&self, f: GenFn, x: T) -> Result<T, VerifyError> {
        Ok(generalized_fn_signed(f, self.alpha.value(), x)?)
    }

    /// `φ(ξ)` (or `Φ(ξ)`), erroring at poles.
    pub fn phi(&self, xi: T) -> Result<T, VerifyError> {
        let alpha = self.alpha.value();
        let classical = self.family.mode == FamilyMode::Classical || self.alpha.is_classical();
        let pole = || VerifyError::Pole(xi.to_f64_lossy());
        let eps = T::lit(crate::special_fn::POLE_EPS);
        if self.profile == ProfileMode::ClassicalTanh {
            return match self.family.kind {
                FamilyKind::Tanh => Ok(xi.tanh()),
                _ => {
                    let t = xi.tanh();
                    if t.abs() < eps {
                        Err(pole())
                    } else {
                        Ok(t.recip())
                    }
                }
            };
        }
        let s = self.sigma.abs().sqrt();
        let z = s * xi;
        let v = match (self.family.kind, classical) {
            (FamilyKind::Tanh, true) => -s * z.tanh(),
            (FamilyKind::Tanh, false) => -s * self.generalized(GenFn::Tanh, z)?,
            (FamilyKind::Coth, true) => {
                let t = z.tanh();
                if t.abs() < eps {
                    return Err(pole());
                }
                -s / t
            }
            (FamilyKind::Coth, false) => -s * self.generalized(GenFn::Coth, z).map_err(|_| pole())?,
            (FamilyKind::Tan, true) => {
                let c = z.cos();
                if c.abs() < eps {
                    return Err(pole());
                }
                s * z.sin() / c
            }
            (FamilyKind::Tan, false) => s * self.generalized(GenFn::Tan, z).map_err(|_| pole())?,
            (FamilyKind::Cot, true) => {
                let sn = z.sin();
                if sn.abs() < eps {
                    return Err(pole());
                }
                -s * z.cos() / sn
            }
            (FamilyKind::Cot, false) => -s * self.generalized(GenFn::Cot, z).map_err(|_| pole())?,
            (FamilyKind::Rational, _) => {
                let d = signed_pow(xi, alpha) + self.omega;
                if d.abs() < eps {
                    return Err(pole());
                }
                -gamma(T::one() + alpha) / d
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(pole())
        }
    }

    /// Coefficient vectors (in φ) of `u, u', …, u^{(order)}` via `d/dξ = (r0 + r2 φ²) d/dφ`.
    pub fn derivative_polys(&self, order: usize) -> Vec<Vec<T>> {
        let (r0, r2) = self.riccati_coefficients();
        let mut out = vec![self.coeffs.clone()];
        for _ in 0..order {
            let p = out.last().expect("nonempty");
            let mut next = vec![T::zero(); p.len() + 1];
            for (i, &c) in p.iter().enumerate().skip(1) {
                let d = c * T::lit(i as f64);
                next[i - 1] = next[i - 1] + d * r0;
                next[i + 1] = next[i + 1] + d * r2;
            }
            while next.len() > 1 && next.last() == Some(&T::zero()) {
                next.pop();
            }
            out.push(next);
        }
        out
    }

    /// `u(ξ)`.
    pub fn u_xi(&self, xi: T) -> Result<T, VerifyError> {
        Ok(horner(&self.coeffs, self.phi(xi)?))
    }

    /// `u` at a point `{x: …, y: …, t: …}`.
    pub fn u_at(&self, point: &BTreeMap<String, T>) -> Result<T, VerifyError> {
        self.u_xi(self.frame.xi(point))
    }

    /// `[u, u', …, u^{(order)}]` at `ξ`, exact up to rounding.
    pub fn derivatives_at(&self, xi: T, polys: &[Vec<T>]) -> Result<Vec<T>, VerifyError> {
        let phi = self.phi(xi)?;
        Ok(polys.iter().map(|p| horner(p, phi)).collect())
    }

    /// Poles of the family inside `[lo, hi]`.
    pub fn poles(&self, lo: T, hi: T) -> Vec<T> {
        let alpha = self.alpha.value();
        let classical = self.family.mode == FamilyMode::Classical || self.alpha.is_classical();
        let s = self.sigma.abs().sqrt();
        let pi = T::PI();
        let half = T::lit(0.5);
        let lattice = |offset: T| -> Vec<T> {
            let period = pi / s;
            let first = ((lo / period) - offset).ceil();
            let mut out = Vec::new();
            let mut n = first;
            loop {
                let p = (n + offset) * period;
                if p > hi {
                    break;
                }
                out.push(p);
                n = n + T::one();
            }
            out
        };
        let mut out = match self.family.kind {
            FamilyKind::Tanh => Vec::new(),
            FamilyKind::Coth => vec![T::zero()],
            FamilyKind::Rational => {
                let w = self.omega;
                let p = if w == T::zero() { T::zero() } else { -signed_pow(w, alpha.recip()) };
                vec![p]
            }
            FamilyKind::Tan if classical => lattice(half),
            FamilyKind::Cot if classical => lattice(T::zero()),
            FamilyKind::Tan => self.scan_zeros(GenFn::Cos, lo, hi),
            FamilyKind::Cot => {
                let mut z = self.scan_zeros(GenFn::Sin, lo, hi);
                z.push(T::zero());
                z
            }
        };
        out.retain(|p| *p >= lo && *p <= hi);
        out.sort_by(|a, b| a.partial_cmp(b).expect("finite poles"));
        out.dedup();
        out
    }

    /// Sign changes of `f_α(√|σ| ξ)` on `[lo, hi]`, refined by bisection.
    fn scan_zeros(&self, f: GenFn, lo: T, hi: T) -> Vec<T> {
        let s = self.sigma.abs().sqrt();
        let g = |xi: T| self.generalized(f, s * xi).ok();
        let cells = 400;
        let h = (hi - lo) / T::lit(cells as f64);
        let mut out = Vec::new();
        let mut a = lo;
        let mut ga = g(a);
        for i in 1..=cells {
            let b = lo + h * T::lit(i as f64);
            let gb = g(b);
            if let (Some(va), Some(vb)) = (ga, gb) {
                if va == T::zero() {
                    out.push(a);
                } else if va * vb < T::zero() {
                    let (mut l, mut r, mut vl) = (a, b, va);
                    for _ in 0..60 {
                        let m = (l + r) * T::lit(0.5);
                        match g(m) {
                            Some(vm) if vm * vl > T::zero() => {
                                l = m;
                                vl = vm;
                            }
                            _ => r = m,
                        }
                    }
                    out.push((l + r) * T::lit(0.5));
                }
            }
            a = b;
            ga = gb;
        }
        out
    }

    /// Human-readable closed form, e.g. `u = a_0 + a_1·tanh(ξ)` with values substituted.
    pub fn formula(&self) -> String {
        let phi = match (self.profile, self.family.kind) {
            (ProfileMode::ClassicalTanh, k) => format!("{}(ξ)", k.name()),
            (_, FamilyKind::Rational) if self.alpha.is_classical() => "-1/(ξ + ω)".to_string(),
            (_, FamilyKind::Rational) => "-Γ(1+α)/(ξ^α + ω)".to_string(),
            (_, k) => {
                let sign = if k == FamilyKind::Tan { "" } else { "-" };
                let f = match self.family.mode {
                    FamilyMode::Classical => k.name().to_string(),
                    FamilyMode::AlphaGeneralized => format!("{}_α", k.name()),
                };
                format!("{sign}√|σ|·{f}(√|σ|·ξ)")
            }
        };
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != T::zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})·Φ"),
                _ => format!("({c})·Φ^{i}"),
            })
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        format!("u = {body}, Φ = {phi}")
    }

    pub fn to_json(&self) -> Value {
        let f = |v: T| json_e12(v.to_f64_lossy());
        let frame: serde_json::Map<String, Value> = self.frame.coeffs.iter().map(|(k, v)| (k.clone(), f(*v))).collect();
        json!({
            "family": self.family.to_string(),
            "mode": self.family.mode,
            "formula": self.formula(),
            "coefficients": self.coeffs.iter().map(|c| f(*c)).collect::<Vec<_>>(),
            "frame": frame,
            "sigma": f(self.sigma),
            "omega": f(self.omega),
            "alpha": f(self.alpha.value()),
            "constraint_residuals": self.constraint_residuals.iter().map(|c| f(*c)).collect::<Vec<_>>(),
            "constraint_violated": self.constraint_violated,
        })
    }
}

#[cfg(test)]
mod tests;
