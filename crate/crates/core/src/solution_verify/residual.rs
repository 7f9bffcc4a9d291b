//! Residual reports for closed-form solutions.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::{construct_solutions, ClosedFormSolution, ConstructOptions, VerifyError};
use crate::algebra_system::Branch;
use crate::pde_ast::{Expr, PdeDefinition};
use crate::phi_calculus::SubEquationProfile;
use crate::scalar::json_e12;
use crate::special_fn::jumarie_l1;
use crate::travelling_wave::{frame_symbol, ReducedOde};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationForm {
    OriginalPde,
    ReducedOde,
    FractionalRiccati,
}

/// Uniform grid in ξ with a pole exclusion radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
    pub exclusion_radius: T,
}

impl<T: Scalar> Default for Grid<T> {
    fn default() -> Self {
        Grid { lo: T::lit(-5.0), hi: T::lit(5.0), points: 1001, exclusion_radius: T::lit(1e-2) }
    }
}

impl<T: Scalar> Grid<T> {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.points < 2 || !(self.hi > self.lo) {
            return Err(VerifyError::Grid(format!("need lo < hi and at least 2 points, got {}", self.describe())));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<T> {
        let h = (self.hi - self.lo) / T::lit((self.points - 1) as f64);
        (0..self.points).map(|i| self.lo + h * T::lit(i as f64)).collect()
    }

    pub fn describe(&self) -> String {
        format!("xi in [{}, {}], {} points", self.lo, self.hi, self.points)
    }
}

/// Uniform grid `ξ_i = i·end/cells` on `[0, end]`; residuals are reported for `ξ ≥ report_from`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalGrid<T> {
    pub end: T,
    pub cells: usize,
    pub report_from: T,
}

impl<T: Scalar> Default for FractionalGrid<T> {
    fn default() -> Self {
        FractionalGrid { end: T::lit(3.0), cells: 3000, report_from: T::lit(0.5) }
    }
}

impl<T: Scalar> FractionalGrid<T> {
    fn step(&self) -> T {
        self.end / T::lit(self.cells as f64)
    }

    fn validate(&self) -> Result<(), VerifyError> {
        if self.cells < 2 || !(self.end > self.report_from) || self.report_from <= T::zero() {
            return Err(VerifyError::Grid(format!(
                "need 0 < report_from < end and at least 2 cells, got {}",
                self.describe()
            )));
        }
        Ok(())
    }

    /// Indices of the reported nodes.
    fn reported(&self) -> impl Iterator<Item = usize> + '_ {
        let h = self.step();
        (0..=self.cells).filter(move |&i| h * T::lit(i as f64) >= self.report_from)
    }

    pub fn describe(&self) -> String {
        format!("xi in [0, {}], {} cells, reported on [{}, {}]", self.end, self.cells, self.report_from, self.end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport<T> {
    pub max_abs: T,
    pub mean_abs: T,
    pub grid: String,
    /// Points that entered the statistics.
    pub points: usize,
    pub excluded_points: Vec<T>,
    pub equation_form: EquationForm,
}

impl<T: Scalar> ResidualReport<T> {
    pub fn to_json(&self) -> Value {
        let f = |v: T| json_e12(v.to_f64_lossy());
        json!({
            "max_abs": f(self.max_abs),
            "mean_abs": f(self.mean_abs),
            "grid": self.grid,
            "points": self.points,
            "excluded_points": self.excluded_points.iter().map(|x| f(*x)).collect::<Vec<_>>(),
            "equation_form": self.equation_form,
        })
    }

    fn from_values(
        values: impl IntoIterator<Item = T>,
        grid: String,
        excluded_points: Vec<T>,
        equation_form: EquationForm,
    ) -> Result<Self, VerifyError> {
        let (mut max_abs, mut sum, mut points) = (T::zero(), T::zero(), 0usize);
        for v in values {
            let a = v.abs();
            // NaN must surface in max_abs rather than be skipped by the comparison
            if a > max_abs || a.is_nan() {
                max_abs = a;
            }
            sum = sum + a;
            points += 1;
        }
        if points == 0 {
            return Err(VerifyError::PoleOnGrid);
        }
        Ok(ResidualReport {
            max_abs,
            mean_abs: sum / T::lit(points as f64),
            grid,
            points,
            excluded_points,
            equation_form,
        })
    }
}

/// One term as `coefficient · Π (u^{(order)})^power`.
type Compiled<T> = Vec<(T, Vec<(usize, u32)>)>;

fn compile<T: Scalar>(
    e: &Expr,
    values: &BTreeMap<String, T>,
    frame: Option<&super::NumericFrame<T>>,
) -> Result<Compiled<T>, VerifyError> {
    let mut out = Vec::with_capacity(e.terms().len());
    for t in e.terms() {
        let mut coeff = T::from_rational(&t.coeff) * t.params.eval(values).map_err(VerifyError::MissingParameter)?;
        let mut factors = Vec::with_capacity(t.factors.len());
        for f in &t.factors {
            if let Some(frame) = frame {
                for (var, n) in &f.orders {
                    let k = frame.coeffs.get(var).ok_or_else(|| {
                        VerifyError::MissingParameter(frame_symbol(var, false).unwrap_or_else(|| var.clone()))
                    })?;
                    coeff = coeff * k.powi((n * f.power) as i32);
                }
            }
            factors.push((f.total_order() as usize, f.power));
        }
        out.push((coeff, factors));
    }
    Ok(out)
}

fn max_order<T>(c: &Compiled<T>) -> usize {
    c.iter().flat_map(|(_, f)| f.iter().map(|(o, _)| *o)).max().unwrap_or(0)
}

fn eval_compiled<T: Scalar>(c: &Compiled<T>, deriv: impl Fn(usize) -> T) -> T {
    c.iter().fold(T::zero(), |acc, (k, fs)| acc + fs.iter().fold(*k, |p, &(o, pw)| p * deriv(o).powi(pw as i32)))
}

/// Pointwise residual over `nodes`, excluding poles within `radius` and points where evaluation fails.
fn run<T: Scalar>(
    s: &ClosedFormSolution<T>,
    nodes: &[T],
    radius: T,
    grid: String,
    form: EquationForm,
    f: impl Fn(T) -> Result<T, VerifyError>,
) -> Result<ResidualReport<T>, VerifyError> {
    let (lo, hi) = match (nodes.first(), nodes.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(VerifyError::Grid("empty grid".into())),
    };
    let poles = s.poles(lo - radius, hi + radius);
    let mut excluded = Vec::new();
    let mut vals = Vec::with_capacity(nodes.len());
    for &xi in nodes {
        if poles.iter().any(|p| (xi - *p).abs() < radius) {
            excluded.push(xi);
            continue;
        }
        match f(xi) {
            Ok(v) if v.is_finite() => vals.push(v),
            Ok(_) | Err(VerifyError::Pole(_)) | Err(VerifyError::SpecialFn(_)) => excluded.push(xi),
            Err(e) => return Err(e),
        }
    }
    ResidualReport::from_values(vals, grid, excluded, form)
}

/// Residual of the original integer-order PDE, with `ξ`-derivatives from the
/// exact sub-equation algebra `d/dξ = (r0 + r2 φ²) d/dφ`.
///
/// Fractional definitions are accepted at `α = 1`, where `D^{jα}` is the `j`-th derivative.
pub fn residual_pde<T: Scalar>(
    s: &ClosedFormSolution<T>,
    p: &PdeDefinition,
    grid: &Grid<T>,
) -> Result<ResidualReport<T>, VerifyError> {
    if !s.alpha.is_classical() {
        return Err(VerifyError::NotClassical(s.alpha.value().to_f64_lossy()));
    }
    grid.validate()?;
    let c = compile(&p.lhs_minus_rhs, &s.values, Some(&s.frame))?;
    let polys = s.derivative_polys(max_order(&c));
    run(s, &grid.nodes(), grid.exclusion_radius, grid.describe(), EquationForm::OriginalPde, |xi| {
        let d = s.derivatives_at(xi, &polys)?;
        Ok(eval_compiled(&c, |o| d[o]))
    })
}

/// Residual of a reduced (possibly integrated) ODE in `ξ`, exact derivatives.
pub fn residual_ode<T: Scalar>(
    s: &ClosedFormSolution<T>,
    o: &ReducedOde,
    grid: &Grid<T>,
) -> Result<ResidualReport<T>, VerifyError> {
    if !s.alpha.is_classical() {
        return Err(VerifyError::NotClassical(s.alpha.value().to_f64_lossy()));
    }
    grid.validate()?;
    ode_on_nodes(s, o, &grid.nodes(), grid.exclusion_radius, grid.describe())
}

fn ode_on_nodes<T: Scalar>(
    s: &ClosedFormSolution<T>,
    o: &ReducedOde,
    nodes: &[T],
    radius: T,
    desc: String,
) -> Result<ResidualReport<T>, VerifyError> {
    let c = compile(&o.expr, &s.values, None)?;
    let polys = s.derivative_polys(max_order(&c));
    run(s, nodes, radius, desc, EquationForm::ReducedOde, |xi| {
        let d = s.derivatives_at(xi, &polys)?;
        Ok(eval_compiled(&c, |k| d[k]))
    })
}

/// Samples `u` on the fractional grid; any pole inside `[0, end]` is an error.
fn sample<T: Scalar>(g: &FractionalGrid<T>, f: impl Fn(T) -> Result<T, VerifyError>) -> Result<Vec<f64>, VerifyError> {
    let h = g.step();
    (0..=g.cells)
        .map(|i| {
            let xi = h * T::lit(i as f64);
            match f(xi) {
                Ok(v) if v.is_finite() => Ok(v.to_f64_lossy()),
                _ => Err(VerifyError::SingularOnInterval(xi.to_f64_lossy())),
            }
        })
        .collect()
}

/// Residual of a fractional reduced ODE in which `u^{(j)}` stands for `D^{jα} u`.
///
/// Each `D^{jα}` is the `j`-fold L1 Jumarie derivative of the sampled
/// solution (lower terminal `ξ = 0`). At `α = 1` this is the exact
/// [`residual_ode`] on the reported nodes. The result is a measurement: no
/// threshold is implied for `α < 1`.
pub fn residual_fractional<T: Scalar>(
    s: &ClosedFormSolution<T>,
    o: &ReducedOde,
    g: &FractionalGrid<T>,
) -> Result<ResidualReport<T>, VerifyError> {
    g.validate()?;
    let h = g.step();
    if s.alpha.is_classical() {
        let nodes: Vec<T> = g.reported().map(|i| h * T::lit(i as f64)).collect();
        return ode_on_nodes(s, o, &nodes, T::zero(), g.describe());
    }
    let c = compile(&o.expr, &s.values, None)?;
    let alpha = s.alpha.value().to_f64_lossy();
    let hf = h.to_f64_lossy();
    let mut derivs = vec![sample(g, |xi| s.u_xi(xi))?];
    for _ in 0..max_order(&c) {
        let next = jumarie_l1(derivs.last().expect("nonempty"), hf, alpha);
        derivs.push(next);
    }
    let vals: Vec<T> = g.reported().map(|i| eval_compiled(&c, |k| T::lit(derivs[k][i]))).collect();
    ResidualReport::from_values(vals, g.describe(), Vec::new(), EquationForm::ReducedOde)
}

/// `D^α Φ − (r0 + r2 Φ²)` for the family's sub-equation function, L1 Jumarie derivative.
pub fn riccati_probe<T: Scalar>(s: &ClosedFormSolution<T>, g: &FractionalGrid<T>) -> Result<ResidualReport<T>, VerifyError> {
    g.validate()?;
    let (r0, r2) = s.riccati_coefficients();
    let phi = sample(g, |xi| s.phi(xi))?;
    let d = jumarie_l1(&phi, g.step().to_f64_lossy(), s.alpha.value().to_f64_lossy());
    let vals: Vec<T> = g
        .reported()
        .map(|i| {
            let p = T::lit(phi[i]);
            T::lit(d[i]) - (r0 + r2 * p * p)
        })
        .collect();
    ResidualReport::from_values(vals, g.describe(), Vec::new(), EquationForm::FractionalRiccati)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaDeviation<T> {
    pub alpha: T,
    pub max_deviation: T,
    pub points: usize,
}

impl<T: Scalar> AlphaDeviation<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": json_e12(self.alpha.to_f64_lossy()),
            "max_deviation": json_e12(self.max_deviation.to_f64_lossy()),
            "points": self.points,
        })
    }
}

/// `max |u_α(ξ) − u_1(ξ)|` over the grid for each `α`, where `u_α` is the
/// fractional family matching `classical` and both use the same parameters.
pub fn alpha_limit_check<T: Scalar>(
    classical: &ClosedFormSolution<T>,
    fractional: &Branch,
    profile: &SubEquationProfile,
    params: &BTreeMap<String, T>,
    alphas: &[T],
    grid: &Grid<T>,
) -> Result<Vec<AlphaDeviation<T>>, VerifyError> {
    grid.validate()?;
    let nodes = grid.nodes();
    let r = grid.exclusion_radius;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let opts = ConstructOptions { alpha, omega: classical.omega };
        let sol = construct_solutions(fractional, profile, params, &opts)?
            .into_iter()
            .find(|s| s.family.kind == classical.family.kind)
            .ok_or_else(|| VerifyError::FamilyMismatch(classical.family.kind.name().into()))?;
        let mut poles = classical.poles(grid.lo - r, grid.hi + r);
        poles.extend(sol.poles(grid.lo - r, grid.hi + r));
        let (mut max_dev, mut points) = (T::zero(), 0usize);
        for &xi in &nodes {
            if poles.iter().any(|p| (xi - *p).abs() < r) {
                continue;
            }
            if let (Ok(a), Ok(b)) = (sol.u_xi(xi), classical.u_xi(xi)) {
                max_dev = max_dev.max((a - b).abs());
                points += 1;
            }
        }
        if points == 0 {
            return Err(VerifyError::PoleOnGrid);
        }
        out.push(AlphaDeviation { alpha, max_deviation: max_dev, points });
    }
    Ok(out)
}
