//! Figure data on an (x, t) mesh and special-function tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::registry::{figure, lookup, Warning};
use super::{solve, Method, PdeSource, PipelineError, SolveOptions};
use crate::phi_calculus::SIGMA;
use crate::scalar::fmt_e12;
use crate::solution_verify::{construct_solutions, ConstructOptions, FamilyKind};
use crate::special_fn::{gamma, generalized_fn_signed, mittag_leffler_real, GenFn};

/// `points` equally spaced nodes on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mesh {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Mesh {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Mesh { lo, hi, points }
    }

    /// Parses `lo:hi:n`.
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        let bad = || PipelineError::Invalid(format!("mesh {s:?} is not lo:hi:n"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let points = parts[2].trim().parse().map_err(|_| bad())?;
        let m = Mesh { lo, hi, points };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi || self.points == 0 {
            return Err(PipelineError::Invalid(format!("invalid mesh [{}, {}] with {} points", self.lo, self.hi, self.points)));
        }
        if self.points == 1 && self.lo != self.hi {
            return Err(PipelineError::Invalid("a one-point mesh needs lo = hi".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.hi } else { self.lo + h * i as f64 }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub x: Mesh,
    pub t: Mesh,
    pub y: f64,
    /// Replaces caption values; may also bind `a_0` (default 0) or `σ`.
    pub overrides: BTreeMap<String, f64>,
    /// Orders for the fractional figures.
    pub alphas: Vec<f64>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            x: Mesh::new(-10.0, 10.0, 201),
            t: Mesh::new(0.0, 5.0, 51),
            y: 0.0,
            overrides: BTreeMap::new(),
            alphas: vec![0.7, 0.8, 0.9, 1.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct FigureData {
    pub number: u32,
    pub key: &'static str,
    pub caption: &'static str,
    /// Closed form of the plotted solution at `α = 1`.
    pub formula: String,
    pub csv: String,
    pub warnings: Vec<Warning>,
}

/// Samples the first branch's tanh-type family at the caption parameters.
pub fn figure_csv(n: u32, opts: &FigureOptions) -> Result<FigureData, PipelineError> {
    let fd = figure(n).ok_or_else(|| PipelineError::Invalid(format!("figure {n} is not in 1..=6")))?;
    opts.x.validate()?;
    opts.t.validate()?;
    let entry = lookup(fd.key, false).expect("figure keys are registered");
    let method = if entry.fractional { Method::Subeq } else { Method::Tanh };
    let mut params: BTreeMap<String, f64> = fd.params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let mut overrides = opts.overrides.clone();
    if let Some(s) = overrides.remove("sigma") {
        overrides.insert(SIGMA.into(), s);
    }
    params.extend(overrides);
    if let Some(s) = fd.sigma {
        params.entry(SIGMA.into()).or_insert(s);
    }
    let sigma = params.get(SIGMA).copied();
    let src = PdeSource::from_entry(entry);
    let log = solve(&src, &SolveOptions { method, sigma, ..SolveOptions::default() })?;
    let branch = &log.branches.first().ok_or_else(|| PipelineError::MissingBranch("0".into()))?.branch;

    let alphas = if entry.fractional { opts.alphas.clone() } else { vec![1.0] };
    let location = format!("Figure {n}");
    let mut warnings = Vec::new();
    let mut formula = String::new();
    let mut csv = String::new();
    csv.push_str(if entry.fractional { "alpha,x,t,u\n" } else { "x,t,u\n" });
    for &alpha in &alphas {
        let sols = construct_solutions(branch, &log.profile, &params, &ConstructOptions { alpha, omega: 0.0 })?;
        let s = sols
            .iter()
            .find(|s| matches!(s.family.kind, FamilyKind::Tanh | FamilyKind::Tan | FamilyKind::Rational))
            .unwrap_or(&sols[0]);
        if alpha == 1.0 || formula.is_empty() {
            formula = s.formula();
        }
        if s.constraint_violated {
            let res: Vec<String> = s.constraint_residuals.iter().map(|v| fmt_e12(*v)).collect();
            let cons: Vec<String> = branch.constraints.iter().map(|c| format!("{c} = 0")).collect();
            warnings.push(Warning::new(
                &location,
                format!(
                    "caption parameters ({}) violate the branch constraints [{}] at α = {} (residuals [{}]); plotted verbatim",
                    fd.caption,
                    cons.join(", "),
                    alpha,
                    res.join(", ")
                ),
            ));
        }
        for &t in &opts.t.nodes() {
            for &x in &opts.x.nodes() {
                let point: BTreeMap<String, f64> =
                    [("x".to_string(), x), ("y".to_string(), opts.y), ("t".to_string(), t)].into();
                let u = s.u_at(&point).unwrap_or(f64::NAN);
                if entry.fractional {
                    let _ = write!(csv, "{},", fmt_e12(alpha));
                }
                let _ = writeln!(csv, "{},{},{}", fmt_e12(x), fmt_e12(t), fmt_e12(u));
            }
        }
    }
    Ok(FigureData { number: n, key: fd.key, caption: fd.caption, formula, csv, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TabulateFn {
    MittagLeffler,
    Generalized(GenFn),
    Gamma,
}

impl TabulateFn {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ml" | "mittag_leffler" => Some(TabulateFn::MittagLeffler),
            "gamma" => Some(TabulateFn::Gamma),
            _ => GenFn::parse(s).map(TabulateFn::Generalized),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TabulateFn::MittagLeffler => "ml",
            TabulateFn::Gamma => "gamma",
            TabulateFn::Generalized(g) => g.name(),
        }
    }

    pub fn eval(self, alpha: f64, x: f64) -> f64 {
        let r = match self {
            TabulateFn::MittagLeffler => mittag_leffler_real(alpha, x),
            TabulateFn::Generalized(g) => generalized_fn_signed(g, alpha, x),
            TabulateFn::Gamma => Ok(gamma(x)),
        };
        r.unwrap_or(f64::NAN)
    }
}

/// `x,<name>` table; points where the function is undefined print as `nan`.
pub fn tabulate_csv(f: TabulateFn, alpha: f64, mesh: &Mesh) -> Result<String, PipelineError> {
    mesh.validate()?;
    if !(alpha > 0.0 && alpha <= 1.0) && f != TabulateFn::Gamma {
        return Err(PipelineError::Invalid(format!("alpha {alpha} outside (0, 1]")));
    }
    let mut out = format!("x,{}\n", f.name());
    for x in mesh.nodes() {
        let _ = writeln!(out, "{},{}", fmt_e12(x), fmt_e12(f.eval(alpha, x)));
    }
    Ok(out)
}
