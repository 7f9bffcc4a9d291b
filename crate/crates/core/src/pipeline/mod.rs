//! End-to-end solve pipeline, the built-in PDE registry and figure data.

pub mod closure;
mod figure;
pub mod registry;

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra_system::{
    extract_system, solve_numeric, solve_triangular, Branch, CoefficientSystem, NumericOptions, SolveError,
};
use crate::pde_ast::{print_pde, PdeDefinition};
use crate::phi_calculus::{balance_degree, substitute_ansatz, Ansatz, BalanceError, SubEquationProfile, SIGMA};
use crate::poly::{Poly, RatFn};
use crate::scalar::{f64_to_rational, fmt_e12, json_e12};
use crate::solution_verify::{
    construct_solutions, residual_fractional, residual_ode, residual_pde, ClosedFormSolution, ConstructOptions,
    FractionalGrid, Grid, ResidualReport, VerifyError,
};
use crate::travelling_wave::{integrate_decay, reduce, ReducedOde, WaveError, WaveFrame};

pub use closure::{Closure, Refinement};
pub use figure::{figure_csv, tabulate_csv, FigureData, FigureOptions, Mesh, TabulateFn};
pub use registry::{lookup, FigureDefaults, RegistryEntry, Warning, FIGURES, REGISTRY};

/// Integer-order verification threshold.
pub const PASS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Tanh,
    Subeq,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tanh => "tanh",
            Method::Subeq => "subeq",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "tanh" => Some(Method::Tanh),
            "subeq" => Some(Method::Subeq),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown PDE key {0:?}")]
    UnknownKey(String),
    #[error("method subeq needs a fractional definition or --sigma")]
    SigmaRequired,
    #[error("reduction: {0}")]
    Wave(#[from] WaveError),
    #[error("balance: {0}")]
    Balance(#[from] BalanceError),
    #[error("system: {0}")]
    Solve(#[from] SolveError),
    #[error("verification: {0}")]
    Verify(#[from] VerifyError),
    #[error("no branch {0:?}")]
    MissingBranch(String),
    #[error("{0}")]
    Invalid(String),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::UnknownKey(_) | PipelineError::SigmaRequired | PipelineError::Invalid(_) => "input",
            PipelineError::Wave(_) => "reduction",
            PipelineError::Balance(_) => "balance",
            PipelineError::Solve(_) => "system",
            PipelineError::Verify(_) => "verification",
            PipelineError::MissingBranch(_) => "branch",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "stage": self.stage(), "message": self.to_string() } })
    }
}

/// A PDE to solve with its pre-ansatz integration count and known discrepancies.
#[derive(Clone, Debug)]
pub struct PdeSource {
    pub key: String,
    pub definition: PdeDefinition,
    pub integrations: u32,
    pub warnings: Vec<Warning>,
}

impl PdeSource {
    /// Registry entry for `key`, its fractional variant under `subeq`.
    pub fn builtin(key: &str, method: Method) -> Result<Self, PipelineError> {
        let e = lookup(key, method == Method::Subeq).ok_or_else(|| PipelineError::UnknownKey(key.into()))?;
        Ok(PdeSource::from_entry(e))
    }

    pub fn from_entry(e: &RegistryEntry) -> Self {
        PdeSource {
            key: e.key.to_string(),
            definition: e.definition(),
            integrations: e.integrations,
            warnings: e.warnings(),
        }
    }

    pub fn custom(definition: PdeDefinition) -> Self {
        PdeSource { key: definition.name.clone(), definition, integrations: 0, warnings: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub method: Method,
    pub alpha: f64,
    pub sigma: Option<f64>,
    pub omega: f64,
    pub degree: Option<u32>,
    /// Numeric parameter values; when non-empty, solutions are constructed and verified.
    pub params: BTreeMap<String, f64>,
    pub grid: Grid<f64>,
    pub fractional_grid: FractionalGrid<f64>,
    /// Location cited by constraint-violation warnings.
    pub params_origin: String,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Tanh,
            alpha: 1.0,
            sigma: None,
            omega: 0.0,
            degree: None,
            params: BTreeMap::new(),
            grid: Grid::default(),
            fractional_grid: FractionalGrid::default(),
            params_origin: "--params".into(),
        }
    }
}

/// A branch with the id used to address it from `verify`.
#[derive(Clone, Debug)]
pub struct LabeledBranch {
    pub id: String,
    pub branch: Branch,
    pub satisfies_system: bool,
    /// Parameter values found by the numeric fallback, if it produced this branch.
    pub numeric_params: BTreeMap<String, f64>,
    /// `Some(true)` if the closure rows were appended, `Some(false)` if they
    /// contradict the branch, `None` without a closure stage.
    pub closure: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct SolutionReport {
    pub branch: String,
    pub solution: ClosedFormSolution<f64>,
    pub residuals: Vec<ResidualReport<f64>>,
    pub errors: Vec<String>,
}

impl SolutionReport {
    /// All residuals below [`PASS_TOL`] and none failed to evaluate.
    pub fn passes(&self) -> bool {
        self.errors.is_empty() && !self.residuals.is_empty() && self.residuals.iter().all(|r| r.max_abs < PASS_TOL)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.solution.to_json();
        let m = v.as_object_mut().expect("solution serializes to an object");
        m.insert("branch".into(), json!(self.branch));
        m.insert("residuals".into(), Value::Array(self.residuals.iter().map(ResidualReport::to_json).collect()));
        if !self.errors.is_empty() {
            m.insert("errors".into(), json!(self.errors));
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct SolveLog {
    pub key: String,
    pub pde: String,
    pub definition: PdeDefinition,
    pub method: Method,
    pub profile: SubEquationProfile,
    pub reduced: ReducedOde,
    pub integrated: ReducedOde,
    pub degree: u32,
    pub degree_overridden: bool,
    pub system: CoefficientSystem,
    pub branches: Vec<LabeledBranch>,
    pub closure: Option<Closure>,
    pub refinements: Vec<Refinement>,
    pub refined: Vec<LabeledBranch>,
    pub solutions: Vec<SolutionReport>,
    pub warnings: Vec<Warning>,
    pub numeric_fallback: bool,
}

impl SolveLog {
    /// Branch by id (`"0"`, `"1"`, … or `"r0"`, `"r1"`, … for refined ones).
    pub fn branch(&self, id: &str) -> Option<&LabeledBranch> {
        self.branches.iter().chain(&self.refined).find(|b| b.id == id)
    }

    pub fn all_branches(&self) -> impl Iterator<Item = &LabeledBranch> {
        self.branches.iter().chain(&self.refined)
    }

    /// ODE whose residual accompanies the PDE residual: the closure form if one exists.
    pub fn verification_ode(&self) -> &ReducedOde {
        self.closure.as_ref().map(|c| &c.ode).unwrap_or(&self.integrated)
    }

    pub fn to_json(&self) -> Value {
        let branch_json = |b: &LabeledBranch| {
            let mut v = b.branch.to_json();
            let m = v.as_object_mut().expect("branch serializes to an object");
            m.insert("id".into(), json!(b.id));
            m.insert("satisfies_system".into(), json!(b.satisfies_system));
            let status = match b.closure {
                Some(true) => json!("applied"),
                Some(false) => json!("inconsistent"),
                None => Value::Null,
            };
            m.insert("closure".into(), status);
            if !b.numeric_params.is_empty() {
                let np: serde_json::Map<String, Value> =
                    b.numeric_params.iter().map(|(k, v)| (k.clone(), json_e12(*v))).collect();
                m.insert("numeric_params".into(), Value::Object(np));
            }
            v
        };
        let rows: Vec<Value> = self
            .system
            .equations
            .iter()
            .map(|e| json!({ "row": e.row, "equation": format!("{} = 0", e.poly), "cleared": e.cleared.to_string() }))
            .collect();
        let closure = self.closure.as_ref().map(|c| json!({ "integrations": c.integrations, "ode": format!("{} = 0", c.ode.expr) }));
        let refined: Vec<Value> = self
            .refinements
            .iter()
            .map(|r| json!({ "from_branch": r.source.to_string(), "a_form": format!("{} = 0", r.a_form) }))
            .collect();
        json!({
            "pde": self.pde,
            "key": self.key,
            "method": self.method.name(),
            "profile": format!("{:?}", self.profile.mode),
            "stages": {
                "reduction": {
                    "ode": format!("{} = 0", self.reduced.expr),
                    "cleared_factor": self.reduced.cleared_factor.to_string(),
                },
                "integration": {
                    "count": self.integrated.integration_count,
                    "ode": format!("{} = 0", self.integrated.expr),
                },
                "balance": { "degree": self.degree, "overridden": self.degree_overridden },
                "system": { "unknowns": self.system.unknowns, "rows": rows },
                "numeric_fallback": self.numeric_fallback,
                "branches": self.branches.iter().map(branch_json).collect::<Vec<_>>(),
                "closure": closure,
                "a_forms": refined,
                "refined_branches": self.refined.iter().map(branch_json).collect::<Vec<_>>(),
                "solutions": self.solutions.iter().map(SolutionReport::to_json).collect::<Vec<_>>(),
            },
            "warnings": self.warnings.iter().map(|w| json!({ "location": w.location, "message": w.message })).collect::<Vec<_>>(),
        })
    }
}

fn profile_for(src: &PdeSource, opts: &SolveOptions) -> Result<SubEquationProfile, PipelineError> {
    let frac = src.definition.is_fractional();
    match opts.method {
        Method::Tanh => Ok(SubEquationProfile::classical_tanh()),
        Method::Subeq if frac || opts.sigma.is_some() => Ok(SubEquationProfile::riccati(frac)),
        Method::Subeq => Err(PipelineError::SigmaRequired),
    }
}

fn numeric_branches(
    system: &CoefficientSystem,
    params: &BTreeMap<String, f64>,
) -> Result<Vec<LabeledBranch>, PipelineError> {
    let roots = solve_numeric(system, params, &NumericOptions::default())?;
    let mut out = Vec::new();
    for (i, r) in roots.into_iter().enumerate() {
        let mut assignments = BTreeMap::new();
        let mut found = BTreeMap::new();
        for (k, v) in r.values {
            if system.unknowns.contains(&k) {
                let q = f64_to_rational(v).ok_or_else(|| PipelineError::Invalid(format!("non-finite root {k}")))?;
                assignments.insert(k, RatFn::poly(Poly::constant(q)));
            } else {
                found.insert(k, v);
            }
        }
        let branch = Branch { assignments, constraints: Vec::new(), denominators: Vec::new(), provenance: Vec::new(), free: Vec::new() };
        out.push(LabeledBranch {
            id: i.to_string(),
            branch,
            satisfies_system: r.residual < 1e-8,
            numeric_params: found,
            closure: None,
        });
    }
    Ok(out)
}

/// Reduction, integration, balance, coefficient system, branches, closure and,
/// when parameter values are given, constructed solutions with residuals.
pub fn solve(src: &PdeSource, opts: &SolveOptions) -> Result<SolveLog, PipelineError> {
    let def = &src.definition;
    let profile = profile_for(src, opts)?;
    let frame = WaveFrame::for_pde(def);
    let reduced = reduce(def, &frame)?;
    let integrated = integrate_decay(&reduced, src.integrations)?;
    let (degree, degree_overridden) = match opts.degree {
        Some(n) => (n, true),
        None => (balance_degree(&integrated, &profile)?, false),
    };
    let ansatz = Ansatz::new(degree);
    let pp = substitute_ansatz(&integrated, &ansatz, &profile);
    let system = extract_system(&pp, &ansatz);
    let mut warnings = src.warnings.clone();

    let (mut branches, numeric_fallback) = match solve_triangular(&system) {
        Ok(bs) => (
            bs.into_iter()
                .enumerate()
                .map(|(i, b)| LabeledBranch {
                    id: i.to_string(),
                    satisfies_system: b.satisfies(&system),
                    branch: b,
                    numeric_params: BTreeMap::new(),
                    closure: None,
                })
                .collect::<Vec<_>>(),
            false,
        ),
        Err(SolveError::Stalled(_)) if !opts.params.is_empty() => (numeric_branches(&system, &opts.params)?, true),
        Err(e) => return Err(e.into()),
    };

    let closure = if numeric_fallback { None } else { closure::closure_system(&integrated, &ansatz, &profile) };
    if let Some(c) = &closure {
        for b in &mut branches {
            b.closure = Some(closure::apply_closure(&mut b.branch, c));
        }
    }

    let mut refinements = Vec::new();
    let mut refined = Vec::new();
    if let Some(s) = frame.speed_symbol() {
        for (i, b) in branches.iter().enumerate() {
            if let Some(r) = closure::refine(i, &b.branch, &s) {
                for nb in &r.branches {
                    refined.push(LabeledBranch {
                        id: format!("r{}", refined.len()),
                        satisfies_system: nb.satisfies(&system),
                        branch: nb.clone(),
                        numeric_params: BTreeMap::new(),
                        closure: b.closure,
                    });
                }
                refinements.push(r);
            }
        }
    }

    let mut log = SolveLog {
        key: src.key.clone(),
        pde: print_pde(def),
        definition: def.clone(),
        method: opts.method,
        profile,
        reduced,
        integrated,
        degree,
        degree_overridden,
        system,
        branches,
        closure,
        refinements,
        refined,
        solutions: Vec::new(),
        warnings: Vec::new(),
        numeric_fallback,
    };
    if !opts.params.is_empty() {
        let ids: Vec<String> = log.all_branches().map(|b| b.id.clone()).collect();
        for id in ids {
            match verify_branch(&log, &id, opts) {
                Ok(mut reps) => log.solutions.append(&mut reps),
                Err(PipelineError::Verify(e)) => warnings.push(Warning::new(
                    &opts.params_origin,
                    format!("branch {id} not constructed: {e}"),
                )),
                Err(e) => return Err(e),
            }
        }
        warnings.extend(violation_warnings(&log.solutions, &opts.params_origin));
    }
    log.warnings = warnings;
    Ok(log)
}

/// One warning per branch whose constraints fail at the given parameters.
pub fn violation_warnings(sols: &[SolutionReport], origin: &str) -> Vec<Warning> {
    let mut out: Vec<Warning> = Vec::new();
    for s in sols.iter().filter(|s| s.solution.constraint_violated) {
        let res: Vec<String> = s.solution.constraint_residuals.iter().map(|v| fmt_e12(*v)).collect();
        let w = Warning::new(
            origin,
            format!("branch {}: constraint_violated, constraint residuals [{}]", s.branch, res.join(", ")),
        );
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

fn bound_params(log: &SolveLog, b: &LabeledBranch, opts: &SolveOptions) -> BTreeMap<String, f64> {
    let mut p = opts.params.clone();
    p.extend(b.numeric_params.iter().map(|(k, v)| (k.clone(), *v)));
    if log.profile.mode == crate::phi_calculus::ProfileMode::Riccati {
        if let Some(s) = opts.sigma {
            p.insert(SIGMA.to_string(), s);
        } else {
            p.entry(SIGMA.to_string()).or_insert(-1.0);
        }
    }
    p
}

/// Constructs every family of branch `id` and measures its residuals.
///
/// Classical solutions (`α = 1`) get the original-PDE residual and the
/// residual of the closure-integrated ODE; `α < 1` gets the fractional
/// residual of the reduced ODE, which is a measurement only.
pub fn verify_branch(log: &SolveLog, id: &str, opts: &SolveOptions) -> Result<Vec<SolutionReport>, PipelineError> {
    let lb = log.branch(id).ok_or_else(|| PipelineError::MissingBranch(id.into()))?;
    let params = bound_params(log, lb, opts);
    let copts = ConstructOptions { alpha: opts.alpha, omega: opts.omega };
    let sols = construct_solutions(&lb.branch, &log.profile, &params, &copts)?;
    let mut out = Vec::new();
    for s in sols {
        let mut residuals = Vec::new();
        let mut errors = Vec::new();
        if s.alpha.is_classical() {
            match residual_pde(&s, &log.definition, &opts.grid) {
                Ok(r) => residuals.push(r),
                Err(e) => errors.push(e.to_string()),
            }
            if lb.closure == Some(true) {
                match residual_ode(&s, log.verification_ode(), &opts.grid) {
                    Ok(r) => residuals.push(r),
                    Err(e) => errors.push(e.to_string()),
                }
            }
        } else {
            match residual_fractional(&s, &log.integrated, &opts.fractional_grid) {
                Ok(r) => residuals.push(r),
                Err(e) => errors.push(e.to_string()),
            }
        }
        out.push(SolutionReport { branch: id.to_string(), solution: s, residuals, errors });
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
