//! Coefficient systems from φ-identities and their branch-wise solution.

mod numeric;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::phi_calculus::{Ansatz, PhiPolynomial};
use crate::poly::{Monomial, Poly, RatFn};
use crate::Rational;

pub use numeric::{solve_numeric, NumericBranch, NumericOptions};

/// Maximum number of branches explored before giving up.
pub const BRANCH_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    /// φ-power this row came from (`usize::MAX` for appended closure rows).
    pub row: usize,
    pub poly: Poly,
    /// Parameter monomial divided out of the raw row.
    pub cleared: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSystem {
    pub equations: Vec<Equation>,
    /// `a_0 .. a_n`; the last one is the nonzero leading coefficient.
    pub unknowns: Vec<String>,
    pub parameters: Vec<String>,
}

impl CoefficientSystem {
    pub fn leading(&self) -> &str {
        self.unknowns.last().expect("at least one unknown")
    }

    /// Appends an extra equation (e.g. a decay-closure row) tagged with `row`.
    pub fn push(&mut self, row: usize, p: &Poly) {
        let (poly, cleared) = clear_param_content(p, &self.unknowns);
        if !poly.is_zero() {
            for v in poly.vars() {
                if !self.unknowns.contains(&v) && !self.parameters.contains(&v) {
                    self.parameters.push(v);
                }
            }
            self.parameters.sort();
            self.equations.push(Equation { row, poly, cleared });
        }
    }
}

fn is_unknown(v: &str, unknowns: &[String]) -> bool {
    unknowns.iter().any(|u| u == v)
}

fn clear_param_content(p: &Poly, unknowns: &[String]) -> (Poly, Monomial) {
    let m = p.monomial_content(|v| !is_unknown(v, unknowns));
    let q = p.div_monomial(&m).expect("content divides");
    (q.primitive(), m)
}

/// One equation per nonzero φ-row, parameter monomial content divided out.
pub fn extract_system(pp: &PhiPolynomial, ansatz: &Ansatz) -> CoefficientSystem {
    let unknowns = ansatz.coeffs.clone();
    let mut params = std::collections::BTreeSet::new();
    let mut equations = Vec::new();
    for (row, c) in pp.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for v in c.vars() {
            if !is_unknown(&v, &unknowns) {
                params.insert(v);
            }
        }
        let (poly, cleared) = clear_param_content(c, &unknowns);
        equations.push(Equation { row, poly, cleared });
    }
    CoefficientSystem { equations, unknowns, parameters: params.into_iter().collect() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub row: usize,
    pub factor: String,
}

#[derive(Clone, Debug)]
pub struct Branch {
    /// Unknown → rational function of parameters (and of free unknowns).
    pub assignments: BTreeMap<String, RatFn>,
    /// Parameter polynomials that must vanish.
    pub constraints: Vec<Poly>,
    /// Polynomials assumed nonzero.
    pub denominators: Vec<Poly>,
    pub provenance: Vec<Provenance>,
    /// Unknowns left arbitrary (e.g. `a_0` in an integrated equation).
    pub free: Vec<String>,
}

impl PartialEq for Branch {
    fn eq(&self, other: &Self) -> bool {
        self.assignments.len() == other.assignments.len()
            && self
                .assignments
                .iter()
                .all(|(k, v)| other.assignments.get(k).is_some_and(|w| v.equals(w)))
            && self.constraints.len() == other.constraints.len()
            && self.constraints.iter().all(|c| other.constraints.contains(c))
    }
}

impl Branch {
    pub fn value(&self, unknown: &str) -> Option<&RatFn> {
        self.assignments.get(unknown)
    }

    /// Checks every equation vanishes after substitution, modulo the constraints.
    pub fn satisfies(&self, s: &CoefficientSystem) -> bool {
        s.equations.iter().all(|e| {
            let mut r = RatFn::poly(e.poly.clone());
            for (x, v) in &self.assignments {
                r = r.substitute(x, v);
            }
            let (rem, _) = clear_param_content(&r.num, &s.unknowns);
            rem.is_zero() || reduces_to_zero(&rem, &self.constraints, &self.denominators)
        })
    }

    pub fn to_json(&self) -> Value {
        let assignments: serde_json::Map<String, Value> =
            self.assignments.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect();
        json!({
            "assignments": assignments,
            "constraints": self.constraints.iter().map(|c| format!("{c} = 0")).collect::<Vec<_>>(),
            "denominators": self.denominators.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "provenance": self.provenance.iter().map(|p| json!({
                "row": if p.row == usize::MAX { Value::String("closure".into()) } else { json!(p.row) },
                "factor": p.factor,
            })).collect::<Vec<_>>(),
            "free": self.free,
        })
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.assignments.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        write!(f, "{}", parts.join(", "))?;
        for c in &self.constraints {
            write!(f, "; {c} = 0")?;
        }
        Ok(())
    }
}

/// `p ≡ 0` modulo the constraint polynomials, after removing denominator factors.
fn reduces_to_zero(p: &Poly, constraints: &[Poly], dens: &[Poly]) -> bool {
    let mut q = p.clone();
    for d in dens {
        q = q.strip_factor(&d.primitive());
    }
    if q.is_zero() {
        return true;
    }
    constraints.iter().any(|c| q.div_exact(c).is_some() || q.primitive().div_exact(&c.primitive()).is_some())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("triangular elimination stalled on: {0}")]
    Stalled(String),
    #[error("branch cap of {BRANCH_CAP} exceeded")]
    TooManyBranches,
    #[error("empty coefficient system")]
    Empty,
}

#[derive(Clone, Debug)]
struct State {
    eqs: Vec<(usize, Poly)>,
    assign: Vec<(String, RatFn)>,
    constraints: Vec<Poly>,
    dens: Vec<Poly>,
    prov: Vec<Provenance>,
}

struct Solver<'a> {
    unknowns: &'a [String],
    leading: &'a str,
    out: Vec<Branch>,
    visited: usize,
}

enum Step {
    /// Replace equation `i` by a new polynomial; optionally also branch on `x = 0`.
    Factor { i: usize, x: String, cofactor: Poly, zero_branch: bool },
    Assign { i: usize, options: Vec<(String, RatFn)> },
}

impl<'a> Solver<'a> {
    fn simplify(&self, p: &Poly, dens: &[Poly]) -> Poly {
        let (mut q, _) = clear_param_content(p, self.unknowns);
        for d in dens {
            q = q.strip_factor(d);
        }
        q.primitive()
    }

    fn has_unknown(&self, p: &Poly) -> bool {
        p.contains_any(self.unknowns)
    }

    fn unknowns_desc(&self, p: &Poly) -> Vec<String> {
        self.unknowns.iter().rev().filter(|u| p.contains(u)).cloned().collect()
    }

    fn explore(&mut self, mut st: State) -> Result<(), SolveError> {
        self.visited += 1;
        if self.visited > BRANCH_CAP * 64 || self.out.len() > BRANCH_CAP {
            return Err(SolveError::TooManyBranches);
        }
        let mut eqs = Vec::with_capacity(st.eqs.len());
        for (row, p) in std::mem::take(&mut st.eqs) {
            let q = self.simplify(&p, &st.dens);
            if q.is_zero() {
                continue;
            }
            if self.has_unknown(&q) {
                eqs.push((row, q));
            } else if q.as_constant().is_some() {
                return Ok(());
            } else if !st.constraints.contains(&q) {
                st.constraints.push(q);
            }
        }
        eqs.sort_by(|a, b| b.0.cmp(&a.0));
        st.eqs = eqs;
        if st.eqs.is_empty() {
            self.finish(st);
            return Ok(());
        }
        let step = self.choose(&st)?;
        match step {
            Step::Factor { i, x, cofactor, zero_branch } => {
                if zero_branch {
                    let mut z = st.clone();
                    z.prov.push(Provenance { row: st.eqs[i].0, factor: x.clone() });
                    self.assign(&mut z, &x, RatFn::zero());
                    self.explore(z)?;
                }
                let mut c = st;
                c.prov.push(Provenance { row: c.eqs[i].0, factor: cofactor.to_string() });
                c.eqs[i].1 = cofactor;
                self.explore(c)
            }
            Step::Assign { i, options } => {
                for (x, v) in options {
                    let mut b = st.clone();
                    b.prov.push(Provenance { row: st.eqs[i].0, factor: format!("{x} = {v}") });
                    // monomial factors are cleared anyway; keep the polynomial part
                    let content = v.den.monomial_content(|_| true);
                    let d = v.den.div_monomial(&content).expect("content divides").primitive();
                    if d.as_constant().is_none() && !b.dens.contains(&d) {
                        b.dens.push(d);
                    }
                    self.assign(&mut b, &x, v);
                    self.explore(b)?;
                }
                Ok(())
            }
        }
    }

    fn assign(&self, st: &mut State, x: &str, v: RatFn) {
        for (_, p) in st.eqs.iter_mut() {
            *p = p.substitute_fraction(x, &v.num, &v.den);
        }
        for (_, a) in st.assign.iter_mut() {
            *a = a.substitute(x, &v);
        }
        st.assign.push((x.to_string(), v));
    }

    fn choose(&self, st: &State) -> Result<Step, SolveError> {
        // monomial factors and linear pivots first, scanning from the top φ-row
        for (i, (_, p)) in st.eqs.iter().enumerate() {
            for x in self.unknowns_desc(p) {
                let j = p.min_degree_in(&x);
                if j > 0 {
                    let cofactor = p.div_monomial(&Monomial::var_pow(&x, j)).expect("content divides");
                    return Ok(Step::Factor { i, zero_branch: x != self.leading, x, cofactor });
                }
            }
            for x in self.unknowns_desc(p) {
                if p.degree_in(&x) == 1 {
                    let c = p.coeffs_in(&x);
                    if !self.has_unknown(&c[1]) {
                        let v = RatFn::new(-&c[0], c[1].clone());
                        return Ok(Step::Assign { i, options: vec![(x, v)] });
                    }
                }
            }
        }
        for (i, (_, p)) in st.eqs.iter().enumerate() {
            for x in self.unknowns_desc(p) {
                if p.degree_in(&x) == 2 {
                    let c = p.coeffs_in(&x);
                    if self.has_unknown(&c[2]) {
                        continue;
                    }
                    let disc = &(&c[1] * &c[1]) - &(&c[0] * &c[2]).scale(&Rational::from_integer(4.into()));
                    if let Some(r) = disc.sqrt_exact() {
                        let two_a = c[2].scale(&Rational::from_integer(2.into()));
                        let mut options = vec![(x.clone(), RatFn::new(&(-&c[1]) + &r, two_a.clone()))];
                        if !r.is_zero() {
                            options.push((x.clone(), RatFn::new(&(-&c[1]) - &r, two_a)));
                        }
                        return Ok(Step::Assign { i, options });
                    }
                }
            }
        }
        let shown: Vec<String> = st.eqs.iter().map(|(_, p)| format!("{p} = 0")).collect();
        Err(SolveError::Stalled(shown.join("; ")))
    }

    fn finish(&mut self, st: State) {
        let assignments: BTreeMap<String, RatFn> = st.assign.into_iter().collect();
        let nonzero = |u: &str| assignments.get(u).is_none_or(|v| !v.is_zero());
        if !nonzero(self.leading) {
            return;
        }
        if !self.unknowns.iter().skip(1).any(|u| nonzero(u)) {
            return;
        }
        let free = self.unknowns.iter().filter(|u| !assignments.contains_key(*u)).cloned().collect();
        let b = Branch {
            assignments,
            constraints: st.constraints,
            denominators: st.dens,
            provenance: st.prov,
            free,
        };
        if !self.out.contains(&b) {
            self.out.push(b);
        }
    }
}

/// Triangular branch enumeration: factor out unknown monomials, pivot on
/// equations linear in one unknown, split quadratics with square discriminant.
pub fn solve_triangular(s: &CoefficientSystem) -> Result<Vec<Branch>, SolveError> {
    if s.equations.is_empty() {
        return Err(SolveError::Empty);
    }
    let mut solver = Solver { unknowns: &s.unknowns, leading: s.leading(), out: Vec::new(), visited: 0 };
    let st = State {
        eqs: s.equations.iter().map(|e| (e.row, e.poly.clone())).collect(),
        assign: Vec::new(),
        constraints: Vec::new(),
        dens: Vec::new(),
        prov: Vec::new(),
    };
    solver.explore(st)?;
    let mut out = solver.out;
    out.sort_by_key(|b| b.provenance.iter().map(|p| (p.row, p.factor.clone())).collect::<Vec<_>>());
    Ok(out)
}

/// Parameters appearing in a branch's assignments and constraints.
pub fn branch_parameters(b: &Branch) -> Vec<String> {
    let mut v: Vec<String> = b
        .assignments
        .values()
        .flat_map(|r| r.vars())
        .chain(b.constraints.iter().flat_map(|c| c.vars()))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Returns `Some(v)` if `p` is the single-term rational constant `v`.
pub fn as_rational(r: &RatFn) -> Option<Rational> {
    let n = r.num.as_constant()?;
    let d = r.den.as_constant()?;
    if d.is_zero() {
        None
    } else {
        Some(n / d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn v(n: &str) -> Poly {
        Poly::var(n)
    }

    fn one() -> Poly {
        Poly::one()
    }

    fn system(eqs: Vec<Poly>, unknowns: &[&str]) -> CoefficientSystem {
        let mut s = CoefficientSystem {
            equations: vec![],
            unknowns: unknowns.iter().map(|s| s.to_string()).collect(),
            parameters: vec![],
        };
        for (i, e) in eqs.iter().enumerate() {
            s.push(eqs.len() - i, e);
        }
        s
    }

    #[test]
    fn single_linear_equation() {
        let s = system(vec![&v("a_1") - &one()], &["a_0", "a_1"]);
        let b = solve_triangular(&s).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(as_rational(b[0].value("a_1").unwrap()), Some(int(1)));
        assert_eq!(b[0].free, vec!["a_0".to_string()]);
    }

    #[test]
    fn leading_factor_is_not_zeroed() {
        // a_2 (a_2 + 2k^2) = 0
        let k2 = v("k").pow(2).scale(&int(2));
        let s = system(vec![&v("a_2") * &(&v("a_2") + &k2)], &["a_0", "a_1", "a_2"]);
        let b = solve_triangular(&s).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].value("a_2").unwrap().to_string(), "-2*k^2");
    }

    #[test]
    fn quadratic_with_square_discriminant_splits() {
        // 3x^2 - 8k^2 x + 4k^4, leading a_1 fixed to 1
        let x = v("a_0");
        let k = v("k");
        let q = &(&x.pow(2).scale(&int(3)) - &(&x * &k.pow(2)).scale(&int(8))) + &k.pow(4).scale(&int(4));
        let s = system(vec![&v("a_1") - &one(), q], &["a_0", "a_1"]);
        let b = solve_triangular(&s).unwrap();
        let roots: Vec<String> = b.iter().map(|b| b.value("a_0").unwrap().to_string()).collect();
        assert_eq!(b.len(), 2);
        assert!(roots.contains(&"2*k^2".to_string()));
        assert!(roots.contains(&"2*k^2/3".to_string()));
        assert!(b.iter().all(|br| br.satisfies(&s)));
    }

    #[test]
    fn unknown_free_rows_become_constraints() {
        // c(p+q) a_1 - 12 k m = 0 ; (c+k) a_1 - 4 k^2 m a_1 = 0
        let a1 = v("a_1");
        let pq = &v("p") + &v("q");
        let e1 = &(&(&v("c") * &pq) * &a1) - &(&v("k") * &v("m")).scale(&int(12));
        let e2 = &a1 * &(&(&v("c") + &v("k")) - &(&v("k").pow(2) * &v("m")).scale(&int(4)));
        let s = system(vec![e1, e2], &["a_0", "a_1"]);
        let b = solve_triangular(&s).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].value("a_1").unwrap().to_string(), "12*k*m/(c*p + c*q)");
        assert_eq!(b[0].constraints.len(), 1);
        assert!(b[0].satisfies(&s));
    }

    #[test]
    fn inconsistent_rows_give_no_branch() {
        let s = system(vec![&v("a_1") - &one(), &v("a_1") - &Poly::int(2)], &["a_0", "a_1"]);
        assert!(solve_triangular(&s).unwrap().is_empty());
    }

    #[test]
    fn stalls_without_pivot() {
        // a_1^3 + a_1 + k: cubic with no monomial factor
        let a = v("a_1");
        let s = system(vec![&(&a.pow(3) + &a) + &v("k")], &["a_0", "a_1"]);
        assert!(matches!(solve_triangular(&s), Err(SolveError::Stalled(_))));
    }
}
