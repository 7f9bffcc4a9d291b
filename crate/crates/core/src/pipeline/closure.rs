//! Decay closure and elimination of the wave speed in favour of `a_0`.

use crate::algebra_system::{extract_system, Branch, CoefficientSystem, Provenance};
use crate::phi_calculus::{coeff_name, substitute_ansatz, Ansatz, SubEquationProfile};
use crate::poly::{Poly, RatFn};
use crate::scalar::int;
use crate::travelling_wave::{integrate_decay_max, ReducedOde};

/// Further decay integrations tried after the ansatz stage.
pub const CLOSURE_MAX: u32 = 4;

pub const CLOSURE_ROW: usize = usize::MAX;

/// The ODE integrated as far as decay allows, and its coefficient rows.
#[derive(Clone, Debug)]
pub struct Closure {
    pub integrations: u32,
    pub ode: ReducedOde,
    pub system: CoefficientSystem,
}

/// `None` when the solved ODE admits no further decay integration.
pub fn closure_system(o: &ReducedOde, a: &Ansatz, profile: &SubEquationProfile) -> Option<Closure> {
    let (ode, integrations) = integrate_decay_max(o, CLOSURE_MAX);
    if integrations == 0 {
        return None;
    }
    let pp = substitute_ansatz(&ode, a, profile);
    let system = extract_system(&pp, a);
    Some(Closure { integrations, ode, system })
}

/// Numerator with monomial content, rational content and known nonzero factors removed.
fn reduced_numerator(p: &Poly, dens: &[Poly]) -> Poly {
    let m = p.monomial_content(|_| true);
    let mut q = p.div_monomial(&m).expect("content divides").primitive();
    for d in dens {
        q = q.strip_factor(&d.primitive());
    }
    q.primitive()
}

fn implied_by(q: &Poly, constraints: &[Poly]) -> bool {
    constraints.iter().any(|c| q.div_exact(c).is_some() || q.primitive().div_exact(&c.primitive()).is_some())
}

/// Appends the closure rows, evaluated on the branch, as constraints.
///
/// Returns `false`, leaving the branch untouched, if some row reduces to a
/// nonzero constant: the solution then needs a nonzero integration constant.
pub fn apply_closure(b: &mut Branch, c: &Closure) -> bool {
    let mut extra: Vec<Poly> = Vec::new();
    for e in &c.system.equations {
        let mut r = RatFn::poly(e.poly.clone());
        for (x, v) in &b.assignments {
            r = r.substitute(x, v);
        }
        if r.num.is_zero() {
            continue;
        }
        let q = reduced_numerator(&r.num, &b.denominators);
        if q.as_constant().is_some() {
            return false;
        }
        if !implied_by(&q, &b.constraints) && !implied_by(&q, &extra) {
            extra.push(q);
        }
    }
    for q in extra {
        b.constraints.push(q);
        b.provenance.push(Provenance { row: CLOSURE_ROW, factor: "closure".into() });
    }
    true
}

/// Result of eliminating the speed from a constraint through the `a_0` assignment.
#[derive(Clone, Debug)]
pub struct Refinement {
    /// Index of the originating branch.
    pub source: usize,
    /// Polynomial in `a_0` and the remaining parameters.
    pub a_form: Poly,
    pub branches: Vec<Branch>,
}

/// Single exponent `e` with `N = N_e s^e + N_0`, if `N` has that shape.
fn speed_exponent(n: &Poly, s: &str) -> Option<u32> {
    let cs = n.coeffs_in(s);
    let nz: Vec<u32> = (1..cs.len()).filter(|&i| !cs[i].is_zero()).map(|i| i as u32).collect();
    (nz.len() == 1).then(|| nz[0])
}

/// Exact roots of a linear or quadratic polynomial in `var`.
fn roots_in(p: &Poly, var: &str) -> Option<Vec<RatFn>> {
    let cs = p.coeffs_in(var);
    match cs.len() {
        2 => Some(vec![RatFn::new(-&cs[0], cs[1].clone())]),
        3 => {
            let (c0, c1, c2) = (&cs[0], &cs[1], &cs[2]);
            let disc = &(c1 * c1) - &(&c2.scale(&int(4)) * c0);
            let root = disc.sqrt_exact()?;
            let two_a = c2.scale(&int(2));
            let mut out = vec![
                RatFn::new(&(-c1) + &root, two_a.clone()),
                RatFn::new(&(-c1) - &root, two_a),
            ];
            if root.is_zero() {
                out.pop();
            }
            Some(out)
        }
        _ => None,
    }
}

/// Rewrites a constraint in the speed symbol `s` through `a_0`, and solves it.
///
/// Applies when `a_0 = N/D` with `N` linear in `s^e` and every power of `s`
/// in the constraint a multiple of `e`.
pub fn refine(source: usize, b: &Branch, s: &str) -> Option<Refinement> {
    let a0 = coeff_name(0);
    let val = b.assignments.get(&a0)?;
    if val.den.contains(s) {
        return None;
    }
    let e = speed_exponent(&val.num, s)?;
    let ncs = val.num.coeffs_in(s);
    let (n0, ne) = (ncs[0].clone(), ncs[e as usize].clone());
    // s^e = (a_0·D − N_0)/N_e
    let p = &(&Poly::var(&a0) * &val.den) - &n0;
    let q = ne;
    let constraint = b.constraints.iter().find(|c| c.contains(s))?;
    let ccs = constraint.coeffs_in(s);
    if ccs.iter().enumerate().any(|(i, c)| !(i as u32).is_multiple_of(e) && !c.is_zero()) {
        return None;
    }
    let top = (ccs.len() as u32 - 1) / e;
    let mut form = Poly::zero();
    for j in 0..=top {
        let cj = &ccs[(j * e) as usize];
        if !cj.is_zero() {
            form = &form + &(&(cj * &p.pow(j)) * &q.pow(top - j));
        }
    }
    let m = form.monomial_content(|v| v != a0);
    let a_form = form.div_monomial(&m).expect("content divides").primitive();
    let roots = roots_in(&a_form, &a0)?;
    let mut branches = Vec::new();
    for r in roots {
        let mut nb = b.clone();
        nb.assignments.insert(a0.clone(), r.clone());
        // speed relation q·s^e − p with a_0 bound
        let rel = RatFn::new(&(&q * &Poly::var(s).pow(e)) - &p, Poly::one()).substitute(&a0, &r);
        let rel = reduced_numerator(&rel.num, &[]);
        nb.constraints = vec![rel];
        nb.free.retain(|f| f != &a0);
        branches.push(nb);
    }
    Some(Refinement { source, a_form, branches })
}
