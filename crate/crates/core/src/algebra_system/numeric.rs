//! Multistart Levenberg–Marquardt fallback for systems the triangular solver cannot split.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoefficientSystem, SolveError};
use crate::poly::Poly;

#[derive(Clone, Debug)]
pub struct NumericOptions {
    pub seeds: usize,
    pub rng_seed: u64,
    /// Half-width of the uniform box seeds are drawn from.
    pub spread: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub cluster_tol: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            seeds: 64,
            rng_seed: 0x7a6e_6873,
            spread: 4.0,
            max_iter: 400,
            residual_tol: 1e-10,
            cluster_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericBranch {
    /// Unknowns and any parameters left unbound.
    pub values: BTreeMap<String, f64>,
    /// Max-norm of the system at the root.
    pub residual: f64,
}

struct Problem {
    vars: Vec<String>,
    eqs: Vec<Poly>,
    jac: Vec<Vec<Poly>>,
}

impl Problem {
    fn eval(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let env: BTreeMap<String, f64> = self.vars.iter().cloned().zip(x.iter().copied()).collect();
        let f = DVector::from_iterator(self.eqs.len(), self.eqs.iter().map(|e| e.eval(&env).unwrap_or(f64::NAN)));
        let mut j = DMatrix::zeros(self.eqs.len(), self.vars.len());
        for (r, row) in self.jac.iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                j[(r, c)] = d.eval(&env).unwrap_or(f64::NAN);
            }
        }
        (f, j)
    }

    fn levenberg_marquardt(&self, mut x: DVector<f64>, opts: &NumericOptions) -> Option<(DVector<f64>, f64)> {
        let mut lambda = 1e-3;
        let (mut f, mut j) = self.eval(&x);
        let mut cost = f.norm_squared();
        for _ in 0..opts.max_iter {
            if !cost.is_finite() {
                return None;
            }
            if f.amax() < opts.residual_tol * 1e-3 {
                break;
            }
            let jt = j.transpose();
            let jtj = &jt * &j;
            let g = &jt * &f;
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = &x + &step;
            let (cf, cj) = self.eval(&cand);
            let ccost = cf.norm_squared();
            if ccost.is_finite() && ccost < cost {
                x = cand;
                f = cf;
                j = cj;
                cost = ccost;
                lambda = (lambda * 0.3).max(1e-15);
                if step.amax() < 1e-15 * (1.0 + x.amax()) {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    break;
                }
            }
        }
        let res = f.amax();
        res.is_finite().then_some((x, res))
    }
}

/// Binds `param_values`, treats every remaining symbol as an unknown, and
/// collects the distinct real roots found from `opts.seeds` random starts.
///
/// Roots with a vanishing leading coefficient or with all higher
/// coefficients zero are discarded.
pub fn solve_numeric(
    s: &CoefficientSystem,
    param_values: &BTreeMap<String, f64>,
    opts: &NumericOptions,
) -> Result<Vec<NumericBranch>, SolveError> {
    let exact: BTreeMap<String, crate::Rational> = param_values
        .iter()
        .filter_map(|(k, v)| crate::scalar::f64_to_rational(*v).map(|r| (k.clone(), r)))
        .collect();
    let eqs: Vec<Poly> =
        s.equations.iter().map(|e| e.poly.bind(&exact)).filter(|p| !p.is_zero()).collect();
    let mut vars: Vec<String> = s.unknowns.clone();
    for e in &eqs {
        for v in e.vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    if eqs.is_empty() {
        return Err(SolveError::Empty);
    }
    let jac = eqs.iter().map(|e| vars.iter().map(|v| e.derivative(v)).collect()).collect();
    let prob = Problem { vars: vars.clone(), eqs, jac };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let mut roots: Vec<NumericBranch> = Vec::new();
    let lead_idx = s.unknowns.len() - 1;
    for _ in 0..opts.seeds {
        let x0 = DVector::from_iterator(vars.len(), (0..vars.len()).map(|_| rng.gen_range(-opts.spread..opts.spread)));
        let Some((x, res)) = prob.levenberg_marquardt(x0, opts) else {
            continue;
        };
        if res > opts.residual_tol {
            continue;
        }
        let scale = 1.0 + x.amax();
        if x[lead_idx].abs() < 1e-8 * scale || (1..=lead_idx).all(|i| x[i].abs() < 1e-8 * scale) {
            continue;
        }
        let dup = roots.iter().any(|r| {
            vars.iter().zip(x.iter()).all(|(v, xi)| (r.values[v] - xi).abs() <= opts.cluster_tol * (1.0 + xi.abs()))
        });
        if !dup {
            roots.push(NumericBranch { values: vars.iter().cloned().zip(x.iter().copied()).collect(), residual: res });
        }
    }
    if roots.is_empty() {
        return Err(SolveError::Stalled("no numeric root found".into()));
    }
    roots.sort_by(|a, b| {
        let ka: Vec<f64> = vars.iter().rev().map(|v| a.values[v]).collect();
        let kb: Vec<f64> = vars.iter().rev().map(|v| b.values[v]).collect();
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra_system::CoefficientSystem;
    use crate::scalar::int;

    #[test]
    fn linear_root() {
        let mut s = CoefficientSystem { equations: vec![], unknowns: vec!["a_0".into(), "a_1".into()], parameters: vec![] };
        s.push(1, &(&Poly::var("a_1") - &Poly::int(1)));
        s.push(0, &Poly::var("a_0"));
        let r = solve_numeric(&s, &BTreeMap::new(), &NumericOptions::default()).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].values["a_1"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_roots_are_clustered() {
        // a_1^2 = k^2 with k = 2 → a_1 = ±2
        let mut s = CoefficientSystem { equations: vec![], unknowns: vec!["a_0".into(), "a_1".into()], parameters: vec![] };
        s.push(1, &(&Poly::var("a_1").pow(2) - &Poly::var("k").pow(2)));
        s.push(0, &(&Poly::var("a_0") - &Poly::var("a_1").scale(&int(3))));
        let params = BTreeMap::from([("k".to_string(), 2.0)]);
        let r = solve_numeric(&s, &params, &NumericOptions::default()).unwrap();
        let mut a1: Vec<f64> = r.iter().map(|b| b.values["a_1"]).collect();
        a1.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(a1.len(), 2);
        assert!((a1[0] + 2.0).abs() < 1e-10 && (a1[1] - 2.0).abs() < 1e-10);
    }
}
