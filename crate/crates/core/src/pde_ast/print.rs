//! Canonical DSL printer. `parse_pde(&print_pde(p)) == p` for every valid definition.

use num_traits::{One, Signed};

use super::{DerivFactor, Expr, PdeDefinition, Term};

fn factor_str(f: &DerivFactor, fractional: bool) -> String {
    let mut s = String::from("u");
    if !f.orders.is_empty() {
        let letters_ok = f.orders.values().all(|&o| o <= 6);
        if letters_ok {
            s.push('_');
            for (v, o) in &f.orders {
                for _ in 0..*o {
                    s.push_str(v);
                }
            }
        } else {
            let parts: Vec<String> = f
                .orders
                .iter()
                .map(|(v, o)| if fractional { format!("{v}:a{o}") } else { format!("{v}:{o}") })
                .collect();
            s.push_str(&format!("_{{{}}}", parts.join(",")));
        }
    }
    if f.power > 1 {
        s.push_str(&format!("^{}", f.power));
    }
    s
}

fn term_body(t: &Term, fractional: bool) -> Vec<String> {
    let mut parts = Vec::new();
    for (v, e) in t.params.iter() {
        if *e == 1 {
            parts.push(v.to_string());
        } else {
            parts.push(format!("{v}^{e}"));
        }
    }
    // highest derivative factor first reads naturally
    for f in t.factors.iter().rev() {
        parts.push(factor_str(f, fractional));
    }
    parts
}

/// Prints `e` in canonical term order, e.g. `u_xx - u*u_t`.
pub fn print_expr(e: &Expr, fractional: bool) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, t) in e.terms().iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = t.coeff.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts = term_body(t, fractional);
        if !mag.is_one() || parts.is_empty() {
            parts.insert(0, mag.to_string());
        }
        out.push_str(&parts.join("*"));
    }
    out
}

pub fn print_pde(p: &PdeDefinition) -> String {
    let mut s = format!("pde {} vars({})", p.name, p.variables.join(","));
    if !p.parameters.is_empty() {
        s.push_str(&format!(" params({})", p.parameters.join(",")));
    }
    if let Some(sym) = &p.fractional {
        s.push_str(&format!(" frac({sym})"));
    }
    s.push_str(" : ");
    s.push_str(&print_expr(&p.lhs_minus_rhs, p.is_fractional()));
    s.push_str(" = 0");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_ast::parse_pde;

    #[test]
    fn round_trips() {
        for src in [
            "pde toy vars(x,t) : u_xx = u * u_t",
            "pde b vars(x,t) params(p) : u_tt = u_xx + 3/2*p^2*(u^2)_xx + u_xxxx",
            "pde f vars(x,t) params(m) frac(alpha) : u_{t:a1} + 6*(u*u_x^a1)_x^a1 + m*u_{x:a7} = 0",
            "pde z vars(x) : u_x = u_x",
        ] {
            let p = parse_pde(src).unwrap();
            let printed = print_pde(&p);
            assert_eq!(parse_pde(&printed).unwrap(), p, "{printed}");
        }
    }

    #[test]
    fn toy_prints_canonically() {
        let p = parse_pde("pde toy vars(x,t) : u_xx = u * u_t").unwrap();
        assert_eq!(print_pde(&p), "pde toy vars(x,t) : u_xx - u_t*u = 0");
    }
}
