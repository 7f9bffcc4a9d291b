//! Tokenizer and recursive-descent parser for the PDE DSL.
//!
//! ```text
//! pde <name> vars(<v>,...) params(<s>,...) [frac(alpha)] : <expr> = <expr>
//! ```
//!
//! Derivatives are written `u_xxy` (one letter per order unit), `u_{x:3,y:1}`,
//! or, in fractional PDEs, `u_x^a2` / `u_{x:a2}` for order 2α. A derivative
//! suffix may follow a parenthesized subexpression: `(u^2)_xx`.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{expand_derivatives, ExprTree, PdeDefinition, PdeError};
use crate::Rational;

const ALLOWED_VARS: [&str; 3] = ["x", "y", "t"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, PdeError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_alphabetic() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[s..i].iter().collect();
            col += i - s;
            out.push(Token { tok: Tok::Ident(word), line: start_line, col: start_col });
        } else if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[s..i].iter().collect();
            col += i - s;
            let n = digits.parse::<BigInt>().expect("ascii digits");
            out.push(Token { tok: Tok::Int(n), line: start_line, col: start_col });
        } else if "()+-*/^_{},:=".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            i += 1;
            col += 1;
        } else {
            return Err(PdeError::Syntax { line, col, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    variables: Vec<String>,
    parameters: Vec<String>,
    fractional: bool,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PdeError> {
        let t = self.peek();
        Err(PdeError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), PdeError> {
        if self.is_sym(c) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), PdeError> {
        match &self.peek().tok {
            Tok::Ident(w) if w == kw => {
                self.next();
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn ident(&mut self) -> Result<String, PdeError> {
        match self.peek().tok.clone() {
            Tok::Ident(w) => {
                self.next();
                Ok(w)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, PdeError> {
        self.expect_sym('(')?;
        let mut out = Vec::new();
        if !self.is_sym(')') {
            loop {
                out.push(self.ident()?);
                if self.is_sym(',') {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect_sym(')')?;
        Ok(out)
    }

    fn header(&mut self) -> Result<(String, Option<String>), PdeError> {
        self.expect_keyword("pde")?;
        let mut name = self.ident()?;
        // names may join words with underscores (`kp_frac`)
        while self.is_sym('_') {
            self.next();
            name.push('_');
            name.push_str(&self.ident()?);
        }
        self.expect_keyword("vars")?;
        self.variables = self.ident_list()?;
        for v in &self.variables {
            if !ALLOWED_VARS.contains(&v.as_str()) {
                return Err(PdeError::UnsupportedVariable(v.clone()));
            }
        }
        if matches!(&self.peek().tok, Tok::Ident(w) if w == "params") {
            self.next();
            self.parameters = self.ident_list()?;
        }
        let mut frac = None;
        if matches!(&self.peek().tok, Tok::Ident(w) if w == "frac") {
            self.next();
            let syms = self.ident_list()?;
            if syms.len() != 1 {
                return self.err("frac(...) takes exactly one order symbol");
            }
            frac = Some(syms[0].clone());
            self.fractional = true;
        }
        for p in &self.parameters {
            if p == "u" || self.variables.contains(p) {
                return self.err(format!("parameter `{p}` clashes with a reserved symbol"));
            }
        }
        self.expect_sym(':')?;
        Ok((name, frac))
    }

    fn expr(&mut self) -> Result<ExprTree, PdeError> {
        let mut items = Vec::new();
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            if self.is_sym('+') {
                self.next();
            }
            false
        };
        let first = self.term()?;
        items.push(if neg { ExprTree::Neg(Box::new(first)) } else { first });
        loop {
            if self.is_sym('+') {
                self.next();
                items.push(self.term()?);
            } else if self.is_sym('-') {
                self.next();
                items.push(ExprTree::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { ExprTree::Sum(items) })
    }

    fn term(&mut self) -> Result<ExprTree, PdeError> {
        let mut items = vec![self.factor()?];
        while self.is_sym('*') {
            self.next();
            items.push(self.factor()?);
        }
        Ok(if items.len() == 1 { items.pop().expect("one item") } else { ExprTree::Product(items) })
    }

    fn factor(&mut self) -> Result<ExprTree, PdeError> {
        if self.is_sym('-') {
            self.next();
            return Ok(ExprTree::Neg(Box::new(self.factor()?)));
        }
        let mut base = self.atom()?;
        while self.is_sym('^') {
            self.next();
            match self.peek().tok.clone() {
                Tok::Int(n) => {
                    self.next();
                    let n: u32 = n.try_into().or_else(|_| self.err("exponent too large"))?;
                    base = ExprTree::Pow(Box::new(base), n);
                }
                _ => return self.err("expected integer exponent"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprTree, PdeError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(n) => {
                self.next();
                let mut val = Rational::from_integer(n);
                if self.is_sym('/') {
                    self.next();
                    match self.next().tok {
                        Tok::Int(d) if d != BigInt::from(0) => val /= Rational::from_integer(d),
                        _ => return self.err("expected nonzero integer denominator"),
                    }
                }
                Ok(ExprTree::Num(val))
            }
            Tok::Sym('(') => {
                self.next();
                let inner = self.expr()?;
                self.expect_sym(')')?;
                if self.is_sym('_') {
                    let orders = self.deriv_suffix()?;
                    Ok(ExprTree::Deriv(Box::new(inner), orders))
                } else {
                    Ok(inner)
                }
            }
            Tok::Ident(w) if w == "u" => {
                self.next();
                if self.is_sym('_') {
                    Ok(ExprTree::U(self.deriv_suffix()?))
                } else {
                    Ok(ExprTree::U(BTreeMap::new()))
                }
            }
            Tok::Ident(w) => {
                if self.parameters.contains(&w) {
                    self.next();
                    Ok(ExprTree::Param(w))
                } else if self.variables.contains(&w) || ALLOWED_VARS.contains(&w.as_str()) {
                    self.err(format!("independent variable `{w}` cannot appear as a coefficient"))
                } else {
                    Err(PdeError::UndeclaredParameter { name: w, line: t.line, col: t.col })
                }
            }
            _ => self.err("expected number, parameter, `u` or `(`"),
        }
    }

    fn check_var(&self, v: &str, line: usize, col: usize) -> Result<(), PdeError> {
        if self.variables.iter().any(|d| d == v) {
            Ok(())
        } else {
            Err(PdeError::UndeclaredVariable { name: v.to_string(), line, col })
        }
    }

    /// Parses `_xxy`, `_x^a2` or `_{x:3,y:a1}` after the underscore.
    fn deriv_suffix(&mut self) -> Result<BTreeMap<String, u32>, PdeError> {
        self.expect_sym('_')?;
        let mut orders: BTreeMap<String, u32> = BTreeMap::new();
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(letters) => {
                self.next();
                for (i, ch) in letters.chars().enumerate() {
                    let v = ch.to_string();
                    self.check_var(&v, t.line, t.col + i)?;
                    *orders.entry(v).or_insert(0) += 1;
                }
                if self.is_sym('^') {
                    if let Tok::Ident(w) = &self.toks[self.pos + 1].tok {
                        if let Some(n) = fractional_multiple(w) {
                            let at = self.toks[self.pos + 1].clone();
                            if !self.fractional {
                                return Err(PdeError::MixedOrders { line: at.line, col: at.col });
                            }
                            if orders.len() != 1 || orders.values().any(|&o| o != 1) {
                                return Err(PdeError::Syntax {
                                    line: at.line,
                                    col: at.col,
                                    msg: "`^aN` order needs a single-letter derivative suffix".into(),
                                });
                            }
                            self.next();
                            self.next();
                            for o in orders.values_mut() {
                                *o = n;
                            }
                        }
                    }
                }
            }
            Tok::Sym('{') => {
                self.next();
                loop {
                    let vt = self.peek().clone();
                    let v = self.ident()?;
                    self.check_var(&v, vt.line, vt.col)?;
                    self.expect_sym(':')?;
                    let ot = self.peek().clone();
                    let n = match ot.tok.clone() {
                        Tok::Int(n) => {
                            if self.fractional {
                                return Err(PdeError::MixedOrders { line: ot.line, col: ot.col });
                            }
                            self.next();
                            n.try_into().or_else(|_| self.err("order too large"))?
                        }
                        Tok::Ident(w) => match fractional_multiple(&w) {
                            Some(n) => {
                                if !self.fractional {
                                    return Err(PdeError::MixedOrders { line: ot.line, col: ot.col });
                                }
                                self.next();
                                n
                            }
                            None => return self.err("expected order `N` or `aN`"),
                        },
                        _ => return self.err("expected derivative order"),
                    };
                    *orders.entry(v).or_insert(0) += n;
                    if self.is_sym(',') {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect_sym('}')?;
            }
            _ => return self.err("expected derivative suffix"),
        }
        orders.retain(|_, o| *o > 0);
        Ok(orders)
    }
}

/// `a3` → 3.
fn fractional_multiple(w: &str) -> Option<u32> {
    let rest = w.strip_prefix('a')?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parses a DSL definition and returns it with `lhs − rhs` fully expanded and normalized.
pub fn parse_pde(text: &str) -> Result<PdeDefinition, PdeError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, variables: vec![], parameters: vec![], fractional: false };
    let (name, fractional) = p.header()?;
    let lhs = p.expr()?;
    p.expect_sym('=')?;
    let rhs = p.expr()?;
    if p.peek().tok != Tok::End {
        return p.err("trailing input after equation");
    }
    let e = expand_derivatives(&lhs).sub(&expand_derivatives(&rhs));
    Ok(PdeDefinition { name, variables: p.variables, parameters: p.parameters, lhs_minus_rhs: e, fractional })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde_ast::{DerivFactor, Expr};
    use crate::scalar::int;

    #[test]
    fn heat_like_toy_has_two_terms() {
        let p = parse_pde("pde toy vars(x,t) : u_xx = u * u_t").unwrap();
        let want = Expr::factor(DerivFactor::d("x", 2))
            .sub(&Expr::u().mul(&Expr::factor(DerivFactor::d("t", 1))));
        assert_eq!(p.lhs_minus_rhs, want);
        assert_eq!(p.lhs_minus_rhs.terms().len(), 2);
    }

    #[test]
    fn boussinesq_expands_square() {
        let p = parse_pde("pde b vars(x,t) : u_tt = u_xx + 3*(u^2)_xx + u_xxxx").unwrap();
        // u_tt - u_xx - 6 u u_xx - 6 u_x^2 - u_xxxx
        assert_eq!(p.lhs_minus_rhs.terms().len(), 5);
        let six_u_uxx = Expr::u().mul(&Expr::factor(DerivFactor::d("x", 2))).scale(&int(-6));
        assert!(p.lhs_minus_rhs.terms().contains(&six_u_uxx.terms()[0]));
    }

    #[test]
    fn identical_sides_cancel() {
        let p = parse_pde("pde z vars(x) : u_xx = u_xx").unwrap();
        assert!(p.lhs_minus_rhs.is_zero());
    }

    #[test]
    fn fractional_forms_agree() {
        let a = parse_pde("pde f vars(x,t) frac(alpha) : u_x^a2 = u_{t:a1}").unwrap();
        let b = parse_pde("pde f vars(x,t) frac(alpha) : u_xx = u_t").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fractional.as_deref(), Some("alpha"));
    }

    #[test]
    fn fractional_leibniz_expansion() {
        // 6(u u_x^α)_x^α -> 6 (u_x^α)^2 + 6 u u_x^{2α}
        let p = parse_pde("pde f vars(x) frac(alpha) : 6*(u*u_x^a1)_x^a1 = 0").unwrap();
        let want = Expr::factor(DerivFactor::d("x", 1).with_power(2))
            .add(&Expr::u().mul(&Expr::factor(DerivFactor::d("x", 2))))
            .scale(&int(6));
        assert_eq!(p.lhs_minus_rhs, want);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_pde("pde e vars(x,t) : u_xz = 0") {
            Err(PdeError::UndeclaredVariable { name, line: 1, .. }) => assert_eq!(name, "z"),
            other => panic!("unexpected {other:?}"),
        }
        match parse_pde("pde e vars(x) : q*u_x = 0") {
            Err(PdeError::UndeclaredParameter { name, .. }) => assert_eq!(name, "q"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_pde("pde e vars(x) : u_x^a2 = 0"), Err(PdeError::MixedOrders { .. })));
        assert!(matches!(
            parse_pde("pde e vars(x) frac(alpha) : u_{x:2} = 0"),
            Err(PdeError::MixedOrders { .. })
        ));
        assert!(matches!(parse_pde("pde e vars(x) : u_x = = 0"), Err(PdeError::Syntax { col: 23, .. })));
        assert!(matches!(parse_pde("pde e vars(x,z) : u = 0"), Err(PdeError::UnsupportedVariable(_))));
    }

    #[test]
    fn second_line_errors_report_line() {
        match parse_pde("pde e vars(x)\n  : u_x + $") {
            Err(PdeError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 11)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
