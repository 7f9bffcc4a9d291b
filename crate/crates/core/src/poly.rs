//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are named symbols. A [`Monomial`] maps symbol → positive exponent;
//! a [`Poly`] maps monomial → nonzero coefficient. Both are kept in `BTreeMap`s so
//! iteration order, printing and hashing are deterministic.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<String, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(name: &str) -> Self {
        Self::var_pow(name, 1)
    }

    pub fn var_pow(name: &str, exp: u32) -> Self {
        let mut m = BTreeMap::new();
        if exp > 0 {
            m.insert(name.to_string(), exp);
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, var: &str) -> u32 {
        self.0.get(var).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u32)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(m)
    }

    pub fn pow(&self, n: u32) -> Monomial {
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * n)).filter(|(_, e)| *e > 0).collect())
    }

    /// `self / other` when every exponent of `other` is available.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            let have = m.get_mut(v)?;
            if *have < *e {
                return None;
            }
            *have -= e;
            if *have == 0 {
                m.remove(v);
            }
        }
        Some(Monomial(m))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(v, e)| other.0.get(v).map(|f| (v.clone(), (*e).min(*f))))
                .collect(),
        )
    }

    /// Drops `var` from the monomial.
    pub fn without(&self, var: &str) -> Monomial {
        let mut m = self.0.clone();
        m.remove(var);
        Monomial(m)
    }

    pub fn retain(&self, keep: impl Fn(&str) -> bool) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| keep(v)).map(|(v, e)| (v.clone(), *e)).collect())
    }

    /// Lexicographic monomial order on sorted variable names; a valid term order.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let vars: BTreeSet<&String> = self.0.keys().chain(other.0.keys()).collect();
        for v in vars {
            match self.exponent(v).cmp(&other.exponent(v)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    pub fn eval<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<T, String> {
        let mut acc = T::one();
        for (v, e) in &self.0 {
            let x = values.get(v).ok_or_else(|| v.clone())?;
            acc = acc * x.powi(*e as i32);
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn int(c: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(name: &str) -> Self {
        Self::term(Rational::one(), Monomial::var(name))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    /// The constant value when the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.vars().cloned()).collect()
    }

    pub fn contains(&self, var: &str) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    pub fn contains_any(&self, vars: &[String]) -> bool {
        vars.iter().any(|v| self.contains(v))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.terms.keys().map(|m| m.exponent(var)).max().unwrap_or(0)
    }

    pub fn min_degree_in(&self, var: &str) -> u32 {
        self.terms.keys().map(|m| m.exponent(var)).min().unwrap_or(0)
    }

    /// Coefficients of `var^0 .. var^d` as polynomials free of `var`.
    pub fn coeffs_in(&self, var: &str) -> Vec<Poly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            out[m.exponent(var) as usize].add_term(m.without(var), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul_monomial(&self, mono: &Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, v)| (m.mul(mono), v.clone())).collect() }
    }

    pub fn div_monomial(&self, mono: &Monomial) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (m, v) in &self.terms {
            terms.insert(m.div(mono)?, v.clone());
        }
        Some(Poly { terms })
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, var: &str) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut nm = m.without(var);
            if e > 1 {
                nm = nm.mul(&Monomial::var_pow(var, e - 1));
            }
            out.add_term(nm, c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// Substitutes a polynomial for `var`.
    pub fn substitute(&self, var: &str, value: &Poly) -> Poly {
        let coeffs = self.coeffs_in(var);
        // Horner in `var`
        let mut acc = Poly::zero();
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        acc
    }

    /// Substitutes `var = num/den` and clears the denominator:
    /// returns `den^d · self(num/den)` with `d = degree_in(var)`.
    pub fn substitute_fraction(&self, var: &str, num: &Poly, den: &Poly) -> Poly {
        let coeffs = self.coeffs_in(var);
        let d = coeffs.len() - 1;
        let mut out = Poly::zero();
        let mut num_pow = Poly::one();
        let den_pows: Vec<Poly> = {
            let mut v = vec![Poly::one()];
            for i in 1..=d {
                let next = &v[i - 1] * den;
                v.push(next);
            }
            v
        };
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(&(c * &num_pow) * &den_pows[d - i]);
            }
            if i < d {
                num_pow = &num_pow * num;
            }
        }
        out
    }

    /// Replaces numeric values for some symbols, leaving the rest symbolic.
    pub fn bind(&self, values: &BTreeMap<String, Rational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::one();
            for (v, e) in m.iter() {
                match values.get(v) {
                    Some(x) => coeff *= num_traits::pow(x.clone(), *e as usize),
                    None => rest = rest.mul(&Monomial::var_pow(v, *e)),
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    pub fn eval<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<T, String> {
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            acc = acc + T::from_rational(c) * m.eval(values)?;
        }
        Ok(acc)
    }

    /// Leading term under [`Monomial::lex_cmp`].
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    /// GCD of all monomials, restricted to symbols accepted by `keep`.
    pub fn monomial_content(&self, keep: impl Fn(&str) -> bool) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.retain(&keep);
        for m in it {
            g = g.gcd(m);
        }
        g
    }

    /// Positive rational `c` such that `self / c` has coprime integer coefficients.
    pub fn rational_content(&self) -> Rational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return Rational::one();
        }
        Rational::new(num_gcd, den_lcm)
    }

    /// Integer-coefficient primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.rational_content();
        if self.leading().map(|(_, v)| v.is_negative()).unwrap_or(false) {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lm, lc) = divisor.leading()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(&lm)?;
            let qc = rc / &lc;
            let t = Poly::term(qc.clone(), qm.clone());
            rem = &rem - &(&t * divisor);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Removes every factor of `divisor` that divides `self` exactly.
    pub fn strip_factor(&self, divisor: &Poly) -> Poly {
        if divisor.as_constant().is_some() {
            return self.clone();
        }
        let mut p = self.clone();
        while !p.is_zero() {
            match p.div_exact(divisor) {
                Some(q) => p = q,
                None => break,
            }
        }
        p
    }

    /// Exact square root, if `self` is the square of a polynomial.
    pub fn sqrt_exact(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = self.leading()?;
        let root_c = rational_sqrt(lc)?;
        let mut half = Monomial::one();
        for (v, e) in lm.iter() {
            if e % 2 != 0 {
                return None;
            }
            half = half.mul(&Monomial::var_pow(v, e / 2));
        }
        let lead = Poly::term(root_c.clone(), half.clone());
        let two_lead_c = root_c * Rational::from_integer(BigInt::from(2));
        let mut root = lead;
        let mut rem = self - &(&root * &root);
        let cap = self.len() * 4 + 8;
        for _ in 0..cap {
            let Some((rm, rc)) = rem.leading() else {
                return Some(root);
            };
            let qm = rm.div(&half)?;
            if qm.lex_cmp(&half) != Ordering::Less {
                return None;
            }
            let t = Poly::term(rc / &two_lead_c, qm);
            root = &root + &t;
            rem = self - &(&root * &root);
        }
        if rem.is_zero() {
            Some(root)
        } else {
            None
        }
    }

    /// Terms in display order: descending total degree, then lexicographic.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| b.0.lex_cmp(a.0)));
        v
    }
}

pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                *acc.entry(m1.mul(m2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly { terms: acc }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Quotient of two polynomials, kept with integer coefficients and a positive-leading denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        let mut r = RatFn { num, den };
        r.normalize();
        r
    }

    pub fn poly(p: Poly) -> Self {
        RatFn::new(p, Poly::one())
    }

    pub fn zero() -> Self {
        RatFn::poly(Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.monomial_content(|_| true).gcd(&self.den.monomial_content(|_| true));
        if !g.is_one() {
            self.num = self.num.div_monomial(&g).expect("gcd divides");
            self.den = self.den.div_monomial(&g).expect("gcd divides");
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = Poly::one();
        } else if self.den.len() > 1 {
            // cancel a polynomial denominator factor shared with the numerator
            if let Some(q) = self.den.primitive().div_exact(&self.num.primitive()) {
                let scale = self.num.rational_content();
                let sign = if self.num.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
                    -Rational::one()
                } else {
                    Rational::one()
                };
                let den_scale = self.den.rational_content()
                    * if self.den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
                        -Rational::one()
                    } else {
                        Rational::one()
                    };
                self.num = Poly::constant(scale * sign / den_scale);
                self.den = q;
            }
        }
        // integer coefficients, den positive-leading, overall content moved to numerator
        let nc = self.num.rational_content();
        let mut dc = self.den.rational_content();
        if self.den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            dc = -dc;
        }
        let k = &nc / &dc;
        let nprim = self.num.scale(&nc.recip());
        let dprim = self.den.scale(&dc.recip());
        let (kn, kd) = (k.numer().clone(), k.denom().clone());
        self.num = nprim.scale(&Rational::from_integer(kn));
        self.den = dprim.scale(&Rational::from_integer(kd));
    }

    pub fn contains(&self, var: &str) -> bool {
        self.num.contains(var) || self.den.contains(var)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    /// Substitutes `var = value` in numerator and denominator.
    pub fn substitute(&self, var: &str, value: &RatFn) -> RatFn {
        let dn = self.num.degree_in(var);
        let dd = self.den.degree_in(var);
        let n = self.num.substitute_fraction(var, &value.num, &value.den);
        let d = self.den.substitute_fraction(var, &value.num, &value.den);
        // num/den^dn over den'/den^dd
        let (n, d) = if dn >= dd {
            (n, &d * &value.den.pow(dn - dd))
        } else {
            (&n * &value.den.pow(dd - dn), d)
        };
        RatFn::new(n, d)
    }

    pub fn bind(&self, values: &BTreeMap<String, Rational>) -> Option<RatFn> {
        let d = self.den.bind(values);
        if d.is_zero() {
            return None;
        }
        Some(RatFn::new(self.num.bind(values), d))
    }

    pub fn eval<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<T, String> {
        Ok(self.num.eval(values)? / self.den.eval(values)?)
    }

    /// Exact equality as rational functions (cross-multiplication).
    pub fn equals(&self, other: &RatFn) -> bool {
        (&(&self.num * &other.den) - &(&other.num * &self.den)).is_zero()
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |p: &Poly| {
            if p.len() > 1 {
                format!("({p})")
            } else {
                format!("{p}")
            }
        };
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else {
            let d = self.den.to_string();
            let d = if self.den.len() > 1 || d.contains('*') { format!("({d})") } else { d };
            write!(f, "{}/{}", wrap(&self.num), d)
        }
    }
}
