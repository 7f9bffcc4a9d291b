//! Extended-precision pieces behind the Mittag-Leffler series: a Stirling
//! log-gamma with exact Bernoulli numbers and a cache of `1/Γ(1 + jα)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;

use crate::Rational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Default number of extra significant decimal digits carried beyond cancellation.
pub const DEFAULT_DIGITS: u32 = 30;

/// Digits from `TWSOLVE_PRECISION`, read once.
pub fn precision_digits() -> u32 {
    static DIGITS: OnceLock<u32> = OnceLock::new();
    *DIGITS.get_or_init(|| {
        std::env::var("TWSOLVE_PRECISION")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .filter(|d: &u32| (16..=300).contains(d))
            .unwrap_or(DEFAULT_DIGITS)
    })
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
    static INV_GAMMA: RefCell<HashMap<(u64, usize), Vec<BigFloat>>> = RefCell::new(HashMap::new());
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn ldexp(mut v: f64, mut k: i64) -> f64 {
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k as i32)
}

/// Nearest `f64` (mantissa words are little-endian, value `0.m × 2^e`).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite value");
    let top = *m.last().expect("nonempty mantissa");
    let next = if m.len() > 1 { m[m.len() - 2] } else { 0 };
    let v = top as f64 + next as f64 / 2f64.powi(64);
    let r = ldexp(v, e as i64 - 64);
    if s == Sign::Neg {
        -r
    } else {
        r
    }
}

fn exp2_of(x: &BigFloat) -> i64 {
    x.exponent().map_or(i64::MIN / 4, |e| e as i64)
}

/// `B_0 .. B_n` (Akiyama–Tanigawa, `B_1 = +1/2`), cached.
fn bernoulli(n: usize) -> Vec<Rational> {
    static CACHE: Mutex<Vec<Rational>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().expect("bernoulli cache");
    if cache.len() <= n {
        let target = (n + 1).max(cache.len() * 2).max(64);
        let mut out = Vec::with_capacity(target);
        let mut a: Vec<Rational> = Vec::with_capacity(target);
        for m in 0..target {
            a.push(Rational::new(BigInt::from(1), BigInt::from(m as u64 + 1)));
            for j in (1..=m).rev() {
                let d = &a[j - 1] - &a[j];
                a[j - 1] = d * Rational::from_integer(BigInt::from(j as u64));
            }
            out.push(a[0].clone());
        }
        *cache = out;
    }
    cache[..=n].to_vec()
}

fn rational_big(r: &Rational, p: usize, cc: &mut Consts) -> BigFloat {
    let n = BigFloat::parse(&r.numer().to_string(), Radix::Dec, p, RM, cc);
    let d = BigFloat::parse(&r.denom().to_string(), Radix::Dec, p, RM, cc);
    n.div(&d, p, RM)
}

/// `ln Γ(x)` for `x > 0`: upward shift, then the Stirling series.
pub fn ln_gamma_big(x: &BigFloat, p: usize, cc: &mut Consts) -> BigFloat {
    let wp = p + 32;
    let x0 = 0.3 * p as f64 + 10.0;
    let xf = to_f64(x);
    let shift = if xf < x0 { (x0 - xf).ceil() as usize } else { 0 };
    let one = BigFloat::from_u64(1, wp);
    let mut prod = one.clone();
    let mut y = x.clone();
    for _ in 0..shift {
        prod = prod.mul(&y, wp, RM);
        y = y.add(&one, wp, RM);
    }
    let half = BigFloat::from_f64(0.5, wp);
    let two_pi = cc.pi(wp, RM).mul(&BigFloat::from_u64(2, wp), wp, RM);
    let ln_y = y.ln(wp, RM, cc);
    let mut acc = y.sub(&half, wp, RM).mul(&ln_y, wp, RM).sub(&y, wp, RM);
    acc = acc.add(&two_pi.ln(wp, RM, cc).mul(&half, wp, RM), wp, RM);
    let y2 = y.mul(&y, wp, RM);
    let mut ypow = y.clone();
    let max_j = 2 * p + 64;
    let mut bern = bernoulli(64);
    for j in 1..max_j {
        if bern.len() <= 2 * j {
            bern = bernoulli(2 * j + 32);
        }
        let b = rational_big(&bern[2 * j], wp, cc);
        let den = BigFloat::from_u64((2 * j * (2 * j - 1)) as u64, wp).mul(&ypow, wp, RM);
        let term = b.div(&den, wp, RM);
        acc = acc.add(&term, wp, RM);
        if exp2_of(&term) < exp2_of(&acc).max(1) - wp as i64 - 8 {
            break;
        }
        ypow = ypow.mul(&y2, wp, RM);
    }
    if shift > 0 {
        acc = acc.sub(&prod.ln(wp, RM, cc), wp, RM);
    }
    acc
}

/// `1/Γ(1 + jα)` for `j = 0 .. count`, cached per `(α, p)`.
fn inv_gamma_table(alpha: f64, p: usize, count: usize) -> Vec<BigFloat> {
    INV_GAMMA.with(|cache| {
        let mut cache = cache.borrow_mut();
        let entry = cache.entry((alpha.to_bits(), p)).or_default();
        if entry.len() < count {
            with_consts(|cc| {
                let a = BigFloat::from_f64(alpha, p + 64);
                let one = BigFloat::from_u64(1, p + 64);
                for j in entry.len()..count {
                    let x = a.mul(&BigFloat::from_u64(j as u64, p + 64), p + 64, RM).add(&one, p + 64, RM);
                    let lg = ln_gamma_big(&x, p, cc);
                    entry.push(lg.neg().exp(p + 32, RM, cc));
                }
            });
        }
        entry[..count].to_vec()
    })
}

/// `Σ_{i<count} z^j / Γ(1 + jα)` over `j = offset + i·step`, summed at `p` bits.
pub fn series_big(alpha: f64, z: (f64, f64), offset: usize, step: usize, count: usize, p: usize) -> (f64, f64) {
    let jmax = offset + step * count.saturating_sub(1) + 1;
    let inv = inv_gamma_table(alpha, p, jmax);
    let zr = BigFloat::from_f64(z.0, p);
    let zi = BigFloat::from_f64(z.1, p);
    let cmul = |a: &(BigFloat, BigFloat), b: &(BigFloat, BigFloat)| {
        let re = a.0.mul(&b.0, p, RM).sub(&a.1.mul(&b.1, p, RM), p, RM);
        let im = a.0.mul(&b.1, p, RM).add(&a.1.mul(&b.0, p, RM), p, RM);
        (re, im)
    };
    let zc = (zr, zi);
    let mut w = (BigFloat::from_u64(1, p), BigFloat::from_u64(0, p));
    for _ in 0..step {
        w = cmul(&w, &zc);
    }
    let mut term = (BigFloat::from_u64(1, p), BigFloat::from_u64(0, p));
    for _ in 0..offset {
        term = cmul(&term, &zc);
    }
    let mut sr = BigFloat::from_u64(0, p);
    let mut si = BigFloat::from_u64(0, p);
    for i in 0..count {
        let g = &inv[offset + i * step];
        sr = sr.add(&term.0.mul(g, p, RM), p, RM);
        si = si.add(&term.1.mul(g, p, RM), p, RM);
        term = cmul(&term, &w);
    }
    (to_f64(&sr), to_f64(&si))
}
