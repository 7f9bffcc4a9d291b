//! Lanczos gamma function (g = 7, n = 9), relative error below 1e-14 on the needed range.

use std::f64::consts::PI;

use crate::Scalar;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Γ(x) for real `x`, with reflection for `x < 1/2`. Poles return `±∞`.
pub fn gamma_f64(x: f64) -> f64 {
    if x < 0.5 {
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::INFINITY;
        }
        return PI / (s * gamma_f64(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let x = x - 1.0;
    let t = x + G + 0.5;
    // split the power so t^(x+1/2) does not overflow before e^-t scales it down
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * ((-t).exp() * half) * lanczos_sum(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma_f64(x: f64) -> f64 {
    if x < 0.5 {
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma_f64(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln()
}

pub fn gamma<T: Scalar>(x: T) -> T {
    T::lit(gamma_f64(x.to_f64_lossy()))
}

pub fn ln_gamma<T: Scalar>(x: T) -> T {
    T::lit(ln_gamma_f64(x.to_f64_lossy()))
}

/// True when `x` is a nonpositive integer.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}
