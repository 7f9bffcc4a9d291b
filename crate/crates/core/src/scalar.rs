//! Floating-point scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display, LowerExp};

use num_bigint::BigInt;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::Rational;

/// Real scalar type used by every numeric routine: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for values the type cannot hold.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Nearest representable value of an exact rational.
    fn from_rational(r: &Rational) -> Self {
        Self::lit(rational_to_f64(r))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts a big rational to the nearest `f64`, staying accurate for huge numerators/denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => a / b,
        _ => {
            // rescale by powers of two until both parts fit
            let nb = n.bits() as i64;
            let db = d.bits() as i64;
            let shift_n = (nb - 1000).max(0);
            let shift_d = (db - 1000).max(0);
            let a = (n >> shift_n as usize).to_f64().unwrap_or(0.0);
            let b = (d >> shift_d as usize).to_f64().unwrap_or(1.0);
            a / b * 2f64.powi((shift_n - shift_d) as i32)
        }
    }
}

/// Exact rational from an `f64` (binary expansion), used when numeric values re-enter exact code.
pub fn f64_to_rational(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `%.12e`-style formatting (`1.234567890123e+00`), used for every emitted float.
pub fn fmt_e12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.12e}", v);
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{}e{}{:02}", mant, sign, e.abs())
}

/// JSON number carrying the [`fmt_e12`] text verbatim; non-finite values become strings.
pub fn json_e12(v: f64) -> serde_json::Value {
    let s = fmt_e12(v);
    if !v.is_finite() {
        return serde_json::Value::String(s);
    }
    serde_json::Value::Number(s.parse().expect("formatted float parses as a JSON number"))
}
