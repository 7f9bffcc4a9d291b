//! Jumarie's modified Riemann–Liouville derivative
//! `D^α f(x) = 1/Γ(1−α) · d/dx ∫₀ˣ (x−ξ)^{−α} (f(ξ) − f(0)) dξ`.

use super::gamma::gamma_f64;
use super::SpecialFnError;

#[derive(Clone, Debug)]
pub struct QuadratureOptions {
    /// Agreement required between successive mesh refinements.
    pub rel_tol: f64,
    pub base_cells: usize,
    pub max_cells: usize,
    /// Finite-difference step as a fraction of the distance to the nearer endpoint.
    pub step_fraction: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { rel_tol: 1e-8, base_cells: 256, max_cells: 1 << 16, step_fraction: 0.02 }
    }
}

const GL4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

/// Node `i` of an `n`-cell mesh on `[0, y]`, graded toward both ends with exponent `q`,
/// as `(ξ, y − ξ)`; the distance to `y` is formed directly so clustered nodes keep full precision.
fn graded_node(i: usize, n: usize, y: f64, q: f64) -> (f64, f64) {
    if i == 0 {
        return (0.0, y);
    }
    if i == n {
        return (y, 0.0);
    }
    let s = i as f64 / n as f64;
    let a = s.powf(q);
    let b = (1.0 - s).powf(q);
    (y * a / (a + b), y * b / (a + b))
}

/// `(∫_B^A u^{−α} du, ∫_B^A (A−u) u^{−α} du)` for `0 ≤ B < A`.
fn kernel_moments(a: f64, b: f64, alpha: f64) -> (f64, f64) {
    let h = a - b;
    if b > 0.0 && h < 0.05 * b {
        let (mut k0, mut k1) = (0.0, 0.0);
        for (x, w) in GL4_X.iter().zip(GL4_W) {
            let u = b + 0.5 * h * (x + 1.0);
            let ku = u.powf(-alpha) * 0.5 * h * w;
            k0 += ku;
            k1 += (a - u) * ku;
        }
        return (k0, k1);
    }
    let e1 = 1.0 - alpha;
    let e2 = 2.0 - alpha;
    let k0 = (a.powf(e1) - b.powf(e1)) / e1;
    let k1 = a * k0 - (a.powf(e2) - b.powf(e2)) / e2;
    (k0, k1)
}

/// Product integration of `∫₀ʸ (y−ξ)^{−α} g(ξ) dξ` with `g` piecewise linear on the graded mesh.
fn inner_integral(g: &dyn Fn(f64) -> f64, y: f64, alpha: f64, n: usize) -> f64 {
    let q = (2.0 / (1.0 - alpha)).min(12.0);
    let mut acc = 0.0;
    let (mut x0, mut d0) = (0.0, y);
    let mut g0 = g(0.0);
    for i in 1..=n {
        let (x1, d1) = graded_node(i, n, y, q);
        let g1 = g(x1);
        let h = if x1 < d1 { x1 - x0 } else { d0 - d1 };
        if h > 0.0 {
            let (k0, k1) = kernel_moments(d0, d1, alpha);
            acc += g0 * k0 + (g1 - g0) / h * k1;
        }
        x0 = x1;
        d0 = d1;
        g0 = g1;
    }
    acc
}

fn derivative_estimate(g: &dyn Fn(f64) -> f64, x: f64, h: f64, alpha: f64, n: usize) -> f64 {
    let d = |h: f64| (inner_integral(g, x + h, alpha, n) - inner_integral(g, x - h, alpha, n)) / (2.0 * h);
    let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Pointwise `D^α f(x)` for `0 < α < 1` on the domain `[0, domain_end]`.
pub fn jumarie_quadrature(
    f: &dyn Fn(f64) -> f64,
    alpha: f64,
    x: f64,
    domain_end: f64,
) -> Result<f64, SpecialFnError> {
    jumarie_quadrature_with(f, alpha, x, domain_end, &QuadratureOptions::default())
}

pub fn jumarie_quadrature_with(
    f: &dyn Fn(f64) -> f64,
    alpha: f64,
    x: f64,
    domain_end: f64,
    opts: &QuadratureOptions,
) -> Result<f64, SpecialFnError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SpecialFnError::InvalidOrder(alpha));
    }
    let margin = x.min(domain_end - x);
    if margin <= domain_end / opts.base_cells as f64 {
        return Err(SpecialFnError::EndpointTooClose(x));
    }
    let f0 = f(0.0);
    let g = move |s: f64| f(s) - f0;
    let h = opts.step_fraction * margin;
    let scale = 1.0 / gamma_f64(1.0 - alpha);
    let mut n = opts.base_cells;
    let mut prev = derivative_estimate(&g, x, h, alpha, n) * scale;
    while n < opts.max_cells {
        n *= 2;
        let cur = derivative_estimate(&g, x, h, alpha, n) * scale;
        if (cur - prev).abs() <= opts.rel_tol * cur.abs().max(1e-9) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(SpecialFnError::NonConvergence { terms: n })
}

/// L1 discretization of `D^α` on the uniform grid `x_i = i·h`, for every node.
///
/// Node 0 gets 0, the limit for functions differentiable at the origin.
pub fn jumarie_l1(samples: &[f64], h: f64, alpha: f64) -> Vec<f64> {
    if (alpha - 1.0).abs() < f64::EPSILON {
        return classical_gradient(samples, h);
    }
    let n = samples.len();
    let e = 1.0 - alpha;
    let b: Vec<f64> = (0..n).map(|m| ((m + 1) as f64).powf(e) - (m as f64).powf(e)).collect();
    let c = h.powf(-alpha) / gamma_f64(2.0 - alpha);
    let diffs: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for j in 0..k {
            s += b[k - 1 - j] * diffs[j];
        }
        *o = c * s;
    }
    out
}

fn classical_gradient(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    (0..n)
        .map(|i| match i {
            0 if n > 1 => (samples[1] - samples[0]) / h,
            i if i + 1 == n && n > 1 => (samples[i] - samples[i - 1]) / h,
            i if n > 2 => (samples[i + 1] - samples[i - 1]) / (2.0 * h),
            _ => 0.0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_fn::gamma::gamma_f64;

    #[test]
    fn linear_function_half_order() {
        let v = jumarie_quadrature(&|x| x, 0.5, 1.0, 2.0).unwrap();
        assert!((v - 1.128_379_167_095_512_6).abs() < 1e-6, "{v}");
    }

    #[test]
    fn constants_have_zero_derivative() {
        let v = jumarie_quadrature(&|_| 3.5, 0.5, 1.0, 2.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn square_half_order() {
        let v = jumarie_quadrature(&|x| x * x, 0.5, 1.0, 2.0).unwrap();
        assert!((v - 1.504_505_556_127_143).abs() < 1e-6, "{v}");
    }

    #[test]
    fn endpoint_guard() {
        assert!(matches!(
            jumarie_quadrature(&|x| x, 0.5, 1e-5, 2.0),
            Err(SpecialFnError::EndpointTooClose(_))
        ));
    }

    #[test]
    fn l1_on_linear_function_is_exact() {
        let h = 0.01;
        let samples: Vec<f64> = (0..=200).map(|i| i as f64 * h).collect();
        let d = jumarie_l1(&samples, h, 0.6);
        let want = 1.5f64.powf(0.4) / gamma_f64(1.4);
        assert!((d[150] - want).abs() < 1e-12);
    }
}
