//! Travelling-wave solutions of polynomial nonlinear PDEs.
//!
//! The pipeline mechanizes two closely related ansatz methods:
//!
//! * the **tanh-method**: reduce the PDE with `ξ = kx + my + ct`, substitute
//!   `u = Σ aᵢ φⁱ` with `φ = tanh ξ`, and match powers of `φ`;
//! * the **fractional sub-equation method**: the same construction for
//!   Jumarie-type fractional PDEs, with `Φ` solving the fractional Riccati
//!   equation `D^α Φ = σ + Φ²` and the solutions expressed through
//!   Mittag-Leffler generalized hyperbolic/trigonometric functions.
//!
//! Symbolic stages ([`pde_ast`], [`travelling_wave`], [`phi_calculus`],
//! [`algebra_system`]) work over exact rationals. Numeric stages
//! ([`special_fn`], [`solution_verify`]) are generic over [`Scalar`]
//! (`f32`/`f64`); the aliases below fix the common choices.

pub mod algebra_system;
pub mod pde_ast;
pub mod phi_calculus;
pub mod pipeline;
pub mod poly;
pub mod scalar;
pub mod solution_verify;
pub mod special_fn;
pub mod travelling_wave;

pub use scalar::Scalar;

/// Exact coefficient field of every symbolic stage.
pub type Rational = num_rational::BigRational;
/// Default real scalar of the numeric stages.
pub type Real = f64;
/// Complex numbers over the default real scalar.
pub type Complex = num_complex::Complex<Real>;

pub type ClosedForm = solution_verify::ClosedFormSolution<Real>;
pub type Residual = solution_verify::ResidualReport<Real>;
