//! # heatflow
//!
//! Exact and numerical checks of the sign patterns of time-derivatives of
//! entropy along the one-dimensional heat flow.
//!
//! For an initial law μ₀ on ℝ and μ_t = Law(X₀ + √t G), the crate tracks
//!
//! | quantity | definition |
//! |----------|------------|
//! | `H(t)`   | ∫ p_t log p_t dx (negative differential entropy) |
//! | `I(t)`   | ∫ (∂ₓp_t)² / p_t dx (Fisher information) |
//! | `y(t)`   | −2 H(t) |
//! | `ẏ(t)`   | I(t) = dy/dt (de Bruijn) |
//! | `N(t)`   | e^{y(t)} (entropy power) |
//!
//! and evaluates three families of inequalities for m ≥ 1:
//!
//! - entropy power: (−1)^{m−1} N^{(m)}(t) ≥ 0
//! - completely monotone: (−1)^{m−1} ẏ^{(m−1)}(t) ≥ 0
//! - McKean: (−1)^{m−1} ẏ^{(m−1)}(t) ≥ (m−1)! / σ_t^{2m}
//!
//! Initial laws are finite Gaussian mixtures, so every density along the
//! flow is closed form and time-derivatives are taken under the integral
//! sign. The [`bell`] module carries the exact combinatorics (complete
//! Bell polynomials, Faà di Bruno, the inequality chain linking the
//! entropy-power signs to the McKean bound), and [`tderiv`] provides an
//! independent spectral/finite-difference oracle in t.

pub mod bell;
pub mod cli;
pub mod conjectures;
mod error;
pub mod functionals;
pub mod mixture;
pub mod tderiv;

pub use error::{Error, Result};

/// Highest derivative order handled in double precision.
pub const MAX_ORDER: usize = 6;

/// Order used when none is requested.
pub const DEFAULT_ORDER: usize = 4;
