//! Monotone rational functions on `[-1, 1]`.
//!
//! The crate has four pillars:
//!
//! * [`ratcore`] — representations of rational functions and the two odd
//!   kernel forms used throughout (sums of `c·z²x/(z²+3x²)` kernels and
//!   `x + Σ a·γ²x/(γ²+x²)` bump stacks), with closed-form derivatives,
//!   sup-norm computation and Sturm-backed monotonicity certification.
//! * [`miranda`] — a generic box solver for continuous vector fields whose
//!   components change sign across opposite faces (Poincaré–Miranda
//!   conditions), realized as a damped fixed-point iteration plus a Newton
//!   polish.
//! * [`comparison`] — the interpolation-node pipeline (slope thresholds,
//!   the nonlinear node system, interlacing) and the two derivative-bound
//!   verifiers for increasing rational functions: `R'(0) ≤ ½·9ⁿ·R(1)` for
//!   odd `R ∈ Q_{2n}` and the envelope `R'(x) < 9ⁿ‖R‖/(1−x²)` on `Q_n`.
//! * [`extremal`] — a constructor that stacks shrinking bump kernels onto
//!   `R(x) = x` to drive `R'(0)/‖R‖` toward `9^{n−1}` while keeping the
//!   function strictly increasing.

// Negated comparisons (`!(x > 0.0)`) are load-bearing throughout: they
// reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod extremal;
pub mod miranda;
pub mod poly;
pub mod ratcore;
