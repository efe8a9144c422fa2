//! Closed p-elastic curves on the unit 2-sphere for `p ∈ (0, 1)`.
//!
//! Critical curves of `Θ_p(γ) = ∫_γ κ^p ds` have periodic curvature
//! oscillating between the positive roots of a potential `Q_{p,a}`. This
//! crate solves the closure condition for those curves, rebuilds them, and
//! evaluates energies, second variations and their Hopf tori in `S³`.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closure;
pub mod curve;
pub mod elliptic;
pub mod energy;
pub mod error;
pub mod export;
pub mod hopf;
pub mod mesh;
pub mod ode;
pub mod qpotential;
pub mod quad;
mod roots;
pub mod stability;
pub mod table;

pub use closure::{is_admissible, lambda_p, period, solve_closure, ClosureIndex};
pub use curve::{embed, integrate_profile, CurveState, CurveTrace};
pub use error::{Error, Result};
pub use qpotential::{a_star, curvature_bounds, kappa_star, q_eval, ElasticaParams, Exponent};
pub use quad::{integrate_over_arch, kappa_moment, SingularIntegral};
