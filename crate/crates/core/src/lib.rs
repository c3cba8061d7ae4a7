//! Hadamard finite-part integrals
//!
//! ```text
//! fp ∫₀^∞ x^(α-1-n) f(x) dx,   0 < α < 1,  n ≥ 1
//! ```
//!
//! evaluated through the contour representation
//!
//! ```text
//! I = (-1)^(n+1) / (2i sin πα) ∮_C (-z)^(α-1-n) f(z) dz
//! ```
//!
//! where `C` encircles the positive real axis counterclockwise. The loop
//! integral is discretised with the double-exponential (DE) trapezoidal rule.
//! An independent ε-limit oracle and the closed forms of two reference
//! families live in [`oracle`].

pub mod complexmath;
pub mod contour;
pub mod error;
pub mod expr;
pub mod integrand;
pub mod oracle;
pub mod quadrature;
pub mod sum;
pub mod transform;

pub use complexmath::{gamma, neg_power, Complex};
pub use contour::{node, Contour, ContourPath, Node};
pub use error::{Error, Result};
pub use expr::Expr;
pub use integrand::{builtin, Integrand};
pub use oracle::{
    closed_form_i, closed_form_ii, epsilon_difference, fp_epsilon_limit, regularization_sum,
    tail_integral, ClosedForm, EpsilonLimit, EpsilonSchedule,
};
pub use quadrature::{
    auto_mesh, auto_mesh_with, fp_integral, fp_integral_full, fp_integral_symmetric,
    truncation_check, Formula, FpProblem, MeshStep, QuadratureParams, QuadratureResult, Side,
    TermRecord, Termination, TruncationDecision, Warning,
};
pub use transform::DeTransform;
