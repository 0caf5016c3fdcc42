//! Shape operators for congruences of solutions of connection-type second
//! order PDE systems `∂²u^σ/∂x^i∂x^j = F_ij^σ(x, u, ∂u)`, and the collapse
//! analysis built on their traces.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] parses component functions and evaluates them with exact
//!   derivatives through nested dual numbers.
//! * [`geometry`] holds the system, the congruence and the direction pair, and
//!   computes total derivatives, semi-horizontal coefficients and the
//!   embeddedness residuals.
//! * [`curvature`] computes the curvature tensors and checks the vertical
//!   curvature identities with a generic Frölicher–Nijenhuis bracket.
//! * [`shape`] builds the directional and total shape operators and their
//!   evolution residuals.
//! * [`collapse`] integrates congruence curves, the compatible volume and
//!   locates collapse.

pub mod collapse;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod shape;
pub mod tensor;

pub use error::{DomainError, Error, ParseError, Result};
pub use expr::{DerivativeRequest, Expression, Scope, VariableLayout};
