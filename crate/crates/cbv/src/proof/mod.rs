//! Machine-checkable derivations and their trusted checker.

pub mod check;
pub mod derivation;
pub mod text;

pub use check::{
    check_derivation, check_derivation_budgeted, check_derivation_with, CheckFailure, CheckReport,
    NodeReport,
};
pub use derivation::{AssumptionContext, ContextError, Derivation, Rule};
pub use text::{parse_derivation, render_derivation, ProofParseError};
