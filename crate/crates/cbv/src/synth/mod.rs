//! Proof synthesis for true triples, with a linear-size certificate.

pub mod bound;
pub mod mgcs;
pub mod synthesize;

pub use bound::{certify_linear_bound, BoundCertificate};
pub use mgcs::{build_mgcs, Mgcs};
pub use synthesize::{synthesize, SynthError, SynthesisTrace};
