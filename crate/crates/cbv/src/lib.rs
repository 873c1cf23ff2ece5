//! Verification toolkit for a small imperative language with mutually
//! recursive, call-by-value procedures and initialized local blocks.
//!
//! The crate is organized around four layers:
//!
//! * [`syntax`] — abstract syntax, concrete grammar, substitution, and the
//!   purely syntactic analyses (occurrences, clash-freeness, change sets,
//!   purification, inlining, size metrics).
//! * [`semantics`] — finite first-order interpretations, states, the exact
//!   denotational meaning of programs (recursion resolved by a least
//!   fixpoint over the finite state space), truth of correctness triples,
//!   and strongest postconditions.
//! * [`oracle`] — validity of assertions in a fixed finite interpretation,
//!   used to discharge CONSEQUENCE obligations.
//! * [`proof`] and [`synth`] — machine-checkable derivations in the
//!   call-by-value proof system, a trusted checker for them, and a
//!   synthesizer that produces kernel-checked proofs for true triples
//!   together with a linear proof-length certificate.
//!
//! The [`harness`] module ties everything together behind the `cbv`
//! command-line binary.

pub mod harness;
pub mod oracle;
pub mod proof;
pub mod semantics;
pub mod syntax;
pub mod synth;
