//! Finite interpretations, states and the exact denotational semantics.

pub mod eval;
pub mod exec;
pub mod interp;
pub mod state;
pub mod triples;

pub use eval::{bool_holds, eval_expr, eval_exprs, holds, EvalError, FormulaCache, SetEvaluator};
pub use exec::{
    fixpoint_env, meaning, run_bounded, Engine, FueledOutcome, Outcome, ProcEnv, SemanticsError,
};
pub use interp::{Elem, Interpretation, ModelError};
pub use state::{SpaceError, State, StateSet, StateSpace, Support};
pub use triples::{
    formula_for_set, sp_formula, sp_formula_in, strongest_post, strongest_post_in, triple_holds,
    Triple, TripleVerdict,
};

/// Default bound on enumerable state spaces.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;
