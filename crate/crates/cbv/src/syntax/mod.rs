//! Abstract syntax, concrete grammar and the purely syntactic analyses.

pub mod ast;
pub mod change;
pub mod lexer;
pub mod metrics;
pub mod occurs;
pub mod parser;
pub mod render;
pub mod subst;
pub mod transform;

pub use ast::{
    expr_vars, fresh_name, is_fresh_name, Assertion, BoolExpr, Expr, ProcDecl, ProcName, Program,
    ProgramError, Stmt, Symbol, VarName,
};
pub use change::{change_decls, change_set};
pub use metrics::{program_l, stmt_metrics, Metrics};
pub use occurs::{classify_occurrences, clash_free, ClashWitness, OccSite, Occurrence, OccurrenceKind};
pub use parser::{
    parse_assertion, parse_program, parse_program_with, parse_stmt, ParseError, ParseOptions,
};
pub use render::{render_assertion, render_bool, render_expr, render_program, render_stmt};
pub use subst::{free_vars, subst_assertion, subst_bool, subst_expr, subst_exprs, Subst};
pub use transform::{
    call_positions, elaborate_static_scope, inline_once, is_pure, purify, InlineError, StmtPath,
};
