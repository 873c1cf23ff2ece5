//! Proof synthesis for true triples over a finite interpretation.
//!
//! The emitted derivation is rooted in a RECURSION node whose assumptions
//! are the most general correctness specifications of all declared
//! procedures; one premise proves the goal and one premise proves each
//! procedure body against its specification. Each premise is built by
//! structural induction on the statement with strongest-postcondition
//! formulas as the intermediate assertions:
//!
//! * atomic statements take their axiom, plus one CONSEQUENCE when the
//!   goal's precondition is not already the axiom instance;
//! * loops use the formula of the exact reachable-state fixpoint as the
//!   invariant, closing with WHILE and one CONSEQUENCE;
//! * blocks snapshot their locals in fresh variables, prove the
//!   initializer-plus-body sequence, and close with BLOCK, SUBSTITUTION
//!   and CONSEQUENCE;
//! * calls instantiate the callee's specification (renaming its ghosts
//!   first when they collide with the goal) and close with PROCEDURE CALL,
//!   INVARIANCE, CONSEQUENCE, existential introduction of the ghosts, and
//!   a final CONSEQUENCE.
//!
//! Every CONSEQUENCE obligation is checked against the oracle before the
//! node is emitted; a failing obligation aborts synthesis and is reported
//! as an internal error, never dropped.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::oracle::{AssertionOracle, EnumerationOracle, ValidityVerdict};
use crate::proof::{Derivation, Rule};
use crate::semantics::{
    formula_for_set, sp_formula_in, Engine, EvalError, Interpretation, SemanticsError, State,
    StateSet, Triple, TripleVerdict,
};
use crate::syntax::{
    free_vars, stmt_metrics, subst_assertion, Assertion, BoolExpr, Expr, Program, Stmt, Subst,
    VarName,
};

use super::bound::{certify_linear_bound, BoundCertificate};
use super::mgcs::{build_mgcs_with, eq_exprs_vars, eq_vars, FreshCounter, Mgcs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("goal is not true: from {initial:?} the program reaches {reached:?}")]
    GoalNotTrue { initial: State, reached: State },
    #[error("internal error: emitted obligation is not valid (synthesizer bug)")]
    ObligationFailed {
        obligation: Assertion,
        counterexample: Option<State>,
    },
    #[error("statement is not well-formed for the program: {0}")]
    BadStatement(#[from] crate::syntax::ProgramError),
}

/// The result of a synthesis run: the proof plus its size accounting.
#[derive(Debug, Clone)]
pub struct SynthesisTrace {
    pub derivation: Derivation,
    pub rule_count: u64,
    /// `m` of the goal statement.
    pub goal_m: u64,
    /// `m` of each declared procedure body, in declaration order.
    pub body_ms: Vec<u64>,
    pub bound: BoundCertificate,
}

struct SynthCtx<'a> {
    prog: &'a Program,
    interp: &'a Interpretation,
    budget: usize,
    counter: FreshCounter,
    mgcs: Vec<Mgcs>,
    oracle: EnumerationOracle<'a>,
    engines: RefCell<HashMap<Vec<VarName>, Rc<Engine<'a>>>>,
}

impl<'a> SynthCtx<'a> {
    /// Engine over `var(prog)` joined with the given assertion variables.
    fn engine_for(&self, frees: &BTreeSet<VarName>) -> Result<Rc<Engine<'a>>, SynthError> {
        let support = Engine::support_for(self.prog, &frees.iter().cloned().collect::<Vec<_>>());
        let key: Vec<VarName> = support.vars().to_vec();
        if let Some(e) = self.engines.borrow().get(&key) {
            return Ok(e.clone());
        }
        let engine = Rc::new(Engine::new(self.prog, self.interp, support, self.budget)?);
        self.engines.borrow_mut().insert(key, engine.clone());
        Ok(engine)
    }

    fn require_valid(&self, obligation: &Assertion) -> Result<(), SynthError> {
        match self.oracle.is_valid(obligation)? {
            ValidityVerdict::Valid => Ok(()),
            ValidityVerdict::Invalid(state) => Err(SynthError::ObligationFailed {
                obligation: obligation.clone(),
                counterexample: Some(state),
            }),
            ValidityVerdict::OverBudget => Err(SynthError::ObligationFailed {
                obligation: obligation.clone(),
                counterexample: None,
            }),
        }
    }

    /// CONSEQUENCE with both obligations oracle-checked.
    fn conseq(
        &self,
        pre: Assertion,
        post: Assertion,
        child: Derivation,
    ) -> Result<Derivation, SynthError> {
        self.require_valid(&Assertion::implies(pre.clone(), child.conclusion.pre.clone()))?;
        self.require_valid(&Assertion::implies(
            child.conclusion.post.clone(),
            post.clone(),
        ))?;
        let stmt = child.conclusion.stmt.clone();
        Ok(Derivation::node(
            Rule::Consequence,
            Triple::new(pre, stmt, post),
            vec![child],
        ))
    }

    fn mgcs_for(&self, name: &str) -> &Mgcs {
        self.mgcs
            .iter()
            .find(|m| m.proc_name == name)
            .expect("mgcs exists for every declared procedure")
    }
}

/// Synthesizes a kernel-checkable derivation for a true goal triple.
pub fn synthesize(
    prog: &Program,
    interp: &Interpretation,
    goal: &Triple,
    budget: usize,
) -> Result<SynthesisTrace, SynthError> {
    prog.validate_stmt(&goal.stmt)?;
    match crate::semantics::triple_holds(prog, interp, goal, budget)? {
        TripleVerdict::Holds => {}
        TripleVerdict::Fails { initial, reached } => {
            return Err(SynthError::GoalNotTrue { initial, reached })
        }
    }
    let counter = FreshCounter::default();
    let mgcs = build_mgcs_with(prog, interp, budget, &counter)?;
    let ctx = SynthCtx {
        prog,
        interp,
        budget,
        counter,
        mgcs,
        oracle: EnumerationOracle::with_budget(interp, budget),
        engines: RefCell::new(HashMap::new()),
    };

    let mut children = vec![synth_stmt(&ctx, goal)?];
    for m in &ctx.mgcs {
        let decl = prog.decl(&m.proc_name).expect("declared");
        let premise = Triple::new(m.triple.pre.clone(), decl.body.clone(), m.triple.post.clone());
        children.push(synth_stmt(&ctx, &premise)?);
    }
    let derivation = Derivation::node(Rule::Recursion, goal.clone(), children);
    let rule_count = derivation.rule_count();
    let goal_m = stmt_metrics(&goal.stmt).m;
    let body_ms: Vec<u64> = prog
        .decls()
        .iter()
        .map(|d| stmt_metrics(&d.body).m)
        .collect();
    let bound = certify_linear_bound(prog, &derivation, &goal.stmt);
    Ok(SynthesisTrace {
        derivation,
        rule_count,
        goal_m,
        body_ms,
        bound,
    })
}

fn synth_stmt(ctx: &SynthCtx<'_>, goal: &Triple) -> Result<Derivation, SynthError> {
    let Triple { pre, stmt, post } = goal;
    match stmt {
        Stmt::Skip => {
            let axiom = Derivation::leaf(
                Rule::Skip,
                Triple::new(pre.clone(), Stmt::Skip, pre.clone()),
            );
            if pre == post {
                Ok(axiom)
            } else {
                ctx.conseq(pre.clone(), post.clone(), axiom)
            }
        }
        Stmt::Assign(xs, ts) => {
            let axiom_pre = subst_assertion(post, &Subst::parallel(xs, ts));
            let axiom = Derivation::leaf(
                Rule::Assign,
                Triple::new(axiom_pre.clone(), stmt.clone(), post.clone()),
            );
            if pre == &axiom_pre {
                Ok(axiom)
            } else {
                ctx.conseq(pre.clone(), post.clone(), axiom)
            }
        }
        Stmt::Seq(s1, s2) => {
            let mid = if **s1 == Stmt::Skip {
                pre.clone()
            } else if **s2 == Stmt::Skip {
                post.clone()
            } else {
                let engine = ctx.engine_for(&free_vars(pre))?;
                sp_formula_in(&engine, pre, s1)?
            };
            let d1 = synth_stmt(ctx, &Triple::new(pre.clone(), (**s1).clone(), mid.clone()))?;
            let d2 = synth_stmt(ctx, &Triple::new(mid, (**s2).clone(), post.clone()))?;
            Ok(Derivation::node(
                Rule::Composition,
                goal.clone(),
                vec![d1, d2],
            ))
        }
        Stmt::If(b, s1, s2) => {
            let guard = Assertion::from(b);
            let d1 = synth_stmt(
                ctx,
                &Triple::new(
                    Assertion::and(pre.clone(), guard.clone()),
                    (**s1).clone(),
                    post.clone(),
                ),
            )?;
            let d2 = synth_stmt(
                ctx,
                &Triple::new(
                    Assertion::and(pre.clone(), Assertion::not(guard)),
                    (**s2).clone(),
                    post.clone(),
                ),
            )?;
            Ok(Derivation::node(Rule::If, goal.clone(), vec![d1, d2]))
        }
        Stmt::While(b, body) => {
            let engine = ctx.engine_for(&free_vars(pre))?;
            let invariant_set = loop_head_states(ctx, &engine, pre, b, body)?;
            let invariant = formula_for_set(ctx.interp, &invariant_set);
            let guard = Assertion::from(b);
            let body_goal = Triple::new(
                Assertion::and(invariant.clone(), guard.clone()),
                (**body).clone(),
                invariant.clone(),
            );
            let body_d = synth_stmt(ctx, &body_goal)?;
            let while_node = Derivation::node(
                Rule::While,
                Triple::new(
                    invariant.clone(),
                    stmt.clone(),
                    Assertion::and(invariant, Assertion::not(guard)),
                ),
                vec![body_d],
            );
            ctx.conseq(pre.clone(), post.clone(), while_node)
        }
        Stmt::Block(locals, inits, body) => {
            let init_stmt = Stmt::block_init(locals, inits);
            if locals.is_empty() {
                let inner = Triple::new(
                    pre.clone(),
                    Stmt::seq(init_stmt, (**body).clone()),
                    post.clone(),
                );
                let d = synth_stmt(ctx, &inner)?;
                return Ok(Derivation::node(Rule::Block, goal.clone(), vec![d]));
            }
            let ghosts = ctx.counter.list(locals.len());
            let ghost_exprs: Vec<Expr> = ghosts.iter().map(|g| Expr::Var(g.clone())).collect();
            let inner_pre = Assertion::and(pre.clone(), eq_vars(locals, &ghosts));
            let inner_post = subst_assertion(post, &Subst::parallel(locals, &ghost_exprs));
            let inner = Triple::new(
                inner_pre.clone(),
                Stmt::seq(init_stmt, (**body).clone()),
                inner_post.clone(),
            );
            let d = synth_stmt(ctx, &inner)?;
            let block_node = Derivation::node(
                Rule::Block,
                Triple::new(inner_pre.clone(), stmt.clone(), inner_post.clone()),
                vec![d],
            );
            let back = Subst::renaming(&ghosts, locals);
            let sub_node = Derivation::substitution(
                Triple::new(
                    subst_assertion(&inner_pre, &back),
                    stmt.clone(),
                    subst_assertion(&inner_post, &back),
                ),
                ghosts.clone(),
                locals.clone(),
                block_node,
            );
            ctx.conseq(pre.clone(), post.clone(), sub_node)
        }
        Stmt::Call(name, actuals) => synth_call(ctx, goal, name, actuals),
    }
}

/// The exact set of states reachable at the loop head from `pre`.
fn loop_head_states(
    ctx: &SynthCtx<'_>,
    engine: &Engine<'_>,
    pre: &Assertion,
    guard: &BoolExpr,
    body: &Stmt,
) -> Result<StateSet, SynthError> {
    let space = engine.space().clone();
    let mut ev = crate::semantics::SetEvaluator::new(ctx.interp, &space);
    let mut reached = ev.eval(pre)?;
    let mut frontier: Vec<usize> = reached.iter_indices().collect();
    while let Some(idx) = frontier.pop() {
        let sigma = space.state(idx);
        if !crate::semantics::bool_holds(ctx.interp, &sigma, guard)? {
            continue;
        }
        if let crate::semantics::Outcome::Terminated(tau) = engine.run_stmt(body, &sigma)? {
            let t_idx = space.index(&tau);
            if !reached.contains_index(t_idx) {
                reached.insert_index(t_idx);
                frontier.push(t_idx);
            }
        }
    }
    Ok(reached)
}

fn synth_call(
    ctx: &SynthCtx<'_>,
    goal: &Triple,
    name: &str,
    actuals: &[Expr],
) -> Result<Derivation, SynthError> {
    let Triple { pre, stmt, post } = goal;
    let decl = ctx.prog.decl(name).expect("validated goal statement");
    let mgcs = ctx.mgcs_for(name);

    // rename the specification's ghosts away from the goal when they clash
    let mut clash_vars = free_vars(pre);
    clash_vars.extend(free_vars(post));
    for t in actuals {
        t.collect_vars(&mut clash_vars);
    }
    let old_ghosts: Vec<VarName> = mgcs
        .formal_ghosts
        .iter()
        .chain(mgcs.change_ghosts.iter())
        .cloned()
        .collect();
    let needs_rename = old_ghosts.iter().any(|g| clash_vars.contains(g));

    let assumption = Derivation::leaf(Rule::Assume, mgcs.triple.clone());
    let (base, formal_ghosts, change_ghosts) = if needs_rename {
        let formal_ghosts = ctx.counter.list(mgcs.formal_ghosts.len());
        let change_ghosts = ctx.counter.list(mgcs.change_ghosts.len());
        let new_ghosts: Vec<VarName> = formal_ghosts
            .iter()
            .chain(change_ghosts.iter())
            .cloned()
            .collect();
        let sub = Subst::renaming(&old_ghosts, &new_ghosts);
        let renamed = Triple::new(
            subst_assertion(&mgcs.triple.pre, &sub),
            mgcs.triple.stmt.clone(),
            subst_assertion(&mgcs.triple.post, &sub),
        );
        (
            Derivation::substitution(renamed, old_ghosts, new_ghosts, assumption),
            formal_ghosts,
            change_ghosts,
        )
    } else {
        (
            assumption,
            mgcs.formal_ghosts.clone(),
            mgcs.change_ghosts.clone(),
        )
    };

    // PROCEDURE CALL: instantiate the generic call with the actuals
    let call_pre = subst_assertion(
        &base.conclusion.pre,
        &Subst::parallel(&decl.formals, actuals),
    );
    let spec_post = base.conclusion.post.clone();
    let call_node = Derivation::node(
        Rule::ProcedureCall,
        Triple::new(call_pre.clone(), stmt.clone(), spec_post.clone()),
        vec![base],
    );

    // INVARIANCE with (p & actuals = formal-ghosts)[changed := change-ghosts]
    let change_ghost_exprs: Vec<Expr> = change_ghosts
        .iter()
        .map(|g| Expr::Var(g.clone()))
        .collect();
    let inv_body = if actuals.is_empty() {
        pre.clone()
    } else {
        Assertion::and(pre.clone(), eq_exprs_vars(actuals, &formal_ghosts))
    };
    let inv = subst_assertion(
        &inv_body,
        &Subst::parallel(&mgcs.changed, &change_ghost_exprs),
    );
    let inv_pre = Assertion::and(inv.clone(), call_pre);
    let inv_post = Assertion::and(inv, spec_post);
    let inv_node = Derivation::node(
        Rule::Invariance,
        Triple::new(inv_pre.clone(), stmt.clone(), inv_post),
        vec![call_node],
    );

    // CONSEQUENCE: the specification's postcondition entails the goal's
    let weakened = ctx.conseq(inv_pre.clone(), post.clone(), inv_node)?;

    // introduce the ghosts existentially, then strengthen to the goal's pre
    let mut ghosts = formal_ghosts;
    ghosts.extend(change_ghosts);
    let widened = if ghosts.is_empty() {
        weakened
    } else {
        Derivation::node(
            Rule::ExistsIntro,
            Triple::new(
                Assertion::Exists(ghosts, Box::new(inv_pre)),
                stmt.clone(),
                post.clone(),
            ),
            vec![weakened],
        )
    };
    ctx.conseq(pre.clone(), post.clone(), widened)
}
