//! Partial-correctness triples, their truth over a finite interpretation,
//! and strongest postconditions both as state sets and as defining
//! formulas.

use std::collections::BTreeSet;

use super::eval::SetEvaluator;
use super::exec::{Engine, Outcome, SemanticsError};
use super::interp::Interpretation;
use super::state::{State, StateSet};
use crate::syntax::{free_vars, render_assertion, render_stmt, Assertion, Expr, Program, Stmt};

/// A correctness formula `{pre} stmt {post}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub pre: Assertion,
    pub stmt: Stmt,
    pub post: Assertion,
}

impl Triple {
    pub fn new(pre: Assertion, stmt: Stmt, post: Assertion) -> Triple {
        Triple { pre, stmt, post }
    }

    /// Free variables of the pre- and postcondition.
    pub fn assertion_vars(&self) -> BTreeSet<String> {
        let mut vars = free_vars(&self.pre);
        vars.extend(free_vars(&self.post));
        vars
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{{{}}} {} {{{}}}",
            render_assertion(&self.pre),
            render_stmt(&self.stmt),
            render_assertion(&self.post)
        )
    }
}

/// Truth of a triple: either it holds, or the first falsifying initial
/// state in enumeration order is returned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TripleVerdict {
    Holds,
    Fails { initial: State, reached: State },
}

impl TripleVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, TripleVerdict::Holds)
    }
}

/// Decides `{p} S {q}` by enumerating every state over the program
/// variables joined with the assertion variables.
pub fn triple_holds(
    prog: &Program,
    interp: &Interpretation,
    triple: &Triple,
    budget: usize,
) -> Result<TripleVerdict, SemanticsError> {
    let mut extra: Vec<String> = triple.assertion_vars().into_iter().collect();
    let mut stmt_vars = BTreeSet::new();
    triple.stmt.collect_vars(&mut stmt_vars);
    extra.extend(stmt_vars);
    let support = Engine::support_for(prog, &extra);
    let engine = Engine::new(prog, interp, support, budget)?;
    let space = engine.space().clone();
    let mut ev = SetEvaluator::new(interp, &space);
    let pre_set = ev.eval(&triple.pre)?;
    let post_set = ev.eval(&triple.post)?;
    for idx in pre_set.iter_indices() {
        let sigma = space.state(idx);
        if let Outcome::Terminated(tau) = engine.run_stmt(&triple.stmt, &sigma)? {
            if !post_set.contains_index(space.index(&tau)) {
                return Ok(TripleVerdict::Fails {
                    initial: sigma,
                    reached: tau,
                });
            }
        }
    }
    Ok(TripleVerdict::Holds)
}

/// The strongest postcondition `sp(p, S)`: the set of states reachable by
/// running `S` from a state satisfying `p`. Diverging runs contribute
/// nothing. The result lives over the engine's support.
pub fn strongest_post_in(
    engine: &Engine<'_>,
    p: &Assertion,
    s: &Stmt,
) -> Result<StateSet, SemanticsError> {
    let space = engine.space().clone();
    let mut ev = SetEvaluator::new(engine.interp(), &space);
    let pre_set = ev.eval(p)?;
    let mut out = StateSet::empty(&space);
    for idx in pre_set.iter_indices() {
        let sigma = space.state(idx);
        if let Outcome::Terminated(tau) = engine.run_stmt(s, &sigma)? {
            out.insert(&tau);
        }
    }
    Ok(out)
}

/// `sp(p, S)` over the support `var(prog) ∪ free(p) ∪ var(S)`.
pub fn strongest_post(
    prog: &Program,
    interp: &Interpretation,
    p: &Assertion,
    s: &Stmt,
    budget: usize,
) -> Result<StateSet, SemanticsError> {
    let mut extra: Vec<String> = free_vars(p).into_iter().collect();
    let mut stmt_vars = BTreeSet::new();
    s.collect_vars(&mut stmt_vars);
    extra.extend(stmt_vars);
    let support = Engine::support_for(prog, &extra);
    let engine = Engine::new(prog, interp, support, budget)?;
    strongest_post_in(&engine, p, s)
}

/// Encodes a state set as a formula: one disjunct per member state, each a
/// conjunction `x1 = c1 & ... & xk = ck` over the support in variable
/// order, with states in enumeration order. The empty set is the canonical
/// false formula `0 = 1`.
pub fn formula_for_set(interp: &Interpretation, set: &StateSet) -> Assertion {
    let support = set.space().support().clone();
    let disjuncts: Vec<Assertion> = set
        .states()
        .map(|state| {
            Assertion::conj(
                support
                    .vars()
                    .iter()
                    .map(|v| {
                        Assertion::eq(
                            Expr::Var(v.clone()),
                            Expr::Const(interp.element_const(state.get(v)).clone()),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    Assertion::disj(disjuncts)
}

/// A formula defining exactly `sp(p, S)` over the engine's support.
pub fn sp_formula_in(
    engine: &Engine<'_>,
    p: &Assertion,
    s: &Stmt,
) -> Result<Assertion, SemanticsError> {
    let set = strongest_post_in(engine, p, s)?;
    Ok(formula_for_set(engine.interp(), &set))
}

/// A formula defining exactly `sp(p, S)`; the finite interpretation makes
/// the assertion language expressive by construction.
pub fn sp_formula(
    prog: &Program,
    interp: &Interpretation,
    p: &Assertion,
    s: &Stmt,
    budget: usize,
) -> Result<Assertion, SemanticsError> {
    let set = strongest_post(prog, interp, p, s, budget)?;
    Ok(formula_for_set(interp, &set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval::holds;
    use crate::syntax::{parse_assertion, parse_program, parse_stmt};

    fn z(n: usize) -> Interpretation {
        Interpretation::zmod(n).unwrap()
    }

    fn check(
        src: &str,
        n: usize,
        pre: &str,
        stmt: &str,
        post: &str,
    ) -> TripleVerdict {
        let prog = parse_program(src).unwrap();
        let triple = Triple::new(
            parse_assertion(pre).unwrap(),
            parse_stmt(stmt).unwrap(),
            parse_assertion(post).unwrap(),
        );
        triple_holds(&prog, &z(n), &triple, 1 << 22).unwrap()
    }

    #[test]
    fn add_doubles_sum() {
        // {sum = z} add(sum) {sum = z + z} holds in every zmod model
        for n in [2, 3, 5] {
            let v = check(
                "proc add(u) :: sum := sum + u\nmain: add(sum)",
                n,
                "sum = z",
                "add(sum)",
                "sum = z + z",
            );
            assert!(v.holds(), "failed in zmod:{n}");
        }
    }

    #[test]
    fn nonterminating_loop_satisfies_anything() {
        let v = check("main: skip", 2, "true", "while 0 = 0 do skip od", "false");
        assert!(v.holds());
    }

    #[test]
    fn double_block_copies_agree() {
        let v = check(
            "main: skip",
            2,
            "true",
            "begin local u := u ; x := u end ; begin local u := u ; y := u end",
            "x = y",
        );
        assert!(v.holds());
    }

    #[test]
    fn false_triple_reports_first_state() {
        let v = check("main: skip", 2, "true", "x := 0", "x = 1");
        match v {
            TripleVerdict::Fails { initial, reached } => {
                // first state in enumeration order is all-zero
                assert!(initial.support().vars().iter().all(|v| initial.get(v) == 0));
                assert_eq!(reached.get("x"), 0);
            }
            TripleVerdict::Holds => panic!("expected failure"),
        }
    }

    #[test]
    fn sp_of_simple_assignment() {
        let prog = parse_program("main: skip").unwrap();
        let interp = z(3);
        // sp(true, x := 0): all states with x = 0
        let set = strongest_post(
            &prog,
            &interp,
            &Assertion::True,
            &parse_stmt("x := 0").unwrap(),
            1 << 20,
        )
        .unwrap();
        assert!(set.states().all(|s| s.get("x") == 0));
        assert_eq!(set.len(), 1); // support is {x} only
        // sp(false, S) is empty
        let set = strongest_post(
            &prog,
            &interp,
            &Assertion::False,
            &parse_stmt("x := 0").unwrap(),
            1 << 20,
        )
        .unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn sp_through_loop_in_z3() {
        let prog = parse_program("main: skip").unwrap();
        let interp = z(3);
        let set = strongest_post(
            &prog,
            &interp,
            &parse_assertion("x = 0").unwrap(),
            &parse_stmt("while !(x = 1) do x := x + 1 od").unwrap(),
            1 << 20,
        )
        .unwrap();
        let states: Vec<State> = set.states().collect();
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].get("x"), 1);
    }

    #[test]
    fn sp_formula_canonical_shapes() {
        let prog = parse_program("main: skip").unwrap();
        let interp = z(2);
        // empty set takes the canonical false formula
        let f = sp_formula(
            &prog,
            &interp,
            &Assertion::False,
            &Stmt::Skip,
            1 << 20,
        )
        .unwrap();
        assert_eq!(crate::syntax::render_assertion(&f), "0 = 1");
        // singleton over {x, y}
        let f = sp_formula(
            &prog,
            &interp,
            &parse_assertion("x = 1 & y = 0").unwrap(),
            &Stmt::Skip,
            1 << 20,
        )
        .unwrap();
        assert_eq!(crate::syntax::render_assertion(&f), "x = 1 & y = 0");
    }

    #[test]
    fn state_budget_is_an_explicit_error() {
        let prog = parse_program("main: a := b + c ; d := e").unwrap();
        let interp = z(3);
        let triple = Triple::new(
            parse_assertion("true").unwrap(),
            prog.main().clone(),
            parse_assertion("true").unwrap(),
        );
        let err = triple_holds(&prog, &interp, &triple, 10).unwrap_err();
        assert!(matches!(
            err,
            crate::semantics::SemanticsError::Space(
                crate::semantics::SpaceError::BudgetExceeded { .. }
            )
        ));
    }

    #[test]
    fn sp_formula_defines_exactly_the_set() {
        let prog = parse_program("main: skip").unwrap();
        let interp = z(2);
        let p = parse_assertion("true").unwrap();
        let s = parse_stmt("x := 0").unwrap();
        let f = sp_formula(&prog, &interp, &p, &s, 1 << 20).unwrap();
        let q = parse_assertion("x = 0").unwrap();
        // same truth set as x = 0 on every state over {x}
        let set = strongest_post(&prog, &interp, &p, &s, 1 << 20).unwrap();
        for state in set.space().states() {
            assert_eq!(
                holds(&interp, &state, &f).unwrap(),
                holds(&interp, &state, &q).unwrap()
            );
        }
    }
}
