//! Most general correctness specifications: the recursion assumptions used
//! by the completeness construction.
//!
//! For a declaration `P(u..) :: S` the specification is
//! `{x.. = z.. & u.. = v..} P(u..) {exists u..: SP(x.. = z.. & u.. = v.., S)}`
//! where `x..` are the variables of `change(D)` minus the formals, and
//! `z..`, `v..` are fresh snapshot variables. The formals, snapshots and
//! changed variables are pairwise disjoint by construction.

use std::cell::Cell;

use crate::semantics::{Engine, Interpretation, Triple};
use crate::syntax::{change_decls, fresh_name, Assertion, Expr, Program, Stmt, VarName};

use super::SynthError;

/// One procedure's most general correctness specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mgcs {
    pub proc_name: String,
    /// `{x.. = z.. & u.. = v..} P(u..) {exists u..: SP(..)}`
    pub triple: Triple,
    /// `x..`: the changeable globals, in name order.
    pub changed: Vec<VarName>,
    /// `z..`: fresh snapshots of `x..`.
    pub change_ghosts: Vec<VarName>,
    /// `v..`: fresh snapshots of the formals.
    pub formal_ghosts: Vec<VarName>,
}

/// Monotone allocator for `$k` names, shared across one synthesis run.
#[derive(Debug, Default)]
pub struct FreshCounter(Cell<u64>);

impl FreshCounter {
    pub fn list(&self, n: usize) -> Vec<VarName> {
        (0..n)
            .map(|_| {
                let k = self.0.get();
                self.0.set(k + 1);
                fresh_name(k)
            })
            .collect()
    }
}

/// Equalities `x1 = y1 & .. & xk = yk` between variables, `true` if empty.
pub(crate) fn eq_vars(xs: &[VarName], ys: &[VarName]) -> Assertion {
    Assertion::conj(
        xs.iter()
            .zip(ys.iter())
            .map(|(x, y)| Assertion::eq(Expr::Var(x.clone()), Expr::Var(y.clone())))
            .collect(),
    )
}

/// Equalities `t1 = v1 & .. & tk = vk` between expressions and variables.
pub(crate) fn eq_exprs_vars(ts: &[Expr], vs: &[VarName]) -> Assertion {
    Assertion::conj(
        ts.iter()
            .zip(vs.iter())
            .map(|(t, v)| Assertion::eq(t.clone(), Expr::Var(v.clone())))
            .collect(),
    )
}

/// The mgcs precondition; either equation block may be empty.
pub(crate) fn mgcs_pre(
    changed: &[VarName],
    change_ghosts: &[VarName],
    formals: &[VarName],
    formal_ghosts: &[VarName],
) -> Assertion {
    match (changed.is_empty(), formals.is_empty()) {
        (true, true) => Assertion::True,
        (false, true) => eq_vars(changed, change_ghosts),
        (true, false) => eq_vars(formals, formal_ghosts),
        (false, false) => Assertion::and(
            eq_vars(changed, change_ghosts),
            eq_vars(formals, formal_ghosts),
        ),
    }
}

/// Builds the specification set `G(D)`, allocating ghosts from `counter`
/// in declaration order (formal snapshots first, then change snapshots).
pub fn build_mgcs_with(
    prog: &Program,
    interp: &Interpretation,
    budget: usize,
    counter: &FreshCounter,
) -> Result<Vec<Mgcs>, SynthError> {
    let decl_change = change_decls(prog);
    let mut out = Vec::new();
    for decl in prog.decls() {
        let changed: Vec<VarName> = decl_change
            .iter()
            .filter(|v| !decl.formals.contains(*v))
            .cloned()
            .collect();
        let formal_ghosts = counter.list(decl.formals.len());
        let change_ghosts = counter.list(changed.len());
        let pre = mgcs_pre(&changed, &change_ghosts, &decl.formals, &formal_ghosts);

        let mut extra = change_ghosts.clone();
        extra.extend(formal_ghosts.clone());
        let support = Engine::support_for(prog, &extra);
        let engine = Engine::new(prog, interp, support, budget)?;
        let sp = crate::semantics::sp_formula_in(&engine, &pre, &decl.body)?;
        let post = Assertion::exists(decl.formals.clone(), sp);

        let call = Stmt::Call(
            decl.name.clone(),
            decl.formals.iter().map(|u| Expr::Var(u.clone())).collect(),
        );
        out.push(Mgcs {
            proc_name: decl.name.clone(),
            triple: Triple::new(pre, call, post),
            changed,
            change_ghosts,
            formal_ghosts,
        });
    }
    Ok(out)
}

/// Builds `G(D)` with a fresh ghost allocator.
pub fn build_mgcs(
    prog: &Program,
    interp: &Interpretation,
    budget: usize,
) -> Result<Vec<Mgcs>, SynthError> {
    build_mgcs_with(prog, interp, budget, &FreshCounter::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{holds, StateSpace, Support};
    use crate::syntax::{parse_program, render_assertion};

    #[test]
    fn add_mgcs_shape_and_truth_set() {
        let prog = parse_program("proc add(u) :: sum := sum + u\nmain: add(sum)").unwrap();
        let interp = Interpretation::zmod(2).unwrap();
        let mgcs = build_mgcs(&prog, &interp, 1 << 22).unwrap();
        assert_eq!(mgcs.len(), 1);
        let m = &mgcs[0];
        assert_eq!(m.changed, vec!["sum".to_string()]);
        assert_eq!(m.formal_ghosts, vec!["$0".to_string()]);
        assert_eq!(m.change_ghosts, vec!["$1".to_string()]);
        assert_eq!(
            render_assertion(&m.triple.pre),
            "sum = $1 & u = $0"
        );
        // the quantified postcondition defines exactly sum = $1 + $0
        let sup = Support::new(
            ["sum", "u", "z", "$0", "$1"]
                .iter()
                .map(|s| s.to_string()),
        );
        let space = StateSpace::new(sup, &interp, 1 << 20).unwrap();
        let want = Assertion::eq(
            Expr::var("sum"),
            Expr::bin("+", Expr::var("$1"), Expr::var("$0")),
        );
        for state in space.states() {
            assert_eq!(
                holds(&interp, &state, &m.triple.post).unwrap(),
                holds(&interp, &state, &want).unwrap(),
            );
        }
    }

    #[test]
    fn parameterless_skip_procedure() {
        let prog = parse_program("proc P() :: skip\nmain: P()").unwrap();
        let interp = Interpretation::zmod(2).unwrap();
        let mgcs = build_mgcs(&prog, &interp, 1 << 20).unwrap();
        let m = &mgcs[0];
        // no formals, nothing changed: the precondition collapses to true
        assert!(m.changed.is_empty());
        assert_eq!(m.triple.pre, Assertion::True);
        // SP(true, skip) is everything over the empty support: true
        assert_eq!(m.triple.post, Assertion::True);
    }

    #[test]
    fn body_without_assignments_keeps_formal_equation() {
        let prog = parse_program("proc P(u) :: skip\nmain: P(0)").unwrap();
        let interp = Interpretation::zmod(2).unwrap();
        let mgcs = build_mgcs(&prog, &interp, 1 << 20).unwrap();
        let m = &mgcs[0];
        assert!(m.changed.is_empty());
        assert_eq!(render_assertion(&m.triple.pre), "u = $0");
    }
}
