//! The syntactic over-approximation `change(D | S)` of the variables a
//! statement can modify.
//!
//! A call contributes `change(D) \ {formals}`, where `change(D)` unions
//! `change(∅ | body)` over all declarations; inside that computation calls
//! contribute nothing. No call-graph pruning is performed.

use std::collections::BTreeSet;

use super::ast::*;

/// `change(D)` for the full declaration set of the program.
pub fn change_decls(prog: &Program) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    for d in prog.decls() {
        change_stmt_no_calls(&d.body, &mut out);
    }
    out
}

fn change_stmt_no_calls(s: &Stmt, out: &mut BTreeSet<VarName>) {
    match s {
        Stmt::Skip | Stmt::Call(..) => {}
        Stmt::Assign(xs, _) => out.extend(xs.iter().cloned()),
        Stmt::Seq(a, b) => {
            change_stmt_no_calls(a, out);
            change_stmt_no_calls(b, out);
        }
        Stmt::If(_, s1, s2) => {
            change_stmt_no_calls(s1, out);
            change_stmt_no_calls(s2, out);
        }
        Stmt::While(_, body) => change_stmt_no_calls(body, out),
        Stmt::Block(xs, _, body) => {
            let mut inner = BTreeSet::new();
            change_stmt_no_calls(body, &mut inner);
            for x in xs {
                inner.remove(x);
            }
            out.extend(inner);
        }
    }
}

/// `change(D | S)` for a statement of the given program.
pub fn change_set(prog: &Program, s: &Stmt) -> BTreeSet<VarName> {
    let decl_change = change_decls(prog);
    let mut out = BTreeSet::new();
    change_stmt(prog, &decl_change, s, &mut out);
    out
}

fn change_stmt(
    prog: &Program,
    decl_change: &BTreeSet<VarName>,
    s: &Stmt,
    out: &mut BTreeSet<VarName>,
) {
    match s {
        Stmt::Skip => {}
        Stmt::Assign(xs, _) => out.extend(xs.iter().cloned()),
        Stmt::Call(p, _) => {
            if let Some(d) = prog.decl(p) {
                for v in decl_change {
                    if !d.formals.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
        }
        Stmt::Seq(a, b) => {
            change_stmt(prog, decl_change, a, out);
            change_stmt(prog, decl_change, b, out);
        }
        Stmt::If(_, s1, s2) => {
            change_stmt(prog, decl_change, s1, out);
            change_stmt(prog, decl_change, s2, out);
        }
        Stmt::While(_, body) => change_stmt(prog, decl_change, body, out),
        Stmt::Block(xs, _, body) => {
            let mut inner = BTreeSet::new();
            change_stmt(prog, decl_change, body, &mut inner);
            for x in xs {
                inner.remove(x);
            }
            out.extend(inner);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_program, parse_stmt};

    fn names(set: &BTreeSet<VarName>) -> Vec<&str> {
        set.iter().map(|s| s.as_str()).collect()
    }

    #[test]
    fn call_subtracts_formals() {
        // change(∅ | sum := sum + u) = {sum}; change(D | add(sum)) = {sum} \ {u} = {sum}
        let prog = parse_program("proc add(u) :: sum := sum + u\nmain: add(sum)").unwrap();
        assert_eq!(names(&change_decls(&prog)), vec!["sum"]);
        assert_eq!(names(&change_set(&prog, prog.main())), vec!["sum"]);
    }

    #[test]
    fn skip_changes_nothing() {
        let prog = parse_program("main: skip").unwrap();
        assert!(change_set(&prog, &Stmt::Skip).is_empty());
    }

    #[test]
    fn block_hides_its_locals() {
        let prog = parse_program("main: skip").unwrap();
        let s = parse_stmt("begin local x := 0 ; x := 1 ; y := 2 end").unwrap();
        assert_eq!(names(&change_set(&prog, &s)), vec!["y"]);
    }

    #[test]
    fn formals_of_other_procedures_can_appear() {
        // u is a formal of Q but assigned globally by P's body, so
        // change(D | Q(0)) keeps x and drops only u
        let prog = parse_program(
            "proc P() :: u := 1 ; x := 2\nproc Q(u) :: P()\nmain: Q(0)",
        )
        .unwrap();
        assert_eq!(names(&change_decls(&prog)), vec!["u", "x"]);
        assert_eq!(names(&change_set(&prog, prog.main())), vec!["x"]);
    }

    #[test]
    fn undeclared_call_contributes_nothing() {
        // change is defined on bare statements; a call left undeclared is empty
        let prog = parse_program("main: skip").unwrap();
        let s = Stmt::Call("Q".into(), vec![]);
        assert!(change_set(&prog, &s).is_empty());
    }
}
