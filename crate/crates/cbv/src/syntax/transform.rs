//! Program transformations: purification, single-step inlining of a call,
//! and the static-scope elaboration used to compare scope disciplines.

use thiserror::Error;

use super::ast::*;
use super::subst::{subst_bool, subst_exprs, Subst};

/// Replaces every call whose actuals differ syntactically from the callee's
/// formals by a block binding the formals, so that only generic calls
/// remain. Programs already in that shape are returned unchanged.
pub fn purify(prog: &Program) -> Program {
    let decls: Vec<ProcDecl> = prog
        .decls()
        .iter()
        .map(|d| ProcDecl {
            name: d.name.clone(),
            formals: d.formals.clone(),
            body: purify_stmt(prog, &d.body),
        })
        .collect();
    let main = purify_stmt(prog, prog.main());
    Program::new(decls, main).expect("purification preserves program invariants")
}

fn purify_stmt(prog: &Program, s: &Stmt) -> Stmt {
    match s {
        Stmt::Skip | Stmt::Assign(..) => s.clone(),
        Stmt::Call(p, actuals) => {
            let decl = prog.decl(p).expect("validated program");
            let formal_exprs: Vec<Expr> =
                decl.formals.iter().map(|u| Expr::Var(u.clone())).collect();
            if actuals == &formal_exprs {
                s.clone()
            } else {
                Stmt::block(
                    decl.formals.clone(),
                    actuals.clone(),
                    Stmt::Call(p.clone(), formal_exprs),
                )
            }
        }
        Stmt::Seq(a, b) => Stmt::seq(purify_stmt(prog, a), purify_stmt(prog, b)),
        Stmt::If(g, s1, s2) => {
            Stmt::if_then_else(g.clone(), purify_stmt(prog, s1), purify_stmt(prog, s2))
        }
        Stmt::While(g, body) => Stmt::while_do(g.clone(), purify_stmt(prog, body)),
        Stmt::Block(xs, ts, body) => {
            Stmt::block(xs.clone(), ts.clone(), purify_stmt(prog, body))
        }
    }
}

/// True when every call in the program is generic.
pub fn is_pure(prog: &Program) -> bool {
    prog.decls().iter().all(|d| stmt_pure(prog, &d.body)) && stmt_pure(prog, prog.main())
}

fn stmt_pure(prog: &Program, s: &Stmt) -> bool {
    match s {
        Stmt::Skip | Stmt::Assign(..) => true,
        Stmt::Call(p, actuals) => {
            let decl = prog.decl(p).expect("validated program");
            let formal_exprs: Vec<Expr> =
                decl.formals.iter().map(|u| Expr::Var(u.clone())).collect();
            actuals == &formal_exprs
        }
        Stmt::Seq(a, b) => stmt_pure(prog, a) && stmt_pure(prog, b),
        Stmt::If(_, s1, s2) => stmt_pure(prog, s1) && stmt_pure(prog, s2),
        Stmt::While(_, body) => stmt_pure(prog, body),
        Stmt::Block(_, _, body) => stmt_pure(prog, body),
    }
}

/// A path from a statement root to a substatement: at each step the index
/// of the child taken (`Seq`/`If`: 0 or 1, `While`/`Block`: 0).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StmtPath(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InlineError {
    #[error("path does not denote a statement")]
    BadPath,
    #[error("statement at the path is not a procedure call")]
    NotACall,
    #[error("call to undeclared procedure `{0}`")]
    Undeclared(ProcName),
}

/// Paths of all procedure calls in `s`, in depth-first order.
pub fn call_positions(s: &Stmt) -> Vec<StmtPath> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    walk_calls(s, &mut prefix, &mut out);
    out
}

fn walk_calls(s: &Stmt, prefix: &mut Vec<usize>, out: &mut Vec<StmtPath>) {
    match s {
        Stmt::Call(..) => out.push(StmtPath(prefix.clone())),
        Stmt::Skip | Stmt::Assign(..) => {}
        Stmt::Seq(a, b) => {
            prefix.push(0);
            walk_calls(a, prefix, out);
            prefix.pop();
            prefix.push(1);
            walk_calls(b, prefix, out);
            prefix.pop();
        }
        Stmt::If(_, s1, s2) => {
            prefix.push(0);
            walk_calls(s1, prefix, out);
            prefix.pop();
            prefix.push(1);
            walk_calls(s2, prefix, out);
            prefix.pop();
        }
        Stmt::While(_, body) | Stmt::Block(_, _, body) => {
            prefix.push(0);
            walk_calls(body, prefix, out);
            prefix.pop();
        }
    }
}

/// Replaces the call at `path` in the main statement by the block
/// `begin local formals := actuals ; body end` and returns the new main
/// statement. No variable is renamed.
pub fn inline_once(prog: &Program, path: &StmtPath) -> Result<Stmt, InlineError> {
    inline_at(prog, prog.main(), &path.0)
}

fn inline_at(prog: &Program, s: &Stmt, path: &[usize]) -> Result<Stmt, InlineError> {
    if path.is_empty() {
        return match s {
            Stmt::Call(p, actuals) => {
                let decl = prog
                    .decl(p)
                    .ok_or_else(|| InlineError::Undeclared(p.clone()))?;
                Ok(Stmt::block(
                    decl.formals.clone(),
                    actuals.clone(),
                    decl.body.clone(),
                ))
            }
            _ => Err(InlineError::NotACall),
        };
    }
    let (head, rest) = (path[0], &path[1..]);
    match (s, head) {
        (Stmt::Seq(a, b), 0) => Ok(Stmt::seq(inline_at(prog, a, rest)?, (**b).clone())),
        (Stmt::Seq(a, b), 1) => Ok(Stmt::seq((**a).clone(), inline_at(prog, b, rest)?)),
        (Stmt::If(g, s1, s2), 0) => Ok(Stmt::if_then_else(
            g.clone(),
            inline_at(prog, s1, rest)?,
            (**s2).clone(),
        )),
        (Stmt::If(g, s1, s2), 1) => Ok(Stmt::if_then_else(
            g.clone(),
            (**s1).clone(),
            inline_at(prog, s2, rest)?,
        )),
        (Stmt::While(g, body), 0) => Ok(Stmt::while_do(g.clone(), inline_at(prog, body, rest)?)),
        (Stmt::Block(xs, ts, body), 0) => Ok(Stmt::block(
            xs.clone(),
            ts.clone(),
            inline_at(prog, body, rest)?,
        )),
        _ => Err(InlineError::BadPath),
    }
}

/// Renames every block local and every formal parameter to a distinct
/// reserved `$k` name. Afterwards no variable has both a local and a global
/// occurrence, so evaluating the result under the usual (dynamic-scope)
/// semantics realizes static scope for the original program.
pub fn elaborate_static_scope(prog: &Program) -> Program {
    let mut counter = 0u64;
    let decls: Vec<ProcDecl> = prog
        .decls()
        .iter()
        .map(|d| {
            let fresh: Vec<VarName> = d.formals.iter().map(|_| next(&mut counter)).collect();
            let map = Subst::renaming(&d.formals, &fresh);
            ProcDecl {
                name: d.name.clone(),
                formals: fresh,
                body: rename_stmt(&d.body, &map, &mut counter),
            }
        })
        .collect();
    let main = rename_stmt(prog.main(), &Subst::default(), &mut counter);
    Program::new(decls, main).expect("renaming preserves program invariants")
}

fn next(counter: &mut u64) -> VarName {
    let n = fresh_name(*counter);
    *counter += 1;
    n
}

fn rename_stmt(s: &Stmt, map: &Subst, counter: &mut u64) -> Stmt {
    match s {
        Stmt::Skip => Stmt::Skip,
        Stmt::Assign(xs, ts) => Stmt::assign(rename_vars(xs, map), subst_exprs(ts, map)),
        Stmt::Call(p, ts) => Stmt::Call(p.clone(), subst_exprs(ts, map)),
        Stmt::Seq(a, b) => Stmt::seq(rename_stmt(a, map, counter), rename_stmt(b, map, counter)),
        Stmt::If(g, s1, s2) => Stmt::if_then_else(
            subst_bool(g, map),
            rename_stmt(s1, map, counter),
            rename_stmt(s2, map, counter),
        ),
        Stmt::While(g, body) => {
            Stmt::while_do(subst_bool(g, map), rename_stmt(body, map, counter))
        }
        Stmt::Block(xs, ts, body) => {
            // initializers still see the enclosing scope
            let ts = subst_exprs(ts, map);
            let fresh: Vec<VarName> = xs.iter().map(|_| next(counter)).collect();
            let mut pairs: Vec<(VarName, Expr)> = map
                .pairs()
                .iter()
                .filter(|(x, _)| !xs.contains(x))
                .cloned()
                .collect();
            pairs.extend(
                xs.iter()
                    .cloned()
                    .zip(fresh.iter().map(|f| Expr::Var(f.clone()))),
            );
            let inner = Subst::new(pairs);
            Stmt::block(fresh, ts, rename_stmt(body, &inner, counter))
        }
    }
}

fn rename_vars(xs: &[VarName], map: &Subst) -> Vec<VarName> {
    xs.iter()
        .map(|x| {
            for (v, t) in map.pairs() {
                if v == x {
                    if let Expr::Var(y) = t {
                        return y.clone();
                    }
                }
            }
            x.clone()
        })
        .collect()
}
