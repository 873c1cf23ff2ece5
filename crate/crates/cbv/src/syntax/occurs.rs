//! Classification of variable occurrences as local or global, and the
//! clash-freeness check built on it.
//!
//! An occurrence of a variable `v` in a statement is local when some
//! enclosing block declares `v`, and the occurrence sits in that block's
//! locals list or body. Occurrences in a block's own initializer
//! expressions are not made local by that block. In a declaration, every
//! occurrence of a formal parameter is local, as is anything local in the
//! body. A program is clash-free when no variable has both a local
//! occurrence somewhere and a global occurrence in some procedure body.

use std::collections::BTreeSet;

use super::ast::*;

/// Where an occurrence lives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OccSite {
    Main,
    Decl(ProcName),
}

impl std::fmt::Display for OccSite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OccSite::Main => write!(f, "main"),
            OccSite::Decl(p) => write!(f, "procedure {p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccurrenceKind {
    Local,
    Global,
}

/// One variable occurrence: its site, its index among the site's
/// occurrences in depth-first order, and its classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub site: OccSite,
    pub index: usize,
    pub var: VarName,
    pub kind: OccurrenceKind,
}

struct Walker {
    site: OccSite,
    index: usize,
    out: Vec<Occurrence>,
}

impl Walker {
    fn emit(&mut self, var: &VarName, local: bool) {
        self.out.push(Occurrence {
            site: self.site.clone(),
            index: self.index,
            var: var.clone(),
            kind: if local {
                OccurrenceKind::Local
            } else {
                OccurrenceKind::Global
            },
        });
        self.index += 1;
    }

    fn expr(&mut self, e: &Expr, bound: &BTreeSet<VarName>) {
        match e {
            Expr::Var(x) => self.emit(x, bound.contains(x)),
            Expr::Const(_) => {}
            Expr::App(_, args) => {
                for a in args {
                    self.expr(a, bound);
                }
            }
        }
    }

    fn guard(&mut self, b: &BoolExpr, bound: &BTreeSet<VarName>) {
        match b {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Eq(l, r) => {
                self.expr(l, bound);
                self.expr(r, bound);
            }
            BoolExpr::Rel(_, args) => {
                for a in args {
                    self.expr(a, bound);
                }
            }
            BoolExpr::Not(x) => self.guard(x, bound),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                self.guard(l, bound);
                self.guard(r, bound);
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, bound: &BTreeSet<VarName>) {
        match s {
            Stmt::Skip => {}
            Stmt::Assign(xs, ts) => {
                for x in xs {
                    self.emit(x, bound.contains(x));
                }
                for t in ts {
                    self.expr(t, bound);
                }
            }
            Stmt::Call(_, ts) => {
                for t in ts {
                    self.expr(t, bound);
                }
            }
            Stmt::Seq(a, b) => {
                self.stmt(a, bound);
                self.stmt(b, bound);
            }
            Stmt::If(b, s1, s2) => {
                self.guard(b, bound);
                self.stmt(s1, bound);
                self.stmt(s2, bound);
            }
            Stmt::While(b, body) => {
                self.guard(b, bound);
                self.stmt(body, bound);
            }
            Stmt::Block(xs, ts, body) => {
                // occurrences in the locals list are bound by this block itself
                let mut inner = bound.clone();
                inner.extend(xs.iter().cloned());
                for x in xs {
                    self.emit(x, true);
                }
                // initializers are evaluated outside the block's scope
                for t in ts {
                    self.expr(t, bound);
                }
                self.stmt(body, &inner);
            }
        }
    }
}

/// Classifies every variable occurrence of the program, in depth-first
/// order: declarations first (formals list, then body), then main.
pub fn classify_occurrences(prog: &Program) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for d in prog.decls() {
        let mut w = Walker {
            site: OccSite::Decl(d.name.clone()),
            index: 0,
            out: Vec::new(),
        };
        let bound: BTreeSet<VarName> = d.formals.iter().cloned().collect();
        for u in &d.formals {
            w.emit(u, true);
        }
        w.stmt(&d.body, &bound);
        out.extend(w.out);
    }
    let mut w = Walker {
        site: OccSite::Main,
        index: 0,
        out: Vec::new(),
    };
    w.stmt(prog.main(), &BTreeSet::new());
    out.extend(w.out);
    out
}

/// Witness for a clash: the variable plus one local occurrence anywhere in
/// the program and one global occurrence inside a procedure body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClashWitness {
    pub var: VarName,
    pub local: Occurrence,
    pub global_in_body: Occurrence,
}

/// Decides clash-freeness; `Err` carries the first witness in occurrence
/// order.
pub fn clash_free(prog: &Program) -> Result<(), ClashWitness> {
    let occs = classify_occurrences(prog);
    for occ in &occs {
        if occ.kind != OccurrenceKind::Local {
            continue;
        }
        let clash = occs.iter().find(|o| {
            o.var == occ.var
                && o.kind == OccurrenceKind::Global
                && matches!(o.site, OccSite::Decl(_))
        });
        if let Some(global) = clash {
            return Err(ClashWitness {
                var: occ.var.clone(),
                local: occ.clone(),
                global_in_body: global.clone(),
            });
        }
    }
    Ok(())
}
