//! The inductive statement-size measure `l` and its rule-application budget
//! `m`.
//!
//! `l` charges 1 per atomic statement, 1 per composition, conditional and
//! loop, and counts a block as its initializer-plus-body sequence plus 1.
//! The budget is `m = l + n_a + 3 n_b + 6 n_p + n_w`, where `n_a`, `n_b`,
//! `n_p` and `n_w` count assignments, blocks, calls and loops. `skip` is
//! identified with the empty parallel assignment, so it counts toward
//! `n_a`; the initializer of a block does not count as a separate
//! assignment. With this accounting `m(begin local x:=t; S end) =
//! m(x:=t; S) + 3` and `m(while B do S od) = m(S) + 2`, which is what the
//! proof synthesizer's budget certification relies on.

use super::ast::*;

/// Size and budget counts for one statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub l: u64,
    /// Parallel assignments, counting `skip` as the empty one; block
    /// initializers excluded.
    pub assigns: u64,
    pub blocks: u64,
    pub calls: u64,
    pub loops: u64,
    pub m: u64,
}

/// Computes `l`, the node counts and `m` for a statement.
pub fn stmt_metrics(s: &Stmt) -> Metrics {
    let l = stmt_l(s);
    let (assigns, blocks, calls, loops) = counts(s);
    Metrics {
        l,
        assigns,
        blocks,
        calls,
        loops,
        m: l + assigns + 3 * blocks + 6 * calls + loops,
    }
}

fn stmt_l(s: &Stmt) -> u64 {
    match s {
        Stmt::Skip | Stmt::Assign(..) | Stmt::Call(..) => 1,
        Stmt::Seq(a, b) => stmt_l(a) + stmt_l(b) + 1,
        Stmt::If(_, s1, s2) => stmt_l(s1) + stmt_l(s2) + 1,
        Stmt::While(_, body) => stmt_l(body) + 1,
        // l(init; body) + 1, where the initializer is an assignment (or skip)
        Stmt::Block(_, _, body) => (1 + stmt_l(body) + 1) + 1,
    }
}

fn counts(s: &Stmt) -> (u64, u64, u64, u64) {
    match s {
        Stmt::Skip | Stmt::Assign(..) => (1, 0, 0, 0),
        Stmt::Call(..) => (0, 0, 1, 0),
        Stmt::Seq(a, b) => {
            let (a1, b1, c1, w1) = counts(a);
            let (a2, b2, c2, w2) = counts(b);
            (a1 + a2, b1 + b2, c1 + c2, w1 + w2)
        }
        Stmt::If(_, s1, s2) => {
            let (a1, b1, c1, w1) = counts(s1);
            let (a2, b2, c2, w2) = counts(s2);
            (a1 + a2, b1 + b2, c1 + c2, w1 + w2)
        }
        Stmt::While(_, body) => {
            let (a, b, c, w) = counts(body);
            (a, b, c, w + 1)
        }
        Stmt::Block(_, _, body) => {
            let (a, b, c, w) = counts(body);
            (a, b + 1, c, w)
        }
    }
}

/// `l` of a declaration: the size of its body.
pub fn decl_l(d: &ProcDecl) -> u64 {
    stmt_l(&d.body)
}

/// `l(D | S)`: the sizes of all declaration bodies plus the size of `S`.
pub fn program_l(prog: &Program, s: &Stmt) -> u64 {
    prog.decls().iter().map(decl_l).sum::<u64>() + stmt_l(s)
}
