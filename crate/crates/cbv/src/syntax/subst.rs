//! Simultaneous substitution for expressions and assertions.
//!
//! Assertion substitution is capture-avoiding: a bound variable that occurs
//! in a replacement expression about to be inserted below its binder is
//! renamed into the reserved `$k` namespace. Renaming is deterministic:
//! binders are numbered leftmost-innermost, and the counter starts above
//! every `$k` already present in the inputs, so repeated runs agree.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;

/// A simultaneous substitution `[x1,..,xk := t1,..,tk]` with pairwise
/// distinct domain variables. The empty substitution is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subst {
    pairs: Vec<(VarName, Expr)>,
}

impl Subst {
    pub fn new(pairs: Vec<(VarName, Expr)>) -> Subst {
        let mut seen = BTreeSet::new();
        for (x, _) in &pairs {
            assert!(seen.insert(x.clone()), "substitution domain must be distinct");
        }
        Subst { pairs }
    }

    /// Builds `[xs := ts]` from parallel lists.
    pub fn parallel(xs: &[VarName], ts: &[Expr]) -> Subst {
        assert_eq!(xs.len(), ts.len());
        Subst::new(xs.iter().cloned().zip(ts.iter().cloned()).collect())
    }

    /// Builds a variable renaming `[xs := ys]`.
    pub fn renaming(xs: &[VarName], ys: &[VarName]) -> Subst {
        assert_eq!(xs.len(), ys.len());
        Subst::new(
            xs.iter()
                .cloned()
                .zip(ys.iter().map(|y| Expr::Var(y.clone())))
                .collect(),
        )
    }

    pub fn single(x: &str, t: Expr) -> Subst {
        Subst::new(vec![(x.to_string(), t)])
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(VarName, Expr)] {
        &self.pairs
    }

    pub fn domain(&self) -> Vec<VarName> {
        self.pairs.iter().map(|(x, _)| x.clone()).collect()
    }

    fn lookup(&self, x: &str) -> Option<&Expr> {
        self.pairs.iter().find(|(v, _)| v == x).map(|(_, t)| t)
    }

    /// Domain and range variables of the substitution.
    fn all_vars(&self, out: &mut BTreeSet<VarName>) {
        for (x, t) in &self.pairs {
            out.insert(x.clone());
            t.collect_vars(out);
        }
    }
}

/// Applies a substitution to an expression.
pub fn subst_expr(e: &Expr, sub: &Subst) -> Expr {
    match e {
        Expr::Var(x) => sub.lookup(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Const(_) => e.clone(),
        Expr::App(f, args) => Expr::App(
            f.clone(),
            args.iter().map(|a| subst_expr(a, sub)).collect(),
        ),
    }
}

pub fn subst_exprs(es: &[Expr], sub: &Subst) -> Vec<Expr> {
    es.iter().map(|e| subst_expr(e, sub)).collect()
}

/// Applies a substitution to a quantifier-free guard.
pub fn subst_bool(b: &BoolExpr, sub: &Subst) -> BoolExpr {
    match b {
        BoolExpr::True => BoolExpr::True,
        BoolExpr::False => BoolExpr::False,
        BoolExpr::Eq(l, r) => BoolExpr::Eq(subst_expr(l, sub), subst_expr(r, sub)),
        BoolExpr::Rel(s, args) => BoolExpr::Rel(s.clone(), subst_exprs(args, sub)),
        BoolExpr::Not(x) => BoolExpr::not(subst_bool(x, sub)),
        BoolExpr::And(l, r) => {
            BoolExpr::And(Box::new(subst_bool(l, sub)), Box::new(subst_bool(r, sub)))
        }
        BoolExpr::Or(l, r) => {
            BoolExpr::Or(Box::new(subst_bool(l, sub)), Box::new(subst_bool(r, sub)))
        }
    }
}

/// Free variables of an assertion.
pub fn free_vars(p: &Assertion) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut out);
    out
}

fn collect_free(p: &Assertion, bound: &mut Vec<VarName>, out: &mut BTreeSet<VarName>) {
    match p {
        Assertion::True | Assertion::False => {}
        Assertion::Eq(l, r) => {
            collect_free_expr(l, bound, out);
            collect_free_expr(r, bound, out);
        }
        Assertion::Rel(_, args) => {
            for a in args {
                collect_free_expr(a, bound, out);
            }
        }
        Assertion::Not(x) => collect_free(x, bound, out),
        Assertion::And(l, r) | Assertion::Or(l, r) | Assertion::Implies(l, r) => {
            collect_free(l, bound, out);
            collect_free(r, bound, out);
        }
        Assertion::Exists(vs, body) | Assertion::Forall(vs, body) => {
            let depth = bound.len();
            bound.extend(vs.iter().cloned());
            collect_free(body, bound, out);
            bound.truncate(depth);
        }
    }
}

fn collect_free_expr(e: &Expr, bound: &[VarName], out: &mut BTreeSet<VarName>) {
    match e {
        Expr::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Expr::Const(_) => {}
        Expr::App(_, args) => {
            for a in args {
                collect_free_expr(a, bound, out);
            }
        }
    }
}

/// Smallest counter `c` such that no `$k` with `k >= c` occurs in the inputs.
fn fresh_base(p: &Assertion, sub: &Subst) -> u64 {
    let mut vars = BTreeSet::new();
    collect_all_vars(p, &mut vars);
    sub.all_vars(&mut vars);
    let mut base = 0;
    for v in &vars {
        if is_fresh_name(v) {
            if let Ok(k) = v[1..].parse::<u64>() {
                base = base.max(k + 1);
            }
        }
    }
    base
}

fn collect_all_vars(p: &Assertion, out: &mut BTreeSet<VarName>) {
    match p {
        Assertion::True | Assertion::False => {}
        Assertion::Eq(l, r) => {
            l.collect_vars(out);
            r.collect_vars(out);
        }
        Assertion::Rel(_, args) => {
            for a in args {
                a.collect_vars(out);
            }
        }
        Assertion::Not(x) => collect_all_vars(x, out),
        Assertion::And(l, r) | Assertion::Or(l, r) | Assertion::Implies(l, r) => {
            collect_all_vars(l, out);
            collect_all_vars(r, out);
        }
        Assertion::Exists(vs, body) | Assertion::Forall(vs, body) => {
            out.extend(vs.iter().cloned());
            collect_all_vars(body, out);
        }
    }
}

/// Capture-avoiding simultaneous substitution on assertions.
pub fn subst_assertion(p: &Assertion, sub: &Subst) -> Assertion {
    if sub.is_empty() {
        return p.clone();
    }
    // Pass 1: number the binder renames leftmost-innermost. Renamed-to
    // variables are fresh, so renames never trigger further renames and the
    // plan depends only on the original substitution.
    let mut plan: Vec<Vec<VarName>> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    {
        let mut node = 0usize;
        collect_renames(p, sub, &mut node, &mut plan, &mut order);
    }
    let base = fresh_base(p, sub);
    let mut names: BTreeMap<usize, Vec<VarName>> = BTreeMap::new();
    let mut counter = base;
    for node in order {
        let fresh: Vec<VarName> = plan[node]
            .iter()
            .map(|_| {
                let n = fresh_name(counter);
                counter += 1;
                n
            })
            .collect();
        names.insert(node, fresh);
    }
    let mut node = 0usize;
    apply(p, sub, &plan, &names, &mut node)
}

/// Walks the quantifier structure pre-order, recording per quantifier node
/// which binders clash; `order` receives node ids in post-order, which fixes
/// the innermost-first numbering.
fn collect_renames(
    p: &Assertion,
    sub: &Subst,
    node: &mut usize,
    plan: &mut Vec<Vec<VarName>>,
    order: &mut Vec<usize>,
) {
    match p {
        Assertion::True | Assertion::False | Assertion::Eq(..) | Assertion::Rel(..) => {}
        Assertion::Not(x) => collect_renames(x, sub, node, plan, order),
        Assertion::And(l, r) | Assertion::Or(l, r) | Assertion::Implies(l, r) => {
            collect_renames(l, sub, node, plan, order);
            collect_renames(r, sub, node, plan, order);
        }
        Assertion::Exists(vs, body) | Assertion::Forall(vs, body) => {
            let id = *node;
            *node += 1;
            plan.push(Vec::new());
            // pairs still alive under this binder that have a free occurrence below
            let free = free_vars(body);
            let mut range_vars = BTreeSet::new();
            let mut alive_pairs = Vec::new();
            for (x, t) in sub.pairs() {
                if !vs.contains(x) && free.contains(x) {
                    t.collect_vars(&mut range_vars);
                    alive_pairs.push((x.clone(), t.clone()));
                }
            }
            let clashes: Vec<VarName> = vs
                .iter()
                .filter(|v| range_vars.contains(*v))
                .cloned()
                .collect();
            plan[id] = clashes;
            let inner = Subst::new(alive_pairs);
            collect_renames(body, &inner, node, plan, order);
            order.push(id);
        }
    }
}

fn apply(
    p: &Assertion,
    sub: &Subst,
    plan: &[Vec<VarName>],
    names: &BTreeMap<usize, Vec<VarName>>,
    node: &mut usize,
) -> Assertion {
    match p {
        Assertion::True => Assertion::True,
        Assertion::False => Assertion::False,
        Assertion::Eq(l, r) => Assertion::Eq(subst_expr(l, sub), subst_expr(r, sub)),
        Assertion::Rel(s, args) => Assertion::Rel(s.clone(), subst_exprs(args, sub)),
        Assertion::Not(x) => Assertion::not(apply(x, sub, plan, names, node)),
        Assertion::And(l, r) => Assertion::and(
            apply(l, sub, plan, names, node),
            apply(r, sub, plan, names, node),
        ),
        Assertion::Or(l, r) => Assertion::or(
            apply(l, sub, plan, names, node),
            apply(r, sub, plan, names, node),
        ),
        Assertion::Implies(l, r) => Assertion::implies(
            apply(l, sub, plan, names, node),
            apply(r, sub, plan, names, node),
        ),
        Assertion::Exists(vs, body) | Assertion::Forall(vs, body) => {
            let id = *node;
            *node += 1;
            let clashes = &plan[id];
            let fresh = names.get(&id);
            let free = free_vars(body);
            let mut inner_pairs: Vec<(VarName, Expr)> = Vec::new();
            for (x, t) in sub.pairs() {
                if !vs.contains(x) && free.contains(x) {
                    inner_pairs.push((x.clone(), t.clone()));
                }
            }
            // rename clashing binders and push the renames into the body
            let mut new_vs = vs.clone();
            if let Some(fresh) = fresh {
                for (v, f) in clashes.iter().zip(fresh.iter()) {
                    for entry in new_vs.iter_mut() {
                        if entry == v {
                            *entry = f.clone();
                        }
                    }
                    inner_pairs.push((v.clone(), Expr::Var(f.clone())));
                }
            }
            let inner = Subst::new(inner_pairs);
            let new_body = apply(body, &inner, plan, names, node);
            match p {
                Assertion::Exists(..) => Assertion::Exists(new_vs, Box::new(new_body)),
                _ => Assertion::Forall(new_vs, Box::new(new_body)),
            }
        }
    }
}
