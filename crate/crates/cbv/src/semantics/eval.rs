//! Truth and value evaluation: terms, guards, and Tarski truth of
//! assertions, plus a set-based evaluator that computes the meaning of an
//! assertion as a bitset over a whole state space at once.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::interp::{Elem, Interpretation};
use super::state::{Bits, SpaceError, State, StateSet, StateSpace, Support};
use crate::syntax::{Assertion, BoolExpr, Expr, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("unknown relation symbol `{0}`")]
    UnknownRelation(String),
    #[error("function `{sym}` applied to {given} arguments, declared with {declared}")]
    FunctionArity {
        sym: String,
        given: usize,
        declared: usize,
    },
    #[error("relation `{sym}` applied to {given} arguments, declared with {declared}")]
    RelationArity {
        sym: String,
        given: usize,
        declared: usize,
    },
}

/// Local bindings introduced by quantifiers during evaluation.
type Env = Vec<(VarName, Elem)>;

fn lookup(env: &Env, state: &State, v: &str) -> Elem {
    for (x, e) in env.iter().rev() {
        if x == v {
            return *e;
        }
    }
    state.get(v)
}

fn eval_expr_env(
    interp: &Interpretation,
    state: &State,
    env: &Env,
    t: &Expr,
) -> Result<Elem, EvalError> {
    match t {
        Expr::Var(x) => Ok(lookup(env, state, x)),
        Expr::Const(c) => interp
            .constant(c)
            .ok_or_else(|| EvalError::UnknownConstant(c.clone())),
        Expr::App(f, args) => {
            let table = interp
                .func(f)
                .ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
            if table.arity != args.len() {
                return Err(EvalError::FunctionArity {
                    sym: f.clone(),
                    given: args.len(),
                    declared: table.arity,
                });
            }
            let mut tuple = Vec::with_capacity(args.len());
            for a in args {
                tuple.push(eval_expr_env(interp, state, env, a)?);
            }
            Ok(table.table[&tuple])
        }
    }
}

/// Value of a term in a state.
pub fn eval_expr(interp: &Interpretation, state: &State, t: &Expr) -> Result<Elem, EvalError> {
    eval_expr_env(interp, state, &Vec::new(), t)
}

pub fn eval_exprs(
    interp: &Interpretation,
    state: &State,
    ts: &[Expr],
) -> Result<Vec<Elem>, EvalError> {
    ts.iter().map(|t| eval_expr(interp, state, t)).collect()
}

/// Truth of a quantifier-free guard in a state.
pub fn bool_holds(
    interp: &Interpretation,
    state: &State,
    b: &BoolExpr,
) -> Result<bool, EvalError> {
    bool_holds_env(interp, state, &Vec::new(), b)
}

fn bool_holds_env(
    interp: &Interpretation,
    state: &State,
    env: &Env,
    b: &BoolExpr,
) -> Result<bool, EvalError> {
    match b {
        BoolExpr::True => Ok(true),
        BoolExpr::False => Ok(false),
        BoolExpr::Eq(l, r) => Ok(eval_expr_env(interp, state, env, l)?
            == eval_expr_env(interp, state, env, r)?),
        BoolExpr::Rel(sym, args) => rel_holds(interp, state, env, sym, args),
        BoolExpr::Not(x) => Ok(!bool_holds_env(interp, state, env, x)?),
        BoolExpr::And(l, r) => {
            Ok(bool_holds_env(interp, state, env, l)? && bool_holds_env(interp, state, env, r)?)
        }
        BoolExpr::Or(l, r) => {
            Ok(bool_holds_env(interp, state, env, l)? || bool_holds_env(interp, state, env, r)?)
        }
    }
}

fn rel_holds(
    interp: &Interpretation,
    state: &State,
    env: &Env,
    sym: &str,
    args: &[Expr],
) -> Result<bool, EvalError> {
    let table = interp
        .rel(sym)
        .ok_or_else(|| EvalError::UnknownRelation(sym.to_string()))?;
    if table.arity != args.len() {
        return Err(EvalError::RelationArity {
            sym: sym.to_string(),
            given: args.len(),
            declared: table.arity,
        });
    }
    let mut tuple = Vec::with_capacity(args.len());
    for a in args {
        tuple.push(eval_expr_env(interp, state, env, a)?);
    }
    Ok(table.rows.contains(&tuple))
}

/// Tarski truth of an assertion in a state; quantifiers range over the
/// finite domain by enumeration.
pub fn holds(interp: &Interpretation, state: &State, p: &Assertion) -> Result<bool, EvalError> {
    holds_env(interp, state, &mut Vec::new(), p)
}

fn holds_env(
    interp: &Interpretation,
    state: &State,
    env: &mut Env,
    p: &Assertion,
) -> Result<bool, EvalError> {
    match p {
        Assertion::True => Ok(true),
        Assertion::False => Ok(false),
        Assertion::Eq(l, r) => Ok(eval_expr_env(interp, state, env, l)?
            == eval_expr_env(interp, state, env, r)?),
        Assertion::Rel(sym, args) => rel_holds(interp, state, env, sym, args),
        Assertion::Not(x) => Ok(!holds_env(interp, state, env, x)?),
        Assertion::And(l, r) => {
            Ok(holds_env(interp, state, env, l)? && holds_env(interp, state, env, r)?)
        }
        Assertion::Or(l, r) => {
            Ok(holds_env(interp, state, env, l)? || holds_env(interp, state, env, r)?)
        }
        Assertion::Implies(l, r) => {
            Ok(!holds_env(interp, state, env, l)? || holds_env(interp, state, env, r)?)
        }
        Assertion::Exists(vs, body) => quantify(interp, state, env, vs, body, true),
        Assertion::Forall(vs, body) => quantify(interp, state, env, vs, body, false),
    }
}

fn quantify(
    interp: &Interpretation,
    state: &State,
    env: &mut Env,
    vs: &[VarName],
    body: &Assertion,
    existential: bool,
) -> Result<bool, EvalError> {
    if vs.is_empty() {
        return holds_env(interp, state, env, body);
    }
    let (head, rest) = (&vs[0], &vs[1..]);
    for d in 0..interp.size() {
        env.push((head.clone(), d));
        let r = quantify(interp, state, env, rest, body, existential);
        env.pop();
        let r = r?;
        if existential && r {
            return Ok(true);
        }
        if !existential && !r {
            return Ok(false);
        }
    }
    Ok(!existential)
}

/// Shared memo of big-formula meanings, keyed by the formula and evaluated
/// over the space of its free variables. One cache may serve many
/// evaluations, also from multiple threads; the strongest-postcondition
/// formulas emitted during proof synthesis recur in many obligations, and
/// each is decoded only once.
#[derive(Default)]
pub struct FormulaCache {
    map: std::sync::Mutex<HashMap<Assertion, (Arc<Support>, Bits)>>,
}

/// Subtrees at least this large are evaluated over the space of their own
/// free variables and lifted, rather than over the full ambient space.
const BIG_FORMULA_NODES: usize = 48;

/// Evaluates an assertion over every state of a space at once, returning
/// its meaning as a bitset over the space.
pub struct SetEvaluator<'a> {
    interp: &'a Interpretation,
    space: &'a StateSpace,
    cache: Option<&'a FormulaCache>,
    /// Bound for auxiliary spaces (quantifier bodies, minimal supports).
    budget: usize,
}

impl<'a> SetEvaluator<'a> {
    pub fn new(interp: &'a Interpretation, space: &'a StateSpace) -> SetEvaluator<'a> {
        SetEvaluator {
            interp,
            space,
            cache: None,
            budget: usize::MAX,
        }
    }

    pub fn with_cache(
        interp: &'a Interpretation,
        space: &'a StateSpace,
        cache: &'a FormulaCache,
        budget: usize,
    ) -> SetEvaluator<'a> {
        SetEvaluator {
            interp,
            space,
            cache: Some(cache),
            budget,
        }
    }

    pub fn space(&self) -> &StateSpace {
        self.space
    }

    /// The meaning of `p` as a subset of the space.
    pub fn eval(&mut self, p: &Assertion) -> Result<StateSet, EvalError> {
        let bits = self.over(p, self.space)?;
        Ok(StateSet::from_bits(self.space.clone(), bits))
    }

    fn aux_space(&self, support: Arc<Support>) -> Result<StateSpace, EvalError> {
        StateSpace::new(support, self.interp, self.budget).map_err(EvalError::from)
    }

    fn over(&self, p: &Assertion, space: &StateSpace) -> Result<Bits, EvalError> {
        // big subtrees are decoded over their own free variables and lifted
        if size_at_least(p, BIG_FORMULA_NODES) {
            let frees = crate::syntax::free_vars(p);
            let sub = Support::new(frees);
            if sub.vars() != space.support().vars()
                && sub.vars().iter().all(|v| space.support().contains(v))
            {
                if let Some(cache) = self.cache {
                    let hit = cache.map.lock().unwrap().get(p).cloned();
                    if let Some((support, bits)) = hit {
                        if support.vars() == sub.vars() {
                            let mini = self.aux_space(support)?;
                            return Ok(lift(&bits, &mini, space));
                        }
                    }
                }
                let mini = self.aux_space(sub.clone())?;
                let bits = self.over_node(p, &mini)?;
                if let Some(cache) = self.cache {
                    cache
                        .map
                        .lock()
                        .unwrap()
                        .insert(p.clone(), (sub, bits.clone()));
                }
                return Ok(lift(&bits, &mini, space));
            }
        }
        self.over_node(p, space)
    }

    fn over_node(&self, p: &Assertion, space: &StateSpace) -> Result<Bits, EvalError> {
        match p {
            Assertion::True => Ok(Bits::filled(space.len())),
            Assertion::False => Ok(Bits::new(space.len())),
            Assertion::Eq(..) | Assertion::Rel(..) => atom_bits(self.interp, p, space),
            Assertion::Not(x) => {
                let mut b = self.over(x, space)?;
                b.negate();
                Ok(b)
            }
            Assertion::And(l, r) => {
                let mut b = self.over(l, space)?;
                b.intersect_with(&self.over(r, space)?);
                Ok(b)
            }
            Assertion::Or(l, r) => {
                let mut b = self.over(l, space)?;
                b.union_with(&self.over(r, space)?);
                Ok(b)
            }
            Assertion::Implies(l, r) => {
                let mut b = self.over(l, space)?;
                b.negate();
                b.union_with(&self.over(r, space)?);
                Ok(b)
            }
            Assertion::Exists(vs, body) | Assertion::Forall(vs, body) => {
                let existential = matches!(p, Assertion::Exists(..));
                // the body ranges over the ambient support plus the bound
                // variables (shadowing any ambient variable of the same name)
                let mut body_vars: Vec<_> = space.support().vars().to_vec();
                body_vars.extend(vs.iter().cloned());
                let body_space = self.aux_space(Support::new(body_vars))?;
                let inner = self.over(body, &body_space)?;
                // fold the bound variables away, then restore the ambient shape
                let reduced_support = Support::new(
                    space
                        .support()
                        .vars()
                        .iter()
                        .filter(|v| !vs.contains(*v))
                        .cloned(),
                );
                let reduced = self.aux_space(reduced_support)?;
                let mut folded = if existential {
                    Bits::new(reduced.len())
                } else {
                    Bits::filled(reduced.len())
                };
                Projection::new(&body_space, &reduced).for_each(|i, j| {
                    if existential {
                        if inner.get(i) {
                            folded.set(j, true);
                        }
                    } else if !inner.get(i) {
                        folded.set(j, false);
                    }
                });
                Ok(lift(&folded, &reduced, space))
            }
        }
    }
}

/// Expands a bitset over a sub-support to a larger space as a cylinder.
fn lift(bits: &Bits, from: &StateSpace, to: &StateSpace) -> Bits {
    if from.support().vars() == to.support().vars() {
        return bits.clone();
    }
    let mut out = Bits::new(to.len());
    Projection::new(to, from).for_each(|i, j| {
        if bits.get(j) {
            out.set(i, true);
        }
    });
    out
}

/// Maps every index of a space onto the index of a space over a
/// sub-support by dropping the digits of the missing variables. Iteration
/// walks the source indices in order, maintaining the projected index
/// incrementally.
struct Projection {
    /// Target stride per source digit; 0 for dropped variables.
    to_strides: Vec<usize>,
    domain: usize,
    source_len: usize,
}

impl Projection {
    fn new(from: &StateSpace, to: &StateSpace) -> Projection {
        let to_strides = from
            .support()
            .vars()
            .iter()
            .map(|v| {
                to.support()
                    .position(v)
                    .map(|pos| to.domain_size().pow(pos as u32))
                    .unwrap_or(0)
            })
            .collect();
        Projection {
            to_strides,
            domain: from.domain_size(),
            source_len: from.len(),
        }
    }

    /// Calls `f(source_index, target_index)` for every source index.
    fn for_each(&self, mut f: impl FnMut(usize, usize)) {
        let mut digits = vec![0usize; self.to_strides.len()];
        let mut target = 0usize;
        for i in 0..self.source_len {
            f(i, target);
            for (d, stride) in digits.iter_mut().zip(self.to_strides.iter()) {
                *d += 1;
                if *d < self.domain {
                    target += stride;
                    break;
                }
                *d = 0;
                target -= stride * (self.domain - 1);
            }
        }
    }
}

/// True when the formula has at least `n` nodes (early-exit count).
fn size_at_least(p: &Assertion, n: usize) -> bool {
    fn walk(p: &Assertion, left: &mut usize) -> bool {
        if *left == 0 {
            return true;
        }
        *left -= 1;
        match p {
            Assertion::True | Assertion::False | Assertion::Eq(..) | Assertion::Rel(..) => false,
            Assertion::Not(x) | Assertion::Exists(_, x) | Assertion::Forall(_, x) => {
                walk(x, left)
            }
            Assertion::And(l, r) | Assertion::Or(l, r) | Assertion::Implies(l, r) => {
                walk(l, left) || walk(r, left)
            }
        }
    }
    let mut left = n;
    walk(p, &mut left)
}

/// Meaning of an atom over a whole space: digit arithmetic for equalities
/// between variables and constants, per-state evaluation otherwise.
fn atom_bits(
    interp: &Interpretation,
    p: &Assertion,
    space: &StateSpace,
) -> Result<Bits, EvalError> {
    let mut bits = Bits::new(space.len());
    let dom = space.domain_size();
    let stride = |var: &str| {
        space
            .support()
            .position(var)
            .map(|pos| dom.pow(pos as u32))
    };
    // periodic fill of all indices whose digit at `stride` equals `e`
    let fill_digit_eq = |bits: &mut Bits, stride: usize, e: usize| {
        let period = stride * dom;
        let mut base = e * stride;
        while base < space.len() {
            for i in base..base + stride {
                bits.set(i, true);
            }
            base += period;
        }
    };
    if let Assertion::Eq(l, r) = p {
        match (l, r) {
            (Expr::Var(a), Expr::Var(b)) => {
                match (stride(a), stride(b)) {
                    (Some(sa), Some(sb)) => {
                        if sa == sb {
                            return Ok(Bits::filled(space.len()));
                        }
                        // walk both digits incrementally
                        let (mut ca, mut da, mut cb, mut db) = (0, 0, 0, 0);
                        for i in 0..space.len() {
                            if da == db {
                                bits.set(i, true);
                            }
                            ca += 1;
                            if ca == sa {
                                ca = 0;
                                da += 1;
                                if da == dom {
                                    da = 0;
                                }
                            }
                            cb += 1;
                            if cb == sb {
                                cb = 0;
                                db += 1;
                                if db == dom {
                                    db = 0;
                                }
                            }
                        }
                        return Ok(bits);
                    }
                    // a variable outside the support reads the default 0
                    (Some(sa), None) => {
                        fill_digit_eq(&mut bits, sa, 0);
                        return Ok(bits);
                    }
                    (None, Some(sb)) => {
                        fill_digit_eq(&mut bits, sb, 0);
                        return Ok(bits);
                    }
                    (None, None) => {
                        return Ok(Bits::filled(space.len()));
                    }
                }
            }
            (Expr::Var(a), Expr::Const(c)) | (Expr::Const(c), Expr::Var(a)) => {
                let e = interp
                    .constant(c)
                    .ok_or_else(|| EvalError::UnknownConstant(c.clone()))?;
                match stride(a) {
                    Some(sa) => fill_digit_eq(&mut bits, sa, e),
                    None => {
                        if e == 0 {
                            bits = Bits::filled(space.len());
                        }
                    }
                }
                return Ok(bits);
            }
            _ => {}
        }
    }
    for i in 0..space.len() {
        let state = space.state(i);
        if holds(interp, &state, p)? {
            bits.set(i, true);
        }
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::state::Support;
    use crate::syntax::parse_assertion;

    fn z(n: usize) -> Interpretation {
        Interpretation::zmod(n).unwrap()
    }

    fn state_over(interp: &Interpretation, pairs: &[(&str, Elem)]) -> State {
        let sup = Support::new(pairs.iter().map(|(v, _)| v.to_string()));
        let mut s = State::bottom(sup, 0);
        for (v, e) in pairs {
            s = s.set(v, *e);
        }
        let _ = interp;
        s
    }

    #[test]
    fn eval_in_z5() {
        // σ(x) = 2 in Z5: x + 1 evaluates to 3
        let z5 = z(5);
        let s = state_over(&z5, &[("x", 2)]);
        let t = Expr::bin("+", Expr::var("x"), Expr::constant("1"));
        assert_eq!(eval_expr(&z5, &s, &t).unwrap(), 3);
        assert_eq!(eval_expr(&z5, &s, &Expr::constant("0")).unwrap(), 0);
        assert_eq!(eval_expr(&z5, &s, &Expr::var("x")).unwrap(), 2);
    }

    #[test]
    fn unknown_symbols_error() {
        let z2 = z(2);
        let s = state_over(&z2, &[]);
        assert!(matches!(
            eval_expr(&z2, &s, &Expr::constant("7")),
            Err(EvalError::UnknownConstant(_))
        ));
        assert!(matches!(
            eval_expr(&z2, &s, &Expr::App("f".into(), vec![])),
            Err(EvalError::UnknownFunction(_))
        ));
    }

    #[test]
    fn quantifiers_enumerate_domain() {
        let z2 = z(2);
        let s = state_over(&z2, &[("x", 1)]);
        assert!(holds(&z2, &s, &parse_assertion("x = 1").unwrap()).unwrap());
        assert!(holds(&z2, &s, &parse_assertion("exists u: u = x").unwrap()).unwrap());
        // Z2 satisfies ∀x: x + x = 0
        assert!(holds(&z2, &s, &parse_assertion("forall x: x + x = 0").unwrap()).unwrap());
        let z3 = z(3);
        let s3 = state_over(&z3, &[("x", 1)]);
        assert!(!holds(&z3, &s3, &parse_assertion("forall x: x + x = 0").unwrap()).unwrap());
    }

    #[test]
    fn set_evaluator_matches_pointwise() {
        let z3 = z(3);
        let sup = Support::new(["x".to_string(), "y".to_string()]);
        let space = StateSpace::new(sup, &z3, 10_000).unwrap();
        let p = parse_assertion("x = y + 1 | (exists u: u * u = x) & !(y = 2)").unwrap();
        let mut ev = SetEvaluator::new(&z3, &space);
        let set = ev.eval(&p).unwrap();
        for i in 0..space.len() {
            let s = space.state(i);
            assert_eq!(set.contains_index(i), holds(&z3, &s, &p).unwrap());
        }
    }
}
