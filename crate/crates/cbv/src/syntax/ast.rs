//! Abstract syntax for expressions, assertions, statements and programs.
//!
//! All values are immutable after construction. Structural equality is the
//! notion of "syntactic equality" used by the proof kernel.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Variable names. Names of the form `$<digits>` are reserved for
/// machine-generated fresh variables and are rejected by the source parser.
pub type VarName = String;
/// Procedure names.
pub type ProcName = String;
/// Function, relation and constant symbols of the signature.
pub type Symbol = String;

/// Returns true when `name` lies in the reserved fresh namespace `$k`.
pub fn is_fresh_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next() == Some('$') && {
        let rest = chars.as_str();
        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    }
}

/// Produces the `k`-th reserved fresh variable name.
pub fn fresh_name(k: u64) -> VarName {
    format!("${k}")
}

/// First-order terms over the signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(VarName),
    Const(Symbol),
    /// Application of a function symbol to arguments.
    App(Symbol, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn constant(sym: &str) -> Expr {
        Expr::Const(sym.to_string())
    }

    /// Binary application, convenient for the built-in `+`, `-`, `*`.
    pub fn bin(op: &str, lhs: Expr, rhs: Expr) -> Expr {
        Expr::App(op.to_string(), vec![lhs, rhs])
    }

    /// Collects the variables occurring in the term into `out`.
    pub fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Const(_) => {}
            Expr::App(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }
}

/// The set of all variables occurring in a list of expressions.
pub fn expr_vars(exprs: &[Expr]) -> BTreeSet<VarName> {
    let mut out = BTreeSet::new();
    for e in exprs {
        e.collect_vars(&mut out);
    }
    out
}

/// Quantifier-free formulas used as guards of conditionals and loops.
/// Quantifiers and implication are unrepresentable here by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Eq(Expr, Expr),
    /// Application of a relation symbol other than equality.
    Rel(Symbol, Vec<Expr>),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn eq(lhs: Expr, rhs: Expr) -> BoolExpr {
        BoolExpr::Eq(lhs, rhs)
    }

    pub fn not(b: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(b))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Eq(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            BoolExpr::Rel(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
            BoolExpr::Not(b) => b.collect_vars(out),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

/// Full first-order assertions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    True,
    False,
    Eq(Expr, Expr),
    Rel(Symbol, Vec<Expr>),
    Not(Box<Assertion>),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
    /// Existential quantifier; the variable list is nonempty and duplicate-free.
    Exists(Vec<VarName>, Box<Assertion>),
    /// Universal quantifier; the variable list is nonempty and duplicate-free.
    Forall(Vec<VarName>, Box<Assertion>),
}

impl Assertion {
    pub fn eq(lhs: Expr, rhs: Expr) -> Assertion {
        Assertion::Eq(lhs, rhs)
    }

    pub fn not(p: Assertion) -> Assertion {
        Assertion::Not(Box::new(p))
    }

    pub fn and(p: Assertion, q: Assertion) -> Assertion {
        Assertion::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Assertion, q: Assertion) -> Assertion {
        Assertion::Or(Box::new(p), Box::new(q))
    }

    pub fn implies(p: Assertion, q: Assertion) -> Assertion {
        Assertion::Implies(Box::new(p), Box::new(q))
    }

    /// Existential closure; an empty variable list returns `p` unchanged.
    pub fn exists(vars: Vec<VarName>, p: Assertion) -> Assertion {
        if vars.is_empty() {
            p
        } else {
            Assertion::Exists(vars, Box::new(p))
        }
    }

    /// Right-associated conjunction of the given assertions; empty input is `true`.
    pub fn conj(mut parts: Vec<Assertion>) -> Assertion {
        match parts.len() {
            0 => Assertion::True,
            1 => parts.pop().unwrap(),
            _ => {
                let mut acc = parts.pop().unwrap();
                while let Some(p) = parts.pop() {
                    acc = Assertion::and(p, acc);
                }
                acc
            }
        }
    }

    /// Right-associated disjunction; empty input is the canonical false `0 = 1`.
    pub fn disj(mut parts: Vec<Assertion>) -> Assertion {
        match parts.len() {
            0 => Assertion::eq(Expr::constant("0"), Expr::constant("1")),
            1 => parts.pop().unwrap(),
            _ => {
                let mut acc = parts.pop().unwrap();
                while let Some(p) = parts.pop() {
                    acc = Assertion::or(p, acc);
                }
                acc
            }
        }
    }

    /// Pairwise equalities `xs = ys` as a right-associated conjunction.
    /// Both lists must have the same length; empty lists give `true`.
    pub fn eq_lists(xs: &[VarName], ys: &[Expr]) -> Assertion {
        assert_eq!(xs.len(), ys.len());
        Assertion::conj(
            xs.iter()
                .zip(ys.iter())
                .map(|(x, y)| Assertion::eq(Expr::Var(x.clone()), y.clone()))
                .collect(),
        )
    }
}

/// Embeds a guard into the assertion language.
impl From<&BoolExpr> for Assertion {
    fn from(b: &BoolExpr) -> Assertion {
        match b {
            BoolExpr::True => Assertion::True,
            BoolExpr::False => Assertion::False,
            BoolExpr::Eq(l, r) => Assertion::Eq(l.clone(), r.clone()),
            BoolExpr::Rel(s, args) => Assertion::Rel(s.clone(), args.clone()),
            BoolExpr::Not(x) => Assertion::not(Assertion::from(x.as_ref())),
            BoolExpr::And(l, r) => {
                Assertion::and(Assertion::from(l.as_ref()), Assertion::from(r.as_ref()))
            }
            BoolExpr::Or(l, r) => {
                Assertion::or(Assertion::from(l.as_ref()), Assertion::from(r.as_ref()))
            }
        }
    }
}

/// Statements of the programming language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    /// Parallel assignment `x1,..,xk := t1,..,tk`; targets are distinct and
    /// the two lists have equal length. The empty assignment is identified
    /// with `skip` and never constructed.
    Assign(Vec<VarName>, Vec<Expr>),
    /// Procedure call with actual parameter expressions.
    Call(ProcName, Vec<Expr>),
    Seq(Box<Stmt>, Box<Stmt>),
    If(BoolExpr, Box<Stmt>, Box<Stmt>),
    While(BoolExpr, Box<Stmt>),
    /// Block with explicitly initialized locals
    /// `begin local x1,..,xk := t1,..,tk ; S end`. The locals list may be
    /// empty, in which case the initializer is rendered as `skip`.
    Block(Vec<VarName>, Vec<Expr>, Box<Stmt>),
}

impl Stmt {
    /// Parallel assignment, normalizing the empty form to `skip`.
    pub fn assign(targets: Vec<VarName>, sources: Vec<Expr>) -> Stmt {
        assert_eq!(targets.len(), sources.len());
        if targets.is_empty() {
            Stmt::Skip
        } else {
            Stmt::Assign(targets, sources)
        }
    }

    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    pub fn if_then_else(guard: BoolExpr, then_s: Stmt, else_s: Stmt) -> Stmt {
        Stmt::If(guard, Box::new(then_s), Box::new(else_s))
    }

    pub fn while_do(guard: BoolExpr, body: Stmt) -> Stmt {
        Stmt::While(guard, Box::new(body))
    }

    pub fn block(locals: Vec<VarName>, inits: Vec<Expr>, body: Stmt) -> Stmt {
        assert_eq!(locals.len(), inits.len());
        Stmt::Block(locals, inits, Box::new(body))
    }

    /// The initializer of a block viewed as a statement: a parallel
    /// assignment, or `skip` when the locals list is empty.
    pub fn block_init(locals: &[VarName], inits: &[Expr]) -> Stmt {
        Stmt::assign(locals.to_vec(), inits.to_vec())
    }

    /// All variables occurring in the statement, including guard variables,
    /// assignment targets and block locals.
    pub fn collect_vars(&self, out: &mut BTreeSet<VarName>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign(xs, ts) => {
                out.extend(xs.iter().cloned());
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Stmt::Call(_, ts) => {
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Stmt::Seq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Stmt::If(b, s1, s2) => {
                b.collect_vars(out);
                s1.collect_vars(out);
                s2.collect_vars(out);
            }
            Stmt::While(b, s) => {
                b.collect_vars(out);
                s.collect_vars(out);
            }
            Stmt::Block(xs, ts, s) => {
                out.extend(xs.iter().cloned());
                for t in ts {
                    t.collect_vars(out);
                }
                s.collect_vars(out);
            }
        }
    }

    /// Procedure names called anywhere in the statement.
    pub fn collect_calls(&self, out: &mut BTreeSet<ProcName>) {
        match self {
            Stmt::Skip | Stmt::Assign(..) => {}
            Stmt::Call(p, _) => {
                out.insert(p.clone());
            }
            Stmt::Seq(a, b) => {
                a.collect_calls(out);
                b.collect_calls(out);
            }
            Stmt::If(_, s1, s2) => {
                s1.collect_calls(out);
                s2.collect_calls(out);
            }
            Stmt::While(_, s) => s.collect_calls(out),
            Stmt::Block(_, _, s) => s.collect_calls(out),
        }
    }
}

/// A procedure declaration `P(u1,..,uk) :: S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: ProcName,
    /// Formal parameters, duplicate-free, possibly empty.
    pub formals: Vec<VarName>,
    pub body: Stmt,
}

/// A program: a set of procedure declarations together with a main statement.
///
/// Declarations are kept in source order; every procedure called anywhere in
/// the program has exactly one declaration, and every call site has as many
/// actuals as the callee has formals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    decls: Vec<ProcDecl>,
    main: Stmt,
}

/// Violations of the `Program` invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("procedure `{0}` is declared more than once")]
    DuplicateDeclaration(ProcName),
    #[error("call to undeclared procedure `{0}`")]
    UndeclaredProcedure(ProcName),
    #[error("call to `{name}` has {actual} actuals but the declaration has {formal} formals")]
    ArityMismatch {
        name: ProcName,
        actual: usize,
        formal: usize,
    },
    #[error("duplicate variable `{var}` in a {kind} list")]
    DuplicateVariable { var: VarName, kind: &'static str },
    #[error("assignment has {targets} targets but {sources} source expressions")]
    LengthMismatch { targets: usize, sources: usize },
}

fn check_distinct(vars: &[VarName], kind: &'static str) -> Result<(), ProgramError> {
    let mut seen = BTreeSet::new();
    for v in vars {
        if !seen.insert(v) {
            return Err(ProgramError::DuplicateVariable {
                var: v.clone(),
                kind,
            });
        }
    }
    Ok(())
}

fn check_stmt(s: &Stmt, decls: &[ProcDecl]) -> Result<(), ProgramError> {
    match s {
        Stmt::Skip => Ok(()),
        Stmt::Assign(xs, ts) => {
            if xs.len() != ts.len() {
                return Err(ProgramError::LengthMismatch {
                    targets: xs.len(),
                    sources: ts.len(),
                });
            }
            check_distinct(xs, "assignment target")
        }
        Stmt::Call(p, ts) => match decls.iter().find(|d| &d.name == p) {
            None => Err(ProgramError::UndeclaredProcedure(p.clone())),
            Some(d) if d.formals.len() != ts.len() => Err(ProgramError::ArityMismatch {
                name: p.clone(),
                actual: ts.len(),
                formal: d.formals.len(),
            }),
            Some(_) => Ok(()),
        },
        Stmt::Seq(a, b) => {
            check_stmt(a, decls)?;
            check_stmt(b, decls)
        }
        Stmt::If(_, s1, s2) => {
            check_stmt(s1, decls)?;
            check_stmt(s2, decls)
        }
        Stmt::While(_, s) => check_stmt(s, decls),
        Stmt::Block(xs, ts, s) => {
            if xs.len() != ts.len() {
                return Err(ProgramError::LengthMismatch {
                    targets: xs.len(),
                    sources: ts.len(),
                });
            }
            check_distinct(xs, "block local")?;
            check_stmt(s, decls)
        }
    }
}

impl Program {
    /// Validates all program invariants and builds the program.
    pub fn new(decls: Vec<ProcDecl>, main: Stmt) -> Result<Program, ProgramError> {
        let mut names = BTreeSet::new();
        for d in &decls {
            if !names.insert(d.name.clone()) {
                return Err(ProgramError::DuplicateDeclaration(d.name.clone()));
            }
            check_distinct(&d.formals, "formal parameter")?;
        }
        for d in &decls {
            check_stmt(&d.body, &decls)?;
        }
        check_stmt(&main, &decls)?;
        Ok(Program { decls, main })
    }

    /// A program with no declarations.
    pub fn from_main(main: Stmt) -> Result<Program, ProgramError> {
        Program::new(Vec::new(), main)
    }

    pub fn decls(&self) -> &[ProcDecl] {
        &self.decls
    }

    pub fn main(&self) -> &Stmt {
        &self.main
    }

    pub fn decl(&self, name: &str) -> Option<&ProcDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// Checks a statement (for example one taken from a proof file) against
    /// the program's declarations.
    pub fn validate_stmt(&self, s: &Stmt) -> Result<(), ProgramError> {
        check_stmt(s, &self.decls)
    }

    /// All variables occurring in the program: formals, bodies and main.
    pub fn all_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        for d in &self.decls {
            out.extend(d.formals.iter().cloned());
            d.body.collect_vars(&mut out);
        }
        self.main.collect_vars(&mut out);
        out
    }

    /// Variables of the declarations together with those of `s`,
    /// the set written `var(D | S)`.
    pub fn vars_with_stmt(&self, s: &Stmt) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        for d in &self.decls {
            out.extend(d.formals.iter().cloned());
            d.body.collect_vars(&mut out);
        }
        s.collect_vars(&mut out);
        out
    }

    /// Replaces the main statement, revalidating it.
    pub fn with_main(&self, main: Stmt) -> Result<Program, ProgramError> {
        Program::new(self.decls.clone(), main)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::syntax::render::render_program(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_namespace_shape() {
        assert!(is_fresh_name("$0"));
        assert!(is_fresh_name("$17"));
        assert!(!is_fresh_name("$"));
        assert!(!is_fresh_name("$x"));
        assert!(!is_fresh_name("x0"));
        assert!(is_fresh_name(&fresh_name(3)));
    }

    #[test]
    fn expr_vars_examples() {
        // [u + y] -> {u, y}
        let t = Expr::bin("+", Expr::var("u"), Expr::var("y"));
        let vs = expr_vars(&[t]);
        assert_eq!(vs, ["u", "y"].iter().map(|s| s.to_string()).collect());
        // [] -> {}
        assert!(expr_vars(&[]).is_empty());
        // [0, x, x] -> {x}
        let vs = expr_vars(&[Expr::constant("0"), Expr::var("x"), Expr::var("x")]);
        assert_eq!(vs, ["x"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn empty_assignment_is_skip() {
        assert_eq!(Stmt::assign(vec![], vec![]), Stmt::Skip);
    }

    #[test]
    fn undeclared_procedure_rejected() {
        let main = Stmt::Call("Q".into(), vec![Expr::constant("1")]);
        assert_eq!(
            Program::from_main(main),
            Err(ProgramError::UndeclaredProcedure("Q".into()))
        );
    }

    #[test]
    fn arity_mismatch_rejected() {
        let d = ProcDecl {
            name: "P".into(),
            formals: vec!["u".into()],
            body: Stmt::Skip,
        };
        let main = Stmt::Call("P".into(), vec![]);
        assert!(matches!(
            Program::new(vec![d], main),
            Err(ProgramError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_targets_rejected() {
        let main = Stmt::Assign(
            vec!["x".into(), "x".into()],
            vec![Expr::constant("0"), Expr::constant("1")],
        );
        assert!(matches!(
            Program::from_main(main),
            Err(ProgramError::DuplicateVariable { .. })
        ));
    }

    #[test]
    fn conj_and_disj_canonical_forms() {
        assert_eq!(Assertion::conj(vec![]), Assertion::True);
        let canonical_false = Assertion::eq(Expr::constant("0"), Expr::constant("1"));
        assert_eq!(Assertion::disj(vec![]), canonical_false);
        let a = Assertion::eq(Expr::var("x"), Expr::constant("0"));
        let b = Assertion::eq(Expr::var("y"), Expr::constant("1"));
        let c = Assertion::eq(Expr::var("z"), Expr::constant("0"));
        assert_eq!(
            Assertion::conj(vec![a.clone(), b.clone(), c.clone()]),
            Assertion::and(a, Assertion::and(b, c))
        );
    }
}
