//! The trusted checker for derivations: structural recursion over the
//! proof tree, verifying each node's conclusion against its rule schema,
//! the rule's side conditions, and — for CONSEQUENCE — its semantic
//! obligations via the assertion oracle.
//!
//! The checker never searches: it validates exactly the tree it is given,
//! visits every node, and reports all failures.

use crate::oracle::{AssertionOracle, EnumerationOracle, ValidityVerdict};
use crate::semantics::{EvalError, Interpretation, State, Triple};
use crate::syntax::{
    change_set, free_vars, render_assertion, subst_assertion, Assertion, Expr, Program,
    ProgramError, Stmt, Subst, VarName,
};

use super::derivation::{AssumptionContext, Derivation, Rule};

/// How one node failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckFailure {
    /// Wrong number of children for the rule.
    Arity { expected: String, found: usize },
    /// The conclusion (or a child's conclusion) does not fit the rule schema.
    Mismatch { detail: String },
    /// A disjointness side condition is violated; `condition` names the two
    /// sets and `overlap` lists the offending variables.
    SideCondition {
        condition: String,
        overlap: Vec<VarName>,
    },
    /// A CONSEQUENCE obligation was not valid in the interpretation.
    Obligation {
        obligation: Assertion,
        counterexample: Option<State>,
        over_budget: bool,
    },
    /// An ASSUME leaf whose triple is not in the ambient context.
    AssumptionNotInContext,
    /// The node's statement does not fit the ambient program.
    IllFormedStatement(ProgramError),
    /// The rule name was not recognized by the parser (kept for reports).
    UnknownRule(String),
    /// Evaluation failed while discharging an obligation.
    Evaluation(EvalError),
}

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckFailure::Arity { expected, found } => {
                write!(f, "expected {expected} children, found {found}")
            }
            CheckFailure::Mismatch { detail } => write!(f, "{detail}"),
            CheckFailure::SideCondition { condition, overlap } => write!(
                f,
                "side condition {condition} = ∅ violated by {{{}}}",
                overlap.join(", ")
            ),
            CheckFailure::Obligation {
                obligation,
                counterexample,
                over_budget,
            } => {
                write!(f, "obligation `{}` ", render_assertion(obligation))?;
                if *over_budget {
                    write!(f, "exceeded the state budget")
                } else if counterexample.is_some() {
                    write!(f, "is not valid (counterexample exists)")
                } else {
                    write!(f, "is not valid")
                }
            }
            CheckFailure::AssumptionNotInContext => {
                write!(f, "assumption is not in the ambient context")
            }
            CheckFailure::IllFormedStatement(e) => write!(f, "ill-formed statement: {e}"),
            CheckFailure::UnknownRule(name) => write!(f, "unknown rule `{name}`"),
            CheckFailure::Evaluation(e) => write!(f, "evaluation error: {e}"),
        }
    }
}

/// Result for one node, addressed by its child-index path from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeReport {
    pub path: Vec<usize>,
    pub rule: Rule,
    pub failures: Vec<CheckFailure>,
}

impl NodeReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Outcome of checking a whole derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub accepted: bool,
    pub nodes: Vec<NodeReport>,
    /// Number of rule applications (assumption leaves excluded).
    pub rule_applications: u64,
}

impl CheckReport {
    pub fn failures(&self) -> impl Iterator<Item = (&NodeReport, &CheckFailure)> {
        self.nodes
            .iter()
            .flat_map(|n| n.failures.iter().map(move |f| (n, f)))
    }
}

/// Checks `d` against the program under assumption context `ctx`,
/// discharging obligations with the given oracle.
pub fn check_derivation_with(
    prog: &Program,
    oracle: &dyn AssertionOracle,
    ctx: &AssumptionContext,
    d: &Derivation,
) -> CheckReport {
    let mut checker = Checker {
        prog,
        oracle,
        nodes: Vec::new(),
    };
    checker.node(d, ctx, Vec::new());
    let accepted = checker.nodes.iter().all(NodeReport::ok);
    CheckReport {
        accepted,
        nodes: checker.nodes,
        rule_applications: d.rule_count(),
    }
}

/// Checks with the brute-force enumeration oracle over `interp`.
pub fn check_derivation(
    prog: &Program,
    interp: &Interpretation,
    ctx: &AssumptionContext,
    d: &Derivation,
) -> CheckReport {
    let oracle = EnumerationOracle::new(interp);
    check_derivation_with(prog, &oracle, ctx, d)
}

/// As [`check_derivation`] with an explicit state budget for the oracle.
pub fn check_derivation_budgeted(
    prog: &Program,
    interp: &Interpretation,
    ctx: &AssumptionContext,
    d: &Derivation,
    budget: usize,
) -> CheckReport {
    let oracle = EnumerationOracle::with_budget(interp, budget);
    check_derivation_with(prog, &oracle, ctx, d)
}

struct Checker<'a> {
    prog: &'a Program,
    oracle: &'a dyn AssertionOracle,
    nodes: Vec<NodeReport>,
}

impl Checker<'_> {
    fn node(&mut self, d: &Derivation, ctx: &AssumptionContext, path: Vec<usize>) {
        let mut failures = Vec::new();
        if let Err(e) = self.prog.validate_stmt(&d.conclusion.stmt) {
            failures.push(CheckFailure::IllFormedStatement(e));
        } else {
            self.rule_check(d, ctx, &mut failures);
        }
        let report = NodeReport {
            path: path.clone(),
            rule: d.rule,
            failures,
        };
        self.nodes.push(report);

        // children of the recursion rules are checked under the contexts
        // the rules install; everything else inherits the ambient context
        match d.rule {
            Rule::Recursion => {
                let child_ctx = self.recursion_context(d).unwrap_or_else(|| ctx.clone());
                for (i, c) in d.children.iter().enumerate() {
                    let mut p = path.clone();
                    p.push(i);
                    self.node(c, &child_ctx, p);
                }
            }
            Rule::RecursionI => {
                let child_ctx = AssumptionContext::unchecked(vec![d.conclusion.clone()]);
                for (i, c) in d.children.iter().enumerate() {
                    let mut p = path.clone();
                    p.push(i);
                    self.node(c, &child_ctx, p);
                }
            }
            _ => {
                for (i, c) in d.children.iter().enumerate() {
                    let mut p = path.clone();
                    p.push(i);
                    self.node(c, ctx, p);
                }
            }
        }
    }

    /// The assumptions a RECURSION node installs: one generic-call triple
    /// per declaration, taken from children 1..=n.
    fn recursion_context(&self, d: &Derivation) -> Option<AssumptionContext> {
        let decls = self.prog.decls();
        if d.children.len() != decls.len() + 1 {
            return None;
        }
        let triples: Vec<Triple> = decls
            .iter()
            .zip(d.children.iter().skip(1))
            .map(|(decl, child)| {
                Triple::new(
                    child.conclusion.pre.clone(),
                    generic_call(decl.name.as_str(), &decl.formals),
                    child.conclusion.post.clone(),
                )
            })
            .collect();
        // the triples are generic calls by construction; the formal/post
        // disjointness is reported as this node's side condition
        Some(AssumptionContext::unchecked(triples))
    }

    fn rule_check(
        &mut self,
        d: &Derivation,
        ctx: &AssumptionContext,
        failures: &mut Vec<CheckFailure>,
    ) {
        let concl = &d.conclusion;
        match d.rule {
            Rule::Assume => {
                expect_children(d, 0, failures);
                if !ctx.contains(concl) {
                    failures.push(CheckFailure::AssumptionNotInContext);
                }
            }
            Rule::Skip => {
                expect_children(d, 0, failures);
                if concl.stmt != Stmt::Skip {
                    failures.push(mismatch("conclusion statement is not `skip`"));
                } else if concl.pre != concl.post {
                    failures.push(mismatch(
                        "skip axiom needs syntactically equal pre- and postcondition",
                    ));
                }
            }
            Rule::Assign => {
                expect_children(d, 0, failures);
                match &concl.stmt {
                    Stmt::Assign(xs, ts) => {
                        let expected = subst_assertion(&concl.post, &Subst::parallel(xs, ts));
                        if concl.pre != expected {
                            failures.push(mismatch(&format!(
                                "assignment axiom needs precondition `{}`",
                                render_assertion(&expected)
                            )));
                        }
                    }
                    _ => failures.push(mismatch("conclusion statement is not an assignment")),
                }
            }
            Rule::Composition => {
                if !expect_children(d, 2, failures) {
                    return;
                }
                match &concl.stmt {
                    Stmt::Seq(s1, s2) => {
                        let (c1, c2) = (&d.children[0].conclusion, &d.children[1].conclusion);
                        if c1.stmt != **s1 || c2.stmt != **s2 {
                            failures.push(mismatch(
                                "children do not prove the two components of the sequence",
                            ));
                        }
                        if c1.pre != concl.pre {
                            failures.push(mismatch("first premise precondition differs"));
                        }
                        if c1.post != c2.pre {
                            failures.push(mismatch(
                                "intermediate assertion differs between the premises",
                            ));
                        }
                        if c2.post != concl.post {
                            failures.push(mismatch("second premise postcondition differs"));
                        }
                    }
                    _ => failures.push(mismatch("conclusion statement is not a sequence")),
                }
            }
            Rule::If => {
                if !expect_children(d, 2, failures) {
                    return;
                }
                match &concl.stmt {
                    Stmt::If(b, s1, s2) => {
                        let guard = Assertion::from(b);
                        let (c1, c2) = (&d.children[0].conclusion, &d.children[1].conclusion);
                        let want1 = Triple::new(
                            Assertion::and(concl.pre.clone(), guard.clone()),
                            (**s1).clone(),
                            concl.post.clone(),
                        );
                        let want2 = Triple::new(
                            Assertion::and(concl.pre.clone(), Assertion::not(guard)),
                            (**s2).clone(),
                            concl.post.clone(),
                        );
                        if c1 != &want1 {
                            failures.push(mismatch(&format!(
                                "first premise must be `{want1}`"
                            )));
                        }
                        if c2 != &want2 {
                            failures.push(mismatch(&format!(
                                "second premise must be `{want2}`"
                            )));
                        }
                    }
                    _ => failures.push(mismatch("conclusion statement is not a conditional")),
                }
            }
            Rule::While => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                match &concl.stmt {
                    Stmt::While(b, body) => {
                        let guard = Assertion::from(b);
                        let inv = concl.pre.clone();
                        let want_post =
                            Assertion::and(inv.clone(), Assertion::not(guard.clone()));
                        if concl.post != want_post {
                            failures.push(mismatch(&format!(
                                "loop conclusion postcondition must be `{}`",
                                render_assertion(&want_post)
                            )));
                        }
                        let want_child = Triple::new(
                            Assertion::and(inv.clone(), guard),
                            (**body).clone(),
                            inv,
                        );
                        if d.children[0].conclusion != want_child {
                            failures.push(mismatch(&format!(
                                "loop premise must be `{want_child}`"
                            )));
                        }
                    }
                    _ => failures.push(mismatch("conclusion statement is not a loop")),
                }
            }
            Rule::Block => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                match &concl.stmt {
                    Stmt::Block(xs, ts, body) => {
                        let want_stmt = Stmt::seq(Stmt::block_init(xs, ts), (**body).clone());
                        let child = &d.children[0].conclusion;
                        if child.stmt != want_stmt
                            || child.pre != concl.pre
                            || child.post != concl.post
                        {
                            failures.push(mismatch(
                                "premise must prove the initializer-plus-body sequence \
                                 with the same pre- and postcondition",
                            ));
                        }
                        side_disjoint(
                            "{locals} ∩ free(post)",
                            xs.iter(),
                            &free_vars(&concl.post),
                            failures,
                        );
                    }
                    _ => failures.push(mismatch("conclusion statement is not a block")),
                }
            }
            Rule::ProcedureCall => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                match &concl.stmt {
                    Stmt::Call(p, actuals) => {
                        let Some(decl) = self.prog.decl(p) else {
                            failures.push(mismatch("call to undeclared procedure"));
                            return;
                        };
                        let child = &d.children[0].conclusion;
                        let generic = generic_call(p, &decl.formals);
                        if child.stmt != generic {
                            failures.push(mismatch("premise is not about the generic call"));
                        }
                        if child.post != concl.post {
                            failures.push(mismatch("instantiation must keep the postcondition"));
                        }
                        let expected =
                            subst_assertion(&child.pre, &Subst::parallel(&decl.formals, actuals));
                        if concl.pre != expected {
                            failures.push(mismatch(&format!(
                                "instantiated precondition must be `{}`",
                                render_assertion(&expected)
                            )));
                        }
                        side_disjoint(
                            "{formals} ∩ free(post)",
                            decl.formals.iter(),
                            &free_vars(&concl.post),
                            failures,
                        );
                    }
                    _ => failures.push(mismatch("conclusion statement is not a call")),
                }
            }
            Rule::Recursion => {
                let n = self.prog.decls().len();
                if d.children.len() != n + 1 {
                    failures.push(CheckFailure::Arity {
                        expected: format!("{} (one per declaration plus the goal)", n + 1),
                        found: d.children.len(),
                    });
                    return;
                }
                if &d.children[0].conclusion != concl {
                    failures.push(mismatch(
                        "first premise must conclude exactly the goal triple",
                    ));
                }
                for (i, decl) in self.prog.decls().iter().enumerate() {
                    let child = &d.children[i + 1].conclusion;
                    if child.stmt != decl.body {
                        failures.push(mismatch(&format!(
                            "premise {} must prove the body of `{}`",
                            i + 1,
                            decl.name
                        )));
                    }
                    side_disjoint(
                        &format!("{{formals of {}}} ∩ free(post)", decl.name),
                        decl.formals.iter(),
                        &free_vars(&child.post),
                        failures,
                    );
                }
            }
            Rule::RecursionI => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                if self.prog.decls().len() != 1 {
                    failures.push(mismatch(
                        "the single-procedure recursion rule needs exactly one declaration",
                    ));
                    return;
                }
                let decl = &self.prog.decls()[0];
                if concl.stmt != generic_call(&decl.name, &decl.formals) {
                    failures.push(mismatch(
                        "conclusion must be the generic call of the declared procedure",
                    ));
                }
                let child = &d.children[0].conclusion;
                if child.pre != concl.pre || child.post != concl.post || child.stmt != decl.body {
                    failures.push(mismatch(
                        "premise must prove the body under the same pre- and postcondition",
                    ));
                }
                side_disjoint(
                    "{formals} ∩ free(post)",
                    decl.formals.iter(),
                    &free_vars(&concl.post),
                    failures,
                );
            }
            Rule::Substitution => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                let Some((xs, ys)) = &d.renaming else {
                    failures.push(mismatch("substitution node carries no renaming"));
                    return;
                };
                if xs.len() != ys.len() {
                    failures.push(mismatch("renaming lists have different lengths"));
                    return;
                }
                let child = &d.children[0].conclusion;
                if child.stmt != concl.stmt {
                    failures.push(mismatch("substitution must keep the statement"));
                }
                let sub = Subst::renaming(xs, ys);
                let want_pre = subst_assertion(&child.pre, &sub);
                let want_post = subst_assertion(&child.post, &sub);
                if concl.pre != want_pre || concl.post != want_post {
                    failures.push(mismatch(&format!(
                        "conclusion must be `{{{}}} .. {{{}}}`",
                        render_assertion(&want_pre),
                        render_assertion(&want_post)
                    )));
                }
                let prog_vars = self.prog.vars_with_stmt(&concl.stmt);
                side_disjoint("{x} ∩ var(D | S)", xs.iter(), &prog_vars, failures);
                let changed = change_set(self.prog, &concl.stmt);
                side_disjoint("{y} ∩ change(D | S)", ys.iter(), &changed, failures);
            }
            Rule::Invariance => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                let child = &d.children[0].conclusion;
                if child.stmt != concl.stmt {
                    failures.push(mismatch("invariance must keep the statement"));
                }
                let Assertion::And(inv, rest) = &concl.pre else {
                    failures.push(mismatch(
                        "conclusion precondition must be `invariant & premise-pre`",
                    ));
                    return;
                };
                if **rest != child.pre {
                    failures.push(mismatch(
                        "conclusion precondition must extend the premise precondition",
                    ));
                    return;
                }
                let want_post = Assertion::and((**inv).clone(), child.post.clone());
                if concl.post != want_post {
                    failures.push(mismatch(&format!(
                        "conclusion postcondition must be `{}`",
                        render_assertion(&want_post)
                    )));
                }
                let changed = change_set(self.prog, &concl.stmt);
                side_disjoint(
                    "free(invariant) ∩ change(D | S)",
                    free_vars(inv).iter(),
                    &changed,
                    failures,
                );
            }
            Rule::ExistsIntro => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                let child = &d.children[0].conclusion;
                if child.stmt != concl.stmt {
                    failures.push(mismatch("existential introduction must keep the statement"));
                }
                if child.post != concl.post {
                    failures.push(mismatch(
                        "existential introduction must keep the postcondition",
                    ));
                }
                let Assertion::Exists(vs, body) = &concl.pre else {
                    failures.push(mismatch(
                        "conclusion precondition must be existentially quantified",
                    ));
                    return;
                };
                if **body != child.pre {
                    failures.push(mismatch(
                        "quantifier body must be the premise precondition",
                    ));
                }
                let mut forbidden = self.prog.vars_with_stmt(&concl.stmt);
                forbidden.extend(free_vars(&concl.post));
                side_disjoint(
                    "{x} ∩ (var(D | S) ∪ free(post))",
                    vs.iter(),
                    &forbidden,
                    failures,
                );
            }
            Rule::Consequence => {
                if !expect_children(d, 1, failures) {
                    return;
                }
                let child = &d.children[0].conclusion;
                if child.stmt != concl.stmt {
                    failures.push(mismatch("consequence must keep the statement"));
                }
                for obligation in [
                    Assertion::implies(concl.pre.clone(), child.pre.clone()),
                    Assertion::implies(child.post.clone(), concl.post.clone()),
                ] {
                    match self.oracle.is_valid(&obligation) {
                        Ok(ValidityVerdict::Valid) => {}
                        Ok(ValidityVerdict::Invalid(state)) => {
                            failures.push(CheckFailure::Obligation {
                                obligation,
                                counterexample: Some(state),
                                over_budget: false,
                            });
                        }
                        Ok(ValidityVerdict::OverBudget) => {
                            failures.push(CheckFailure::Obligation {
                                obligation,
                                counterexample: None,
                                over_budget: true,
                            });
                        }
                        Err(e) => failures.push(CheckFailure::Evaluation(e)),
                    }
                }
            }
        }
    }
}

fn generic_call(name: &str, formals: &[VarName]) -> Stmt {
    Stmt::Call(
        name.to_string(),
        formals.iter().map(|u| Expr::Var(u.clone())).collect(),
    )
}

fn mismatch(detail: &str) -> CheckFailure {
    CheckFailure::Mismatch {
        detail: detail.to_string(),
    }
}

fn expect_children(d: &Derivation, n: usize, failures: &mut Vec<CheckFailure>) -> bool {
    if d.children.len() == n {
        true
    } else {
        failures.push(CheckFailure::Arity {
            expected: n.to_string(),
            found: d.children.len(),
        });
        false
    }
}

fn side_disjoint<'a, I: IntoIterator<Item = &'a VarName>>(
    condition: &str,
    vars: I,
    against: &std::collections::BTreeSet<VarName>,
    failures: &mut Vec<CheckFailure>,
) {
    let overlap: Vec<VarName> = vars
        .into_iter()
        .filter(|v| against.contains(*v))
        .cloned()
        .collect();
    if !overlap.is_empty() {
        failures.push(CheckFailure::SideCondition {
            condition: condition.to_string(),
            overlap,
        });
    }
}
