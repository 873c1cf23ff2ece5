//! Certification of the linear proof-length bound: each recursion premise
//! must fit the `m` budget of its statement, the whole tree must fit
//! `m(T) + Σ m(S_i) + 1`, and every component must satisfy `m < 13 l`.

use crate::proof::{Derivation, Rule};
use crate::syntax::{stmt_metrics, Program, Stmt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCertificate {
    pub rule_count: u64,
    /// `m(T) + Σ m(S_i) + 1` — the recursion application itself is the +1.
    pub budget: u64,
    /// Rule applications per premise: the goal premise first, then one per
    /// declaration in order.
    pub premise_counts: Vec<u64>,
    /// `m(T)` followed by the `m(S_i)`.
    pub premise_budgets: Vec<u64>,
    pub per_premise_ok: bool,
    pub total_ok: bool,
    /// `m < 13 l` for the goal statement and every procedure body.
    pub weight_ok: bool,
}

impl BoundCertificate {
    pub fn ok(&self) -> bool {
        self.per_premise_ok && self.total_ok && self.weight_ok
    }
}

/// Recomputes the certificate from a derivation and its goal statement.
pub fn certify_linear_bound(
    prog: &Program,
    derivation: &Derivation,
    goal_stmt: &Stmt,
) -> BoundCertificate {
    let goal = stmt_metrics(goal_stmt);
    let bodies: Vec<_> = prog
        .decls()
        .iter()
        .map(|d| stmt_metrics(&d.body))
        .collect();
    let mut premise_budgets = vec![goal.m];
    premise_budgets.extend(bodies.iter().map(|m| m.m));

    let premise_counts: Vec<u64> = if derivation.rule == Rule::Recursion {
        derivation.children.iter().map(|c| c.rule_count()).collect()
    } else {
        vec![derivation.rule_count()]
    };

    let rule_count = derivation.rule_count();
    let budget = premise_budgets.iter().sum::<u64>() + 1;
    let per_premise_ok = premise_counts.len() == premise_budgets.len()
        && premise_counts
            .iter()
            .zip(premise_budgets.iter())
            .all(|(c, b)| c <= b);
    let total_ok = rule_count <= budget;
    let weight_ok =
        goal.m < 13 * goal.l && bodies.iter().all(|m| m.m < 13 * m.l);

    BoundCertificate {
        rule_count,
        budget,
        premise_counts,
        premise_budgets,
        per_premise_ok,
        total_ok,
        weight_ok,
    }
}
