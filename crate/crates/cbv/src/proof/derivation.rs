//! Derivation trees of the call-by-value proof system and the assumption
//! contexts used by its recursion rules.

use thiserror::Error;

use crate::semantics::Triple;
use crate::syntax::{free_vars, Expr, Program, Stmt, VarName};

/// The proof rules. `Assume` marks an assumption leaf, which is not a rule
/// application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Skip,
    Assign,
    Composition,
    If,
    While,
    Block,
    ProcedureCall,
    Recursion,
    RecursionI,
    Substitution,
    Invariance,
    ExistsIntro,
    Consequence,
    Assume,
}

impl Rule {
    /// The keyword used in proof files.
    pub fn name(self) -> &'static str {
        match self {
            Rule::Skip => "SKIP",
            Rule::Assign => "ASSIGN",
            Rule::Composition => "COMP",
            Rule::If => "IF",
            Rule::While => "WHILE",
            Rule::Block => "BLOCK",
            Rule::ProcedureCall => "CALL",
            Rule::Recursion => "RECURSION",
            Rule::RecursionI => "RECURSION-I",
            Rule::Substitution => "SUBST",
            Rule::Invariance => "INVARIANCE",
            Rule::ExistsIntro => "EXISTS-INTRO",
            Rule::Consequence => "CONSEQ",
            Rule::Assume => "ASSUME",
        }
    }

    pub fn from_name(name: &str) -> Option<Rule> {
        Some(match name {
            "SKIP" => Rule::Skip,
            "ASSIGN" => Rule::Assign,
            "COMP" => Rule::Composition,
            "IF" => Rule::If,
            "WHILE" => Rule::While,
            "BLOCK" => Rule::Block,
            "CALL" => Rule::ProcedureCall,
            "RECURSION" => Rule::Recursion,
            "RECURSION-I" => Rule::RecursionI,
            "SUBST" => Rule::Substitution,
            "INVARIANCE" => Rule::Invariance,
            "EXISTS-INTRO" => Rule::ExistsIntro,
            "CONSEQ" => Rule::Consequence,
            "ASSUME" => Rule::Assume,
            _ => return None,
        })
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One node of a proof tree: a rule applied to child derivations, with the
/// variable renaming carried by SUBSTITUTION nodes as its rule data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: Triple,
    /// `[xs := ys]` for SUBSTITUTION nodes, absent elsewhere.
    pub renaming: Option<(Vec<VarName>, Vec<VarName>)>,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn leaf(rule: Rule, conclusion: Triple) -> Derivation {
        Derivation {
            rule,
            conclusion,
            renaming: None,
            children: Vec::new(),
        }
    }

    pub fn node(rule: Rule, conclusion: Triple, children: Vec<Derivation>) -> Derivation {
        Derivation {
            rule,
            conclusion,
            renaming: None,
            children,
        }
    }

    pub fn substitution(
        conclusion: Triple,
        xs: Vec<VarName>,
        ys: Vec<VarName>,
        child: Derivation,
    ) -> Derivation {
        Derivation {
            rule: Rule::Substitution,
            conclusion,
            renaming: Some((xs, ys)),
            children: vec![child],
        }
    }

    /// Number of rule applications in the tree: every node counts except
    /// assumption leaves.
    pub fn rule_count(&self) -> u64 {
        let own = if self.rule == Rule::Assume { 0 } else { 1 };
        own + self.children.iter().map(Derivation::rule_count).sum::<u64>()
    }

    /// Total number of nodes, assumption leaves included.
    pub fn node_count(&self) -> u64 {
        1 + self.children.iter().map(Derivation::node_count).sum::<u64>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("assumption {index} is not a procedure call")]
    NotACall { index: usize },
    #[error("assumption {index} calls undeclared procedure `{name}`")]
    Undeclared { name: String, index: usize },
    #[error("assumption {index} is not a generic call of `{name}`")]
    NotGeneric { name: String, index: usize },
    #[error(
        "assumption {index}: formals {{{formals}}} occur free in the postcondition"
    )]
    FormalsInPost { formals: String, index: usize },
}

/// An ordered list of assumption triples about generic calls.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssumptionContext {
    triples: Vec<Triple>,
}

impl AssumptionContext {
    pub fn empty() -> AssumptionContext {
        AssumptionContext::default()
    }

    /// Builds a context without validating the assumption invariants. Used
    /// by the checker for the contexts the recursion rules install, whose
    /// shape it verifies itself as rule side conditions.
    pub fn unchecked(triples: Vec<Triple>) -> AssumptionContext {
        AssumptionContext { triples }
    }

    /// Validates that every assumption is a generic call of a declared
    /// procedure whose formals avoid the postcondition.
    pub fn new(prog: &Program, triples: Vec<Triple>) -> Result<AssumptionContext, ContextError> {
        for (index, t) in triples.iter().enumerate() {
            let (name, actuals) = match &t.stmt {
                Stmt::Call(p, ts) => (p, ts),
                _ => return Err(ContextError::NotACall { index }),
            };
            let decl = prog.decl(name).ok_or_else(|| ContextError::Undeclared {
                name: name.clone(),
                index,
            })?;
            let formal_exprs: Vec<Expr> =
                decl.formals.iter().map(|u| Expr::Var(u.clone())).collect();
            if actuals != &formal_exprs {
                return Err(ContextError::NotGeneric {
                    name: name.clone(),
                    index,
                });
            }
            let post_free = free_vars(&t.post);
            let bad: Vec<&VarName> = decl
                .formals
                .iter()
                .filter(|u| post_free.contains(*u))
                .collect();
            if !bad.is_empty() {
                return Err(ContextError::FormalsInPost {
                    formals: bad
                        .iter()
                        .map(|v| v.as_str())
                        .collect::<Vec<_>>()
                        .join(", "),
                    index,
                });
            }
        }
        Ok(AssumptionContext { triples })
    }

    /// Membership is plain syntactic equality.
    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }
}
