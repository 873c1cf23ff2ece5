//! Validity of assertions in a fixed finite interpretation.
//!
//! This is the supply of "assertions true in the interpretation" that the
//! CONSEQUENCE rule draws on. The shipped implementation decides validity
//! by enumerating all states over the assertion's free variables; the
//! trait leaves room for incomplete back ends, whose non-`Valid` verdicts
//! the proof kernel treats as failed obligations.

use crate::semantics::{
    EvalError, FormulaCache, Interpretation, SetEvaluator, SpaceError, State, StateSpace,
    Support, DEFAULT_STATE_BUDGET,
};
use crate::syntax::{free_vars, Assertion};

/// Verdict of a validity query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityVerdict {
    Valid,
    /// A state falsifying the assertion (the first in enumeration order).
    Invalid(State),
    /// The state space exceeded the configured budget.
    OverBudget,
}

impl ValidityVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityVerdict::Valid)
    }
}

/// Decides whether assertions are true in an interpretation.
pub trait AssertionOracle {
    fn is_valid(&self, p: &Assertion) -> Result<ValidityVerdict, EvalError>;

    /// Validity of `p -> q`.
    fn entails(&self, p: &Assertion, q: &Assertion) -> Result<ValidityVerdict, EvalError> {
        self.is_valid(&Assertion::implies(p.clone(), q.clone()))
    }
}

/// Brute-force oracle: enumerate every state over the free variables.
/// Meanings of large formulas are cached across queries.
pub struct EnumerationOracle<'a> {
    interp: &'a Interpretation,
    budget: usize,
    cache: FormulaCache,
}

impl<'a> EnumerationOracle<'a> {
    pub fn new(interp: &'a Interpretation) -> EnumerationOracle<'a> {
        EnumerationOracle {
            interp,
            budget: DEFAULT_STATE_BUDGET,
            cache: FormulaCache::default(),
        }
    }

    pub fn with_budget(interp: &'a Interpretation, budget: usize) -> EnumerationOracle<'a> {
        EnumerationOracle {
            interp,
            budget,
            cache: FormulaCache::default(),
        }
    }
}

impl AssertionOracle for EnumerationOracle<'_> {
    fn is_valid(&self, p: &Assertion) -> Result<ValidityVerdict, EvalError> {
        let support = Support::new(free_vars(p));
        let space = match StateSpace::new(support, self.interp, self.budget) {
            Ok(space) => space,
            Err(SpaceError::BudgetExceeded { .. }) => return Ok(ValidityVerdict::OverBudget),
        };
        let mut ev = SetEvaluator::with_cache(self.interp, &space, &self.cache, self.budget);
        let set = match ev.eval(p) {
            Ok(set) => set,
            Err(EvalError::Space(SpaceError::BudgetExceeded { .. })) => {
                return Ok(ValidityVerdict::OverBudget)
            }
            Err(e) => return Err(e),
        };
        match set.bits().first_zero() {
            None => Ok(ValidityVerdict::Valid),
            Some(idx) => Ok(ValidityVerdict::Invalid(space.state(idx))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_assertion;

    fn z(n: usize) -> Interpretation {
        Interpretation::zmod(n).unwrap()
    }

    #[test]
    fn reflexivity_is_valid() {
        let z2 = z(2);
        let oracle = EnumerationOracle::new(&z2);
        let v = oracle.is_valid(&parse_assertion("x = x").unwrap()).unwrap();
        assert!(v.is_valid());
    }

    #[test]
    fn counterexample_is_first_in_order() {
        let z2 = z(2);
        let oracle = EnumerationOracle::new(&z2);
        match oracle.is_valid(&parse_assertion("x = 0").unwrap()).unwrap() {
            ValidityVerdict::Invalid(s) => assert_eq!(s.get("x"), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn z3_instance() {
        let z3 = z(3);
        let oracle = EnumerationOracle::new(&z3);
        let p = parse_assertion("x = 1 & x = 1 -> x = 1 + 0").unwrap();
        assert!(oracle.is_valid(&p).unwrap().is_valid());
    }

    #[test]
    fn entails_examples() {
        let z3 = z(3);
        let oracle = EnumerationOracle::new(&z3);
        let f = parse_assertion("false").unwrap();
        let anything = parse_assertion("x = y * z").unwrap();
        assert!(oracle.entails(&f, &anything).unwrap().is_valid());
        let p = parse_assertion("sum = z & sum = z").unwrap();
        let q = parse_assertion("sum = z").unwrap();
        assert!(oracle.entails(&p, &q).unwrap().is_valid());
        let t = parse_assertion("true").unwrap();
        let x0 = parse_assertion("x = 0").unwrap();
        assert!(!oracle.entails(&t, &x0).unwrap().is_valid());
    }

    #[test]
    fn closed_assertions_need_no_states() {
        let z2 = z(2);
        let oracle = EnumerationOracle::new(&z2);
        assert!(oracle
            .is_valid(&parse_assertion("forall x: x + x = 0").unwrap())
            .unwrap()
            .is_valid());
        assert!(!oracle
            .is_valid(&parse_assertion("exists x: !(x = x)").unwrap())
            .unwrap()
            .is_valid());
    }

    #[test]
    fn over_budget_is_reported() {
        let z3 = z(3);
        let oracle = EnumerationOracle::with_budget(&z3, 10);
        let p = parse_assertion("a = b & c = d & e = f").unwrap();
        assert_eq!(oracle.is_valid(&p).unwrap(), ValidityVerdict::OverBudget);
    }
}
