//! States over a finite variable support, and the enumerable space of all
//! such states.
//!
//! A state is total over all variables: variables outside the support read
//! the default element (the first domain element). The space enumerates
//! states in a fixed mixed-radix order — the first support variable is the
//! least significant digit — which fixes what "the first counterexample"
//! means everywhere.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::interp::{Elem, Interpretation};
use crate::syntax::VarName;

/// A sorted, deduplicated variable support shared by many states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Support {
    vars: Vec<VarName>,
}

impl Support {
    pub fn new<I: IntoIterator<Item = VarName>>(vars: I) -> Arc<Support> {
        let set: BTreeSet<VarName> = vars.into_iter().collect();
        Arc::new(Support {
            vars: set.into_iter().collect(),
        })
    }

    pub fn vars(&self) -> &[VarName] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.position(v).is_some()
    }

    pub fn position(&self, v: &str) -> Option<usize> {
        self.vars.binary_search_by(|x| x.as_str().cmp(v)).ok()
    }

    pub fn covers<'a, I: IntoIterator<Item = &'a VarName>>(&self, vars: I) -> bool {
        vars.into_iter().all(|v| self.contains(v))
    }
}

/// A total variable valuation with finite support.
#[derive(Clone, PartialEq, Eq)]
pub struct State {
    support: Arc<Support>,
    vals: Vec<Elem>,
    default: Elem,
}

impl State {
    /// The state assigning the default element to every variable.
    pub fn bottom(support: Arc<Support>, default: Elem) -> State {
        let vals = vec![default; support.len()];
        State {
            support,
            vals,
            default,
        }
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn default_element(&self) -> Elem {
        self.default
    }

    /// Total lookup; variables outside the support read the default element.
    pub fn get(&self, v: &str) -> Elem {
        match self.support.position(v) {
            Some(i) => self.vals[i],
            None => self.default,
        }
    }

    /// Functional single update. Updates outside the support are ignored;
    /// callers guarantee the support covers the program under evaluation.
    #[must_use]
    pub fn set(&self, v: &str, value: Elem) -> State {
        let mut s = self.clone();
        if let Some(i) = s.support.position(v) {
            s.vals[i] = value;
        }
        s
    }

    /// Simultaneous update `σ[xs := ds]`.
    #[must_use]
    pub fn set_many(&self, xs: &[VarName], ds: &[Elem]) -> State {
        debug_assert_eq!(xs.len(), ds.len());
        let mut s = self.clone();
        for (x, d) in xs.iter().zip(ds.iter()) {
            if let Some(i) = s.support.position(x) {
                s.vals[i] = *d;
            }
        }
        s
    }

    /// Values of a variable list.
    pub fn get_many(&self, xs: &[VarName]) -> Vec<Elem> {
        xs.iter().map(|x| self.get(x)).collect()
    }

    /// Renders `x = c, y = d` using the interpretation's element constants.
    pub fn display(&self, interp: &Interpretation) -> String {
        let parts: Vec<String> = self
            .support
            .vars()
            .iter()
            .zip(self.vals.iter())
            .map(|(v, e)| format!("{v} = {}", interp.element_const(*e)))
            .collect();
        if parts.is_empty() {
            "(empty state)".to_string()
        } else {
            parts.join(", ")
        }
    }

    pub(crate) fn vals(&self) -> &[Elem] {
        &self.vals
    }

    pub(crate) fn from_vals(support: Arc<Support>, vals: Vec<Elem>, default: Elem) -> State {
        debug_assert_eq!(vals.len(), support.len());
        State {
            support,
            vals,
            default,
        }
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .support
            .vars()
            .iter()
            .zip(self.vals.iter())
            .map(|(v, e)| format!("{v}={e}"))
            .collect();
        write!(f, "State[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("state space of {size} states exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: usize },
}

/// The space of all states over a support, enumerable by index.
#[derive(Debug, Clone)]
pub struct StateSpace {
    support: Arc<Support>,
    domain_size: usize,
    default: Elem,
    size: usize,
}

impl StateSpace {
    pub fn new(
        support: Arc<Support>,
        interp: &Interpretation,
        budget: usize,
    ) -> Result<StateSpace, SpaceError> {
        let n = interp.size() as u128;
        let mut size: u128 = 1;
        for _ in 0..support.len() {
            size = size.saturating_mul(n);
            if size > budget as u128 {
                return Err(SpaceError::BudgetExceeded {
                    size,
                    budget,
                });
            }
        }
        Ok(StateSpace {
            support,
            domain_size: interp.size(),
            default: 0,
            size: size as usize,
        })
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Decodes a state from its mixed-radix index.
    pub fn state(&self, mut index: usize) -> State {
        debug_assert!(index < self.size);
        let mut vals = Vec::with_capacity(self.support.len());
        for _ in 0..self.support.len() {
            vals.push(index % self.domain_size);
            index /= self.domain_size;
        }
        State::from_vals(self.support.clone(), vals, self.default)
    }

    /// Index of a state over this support.
    pub fn index(&self, state: &State) -> usize {
        debug_assert_eq!(state.support(), &self.support);
        let mut idx = 0usize;
        for v in state.vals().iter().rev() {
            idx = idx * self.domain_size + *v;
        }
        idx
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.size).map(|i| self.state(i))
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }
}

/// A set of states over a common support, as a bitset over the space.
#[derive(Clone)]
pub struct StateSet {
    space: StateSpace,
    bits: Bits,
}

impl StateSet {
    pub fn empty(space: &StateSpace) -> StateSet {
        StateSet {
            space: space.clone(),
            bits: Bits::new(space.len()),
        }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn insert(&mut self, state: &State) {
        let i = self.space.index(state);
        self.bits.set(i, true);
    }

    pub fn insert_index(&mut self, i: usize) {
        self.bits.set(i, true);
    }

    pub fn contains(&self, state: &State) -> bool {
        self.bits.get(self.space.index(state))
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.bits.get(i)
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.count() == 0
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    /// Set inclusion over the same space.
    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.bits.subset_of(&other.bits)
    }

    /// Equality as sets over the same space.
    pub fn same_states(&self, other: &StateSet) -> bool {
        self.bits == other.bits
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        self.iter_indices().map(|i| self.space.state(i))
    }

    pub(crate) fn bits(&self) -> &Bits {
        &self.bits
    }

    pub(crate) fn from_bits(space: StateSpace, bits: Bits) -> StateSet {
        StateSet { space, bits }
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateSet({} of {})", self.len(), self.space.len())
    }
}

/// Minimal fixed-size bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Bits {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn filled(len: usize) -> Bits {
        let mut b = Bits {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        b.trim();
        b
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
    }

    pub fn negate(&mut self) {
        for w in self.words.iter_mut() {
            *w = !*w;
        }
        self.trim();
    }

    /// `self <= other` as sets.
    pub fn subset_of(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn first_zero(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != u64::MAX {
                let bit = (!w).trailing_zeros() as usize;
                let idx = wi * 64 + bit;
                if idx < self.len {
                    return Some(idx);
                }
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(move |(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_is_mixed_radix_little_endian() {
        let z3 = Interpretation::zmod(3).unwrap();
        let sup = Support::new(["x".to_string(), "y".to_string()]);
        let space = StateSpace::new(sup, &z3, 1000).unwrap();
        assert_eq!(space.len(), 9);
        let s1 = space.state(1);
        assert_eq!((s1.get("x"), s1.get("y")), (1, 0));
        let s3 = space.state(3);
        assert_eq!((s3.get("x"), s3.get("y")), (0, 1));
        for i in 0..space.len() {
            assert_eq!(space.index(&space.state(i)), i);
        }
    }

    #[test]
    fn default_outside_support() {
        let z3 = Interpretation::zmod(3).unwrap();
        let sup = Support::new(["x".to_string()]);
        let space = StateSpace::new(sup, &z3, 1000).unwrap();
        let s = space.state(2);
        assert_eq!(s.get("nope"), 0);
    }

    #[test]
    fn budget_errors() {
        let z3 = Interpretation::zmod(3).unwrap();
        let sup = Support::new((0..20).map(|i| format!("v{i}")));
        assert!(matches!(
            StateSpace::new(sup, &z3, 1_000_000),
            Err(SpaceError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn bits_ops() {
        let mut a = Bits::new(130);
        a.set(0, true);
        a.set(129, true);
        assert_eq!(a.count(), 2);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 129]);
        let mut b = Bits::filled(130);
        assert_eq!(b.count(), 130);
        assert_eq!(b.first_zero(), None);
        b.set(77, false);
        assert_eq!(b.first_zero(), Some(77));
        assert!(a.subset_of(&b));
        a.negate();
        assert_eq!(a.count(), 128);
    }
}
