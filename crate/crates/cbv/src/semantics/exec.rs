//! Exact denotational evaluation of programs over a finite interpretation.
//!
//! Recursion is resolved by Kleene iteration over the finite state space:
//! starting from everywhere-undefined procedure meanings, every body is
//! re-evaluated against the current approximation until nothing changes.
//! The result is the least fixpoint, so a call diverges exactly when its
//! entry is absent. Loops are evaluated concretely; a repeated loop head
//! state certifies divergence because the language is deterministic.
//!
//! A separate fuel-bounded evaluator inlines calls up to a given depth and
//! serves as an independent cross-check oracle in tests; fuel exhaustion is
//! reported distinctly since fuel alone cannot certify divergence.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use super::eval::{bool_holds, eval_exprs, EvalError};
use super::interp::Interpretation;
use super::state::{SpaceError, State, StateSpace, Support};
use crate::syntax::{ProcName, Program, Stmt, VarName};

/// Result of running a program from one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Terminated(State),
    Diverges,
}

impl Outcome {
    pub fn terminated(self) -> Option<State> {
        match self {
            Outcome::Terminated(s) => Some(s),
            Outcome::Diverges => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("support does not cover program variable `{0}`")]
    SupportTooSmall(VarName),
    #[error("call to undeclared procedure `{0}`")]
    UndeclaredProcedure(ProcName),
}

/// The least-fixpoint approximation of every procedure's generic-call
/// meaning, as a partial map on state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcEnv {
    /// Per procedure, `entry[σ] = Some(τ)` when the generic call terminates.
    entries: BTreeMap<ProcName, Vec<Option<u32>>>,
    /// Number of productive Kleene rounds until the fixpoint was reached.
    rounds: usize,
}

impl ProcEnv {
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Defined entries of one procedure as (entry state, exit state) indices.
    pub fn entries(&self, proc: &str) -> Option<&[Option<u32>]> {
        self.entries.get(proc).map(|v| v.as_slice())
    }

    pub fn defined_count(&self, proc: &str) -> usize {
        self.entries
            .get(proc)
            .map(|v| v.iter().filter(|e| e.is_some()).count())
            .unwrap_or(0)
    }
}

/// Evaluator for one program over one interpretation and support.
///
/// The analysis support may extend the program variables with assertion
/// and ghost variables; the procedure fixpoint is always computed over the
/// program variables alone, since statements cannot read or write anything
/// else, and call lookups project into that smaller space.
pub struct Engine<'a> {
    prog: &'a Program,
    interp: &'a Interpretation,
    space: StateSpace,
    prog_space: StateSpace,
    prog_vars: Vec<VarName>,
    env: Option<ProcEnv>,
}

impl<'a> Engine<'a> {
    /// Builds the engine and, when the program declares procedures, the
    /// fixpoint environment. The support must cover the program variables;
    /// the state budget bounds the enumerable space.
    pub fn new(
        prog: &'a Program,
        interp: &'a Interpretation,
        support: Arc<Support>,
        budget: usize,
    ) -> Result<Engine<'a>, SemanticsError> {
        for v in prog.all_vars() {
            if !support.contains(&v) {
                return Err(SemanticsError::SupportTooSmall(v));
            }
        }
        let space = StateSpace::new(support, interp, budget)?;
        let prog_support = Support::new(prog.all_vars());
        let prog_space = StateSpace::new(prog_support.clone(), interp, budget)?;
        let prog_vars = prog_support.vars().to_vec();
        let mut engine = Engine {
            prog,
            interp,
            space,
            prog_space,
            prog_vars,
            env: None,
        };
        if !prog.decls().is_empty() {
            engine.env = Some(engine.fixpoint()?);
        }
        Ok(engine)
    }

    /// Index of a state's restriction to the program variables.
    fn prog_index(&self, s: &State) -> usize {
        let dom = self.prog_space.domain_size();
        let mut idx = 0usize;
        for v in self.prog_vars.iter().rev() {
            idx = idx * dom + s.get(v);
        }
        idx
    }

    /// Support covering exactly the program variables plus `extra`.
    pub fn support_for(prog: &Program, extra: &[VarName]) -> Arc<Support> {
        let mut vars = prog.all_vars();
        vars.extend(extra.iter().cloned());
        Support::new(vars)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn interp(&self) -> &Interpretation {
        self.interp
    }

    pub fn program(&self) -> &Program {
        self.prog
    }

    pub fn proc_env(&self) -> Option<&ProcEnv> {
        self.env.as_ref()
    }

    fn fixpoint(&self) -> Result<ProcEnv, SemanticsError> {
        let n = self.prog_space.len();
        let mut env: BTreeMap<ProcName, Vec<Option<u32>>> = self
            .prog
            .decls()
            .iter()
            .map(|d| (d.name.clone(), vec![None; n]))
            .collect();
        let mut rounds = 0usize;
        loop {
            let mut changed = false;
            let mut next = env.clone();
            for d in self.prog.decls() {
                let slot = next.get_mut(&d.name).expect("declared");
                for idx in 0..n {
                    if slot[idx].is_some() {
                        continue;
                    }
                    let sigma = self.prog_space.state(idx);
                    if let Some(tau) = self.eval_stmt(&d.body, &sigma, &env)? {
                        // generic-call meaning: the body, with formals restored
                        let restored = tau.set_many(&d.formals, &sigma.get_many(&d.formals));
                        slot[idx] = Some(self.prog_space.index(&restored) as u32);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
            rounds += 1;
            env = next;
        }
        Ok(ProcEnv {
            entries: env,
            rounds,
        })
    }

    /// Runs a statement from a state; `Ok(None)` means divergence.
    fn eval_stmt(
        &self,
        s: &Stmt,
        sigma: &State,
        env: &BTreeMap<ProcName, Vec<Option<u32>>>,
    ) -> Result<Option<State>, SemanticsError> {
        match s {
            Stmt::Skip => Ok(Some(sigma.clone())),
            Stmt::Assign(xs, ts) => {
                let vals = eval_exprs(self.interp, sigma, ts)?;
                Ok(Some(sigma.set_many(xs, &vals)))
            }
            Stmt::Call(p, ts) => {
                let decl = self
                    .prog
                    .decl(p)
                    .ok_or_else(|| SemanticsError::UndeclaredProcedure(p.clone()))?;
                let actuals = eval_exprs(self.interp, sigma, ts)?;
                let entry = sigma.set_many(&decl.formals, &actuals);
                let slot = &env[p.as_str()][self.prog_index(&entry)];
                match slot {
                    None => Ok(None),
                    Some(exit_idx) => {
                        let exit = self.prog_space.state(*exit_idx as usize);
                        let vals: Vec<_> = self.prog_vars.iter().map(|v| exit.get(v)).collect();
                        let tau = sigma.set_many(&self.prog_vars, &vals);
                        Ok(Some(
                            tau.set_many(&decl.formals, &sigma.get_many(&decl.formals)),
                        ))
                    }
                }
            }
            Stmt::Seq(a, b) => match self.eval_stmt(a, sigma, env)? {
                None => Ok(None),
                Some(mid) => self.eval_stmt(b, &mid, env),
            },
            Stmt::If(g, s1, s2) => {
                if bool_holds(self.interp, sigma, g)? {
                    self.eval_stmt(s1, sigma, env)
                } else {
                    self.eval_stmt(s2, sigma, env)
                }
            }
            Stmt::While(g, body) => {
                let mut cur = sigma.clone();
                let mut seen = HashSet::new();
                loop {
                    if !bool_holds(self.interp, &cur, g)? {
                        return Ok(Some(cur));
                    }
                    if !seen.insert(cur.vals().to_vec()) {
                        return Ok(None);
                    }
                    match self.eval_stmt(body, &cur, env)? {
                        None => return Ok(None),
                        Some(next) => cur = next,
                    }
                }
            }
            Stmt::Block(xs, ts, body) => {
                let vals = eval_exprs(self.interp, sigma, ts)?;
                let entered = sigma.set_many(xs, &vals);
                match self.eval_stmt(body, &entered, env)? {
                    None => Ok(None),
                    Some(tau) => Ok(Some(tau.set_many(xs, &sigma.get_many(xs)))),
                }
            }
        }
    }

    /// The meaning of a statement applied to one state.
    pub fn run_stmt(&self, s: &Stmt, sigma: &State) -> Result<Outcome, SemanticsError> {
        let empty = BTreeMap::new();
        let env = match &self.env {
            Some(e) => &e.entries,
            None => &empty,
        };
        Ok(match self.eval_stmt(s, sigma, env)? {
            Some(tau) => Outcome::Terminated(tau),
            None => Outcome::Diverges,
        })
    }

    /// The meaning of the main statement applied to one state.
    pub fn run(&self, sigma: &State) -> Result<Outcome, SemanticsError> {
        self.run_stmt(self.prog.main(), sigma)
    }
}

/// Convenience entry point: evaluates the program's main statement on one
/// state, building a fresh engine over the state's support.
pub fn meaning(
    prog: &Program,
    interp: &Interpretation,
    sigma: &State,
    budget: usize,
) -> Result<Outcome, SemanticsError> {
    let engine = Engine::new(prog, interp, sigma.support().clone(), budget)?;
    engine.run(sigma)
}

/// The least-fixpoint procedure environment over the program's variables.
pub fn fixpoint_env(
    prog: &Program,
    interp: &Interpretation,
    budget: usize,
) -> Result<ProcEnv, SemanticsError> {
    let support = Engine::support_for(prog, &[]);
    let engine = Engine::new(prog, interp, support, budget)?;
    Ok(engine.proc_env().cloned().unwrap_or(ProcEnv {
        entries: BTreeMap::new(),
        rounds: 0,
    }))
}

/// Outcome of the fuel-bounded cross-check evaluator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FueledOutcome {
    Terminated(State),
    Diverges,
    OutOfFuel,
}

/// Evaluates by inlining procedure calls up to `fuel` nested levels.
pub fn run_bounded(
    prog: &Program,
    interp: &Interpretation,
    s: &Stmt,
    sigma: &State,
    fuel: usize,
) -> Result<FueledOutcome, SemanticsError> {
    eval_bounded(prog, interp, s, sigma, fuel)
}

fn eval_bounded(
    prog: &Program,
    interp: &Interpretation,
    s: &Stmt,
    sigma: &State,
    fuel: usize,
) -> Result<FueledOutcome, SemanticsError> {
    use FueledOutcome::*;
    match s {
        Stmt::Skip => Ok(Terminated(sigma.clone())),
        Stmt::Assign(xs, ts) => {
            let vals = eval_exprs(interp, sigma, ts)?;
            Ok(Terminated(sigma.set_many(xs, &vals)))
        }
        Stmt::Call(p, ts) => {
            if fuel == 0 {
                return Ok(OutOfFuel);
            }
            let decl = prog
                .decl(p)
                .ok_or_else(|| SemanticsError::UndeclaredProcedure(p.clone()))?;
            let inlined = Stmt::block(decl.formals.clone(), ts.clone(), decl.body.clone());
            eval_bounded(prog, interp, &inlined, sigma, fuel - 1)
        }
        Stmt::Seq(a, b) => match eval_bounded(prog, interp, a, sigma, fuel)? {
            Terminated(mid) => eval_bounded(prog, interp, b, &mid, fuel),
            other => Ok(other),
        },
        Stmt::If(g, s1, s2) => {
            if bool_holds(interp, sigma, g)? {
                eval_bounded(prog, interp, s1, sigma, fuel)
            } else {
                eval_bounded(prog, interp, s2, sigma, fuel)
            }
        }
        Stmt::While(g, body) => {
            let mut cur = sigma.clone();
            let mut seen = HashSet::new();
            loop {
                if !bool_holds(interp, &cur, g)? {
                    return Ok(Terminated(cur));
                }
                if !seen.insert(cur.vals().to_vec()) {
                    return Ok(Diverges);
                }
                match eval_bounded(prog, interp, body, &cur, fuel)? {
                    Terminated(next) => cur = next,
                    other => return Ok(other),
                }
            }
        }
        Stmt::Block(xs, ts, body) => {
            let vals = eval_exprs(interp, sigma, ts)?;
            let entered = sigma.set_many(xs, &vals);
            match eval_bounded(prog, interp, body, &entered, fuel)? {
                Terminated(tau) => Ok(Terminated(tau.set_many(xs, &sigma.get_many(xs)))),
                other => Ok(other),
            }
        }
    }
}
