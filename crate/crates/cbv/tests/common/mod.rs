//! Shared helpers for the integration suites: fixture loading and a small
//! deterministic generator of random programs, assertions and goals.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cbv::semantics::{triple_holds, Interpretation, Triple, TripleVerdict};
use cbv::syntax::{
    parse_program, Assertion, BoolExpr, Expr, ProcDecl, Program, Stmt, VarName,
};

pub fn fixture_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture_path(rel))
        .unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

pub fn fixture_program(rel: &str) -> Program {
    parse_program(&fixture(rel)).unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

/// xorshift64* — deterministic across platforms, good enough for test data.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        (self.next_u64() % den as u64) < num as u64
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }
}

/// Tunables for random program generation.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_depth: usize,
    pub max_procs: usize,
    /// Global variable pool.
    pub globals: Vec<&'static str>,
    /// Formal parameter pool (disjoint from globals).
    pub formals: Vec<&'static str>,
    pub allow_while: bool,
    pub allow_blocks: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_depth: 5,
            max_procs: 2,
            globals: vec!["x", "y", "z"],
            formals: vec!["u", "v"],
            allow_while: true,
            allow_blocks: true,
        }
    }
}

pub struct Gen<'a> {
    pub rng: &'a mut Rng,
    pub cfg: GenConfig,
    /// Names and arities of the procedures statements may call.
    procs: Vec<(String, Vec<VarName>)>,
}

impl<'a> Gen<'a> {
    pub fn new(rng: &'a mut Rng, cfg: GenConfig) -> Gen<'a> {
        Gen {
            rng,
            cfg,
            procs: Vec::new(),
        }
    }

    fn var_pool(&self) -> Vec<VarName> {
        self.cfg
            .globals
            .iter()
            .chain(self.cfg.formals.iter())
            .map(|s| s.to_string())
            .collect()
    }

    pub fn expr(&mut self, depth: usize) -> Expr {
        if depth == 0 || self.rng.chance(1, 2) {
            if self.rng.chance(1, 3) {
                Expr::Const(if self.rng.chance(1, 2) { "0" } else { "1" }.to_string())
            } else {
                Expr::Var(self.var_pool()[self.rng.below(self.var_pool().len())].clone())
            }
        } else {
            let op = *self.rng.pick(&["+", "-", "*"]);
            Expr::bin(op, self.expr(depth - 1), self.expr(depth - 1))
        }
    }

    pub fn guard(&mut self, depth: usize) -> BoolExpr {
        if depth == 0 || self.rng.chance(2, 3) {
            let l = self.expr(1);
            let r = self.expr(1);
            if self.rng.chance(1, 4) {
                BoolExpr::Rel("<=".into(), vec![l, r])
            } else {
                BoolExpr::Eq(l, r)
            }
        } else {
            match self.rng.below(3) {
                0 => BoolExpr::not(self.guard(depth - 1)),
                1 => BoolExpr::And(
                    Box::new(self.guard(depth - 1)),
                    Box::new(self.guard(depth - 1)),
                ),
                _ => BoolExpr::Or(
                    Box::new(self.guard(depth - 1)),
                    Box::new(self.guard(depth - 1)),
                ),
            }
        }
    }

    pub fn stmt(&mut self, depth: usize) -> Stmt {
        let leaf = depth == 0;
        match if leaf { self.rng.below(3) } else { self.rng.below(10) } {
            0 => Stmt::Skip,
            1 | 2 => {
                let pool = self.var_pool();
                let mut targets = BTreeSet::new();
                let count = 1 + self.rng.below(2);
                for _ in 0..count {
                    targets.insert(pool[self.rng.below(pool.len())].clone());
                }
                let targets: Vec<VarName> = targets.into_iter().collect();
                let sources = targets.iter().map(|_| self.expr(2)).collect();
                Stmt::assign(targets, sources)
            }
            3 if !self.procs.is_empty() => {
                let (name, formals) = self.rng.pick(&self.procs.clone()).clone();
                let actuals = formals.iter().map(|_| self.expr(1)).collect();
                Stmt::Call(name, actuals)
            }
            3 => Stmt::Skip,
            // sequences are built right-associated, the shape the parser
            // produces, so rendered statements parse back identically
            4 | 5 => Stmt::seq(self.non_seq_stmt(depth - 1), self.stmt(depth - 1)),
            6 => Stmt::if_then_else(self.guard(1), self.stmt(depth - 1), self.stmt(depth - 1)),
            7 if self.cfg.allow_while => {
                // arbitrary guards are fine under partial correctness
                Stmt::while_do(self.guard(1), self.stmt(depth - 1))
            }
            7 => Stmt::seq(self.non_seq_stmt(depth - 1), self.stmt(depth - 1)),
            _ if self.cfg.allow_blocks => {
                let pool = self.var_pool();
                let local = pool[self.rng.below(pool.len())].clone();
                let init = self.expr(1);
                Stmt::block(vec![local], vec![init], self.stmt(depth - 1))
            }
            _ => Stmt::seq(self.non_seq_stmt(depth - 1), self.stmt(depth - 1)),
        }
    }

    fn non_seq_stmt(&mut self, depth: usize) -> Stmt {
        for _ in 0..8 {
            let s = self.stmt(depth);
            if !matches!(s, Stmt::Seq(..)) {
                return s;
            }
        }
        Stmt::Skip
    }

    /// A whole random program: up to `max_procs` declarations plus a main.
    /// Bodies may call any declared procedure, so recursion and mutual
    /// recursion arise naturally.
    pub fn program(&mut self) -> Program {
        let n_procs = self.rng.below(self.cfg.max_procs + 1);
        let names = ["P", "Q"];
        let sigs: Vec<(String, Vec<VarName>)> = (0..n_procs)
            .map(|i| {
                let formals = if self.rng.chance(2, 3) {
                    vec![self.cfg.formals[i % self.cfg.formals.len()].to_string()]
                } else {
                    Vec::new()
                };
                (names[i].to_string(), formals)
            })
            .collect();
        self.procs = sigs.clone();
        let decls: Vec<ProcDecl> = sigs
            .into_iter()
            .map(|(name, formals)| ProcDecl {
                name,
                formals,
                body: self.stmt(self.cfg.max_depth.saturating_sub(2)),
            })
            .collect();
        let main = self.stmt(self.cfg.max_depth);
        Program::new(decls, main).expect("generated programs respect the invariants")
    }

    /// A small random assertion over the variable pool.
    pub fn assertion(&mut self, depth: usize) -> Assertion {
        if depth == 0 || self.rng.chance(1, 2) {
            match self.rng.below(6) {
                0 => Assertion::True,
                1 => Assertion::eq(
                    Expr::Var(self.var_pool()[self.rng.below(self.var_pool().len())].clone()),
                    Expr::Const(if self.rng.chance(1, 2) { "0" } else { "1" }.to_string()),
                ),
                2 => Assertion::eq(self.expr(1), self.expr(1)),
                _ => {
                    let pool = self.var_pool();
                    Assertion::eq(
                        Expr::Var(pool[self.rng.below(pool.len())].clone()),
                        Expr::Var(pool[self.rng.below(pool.len())].clone()),
                    )
                }
            }
        } else {
            match self.rng.below(4) {
                0 => Assertion::and(self.assertion(depth - 1), self.assertion(depth - 1)),
                1 => Assertion::or(self.assertion(depth - 1), self.assertion(depth - 1)),
                2 => Assertion::not(self.assertion(depth - 1)),
                _ => Assertion::exists(
                    vec!["w".to_string()],
                    Assertion::eq(
                        Expr::var("w"),
                        Expr::Var(self.var_pool()[self.rng.below(self.var_pool().len())].clone()),
                    ),
                ),
            }
        }
    }
}

/// Generates a random true triple over the program's main statement:
/// sometimes a filtered random pre/post pair, sometimes the exact strongest
/// postcondition of a random precondition.
pub fn true_triple(
    gen: &mut Gen<'_>,
    prog: &Program,
    interp: &Interpretation,
    budget: usize,
) -> Option<Triple> {
    for _ in 0..12 {
        let pre = gen.assertion(2);
        if gen.rng.chance(1, 3) {
            let post =
                cbv::semantics::sp_formula(prog, interp, &pre, prog.main(), budget).ok()?;
            return Some(Triple::new(pre, prog.main().clone(), post));
        }
        let post = gen.assertion(2);
        let triple = Triple::new(pre, prog.main().clone(), post);
        if let Ok(TripleVerdict::Holds) = triple_holds(prog, interp, &triple, budget) {
            return Some(triple);
        }
    }
    None
}
