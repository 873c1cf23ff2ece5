//! Command-line entry points: job descriptions, report rendering and the
//! four commands (`run`, `analyze`, `check`, `prove`) the binary exposes.
//!
//! Exit codes: 0 success, 1 negative verdict, 2 usage or parse error,
//! 3 state budget exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::oracle::ValidityVerdict;
use crate::proof::{check_derivation_budgeted, parse_derivation, render_derivation, AssumptionContext};
use crate::semantics::{
    run_bounded, Engine, FueledOutcome, Interpretation, ModelError, Outcome, SemanticsError,
    SpaceError, State, Triple, DEFAULT_STATE_BUDGET,
};
use crate::synth::{synthesize, SynthError};
use crate::syntax::{
    change_decls, change_set, clash_free, parse_assertion, parse_program_with, program_l, purify,
    render_program, stmt_metrics, ParseError, ParseOptions, Program, VarName,
};

/// Which interpretation to use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    /// `zmod:n`.
    Builtin(usize),
    File(PathBuf),
}

impl ModelSpec {
    /// Parses `zmod:N` or treats the string as a file path.
    pub fn from_arg(arg: &str) -> ModelSpec {
        if let Some(n) = arg.strip_prefix("zmod:") {
            if let Ok(n) = n.parse::<usize>() {
                return ModelSpec::Builtin(n);
            }
        }
        ModelSpec::File(PathBuf::from(arg))
    }

    pub fn load(&self) -> Result<Interpretation, HarnessError> {
        match self {
            ModelSpec::Builtin(n) => Ok(Interpretation::zmod(*n)?),
            ModelSpec::File(path) => {
                let text = read(path)?;
                Ok(Interpretation::parse(&text)?)
            }
        }
    }
}

/// A fully described batch job.
#[derive(Debug, Clone)]
pub struct JobSpec {
    pub program: PathBuf,
    pub model: ModelSpec,
    /// Inline initial state, `x = 1, y = 0`.
    pub init: Option<String>,
    /// File with the same syntax as `init`.
    pub init_file: Option<PathBuf>,
    pub pre: Option<String>,
    pub post: Option<String>,
    /// File with `pre:` and `post:` lines, an alternative to the flags.
    pub spec_file: Option<PathBuf>,
    pub proof: Option<PathBuf>,
    pub proof_out: Option<PathBuf>,
    pub trace_out: Option<PathBuf>,
    pub purify_out: Option<PathBuf>,
    pub budget: usize,
    pub fuel: Option<usize>,
    pub allow_empty_block: bool,
}

impl JobSpec {
    pub fn new(program: impl Into<PathBuf>, model: ModelSpec) -> JobSpec {
        JobSpec {
            program: program.into(),
            model,
            init: None,
            init_file: None,
            pre: None,
            post: None,
            spec_file: None,
            proof: None,
            proof_out: None,
            trace_out: None,
            purify_out: None,
            budget: DEFAULT_STATE_BUDGET,
            fuel: None,
            allow_empty_block: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Proof(#[from] crate::proof::ProofParseError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Synthesis(#[from] SynthError),
}

fn is_budget_semantics(e: &SemanticsError) -> bool {
    matches!(
        e,
        SemanticsError::Space(SpaceError::BudgetExceeded { .. })
            | SemanticsError::Eval(crate::semantics::EvalError::Space(
                SpaceError::BudgetExceeded { .. }
            ))
    )
}

impl HarnessError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Semantics(e) if is_budget_semantics(e) => 3,
            HarnessError::Synthesis(SynthError::Semantics(e)) if is_budget_semantics(e) => 3,
            HarnessError::Synthesis(SynthError::Eval(crate::semantics::EvalError::Space(
                SpaceError::BudgetExceeded { .. },
            ))) => 3,
            HarnessError::Synthesis(SynthError::GoalNotTrue { .. }) => 1,
            _ => 2,
        }
    }
}

/// Outcome of one command: human-readable lines, machine-readable pairs,
/// and the process exit code (0 exactly when the verdict is positive).
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub lines: Vec<String>,
    pub values: Vec<(String, String)>,
    pub exit_code: i32,
}

impl Report {
    fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            lines: Vec::new(),
            values: Vec::new(),
            exit_code: 0,
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn value(&mut self, k: &str, v: impl ToString) {
        self.values.push((k.to_string(), v.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for l in &self.lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// The machine-readable key/value section.
    pub fn render_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_program(job: &JobSpec) -> Result<Program, HarnessError> {
    let text = read(&job.program)?;
    let opts = ParseOptions {
        allow_empty_block: job.allow_empty_block,
        allow_fresh_vars: false,
    };
    Ok(parse_program_with(&text, opts)?)
}

/// Parses `x = c, y = d` against the interpretation's constants.
fn parse_init(
    text: &str,
    interp: &Interpretation,
) -> Result<Vec<(VarName, usize)>, HarnessError> {
    let mut out = Vec::new();
    for part in text.split([',', '\n']) {
        let part = part.split('#').next().unwrap_or("").trim();
        if part.is_empty() {
            continue;
        }
        let Some((var, val)) = part.split_once('=') else {
            return Err(HarnessError::Usage(format!(
                "initial state entry `{part}` is not `var = constant`"
            )));
        };
        let var = var.trim().to_string();
        let val = val.trim();
        let elem = interp.constant(val).ok_or_else(|| {
            HarnessError::Usage(format!("unknown constant `{val}` in the initial state"))
        })?;
        out.push((var, elem));
    }
    Ok(out)
}

fn initial_state(job: &JobSpec, interp: &Interpretation, prog: &Program) -> Result<State, HarnessError> {
    let mut pairs = Vec::new();
    if let Some(path) = &job.init_file {
        pairs.extend(parse_init(&read(path)?, interp)?);
    }
    if let Some(text) = &job.init {
        pairs.extend(parse_init(text, interp)?);
    }
    let extra: Vec<VarName> = pairs.iter().map(|(v, _)| v.clone()).collect();
    let support = Engine::support_for(prog, &extra);
    let mut state = State::bottom(support, 0);
    for (v, e) in pairs {
        state = state.set(&v, e);
    }
    Ok(state)
}

/// Executes the program's main statement from the initial state.
pub fn cmd_run(job: &JobSpec) -> Result<Report, HarnessError> {
    let prog = load_program(job)?;
    let interp = job.model.load()?;
    let sigma = initial_state(job, &interp, &prog)?;
    let engine = Engine::new(&prog, &interp, sigma.support().clone(), job.budget)?;
    let started = std::time::Instant::now();
    let outcome = engine.run(&sigma)?;
    let mut report = Report::new("run");
    report.value("model", interp.name());
    report.value("initial", sigma.display(&interp));
    match &outcome {
        Outcome::Terminated(tau) => {
            report.line(format!("terminated: {}", tau.display(&interp)));
            report.value("outcome", "terminated");
            report.value("final", tau.display(&interp));
        }
        Outcome::Diverges => {
            report.line("diverges");
            report.value("outcome", "diverges");
            report.exit_code = 1;
        }
    }
    if let Some(fuel) = job.fuel {
        let bounded = run_bounded(&prog, &interp, prog.main(), &sigma, fuel)?;
        let agrees = matches!(
            (&outcome, &bounded),
            (Outcome::Terminated(a), FueledOutcome::Terminated(b)) if a == b
        ) || matches!(
            (&outcome, &bounded),
            (Outcome::Diverges, FueledOutcome::Diverges)
                | (Outcome::Diverges, FueledOutcome::OutOfFuel)
        );
        report.line(format!(
            "cross-check (fuel {fuel}): {}",
            if agrees { "agrees" } else { "MISMATCH" }
        ));
        report.value("cross_check", if agrees { "agrees" } else { "mismatch" });
        if !agrees {
            report.exit_code = 1;
        }
    }
    report.value("elapsed_ms", started.elapsed().as_millis());
    Ok(report)
}

/// Purely syntactic analyses: clash-freeness, change sets, size metrics,
/// and optionally the purified program.
pub fn cmd_analyze(job: &JobSpec) -> Result<Report, HarnessError> {
    let prog = load_program(job)?;
    let mut report = Report::new("analyze");
    match clash_free(&prog) {
        Ok(()) => {
            report.line("clash-free: yes");
            report.value("clash_free", "yes");
        }
        Err(w) => {
            report.line(format!(
                "clash-free: no — variable {} has a local occurrence ({} #{}) and a global occurrence in a body ({} #{})",
                w.var, w.local.site, w.local.index, w.global_in_body.site, w.global_in_body.index
            ));
            report.value("clash_free", "no");
            report.value("clash_witness", &w.var);
            report.exit_code = 1;
        }
    }
    let set: Vec<String> = change_set(&prog, prog.main()).into_iter().collect();
    report.line(format!("change(main) = {{{}}}", set.join(", ")));
    report.value("change_main", set.join(" "));
    for d in prog.decls() {
        let set: Vec<String> = change_set(&prog, &d.body).into_iter().collect();
        report.line(format!("change(body of {}) = {{{}}}", d.name, set.join(", ")));
        report.value(&format!("change_{}", d.name), set.join(" "));
    }
    let dset: Vec<String> = change_decls(&prog).into_iter().collect();
    report.line(format!("change(decls) = {{{}}}", dset.join(", ")));
    let m = stmt_metrics(prog.main());
    report.line(format!(
        "metrics(main): l = {}, m = {} (assigns {}, blocks {}, calls {}, loops {})",
        m.l, m.m, m.assigns, m.blocks, m.calls, m.loops
    ));
    report.value("l_main", m.l);
    report.value("m_main", m.m);
    for d in prog.decls() {
        let m = stmt_metrics(&d.body);
        report.line(format!("metrics(body of {}): l = {}, m = {}", d.name, m.l, m.m));
        report.value(&format!("l_{}", d.name), m.l);
        report.value(&format!("m_{}", d.name), m.m);
    }
    report.value("l_program", program_l(&prog, prog.main()));
    if let Some(out) = &job.purify_out {
        let pure = purify(&prog);
        write_file(out, &render_program(&pure))?;
        report.line(format!("purified program written to {}", out.display()));
    }
    Ok(report)
}

/// Checks a proof file against the program and model.
pub fn cmd_check(job: &JobSpec) -> Result<Report, HarnessError> {
    let prog = load_program(job)?;
    let interp = job.model.load()?;
    let proof_path = job
        .proof
        .clone()
        .ok_or_else(|| HarnessError::Usage("check needs --proof".into()))?;
    let d = parse_derivation(&read(&proof_path)?)?;
    let started = std::time::Instant::now();
    let result = check_derivation_budgeted(&prog, &interp, &AssumptionContext::empty(), &d, job.budget);
    let mut report = Report::new("check");
    report.value("proof", proof_path.display());
    report.value("rule_applications", result.rule_applications);
    report.line(format!("conclusion: {}", d.conclusion));
    report.line(format!("rule applications: {}", result.rule_applications));
    if result.accepted {
        report.line("accepted");
        report.value("verdict", "accepted");
    } else {
        report.line("rejected");
        report.value("verdict", "rejected");
        for (node, failure) in result.failures() {
            let path = if node.path.is_empty() {
                "root".to_string()
            } else {
                node.path
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(".")
            };
            let mut line = format!("  node {path} [{}]: {failure}", node.rule);
            if let crate::proof::CheckFailure::Obligation {
                counterexample: Some(state),
                ..
            } = failure
            {
                let _ = write!(line, " at {}", state.display(&interp));
            }
            report.line(line);
        }
        report.exit_code = 1;
    }
    report.value("elapsed_ms", started.elapsed().as_millis());
    Ok(report)
}

fn goal_from_job(job: &JobSpec, prog: &Program) -> Result<Triple, HarnessError> {
    let (mut pre, mut post) = (job.pre.clone(), job.post.clone());
    if let Some(path) = &job.spec_file {
        for line in read(path)?.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if let Some(rest) = line.strip_prefix("pre:") {
                pre = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("post:") {
                post = Some(rest.trim().to_string());
            }
        }
    }
    let pre = pre.ok_or_else(|| HarnessError::Usage("prove needs --pre (or a spec file)".into()))?;
    let post =
        post.ok_or_else(|| HarnessError::Usage("prove needs --post (or a spec file)".into()))?;
    Ok(Triple::new(
        parse_assertion(&pre)?,
        prog.main().clone(),
        parse_assertion(&post)?,
    ))
}

/// Synthesizes a proof for the goal triple over the main statement, writes
/// it out, re-checks the written file with the kernel, and certifies the
/// length bound.
pub fn cmd_prove(job: &JobSpec) -> Result<Report, HarnessError> {
    let prog = load_program(job)?;
    let interp = job.model.load()?;
    let goal = goal_from_job(job, &prog)?;
    let started = std::time::Instant::now();
    let mut report = Report::new("prove");
    report.line(format!("goal: {goal}"));
    report.value("goal", goal.to_string());
    let trace = match synthesize(&prog, &interp, &goal, job.budget) {
        Ok(trace) => trace,
        Err(SynthError::GoalNotTrue { initial, reached }) => {
            report.line(format!(
                "goal is not true: from {} the program reaches {}",
                initial.display(&interp),
                reached.display(&interp)
            ));
            report.value("verdict", "goal-false");
            report.value("counterexample", initial.display(&interp));
            report.exit_code = 1;
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };

    let proof_out = job.proof_out.clone().unwrap_or_else(|| {
        let mut p = job.program.clone();
        p.set_extension("cbvproof");
        p
    });
    write_file(&proof_out, &render_derivation(&trace.derivation))?;
    report.line(format!("proof written to {}", proof_out.display()));
    report.value("proof", proof_out.display());

    // no in-memory shortcut: read the file back and check it
    let reread = parse_derivation(&read(&proof_out)?)?;
    let result =
        check_derivation_budgeted(&prog, &interp, &AssumptionContext::empty(), &reread, job.budget);
    report.value("rule_applications", result.rule_applications);
    if !result.accepted {
        report.line("kernel rejected the written proof");
        report.value("verdict", "rejected");
        report.exit_code = 1;
        return Ok(report);
    }
    report.line(format!(
        "kernel accepted the written proof ({} rule applications)",
        result.rule_applications
    ));
    report.value("verdict", "accepted");

    let b = &trace.bound;
    report.line(format!(
        "length bound: {} rule applications <= budget {} ({})",
        b.rule_count,
        b.budget,
        if b.ok() { "certified" } else { "VIOLATED" }
    ));
    report.value("bound_ok", b.ok());
    if !b.ok() {
        report.exit_code = 1;
    }

    let trace_out = job.trace_out.clone().unwrap_or_else(|| {
        let mut p = proof_out.clone();
        p.set_extension("trace");
        p
    });
    let mut text = String::new();
    let _ = writeln!(text, "# synthesis trace");
    let _ = writeln!(text, "goal = {goal}");
    let _ = writeln!(text, "rule_count = {}", trace.rule_count);
    let _ = writeln!(text, "m_goal = {}", trace.goal_m);
    let _ = writeln!(
        text,
        "m_bodies = {}",
        trace
            .body_ms
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(text, "budget = {}", b.budget);
    let _ = writeln!(
        text,
        "premise_counts = {}",
        b.premise_counts
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(text, "per_premise_ok = {}", b.per_premise_ok);
    let _ = writeln!(text, "total_ok = {}", b.total_ok);
    let _ = writeln!(text, "weight_ok = {}", b.weight_ok);
    let _ = writeln!(text, "bound_ok = {}", b.ok());
    write_file(&trace_out, &text)?;
    report.line(format!("trace written to {}", trace_out.display()));
    report.value("trace", trace_out.display());
    report.value("elapsed_ms", started.elapsed().as_millis());
    Ok(report)
}

/// Validity of a single assertion, used by the binary's `valid` helper.
pub fn check_validity(
    interp: &Interpretation,
    assertion: &str,
    budget: usize,
) -> Result<(ValidityVerdict, String), HarnessError> {
    use crate::oracle::{AssertionOracle, EnumerationOracle};
    let p = parse_assertion(assertion)?;
    let oracle = EnumerationOracle::with_budget(interp, budget);
    let verdict = oracle
        .is_valid(&p)
        .map_err(|e| HarnessError::Semantics(SemanticsError::Eval(e)))?;
    let text = match &verdict {
        ValidityVerdict::Valid => "valid".to_string(),
        ValidityVerdict::Invalid(s) => format!("invalid: {}", s.display(interp)),
        ValidityVerdict::OverBudget => "over budget".to_string(),
    };
    Ok((verdict, text))
}
