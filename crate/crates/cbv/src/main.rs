//! `cbv` — run, analyze, proof-check and prove programs of the toy
//! call-by-value language over finite models.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cbv::harness::{self, HarnessError, JobSpec, ModelSpec, Report};
use cbv::semantics::DEFAULT_STATE_BUDGET;

#[derive(Parser)]
#[command(
    name = "cbv",
    version,
    about = "Verification toolkit for a toy language with recursive call-by-value procedures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Program file (.cbv)
    #[arg(long, short = 'p')]
    program: PathBuf,
    /// Model: `zmod:N` or a .model file
    #[arg(long, default_value = "zmod:3")]
    model: String,
    /// Bound on enumerable state spaces
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget_states: usize,
    /// Accept `begin local skip ; S end` blocks in sources
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    allow_empty_block: bool,
    /// Print the machine-readable key/value section as well
    #[arg(long)]
    porcelain: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the program and print the final state or `diverges`
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial state, e.g. `x = 1, y = 0` (defaults to all-zero)
        #[arg(long, default_value = "")]
        init: String,
        /// File containing the initial state in the same syntax
        #[arg(long)]
        init_file: Option<PathBuf>,
        /// Also run the call-inlining evaluator with this call depth and
        /// compare the outcomes
        #[arg(long)]
        fuel: Option<usize>,
    },
    /// Clash-freeness, change sets and size metrics; optionally purify
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Write the purified program here
        #[arg(long)]
        purify: Option<PathBuf>,
    },
    /// Check a .cbvproof derivation against the program and model
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Proof file to check
        #[arg(long)]
        proof: PathBuf,
    },
    /// Synthesize, write, re-check and certify a proof of {pre} main {post}
    Prove {
        #[command(flatten)]
        common: CommonArgs,
        /// Goal precondition
        #[arg(long)]
        pre: Option<String>,
        /// Goal postcondition
        #[arg(long)]
        post: Option<String>,
        /// File with `pre:` and `post:` lines instead of the flags
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Where to write the proof (default: program path with .cbvproof)
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
        /// Where to write the trace sidecar (default: proof path with .trace)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn job_from(common: &CommonArgs) -> JobSpec {
    let mut job = JobSpec::new(&common.program, ModelSpec::from_arg(&common.model));
    job.budget = common.budget_states;
    job.allow_empty_block = common.allow_empty_block;
    job
}

fn finish(report: Result<Report, HarnessError>, porcelain: bool) -> ExitCode {
    match report {
        Ok(report) => {
            print!("{}", report.render());
            if porcelain {
                print!("{}", report.render_values());
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            common,
            init,
            init_file,
            fuel,
        } => {
            let mut job = job_from(&common);
            job.init = Some(init);
            job.init_file = init_file;
            job.fuel = fuel;
            finish(harness::cmd_run(&job), common.porcelain)
        }
        Command::Analyze { common, purify } => {
            let mut job = job_from(&common);
            job.purify_out = purify;
            finish(harness::cmd_analyze(&job), common.porcelain)
        }
        Command::Check { common, proof } => {
            let mut job = job_from(&common);
            job.proof = Some(proof);
            finish(harness::cmd_check(&job), common.porcelain)
        }
        Command::Prove {
            common,
            pre,
            post,
            spec,
            out,
            trace,
        } => {
            let mut job = job_from(&common);
            job.pre = pre;
            job.post = post;
            job.spec_file = spec;
            job.proof_out = out;
            job.trace_out = trace;
            finish(harness::cmd_prove(&job), common.porcelain)
        }
    }
}
