//! The shipped proof corpus: the three transcribed derivations are
//! accepted, every rule's mutation fixture is rejected with its named side
//! condition, and rule counts match the frozen golden values.

mod common;

use cbv::proof::{
    check_derivation, parse_derivation, render_derivation, AssumptionContext, CheckFailure,
    CheckReport, Rule,
};
use cbv::semantics::Interpretation;
use cbv::syntax::Program;
use common::{fixture, fixture_program};

fn check(program: &str, proof: &str) -> (CheckReport, Program) {
    let prog = fixture_program(program);
    let d = parse_derivation(&fixture(proof)).unwrap_or_else(|e| panic!("{proof}: {e}"));
    let interp = Interpretation::zmod(3).unwrap();
    let report = check_derivation(&prog, &interp, &AssumptionContext::empty(), &d);
    (report, prog)
}

fn assert_accepted(program: &str, proof: &str) -> CheckReport {
    let (report, _) = check(program, proof);
    if !report.accepted {
        for (node, failure) in report.failures() {
            eprintln!("{proof} node {:?} [{}]: {failure}", node.path, node.rule);
        }
        panic!("{proof} should be accepted");
    }
    report
}

fn assert_rejected_with(program: &str, proof: &str, rule: Rule, expect: &str) {
    let (report, _) = check(program, proof);
    assert!(!report.accepted, "{proof} should be rejected");
    let hit = report.failures().any(|(node, failure)| {
        node.rule == rule
            && match failure {
                CheckFailure::SideCondition { condition, .. } => condition.contains(expect),
                CheckFailure::Obligation { .. } => expect == "obligation",
                CheckFailure::AssumptionNotInContext => expect == "assumption",
                _ => false,
            }
    });
    if !hit {
        for (node, failure) in report.failures() {
            eprintln!("{proof} node {:?} [{}]: {failure}", node.path, node.rule);
        }
        panic!("{proof}: expected a {rule} failure mentioning `{expect}`");
    }
}

#[test]
fn example1i_accepted() {
    let report = assert_accepted("programs/example1i.cbv", "proofs/example1i.cbvproof");
    assert_eq!(report.rule_applications, 6);
}

#[test]
fn example1ii_accepted() {
    let report = assert_accepted("programs/add.cbv", "proofs/example1ii.cbvproof");
    // golden count, frozen after the first verified check
    assert_eq!(report.rule_applications, 6);
}

#[test]
fn equ_local_accepted() {
    let report = assert_accepted("programs/equ_local.cbv", "proofs/equ_local.cbvproof");
    assert_eq!(report.rule_applications, 16);
}

#[test]
fn even_odd_accepted() {
    let report = assert_accepted("programs/even_odd.cbv", "proofs/even_odd.cbvproof");
    // 15 nodes, of which 3 are assumption leaves
    assert_eq!(report.rule_applications, 12);
}

#[test]
fn exists_intro_accepted() {
    assert_accepted("programs/simple.cbv", "proofs/exists_intro.cbvproof");
}

#[test]
fn accepted_fixtures_round_trip() {
    for proof in [
        "proofs/example1i.cbvproof",
        "proofs/example1ii.cbvproof",
        "proofs/equ_local.cbvproof",
        "proofs/even_odd.cbvproof",
    ] {
        let d = parse_derivation(&fixture(proof)).unwrap();
        let again = parse_derivation(&render_derivation(&d)).unwrap();
        assert_eq!(again, d, "{proof}");
    }
}

#[test]
fn mutation_block() {
    assert_rejected_with(
        "programs/block1.cbv",
        "proofs/mut_block.cbvproof",
        Rule::Block,
        "{locals} ∩ free(post)",
    );
}

#[test]
fn mutation_call() {
    assert_rejected_with(
        "programs/add.cbv",
        "proofs/mut_call.cbvproof",
        Rule::ProcedureCall,
        "{formals} ∩ free(post)",
    );
}

#[test]
fn mutation_recursion() {
    assert_rejected_with(
        "programs/even_odd.cbv",
        "proofs/mut_recursion.cbvproof",
        Rule::Recursion,
        "{formals of odd} ∩ free(post)",
    );
}

#[test]
fn mutation_recursion_i() {
    assert_rejected_with(
        "programs/add.cbv",
        "proofs/mut_recursion_i.cbvproof",
        Rule::RecursionI,
        "{formals} ∩ free(post)",
    );
}

#[test]
fn mutation_subst() {
    assert_rejected_with(
        "programs/add.cbv",
        "proofs/mut_subst.cbvproof",
        Rule::Substitution,
        "{y} ∩ change(D | S)",
    );
}

#[test]
fn mutation_invariance() {
    assert_rejected_with(
        "programs/equ_local.cbv",
        "proofs/mut_invariance.cbvproof",
        Rule::Invariance,
        "free(invariant) ∩ change(D | S)",
    );
}

#[test]
fn mutation_exists_intro() {
    assert_rejected_with(
        "programs/simple.cbv",
        "proofs/mut_exists.cbvproof",
        Rule::ExistsIntro,
        "{x} ∩ (var(D | S) ∪ free(post))",
    );
}

#[test]
fn mutation_conseq() {
    assert_rejected_with(
        "programs/add.cbv",
        "proofs/mut_conseq.cbvproof",
        Rule::Consequence,
        "obligation",
    );
    // the failed obligation carries a counterexample state
    let (report, _) = check("programs/add.cbv", "proofs/mut_conseq.cbvproof");
    assert!(report.failures().any(|(_, f)| matches!(
        f,
        CheckFailure::Obligation {
            counterexample: Some(_),
            ..
        }
    )));
}

#[test]
fn mutation_assume() {
    assert_rejected_with(
        "programs/add.cbv",
        "proofs/mut_assume.cbvproof",
        Rule::Assume,
        "assumption",
    );
}

#[test]
fn rule_application_count_matches_rule_count() {
    for (program, proof) in [
        ("programs/add.cbv", "proofs/example1ii.cbvproof"),
        ("programs/even_odd.cbv", "proofs/even_odd.cbvproof"),
    ] {
        let prog = fixture_program(program);
        let d = parse_derivation(&fixture(proof)).unwrap();
        let interp = Interpretation::zmod(2).unwrap();
        let report = check_derivation(&prog, &interp, &AssumptionContext::empty(), &d);
        assert_eq!(report.rule_applications, d.rule_count());
    }
}
