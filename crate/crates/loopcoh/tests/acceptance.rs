//! Acceptance suite: runs the full verification ledger at its pinned
//! parameters (n up to 9, Gysin degrees to 24, invariant degrees to 20,
//! 1000 confluence trials at the fixed seed) and asserts every check, one
//! test per criterion, printing one pass/fail line each.

use std::sync::OnceLock;

use loopcoh::verify::{run_all, CheckOutcome, VerifyOptions};

fn ledger() -> &'static Vec<CheckOutcome> {
    static LEDGER: OnceLock<Vec<CheckOutcome>> = OnceLock::new();
    LEDGER.get_or_init(|| run_all(&VerifyOptions::default(), &|_| {}))
}

fn assert_check(id: &str) {
    let outcome = ledger()
        .iter()
        .find(|o| o.id == id)
        .unwrap_or_else(|| panic!("check {id} was not executed"));
    println!(
        "[{}] {} — {}",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.detail
    );
    assert!(outcome.passed, "{}: {}", outcome.id, outcome.detail);
}

#[test]
fn invariant_ring_equals_w_subalgebra_and_closed_form() {
    assert_check("invariant-ring");
}

#[test]
fn weyl_action_is_faithful_with_order_n_factorial() {
    assert_check("weyl-faithfulness");
}

#[test]
fn degree_one_image_at_n3_is_all_of_gl2() {
    assert_check("gl2-image");
}

#[test]
fn steenrod_squares_match_the_wu_formula() {
    assert_check("wu-oracle");
}

#[test]
fn loop_basis_counts_match_the_closed_form_series() {
    assert_check("loop-series");
}

#[test]
fn sigma_squaring_rule_holds_and_rewriting_is_confluent() {
    assert_check("sigma-squaring-confluence");
}

#[test]
fn gysin_assembly_matches_the_direct_series() {
    assert_check("gysin-direct");
}

#[test]
fn spin_presentation_degrees_match_the_validation_tables() {
    assert_check("spin-presentations");
}

#[test]
fn tensor_algebra_and_loop_models_have_one_dimensional_h1() {
    assert_check("tensor-degree-one");
}

#[test]
fn euler_multiplication_satisfies_rank_nullity_throughout() {
    assert_check("rank-nullity");
}
