//! Library costs against the reference evaluators in `common::oracles`.

mod common;

use common::oracles;

#[test]
fn ideal_shapes_cost_nothing() {
    oracles::ideal_shapes_cost_nothing();
}

#[test]
fn pentagon_matches_oracle() {
    oracles::pentagon_matches_oracle();
}

#[test]
fn star_matches_oracle() {
    oracles::star_matches_oracle();
}

#[test]
fn hash_matches_oracle() {
    oracles::hash_matches_oracle();
}

#[test]
fn circle_and_line_match_oracles() {
    oracles::circle_and_line_match_oracles();
}

#[test]
fn avoid_matches_oracle() {
    oracles::avoid_matches_oracle();
}

#[test]
fn size_penalty_is_exactly_700_below_threshold() {
    oracles::size_penalty_is_exactly_700_below_threshold();
}
