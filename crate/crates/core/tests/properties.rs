//! Property suites over synthetic inputs.

mod common;

use common::props;

const CASES: u32 = 256;

#[test]
fn nuclide_round_trip() {
    props::nuclide_round_trip(CASES).unwrap();
}

#[test]
fn half_life_round_trip() {
    props::half_life_round_trip(CASES).unwrap();
}

#[test]
fn subset_identity() {
    props::subset_identity(CASES).unwrap();
}

#[test]
fn prune_idempotent() {
    props::prune_idempotent(CASES).unwrap();
}

#[test]
fn prune_monotone() {
    props::prune_monotone(CASES).unwrap();
}

#[test]
fn prune_commutes() {
    props::prune_commutes(CASES).unwrap();
}

#[test]
fn cascade_monotone() {
    props::cascade_monotone(CASES).unwrap();
}

#[test]
fn cascade_idempotent() {
    props::cascade_idempotent(CASES).unwrap();
}

#[test]
fn csv_identity() {
    props::csv_identity(CASES).unwrap();
}

#[test]
fn walk_terminates() {
    props::walk_terminates(CASES).unwrap();
}

#[test]
fn kind_order_independent() {
    props::kind_order_independent(CASES).unwrap();
}

#[test]
fn daughters_order_independent() {
    props::daughters_order_independent(CASES).unwrap();
}

#[test]
fn parsers_total() {
    props::parsers_total(CASES).unwrap();
}

#[test]
fn qualify_properties() {
    props::qualify_properties(CASES).unwrap();
}
