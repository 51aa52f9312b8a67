mod common;

use eqlines_core::numerics::rat;

#[test]
fn random_codes_satisfy_positivity() {
    common::positivity_on_random_codes().unwrap();
}

#[test]
fn gegenbauer_grid() {
    common::gegenbauer_grid().unwrap();
}

#[test]
fn objective_non_increasing_in_p() {
    common::monotone_in_p(23, &rat(1, 5)).unwrap();
    common::monotone_in_p(43, &rat(1, 7)).unwrap();
}

#[test]
fn relative_bound_dominates() {
    common::relative_bound_dominates().unwrap();
}

#[test]
fn weak_duality() {
    common::weak_duality().unwrap();
}

#[test]
fn sdpa_round_trip_preserves_optimum() {
    common::sdpa_round_trip().unwrap();
}

#[test]
fn scan_output_is_byte_identical() {
    common::scan_is_byte_identical().unwrap();
}
