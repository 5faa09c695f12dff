//! Identity suites behind the recursive solvers, each side computed by brute force.

mod common;

#[test]
fn removing_a_shared_distinct_middle() {
    common::removing_a_shared_distinct_middle();
}

#[test]
fn interval_restricted_blds_reduces_to_a_smaller_instance() {
    common::interval_restricted_blds_reduces_to_a_smaller_instance();
}

#[test]
fn blds_is_the_best_completed_interval_child() {
    common::blds_is_the_best_completed_interval_child();
}

#[test]
fn ssst_crossing_is_right_max_minus_left_min() {
    common::ssst_crossing_is_right_max_minus_left_min();
}

#[test]
fn crossing_increasing_subsequence_splits_at_the_midpoint() {
    common::crossing_increasing_subsequence_splits_at_the_midpoint();
}

#[test]
fn crossing_signed_sum_splits_at_the_midpoint() {
    common::crossing_signed_sum_splits_at_the_midpoint();
}

#[test]
fn rectangle_sums_from_prefix_corners() {
    common::rectangle_sums_from_prefix_corners();
}

#[test]
fn majority_iff_large_submatrix_exhaustive_n3() {
    common::majority_iff_large_submatrix_exhaustive_n3();
}

#[test]
fn klee_child_weight_decays() {
    common::klee_child_weight_decays();
}
