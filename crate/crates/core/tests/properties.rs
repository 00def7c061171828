//! Randomized property suites.

mod support;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wiring_closure(seed in any::<u64>()) {
        support::wiring_closure(seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn relabelling_acts_as_a_group(seed in any::<u64>(), parties in 2usize..=3) {
        support::relabelling_acts_as_a_group(seed, parties);
    }

    #[test]
    fn relabelling_preserves_bell_values(seed in any::<u64>()) {
        support::relabelling_preserves_bell_values(seed);
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in any::<u64>()) {
        support::equivalence_is_an_equivalence_relation(seed);
    }

    #[test]
    fn dd_is_order_independent(seed in any::<u64>(), r in 2usize..=3, c in 2usize..=4) {
        support::dd_is_order_independent(seed, r, c);
    }

    #[test]
    fn box_documents_round_trip(seed in any::<u64>(), parties in 2usize..=3) {
        support::box_documents_round_trip(seed, parties);
    }

    #[test]
    fn wiring_documents_round_trip(seed in any::<u64>()) {
        support::wiring_documents_round_trip(seed);
    }

    #[test]
    fn functional_documents_round_trip(seed in any::<u64>()) {
        support::functional_documents_round_trip(seed);
    }

    #[test]
    fn rationals_round_trip(n in any::<i64>(), d in 1i64..i64::MAX) {
        support::rationals_round_trip(n, d);
    }
}

#[test]
fn group_elements_are_closed_and_distinct() {
    support::group_elements_are_closed_and_distinct();
}

#[test]
fn dd_order_independence_on_no_signalling_polytopes() {
    support::dd_order_independence_on_no_signalling_polytopes();
}
