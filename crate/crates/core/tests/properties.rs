mod common;

use proptest::prelude::*;

fn check(r: common::Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_transpose_is_an_involution(pa in 2usize..=4, pb in 2usize..=4, k in 1usize..=20, seed: u64) {
        check(common::pt_involution(pa, pb, k, seed))?;
    }

    #[test]
    fn schmidt_top_matches_svd_oracle(pa in 2usize..=5, pb in 2usize..=5, seed: u64) {
        check(common::schmidt_vs_oracle(pa, pb, seed))?;
    }

    #[test]
    fn bloch_round_trip_and_purity(pa in 2usize..=4, pb in 2usize..=4, k in 1usize..=20, seed: u64) {
        check(common::bloch_identities(pa, pb, k, seed))?;
    }

    #[test]
    fn smo_satisfies_kkt(n in 6usize..=40, seed: u64) {
        check(common::smo_kkt(n, seed))?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dataset_round_trip_is_byte_exact(n in 1usize..=6, seed: u64) {
        check(common::dataset_round_trip(n, seed))?;
    }
}

#[test]
fn gellmann_gram_is_twice_identity() {
    for p in 2..=9 {
        common::ggm_gram(p).unwrap();
    }
}

#[test]
fn pipeline_is_seed_deterministic() {
    for seed in [1, 99] {
        common::pipeline_determinism(seed).unwrap();
    }
}
