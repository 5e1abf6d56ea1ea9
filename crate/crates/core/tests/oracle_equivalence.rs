mod common;

use common::suites;

#[test]
fn every_operation_matches_its_reference() {
    for (name, check) in suites::oracle_suite(50, 2024) {
        assert!(check.is_ok(), "{name}: {}", check.unwrap_err());
    }
}

#[test]
fn references_agree_on_a_second_stream() {
    for (name, check) in suites::oracle_suite(50, 99) {
        assert!(check.is_ok(), "{name}: {}", check.unwrap_err());
    }
}

#[test]
fn manifold_reference_on_thirty_points() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(30);
    for t in 1..=5 {
        let data = suites::random_points(&mut rng, 30, 2);
        suites::check_manifold(&data, t).unwrap();
    }
}

#[test]
fn exact_repeat_count_matches_log_space_value() {
    for (m0, k) in [(100, 2), (30, 3), (20, 4), (7, 5), (3, 9)] {
        let exact = common::oracles::exact_expected_repeats(m0, k);
        let got = ldps::eval::expected_repeats(m0 as usize, k as usize);
        assert!((got - exact).abs() <= 1e-9 * exact, "{m0},{k}: {got} vs {exact}");
    }
}
