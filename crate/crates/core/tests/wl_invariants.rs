use geowl_core::oracle::{apply_random_isometry, is_isometric, random_cloud};
use geowl_core::wl::{fingerprint, run_wl, WlConfig};
use geowl_core::{ExactCloud, Rational, Scalar};
use itertools::Itertools;
use proptest::prelude::*;

fn grid_subsets(side: i64, d: usize, n: usize) -> Vec<ExactCloud> {
    let cells: Vec<Vec<Rational>> = (0..d)
        .map(|_| 0..side)
        .multi_cartesian_product()
        .map(|p| p.into_iter().map(|v| Rational::from_ratio(v, 1)).collect())
        .collect();
    cells
        .into_iter()
        .combinations(n)
        .map(|pts| ExactCloud::new(d, pts).unwrap())
        .collect()
}

fn check_completeness(clouds: &[ExactCloud], ell: usize) {
    let config = WlConfig::default();
    let fps: Vec<_> = clouds.iter().map(|c| fingerprint(c, ell, 3, &config).unwrap()).collect();
    for (i, j) in (0..clouds.len()).tuple_combinations() {
        let same = fps[i] == fps[j];
        let iso = is_isometric(&clouds[i], &clouds[j], 1e-9).is_some();
        assert_eq!(same, iso, "clouds {i} and {j}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fingerprints_survive_exact_isometries(seed in 0u64..100_000, n in 1usize..6, d in 2usize..4, ell in 1usize..4) {
        let a = random_cloud::<Rational>(n, d, seed, 20);
        let b = apply_random_isometry(&a, seed ^ 0x5eed);
        for t in 0..=3 {
            let config = WlConfig::default();
            prop_assert_eq!(fingerprint(&a, ell, t, &config).unwrap(), fingerprint(&b, ell, t, &config).unwrap());
        }
    }

    #[test]
    fn fingerprints_ignore_point_order(seed in 0u64..100_000, n in 1usize..7, d in 1usize..4, ell in 1usize..3) {
        let a = random_cloud::<Rational>(n, d, seed, 20);
        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.rotate_left(seed as usize % n);
        let b = a.permuted(&order);
        let config = WlConfig::default();
        prop_assert_eq!(fingerprint(&a, ell, 3, &config).unwrap(), fingerprint(&b, ell, 3, &config).unwrap());
    }

    #[test]
    fn refinement_never_merges_classes(seed in 0u64..100_000, n in 1usize..7, d in 1usize..4, ell in 1usize..3) {
        let a = random_cloud::<Rational>(n, d, seed, 6);
        let (_, h) = run_wl(&a, ell, 5, &WlConfig::default()).unwrap();
        let counts = h.class_counts();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        if let Some(k) = counts.windows(2).position(|w| w[0] == w[1]) {
            prop_assert!(counts[k..].iter().all(|&c| c == counts[k]));
        }
    }
}

#[test]
fn float_fingerprints_match_for_translated_copies() {
    let a = random_cloud::<f64>(5, 2, 3, 10);
    let shifted = geowl_core::FloatCloud::new(2, a.points().iter().map(|p| vec![p[0] + 0.25, p[1] - 3.5]).collect()).unwrap();
    let config = WlConfig::default();
    assert_eq!(fingerprint(&a, 1, 3, &config).unwrap(), fingerprint(&shifted, 1, 3, &config).unwrap());
}

#[test]
fn planar_grid_subsets_are_classified_exactly() {
    check_completeness(&grid_subsets(3, 2, 4), 1);
}

#[test]
fn cube_subsets_are_classified_exactly() {
    check_completeness(&grid_subsets(2, 3, 4), 2);
    check_completeness(&grid_subsets(2, 3, 5), 2);
}
