use geowl_core::oracle::{is_isometric, random_cloud};
use geowl_core::one_shot::{reconstruct_one_iter, OneShotConfig};
use geowl_core::recon2d::reconstruct_planar;
use geowl_core::recon_nd::{enhanced_profiles_from_wl3, reconstruct_fulldim, reconstruct_nd, select_cone_tuple, NdConfig};
use geowl_core::report::Path;
use geowl_core::wl::{run_wl, WlConfig};
use geowl_core::{Error, PointCloud, Rational, Scalar};
use proptest::prelude::*;

fn check<T: Scalar>(c: &PointCloud<T>, r: &geowl_core::report::ReconstructionReport) -> Result<(), TestCaseError> {
    prop_assert!(r.colors_verified);
    let al = is_isometric(c, &r.cloud(c.dim()).unwrap(), 1e-6);
    prop_assert!(al.is_some_and(|a| a.residual < 1e-6));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planar_roundtrip(seed in 0u64..1_000_000, n in 1usize..9, grid in 2i64..30) {
        let c = random_cloud::<Rational>(n, 2, seed, grid);
        let (store, h) = run_wl(&c, 1, 3, &WlConfig::default()).unwrap();
        let r = reconstruct_planar(&store, &h.top(), 0.0).unwrap();
        check(&c, &r)?;
        prop_assert!(r.rounds <= r.round_bound || r.path != Path::Rounds);
    }

    #[test]
    fn space_roundtrip(seed in 0u64..1_000_000, n in 1usize..7, grid in 2i64..30) {
        let c = random_cloud::<Rational>(n, 3, seed, grid);
        let (store, h) = run_wl(&c, 2, 3, &WlConfig::default()).unwrap();
        let r = reconstruct_nd(&store, &h.top(), 3, &NdConfig { tol: 0.0, ..NdConfig::default() }).unwrap();
        check(&c, &r)?;
        prop_assert!(r.rounds <= r.round_bound);
    }

    #[test]
    fn one_iteration_roundtrip(seed in 0u64..1_000_000, n in 1usize..7, d in 1usize..4, grid in 2i64..30) {
        let c = random_cloud::<f64>(n, d, seed, grid);
        let (store, h) = run_wl(&c, d, 1, &WlConfig::default()).unwrap();
        let r = reconstruct_one_iter(&store, &h.top(), d, &OneShotConfig::default()).unwrap();
        check(&c, &r)?;
    }
}

/// Every true point off the face hyperplanes keeps at least `ε` from them.
#[test]
fn epsilon_is_a_valid_margin() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let c = random_cloud::<Rational>(5 + (seed as usize % 2), 3, 2000 + seed, 12);
        let (store, h) = run_wl(&c, 2, 3, &WlConfig::default()).unwrap();
        let eps: Vec<_> = enhanced_profiles_from_wl3(&store, &h.top(), 0.0)
            .unwrap()
            .into_iter()
            .map(|(e, _)| e)
            .collect();
        let config = NdConfig { tol: 0.0, ..NdConfig::default() };
        let order = select_cone_tuple(&eps, &config);
        let Ok(run) = reconstruct_fulldim(&eps[order[0].index], &config) else {
            continue;
        };
        let out = PointCloud::new(3, run.points.clone()).unwrap();
        assert!(is_isometric(&c, &out, 1e-6).is_some());
        let Some(epsilon) = run.epsilon else { continue };
        checked += 1;
        for p in &run.points {
            let rho = run.planes.iter().map(|h| h.signed_distance(p).abs()).fold(f64::INFINITY, f64::min);
            assert!(rho < 1e-9 || rho >= epsilon, "seed {seed}: rho {rho} < eps {epsilon}");
        }
        assert!(run.levels <= run.depth_bound + 1);
    }
    assert!(checked > 30);
}

#[test]
fn wrong_parameters_are_rejected() {
    let c = random_cloud::<Rational>(4, 3, 1, 10);
    let (store, h) = run_wl(&c, 1, 3, &WlConfig::default()).unwrap();
    assert!(reconstruct_nd(&store, &h.top(), 3, &NdConfig::default()).is_err());
    let (store, h) = run_wl(&c, 2, 2, &WlConfig::default()).unwrap();
    assert!(matches!(
        reconstruct_nd(&store, &h.top(), 3, &NdConfig::default()),
        Err(Error::BadColors(_))
    ));
    let (store, h) = run_wl(&c, 3, 2, &WlConfig::default()).unwrap();
    assert!(matches!(
        reconstruct_one_iter(&store, &h.top(), 3, &OneShotConfig::default()),
        Err(Error::BadColors(_))
    ));
}

#[test]
fn depth_cap_is_reported() {
    let mut hit = false;
    for seed in 0..40u64 {
        let c = random_cloud::<Rational>(6, 3, seed, 10);
        let (store, h) = run_wl(&c, 2, 3, &WlConfig::default()).unwrap();
        let config = NdConfig { tol: 0.0, max_depth: 0, max_candidates: 1, ..NdConfig::default() };
        match reconstruct_nd(&store, &h.top(), 3, &config) {
            Err(Error::DepthCapExceeded { cap, bound }) => {
                assert_eq!(cap, 0);
                assert!(bound > 0);
                hit = true;
            }
            Ok(r) => assert!(r.rounds <= 1),
            Err(e) => panic!("unexpected {e}"),
        }
    }
    assert!(hit);
}

#[test]
fn candidate_cap_is_reported() {
    let c = random_cloud::<f64>(6, 2, 8, 50);
    let (store, h) = run_wl(&c, 2, 1, &WlConfig::default()).unwrap();
    let config = OneShotConfig { max_candidates: 1, ..OneShotConfig::default() };
    match reconstruct_one_iter(&store, &h.top(), 2, &config) {
        Err(Error::CandidateCapExceeded { cap: 1, .. }) => {}
        other => panic!("expected the cap to trip, got {other:?}"),
    }
}
