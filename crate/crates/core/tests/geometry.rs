use geowl_core::geom::{
    anchor_embed, barycenter, barycenter_sq_norms, gaussian_directions, squared_distance_matrix, AnchorFrame, Candidates,
    ConeClass, ConeSpec, Hyperplane,
};
use geowl_core::linalg::sq_dist;
use geowl_core::oracle::random_cloud;
use geowl_core::{Rational, Scalar};
use num_traits::Zero;
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    Rational::from_ratio(v, 1)
}

fn exact_cloud() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (1usize..=4, 1usize..=8).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-20i64..=20, d), n)
            .prop_map(|pts| pts.into_iter().map(|p| p.into_iter().map(q).collect()).collect())
    })
}

fn vec_f64(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, d)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Hyperplane through `p` with the given (not necessarily unit) normal.
fn plane(normal: &[f64], p: &[f64]) -> Hyperplane<f64> {
    let len = norm(normal);
    let n: Vec<f64> = normal.iter().map(|v| v / len).collect();
    let offset = n.iter().zip(p).map(|(a, b)| a * b).sum();
    Hyperplane {
        normal: n,
        offset,
        span_points: Vec::new(),
    }
}

proptest! {
    #[test]
    fn barycenter_norms_from_distance_sums(pts in exact_cloud()) {
        let n = pts.len();
        let cloud = geowl_core::ExactCloud::new(pts[0].len(), pts.clone());
        prop_assume!(cloud.is_ok());
        let b = barycenter(&cloud.unwrap());
        let f: Vec<Rational> = pts.iter().map(|x| pts.iter().map(|y| sq_dist(x, y)).sum()).collect();
        let total: Rational = f.iter().cloned().sum();
        let norms = barycenter_sq_norms(&f, &total, n, 0.0).unwrap();
        for (x, got) in pts.iter().zip(&norms) {
            prop_assert_eq!(got, &sq_dist(x, &b));
        }
        // mean squared norm is half the mean squared pairwise distance
        let lhs: Rational = norms.iter().cloned().sum::<Rational>() / q(n as i64);
        prop_assert_eq!(lhs, total / q(2 * (n * n) as i64));
    }

    #[test]
    fn anchor_embedding_reproduces_the_matrix(seed in 0u64..10_000, n in 1usize..7, d in 1usize..5) {
        let c = random_cloud::<Rational>(n, d, seed, 12);
        let m = squared_distance_matrix(c.points()).unwrap();
        let z: Vec<Vec<f64>> = anchor_embed(&m, d, 0.0).unwrap();
        let back = squared_distance_matrix(&z).unwrap();
        for (a, b) in m.entries().iter().zip(back.entries()) {
            prop_assert!((a.approx() - b).abs() < 1e-9 * a.approx().max(1.0));
        }
    }

    #[test]
    fn trilateration_inverts_distances(anchors in prop::collection::vec(vec_f64(3), 3), t in prop::collection::vec(-2.0f64..2.0, 2)) {
        let frame = AnchorFrame::new(&anchors, 1e-9);
        prop_assume!(frame.as_ref().is_ok_and(|f| f.span_dim() == 2));
        let frame = frame.unwrap();
        let p: Vec<f64> = (0..3)
            .map(|k| anchors[0][k] + t[0] * (anchors[1][k] - anchors[0][k]) + t[1] * (anchors[2][k] - anchors[0][k]))
            .collect();
        let dists: Vec<f64> = anchors.iter().map(|a| sq_dist(a, &p)).collect();
        let got = frame.trilaterate(&dists).unwrap();
        prop_assert!(got.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-9 * (1.0 + norm(&p))));
    }

    #[test]
    fn mirror_pair_is_symmetric(anchors in prop::collection::vec(vec_f64(3), 3), p in vec_f64(3)) {
        let frame = AnchorFrame::new(&anchors, 1e-9);
        prop_assume!(frame.as_ref().is_ok_and(|f| f.span_dim() == 2));
        let frame = frame.unwrap();
        let dists: Vec<f64> = anchors.iter().map(|a| sq_dist(a, &p)).collect();
        let h = frame.hyperplane().unwrap();
        match frame.mirror_pair(&dists).unwrap() {
            Candidates::Pair(a, b) => {
                let r = h.reflect(&a);
                prop_assert!(r.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9 * (1.0 + norm(&p))));
                let near = |c: &[f64]| c.iter().zip(&p).all(|(x, y)| (x - y).abs() < 1e-6);
                prop_assert!(near(&a) || near(&b));
            }
            Candidates::Single(a) => prop_assert!(h.signed_distance(&p).abs() < 1e-4 && sq_dist(&a, &p) < 1e-8),
        }
    }

    #[test]
    fn reflection_lengthens_cross_distances(normal in vec_f64(3), through in vec_f64(3), a in vec_f64(3), b in vec_f64(3)) {
        prop_assume!(norm(&normal) > 0.1);
        let h = plane(&normal, &through);
        let (sa, sb) = (h.signed_distance(&a), h.signed_distance(&b));
        prop_assume!(sa * sb > 0.0 && sa.abs() > 1e-3 && sb.abs() > 1e-3);
        let (ra, rb) = (h.reflect(&a), h.reflect(&b));
        prop_assert!((sq_dist(&ra, &rb).sqrt() - sq_dist(&a, &b).sqrt()).abs() < 1e-12 * (1.0 + sq_dist(&a, &b)).sqrt() * 10.0);
        prop_assert!(sq_dist(&a, &b) < sq_dist(&a, &rb));
    }

    #[test]
    fn substituting_an_interior_ray_shrinks_the_cone(gens in prop::collection::vec(vec_f64(3), 3), lambda in prop::collection::vec(0.1f64..1.0, 3), seed in 0u64..1000) {
        let cone = ConeSpec::new(gens.clone(), 1e-9);
        prop_assume!(cone.is_ok());
        let cone = cone.unwrap();
        let y: Vec<f64> = (0..3).map(|k| (0..3).map(|i| lambda[i] * gens[i][k]).sum()).collect();
        prop_assert_eq!(cone.classify(&y, 1e-9).1, ConeClass::Interior);
        let smaller = cone.substituted(0, y, 1e-9).unwrap();
        let dirs = gaussian_directions(3, 20_000, seed);
        prop_assert!(smaller.solid_angle_from(&dirs) <= cone.solid_angle_from(&dirs));
    }
}

#[test]
fn barycenter_identities_on_500_clouds() {
    for seed in 0..500u64 {
        let d = 1 + (seed as usize % 4);
        let n = 1 + (seed as usize % 8);
        let c = random_cloud::<Rational>(n, d, seed, 50);
        let b = barycenter(&c);
        let f: Vec<Rational> = c.points().iter().map(|x| c.points().iter().map(|y| sq_dist(x, y)).sum()).collect();
        let total: Rational = f.iter().cloned().sum();
        let norms = barycenter_sq_norms(&f, &total, n, 0.0).unwrap();
        let direct: Vec<Rational> = c.points().iter().map(|x| sq_dist(x, &b)).collect();
        assert_eq!(norms, direct);
        let lhs = direct.iter().cloned().sum::<Rational>() / q(n as i64);
        assert_eq!(lhs - total / q(2 * (n * n) as i64), Rational::zero());
    }
}

#[test]
fn solid_angle_is_deterministic_and_strictly_monotone() {
    let cone = ConeSpec::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 1e-12).unwrap();
    assert_eq!(cone.solid_angle_mc(50_000, 4), cone.solid_angle_mc(50_000, 4));
    let dirs = gaussian_directions(3, 100_000, 1);
    let smaller = cone.substituted(0, vec![1.0, 1.0, 1.0], 1e-12).unwrap();
    assert!(smaller.solid_angle_from(&dirs) < cone.solid_angle_from(&dirs));
}
