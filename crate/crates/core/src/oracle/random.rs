use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::scalar::Scalar;

/// Pythagorean triples `(a, b, c)` with `a² + b² = c²`.
const TRIPLES: [(i64, i64, i64); 4] = [(3, 4, 5), (5, 12, 13), (8, 15, 17), (7, 24, 25)];

/// `n` distinct points with coordinates `k / grid`, `|k| ≤ 4·grid`.
pub fn random_cloud<T: Scalar>(n: usize, d: usize, seed: u64, grid: i64) -> PointCloud<T> {
    assert!(n >= 1 && d >= 1 && grid >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = 4 * grid;
    let mut raw: Vec<Vec<i64>> = Vec::with_capacity(n);
    while raw.len() < n {
        let p: Vec<i64> = (0..d).map(|_| rng.random_range(-span..=span)).collect();
        if !raw.contains(&p) {
            raw.push(p);
        }
    }
    let points = raw
        .into_iter()
        .map(|p| p.into_iter().map(|k| T::from_ratio(k, grid)).collect())
        .collect();
    PointCloud::new(d, points).expect("distinct points of the right dimension")
}

/// Orthogonal `d×d` matrix with rational entries: a signed permutation
/// followed by Pythagorean rotations in random coordinate planes.
pub fn random_rational_orthogonal<T: Scalar>(d: usize, rng: &mut impl Rng) -> Vec<Vec<T>> {
    let mut axes: Vec<usize> = (0..d).collect();
    axes.shuffle(rng);
    let mut m: Vec<Vec<T>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    if axes[r] == c {
                        T::from_ratio(if rng.random_bool(0.5) { 1 } else { -1 }, 1)
                    } else {
                        T::zero()
                    }
                })
                .collect()
        })
        .collect();
    if d >= 2 {
        for _ in 0..d - 1 {
            let i = rng.random_range(0..d);
            let mut j = rng.random_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            let (a, b, c) = TRIPLES[rng.random_range(0..TRIPLES.len())];
            let b = if rng.random_bool(0.5) { b } else { -b };
            let (cos, sin) = (T::from_ratio(a, c), T::from_ratio(b, c));
            // left-multiply by the rotation acting on rows i and j
            for col in 0..d {
                let (x, y) = (m[i][col].clone(), m[j][col].clone());
                m[i][col] = cos.clone() * x.clone() - sin.clone() * y.clone();
                m[j][col] = sin.clone() * x + cos.clone() * y;
            }
        }
    }
    m
}

/// Image of a cloud under a random exactness-preserving isometry, with the
/// points shuffled.
pub fn apply_random_isometry<T: Scalar>(cloud: &PointCloud<T>, seed: u64) -> PointCloud<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157_4f52_4d31_5345);
    let d = cloud.dim();
    let q = random_rational_orthogonal::<T>(d, &mut rng);
    let den = rng.random_range(1..=7);
    let shift: Vec<T> = (0..d).map(|_| T::from_ratio(rng.random_range(-20..=20), den)).collect();
    let mut points: Vec<Vec<T>> = cloud
        .points()
        .iter()
        .map(|p| {
            q.iter()
                .zip(&shift)
                .map(|(row, t)| row.iter().zip(p).fold(t.clone(), |acc, (a, x)| acc + a.clone() * x.clone()))
                .collect()
        })
        .collect();
    points.shuffle(&mut rng);
    let out = PointCloud::new(d, points).expect("isometries keep points distinct");
    match cloud.label() {
        Some(l) => out.with_label(l),
        None => out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::squared_distance_matrix;
    use crate::oracle::is_isometric;
    use crate::Rational;

    #[test]
    fn clouds_are_deterministic_and_distinct() {
        let a: PointCloud<Rational> = random_cloud(8, 3, 11, 2);
        let b: PointCloud<Rational> = random_cloud(8, 3, 11, 2);
        assert_eq!(a, b);
        assert_eq!((a.len(), a.dim()), (8, 3));
        let c: PointCloud<Rational> = random_cloud(8, 3, 12, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn orthogonal_matrices_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=4 {
            let q: Vec<Vec<Rational>> = random_rational_orthogonal(d, &mut rng);
            for r in 0..d {
                for s in 0..d {
                    let dot = (0..d).fold(Rational::from_ratio(0, 1), |acc, k| acc + q[r][k].clone() * q[s][k].clone());
                    assert_eq!(dot, Rational::from_ratio(i64::from(r == s), 1));
                }
            }
        }
    }

    #[test]
    fn isometry_preserves_distance_multiset() {
        let a: PointCloud<Rational> = random_cloud(6, 3, 1, 3);
        let b = apply_random_isometry(&a, 99);
        let mut da = squared_distance_matrix(a.points()).unwrap().entries().to_vec();
        let mut db = squared_distance_matrix(b.points()).unwrap().entries().to_vec();
        da.sort();
        db.sort();
        assert_eq!(da, db);
        assert!(is_isometric(&a, &b, 1e-9).is_some());
    }
}
