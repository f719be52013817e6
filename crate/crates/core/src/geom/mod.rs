//! Euclidean primitives shared by the coloring and reconstruction code.

mod cone;
mod embed;
mod frame;

pub use cone::{ball_volume, gaussian_directions, solid_angle_mc, ConeClass, ConeSpec};
pub use embed::{affine_dim_of_matrix, anchor_embed, Embedding, SquaredDistanceMatrix};
pub use frame::{reflect, AnchorFrame, Candidates, Hyperplane};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::{rank, sub};
use crate::scalar::{int, Scalar};

/// Mean of the points.
pub fn barycenter<T: Scalar>(cloud: &PointCloud<T>) -> Vec<T> {
    let n: T = int(cloud.len());
    let mut acc = vec![T::zero(); cloud.dim()];
    for p in cloud.points() {
        for (a, x) in acc.iter_mut().zip(p) {
            *a = a.clone() + x.clone();
        }
    }
    acc.into_iter().map(|a| a / n.clone()).collect()
}

pub fn squared_distance_matrix<T: Scalar>(points: &[Vec<T>]) -> Result<SquaredDistanceMatrix<T>> {
    SquaredDistanceMatrix::from_points(points)
}

/// Per-point squared distance to the barycenter from the sums
/// `f(x) = sum_y |x - y|^2` and their total over the cloud.
pub fn barycenter_sq_norms<T: Scalar>(f_values: &[T], total: &T, n: usize, tol: f64) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    let n: T = int(n);
    let shift = total.clone() / (n.clone() + n.clone());
    f_values
        .iter()
        .map(|f| {
            let v = (f.clone() - shift.clone()) / n.clone();
            if v.is_negative_beyond(tol) {
                Err(Error::Inconsistent(format!(
                    "negative squared distance to the barycenter ({})",
                    v.approx()
                )))
            } else if v.is_negative() {
                Ok(T::zero())
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// Dimension of the affine span, by rank of the points centered on the first one.
pub fn affine_dim<T: Scalar>(points: &[Vec<T>], tol: f64) -> usize {
    match points.split_first() {
        None => 0,
        Some((first, rest)) => rank(rest.iter().map(|p| sub(p, first)).collect(), tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_ratio(v, 1)
    }

    fn cloud(points: &[&[i64]]) -> PointCloud<Rational> {
        let pts: Vec<Vec<Rational>> = points.iter().map(|p| p.iter().map(|&v| q(v)).collect()).collect();
        PointCloud::new(pts[0].len(), pts).unwrap()
    }

    #[test]
    fn barycenter_examples() {
        assert_eq!(barycenter(&cloud(&[&[0, 0], &[2, 0]])), vec![q(1), q(0)]);
        assert_eq!(barycenter(&cloud(&[&[1, 2, 3]])), vec![q(1), q(2), q(3)]);
        let tri = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]).unwrap();
        let b = barycenter(&tri);
        assert!((b[0] - 0.5).abs() < 1e-15 && (b[1] - 3f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn distance_matrix_examples() {
        let m = squared_distance_matrix(&cloud(&[&[0, 0], &[3, 0], &[0, 4]]).into_points()).unwrap();
        assert_eq!(m.rows(), vec![vec![q(0), q(9), q(16)], vec![q(9), q(0), q(25)], vec![q(16), q(25), q(0)]]);
        let single = squared_distance_matrix(&[vec![q(0), q(0)]]).unwrap();
        assert_eq!(single.rows(), vec![vec![q(0)]]);
        assert!(squared_distance_matrix(&[vec![q(0)], vec![q(0), q(1)]]).is_err());
    }

    #[test]
    fn barycenter_norm_examples() {
        assert_eq!(barycenter_sq_norms(&[q(4), q(4)], &q(8), 2, 0.0).unwrap(), vec![q(1), q(1)]);
        assert_eq!(
            barycenter_sq_norms(&[q(5), q(2), q(5)], &q(12), 3, 0.0).unwrap(),
            vec![q(1), q(0), q(1)]
        );
        assert_eq!(barycenter_sq_norms(&[q(0)], &q(0), 1, 0.0).unwrap(), vec![q(0)]);
        assert!(barycenter_sq_norms(&[q(0), q(9)], &q(8), 2, 0.0).is_err());
    }

    #[test]
    fn affine_dim_examples() {
        assert_eq!(affine_dim(cloud(&[&[0, 0], &[1, 1], &[3, 3]]).points(), 0.0), 1);
        assert_eq!(affine_dim(cloud(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).points(), 0.0), 3);
        assert_eq!(affine_dim(cloud(&[&[5, 5]]).points(), 0.0), 0);
    }
}
