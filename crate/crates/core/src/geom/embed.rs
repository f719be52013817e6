//! Squared distance matrices and their canonical Euclidean embedding.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::sq_dist;
use crate::scalar::{half, magnitude, Real, Scalar};

/// Symmetric, zero-diagonal matrix of squared distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix<T> {
    order: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SquaredDistanceMatrix<T> {
    pub fn new(order: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries, found {}",
                order * order,
                entries.len()
            )));
        }
        for i in 0..order {
            if !entries[i * order + i].is_zero() {
                return Err(Error::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in 0..i {
                if entries[i * order + j] != entries[j * order + i] {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
                if entries[i * order + j].is_negative() {
                    return Err(Error::InvalidMatrix(format!("negative entry at ({i},{j})")));
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Build from rows (convenience for literals).
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let order = rows.len();
        Self::new(order, rows.into_iter().flatten().collect())
    }

    pub fn from_points(points: &[Vec<T>]) -> Result<Self> {
        if let Some(first) = points.first() {
            if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        let k = points.len();
        let mut entries = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..i {
                let d = sq_dist(&points[i], &points[j]);
                entries[i * k + j] = d.clone();
                entries[j * k + i] = d;
            }
        }
        Ok(Self { order: k, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.order.max(1)).map(|r| r.to_vec()).collect()
    }

    /// Principal submatrix on `indices` (in that order).
    pub fn select(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut entries = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                entries.push(self.get(i, j).clone());
            }
        }
        Self { order: k, entries }
    }

    /// Append one point given its squared distances to the existing points.
    pub fn extended(&self, dists: &[T]) -> Result<Self> {
        if dists.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: dists.len(),
            });
        }
        let k = self.order + 1;
        let mut entries = Vec::with_capacity(k * k);
        for i in 0..self.order {
            entries.extend_from_slice(&self.entries[i * self.order..(i + 1) * self.order]);
            entries.push(dists[i].clone());
        }
        entries.extend_from_slice(dists);
        entries.push(T::zero());
        Self::new(k, entries)
    }

    fn scale(&self) -> f64 {
        magnitude(self.entries.iter().cloned())
    }
}

/// Incremental LDLᵀ factorization of the Gram matrix anchored at point 0,
/// processed in point order.
///
/// Each point either opens a new axis (its residual is the squared distance
/// to the affine span of the earlier points) or lies in that span. The
/// residuals and coefficients are computed in `T`, so rank decisions are exact
/// for rational input.
#[derive(Debug, Clone)]
pub struct Embedding<T> {
    matrix: SquaredDistanceMatrix<T>,
    /// Point index that opened each axis.
    pivots: Vec<usize>,
    /// Squared length of each axis step (the LDLᵀ diagonal).
    diag: Vec<T>,
    /// Per point, coefficients on the axes open when it was processed.
    coeffs: Vec<Vec<T>>,
    tol: f64,
}

impl<T: Scalar> Embedding<T> {
    /// Factor a matrix; fails on a negative residual beyond tolerance.
    pub fn new(matrix: &SquaredDistanceMatrix<T>, tol: f64) -> Result<Self> {
        let tol = tol * matrix.scale();
        let mut emb = Embedding {
            matrix: matrix.clone(),
            pivots: Vec::new(),
            diag: Vec::new(),
            coeffs: Vec::with_capacity(matrix.order()),
            tol,
        };
        if matrix.order() == 0 {
            return Ok(emb);
        }
        emb.coeffs.push(Vec::new());
        for i in 1..matrix.order() {
            let row: Vec<T> = (0..matrix.order()).map(|j| matrix.get(i, j).clone()).collect();
            let (mut l, residual) = emb.project(&row);
            if residual.is_negligible(tol) {
                emb.coeffs.push(l);
            } else if residual.is_negative() {
                return Err(Error::NotRealizable {
                    dim: emb.rank(),
                    reason: format!("negative residual {} at point {i}", residual.approx()),
                });
            } else {
                l.push(T::one());
                emb.pivots.push(i);
                emb.diag.push(residual);
                emb.coeffs.push(l);
            }
        }
        Ok(emb)
    }

    fn gram(&self, dists: &[T], j: usize) -> T {
        (dists[0].clone() + self.matrix.get(0, j).clone() - dists[j].clone()) * half()
    }

    /// Coefficients and residual of a point given its squared distances to
    /// every point of the matrix (at least the pivots and point 0 are read).
    fn project(&self, dists: &[T]) -> (Vec<T>, T) {
        let r = self.pivots.len();
        let mut l: Vec<T> = Vec::with_capacity(r + 1);
        for m in 0..r {
            let p = self.pivots[m];
            let mut v = self.gram(dists, p);
            for (t, lt) in l.iter().enumerate() {
                v = v - lt.clone() * self.coeffs[p][t].clone() * self.diag[t].clone();
            }
            l.push(v / self.diag[m].clone());
        }
        let mut residual = dists[0].clone();
        for (m, lm) in l.iter().enumerate() {
            residual = residual - lm.clone() * lm.clone() * self.diag[m].clone();
        }
        (l, residual)
    }

    /// Affine dimension of the factored points.
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn matrix(&self) -> &SquaredDistanceMatrix<T> {
        &self.matrix
    }

    /// Coefficients on the open axes and the squared height above the span
    /// for an external point, given its squared distances to all points.
    pub fn locate(&self, dists: &[T]) -> Result<(Vec<T>, T)> {
        if dists.len() != self.matrix.order() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.order(),
                found: dists.len(),
            });
        }
        Ok(self.project(dists))
    }

    /// Squared distance from an external point to the affine span.
    pub fn height_sq(&self, dists: &[T]) -> Result<T> {
        Ok(self.locate(dists)?.1)
    }

    /// `true` when `value` counts as zero at this embedding's scale.
    pub fn negligible(&self, value: &T) -> bool {
        value.is_negligible(self.tol)
    }

    /// Axis lengths `sqrt(D_m)`.
    pub fn axis_lengths<F: Real>(&self) -> Vec<F> {
        self.diag
            .iter()
            .map(|d| F::from_f64_lossy(d.approx().max(0.0)).sqrt())
            .collect()
    }

    /// Coordinates of the factored points, padded with zeros to `dim`.
    pub fn coords<F: Real>(&self, dim: usize) -> Result<Vec<Vec<F>>> {
        if self.rank() > dim {
            return Err(Error::NotRealizable {
                dim,
                reason: format!("affine rank {} exceeds the dimension", self.rank()),
            });
        }
        let axes = self.axis_lengths::<F>();
        Ok(self
            .coeffs
            .iter()
            .map(|l| {
                let mut x = vec![F::zero(); dim];
                for (m, c) in l.iter().enumerate() {
                    x[m] = F::from_f64_lossy(c.approx()) * axes[m];
                }
                x
            })
            .collect())
    }

    /// Coordinates of an external point from `locate` output; the height is
    /// placed on axis `rank()` with the given sign (dropped when zero).
    pub fn point_from<F: Real>(&self, coeffs: &[T], height_sq: &T, sign: F, dim: usize) -> Vec<F> {
        let axes = self.axis_lengths::<F>();
        let mut x = vec![F::zero(); dim];
        for (m, c) in coeffs.iter().enumerate() {
            x[m] = F::from_f64_lossy(c.approx()) * axes[m];
        }
        if !self.negligible(height_sq) && self.rank() < dim {
            x[self.rank()] = sign * F::from_f64_lossy(height_sq.approx().max(0.0)).sqrt();
        }
        x
    }
}

/// Points realizing `matrix` in `R^dim`, first point at the origin, each
/// new affine direction placed on the next coordinate axis.
pub fn anchor_embed<T: Scalar, F: Real>(
    matrix: &SquaredDistanceMatrix<T>,
    dim: usize,
    tol: f64,
) -> Result<Vec<Vec<F>>> {
    Embedding::new(matrix, tol)?.coords(dim)
}

/// Affine dimension of the configuration described by a distance matrix.
pub fn affine_dim_of_matrix<T: Scalar>(matrix: &SquaredDistanceMatrix<T>, tol: f64) -> Result<usize> {
    Ok(Embedding::new(matrix, tol)?.rank())
}

impl<T: Scalar> SquaredDistanceMatrix<T> {
    /// `true` when every entry is exactly zero (a single repeated point).
    pub fn is_trivial(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(v: i64) -> Rational {
        Rational::from_ratio(v, 1)
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(SquaredDistanceMatrix::from_rows(vec![vec![r(1)]]).is_err());
        assert!(SquaredDistanceMatrix::from_rows(vec![vec![r(0), r(1)], vec![r(2), r(0)]]).is_err());
        assert!(SquaredDistanceMatrix::from_rows(vec![vec![r(0), r(-1)], vec![r(-1), r(0)]]).is_err());
    }

    #[test]
    fn two_points_at_distance_five() {
        let a = SquaredDistanceMatrix::from_rows(vec![vec![r(0), r(25)], vec![r(25), r(0)]]).unwrap();
        let pts: Vec<Vec<f64>> = anchor_embed(&a, 2, 1e-9).unwrap();
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[1], vec![5.0, 0.0]);
    }

    #[test]
    fn unit_segment_on_the_line() {
        let a = SquaredDistanceMatrix::from_rows(vec![vec![r(0), r(1)], vec![r(1), r(0)]]).unwrap();
        let pts: Vec<Vec<f64>> = anchor_embed(&a, 1, 1e-9).unwrap();
        assert_eq!(pts, vec![vec![0.0], vec![1.0]]);
    }

    #[test]
    fn triangle_inequality_violation_is_not_realizable() {
        // sides 1, 1, 3
        let a = SquaredDistanceMatrix::from_rows(vec![
            vec![r(0), r(1), r(1)],
            vec![r(1), r(0), r(9)],
            vec![r(1), r(9), r(0)],
        ])
        .unwrap();
        assert!(matches!(
            anchor_embed::<_, f64>(&a, 2, 1e-9),
            Err(Error::NotRealizable { .. })
        ));
    }

    #[test]
    fn rank_above_dimension_is_rejected() {
        let a = SquaredDistanceMatrix::from_rows(vec![
            vec![r(0), r(9), r(16)],
            vec![r(9), r(0), r(25)],
            vec![r(16), r(25), r(0)],
        ])
        .unwrap();
        assert!(anchor_embed::<_, f64>(&a, 1, 1e-9).is_err());
        assert_eq!(affine_dim_of_matrix(&a, 0.0).unwrap(), 2);
    }

    #[test]
    fn locate_reports_height() {
        // segment from (0,0) to (2,0); query (1, 3)
        let a = SquaredDistanceMatrix::from_rows(vec![vec![r(0), r(4)], vec![r(4), r(0)]]).unwrap();
        let e = Embedding::new(&a, 0.0).unwrap();
        let (l, h) = e.locate(&[r(10), r(10)]).unwrap();
        assert_eq!(h, r(9));
        assert_eq!(l, vec![Rational::from_ratio(1, 2)]);
        let p: Vec<f64> = e.point_from(&l, &h, -1.0, 2);
        assert_eq!(p, vec![1.0, -3.0]);
    }
}
