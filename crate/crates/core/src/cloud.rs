use crate::error::{Error, Result};
use crate::scalar::{convert, Scalar};

/// A finite set of distinct points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    label: Option<String>,
}

impl<T: Scalar> PointCloud<T> {
    /// Validates shape and distinctness. Distinctness is exact for rational
    /// coordinates and bitwise for floats.
    pub fn new(dim: usize, points: Vec<Vec<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Degenerate("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoint(j, i));
                }
            }
        }
        Ok(Self {
            dim,
            points,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn into_points(self) -> Vec<Vec<T>> {
        self.points
    }

    /// Same cloud in another backend (through `f64`).
    pub fn convert<U: Scalar>(&self) -> PointCloud<U> {
        PointCloud {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(convert::<T, U>).collect())
                .collect(),
            label: self.label.clone(),
        }
    }

    /// Embed into a higher dimension by zero padding.
    pub fn pad_to(&self, dim: usize) -> PointCloud<T> {
        assert!(dim >= self.dim);
        PointCloud {
            dim,
            points: self
                .points
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.resize(dim, T::zero());
                    q
                })
                .collect(),
            label: self.label.clone(),
        }
    }

    /// Reorder points: the `i`-th output point is `points[order[i]]`.
    pub fn permuted(&self, order: &[usize]) -> PointCloud<T> {
        assert_eq!(order.len(), self.len());
        PointCloud {
            dim: self.dim,
            points: order.iter().map(|&i| self.points[i].clone()).collect(),
            label: self.label.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn rejects_duplicates_and_ragged_input() {
        let p = |x: i64| vec![Rational::from_ratio(x, 1), Rational::from_ratio(0, 1)];
        assert_eq!(
            PointCloud::new(2, vec![p(1), p(2), p(1)]).unwrap_err(),
            Error::DuplicatePoint(0, 2)
        );
        assert!(matches!(
            PointCloud::new(2, vec![p(1), vec![Rational::from_ratio(1, 1)]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            PointCloud::<Rational>::new(2, vec![]).unwrap_err(),
            Error::EmptyCloud
        );
    }

    #[test]
    fn padding_keeps_points() {
        let c = PointCloud::new(1, vec![vec![1.0f64], vec![2.0]]).unwrap();
        let d = c.pad_to(3);
        assert_eq!(d.point(1), &[2.0, 0.0, 0.0]);
    }
}
