use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{invert, mat_vec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeClass {
    Interior,
    Boundary,
    Outside,
}

/// Simple cone with apex at the origin.
#[derive(Debug, Clone)]
pub struct ConeSpec<T> {
    generators: Vec<Vec<T>>,
    /// Inverse of the matrix whose columns are the generators.
    inverse: Vec<Vec<T>>,
}

impl<T: Scalar> ConeSpec<T> {
    pub fn new(generators: Vec<Vec<T>>, tol: f64) -> Result<Self> {
        let d = generators.len();
        if generators.iter().any(|g| g.len() != d) {
            return Err(Error::Degenerate(format!("a simple cone in R^d needs d generators of length d (got {d})")));
        }
        let cols: Vec<Vec<T>> = (0..d)
            .map(|r| generators.iter().map(|g| g[r].clone()).collect())
            .collect();
        let inverse = invert(&cols, tol).ok_or_else(|| Error::Degenerate("cone generators are linearly dependent".into()))?;
        Ok(Self { generators, inverse })
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<T>] {
        &self.generators
    }

    /// `lambda` with `x = sum lambda_i z_i`.
    pub fn coefficients(&self, x: &[T]) -> Vec<T> {
        mat_vec(&self.inverse, x)
    }

    pub fn classify(&self, x: &[T], tol: f64) -> (Vec<T>, ConeClass) {
        let lambda = self.coefficients(x);
        let class = if lambda.iter().all(|l| l.is_positive_beyond(tol)) {
            ConeClass::Interior
        } else if lambda.iter().all(|l| !l.is_negative_beyond(tol)) {
            ConeClass::Boundary
        } else {
            ConeClass::Outside
        };
        (lambda, class)
    }

    /// Same cone with the `i`-th generator replaced.
    pub fn substituted(&self, i: usize, generator: Vec<T>, tol: f64) -> Result<Self> {
        let mut g = self.generators.clone();
        g[i] = generator;
        Self::new(g, tol)
    }

    /// Solid angle `(1/d) Vol(cone ∩ unit ball)` estimated from `samples`
    /// Gaussian directions. A fixed seed gives the same directions for every
    /// cone of the same dimension.
    pub fn solid_angle_mc(&self, samples: usize, seed: u64) -> f64 {
        self.solid_angle_from(&gaussian_directions(self.dim(), samples, seed))
    }

    /// Same estimate on caller-supplied directions (common random numbers).
    pub fn solid_angle_from(&self, directions: &[Vec<f64>]) -> f64 {
        let d = self.dim();
        let inv: Vec<Vec<f64>> = self
            .inverse
            .iter()
            .map(|row| row.iter().map(Scalar::approx).collect())
            .collect();
        let hits = directions
            .iter()
            .filter(|g| {
                inv.iter()
                    .all(|row| row.iter().zip(g.iter()).map(|(a, b)| a * b).sum::<f64>() > 0.0)
            })
            .count();
        ball_volume(d) / d as f64 * hits as f64 / directions.len().max(1) as f64
    }
}

/// `samples` standard Gaussian vectors in `R^d`; their directions are uniform
/// on the sphere, so the fraction inside a cone is its share of the ball.
pub fn gaussian_directions(d: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

pub fn solid_angle_mc<T: Scalar>(cone: &ConeSpec<T>, samples: usize, seed: u64) -> f64 {
    cone.solid_angle_mc(samples, seed)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    let (mut even, mut odd) = (1.0, 2.0);
    for k in 2..=d {
        let v = if k % 2 == 0 { &mut even } else { &mut odd };
        *v *= 2.0 * std::f64::consts::PI / k as f64;
    }
    if d % 2 == 0 {
        even
    } else {
        odd
    }
}
