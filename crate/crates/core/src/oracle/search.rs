use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{is_isometric, random_cloud};
use crate::cloud::PointCloud;
use crate::scalar::Rational;
use crate::wl::{compare, fingerprint, Verdict, WlConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchParams {
    pub ell: usize,
    pub iters: usize,
    pub dim: usize,
    pub n: usize,
    pub budget: usize,
    pub seed: u64,
}

/// How an attempt built its second cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Two independent clouds on a coarse grid.
    Coarse,
    /// The first cloud with some points mirrored through an axis-aligned
    /// hyperplane passing through one of its points.
    PartialMirror,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Coarse => "coarse-grid",
            Strategy::PartialMirror => "partial-mirror",
        }
    }
}

/// A pair with equal fingerprints that the oracle says is not isometric.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub attempt: usize,
    pub attempt_seed: u64,
    pub strategy: Strategy,
    pub a: PointCloud<Rational>,
    pub b: PointCloud<Rational>,
}

fn attempt_seed(seed: u64, attempt: usize) -> u64 {
    // splitmix64 step so neighbouring attempts get unrelated streams
    let mut z = seed.wrapping_add((attempt as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn partial_mirror(a: &PointCloud<Rational>, rng: &mut ChaCha8Rng) -> Option<PointCloud<Rational>> {
    let n = a.len();
    let axis = rng.random_range(0..a.dim());
    let through = a.point(rng.random_range(0..n))[axis].clone();
    let two = Rational::from_integer(2.into());
    let mut points = a.points().to_vec();
    let mut moved = false;
    for p in points.iter_mut() {
        if rng.random_bool(0.5) {
            p[axis] = two.clone() * through.clone() - p[axis].clone();
            moved = true;
        }
    }
    if !moved {
        return None;
    }
    PointCloud::new(a.dim(), points).ok()
}

fn attempt(params: &SearchParams, index: usize, config: &WlConfig) -> Option<Finding> {
    let seed = attempt_seed(params.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strategy = if rng.random_bool(0.5) { Strategy::Coarse } else { Strategy::PartialMirror };
    let (a, b) = match strategy {
        Strategy::Coarse => {
            let a = random_cloud::<Rational>(params.n, params.dim, rng.random(), 1);
            let b = random_cloud::<Rational>(params.n, params.dim, rng.random(), 1);
            (a, b)
        }
        Strategy::PartialMirror => {
            let a = random_cloud::<Rational>(params.n, params.dim, rng.random(), 2);
            let b = partial_mirror(&a, &mut rng)?;
            (a, b)
        }
    };
    let fa = fingerprint(&a, params.ell, params.iters, config).ok()?;
    let fb = fingerprint(&b, params.ell, params.iters, config).ok()?;
    if compare(&fa, &fb).ok()? != Verdict::Equal || is_isometric(&a, &b, 1e-9).is_some() {
        return None;
    }
    Some(Finding {
        attempt: index,
        attempt_seed: seed,
        strategy,
        a,
        b,
    })
}

/// Randomized search for non-isometric pairs that WL cannot tell apart at
/// `(ell, iters)`. Attempts run in parallel; findings come back in attempt
/// order, so the result depends only on the parameters.
pub fn search_indistinguishable(params: &SearchParams, config: &WlConfig) -> Vec<Finding> {
    let serial = WlConfig { parallel: false, ..config.clone() };
    (0..params.budget)
        .into_par_iter()
        .filter_map(|i| attempt(params, i, &serial))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let p = SearchParams { ell: 1, iters: 1, dim: 1, n: 3, budget: 40, seed: 4 };
        let a = search_indistinguishable(&p, &WlConfig::default());
        let b = search_indistinguishable(&p, &WlConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn no_hits_for_planar_three_iterations() {
        let p = SearchParams { ell: 1, iters: 3, dim: 2, n: 5, budget: 60, seed: 1 };
        assert!(search_indistinguishable(&p, &WlConfig::default()).is_empty());
    }
}
