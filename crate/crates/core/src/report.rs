//! Result of a reconstruction run, and the color re-check shared by the
//! reconstruction pipelines.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::oracle::{isometry_check, Alignment, Mismatch};
use crate::scalar::Scalar;
use crate::wl::{Color, ColorId, ColorStore, PairKeys, WlConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Planar reconstruction from three iterations of 1-WL.
    Planar,
    /// Reconstruction in `R^d`, `d ≥ 3`, from three iterations of `(d-1)`-WL.
    Nd,
    /// Reconstruction from one iteration of `d`-WL.
    OneShot,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Planar => "wl2d",
            Algorithm::Nd => "wlnd",
            Algorithm::OneShot => "oneshot",
        }
    }
}

/// Which branch of an algorithm produced the points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    /// One point, nothing to do.
    Single,
    /// Every point on one line through the barycenter.
    Collinear,
    /// Planar elimination rounds.
    Rounds,
    /// Anchors of lower affine dimension; trilateration only.
    LowDim,
    /// Full-dimensional forbidden-region elimination.
    FullDim,
    /// One-iteration reconstruction with all tuples of low dimension.
    Trilateration,
    /// One-iteration reconstruction through a supporting hyperplane.
    Mirror,
}

impl Path {
    pub fn name(self) -> &'static str {
        match self {
            Path::Single => "single",
            Path::Collinear => "collinear",
            Path::Rounds => "rounds",
            Path::LowDim => "lowdim",
            Path::FullDim => "fulldim",
            Path::Trilateration => "trilateration",
            Path::Mirror => "mirror",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub algorithm: Algorithm,
    pub path: Path,
    pub points: Vec<Vec<f64>>,
    /// Recoloring the recovered cloud reproduced the input multiset.
    pub colors_verified: bool,
    /// Initialization candidates (or anchor tuples) attempted, including the winner.
    pub candidates_tried: usize,
    /// Elimination rounds (planar) or forbidden-region depth levels (`R^d`) used.
    pub rounds: usize,
    /// Proven upper bound on `rounds` for the winning candidate.
    pub round_bound: usize,
    /// Slab width of the forbidden region, when one was built.
    pub epsilon: Option<f64>,
    /// Mirror-sign assignments evaluated (one-iteration reconstruction).
    pub assignments: u128,
    /// Filled in by [`check_against`](Self::check_against).
    pub alignment: Option<Alignment>,
}

impl ReconstructionReport {
    pub fn new(algorithm: Algorithm, path: Path, points: Vec<Vec<f64>>) -> Self {
        Self {
            algorithm,
            path,
            points,
            colors_verified: false,
            candidates_tried: 1,
            rounds: 0,
            round_bound: 0,
            epsilon: None,
            assignments: 0,
            alignment: None,
        }
    }

    pub fn cloud(&self, dim: usize) -> Result<PointCloud<f64>> {
        PointCloud::new(dim, self.points.clone())
    }

    /// Compare the recovered points with the source through the isometry
    /// oracle and keep the alignment.
    pub fn check_against<T: Scalar>(&mut self, source: &PointCloud<T>, tol: f64) -> std::result::Result<&Alignment, Mismatch> {
        let cloud = self
            .cloud(source.dim())
            .map_err(|_| Mismatch::Size(source.len(), self.points.len()))?;
        let al = isometry_check(source, &cloud, tol)?;
        self.alignment = Some(al);
        Ok(self.alignment.as_ref().expect("just set"))
    }
}

/// Every squared distance value that occurs in the colors of a multiset.
fn known_values<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId]) -> Vec<(f64, T::Key)> {
    let mut keys: Vec<T::Key> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &c in multiset {
        let c1 = if store.depth(c) >= 1 { store.ancestor(c, 1) } else { c };
        if !seen.insert(c1) {
            continue;
        }
        match store.color(c1) {
            Color::Point { records, .. } => keys.extend(records.iter().map(|(k, _)| k.clone())),
            Color::Tuple { records, .. } => {
                for &r in records {
                    keys.extend(store.interner().leaf(r).iter().cloned());
                }
            }
            Color::Leaf(m) => keys.extend(m.iter().cloned()),
        }
    }
    keys.sort();
    keys.dedup();
    keys.into_iter().map(|k| (store.value(&k).approx(), k)).collect()
}

/// Recolor `points` in a copy of `store` and test whether the result is the
/// input multiset. Each recovered squared distance is first snapped to the
/// nearest value present in the input colors (relative tolerance `tol`), so
/// the recoloring runs on the exact input values.
pub fn recolor_matches<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], ell: usize, points: &[Vec<f64>], tol: f64) -> Result<bool> {
    let Some(&first) = multiset.first() else {
        return Err(Error::EmptyCloud);
    };
    let iters = store.depth(first) as usize;
    let known = known_values(store, multiset);
    let scale = known.iter().fold(1.0f64, |m, (v, _)| m.max(v.abs()));
    let n = points.len();
    let mut keys = Vec::with_capacity(n * n);
    for p in points {
        for q in points {
            let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            let idx = known.partition_point(|(v, _)| *v < d);
            let best = [idx.checked_sub(1), Some(idx)]
                .into_iter()
                .flatten()
                .filter_map(|i| known.get(i))
                .min_by(|a, b| (a.0 - d).abs().total_cmp(&(b.0 - d).abs()));
            match best {
                Some((v, k)) if (v - d).abs() <= tol * scale => keys.push(k.clone()),
                _ => return Ok(false),
            }
        }
    }
    let mut scratch = store.clone();
    let config = WlConfig {
        quantum: store.quantum(),
        max_tuples: u128::MAX,
        parallel: false,
    };
    let history = scratch.run_on_keys(&PairKeys::new(n, keys), ell, iters, &config)?;
    let mut expected = multiset.to_vec();
    expected.sort_unstable();
    Ok(history.top() == expected)
}
