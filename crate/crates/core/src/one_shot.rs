//! Reconstruction from a single iteration of `d`-WL.
//!
//! A χ⁽¹⁾ color of a `d`-tuple `s` carries the distance matrix of `s` and the
//! multiset of squared distance tuples from every cloud point to `s`. When
//! `s` spans a hyperplane each tuple fixes a point up to reflection in it;
//! the sum of all pairwise distances `D_S` singles out the right choice.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geom::{Embedding, SquaredDistanceMatrix};
use crate::linalg;
use crate::recon_nd::{cloud_size, other_slot};
use crate::report::{recolor_matches, Algorithm, Path, ReconstructionReport};
use crate::scalar::Scalar;
use crate::wl::{Color, ColorId, ColorStore};

#[derive(Debug, Clone)]
pub struct OneShotConfig {
    pub tol: f64,
    /// Largest number of sign assignments enumerated for one tuple.
    pub max_candidates: u128,
}

impl Default for OneShotConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_candidates: 1 << 12,
        }
    }
}

/// One way of placing every distance tuple relative to fixed anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateCloud {
    pub anchors: Vec<Vec<f64>>,
    /// Per distance tuple: `+1`/`-1` for the side of the anchor hyperplane,
    /// `0` for points on it.
    pub assignment: Vec<i8>,
    pub points: Vec<Vec<f64>>,
    /// Sum of distances over ordered pairs of `points`.
    pub total: f64,
}

impl CandidateCloud {
    /// All off-hyperplane points on one side.
    pub fn is_half_space(&self) -> bool {
        self.assignment.iter().all(|&s| s >= 0)
    }
}

/// Sum of `|x - y|` over ordered pairs.
pub fn distance_sum(points: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            total += p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
    }
    2.0 * total
}

/// `D_S` from the χ⁽¹⁾ multiset of `d`-WL: `Σ_s |s_1 - s_2| / n^{d-2}` over all
/// tuples, or for `d = 1` the sum of the recorded distances.
pub fn total_distance_sum<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId]) -> Result<f64> {
    let Some(&first) = multiset.first() else {
        return Err(Error::EmptyCloud);
    };
    if store.depth(first) < 1 {
        return Err(Error::BadColors("need colors from iteration 1".into()));
    }
    let root = |v: T| v.approx().max(0.0).sqrt();
    match store.color(store.ancestor(first, 1)) {
        Color::Point { .. } => {
            let mut total = 0.0;
            for &c in multiset {
                if let Color::Point { records, .. } = store.color(store.ancestor(c, 1)) {
                    total += records.iter().map(|(k, _)| root(store.value(k))).sum::<f64>();
                }
            }
            Ok(total)
        }
        Color::Tuple { width, .. } => {
            let d = *width;
            let n = cloud_size(multiset.len(), d)?;
            let mut total = 0.0;
            for &c in multiset {
                let leaf = store.interner().leaf(store.ancestor(c, 0));
                total += root(store.value(&leaf[1]));
            }
            Ok(total / (n as f64).powi(d as i32 - 2))
        }
        Color::Leaf(_) => unreachable!("depth checked above"),
    }
}

/// Distance matrix of the tuple and the distance tuples of every cloud
/// point to it, from a χ⁽¹⁾ color.
pub fn decode_tuple_color<T: Scalar>(store: &ColorStore<T>, c1: ColorId) -> Result<(SquaredDistanceMatrix<T>, Vec<Vec<T>>)> {
    match store.color(c1) {
        Color::Point { records, .. } => Ok((
            SquaredDistanceMatrix::new(1, vec![T::zero()])?,
            records.iter().map(|(k, _)| vec![store.value(k)]).collect(),
        )),
        Color::Tuple { prev, width, records } => {
            let d = *width;
            let matrix = SquaredDistanceMatrix::new(d, store.leaf_values(*prev))?;
            let entries = records
                .chunks(d)
                .map(|chunk| {
                    (0..d)
                        .map(|j| {
                            let i = other_slot(j);
                            store.value(&store.interner().leaf(chunk[i])[i * d + j])
                        })
                        .collect()
                })
                .collect();
            Ok((matrix, entries))
        }
        Color::Leaf(_) => Err(Error::BadColors("expected an iteration-1 color".into())),
    }
}

/// Anchors embedded with their hyperplane normal on the last axis, and each
/// distance tuple resolved to a foot point and a height.
#[derive(Debug, Clone)]
pub struct Placement {
    pub anchors: Vec<Vec<f64>>,
    /// `(point with positive height, point with negative height)`; equal for
    /// points on the hyperplane.
    pub sides: Vec<(Vec<f64>, Vec<f64>)>,
    pub on_plane: Vec<bool>,
}

impl Placement {
    /// `anchors` must span a hyperplane of `R^d`, `d = anchors.order()`.
    pub fn new<T: Scalar>(anchors: &SquaredDistanceMatrix<T>, tuples: &[Vec<T>], tol: f64) -> Result<Self> {
        let d = anchors.order();
        let emb = Embedding::new(anchors, tol)?;
        if emb.rank() + 1 != d {
            return Err(Error::Degenerate(format!("anchor tuple spans dimension {}, expected {}", emb.rank(), d - 1)));
        }
        let mut sides = Vec::with_capacity(tuples.len());
        let mut on_plane = Vec::with_capacity(tuples.len());
        for t in tuples {
            let (coeffs, h2) = emb.locate(t)?;
            if h2.is_negative() && !emb.negligible(&h2) {
                return Err(Error::Inconsistent(format!("negative squared height {}", h2.approx())));
            }
            sides.push((emb.point_from(&coeffs, &h2, 1.0, d), emb.point_from(&coeffs, &h2, -1.0, d)));
            on_plane.push(emb.negligible(&h2));
        }
        Ok(Self {
            anchors: emb.coords(d)?,
            sides,
            on_plane,
        })
    }

    pub fn off_plane(&self) -> usize {
        self.on_plane.iter().filter(|&&r| !r).count()
    }

    /// Assignments up to the global reflection: `2^{m-1}` for `m ≥ 1` off-plane points.
    pub fn count(&self) -> u128 {
        match self.off_plane() {
            0 => 1,
            m => 1u128.checked_shl(m as u32 - 1).unwrap_or(u128::MAX),
        }
    }

    /// Candidate number `mask`: bit `k` flips the `(k+1)`-th off-plane point
    /// to the negative side (the first one always stays positive). Mask 0
    /// is the half-space candidate.
    pub fn candidate(&self, mask: u128) -> CandidateCloud {
        let mut k = 0;
        let mut assignment = Vec::with_capacity(self.sides.len());
        let mut points = Vec::with_capacity(self.sides.len());
        for ((pos, neg), &flat) in self.sides.iter().zip(&self.on_plane) {
            if flat {
                assignment.push(0);
                points.push(pos.clone());
                continue;
            }
            let flip = k > 0 && (mask >> (k - 1)) & 1 == 1;
            k += 1;
            assignment.push(if flip { -1 } else { 1 });
            points.push(if flip { neg.clone() } else { pos.clone() });
        }
        let total = distance_sum(&points);
        CandidateCloud {
            anchors: self.anchors.clone(),
            assignment,
            points,
            total,
        }
    }
}

/// Every candidate cloud for the anchors, half-space candidate first.
pub fn enumerate_candidates<T: Scalar>(
    anchors: &SquaredDistanceMatrix<T>,
    tuples: &[Vec<T>],
    tol: f64,
    cap: u128,
) -> Result<Vec<CandidateCloud>> {
    let placement = Placement::new(anchors, tuples, tol)?;
    let count = placement.count();
    if count > cap {
        return Err(Error::CandidateCapExceeded { count, cap });
    }
    Ok((0..count).map(|m| placement.candidate(m)).collect())
}

/// A `d`-subset of the cloud spanning a hyperplane with every point on one
/// closed side, by exhaustive scan. Indices are increasing.
pub fn supporting_tuple_scan<T: Scalar>(cloud: &PointCloud<T>, tol: f64) -> Option<Vec<usize>> {
    let d = cloud.dim();
    let pts = cloud.points();
    (0..pts.len()).combinations(d).find(|idx| {
        let base = &pts[idx[0]];
        let rows: Vec<Vec<T>> = idx[1..].iter().map(|&i| linalg::sub(&pts[i], base)).collect();
        if linalg::rank(rows.clone(), tol) != d - 1 {
            return false;
        }
        let (mut pos, mut neg) = (false, false);
        for p in pts {
            let mut m = rows.clone();
            m.push(linalg::sub(p, base));
            let v = linalg::det(m);
            pos |= v.is_positive_beyond(tol);
            neg |= v.is_negative_beyond(tol);
        }
        !(pos && neg)
    })
}

/// Reconstruct from the χ⁽¹⁾ multiset of `d`-WL.
///
/// If no tuple spans a hyperplane the cloud lies in the span of a tuple of
/// maximal dimension and is trilaterated from it. Otherwise hyperplane tuples
/// are scanned (most points on the hyperplane first, then by digest) and the
/// first one whose half-space candidate, and no other candidate, matches
/// `D_S` is kept. Every result is checked by recoloring.
pub fn reconstruct_one_iter<T: Scalar>(
    store: &ColorStore<T>,
    multiset: &[ColorId],
    d: usize,
    config: &OneShotConfig,
) -> Result<ReconstructionReport> {
    let Some(&first) = multiset.first() else {
        return Err(Error::EmptyCloud);
    };
    if store.depth(first) != 1 {
        return Err(Error::BadColors(format!(
            "need colors from iteration 1, got iteration {}",
            store.depth(first)
        )));
    }
    let n = cloud_size(multiset.len(), d)?;
    let mut counts: BTreeMap<ColorId, usize> = BTreeMap::new();
    for &c in multiset {
        *counts.entry(c).or_default() += 1;
    }
    let mut tuples = Vec::with_capacity(counts.len());
    for &c in counts.keys() {
        let (matrix, entries) = decode_tuple_color(store, c)?;
        if matrix.order() != d || entries.len() != n {
            return Err(Error::ParameterMismatch(format!("colors come from {}-WL, expected {d}-WL", matrix.order())));
        }
        let emb = Embedding::new(&matrix, config.tol)?;
        tuples.push((c, matrix, entries, emb));
    }
    tuples.sort_by(|a, b| store.digest(a.0).cmp(store.digest(b.0)));
    let max_dim = tuples.iter().map(|t| t.3.rank()).max().unwrap_or(0);
    let verify = |points: &[Vec<f64>]| recolor_matches(store, multiset, d, points, 1e-6);

    let mut tried = 0;
    if max_dim + 1 < d {
        for (_, _, entries, emb) in tuples.iter().filter(|t| t.3.rank() == max_dim) {
            tried += 1;
            let points = entries
                .iter()
                .map(|e| {
                    let (coeffs, h2) = emb.locate(e)?;
                    if !emb.negligible(&h2) {
                        return Err(Error::Inconsistent("point off the span of a maximal tuple".into()));
                    }
                    Ok(emb.point_from(&coeffs, &h2, 1.0, d))
                })
                .collect::<Result<Vec<_>>>()?;
            if verify(&points)? {
                let path = if n == 1 { Path::Single } else { Path::Trilateration };
                let mut report = ReconstructionReport::new(Algorithm::OneShot, path, points);
                report.colors_verified = true;
                report.candidates_tried = tried;
                return Ok(report);
            }
        }
        return Err(Error::Unresolved(format!("none of {tried} maximal tuples verified")));
    }

    let target = total_distance_sum(store, multiset)?;
    let mut placements = Vec::new();
    for (_, matrix, entries, emb) in &tuples {
        if emb.rank() + 1 == d {
            placements.push(Placement::new(matrix, entries, config.tol)?);
        }
    }
    // stable: ties keep digest order
    placements.sort_by_key(Placement::off_plane);
    let dtol = config.tol.max(1e-9) * (n * n) as f64 * target.max(1.0);
    let mut assignments: u128 = 0;
    for placement in &placements {
        tried += 1;
        let half = placement.candidate(0);
        assignments += 1;
        if (half.total - target).abs() > dtol {
            continue;
        }
        let count = placement.count();
        if count > config.max_candidates {
            return Err(Error::CandidateCapExceeded {
                count,
                cap: config.max_candidates,
            });
        }
        let rival = (1..count).any(|m| (placement.candidate(m).total - target).abs() <= dtol);
        assignments += count - 1;
        if rival || !verify(&half.points)? {
            continue;
        }
        let path = if n == 1 { Path::Single } else { Path::Mirror };
        let mut report = ReconstructionReport::new(Algorithm::OneShot, path, half.points);
        report.colors_verified = true;
        report.candidates_tried = tried;
        report.assignments = assignments;
        return Ok(report);
    }
    Err(Error::Unresolved(format!(
        "no hyperplane tuple among {tried} has a unique candidate with D_S = {target}"
    )))
}
