//! Reconstruction in `R^d`, `d ≥ 3`, from three iterations of `(d-1)`-WL.
//!
//! The barycenter is placed at the origin. An enhanced profile `EP(z_1 … z_d)`
//! fixes the anchors `z_i`; profile `i` then gives every point up to the
//! reflection in `P_i = span(z_j : j ≠ i)`, and the forbidden region decides
//! which of the two candidates is real.

mod init;
mod region;

pub use init::{
    barycenter_dists_from_wl1, enhanced_profiles_from_wl3, profiles_from_wl2, DistanceProfile, EnhancedProfile, NdDecoder,
};
pub use region::ForbiddenRegion;
pub(crate) use init::{cloud_size, other_slot};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{gaussian_directions, AnchorFrame, Candidates, ConeSpec, Embedding, Hyperplane};
use crate::report::{recolor_matches, Algorithm, Path, ReconstructionReport};
use crate::scalar::Scalar;
use crate::wl::{ColorId, ColorStore};

#[derive(Debug, Clone)]
pub struct NdConfig {
    pub tol: f64,
    /// Directions used to estimate solid angles.
    pub samples: usize,
    pub seed: u64,
    /// Enhanced profiles to try before giving up.
    pub max_candidates: usize,
    /// Largest forbidden-region depth allowed.
    pub max_depth: usize,
}

impl Default for NdConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            samples: 1 << 13,
            seed: 0,
            max_candidates: usize::MAX,
            max_depth: 1 << 16,
        }
    }
}

/// An enhanced profile proposed as initialization data.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeCandidate {
    /// Index into the profile list.
    pub index: usize,
    /// `AffineDim(b, z_1, …, z_d)`.
    pub dim: usize,
    /// Estimated solid angle of `Cone(z_1 … z_d)` (full-dimensional profiles only).
    pub solid_angle: Option<f64>,
}

/// Profiles of maximal dimension; when that is `d`, sorted by estimated
/// solid angle (one set of directions for all, ties by index).
pub fn select_cone_tuple<T: Scalar>(eps: &[EnhancedProfile<T>], config: &NdConfig) -> Vec<ConeCandidate> {
    let dims: Vec<Option<usize>> = eps
        .par_iter()
        .map(|ep| Embedding::new(&ep.a, config.tol).ok().map(|e| e.rank()))
        .collect();
    let Some(best) = dims.iter().flatten().copied().max() else {
        return Vec::new();
    };
    let d = eps.first().map_or(0, EnhancedProfile::dim);
    let picked = dims.iter().enumerate().filter(|(_, k)| **k == Some(best)).map(|(i, _)| i);
    if best < d {
        return picked
            .map(|index| ConeCandidate {
                index,
                dim: best,
                solid_angle: None,
            })
            .collect();
    }
    let dirs = gaussian_directions(d, config.samples, config.seed);
    let picked: Vec<usize> = picked.collect();
    let mut out: Vec<ConeCandidate> = picked
        .par_iter()
        .filter_map(|&index| {
            let coords = Embedding::new(&eps[index].a, config.tol).ok()?.coords::<f64>(d).ok()?;
            let cone = ConeSpec::new(coords[1..].to_vec(), float_tol(config.tol)).ok()?;
            Some(ConeCandidate {
                index,
                dim: d,
                solid_angle: Some(cone.solid_angle_from(&dirs)),
            })
        })
        .collect();
    out.sort_by(|a, b| a.solid_angle.partial_cmp(&b.solid_angle).expect("finite").then(a.index.cmp(&b.index)));
    out
}

/// Indices into `A` of the anchors of profile `i`: the `z_j` with `b` in slot `i`.
fn slot_indices(i: usize, d: usize) -> Vec<usize> {
    (0..d).map(|j| if j == i { 0 } else { j + 1 }).collect()
}

/// Tolerance for the `f64` geometry built from (possibly exact) distances.
fn float_tol(tol: f64) -> f64 {
    tol.max(1e-9)
}

fn to_f64<T: Scalar>(e: &[T]) -> Vec<f64> {
    e.iter().map(Scalar::approx).collect()
}

/// Recovery when the anchors are affinely dependent: every point lies in
/// the span of some profile's anchors and is trilaterated there.
pub fn reconstruct_lowdim<T: Scalar>(ep: &EnhancedProfile<T>, tol: f64) -> Result<Vec<Vec<f64>>> {
    let d = ep.dim();
    let emb = Embedding::new(&ep.a, tol)?;
    let r = emb.rank();
    let coords = emb.coords::<f64>(d)?;
    let i = (0..d)
        .find(|&i| {
            let keep: Vec<usize> = (0..=d).filter(|&j| j != i + 1).collect();
            Embedding::new(&ep.a.select(&keep), tol).is_ok_and(|e| e.rank() == r)
        })
        .ok_or_else(|| Error::Degenerate("every anchor is needed for the span".into()))?;
    let slots = slot_indices(i, d);
    let anchors: Vec<Vec<f64>> = slots.iter().map(|&j| coords[j].clone()).collect();
    let frame = AnchorFrame::new(&anchors, float_tol(tol))?;
    let sub = Embedding::new(&ep.a.select(&slots), tol)?;
    ep.profiles[i]
        .entries
        .iter()
        .map(|e| {
            let h2 = sub.height_sq(e)?;
            if !sub.negligible(&h2) {
                return Err(Error::Inconsistent(format!(
                    "point {} (squared) off the anchors' span",
                    h2.approx()
                )));
            }
            Ok(frame.foot(&to_f64(e))?.0)
        })
        .collect()
}

/// A profile entry with its candidate positions and, once the forbidden
/// region exists, the greedy depth at which each candidate becomes forbidden.
struct Entry {
    approx: Vec<f64>,
    cands: Candidates<f64>,
    reach: [Option<usize>; 2],
}

/// One profile of a full-dimensional run with its remaining entries.
struct Face {
    anchors: Vec<Vec<f64>>,
    plane: Hyperplane<f64>,
    entries: Vec<Entry>,
}

fn candidates<T: Scalar>(frame: &AnchorFrame<f64>, sub: &Embedding<T>, e: &[T]) -> Result<Candidates<f64>> {
    let h2 = sub.height_sq(e)?;
    let f = to_f64(e);
    if sub.negligible(&h2) {
        return Ok(Candidates::Single(frame.foot(&f)?.0));
    }
    if h2.is_negative() {
        return Err(Error::Inconsistent(format!("negative squared height {}", h2.approx())));
    }
    frame.mirror_pair_with_height(&f, h2.approx())
}

/// Drop the entry describing `p` from every profile.
fn remove_point(faces: &mut [Face], p: &[f64]) -> Result<()> {
    for face in faces.iter_mut() {
        let dists: Vec<f64> = face
            .anchors
            .iter()
            .map(|a| a.iter().zip(p).map(|(x, y)| (x - y) * (x - y)).sum())
            .collect();
        let scale = dists.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let best = face
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let err = e.approx.iter().zip(&dists).map(|(v, w)| (v - w).abs()).fold(0.0, f64::max);
                (k, err)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, err)) if err <= 1e-6 * scale => {
                face.entries.remove(k);
            }
            _ => {
                return Err(Error::Inconsistent(
                    "a placed point matches no entry of another profile".into(),
                ))
            }
        }
    }
    Ok(())
}

/// Counters of a full-dimensional run.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDimRun {
    pub points: Vec<Vec<f64>>,
    /// Points found on a face hyperplane before the elimination.
    pub resident: usize,
    /// Depth levels swept (levels `0 … levels-1`).
    pub levels: usize,
    /// Depth by which every point is provably resolved.
    pub depth_bound: usize,
    pub epsilon: Option<f64>,
    /// Face hyperplanes `P_i`, in the frame of `points`.
    pub planes: Vec<Hyperplane<f64>>,
}

/// Recovery from a full-dimensional profile whose cone has empty interior.
///
/// At depth `k` a pair is resolved when exactly one candidate lies in the
/// greedy part of `A_k`. Walk lengths do not depend on what has been placed,
/// so each is computed once and the sweep jumps between depths where
/// something resolves.
pub fn reconstruct_fulldim<T: Scalar>(ep: &EnhancedProfile<T>, config: &NdConfig) -> Result<FullDimRun> {
    let tol = config.tol;
    let d = ep.dim();
    let emb = Embedding::new(&ep.a, tol)?;
    if emb.rank() != d {
        return Err(Error::Degenerate(format!("anchors span dimension {} < {d}", emb.rank())));
    }
    let coords = emb.coords::<f64>(d)?;
    let ftol = float_tol(tol);
    let cone = ConeSpec::new(coords[1..].to_vec(), ftol)?;
    let mut faces: Vec<Face> = Vec::with_capacity(d);
    for i in 0..d {
        let slots = slot_indices(i, d);
        let anchors: Vec<Vec<f64>> = slots.iter().map(|&j| coords[j].clone()).collect();
        let frame = AnchorFrame::new(&anchors, ftol)?;
        let plane = frame
            .hyperplane()
            .ok_or_else(|| Error::Degenerate("face anchors do not span a hyperplane".into()))?;
        let sub = Embedding::new(&ep.a.select(&slots), tol)?;
        let entries = ep.profiles[i]
            .entries
            .iter()
            .map(|e| {
                Ok(Entry {
                    approx: to_f64(e),
                    cands: candidates(&frame, &sub, e)?,
                    reach: [None; 2],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(Face { anchors, plane, entries });
    }
    if faces.iter().any(|f| f.entries.len() != faces[0].entries.len()) {
        return Err(Error::Inconsistent("profiles have different sizes".into()));
    }

    let mut points = Vec::with_capacity(faces[0].entries.len());
    for i in 0..d {
        while let Some(j) = faces[i].entries.iter().position(|e| matches!(e.cands, Candidates::Single(_))) {
            let p = faces[i].entries[j].cands.first().to_vec();
            remove_point(&mut faces, &p)?;
            points.push(p);
        }
    }
    let resident = points.len();
    let planes: Vec<Hyperplane<f64>> = faces.iter().map(|f| f.plane.clone()).collect();
    if faces[0].entries.is_empty() {
        return Ok(FullDimRun {
            points,
            resident,
            levels: 0,
            depth_bound: 0,
            epsilon: None,
            planes,
        });
    }

    let rho = |x: &[f64]| planes.iter().map(|h| h.signed_distance(x).abs()).fold(f64::INFINITY, f64::min);
    let mut min_rho = f64::INFINITY;
    let mut radius = 0.0f64;
    for e in &faces[0].entries {
        radius = radius.max(e.approx[0].max(0.0).sqrt());
        for c in e.cands.points() {
            let r = rho(&c);
            let scale = 1.0 + c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > ftol.sqrt() * scale {
                min_rho = min_rho.min(r);
            }
        }
    }
    if !min_rho.is_finite() {
        return Err(Error::Inconsistent("every candidate lies on a face hyperplane".into()));
    }
    let epsilon = min_rho / 2.0;
    let region = ForbiddenRegion::new(cone, planes.clone(), epsilon, ftol);
    let depth_bound = region.depth_bound(radius);
    let limit = depth_bound.min(config.max_depth);
    for face in &mut faces {
        face.entries.par_iter_mut().for_each(|e| {
            if let Candidates::Pair(a, b) = &e.cands {
                e.reach = [a, b].map(|c| region.greedy_path(c, limit).map(|p| p.len()));
            }
        });
    }

    let mut levels = 0;
    while !faces[0].entries.is_empty() {
        let next = faces
            .iter()
            .flat_map(|f| &f.entries)
            .flat_map(|e| e.reach.iter().flatten())
            .copied()
            .filter(|&r| r >= levels)
            .min();
        let Some(depth) = next else {
            if depth_bound > config.max_depth {
                return Err(Error::DepthCapExceeded {
                    bound: depth_bound,
                    cap: config.max_depth,
                });
            }
            return Err(Error::Unresolved(format!(
                "{} points still ambiguous at depth {depth_bound}",
                faces[0].entries.len()
            )));
        };
        let within = |r: Option<usize>| r.is_some_and(|r| r <= depth);
        for i in 0..d {
            let mut j = 0;
            while j < faces[i].entries.len() {
                let e = &faces[i].entries[j];
                let keep = match &e.cands {
                    Candidates::Single(p) => Some(p.clone()),
                    Candidates::Pair(a, b) => match (within(e.reach[0]), within(e.reach[1])) {
                        (true, false) => Some(b.clone()),
                        (false, true) => Some(a.clone()),
                        (true, true) => {
                            return Err(Error::Inconsistent("both candidates are forbidden".into()));
                        }
                        (false, false) => None,
                    },
                };
                match keep {
                    Some(p) => {
                        remove_point(&mut faces, &p)?;
                        points.push(p);
                    }
                    None => j += 1,
                }
            }
        }
        levels = depth + 1;
    }
    Ok(FullDimRun {
        points,
        resident,
        levels,
        depth_bound,
        epsilon: Some(epsilon),
        planes,
    })
}

/// Full pipeline on the iteration-3 multiset of `(d-1)`-WL colors: try the
/// proposed enhanced profiles in order and return the first reconstruction
/// whose recoloring reproduces the multiset.
pub fn reconstruct_nd<T: Scalar>(
    store: &ColorStore<T>,
    multiset: &[ColorId],
    d: usize,
    config: &NdConfig,
) -> Result<ReconstructionReport> {
    if d < 3 {
        return Err(Error::ParameterMismatch(format!("this pipeline needs d ≥ 3, got {d}")));
    }
    if multiset.len() == 1 {
        let mut report = ReconstructionReport::new(Algorithm::Nd, Path::Single, vec![vec![0.0; d]]);
        report.colors_verified = recolor_matches(store, multiset, d - 1, &report.points, 1e-6)?;
        return Ok(report);
    }
    let eps: Vec<EnhancedProfile<T>> = enhanced_profiles_from_wl3(store, multiset, config.tol)?
        .into_iter()
        .map(|(ep, _)| ep)
        .collect();
    if eps[0].dim() != d {
        return Err(Error::ParameterMismatch(format!(
            "colors come from {}-WL, expected {}-WL",
            eps[0].dim() - 1,
            d - 1
        )));
    }
    let order = select_cone_tuple(&eps, config);
    let mut tried = 0;
    let mut failure = Error::Unresolved("no enhanced profile is realizable".into());
    for cand in order.iter().take(config.max_candidates) {
        tried += 1;
        let ep = &eps[cand.index];
        let attempt = if cand.dim < d {
            reconstruct_lowdim(ep, config.tol).map(|points| {
                let mut r = ReconstructionReport::new(Algorithm::Nd, Path::LowDim, points);
                r.round_bound = 0;
                r
            })
        } else {
            reconstruct_fulldim(ep, config).map(|run| {
                let mut r = ReconstructionReport::new(Algorithm::Nd, Path::FullDim, run.points);
                r.rounds = run.levels;
                r.round_bound = run.depth_bound + 1;
                r.epsilon = run.epsilon;
                r
            })
        };
        match attempt {
            Ok(mut report) => {
                if recolor_matches(store, multiset, d - 1, &report.points, 1e-6)? {
                    report.colors_verified = true;
                    report.candidates_tried = tried;
                    return Ok(report);
                }
                failure = Error::Unresolved("recolored cloud differs from the input".into());
            }
            Err(e @ Error::DepthCapExceeded { .. }) => failure = e,
            Err(e) => {
                if !matches!(failure, Error::DepthCapExceeded { .. }) {
                    failure = e;
                }
            }
        }
    }
    Err(match failure {
        e @ Error::DepthCapExceeded { .. } => e,
        e => Error::Unresolved(format!("none of {tried} enhanced profiles verified; last failure: {e}")),
    })
}
