//! Planar reconstruction from three iterations of 1-WL.
//!
//! Everything is expressed relative to the barycenter `b`, placed at the
//! origin. Distances are squared throughout; `‖y‖²` means `|y - b|²`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geom::barycenter_sq_norms;
use crate::report::{recolor_matches, Algorithm, Path, ReconstructionReport};
use crate::scalar::{magnitude, Scalar};
use crate::wl::{Color, ColorId, ColorStore};

/// Squared distance to a pivot and squared norm, one per cloud point.
pub type Profile<T> = Vec<(T, T)>;

/// `(d(u,v)², M_u, M_v)` for a pivot pair satisfying the cone condition.
#[derive(Debug, Clone, PartialEq)]
pub struct InitData2D<T> {
    pub d0: T,
    pub m: Profile<T>,
    pub m_prime: Profile<T>,
}

fn sort_profile<T: Scalar>(p: &mut Profile<T>) {
    p.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
}

/// Distinct iteration-`depth` ancestors of a multiset of colors.
fn ancestors<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], depth: u32) -> Vec<ColorId> {
    multiset.iter().map(|&c| store.ancestor(c, depth)).collect()
}

fn point_records<T: Scalar>(store: &ColorStore<T>, id: ColorId) -> Result<&[(T::Key, ColorId)]> {
    match store.color(id) {
        Color::Point { records, .. } => Ok(records),
        _ => Err(Error::BadColors("expected a 1-WL color".into())),
    }
}

fn check_depth<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], needed: u32) -> Result<()> {
    if multiset.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if let Some(&c) = multiset.iter().find(|&&c| store.depth(c) < needed) {
        return Err(Error::BadColors(format!(
            "need colors from iteration {needed}, got one from iteration {}",
            store.depth(c)
        )));
    }
    Ok(())
}

/// Squared distance to the barycenter for every iteration-1 color of the cloud.
pub fn norms_from_chi1<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<BTreeMap<ColorId, T>> {
    check_depth(store, multiset, 1)?;
    let chi1 = ancestors(store, multiset, 1);
    let mut f: BTreeMap<ColorId, T> = BTreeMap::new();
    for &c in &chi1 {
        if !f.contains_key(&c) {
            let sum = point_records(store, c)?
                .iter()
                .fold(T::zero(), |acc, (k, _)| acc + store.value(k));
            f.insert(c, sum);
        }
    }
    let total = chi1.iter().fold(T::zero(), |acc, c| acc + f[c].clone());
    let ids: Vec<ColorId> = f.keys().copied().collect();
    let values: Vec<T> = ids.iter().map(|c| f[c].clone()).collect();
    let scale = magnitude(std::iter::once(total.clone()));
    let norms = barycenter_sq_norms(&values, &total, chi1.len(), tol * scale)?;
    Ok(ids.into_iter().zip(norms).collect())
}

/// `M_x = {(d(x,y)², ‖y‖²)}` for every iteration-2 color of the cloud.
pub fn profiles_from_chi2<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<BTreeMap<ColorId, Profile<T>>> {
    check_depth(store, multiset, 2)?;
    let norms = norms_from_chi1(store, multiset, tol)?;
    let mut out = BTreeMap::new();
    for c in ancestors(store, multiset, 2) {
        if out.contains_key(&c) {
            continue;
        }
        let mut m: Profile<T> = point_records(store, c)?
            .iter()
            .map(|(k, y1)| {
                let norm = norms
                    .get(y1)
                    .cloned()
                    .ok_or_else(|| Error::BadColors("neighbor color missing from the multiset".into()))?;
                Ok((store.value(k), norm))
            })
            .collect::<Result<_>>()?;
        sort_profile(&mut m);
        out.insert(c, m);
    }
    Ok(out)
}

/// The squared norm of the pivot, read off the entry at distance zero.
fn pivot_norm<T: Scalar>(m: &Profile<T>) -> Result<T> {
    let mut zero = m.iter().filter(|(d, _)| d.is_zero());
    match (zero.next(), zero.next()) {
        (Some((_, q)), None) => Ok(q.clone()),
        _ => Err(Error::Inconsistent("profile must contain exactly one entry at distance 0".into())),
    }
}

/// `4‖u‖²‖y‖² - (‖u‖² + ‖y‖² - d(u,y)²)²`, which is `16·area²` of the
/// triangle `(b, u, y)`; zero exactly when `y` lies on the line `bu`.
fn height_numerator<T: Scalar>(u2: &T, q: &T, d: &T) -> (T, T) {
    let four = T::from_ratio(4, 1);
    let p = u2.clone() + q.clone() - d.clone();
    (four * u2.clone() * q.clone() - p.clone() * p.clone(), p)
}

/// Order on `cos α_uy = p / (2‖u‖√q)` without square roots: compares
/// `p1/√q1` with `p2/√q2`.
fn cos_cmp<T: Scalar>(p1: &T, q1: &T, p2: &T, q2: &T) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    let s1 = if p1.is_positive() { 1 } else if p1.is_negative() { -1 } else { 0 };
    let s2 = if p2.is_positive() { 1 } else if p2.is_negative() { -1 } else { 0 };
    if s1 != s2 {
        return s1.cmp(&s2);
    }
    if s1 == 0 {
        return Equal;
    }
    // same sign: compare p1² q2 with p2² q1, flipped for negatives
    let a = p1.clone() * p1.clone() * q2.clone();
    let b = p2.clone() * p2.clone() * q1.clone();
    let ord = a.partial_cmp(&b).unwrap_or(Equal);
    if s1 > 0 {
        ord
    } else {
        ord.reverse()
    }
}

/// Pick the pivots `u`, `v` and read off the initialization data from the
/// iteration-3 multiset.
pub fn init2d<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<InitData2D<T>> {
    check_depth(store, multiset, 3)?;
    if multiset.len() < 2 {
        return Err(Error::Degenerate("a single point needs no initialization".into()));
    }
    let norms = norms_from_chi1(store, multiset, tol)?;
    let profiles = profiles_from_chi2(store, multiset, tol)?;
    let scale = magnitude(norms.values().cloned());
    let mut chi3: Vec<ColorId> = multiset.iter().map(|&c| store.ancestor(c, 3)).collect();
    chi3.sort_by(|a, b| store.digest(*a).cmp(store.digest(*b)));
    let u = chi3
        .into_iter()
        .find(|&c| !norms[&store.ancestor(c, 1)].is_negligible(tol * scale))
        .ok_or_else(|| Error::Degenerate("every point sits at the barycenter".into()))?;
    let m_u = profiles[&store.ancestor(u, 2)].clone();
    let u2 = pivot_norm(&m_u)?;

    let mut best: Option<(T, T, T, ColorId)> = None;
    for (d, y2) in point_records(store, u)? {
        let d = store.value(d);
        if d.is_zero() {
            continue;
        }
        let m_y = &profiles[y2];
        let q = pivot_norm(m_y)?;
        if q.is_negligible(tol * scale) {
            continue;
        }
        let (h, p) = height_numerator(&u2, &q, &d);
        let area_scale = 4.0 * u2.approx() * q.approx();
        if !h.is_positive_beyond(tol * area_scale.max(1.0)) {
            continue; // angle 0 or π
        }
        let better = match &best {
            None => true,
            Some((bp, bq, _, bc)) => match cos_cmp(&p, &q, bp, bq) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => store.digest(*y2) < store.digest(*bc),
                std::cmp::Ordering::Less => false,
            },
        };
        if better {
            best = Some((p, q, d, *y2));
        }
    }
    Ok(match best {
        Some((_, _, d, v2)) => InitData2D {
            d0: d,
            m: m_u,
            m_prime: profiles[&v2].clone(),
        },
        None => InitData2D {
            d0: T::zero(),
            m: m_u.clone(),
            m_prime: m_u,
        },
    })
}

/// Closed angular intervals known to be free of unplaced points.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularForbiddenSet {
    /// Disjoint, sorted sub-intervals of `[0, 2π]`.
    intervals: Vec<(f64, f64)>,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl AngularForbiddenSet {
    /// The closed sector from angle `from` counter-clockwise to `to`.
    pub fn sector(from: f64, to: f64) -> Self {
        let mut s = Self { intervals: Vec::new() };
        s.add(from, to);
        s
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    fn add(&mut self, from: f64, to: f64) {
        let width = to - from;
        if width >= TAU {
            self.intervals = vec![(0.0, TAU)];
            return;
        }
        let a = wrap(from);
        let b = a + width;
        if b > TAU {
            self.intervals.push((a, TAU));
            self.intervals.push((0.0, b - TAU));
        } else {
            self.intervals.push((a, b));
        }
        self.normalize();
    }

    fn normalize(&mut self) {
        self.intervals.sort_by(|x, y| x.partial_cmp(y).expect("finite angles"));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &self.intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        self.intervals = merged;
    }

    /// Mirror image across the line through the origin at angle `phi`.
    pub fn reflected(&self, phi: f64) -> Self {
        let mut out = Self { intervals: Vec::new() };
        for &(a, b) in &self.intervals {
            out.add(2.0 * phi - b, 2.0 * phi - a);
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.intervals.extend_from_slice(&other.intervals);
        out.normalize();
        out
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn is_full(&self) -> bool {
        self.measure() >= TAU - 1e-12
    }

    /// Membership with the intervals widened by `tol` on both ends.
    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        let t = wrap(theta);
        self.intervals.iter().any(|&(a, b)| {
            (a - tol <= t && t <= b + tol) || (a - tol <= t - TAU && t - TAU <= b + tol) || (a - tol <= t + TAU && t + TAU <= b + tol)
        })
    }
}

/// Recovered planar cloud with the counters of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Recon2d {
    pub points: Vec<Vec<f64>>,
    /// Angle between the pivots (0 in the collinear case).
    pub alpha: f64,
    /// Elimination rounds used.
    pub rounds: usize,
    /// `⌈1 + π/α⌉`, or 0 when no rounds are needed.
    pub bound: usize,
    /// Measure of the forbidden set at the start of each round.
    pub measures: Vec<f64>,
    /// Points placed before the elimination rounds.
    pub on_line: usize,
}

struct Entry<T> {
    d: T,
    q: T,
}

/// Placement of a profile entry relative to a pivot at angle `phi` with
/// squared norm `p2`: `(x along the pivot, h ≥ 0 across, exact on-line flag)`.
fn locate_entry<T: Scalar>(p2: &T, e: &Entry<T>, tol: f64) -> (f64, f64, bool) {
    let (h, p) = height_numerator(p2, &e.q, &e.d);
    let scale = (4.0 * p2.approx() * e.q.approx()).max(1.0);
    let pn = p2.approx().sqrt();
    let x = p.approx() / (2.0 * pn);
    let on_line = h.is_negligible(tol * scale) || !h.is_positive();
    if on_line && h.is_negative_beyond(tol * scale) {
        return (x, f64::NAN, true);
    }
    let h2 = if on_line { 0.0 } else { h.approx() / (4.0 * p2.approx()) };
    (x, h2.max(0.0).sqrt(), on_line)
}

fn at(phi: f64, x: f64, y: f64) -> Vec<f64> {
    let (s, c) = phi.sin_cos();
    vec![x * c - y * s, x * s + y * c]
}

fn sqd(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Remove the entry of `profile` describing the point at squared norm `q`
/// and (approximate) squared distance `d` to the pivot.
fn remove_match<T: Scalar>(profile: &mut Vec<Entry<T>>, q: &T, d: f64, tol: f64) -> Result<()> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in profile.iter().enumerate() {
        let dq = (e.q.clone() - q.clone()).approx().abs();
        if dq > 1e-6 * q.approx().abs().max(1.0) && !(e.q == *q) {
            continue;
        }
        let err = (e.d.approx() - d).abs() + dq;
        if best.is_none_or(|(_, b)| err < b) {
            best = Some((i, err));
        }
    }
    match best {
        Some((i, err)) if err <= (1e-6f64).max(tol) * d.abs().max(1.0) => {
            profile.remove(i);
            Ok(())
        }
        _ => Err(Error::Inconsistent(format!(
            "no profile entry matches a placed point (squared distance {d})"
        ))),
    }
}

/// Rebuild the cloud (barycenter at the origin) from initialization data.
pub fn reconstruct2d<T: Scalar>(init: &InitData2D<T>, tol: f64) -> Result<Recon2d> {
    let n = init.m.len();
    if n != init.m_prime.len() {
        return Err(Error::Inconsistent("profiles have different sizes".into()));
    }
    let u2 = pivot_norm(&init.m)?;
    let v2 = pivot_norm(&init.m_prime)?;
    if n == 1 {
        return Ok(Recon2d {
            points: vec![vec![0.0, 0.0]],
            alpha: 0.0,
            rounds: 0,
            bound: 0,
            measures: Vec::new(),
            on_line: 1,
        });
    }
    if u2.is_zero() || v2.is_zero() {
        return Err(Error::Degenerate("pivots must differ from the barycenter".into()));
    }
    let mut m: Vec<Entry<T>> = init.m.iter().map(|(d, q)| Entry { d: d.clone(), q: q.clone() }).collect();
    let mut mp: Vec<Entry<T>> = init.m_prime.iter().map(|(d, q)| Entry { d: d.clone(), q: q.clone() }).collect();

    let (vx, vh, v_on_line) = locate_entry(&u2, &Entry { d: init.d0.clone(), q: v2.clone() }, tol);
    if vh.is_nan() {
        return Err(Error::Inconsistent("pivot distances violate the triangle inequality".into()));
    }
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);

    if v_on_line {
        for e in &m {
            let (x, h, on) = locate_entry(&u2, e, tol);
            if !on || h.is_nan() {
                return Err(Error::Inconsistent("collinear pivots but a point off their line".into()));
            }
            points.push(vec![x, 0.0]);
        }
        return Ok(Recon2d {
            points,
            alpha: 0.0,
            rounds: 0,
            bound: 0,
            measures: Vec::new(),
            on_line: n,
        });
    }

    let u = vec![u2.approx().sqrt(), 0.0];
    let v = vec![vx, vh];
    let alpha = vh.atan2(vx);
    // phase 1: points on the pivot lines have a single candidate
    let mut i = 0;
    while i < m.len() {
        let (x, h, on) = locate_entry(&u2, &m[i], tol);
        if h.is_nan() {
            return Err(Error::Inconsistent("profile entry violates the triangle inequality".into()));
        }
        if on {
            let e = m.remove(i);
            let p = vec![x, 0.0];
            remove_match(&mut mp, &e.q, sqd(&p, &v), tol)?;
            points.push(p);
        } else {
            i += 1;
        }
    }
    let mut i = 0;
    while i < mp.len() {
        let (x, h, on) = locate_entry(&v2, &mp[i], tol);
        if h.is_nan() {
            return Err(Error::Inconsistent("profile entry violates the triangle inequality".into()));
        }
        if on {
            let e = mp.remove(i);
            let p = at(alpha, x, 0.0);
            remove_match(&mut m, &e.q, sqd(&p, &u), tol)?;
            points.push(p);
        } else {
            i += 1;
        }
    }
    let on_line = points.len();

    let bound = (1.0 + PI / alpha).ceil() as usize;
    let angle_tol = 1e-9;
    let mut forbidden = AngularForbiddenSet::sector(0.0, alpha);
    let mut measures = Vec::new();
    let mut rounds = 0;
    while !m.is_empty() {
        if rounds >= bound {
            break;
        }
        rounds += 1;
        measures.push(forbidden.measure());
        let mut i = 0;
        while i < m.len() {
            let (x, h, _) = locate_entry(&u2, &m[i], tol);
            let (a, b) = (at(0.0, x, h), at(0.0, x, -h));
            if let Some(p) = pick(&forbidden, &a, &b, angle_tol) {
                let e = m.remove(i);
                remove_match(&mut mp, &e.q, sqd(&p, &v), tol)?;
                points.push(p);
            } else {
                i += 1;
            }
        }
        let mut i = 0;
        while i < mp.len() {
            let (x, h, _) = locate_entry(&v2, &mp[i], tol);
            let (a, b) = (at(alpha, x, h), at(alpha, x, -h));
            if let Some(p) = pick(&forbidden, &a, &b, angle_tol) {
                let e = mp.remove(i);
                remove_match(&mut m, &e.q, sqd(&p, &u), tol)?;
                points.push(p);
            } else {
                i += 1;
            }
        }
        forbidden = forbidden.union(&forbidden.reflected(0.0)).union(&forbidden.reflected(alpha));
    }
    if !m.is_empty() {
        return Err(Error::Unresolved(format!(
            "{} points still ambiguous after {rounds} rounds (bound {bound})",
            m.len()
        )));
    }
    Ok(Recon2d {
        points,
        alpha,
        rounds,
        bound,
        measures,
        on_line,
    })
}

/// The candidate to keep when exactly one of the two is forbidden. Angles
/// within `tol` of the forbidden set count as inside, so a candidate on its
/// boundary only decides the point when the mirror is clearly outside.
fn pick(forbidden: &AngularForbiddenSet, a: &[f64], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let ta = a[1].atan2(a[0]);
    let tb = b[1].atan2(b[0]);
    let a_in = forbidden.contains(ta, tol);
    let b_in = forbidden.contains(tb, tol);
    match (a_in, b_in) {
        (true, false) => Some(b.to_vec()),
        (false, true) => Some(a.to_vec()),
        _ => None,
    }
}

/// Full planar pipeline on iteration-3 1-WL colors.
pub fn reconstruct_from_colors<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<Recon2d> {
    if multiset.len() == 1 {
        return reconstruct2d(
            &InitData2D {
                d0: T::zero(),
                m: vec![(T::zero(), T::zero())],
                m_prime: vec![(T::zero(), T::zero())],
            },
            tol,
        );
    }
    let init = init2d(store, multiset, tol)?;
    reconstruct2d(&init, tol)
}

/// [`reconstruct_from_colors`] with the result checked by recoloring.
pub fn reconstruct_planar<T: Scalar>(store: &ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<ReconstructionReport> {
    let r = reconstruct_from_colors(store, multiset, tol)?;
    let path = if r.points.len() == 1 {
        Path::Single
    } else if r.alpha == 0.0 {
        Path::Collinear
    } else {
        Path::Rounds
    };
    let verified = recolor_matches(store, multiset, 1, &r.points, 1e-6)?;
    let mut report = ReconstructionReport::new(Algorithm::Planar, path, r.points);
    report.colors_verified = verified;
    report.rounds = r.rounds;
    report.round_bound = r.bound;
    Ok(report)
}
