//! Reading initialization data off `(d-1)`-WL colors.
//!
//! With `k = d - 1`, a χ⁽¹⁾ tuple color lists, for every `y`, the leaves of
//! `x[y/1] … x[y/k]`; the leaf of `x[y/i]` holds `|y - x_j|²` at `(i, j)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geom::{barycenter_sq_norms, SquaredDistanceMatrix};
use crate::scalar::{int, magnitude, Scalar};
use crate::wl::{Color, ColorId, ColorStore};

/// Multiset of squared distance tuples from a pivot tuple to every cloud
/// point, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile<T> {
    pub entries: Vec<Vec<T>>,
}

impl<T: Scalar> DistanceProfile<T> {
    pub fn new(mut entries: Vec<Vec<T>>) -> Self {
        entries.sort_by(|a, b| a.partial_cmp(b).expect("comparable scalars"));
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `EP(z_1 … z_d)`: the distance matrix of `(b, z_1, …, z_d)` and, for each
/// slot `i`, the profile of the tuple with `z_i` replaced by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedProfile<T> {
    pub a: SquaredDistanceMatrix<T>,
    pub profiles: Vec<DistanceProfile<T>>,
}

impl<T: Scalar> EnhancedProfile<T> {
    pub fn dim(&self) -> usize {
        self.profiles.len()
    }
}

fn tuple_records<T: Scalar>(store: &ColorStore<T>, id: ColorId) -> Result<(usize, &[ColorId])> {
    match store.color(id) {
        Color::Tuple { width, records, .. } => Ok((*width, records)),
        _ => Err(Error::BadColors("expected a tuple color of width at least 2".into())),
    }
}

/// Slot used to read `|y - x_j|²` out of the substituted leaves.
pub(crate) fn other_slot(j: usize) -> usize {
    usize::from(j == 0)
}

/// Decoded colors of one cloud: barycenter distances per χ⁽¹⁾ color and
/// profiles per χ⁽²⁾ color.
#[derive(Debug, Clone)]
pub struct NdDecoder<'a, T: Scalar> {
    store: &'a ColorStore<T>,
    width: usize,
    n: usize,
    radius: HashMap<ColorId, Vec<T>>,
    profiles: HashMap<ColorId, DistanceProfile<T>>,
}

/// `n` with `n^width = len`.
pub(crate) fn cloud_size(len: usize, width: usize) -> Result<usize> {
    let guess = (len as f64).powf(1.0 / width as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1)
        .find(|&n| n >= 1 && n.checked_pow(width as u32) == Some(len))
        .ok_or_else(|| Error::BadColors(format!("{len} tuple colors is not a power of width {width}")))
}

impl<'a, T: Scalar> NdDecoder<'a, T> {
    /// Decode a multiset of `(d-1)`-WL colors from iteration `≥ 1`
    /// (iteration `≥ 2` also yields profiles).
    pub fn new(store: &'a ColorStore<T>, multiset: &[ColorId], tol: f64) -> Result<Self> {
        let Some(&first) = multiset.first() else {
            return Err(Error::EmptyCloud);
        };
        let depth = multiset.iter().map(|&c| store.depth(c)).min().unwrap_or(0);
        if depth < 1 {
            return Err(Error::BadColors("need colors from iteration 1 or later".into()));
        }
        let (width, _) = tuple_records(store, store.ancestor(first, 1))?;
        let n = cloud_size(multiset.len(), width)?;
        let mut dec = Self {
            store,
            width,
            n,
            radius: HashMap::new(),
            profiles: HashMap::new(),
        };
        dec.decode_radius(multiset, tol)?;
        if depth >= 2 {
            let mut chi2: Vec<ColorId> = multiset.iter().map(|&c| store.ancestor(c, 2)).collect();
            chi2.sort_unstable();
            chi2.dedup();
            for c in chi2 {
                let p = dec.profile_of(c)?;
                dec.profiles.insert(c, p);
            }
        }
        Ok(dec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `ℓ = d - 1`.
    pub fn width(&self) -> usize {
        self.width
    }

    fn leaf_entry(&self, id: ColorId, i: usize, j: usize) -> T {
        self.store.value(&self.store.interner().leaf(id)[i * self.width + j])
    }

    /// `f(x_j) = Σ_y |x_j - y|²` for every slot of a χ⁽¹⁾ tuple color.
    fn sums(&self, c1: ColorId) -> Result<Vec<T>> {
        let (width, records) = tuple_records(self.store, c1)?;
        Ok((0..width)
            .map(|j| {
                let i = other_slot(j);
                records
                    .chunks(width)
                    .fold(T::zero(), |acc, chunk| acc + self.leaf_entry(chunk[i], i, j))
            })
            .collect())
    }

    fn decode_radius(&mut self, multiset: &[ColorId], tol: f64) -> Result<()> {
        let mut chi1: Vec<ColorId> = multiset.iter().map(|&c| self.store.ancestor(c, 1)).collect();
        let mut sums: BTreeMap<ColorId, Vec<T>> = BTreeMap::new();
        for &c in &chi1 {
            if !sums.contains_key(&c) {
                sums.insert(c, self.sums(c)?);
            }
        }
        // {f(x_1) : x ∈ S^k} is {f(y) : y ∈ S} with every multiplicity n^(k-1) times larger
        let rep = self.n.pow(self.width as u32 - 1);
        let mut counts: BTreeMap<T::Key, usize> = BTreeMap::new();
        let mut total = T::zero();
        for c in &chi1 {
            let f = sums[c][0].clone();
            *counts.entry(self.store.key(&f)).or_default() += 1;
            total = total + f;
        }
        if let Some((_, m)) = counts.iter().find(|(_, m)| *m % rep != 0) {
            return Err(Error::BadColors(format!(
                "a distance sum occurs {m} times, not a multiple of {rep}"
            )));
        }
        let total = total / int::<T>(rep);
        chi1.sort_unstable();
        chi1.dedup();
        let scale = magnitude(std::iter::once(total.clone()));
        for c in chi1 {
            let norms = barycenter_sq_norms(&sums[&c], &total, self.n, tol * scale)?;
            self.radius.insert(c, norms);
        }
        Ok(())
    }

    /// `(|x_1 - b|², …, |x_k - b|²)` for a tuple with χ⁽¹⁾ color (or a later
    /// color descending from it).
    pub fn radius(&self, id: ColorId) -> Result<&[T]> {
        let c1 = self.store.ancestor(id, 1);
        self.radius
            .get(&c1)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::BadColors("color outside the decoded multiset".into()))
    }

    /// Profile of `(b, x_1, …, x_k)`: entries `(|y-b|², |y-x_1|², …)`.
    fn profile_of(&self, c2: ColorId) -> Result<DistanceProfile<T>> {
        let (width, records) = tuple_records(self.store, c2)?;
        let mut entries = Vec::with_capacity(records.len() / width);
        for chunk in records.chunks(width) {
            let mut e = Vec::with_capacity(width + 1);
            e.push(self.radius(chunk[0])?[0].clone());
            for j in 0..width {
                let i = other_slot(j);
                e.push(self.leaf_entry(chunk[i], i, j));
            }
            entries.push(e);
        }
        Ok(DistanceProfile::new(entries))
    }

    /// Profile of `(b, x_1, …, x_k)` for a tuple with χ⁽²⁾ color (or later).
    pub fn profile(&self, id: ColorId) -> Result<&DistanceProfile<T>> {
        let c2 = self.store.ancestor(id, 2);
        self.profiles
            .get(&c2)
            .ok_or_else(|| Error::BadColors("no iteration-2 profile for this color".into()))
    }

    /// `EP(x_1, …, x_k, y)` from the χ⁽³⁾ color of `x` and the record of `y`
    /// (the χ⁽²⁾ colors of `x[y/1] … x[y/k]`).
    fn enhanced(&self, c3: ColorId, chunk: &[ColorId]) -> Result<EnhancedProfile<T>> {
        let k = self.width;
        let d = k + 1;
        let c0 = self.store.ancestor(c3, 0);
        let rx = self.radius(c3)?;
        let ry = self.radius(chunk[0])?[0].clone();
        // points of A: 0 = b, 1..=k = x, d = y
        let mut a = vec![T::zero(); (d + 1) * (d + 1)];
        let mut set = |i: usize, j: usize, v: T| {
            a[i * (d + 1) + j] = v.clone();
            a[j * (d + 1) + i] = v;
        };
        for j in 0..k {
            set(0, j + 1, rx[j].clone());
            for m in 0..j {
                set(m + 1, j + 1, self.leaf_entry(c0, m, j));
            }
            let i = other_slot(j);
            set(j + 1, d, self.leaf_entry(chunk[i], i, j));
        }
        set(0, d, ry);
        let a = SquaredDistanceMatrix::new(d + 1, a)?;

        let mut profiles = Vec::with_capacity(d);
        for (i, &sub) in chunk.iter().enumerate() {
            // profile of (b, x_1, …, y at i, …, x_k) reordered to (x_1, …, b at i, …, x_k, y)
            let entries = self
                .profile(sub)?
                .entries
                .iter()
                .map(|e| {
                    let mut out: Vec<T> = (0..k).map(|j| if j == i { e[0].clone() } else { e[j + 1].clone() }).collect();
                    out.push(e[i + 1].clone());
                    out
                })
                .collect();
            profiles.push(DistanceProfile::new(entries));
        }
        let own = self
            .profile(c3)?
            .entries
            .iter()
            .map(|e| {
                let mut out = e[1..].to_vec();
                out.push(e[0].clone());
                out
            })
            .collect();
        profiles.push(DistanceProfile::new(own));
        Ok(EnhancedProfile { a, profiles })
    }
}

/// Barycenter distances `(|x_1-b|², …, |x_k-b|²)` for every tuple of the
/// cloud, in tuple order, from the iteration-`≥1` colors in tuple order.
pub fn barycenter_dists_from_wl1<T: Scalar>(store: &ColorStore<T>, table: &[ColorId], tol: f64) -> Result<Vec<Vec<T>>> {
    let dec = NdDecoder::new(store, table, tol)?;
    table.iter().map(|&c| dec.radius(c).map(<[T]>::to_vec)).collect()
}

/// Profile of `(b, x_1, …, x_k)` for every tuple, in tuple order.
pub fn profiles_from_wl2<T: Scalar>(store: &ColorStore<T>, table: &[ColorId], tol: f64) -> Result<Vec<DistanceProfile<T>>> {
    let dec = NdDecoder::new(store, table, tol)?;
    table.iter().map(|&c| dec.profile(c).cloned()).collect()
}

/// Distinct enhanced profiles of all `d`-tuples with their multiplicities
/// (summing to `n^d`), in canonical order: by the digest of the χ⁽³⁾ color
/// of the first `d-1` points, then by record.
pub fn enhanced_profiles_from_wl3<T: Scalar>(
    store: &ColorStore<T>,
    multiset: &[ColorId],
    tol: f64,
) -> Result<Vec<(EnhancedProfile<T>, usize)>> {
    let dec = NdDecoder::new(store, multiset, tol)?;
    if multiset.iter().any(|&c| store.depth(c) < 3) {
        return Err(Error::BadColors("need colors from iteration 3".into()));
    }
    let mut counts: BTreeMap<ColorId, usize> = BTreeMap::new();
    for &c in multiset {
        *counts.entry(store.ancestor(c, 3)).or_default() += 1;
    }
    let mut chi3: Vec<(ColorId, usize)> = counts.into_iter().collect();
    chi3.sort_by(|a, b| store.digest(a.0).cmp(store.digest(b.0)));
    let mut out = Vec::new();
    for (c3, mult) in chi3 {
        let (width, records) = tuple_records(store, c3)?;
        let mut chunks: Vec<&[ColorId]> = records.chunks(width).collect();
        chunks.sort_by(|a, b| {
            a.iter()
                .map(|&c| store.digest(c))
                .cmp(b.iter().map(|&c| store.digest(c)))
        });
        let mut i = 0;
        while i < chunks.len() {
            let mut j = i + 1;
            while j < chunks.len() && chunks[j] == chunks[i] {
                j += 1;
            }
            out.push((dec.enhanced(c3, chunks[i])?, mult * (j - i)));
            i = j;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::barycenter;
    use crate::oracle::random_cloud;
    use crate::wl::{decode_tuple, run_wl, WlConfig};
    use crate::{PointCloud, Rational};

    fn sqd(p: &[Rational], q: &[Rational]) -> Rational {
        p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Enhanced profile of a `d`-tuple computed from coordinates.
    fn direct_ep(c: &PointCloud<Rational>, tuple: &[usize]) -> EnhancedProfile<Rational> {
        let d = tuple.len();
        let b = barycenter(c);
        let mut pts = vec![b.clone()];
        pts.extend(tuple.iter().map(|&i| c.points()[i].clone()));
        let a = SquaredDistanceMatrix::from_points(&pts).unwrap();
        let profiles = (0..d)
            .map(|i| {
                let anchors: Vec<&Vec<Rational>> = (0..d).map(|j| if j == i { &b } else { &pts[j + 1] }).collect();
                DistanceProfile::new(c.points().iter().map(|p| anchors.iter().map(|q| sqd(p, q)).collect()).collect())
            })
            .collect();
        EnhancedProfile { a, profiles }
    }

    fn check_eps(c: &PointCloud<Rational>) {
        let d = c.dim();
        let n = c.len();
        let (store, h) = run_wl(c, d - 1, 3, &WlConfig::default()).unwrap();
        let decoded = enhanced_profiles_from_wl3(&store, &h.top(), 0.0).unwrap();
        assert_eq!(decoded.iter().map(|(_, m)| m).sum::<usize>(), n.pow(d as u32));

        let mut direct: Vec<(EnhancedProfile<Rational>, usize)> = Vec::new();
        for idx in 0..n.pow(d as u32) {
            let ep = direct_ep(c, &decode_tuple(idx, n, d));
            match direct.iter_mut().find(|(e, _)| *e == ep) {
                Some((_, m)) => *m += 1,
                None => direct.push((ep, 1)),
            }
        }
        for (ep, m) in &direct {
            let got: usize = decoded.iter().filter(|(e, _)| e == ep).map(|(_, k)| k).sum();
            assert_eq!(got, *m);
        }
    }

    #[test]
    fn enhanced_profiles_match_coordinates() {
        for seed in 0..6 {
            check_eps(&random_cloud::<Rational>(4 + (seed as usize % 2), 3, seed, 6));
        }
        check_eps(&random_cloud::<Rational>(4, 4, 11, 4));
    }

    #[test]
    fn barycenter_dists_match_coordinates() {
        let c = random_cloud::<Rational>(5, 3, 3, 8);
        let n = c.len();
        let b = barycenter(&c);
        let (store, h) = run_wl(&c, 2, 1, &WlConfig::default()).unwrap();
        let got = barycenter_dists_from_wl1(&store, &h.tables[1], 0.0).unwrap();
        for (idx, r) in got.iter().enumerate() {
            let t = decode_tuple(idx, n, 2);
            let want: Vec<Rational> = t.iter().map(|&i| sqd(&c.points()[i], &b)).collect();
            assert_eq!(r, &want);
        }
    }

    #[test]
    fn float_profiles_agree_with_exact() {
        let c = random_cloud::<Rational>(5, 3, 5, 8);
        let f = PointCloud::<f64>::new(3, c.points().iter().map(|p| p.iter().map(Scalar::approx).collect()).collect()).unwrap();
        let (se, he) = run_wl(&c, 2, 2, &WlConfig::default()).unwrap();
        let (sf, hf) = run_wl(&f, 2, 2, &WlConfig::default()).unwrap();
        let pe = profiles_from_wl2(&se, &he.tables[2], 0.0).unwrap();
        let pf = profiles_from_wl2(&sf, &hf.tables[2], 1e-9).unwrap();
        for (a, b) in pe.iter().zip(&pf) {
            for (ea, eb) in a.entries.iter().zip(&b.entries) {
                for (x, y) in ea.iter().zip(eb) {
                    assert!((x.approx() - y).abs() < 1e-6);
                }
            }
        }
    }
}
