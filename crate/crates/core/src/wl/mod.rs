//! The geometric ℓ-WL refinement.
//!
//! Tuples of `S^ℓ` are indexed row-major by point index, so tuple `x` has
//! index `sum_i x_i n^(ℓ-1-i)` and `x[y/i]` is reached by adding
//! `(y - x_i) n^(ℓ-1-i)`.

mod color;
mod fingerprint;

pub use color::{Color, ColorDigest, ColorId, Interner};
pub use fingerprint::{compare, Fingerprint, Verdict};

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::sq_dist;
use crate::scalar::Scalar;

/// Knobs for a coloring run.
#[derive(Debug, Clone)]
pub struct WlConfig {
    /// Grid step for float distances (ignored by the exact backend).
    pub quantum: f64,
    /// Largest admissible `n^ℓ`.
    pub max_tuples: u128,
    /// Build candidate colors on the rayon pool.
    pub parallel: bool,
}

impl Default for WlConfig {
    fn default() -> Self {
        Self {
            quantum: 1e-9,
            max_tuples: 1 << 22,
            parallel: true,
        }
    }
}

/// Squared distance keys between all pairs of points.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKeys<K> {
    n: usize,
    keys: Vec<K>,
}

impl<K: Clone> PairKeys<K> {
    /// From a row-major `n×n` matrix.
    pub fn new(n: usize, keys: Vec<K>) -> Self {
        assert_eq!(keys.len(), n * n);
        Self { n, keys }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &K {
        &self.keys[i * self.n + j]
    }
}

/// Per-iteration color tables of one cloud.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlHistory {
    pub ell: usize,
    pub n: usize,
    /// `tables[t][tuple]` is the color of `tuple` after `t` iterations.
    pub tables: Vec<Vec<ColorId>>,
}

impl WlHistory {
    pub fn iterations(&self) -> usize {
        self.tables.len() - 1
    }

    /// Sorted color ids after `t` iterations.
    pub fn multiset(&self, t: usize) -> Vec<ColorId> {
        let mut m = self.tables[t].clone();
        m.sort_unstable();
        m
    }

    pub fn top(&self) -> Vec<ColorId> {
        self.multiset(self.iterations())
    }

    /// Number of color classes at each iteration.
    pub fn class_counts(&self) -> Vec<usize> {
        self.tables
            .iter()
            .map(|t| {
                let mut m = t.clone();
                m.sort_unstable();
                m.dedup();
                m.len()
            })
            .collect()
    }
}

/// Number of tuples, checked against the cap.
pub fn tuple_count(n: usize, ell: usize, cap: u128) -> Result<usize> {
    let size = (n as u128).checked_pow(ell as u32).unwrap_or(u128::MAX);
    if size > cap || size > usize::MAX as u128 {
        return Err(Error::TupleCapExceeded { size, cap });
    }
    Ok(size as usize)
}

/// Point indices of a tuple.
pub fn decode_tuple(mut idx: usize, n: usize, ell: usize) -> Vec<usize> {
    let mut x = vec![0; ell];
    for slot in (0..ell).rev() {
        x[slot] = idx % n;
        idx /= n;
    }
    x
}

pub fn encode_tuple(x: &[usize], n: usize) -> usize {
    x.iter().fold(0, |acc, &i| acc * n + i)
}

/// Interner plus the scalar conventions used to build keys.
#[derive(Debug, Clone)]
pub struct ColorStore<T: Scalar> {
    interner: Interner<T::Key>,
    quantum: f64,
}

impl<T: Scalar> ColorStore<T> {
    pub fn new(quantum: f64) -> Self {
        Self {
            interner: Interner::default(),
            quantum,
        }
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn interner(&self) -> &Interner<T::Key> {
        &self.interner
    }

    pub fn color(&self, id: ColorId) -> &Color<T::Key> {
        self.interner.get(id)
    }

    pub fn digest(&self, id: ColorId) -> &ColorDigest {
        self.interner.digest(id)
    }

    pub fn depth(&self, id: ColorId) -> u32 {
        self.interner.depth(id)
    }

    pub fn ancestor(&self, id: ColorId, depth: u32) -> ColorId {
        self.interner.ancestor(id, depth)
    }

    pub fn key(&self, value: &T) -> T::Key {
        value.key(self.quantum)
    }

    pub fn value(&self, key: &T::Key) -> T {
        T::from_key(key, self.quantum)
    }

    /// Squared distance matrix (row-major `ℓ×ℓ`) under a color.
    pub fn leaf_values(&self, id: ColorId) -> Vec<T> {
        self.interner.leaf(id).iter().map(|k| self.value(k)).collect()
    }

    fn intern(&mut self, color: Color<T::Key>) -> ColorId {
        self.interner.intern(color, T::write_key)
    }

    pub fn pair_keys(&self, cloud: &PointCloud<T>) -> PairKeys<T::Key> {
        let n = cloud.len();
        let mut keys = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                keys.push(self.key(&sq_dist(cloud.point(i), cloud.point(j))));
            }
        }
        PairKeys::new(n, keys)
    }

    /// Iteration-0 colors: each tuple's squared distance matrix.
    pub fn initial_coloring(&mut self, keys: &PairKeys<T::Key>, ell: usize, config: &WlConfig) -> Result<Vec<ColorId>> {
        let n = keys.n();
        let total = tuple_count(n, ell, config.max_tuples)?;
        let build = |idx: usize| {
            let x = decode_tuple(idx, n, ell);
            let mut m = Vec::with_capacity(ell * ell);
            for &a in &x {
                for &b in &x {
                    m.push(keys.get(a, b).clone());
                }
            }
            Color::Leaf(m)
        };
        Ok(self.intern_all(total, config.parallel, build))
    }

    /// One refinement step.
    pub fn refine(&mut self, keys: &PairKeys<T::Key>, ell: usize, prev: &[ColorId], config: &WlConfig) -> Result<Vec<ColorId>> {
        let n = keys.n();
        let total = tuple_count(n, ell, config.max_tuples)?;
        if prev.len() != total {
            return Err(Error::BadColors(format!("expected {total} tuple colors, got {}", prev.len())));
        }
        let strides: Vec<usize> = (0..ell).map(|i| n.pow((ell - 1 - i) as u32)).collect();
        let build = |idx: usize| {
            if ell == 1 {
                Color::Point {
                    prev: prev[idx],
                    records: (0..n).map(|y| (keys.get(idx, y).clone(), prev[y])).collect(),
                }
            } else {
                let x = decode_tuple(idx, n, ell);
                let mut records = Vec::with_capacity(n * ell);
                for y in 0..n {
                    for i in 0..ell {
                        let sub = idx + y * strides[i] - x[i] * strides[i];
                        records.push(prev[sub]);
                    }
                }
                Color::Tuple {
                    prev: prev[idx],
                    width: ell,
                    records,
                }
            }
        };
        Ok(self.intern_all(total, config.parallel, build))
    }

    fn intern_all(&mut self, total: usize, parallel: bool, build: impl Fn(usize) -> Color<T::Key> + Sync) -> Vec<ColorId> {
        // colors are built in parallel, interned in tuple order so ids are deterministic
        let colors: Vec<Color<T::Key>> = if parallel {
            (0..total).into_par_iter().map(&build).collect()
        } else {
            (0..total).map(&build).collect()
        };
        colors.into_iter().map(|c| self.intern(c)).collect()
    }

    /// Initial coloring plus `iters` refinements on a key matrix.
    pub fn run_on_keys(&mut self, keys: &PairKeys<T::Key>, ell: usize, iters: usize, config: &WlConfig) -> Result<WlHistory> {
        if ell == 0 {
            return Err(Error::ParameterMismatch("ell must be positive".into()));
        }
        let mut tables = vec![self.initial_coloring(keys, ell, config)?];
        for _ in 0..iters {
            let next = self.refine(keys, ell, tables.last().expect("non-empty"), config)?;
            tables.push(next);
        }
        Ok(WlHistory {
            ell,
            n: keys.n(),
            tables,
        })
    }

    pub fn run(&mut self, cloud: &PointCloud<T>, ell: usize, iters: usize, config: &WlConfig) -> Result<WlHistory> {
        let keys = self.pair_keys(cloud);
        self.run_on_keys(&keys, ell, iters, config)
    }

    pub fn fingerprint(&self, history: &WlHistory, iteration: usize) -> Fingerprint {
        Fingerprint::from_ids(
            history.ell,
            iteration,
            history.tables[iteration].iter().map(|&id| *self.digest(id)),
        )
    }
}

/// Color a cloud in a fresh store.
pub fn run_wl<T: Scalar>(cloud: &PointCloud<T>, ell: usize, iters: usize, config: &WlConfig) -> Result<(ColorStore<T>, WlHistory)> {
    let mut store = ColorStore::new(config.quantum);
    let history = store.run(cloud, ell, iters, config)?;
    Ok((store, history))
}

/// Fingerprint after `iters` iterations.
pub fn fingerprint<T: Scalar>(cloud: &PointCloud<T>, ell: usize, iters: usize, config: &WlConfig) -> Result<Fingerprint> {
    let (store, history) = run_wl(cloud, ell, iters, config)?;
    Ok(store.fingerprint(&history, iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn line(xs: &[i64]) -> PointCloud<Rational> {
        PointCloud::new(1, xs.iter().map(|&x| vec![Rational::from_ratio(x, 1)]).collect()).unwrap()
    }

    #[test]
    fn tuple_indexing_roundtrip() {
        for idx in 0..125 {
            assert_eq!(encode_tuple(&decode_tuple(idx, 5, 3), 5), idx);
        }
        assert_eq!(decode_tuple(7, 3, 2), vec![2, 1]);
    }

    #[test]
    fn initial_colors() {
        let cfg = WlConfig::default();
        let (_, h) = run_wl(&line(&[0, 1, 5]), 1, 0, &cfg).unwrap();
        assert_eq!(h.class_counts(), vec![1]);
        let pair = PointCloud::new(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let (store, h) = run_wl(&pair, 2, 0, &cfg).unwrap();
        assert_eq!(h.class_counts(), vec![2]);
        assert_eq!(store.leaf_values(h.tables[0][1]), vec![0.0, 25.0, 25.0, 0.0]);
        let s = 3f64.sqrt() / 2.0;
        let tri = PointCloud::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, s]]).unwrap();
        assert_eq!(run_wl(&tri, 2, 0, &cfg).unwrap().1.class_counts(), vec![2]);
    }

    #[test]
    fn one_refinement_on_a_line() {
        let cfg = WlConfig::default();
        let (_, h) = run_wl(&line(&[0, 1]), 1, 1, &cfg).unwrap();
        assert_eq!(h.tables[1][0], h.tables[1][1]);
        let a = fingerprint(&line(&[0, 1, 2]), 1, 1, &cfg).unwrap();
        let b = fingerprint(&line(&[0, 1, 3]), 1, 1, &cfg).unwrap();
        assert_eq!(compare(&a, &b).unwrap(), Verdict::Different);
    }

    #[test]
    fn history_shapes() {
        let cfg = WlConfig::default();
        let c = line(&[0, 1, 3, 7, 8, 20]);
        assert_eq!(run_wl(&c, 1, 3, &cfg).unwrap().1.tables.len(), 4);
        let (_, h) = run_wl(&c, 2, 3, &cfg).unwrap();
        assert_eq!(h.tables.len(), 4);
        assert!(h.tables.iter().all(|t| t.len() == 36));
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = WlConfig { max_tuples: 100, ..WlConfig::default() };
        let c = line(&[0, 1, 2, 3, 4]);
        assert!(matches!(run_wl(&c, 3, 1, &cfg), Err(Error::TupleCapExceeded { size: 125, cap: 100 })));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = line(&[0, 2, 3, 7, 11]);
        let par = fingerprint(&c, 2, 2, &WlConfig::default()).unwrap();
        let ser = fingerprint(&c, 2, 2, &WlConfig { parallel: false, ..WlConfig::default() }).unwrap();
        assert_eq!(par.to_bytes(), ser.to_bytes());
    }
}
