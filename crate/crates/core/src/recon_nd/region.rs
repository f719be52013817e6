use std::collections::HashMap;

use crate::geom::{ConeClass, ConeSpec, Hyperplane};

/// The regions `A_0 ⊆ A_1 ⊆ …` known to be free of unplaced points.
///
/// `A_0` is the closed cone plus the open slab `ρ(x) < ε` around the face
/// hyperplanes, and `A_{k+1}` adds the mirror images of `A_k` in every face
/// hyperplane.
#[derive(Debug, Clone)]
pub struct ForbiddenRegion {
    cone: ConeSpec<f64>,
    planes: Vec<Hyperplane<f64>>,
    epsilon: f64,
    tol: f64,
    memo: HashMap<(Vec<i64>, usize), bool>,
}

impl ForbiddenRegion {
    /// `planes[i]` must be the face hyperplane opposite generator `i`.
    pub fn new(cone: ConeSpec<f64>, planes: Vec<Hyperplane<f64>>, epsilon: f64, tol: f64) -> Self {
        assert_eq!(cone.dim(), planes.len());
        Self {
            cone,
            planes,
            epsilon,
            tol,
            memo: HashMap::new(),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn planes(&self) -> &[Hyperplane<f64>] {
        &self.planes
    }

    /// `min_i dist(x, P_i)`.
    pub fn rho(&self, x: &[f64]) -> f64 {
        self.planes
            .iter()
            .map(|h| h.signed_distance(x).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `c = 2 min_i dist(z_i, P_i)`.
    pub fn c(&self) -> f64 {
        2.0 * self
            .cone
            .generators()
            .iter()
            .zip(&self.planes)
            .map(|(z, h)| h.signed_distance(z).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// `γ(x) = Σ ⟨x, z_i⟩`.
    pub fn gamma(&self, x: &[f64]) -> f64 {
        self.cone
            .generators()
            .iter()
            .map(|z| z.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Depth after which every point of norm at most `radius` lies in the
    /// region: `γ` grows by at least `c·ε` per greedy step and ranges over
    /// an interval of length `2·radius·Σ|z_i|`.
    pub fn depth_bound(&self, radius: f64) -> usize {
        let zsum: f64 = self
            .cone
            .generators()
            .iter()
            .map(|z| z.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        (2.0 * radius * zsum / (self.c() * self.epsilon)).ceil() as usize + 1
    }

    pub fn in_base(&self, x: &[f64]) -> bool {
        let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.cone.classify(x, self.tol * scale).1 != ConeClass::Outside || self.rho(x) < self.epsilon
    }

    /// Membership in `A_depth` by the recursive definition, memoized on the
    /// point snapped to a grid of step `tol` and the depth.
    pub fn contains(&mut self, x: &[f64], depth: usize) -> bool {
        let key = (x.iter().map(|v| (v / self.tol).round() as i64).collect(), depth);
        if let Some(&hit) = self.memo.get(&key) {
            return hit;
        }
        let hit = if depth == 0 {
            self.in_base(x)
        } else {
            self.contains(x, depth - 1) || (0..self.planes.len()).any(|i| {
                let y = self.planes[i].reflect(x);
                self.contains(&y, depth - 1)
            })
        };
        self.memo.insert(key, hit);
        hit
    }

    /// The face to reflect across next: among the faces separating `x` from
    /// the cone, the one farthest from `x`.
    fn separating_face(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (h, z)) in self.planes.iter().zip(self.cone.generators()).enumerate() {
            let sx = h.signed_distance(x);
            if sx * h.signed_distance(z) < 0.0 && best.is_none_or(|(_, b)| sx.abs() > b) {
                best = Some((i, sx.abs()));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Faces crossed by the greedy walk from `x` into `A_0`, if it gets
    /// there within `max_steps` reflections.
    pub fn greedy_path(&self, x: &[f64], max_steps: usize) -> Option<Vec<usize>> {
        let mut y = x.to_vec();
        let mut path = Vec::new();
        loop {
            if self.in_base(&y) {
                return Some(path);
            }
            if path.len() == max_steps {
                return None;
            }
            let i = self.separating_face(&y)?;
            y = self.planes[i].reflect(&y);
            path.push(i);
        }
    }

    /// Points whose greedy walk reaches `A_0` within `depth` steps: a subset
    /// of `A_depth` that is cheap to test.
    pub fn contains_greedy(&self, x: &[f64], depth: usize) -> bool {
        self.greedy_path(x, depth).is_some()
    }
}
