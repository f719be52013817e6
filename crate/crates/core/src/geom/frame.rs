//! Locating a point from its squared distances to known anchors.

use crate::error::{Error, Result};
use crate::linalg::{dot, sub};
use crate::scalar::Real;

/// Affine hyperplane `<normal, x> = offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane<F> {
    pub normal: Vec<F>,
    pub offset: F,
    pub span_points: Vec<Vec<F>>,
}

impl<F: Real> Hyperplane<F> {
    /// Signed distance, positive on the side the normal points to.
    pub fn signed_distance(&self, p: &[F]) -> F {
        dot(&self.normal, p) - self.offset
    }

    pub fn reflect(&self, p: &[F]) -> Vec<F> {
        let s = self.signed_distance(p);
        let two = F::one() + F::one();
        p.iter().zip(&self.normal).map(|(&x, &n)| x - two * s * n).collect()
    }
}

/// Mirror image of `p` across `h`.
pub fn reflect<F: Real>(p: &[F], h: &Hyperplane<F>) -> Vec<F> {
    h.reflect(p)
}

/// Positions compatible with a distance tuple.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidates<F> {
    Single(Vec<F>),
    Pair(Vec<F>, Vec<F>),
}

impl<F: Clone> Candidates<F> {
    pub fn first(&self) -> &[F] {
        match self {
            Candidates::Single(p) | Candidates::Pair(p, _) => p,
        }
    }

    pub fn points(&self) -> Vec<Vec<F>> {
        match self {
            Candidates::Single(p) => vec![p.clone()],
            Candidates::Pair(a, b) => vec![a.clone(), b.clone()],
        }
    }
}

/// Orthonormal frame adapted to a list of anchors.
///
/// The span basis is Gram-Schmidt over `a_i - a_0` in anchor order, so anchor
/// coordinates form a lower-triangular system; the complement basis is
/// Gram-Schmidt over the standard axes.
#[derive(Debug, Clone)]
pub struct AnchorFrame<F> {
    anchors: Vec<Vec<F>>,
    basis: Vec<Vec<F>>,
    normals: Vec<Vec<F>>,
    /// `(anchor index, coordinates of a_i - a_0 on basis[..=k])` for each basis vector `k`.
    pivots: Vec<(usize, Vec<F>)>,
    tol: F,
}

fn orthogonalize<F: Real>(v: &[F], basis: &[Vec<F>]) -> (Vec<F>, Vec<F>) {
    let mut w = v.to_vec();
    let mut coeffs = Vec::with_capacity(basis.len() + 1);
    for e in basis {
        let c = dot(&w, e);
        for (wi, &ei) in w.iter_mut().zip(e) {
            *wi = *wi - c * ei;
        }
        coeffs.push(c);
    }
    // second pass keeps the basis orthogonal to working precision
    for (k, e) in basis.iter().enumerate() {
        let c = dot(&w, e);
        for (wi, &ei) in w.iter_mut().zip(e) {
            *wi = *wi - c * ei;
        }
        coeffs[k] = coeffs[k] + c;
    }
    (w, coeffs)
}

fn norm<F: Real>(v: &[F]) -> F {
    dot(v, v).sqrt()
}

impl<F: Real> AnchorFrame<F> {
    /// `tol` is relative to the anchor scale.
    pub fn new(anchors: &[Vec<F>], tol: f64) -> Result<Self> {
        let Some(first) = anchors.first() else {
            return Err(Error::Degenerate("no anchors".into()));
        };
        let dim = first.len();
        if let Some(bad) = anchors.iter().find(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        let scale = anchors
            .iter()
            .map(|a| norm(&sub(a, first)))
            .fold(F::one(), F::max);
        let tol_f = F::from_f64_lossy(tol);
        let mut basis: Vec<Vec<F>> = Vec::new();
        let mut pivots = Vec::new();
        for (i, a) in anchors.iter().enumerate().skip(1) {
            let (w, mut coeffs) = orthogonalize(&sub(a, first), &basis);
            let len = norm(&w);
            if len > tol_f.sqrt() * scale && basis.len() < dim {
                coeffs.push(len);
                basis.push(w.iter().map(|&x| x / len).collect());
                pivots.push((i, coeffs));
            }
        }
        let mut normals: Vec<Vec<F>> = Vec::new();
        for axis in 0..dim {
            if basis.len() + normals.len() == dim {
                break;
            }
            let mut e = vec![F::zero(); dim];
            e[axis] = F::one();
            let all: Vec<Vec<F>> = basis.iter().chain(&normals).cloned().collect();
            let (w, _) = orthogonalize(&e, &all);
            let len = norm(&w);
            if len > F::from_f64_lossy(1e-6) {
                normals.push(w.iter().map(|&x| x / len).collect());
            }
        }
        Ok(Self {
            anchors: anchors.to_vec(),
            basis,
            normals,
            pivots,
            tol: tol_f,
        })
    }

    /// Affine dimension of the anchors.
    pub fn span_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn anchors(&self) -> &[Vec<F>] {
        &self.anchors
    }

    pub fn normals(&self) -> &[Vec<F>] {
        &self.normals
    }

    /// The span as a hyperplane, when it has codimension one.
    pub fn hyperplane(&self) -> Option<Hyperplane<F>> {
        if self.normals.len() != 1 {
            return None;
        }
        let normal = self.normals[0].clone();
        Some(Hyperplane {
            offset: dot(&normal, &self.anchors[0]),
            normal,
            span_points: self.anchors.clone(),
        })
    }

    fn check_len(&self, sq_dists: &[F]) -> Result<()> {
        if sq_dists.len() != self.anchors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.anchors.len(),
                found: sq_dists.len(),
            });
        }
        Ok(())
    }

    fn scale(&self, sq_dists: &[F]) -> F {
        sq_dists.iter().fold(F::one(), |m, &d| m.max(d.abs()))
    }

    /// Orthogonal projection onto the span and the squared height above it,
    /// as implied by the distances (the height may come out negative).
    pub fn foot(&self, sq_dists: &[F]) -> Result<(Vec<F>, F)> {
        self.check_len(sq_dists)?;
        let two = F::one() + F::one();
        let d0 = sq_dists[0];
        let mut c: Vec<F> = Vec::with_capacity(self.basis.len());
        for (k, (i, r)) in self.pivots.iter().enumerate() {
            let vi2: F = r.iter().fold(F::zero(), |acc, &x| acc + x * x);
            let rhs = (d0 + vi2 - sq_dists[*i]) / two;
            let partial = (0..k).fold(F::zero(), |acc, m| acc + r[m] * c[m]);
            c.push((rhs - partial) / r[k]);
        }
        let mut p = self.anchors[0].clone();
        for (ck, e) in c.iter().zip(&self.basis) {
            for (pi, &ei) in p.iter_mut().zip(e) {
                *pi = *pi + *ck * ei;
            }
        }
        let h2 = d0 - c.iter().fold(F::zero(), |acc, &x| acc + x * x);
        Ok((p, h2))
    }

    fn verify(&self, p: &[F], h2: F, sq_dists: &[F]) -> Result<()> {
        let scale = self.scale(sq_dists);
        for (a, &d) in self.anchors.iter().zip(sq_dists) {
            let diff = sub(p, a);
            let got = dot(&diff, &diff) + h2;
            if (got - d).abs() > self.tol.sqrt() * scale {
                return Err(Error::Inconsistent(format!(
                    "distance {} to an anchor cannot be matched (closest {})",
                    d.approx(),
                    got.approx()
                )));
            }
        }
        Ok(())
    }

    /// The unique point of the anchors' affine span at the given distances.
    pub fn trilaterate(&self, sq_dists: &[F]) -> Result<Vec<F>> {
        let (p, h2) = self.foot(sq_dists)?;
        if h2.abs() > self.tol * self.scale(sq_dists) {
            return Err(Error::Inconsistent(format!(
                "point is {} (squared) away from the anchors' span",
                h2.approx()
            )));
        }
        self.verify(&p, F::zero(), sq_dists)?;
        Ok(p)
    }

    /// Points at the given distances when the anchors span a hyperplane.
    pub fn mirror_pair(&self, sq_dists: &[F]) -> Result<Candidates<F>> {
        let (p, h2) = self.foot(sq_dists)?;
        let on_plane = h2.abs() <= self.tol * self.scale(sq_dists);
        if h2 < F::zero() && !on_plane {
            return Err(Error::Inconsistent(format!(
                "negative squared height {} above the anchors' span",
                h2.approx()
            )));
        }
        self.mirror_pair_with(p, if on_plane { F::zero() } else { h2 }, sq_dists)
    }

    /// Like [`mirror_pair`](Self::mirror_pair) with the squared height supplied
    /// by the caller (typically decided exactly elsewhere).
    pub fn mirror_pair_with_height(&self, sq_dists: &[F], h2: F) -> Result<Candidates<F>> {
        let (p, _) = self.foot(sq_dists)?;
        self.mirror_pair_with(p, h2, sq_dists)
    }

    fn mirror_pair_with(&self, p: Vec<F>, h2: F, sq_dists: &[F]) -> Result<Candidates<F>> {
        if self.normals.len() != 1 {
            return Err(Error::Degenerate(format!(
                "anchors span dimension {} in R^{}",
                self.span_dim(),
                self.span_dim() + self.normals.len()
            )));
        }
        if h2 <= F::zero() {
            self.verify(&p, F::zero(), sq_dists)?;
            return Ok(Candidates::Single(p));
        }
        self.verify(&p, h2, sq_dists)?;
        let h = h2.sqrt();
        let n = &self.normals[0];
        let plus = p.iter().zip(n).map(|(&x, &e)| x + h * e).collect();
        let minus = p.iter().zip(n).map(|(&x, &e)| x - h * e).collect();
        Ok(Candidates::Pair(plus, minus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(anchors: &[&[f64]]) -> AnchorFrame<f64> {
        AnchorFrame::new(&anchors.iter().map(|a| a.to_vec()).collect::<Vec<_>>(), 1e-9).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn trilateration_examples() {
        let line = frame(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(close(&line.trilaterate(&[1.0, 4.0]).unwrap(), &[-1.0, 0.0]));
        assert!(matches!(line.trilaterate(&[1.0, 100.0]), Err(Error::Inconsistent(_))));
        let tri = frame(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        assert!(close(&tri.trilaterate(&[2.0, 1.0, 1.0]).unwrap(), &[1.0, 1.0]));
    }

    #[test]
    fn mirror_pair_examples() {
        let line = frame(&[&[0.0, 0.0], &[1.0, 0.0]]);
        match line.mirror_pair(&[1.0, 2.0]).unwrap() {
            Candidates::Pair(a, b) => {
                let mut pts = [a, b];
                pts.sort_by(|x, y| x[1].partial_cmp(&y[1]).unwrap());
                assert!(close(&pts[0], &[0.0, -1.0]) && close(&pts[1], &[0.0, 1.0]));
            }
            other => panic!("expected a pair, got {other:?}"),
        }
        assert!(matches!(line.mirror_pair(&[1.0, 4.0]).unwrap(), Candidates::Single(p) if close(&p, &[-1.0, 0.0])));
        assert!(line.mirror_pair(&[1.0, 9.0]).is_err());
    }

    #[test]
    fn reflection_examples() {
        let h = frame(&[&[0.0, 0.0], &[1.0, 0.0]]).hyperplane().unwrap();
        assert!(close(&reflect(&[0.0, 1.0], &h), &[0.0, -1.0]));
        assert!(close(&reflect(&[3.0, 0.0], &h), &[3.0, 0.0]));
        let p = [0.3, -2.5];
        assert!(close(&reflect(&reflect(&p, &h), &h), &p));
    }

    #[test]
    fn dependent_anchors_are_tolerated() {
        let f = frame(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(f.span_dim(), 2);
        let target = [0.5, 0.25, 0.0];
        let d: Vec<f64> = f.anchors().iter().map(|a| a.iter().zip(&target).map(|(x, y)| (x - y) * (x - y)).sum()).collect();
        assert!(close(&f.trilaterate(&d).unwrap(), &target));
    }
}
