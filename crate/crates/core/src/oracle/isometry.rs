use nalgebra::DMatrix;

use crate::cloud::PointCloud;
use crate::scalar::Scalar;

/// Rigid motion (possibly improper) carrying one cloud onto another.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Row-major orthogonal `d×d` matrix.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    /// `permutation[i]` is the index in the target of the image of source point `i`.
    pub permutation: Vec<usize>,
    /// Largest distance between a mapped point and its partner.
    pub residual: f64,
}

impl Alignment {
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.rotation
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| row.iter().zip(p).map(|(r, x)| r * x).sum::<f64>() + t)
            .collect()
    }
}

/// Why two clouds were found not isometric.
#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    Dimension(usize, usize),
    Size(usize, usize),
    DistanceProfiles,
    NoCorrespondence,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mismatch::Dimension(a, b) => write!(f, "dimensions differ ({a} vs {b})"),
            Mismatch::Size(a, b) => write!(f, "sizes differ ({a} vs {b})"),
            Mismatch::DistanceProfiles => write!(f, "per-point distance multisets differ"),
            Mismatch::NoCorrespondence => write!(f, "no distance-preserving correspondence"),
        }
    }
}

fn sqd(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn to_f64<T: Scalar>(c: &PointCloud<T>) -> Vec<Vec<f64>> {
    c.points().iter().map(|p| p.iter().map(Scalar::approx).collect()).collect()
}

fn profiles(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            let mut row: Vec<f64> = points.iter().map(|q| sqd(p, q)).collect();
            row.sort_by(f64::total_cmp);
            row
        })
        .collect()
}

fn close_rows(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Indices of an affinely independent subset spanning the affine hull.
fn affine_basis(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut chosen = vec![0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (i, p) in points.iter().enumerate().skip(1) {
        let mut w: Vec<f64> = p.iter().zip(&points[0]).map(|(a, b)| a - b).collect();
        for e in &basis {
            let c: f64 = w.iter().zip(e).map(|(a, b)| a * b).sum();
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > tol.sqrt() {
            basis.push(w.iter().map(|x| x / len).collect());
            chosen.push(i);
        }
    }
    chosen
}

/// Least-squares orthogonal map (reflections allowed) from `src` to `dst`.
fn procrustes(src: &[&[f64]], dst: &[&[f64]]) -> (DMatrix<f64>, Vec<f64>) {
    let d = src[0].len();
    let k = src.len() as f64;
    let mean = |pts: &[&[f64]]| -> Vec<f64> { (0..d).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / k).collect() };
    let (ms, md) = (mean(src), mean(dst));
    let mut h = DMatrix::<f64>::zeros(d, d);
    for (s, t) in src.iter().zip(dst) {
        for r in 0..d {
            for c in 0..d {
                h[(r, c)] += (s[r] - ms[r]) * (t[c] - md[c]);
            }
        }
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let rot = v_t.transpose() * u.transpose();
    let rms = &rot * DMatrix::from_column_slice(d, 1, &ms);
    let t = (0..d).map(|j| md[j] - rms[(j, 0)]).collect();
    (rot, t)
}

struct Search<'a> {
    a: &'a [Vec<f64>],
    b: &'a [Vec<f64>],
    compatible: Vec<Vec<usize>>,
    anchors: Vec<usize>,
    tol: f64,
    align_tol: f64,
}

impl Search<'_> {
    fn run(&self, assigned: &mut Vec<usize>) -> Option<Alignment> {
        let k = assigned.len();
        if k == self.anchors.len() {
            return self.fit(assigned);
        }
        let ai = self.anchors[k];
        for &bj in &self.compatible[ai] {
            if assigned.contains(&bj) {
                continue;
            }
            let ok = self.anchors[..k].iter().zip(assigned.iter()).all(|(&ap, &bp)| {
                (sqd(&self.a[ai], &self.a[ap]) - sqd(&self.b[bj], &self.b[bp])).abs() <= self.tol
            });
            if !ok {
                continue;
            }
            assigned.push(bj);
            if let Some(found) = self.run(assigned) {
                return Some(found);
            }
            assigned.pop();
        }
        None
    }

    fn fit(&self, assigned: &[usize]) -> Option<Alignment> {
        let src: Vec<&[f64]> = self.anchors.iter().map(|&i| self.a[i].as_slice()).collect();
        let dst: Vec<&[f64]> = assigned.iter().map(|&j| self.b[j].as_slice()).collect();
        let (rot, t) = procrustes(&src, &dst);
        let d = t.len();
        let rotation: Vec<Vec<f64>> = (0..d).map(|r| (0..d).map(|c| rot[(r, c)]).collect()).collect();
        let mut align = Alignment {
            rotation,
            translation: t,
            permutation: Vec::with_capacity(self.a.len()),
            residual: 0.0,
        };
        let mut used = vec![false; self.b.len()];
        for (i, p) in self.a.iter().enumerate() {
            let img = align.apply(p);
            let (j, dist) = self.compatible[i]
                .iter()
                .filter(|&&j| !used[j])
                .map(|&j| (j, sqd(&img, &self.b[j]).sqrt()))
                .min_by(|x, y| x.1.total_cmp(&y.1))?;
            if dist > self.align_tol {
                return None;
            }
            used[j] = true;
            align.permutation.push(j);
            align.residual = align.residual.max(dist);
        }
        Some(align)
    }
}

/// Decide whether two clouds are related by an isometry, returning the
/// alignment or the reason there is none. `tol` bounds the mismatch of
/// squared distances, relative to the largest squared distance (at least 1).
pub fn isometry_check<T: Scalar, U: Scalar>(a: &PointCloud<T>, b: &PointCloud<U>, tol: f64) -> Result<Alignment, Mismatch> {
    if a.dim() != b.dim() {
        return Err(Mismatch::Dimension(a.dim(), b.dim()));
    }
    if a.len() != b.len() {
        return Err(Mismatch::Size(a.len(), b.len()));
    }
    let (pa, pb) = (to_f64(a), to_f64(b));
    let (fa, fb) = (profiles(&pa), profiles(&pb));
    let scale = fa.iter().chain(&fb).flat_map(|r| r.last()).fold(1.0f64, |m, &x| m.max(x));
    let dtol = tol * scale;
    let mut used = vec![false; fb.len()];
    for ra in &fa {
        match (0..fb.len()).find(|&j| !used[j] && close_rows(ra, &fb[j], dtol)) {
            Some(j) => used[j] = true,
            None => return Err(Mismatch::DistanceProfiles),
        }
    }
    let compatible = fa
        .iter()
        .map(|ra| (0..pb.len()).filter(|&j| close_rows(ra, &fb[j], dtol)).collect())
        .collect();
    let search = Search {
        a: &pa,
        b: &pb,
        compatible,
        anchors: affine_basis(&pa, dtol),
        tol: dtol,
        align_tol: (dtol.sqrt()).max(1e-9 * scale.sqrt()),
    };
    search.run(&mut Vec::new()).ok_or(Mismatch::NoCorrespondence)
}

pub fn is_isometric<T: Scalar, U: Scalar>(a: &PointCloud<T>, b: &PointCloud<U>, tol: f64) -> Option<Alignment> {
    isometry_check(a, b, tol).ok()
}
