//! Small dense elimination routines shared by the exact and float backends.
//!
//! Pivot choice uses the largest `approx()` magnitude among non-negligible
//! entries, which is partial pivoting for floats and a harmless choice for
//! rationals (where any non-zero pivot is exact).

use crate::scalar::Scalar;

fn pivot_row<T: Scalar>(m: &[Vec<T>], col: usize, from: usize, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in m.iter().enumerate().skip(from) {
        let v = &row[col];
        if v.is_negligible(tol) {
            continue;
        }
        let mag = v.approx().abs();
        if best.is_none_or(|(_, b)| mag > b) {
            best = Some((r, mag));
        }
    }
    best.map(|(r, _)| r)
}

/// Row rank with absolute pivot tolerance `tol`.
pub fn rank<T: Scalar>(mut m: Vec<Vec<T>>, tol: f64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pivot_row(&m, c, r, tol) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[r][c].clone();
            for j in c..cols {
                let t = f.clone() * m[r][j].clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
        r += 1;
    }
    r
}

/// Determinant of a square matrix.
pub fn det<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut acc = T::one();
    for c in 0..n {
        let Some(p) = pivot_row(&m, c, c, 0.0) else {
            return T::zero();
        };
        if p != c {
            m.swap(c, p);
            acc = -acc;
        }
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone() / m[c][c].clone();
            for j in c..n {
                let t = f.clone() * m[c][j].clone();
                m[i][j] = m[i][j].clone() - t;
            }
        }
        acc = acc * m[c][c].clone();
    }
    acc
}

/// Gauss-Jordan inverse; `None` when a pivot is negligible.
pub fn invert<T: Scalar>(m: &[Vec<T>], tol: f64) -> Option<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = pivot_row(&a, c, c, tol)?;
        a.swap(c, p);
        let inv = T::one() / a[c][c].clone();
        for j in 0..2 * n {
            a[c][j] = a[c][j].clone() * inv.clone();
        }
        for i in 0..n {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..2 * n {
                let t = f.clone() * a[c][j].clone();
                a[i][j] = a[i][j].clone() - t;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], x: &[T]) -> Vec<T> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| {
        let d = x.clone() - y.clone();
        acc + d.clone() * d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rational::from_ratio(v, 1)).collect())
            .collect()
    }

    #[test]
    fn rank_and_det_exact() {
        let m = q(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(m.clone(), 0.0), 2);
        assert_eq!(det(m), Rational::from_ratio(0, 1));
        let m = q(&[&[2, 0, 0], &[0, 3, 0], &[1, 1, 1]]);
        assert_eq!(det(m), Rational::from_ratio(6, 1));
        let swap = q(&[&[0, 1], &[1, 0]]);
        assert_eq!(det(swap), Rational::from_ratio(-1, 1));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = q(&[&[2, 1], &[1, 1]]);
        let inv = invert(&m, 0.0).unwrap();
        assert_eq!(inv, vec![
            vec![Rational::from_ratio(1, 1), Rational::from_ratio(-1, 1)],
            vec![Rational::from_ratio(-1, 1), Rational::from_ratio(2, 1)],
        ]);
        assert!(invert(&q(&[&[1, 2], &[2, 4]]), 0.0).is_none());
    }

    #[test]
    fn float_rank_with_tolerance() {
        let m = vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-14]];
        assert_eq!(rank(m.clone(), 1e-9), 1);
        assert_eq!(rank(m, 0.0), 2);
    }
}
