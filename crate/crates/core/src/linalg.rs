//! Dense exact linear algebra over the rationals (Gauss-Jordan elimination).

use num_traits::{One, Zero};

use crate::rational::{QVector, Rational};

/// Row-reduces `m` in place to reduced row echelon form and returns the pivot
/// columns.
fn rref(m: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (x, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(rows: &[QVector]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let n = first.dim();
    let mut m: Vec<Vec<Rational>> = rows.iter().map(|r| r.0.clone()).collect();
    rref(&mut m, n).len()
}

/// Affine dimension of a point set (-1 for the empty set).
pub fn affine_dim(points: &[&QVector]) -> isize {
    let Some(base) = points.first() else {
        return -1;
    };
    let diffs: Vec<QVector> = points[1..].iter().map(|p| p.sub(base)).collect();
    rank(&diffs) as isize
}

/// Solves the square system `rows · x = rhs`; `None` when singular.
pub fn solve(rows: &[&QVector], rhs: &[Rational]) -> Option<QVector> {
    let n = rows.len();
    debug_assert_eq!(rhs.len(), n);
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            debug_assert_eq!(r.dim(), n);
            let mut row = r.0.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    Some(QVector(
        m.into_iter().map(|mut r| r.pop().unwrap()).collect(),
    ))
}

/// Inverse of a square matrix given by rows; `None` when singular.
pub fn inverse(rows: &[QVector]) -> Option<Vec<QVector>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.0.clone();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    if rref(&mut m, n).len() < n {
        return None;
    }
    Some(m.into_iter().map(|r| QVector(r[n..].to_vec())).collect())
}

pub fn determinant(rows: &[QVector]) -> Rational {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            let (top, bottom) = m.split_at_mut(r);
            for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= &f * y;
            }
        }
    }
    det
}

/// Basis of `{x : rows · x = 0}` in Q^n.
pub fn nullspace(rows: &[QVector], n: usize) -> Vec<QVector> {
    let mut m: Vec<Vec<Rational>> = rows.iter().map(|r| r.0.clone()).collect();
    let pivots = rref(&mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = QVector::zeros(n);
            v.0[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v.0[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}
