//! Small dense linear algebra for cocycle work.
//!
//! Matrices here are tiny (the torus dimension is usually 2 or 3), so
//! everything is row-major `Vec<f64>` with explicit loops. Singular values
//! come from the eigenvalues of the Gram matrix: closed form for 1×1 and
//! 2×2, cyclic Jacobi rotations otherwise.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖BᵀB − I‖_max` for a frame to count as orthonormal.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Mat::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        self.mul_into(rhs, &mut out);
        out
    }

    /// `out = self · rhs`. `out` must already have the right shape.
    #[inline]
    pub fn mul_into(&self, rhs: &Mat, out: &mut Mat) {
        debug_assert_eq!(self.cols, rhs.rows);
        debug_assert_eq!((out.rows, out.cols), (self.rows, rhs.cols));
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        for i in 0..n {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += self.data[i * m + k] * rhs.data[k * p + j];
                }
                out.data[i * p + j] = acc;
            }
        }
    }

    /// `out = selfᵀ · rhs` without materializing the transpose.
    #[inline]
    pub fn tr_mul_into(&self, rhs: &Mat, out: &mut Mat) {
        debug_assert_eq!(self.rows, rhs.rows);
        debug_assert_eq!((out.rows, out.cols), (self.cols, rhs.cols));
        let (n, m, p) = (self.cols, self.rows, rhs.cols);
        for i in 0..n {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..m {
                    acc += self.data[k * n + i] * rhs.data[k * p + j];
                }
                out.data[i * p + j] = acc;
            }
        }
    }

    pub fn tr_mul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.cols, rhs.cols);
        self.tr_mul_into(rhs, &mut out);
        out
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale_in_place(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// Gram matrix `selfᵀ · self`.
    pub fn gram(&self) -> Mat {
        self.tr_mul(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn col_norm_sq(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self[(i, j)] * self[(i, j)]).sum()
    }

    pub fn max_col_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col_norm_sq(j))
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows);
        let mut out = Mat::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..rhs.cols {
                out[(i, self.cols + j)] = rhs[(i, j)];
            }
        }
        out
    }

    /// Embeds `block` with its top-left corner at `(offset, offset)`.
    pub fn set_block(&mut self, offset: usize, block: &Mat) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(offset + i, offset + j)] = block[(i, j)];
            }
        }
    }
}

/// `‖BᵀB − I‖_max`.
pub fn orthonormality_defect(basis: &Mat) -> f64 {
    let g = basis.gram();
    let mut worst: f64 = 0.0;
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn check_orthonormal(basis: &Mat) -> Result<()> {
    if basis.cols() == 0 {
        return Err(Error::InvalidBasis("empty frame".into()));
    }
    if !basis.is_finite() {
        return Err(Error::Numeric("non-finite entry in frame".into()));
    }
    let defect = orthonormality_defect(basis);
    if defect > ORTHONORMAL_TOL {
        return Err(Error::InvalidBasis(format!(
            "columns not orthonormal (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut ev = match n {
        0 => Vec::new(),
        1 => vec![a[(0, 0)]],
        2 => {
            let (p, q, r) = (a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)]);
            let mean = 0.5 * (p + r);
            let rad = (0.5 * (p - r)).hypot(q);
            let hi = mean + rad;
            // det / hi avoids the cancellation in mean - rad for the small root.
            let lo = if hi > 0.0 { (p * r - q * q) / hi } else { mean - rad };
            vec![hi, lo]
        }
        _ => jacobi_eigenvalues(a),
    };
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let diag: f64 = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Singular values, sorted descending. Length is `min(rows, cols)`.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let g = if a.rows() >= a.cols() {
        a.gram()
    } else {
        a.transpose().gram()
    };
    sym_eigenvalues(&g)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

#[inline]
pub fn largest_singular_value(a: &Mat) -> f64 {
    match (a.rows(), a.cols()) {
        (1, 1) => a[(0, 0)].abs(),
        (_, 1) => a.col_norm_sq(0).sqrt(),
        (2, 2) => {
            let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            // σ_max = (√((p+s)²+(q−r)²) + √((p−s)²+(q+r)²)) / 2
            0.5 * ((p + s).hypot(q - r) + (p - s).hypot(q + r))
        }
        _ => singular_values(a)[0],
    }
}

pub fn smallest_singular_value(a: &Mat) -> f64 {
    match (a.rows(), a.cols()) {
        (1, 1) => a[(0, 0)].abs(),
        (_, 1) => a.col_norm_sq(0).sqrt(),
        (2, 2) => {
            let hi = largest_singular_value(a);
            if hi == 0.0 {
                return 0.0;
            }
            (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).abs() / hi
        }
        _ => *singular_values(a).last().unwrap_or(&0.0),
    }
}

/// Thin QR by modified Gram–Schmidt with one reorthogonalization pass.
/// Returns `None` if a column collapses (rank deficiency).
pub fn qr(a: &Mat) -> Option<(Mat, Mat)> {
    let (m, n) = (a.rows(), a.cols());
    let mut q = a.clone();
    let mut r = Mat::zeros(n, n);
    for j in 0..n {
        let scale = q.col_norm_sq(j).sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let mut dot = 0.0;
                for i in 0..m {
                    dot += q[(i, k)] * q[(i, j)];
                }
                r[(k, j)] += dot;
                for i in 0..m {
                    q[(i, j)] -= dot * q[(i, k)];
                }
            }
        }
        let norm = q.col_norm_sq(j).sqrt();
        if !(norm > 1e-14 * scale.max(f64::MIN_POSITIVE)) || norm == 0.0 {
            return None;
        }
        r[(j, j)] = norm;
        for i in 0..m {
            q[(i, j)] /= norm;
        }
    }
    Some((q, r))
}

/// Orthonormal basis for the column span of `a`.
pub fn orthonormalize(a: &Mat) -> Option<Mat> {
    qr(a).map(|(q, _)| q)
}

/// Inverse of a small square matrix by Gauss–Jordan with partial pivoting.
pub fn invert(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    match n {
        1 => {
            let v = a[(0, 0)];
            (v != 0.0 && v.is_finite()).then(|| Mat::diag(&[1.0 / v]))
        }
        2 => {
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            Some(Mat::from_rows(&[
                vec![a[(1, 1)] / det, -a[(0, 1)] / det],
                vec![-a[(1, 0)] / det, a[(0, 0)] / det],
            ]))
        }
        _ => {
            let mut m = a.clone();
            let mut inv = Mat::identity(n);
            for c in 0..n {
                let piv = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))?;
                if m[(piv, c)] == 0.0 {
                    return None;
                }
                if piv != c {
                    for j in 0..n {
                        m.data.swap(piv * n + j, c * n + j);
                        inv.data.swap(piv * n + j, c * n + j);
                    }
                }
                let d = m[(c, c)];
                for j in 0..n {
                    m[(c, j)] /= d;
                    inv[(c, j)] /= d;
                }
                for i in 0..n {
                    if i != c {
                        let f = m[(i, c)];
                        if f != 0.0 {
                            for j in 0..n {
                                m[(i, j)] -= f * m[(c, j)];
                                inv[(i, j)] -= f * inv[(c, j)];
                            }
                        }
                    }
                }
            }
            inv.is_finite().then_some(inv)
        }
    }
}
