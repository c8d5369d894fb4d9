//! Dense least squares by Householder QR, plus a small Cholesky solver.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Tall matrix stored column by column.
#[derive(Debug, Clone)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ColMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    /// Reciprocal 1-norm condition number of the triangular factor.
    pub rcond: f64,
}

/// Minimizes `|A x - b|` via Householder QR. `a` and `b` are consumed as
/// workspace. Fails with [`Error::RankDeficient`] when the reciprocal
/// condition number of `R` falls below `rcond_min`.
pub fn lstsq(mut a: ColMatrix, mut b: Vec<f64>, rcond_min: f64) -> Result<LstsqSolution> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::LengthMismatch(m, b.len()));
    }
    if m < n {
        return Err(Error::InvalidArgument(
            "underdetermined least-squares problem",
        ));
    }
    let mut diag = vec![0.0; n];
    for j in 0..n {
        let (head, tail) = a.data.split_at_mut((j + 1) * m);
        let v = &mut head[j * m + j..];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient { rcond: 0.0 });
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        diag[j] = alpha;
        let apply = |w: &mut [f64]| {
            let dot: f64 = v.iter().zip(w.iter()).map(|(p, q)| p * q).sum();
            let s = 2.0 * dot / vnorm2;
            for (wi, vi) in w.iter_mut().zip(v.iter()) {
                *wi -= s * vi;
            }
        };
        for k in 0..(n - j - 1) {
            apply(&mut tail[k * m + j..(k + 1) * m]);
        }
        apply(&mut b[j..]);
    }

    // R: diag holds R[j][j]; entries above the diagonal sit in column k, rows < k.
    let r = |i: usize, k: usize| if i == k { diag[k] } else { a.data[k * m + i] };
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for (k, xk) in x.iter().enumerate().skip(i + 1) {
            s -= r(i, k) * xk;
        }
        x[i] = s / diag[i];
    }

    let rcond = triangular_rcond(n, r);
    if rcond.is_nan() || rcond < rcond_min {
        return Err(Error::RankDeficient { rcond });
    }
    Ok(LstsqSolution { x, rcond })
}

/// `1 / (|R|_1 |R^-1|_1)` for an upper-triangular `R`, with the inverse
/// formed explicitly (cheap at regression sizes).
fn triangular_rcond(n: usize, r: impl Fn(usize, usize) -> f64) -> f64 {
    let mut norm_r = 0.0f64;
    for k in 0..n {
        let s: f64 = (0..=k).map(|i| r(i, k).abs()).sum();
        norm_r = norm_r.max(s);
    }
    // Column k of R^-1 solves R z = e_k.
    let mut norm_inv = 0.0f64;
    let mut z = vec![0.0; n];
    for k in 0..n {
        for v in z.iter_mut() {
            *v = 0.0;
        }
        for i in (0..=k).rev() {
            let mut s = if i == k { 1.0 } else { 0.0 };
            for (j, zj) in z.iter().enumerate().take(k + 1).skip(i + 1) {
                s -= r(i, j) * zj;
            }
            z[i] = s / r(i, i);
        }
        norm_inv = norm_inv.max(z.iter().map(|v| v.abs()).sum());
    }
    let rc = 1.0 / (norm_r * norm_inv);
    if rc.is_finite() {
        rc
    } else {
        0.0
    }
}

/// Solves `M x = rhs` for symmetric positive definite `M` (row-major, n x n).
pub fn cholesky_solve(m: &[f64], n: usize, rhs: &[f64]) -> Result<Vec<f64>> {
    if m.len() != n * n || rhs.len() != n {
        return Err(Error::InvalidArgument("dimension mismatch"));
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::InvalidArgument("matrix is not positive definite"));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (rhs[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Ok(x)
}
