//! Small dense matrices and a rank-revealing least-squares solver.
//!
//! The collocation systems are at most a few dozen rows, so everything here
//! is plain row-major storage and unblocked Householder transformations.
//! The solve path is always minimum-norm least squares built on column-
//! pivoted QR: first-kind problems produce a structurally zero first row
//! when the first collocation point coincides with the lower limit, so a
//! plain LU solve would fail while the rank-revealing path absorbs it.

use std::fmt;
use std::ops::{Index, IndexMut};

/// Default relative rank tolerance against the largest `R` diagonal entry.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    EmptyMatrix,
    DimensionMismatch { rows: usize, len: usize },
    NonFinite,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::EmptyMatrix => write!(f, "matrix has no entries"),
            LinalgError::DimensionMismatch { rows, len } => {
                write!(f, "right-hand side length {len} does not match {rows} rows")
            }
            LinalgError::NonFinite => write!(f, "matrix entries must be finite"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Row-major dense matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> DenseMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row_slice(i)
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// One Householder reflector `H = I - c u u^T` acting on rows `start..`.
#[derive(Debug, Clone)]
struct Reflector {
    start: usize,
    u: Vec<f64>,
    c: f64,
}

impl Reflector {
    fn apply(&self, v: &mut [f64]) {
        if self.c == 0.0 {
            return;
        }
        let section = &mut v[self.start..self.start + self.u.len()];
        let dot: f64 = self.u.iter().zip(section.iter()).map(|(a, b)| a * b).sum();
        let scale = self.c * dot;
        for (slot, &ui) in section.iter_mut().zip(self.u.iter()) {
            *slot -= scale * ui;
        }
    }
}

/// Householder QR factorization with column pivoting: `A P = Q R`.
///
/// `r` holds the upper-triangular factor, `piv[k]` is the original column
/// index moved to position `k`, and the reflectors reproduce `Q^T` when
/// applied in order.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    r: DenseMatrix,
    reflectors: Vec<Reflector>,
    piv: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl PivotedQr {
    /// Magnitudes of the `R` diagonal, the basis for rank decisions.
    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|k| self.r[(k, k)].abs())
            .collect()
    }

    /// Numerical rank: diagonal entries at least `rank_tol` times the
    /// largest one.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let diag = self.r_diag();
        let largest = diag.first().copied().unwrap_or(0.0);
        if largest == 0.0 {
            return 0;
        }
        diag.iter().take_while(|&&d| d >= rank_tol * largest).count()
    }

    fn apply_q_transpose(&self, v: &mut [f64]) {
        for h in &self.reflectors {
            h.apply(v);
        }
    }
}

/// Factors `m` with column pivoting. Always succeeds for finite input.
pub fn qr_factor_column_pivot(m: &DenseMatrix) -> Result<PivotedQr, LinalgError> {
    if m.is_empty() {
        return Err(LinalgError::EmptyMatrix);
    }
    if !m.all_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(householder_qr(m.clone(), true))
}

fn householder_qr(mut r: DenseMatrix, pivot: bool) -> PivotedQr {
    let rows = r.rows();
    let cols = r.cols();
    let steps = rows.min(cols);
    let mut piv: Vec<usize> = (0..cols).collect();
    let mut reflectors = Vec::with_capacity(steps);

    for k in 0..steps {
        if pivot {
            // Recompute trailing column norms each step; the systems here
            // are small enough that downdating tricks are not worth it.
            let mut best = k;
            let mut best_norm = -1.0f64;
            for j in k..cols {
                let norm_sq: f64 = (k..rows).map(|i| r[(i, j)] * r[(i, j)]).sum();
                if norm_sq > best_norm {
                    best_norm = norm_sq;
                    best = j;
                }
            }
            if best != k {
                for i in 0..rows {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                piv.swap(k, best);
            }
        }

        let norm: f64 = (k..rows)
            .map(|i| r[(i, k)] * r[(i, k)])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            reflectors.push(Reflector { start: k, u: Vec::new(), c: 0.0 });
            continue;
        }

        let head = r[(k, k)];
        let sign = if head >= 0.0 { 1.0 } else { -1.0 };
        let mut u: Vec<f64> = (k..rows).map(|i| r[(i, k)]).collect();
        u[0] += sign * norm;
        let u_norm_sq: f64 = u.iter().map(|v| v * v).sum();
        let c = 2.0 / u_norm_sq;

        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| u[i - k] * r[(i, j)]).sum();
            let scale = c * dot;
            for i in k..rows {
                r[(i, j)] -= scale * u[i - k];
            }
        }
        // Pin the column to its exact reflected form.
        r[(k, k)] = -sign * norm;
        for i in k + 1..rows {
            r[(i, k)] = 0.0;
        }
        reflectors.push(Reflector { start: k, u, c });
    }

    PivotedQr { r, reflectors, piv, rows, cols }
}

/// Ratio of the largest retained `R` diagonal entry to the smallest, a
/// cheap lower-bound style estimate of the 2-norm condition number.
pub fn condition_estimate(qr: &PivotedQr) -> f64 {
    condition_estimate_with_tol(qr, DEFAULT_RANK_TOL)
}

pub fn condition_estimate_with_tol(qr: &PivotedQr, rank_tol: f64) -> f64 {
    let rank = qr.rank(rank_tol);
    if rank == 0 {
        return 1.0;
    }
    let diag = qr.r_diag();
    diag[0] / diag[rank - 1]
}

/// Minimum-norm least-squares solution with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub x: Vec<f64>,
    pub rank: usize,
    pub residual_norm: f64,
    pub condition_estimate: f64,
}

/// Returns the minimum-norm least-squares solution of `m x = b`.
///
/// Built as a complete orthogonal decomposition on the pivoted QR: columns
/// whose `R` diagonal falls below `rank_tol` times the largest diagonal are
/// treated as rank-deficient directions. For full-rank square systems this
/// coincides with the unique solution. The reported residual norm is
/// recomputed directly as `‖m x - b‖₂`.
pub fn solve_min_norm_ls(
    m: &DenseMatrix,
    b: &[f64],
    rank_tol: f64,
) -> Result<LsSolution, LinalgError> {
    if b.len() != m.rows() {
        return Err(LinalgError::DimensionMismatch { rows: m.rows(), len: b.len() });
    }
    let qr = qr_factor_column_pivot(m)?;
    let rank = qr.rank(rank_tol);
    let cols = m.cols();

    let x = if rank == 0 {
        vec![0.0; cols]
    } else {
        // c = Q^T b, keep the first `rank` entries.
        let mut c = b.to_vec();
        qr.apply_q_transpose(&mut c);

        // W = leading `rank` rows of R (rank x cols). Min-norm solve of
        // W y = c[..rank] via an LQ factorization, computed as QR of W^T.
        let mut wt = DenseMatrix::zeros(cols, rank);
        for i in 0..rank {
            for j in i..cols {
                wt[(j, i)] = qr.r[(i, j)];
            }
        }
        let lq = householder_qr(wt, false);

        // Forward-substitute L y1 = c[..rank] with L = (R of W^T)^T.
        let mut y1 = vec![0.0f64; rank];
        for i in 0..rank {
            let mut sum = c[i];
            for (j, &yj) in y1.iter().enumerate().take(i) {
                sum -= lq.r[(j, i)] * yj;
            }
            y1[i] = sum / lq.r[(i, i)];
        }

        // y = Q2 [y1; 0]: apply the LQ reflectors in reverse order.
        let mut y = vec![0.0f64; cols];
        y[..rank].copy_from_slice(&y1);
        for h in lq.reflectors.iter().rev() {
            h.apply(&mut y);
        }

        // Undo the column permutation.
        let mut x = vec![0.0f64; cols];
        for (k, &col) in qr.piv.iter().enumerate() {
            x[col] = y[k];
        }
        x
    };

    let mut residual = m.mul_vec(&x);
    for (r, &bi) in residual.iter_mut().zip(b.iter()) {
        *r -= bi;
    }
    let residual_norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();

    Ok(LsSolution {
        x,
        rank,
        residual_norm,
        condition_estimate: condition_estimate_with_tol(&qr, rank_tol),
    })
}
