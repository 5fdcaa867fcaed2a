//! Dense singular values: one-sided Jacobi, and block subspace iteration with a
//! Jacobi Rayleigh-Ritz step when only the leading values of a large matrix are needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Columns of `self · B` for a column-stored block `B`.
    fn mul_block(&self, block: &[Vec<f64>]) -> Vec<Vec<f64>> {
        block.par_iter().map(|col| self.mul_vec(col)).collect()
    }

    /// Columns of `selfᵀ · B`.
    fn tmul_block(&self, block: &[Vec<f64>]) -> Vec<Vec<f64>> {
        block
            .par_iter()
            .map(|col| {
                let mut out = vec![0.0; self.cols];
                for (i, &c) in col.iter().enumerate() {
                    if c != 0.0 {
                        for (o, &a) in out.iter_mut().zip(self.row(i)) {
                            *o += c * a;
                        }
                    }
                }
                out
            })
            .collect()
    }

    fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).collect()).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MAX_SWEEPS: usize = 80;

/// Singular values of the matrix whose columns are given, in descending order.
fn jacobi_columns(mut cols: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = cols.len();
    for sweep in 0..=MAX_SWEEPS {
        let norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let g = dot(&cols[i], &cols[j]);
                off += 2.0 * g * g;
            }
        }
        let diag: f64 = norms.iter().map(|x| x * x).sum();
        if off.sqrt() <= 1e-12 * (diag + off).sqrt() || diag == 0.0 {
            let mut s: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            return Ok(s);
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.abs() <= 1e-300 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

/// All singular values, descending, by one-sided Jacobi.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    if m.cols <= m.rows {
        jacobi_columns(m.columns())
    } else {
        jacobi_columns((0..m.rows).map(|i| m.row(i).to_vec()).collect())
    }
}

/// The `k` largest singular values. Small matrices go straight to Jacobi; larger ones
/// use seeded block subspace iteration on `AᵀA` followed by Jacobi on the projection.
pub fn top_singular_values(m: &Matrix, k: usize, seed: u64) -> Result<Vec<f64>> {
    let n = m.cols.min(m.rows);
    let k = k.min(n);
    if n <= 300 || k + 16 >= n / 2 {
        let mut s = singular_values(m)?;
        s.truncate(k);
        return Ok(s);
    }
    let b = k + 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<Vec<f64>> = (0..b).map(|_| (0..m.cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    orthonormalize(&mut q);
    let mut last: Option<Vec<f64>> = None;
    for _ in 0..500 {
        for _ in 0..4 {
            let z = m.mul_block(&q);
            q = m.tmul_block(&z);
            orthonormalize(&mut q);
        }
        let mut s = jacobi_columns(m.mul_block(&q))?;
        s.truncate(k);
        if let Some(prev) = &last {
            let scale = s[0].max(f64::MIN_POSITIVE);
            if s.iter().zip(prev).all(|(a, b)| (a - b).abs() <= 1e-13 * scale) {
                return Ok(s);
            }
        }
        last = Some(s);
    }
    Err(Error::NoConvergence(500))
}

/// Modified Gram-Schmidt, applied twice for stability. Dependent columns are replaced
/// by zero vectors.
fn orthonormalize(q: &mut [Vec<f64>]) {
    for _ in 0..2 {
        for i in 0..q.len() {
            let (done, rest) = q.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = dot(u, v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
            let norm = dot(v, v).sqrt();
            if norm > 1e-300 {
                v.iter_mut().for_each(|x| *x /= norm);
            } else {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
    }
}
