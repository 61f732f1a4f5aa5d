//! Small dense real matrices.
//!
//! Everything here is sized for desk-scale cocycles (d at most 32). Singular
//! values come from one-sided Jacobi rotations, which diagonalise `AᵀA`
//! implicitly without ever forming it; general eigenvalues are delegated to
//! the Schur decomposition in `nalgebra`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 32;
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 60;

/// Dense row-major square matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn scalar(value: f64) -> Self {
        Self { dim: 1, data: vec![value] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * values.len() + i] = *v;
        }
        m
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { dim: 2, data: vec![c, -s, s, c] }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Dimension { expected: dim, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).take(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Operator 2-norm, i.e. the largest singular value.
    pub fn norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Distance `‖self − other‖` in operator norm.
    pub fn dist(&self, other: &Matrix) -> f64 {
        (self - other).norm()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    /// LU factorisation with partial pivoting: (packed LU, permutation, sign).
    fn lu(&self) -> (Vec<f64>, Vec<usize>, f64, bool) {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in (k + 1)..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        (a, perm, sign, singular)
    }

    pub fn det(&self) -> f64 {
        if self.dim == 0 {
            return 1.0;
        }
        let (lu, _, sign, singular) = self.lu();
        if singular {
            return 0.0;
        }
        let n = self.dim;
        (0..n).fold(sign, |acc, i| acc * lu[i * n + i])
    }

    /// Returns true when `|det|` is numerically nonzero relative to the
    /// matrix scale (`|det| > 1e-12 · ‖A‖_max^d`).
    pub fn is_invertible(&self) -> bool {
        let scale = self.max_abs();
        if scale == 0.0 {
            return false;
        }
        let rel = (self.scale(1.0 / scale)).det().abs();
        rel > 1e-12
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.dim;
        if !self.is_invertible() {
            return Err(Error::Singular { det: self.det() });
        }
        let (lu, perm, _, _) = self.lu();
        let mut inv = Matrix::zeros(n);
        for col in 0..n {
            // Solve L U x = P e_col.
            let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == col { 1.0 } else { 0.0 }).collect();
            for i in 0..n {
                let mut s = x[i];
                for j in 0..i {
                    s -= lu[i * n + j] * x[j];
                }
                x[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[i];
                for j in (i + 1)..n {
                    s -= lu[i * n + j] * x[j];
                }
                x[i] = s / lu[i * n + i];
            }
            for i in 0..n {
                inv.set(i, col, x[i]);
            }
        }
        Ok(inv)
    }

    /// Singular value decomposition `A = U Σ Vᵀ` by one-sided Jacobi.
    pub fn svd(&self) -> Svd {
        let n = self.dim;
        // Columns of `w` converge to U Σ; `v` accumulates the rotations.
        let mut w = self.transpose().data; // row c of `w` holds column c of A
        let mut v = Matrix::identity(n).data; // row c holds column c of V
        for _ in 0..JACOBI_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for i in 0..n {
                        let a = w[p * n + i];
                        let b = w[q * n + i];
                        alpha += a * a;
                        beta += b * b;
                        gamma += a * b;
                    }
                    if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..n {
                        let a = w[p * n + i];
                        let b = w[q * n + i];
                        w[p * n + i] = c * a - s * b;
                        w[q * n + i] = s * a + c * b;
                        let a = v[p * n + i];
                        let b = v[q * n + i];
                        v[p * n + i] = c * a - s * b;
                        v[q * n + i] = s * a + c * b;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut order: Vec<(f64, usize)> = (0..n)
            .map(|c| ((0..n).map(|i| w[c * n + i] * w[c * n + i]).sum::<f64>().sqrt(), c))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut u = Matrix::zeros(n);
        let mut vm = Matrix::zeros(n);
        let mut sigma = Vec::with_capacity(n);
        for (k, &(s, c)) in order.iter().enumerate() {
            sigma.push(s);
            for i in 0..n {
                vm.set(i, k, v[c * n + i]);
                u.set(i, k, if s > 0.0 { w[c * n + i] / s } else { 0.0 });
            }
        }
        Svd { u, sigma, v: vm }
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        self.svd().sigma
    }

    /// Eigenvalues as (re, im) pairs, sorted by nonincreasing modulus.
    pub fn eigenvalues(&self) -> Result<Vec<(f64, f64)>> {
        let n = self.dim;
        if n == 0 {
            return Ok(Vec::new());
        }
        let m = DMatrix::from_row_slice(n, n, &self.data);
        let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
        let mut ev: Vec<(f64, f64)> = schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        ev.sort_by(|a, b| {
            b.0.hypot(b.1)
                .total_cmp(&a.0.hypot(a.1))
                .then(b.0.total_cmp(&a.0))
                .then(b.1.total_cmp(&a.1))
        });
        Ok(ev)
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().map(|(re, im)| re.hypot(*im)).unwrap_or(0.0))
    }

    /// Unit vector spanning the (numerical) kernel of `self − λI`.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let shifted = self - &Matrix::identity(self.dim).scale(lambda);
        let svd = shifted.svd();
        svd.v.column(self.dim - 1)
    }

    /// `t`-th compound matrix: minors indexed by lexicographic `t`-subsets.
    pub fn compound(&self, t: usize) -> Result<Matrix> {
        let d = self.dim;
        if t == 0 || t > d {
            return Err(Error::ExteriorDegree { t, d });
        }
        let subsets = subsets(d, t);
        let dim = subsets.len();
        if dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let mut out = Matrix::zeros(dim);
        for (r, rows) in subsets.iter().enumerate() {
            for (c, cols) in subsets.iter().enumerate() {
                let minor = Matrix::from_fn(t, |i, j| self.get(rows[i], cols[j]));
                out.set(r, c, minor.det());
            }
        }
        Ok(out)
    }
}

/// Result of [`Matrix::svd`]; `sigma` is sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

/// All `t`-element subsets of `0..d` in lexicographic order.
pub fn subsets(d: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < t - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, t, &mut Vec::new(), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Log of the singular value function `φ^s` from sorted singular values.
pub fn log_phi_s_from_sigma(sigma: &[f64], s: f64) -> f64 {
    let d = sigma.len();
    if s == 0.0 {
        return 0.0;
    }
    if s > d as f64 {
        let log_det: f64 = sigma.iter().map(|x| x.ln()).sum();
        return s / d as f64 * log_det;
    }
    let whole = s.floor() as usize;
    let frac = s - whole as f64;
    let mut acc: f64 = sigma[..whole].iter().map(|x| x.ln()).sum();
    if frac > 0.0 {
        acc += frac * sigma[whole].ln();
    }
    acc
}

/// Singular value function `φ^s(A)`.
pub fn phi_s(a: &Matrix, s: f64) -> Result<f64> {
    log_phi_s(a, s).map(f64::exp)
}

pub fn log_phi_s(a: &Matrix, s: f64) -> Result<f64> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::BadExponent(s));
    }
    let sigma = a.singular_values();
    if sigma.last().is_some_and(|&x| !(x > 0.0) || !x.is_finite()) || !sigma.iter().all(|x| x.is_finite()) {
        return Err(Error::Singular { det: a.det() });
    }
    Ok(log_phi_s_from_sigma(&sigma, s))
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Matrix { dim: n, data: out }
    }
}

impl Mul for Matrix {
    type Output = Matrix;

    fn mul(self, rhs: Matrix) -> Matrix {
        &self * &rhs
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Orthonormal basis (Gram-Schmidt, twice) of the span of `vectors`.
pub fn orthonormal_basis(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let norm0 = dot(v, v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut w: Vec<f64> = v.iter().map(|x| x / norm0).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = dot(&w, &w).sqrt();
        if n > tol {
            basis.push(w.iter().map(|x| x / n).collect());
        }
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_diagonal_is_exact() {
        let m = Matrix::diag(&[0.5, 3.0, 2.0]);
        assert_eq!(m.singular_values(), vec![3.0, 2.0, 0.5]);
    }

    #[test]
    fn svd_reconstructs() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 0.5], [-1.0, 0.3, 4.0], [2.0, 2.0, 1.0]]).unwrap();
        let svd = m.svd();
        let back = &(&svd.u * &Matrix::diag(&svd.sigma)) * &svd.v.transpose();
        assert!(back.dist(&m) < 1e-12);
        assert!((svd.sigma.iter().product::<f64>() - m.det().abs()).abs() < 1e-10);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Matrix::from_rows(&[[0.0, 2.0], [1.0, 1.0]]).unwrap();
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).dist(&Matrix::identity(2)) < 1e-15);
        assert!(Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap().inverse().is_err());
    }

    #[test]
    fn compound_of_diagonal() {
        let m = Matrix::diag(&[2.0, 3.0, 5.0]);
        assert_eq!(m.compound(2).unwrap(), Matrix::diag(&[6.0, 10.0, 15.0]));
        assert_eq!(Matrix::diag(&[2.0, 3.0]).compound(2).unwrap(), Matrix::scalar(6.0));
        assert!(m.compound(4).is_err());
    }

    #[test]
    fn phi_s_examples() {
        let m = Matrix::diag(&[2.0, 1.0]);
        assert_eq!(phi_s(&m, 1.5).unwrap(), 2.0);
        assert_eq!(phi_s(&m, 0.0).unwrap(), 1.0);
        assert!((phi_s(&m, 3.0).unwrap() - 2f64.powf(1.5)).abs() < 1e-12);
        assert!(phi_s(&Matrix::zeros(2), 1.0).is_err());
    }

    #[test]
    fn rotation_eigenvalues_are_complex() {
        let ev = Matrix::rotation(std::f64::consts::FRAC_PI_2).eigenvalues().unwrap();
        assert!((ev[0].0).abs() < 1e-12 && (ev[0].1.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(5, 2).len(), binomial(5, 2));
        assert_eq!(subsets(4, 2)[0], vec![0, 1]);
        assert_eq!(subsets(4, 2)[5], vec![2, 3]);
    }
}
