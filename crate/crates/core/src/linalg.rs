//! Small dense and banded linear algebra kernels.
//!
//! Everything assembled in this crate is either banded (tensor-grid FE
//! systems, coupled transverse systems, reduced block systems) or a small
//! dense symmetric matrix (POD correlation matrices), so these two cases are
//! all that is provided.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + ku`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j >= self.n || !self.in_band(i, j) {
            return 0.0;
        }
        self.data[i * self.width() + j + self.kl - i]
    }

    /// Accumulates `v` into entry `(i, j)`.
    ///
    /// Panics when the entry lies outside the band; assembly routines size
    /// the band from the stencil, so this is a programming error.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let w = self.width();
        self.data[i * w + j + self.kl - i] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let w = self.width();
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut s = 0.0;
            for j in lo..=hi {
                s += row[j + self.kl - i] * x[j];
            }
            *yi = s;
        }
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n.saturating_sub(1));
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    t.add(j, i, v);
                }
            }
        }
        t
    }

    /// `(A + Aᵀ) / 2`, stored with the symmetric bandwidth `max(kl, ku)`.
    pub fn symmetric_part(&self) -> BandMatrix {
        let b = self.kl.max(self.ku);
        let mut s = BandMatrix::zeros(self.n, b, b);
        for i in 0..self.n {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(self.n.saturating_sub(1));
            for j in lo..=hi {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                if v != 0.0 {
                    s.add(i, j, v);
                }
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<BandLu> {
        BandLu::factor(self)
    }
}

/// Band LU factors (`P A = L U`), U carries `kl + ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    uw: usize,
    // row i stores columns i - kl ..= i + kl + ku
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn factor(a: &BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let uw = kl + a.ku;
        let w = kl + uw + 1;
        let mut data = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + a.ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                data[i * w + j + kl - i] = a.get(i, j);
            }
        }
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].abs();
            for i in k + 1..=last {
                let v = data[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best <= scale * 1e-15 * f64::EPSILON {
                return Err(Error::Singular { column: k });
            }
            pivots[k] = p;
            let jmax = (k + uw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let piv = data[idx(k, k)];
            for i in k + 1..=last {
                let l = data[idx(i, k)] / piv;
                if l == 0.0 {
                    continue;
                }
                data[idx(i, k)] = l;
                for j in k + 1..=jmax {
                    let u = data[idx(k, j)];
                    if u != 0.0 {
                        data[idx(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            uw,
            data,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let kl = self.kl;
        let w = kl + self.uw + 1;
        let idx = |i: usize, j: usize| i * w + j + kl - i;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.data[idx(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + self.uw).min(n - 1) {
                s -= self.data[idx(k, j)] * b[j];
            }
            b[k] = s / self.data[idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Factors and solves `A x = b`, checking the relative residual against `tol`.
pub fn solve_checked(a: &BandMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.len(),
        });
    }
    let lu = a.lu()?;
    let x = lu.solve(b);
    check_residual(a, &x, b, tol)?;
    Ok(x)
}

pub(crate) fn check_residual(a: &BandMatrix, x: &[f64], b: &[f64], tol: f64) -> Result<()> {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let bn = norm2(b);
    // scale by ‖A‖‖x‖ as well so that tiny right-hand sides are not penalized
    let scale = bn.max(a.max_abs() * norm2(x));
    if r > tol * scale && r > 1e-300 {
        return Err(Error::ResidualTooLarge {
            residual: r,
            tolerance: tol * scale,
        });
    }
    Ok(())
}

/// Eigen-decomposition of a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in nonincreasing order.
    pub values: Vec<f64>,
    /// Column `k` (entries `k, n + k, ...` of the row-major buffer) is the
    /// unit eigenvector belonging to `values[k]`.
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Cyclic Jacobi eigenvalue iteration for a symmetric row-major `n × n` matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymEigen {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= 1e-17 * frob || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (newk, &oldk) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + newk] = v[i * n + oldk];
        }
    }
    SymEigen { values, vectors, n }
}

/// Lower Cholesky factor of a symmetric positive definite row-major matrix.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 {
            return Err(Error::Singular { column: j });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Solves `Lᵀ x = b` for a lower triangular row-major `L`.
pub fn solve_lower_transposed(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}
