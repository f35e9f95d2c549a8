//! Uniform 1D partitions, tensor grids and P1 hat functions.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Two-point Gauss–Legendre rule on the reference interval `[0, 1]`.
pub const GAUSS2_POINTS: [f64; 2] = [
    0.5 - 0.288_675_134_594_812_9, // 1/(2√3)
    0.5 + 0.288_675_134_594_812_9,
];
pub const GAUSS2_WEIGHTS: [f64; 2] = [0.5, 0.5];

/// Equidistant subdivision of `[a, b]` into `n` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    a: f64,
    b: f64,
    n: usize,
    nodes: Vec<f64>,
}

impl Partition1D {
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidPartition { a, b, n });
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
        nodes[n] = b;
        Ok(Self { a, b, n, nodes })
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Number of elements.
    pub fn elements(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    /// Number of nodes strictly inside `(a, b)`.
    pub fn interior_count(&self) -> usize {
        self.n - 1
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn midpoint(&self, e: usize) -> f64 {
        0.5 * (self.nodes[e] + self.nodes[e + 1])
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Element containing `x`; nodes belong to the element on their right
    /// except for `b`, which belongs to the last element.
    pub fn element_of(&self, x: f64) -> usize {
        let t = ((x - self.a) / self.spacing()).floor();
        if t < 0.0 {
            0
        } else {
            (t as usize).min(self.n - 1)
        }
    }

    /// The two Gauss points of element `e` and their physical weights.
    pub fn gauss_points(&self, e: usize) -> [(f64, f64); 2] {
        let h = self.spacing();
        let x0 = self.nodes[e];
        [
            (x0 + GAUSS2_POINTS[0] * h, GAUSS2_WEIGHTS[0] * h),
            (x0 + GAUSS2_POINTS[1] * h, GAUSS2_WEIGHTS[1] * h),
        ]
    }

    /// Value and derivative of the hat function of node `i` at `x`.
    ///
    /// At a node the derivative is the mean of the one-sided derivatives
    /// (zero at the peak of the hat).
    pub fn eval_p1(&self, i: usize, x: f64) -> Result<(f64, f64)> {
        if i > self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n + 1,
            });
        }
        if !self.contains(x) {
            return Err(Error::OutOfDomain(x));
        }
        Ok(hat(&self.nodes, i, x))
    }

    /// Interpolates nodal values (length `n + 1`) at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let e = self.element_of(x);
        let t = (x - self.nodes[e]) / self.spacing();
        (1.0 - t) * values[e] + t * values[e + 1]
    }

    /// Consistent P1 mass matrix over all nodes as (diag, offdiag) vectors.
    pub fn mass_tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.spacing();
        let mut d = alloc::vec![0.0; self.n + 1];
        let o = alloc::vec![h / 6.0; self.n];
        for e in 0..self.n {
            d[e] += h / 3.0;
            d[e + 1] += h / 3.0;
        }
        (d, o)
    }
}

/// Hat function of node `i` on an arbitrary sorted node list.
///
/// Returns `(value, derivative)`; the derivative at a node is the average of
/// its one-sided limits.
pub fn hat(nodes: &[f64], i: usize, x: f64) -> (f64, f64) {
    let xi = nodes[i];
    let left = i.checked_sub(1).map(|k| nodes[k]);
    let right = nodes.get(i + 1).copied();
    let mut value = 0.0;
    if let Some(l) = left {
        if x > l && x <= xi {
            value = (x - l) / (xi - l);
        }
    }
    if let Some(r) = right {
        if x >= xi && x < r {
            value = (r - x) / (r - xi);
        }
    }
    if x == xi {
        value = 1.0;
    }
    let rise = left.map(|l| (l, 1.0 / (xi - l)));
    let fall = right.map(|r| (r, -1.0 / (r - xi)));
    // derivative limit from the left of x
    let d_minus = match (rise, fall) {
        (Some((l, s)), _) if x > l && x <= xi => s,
        (_, Some((r, s))) if x > xi && x <= r => s,
        _ => 0.0,
    };
    // derivative limit from the right of x
    let d_plus = match (rise, fall) {
        (Some((l, s)), _) if x >= l && x < xi => s,
        (_, Some((r, s))) if x >= xi && x < r => s,
        _ => 0.0,
    };
    (value, 0.5 * (d_minus + d_plus))
}

/// Tensor-product grid: `tx` along the dominant direction, `ty` transverse.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub tx: Partition1D,
    pub ty: Partition1D,
}

impl TensorGrid {
    pub fn new(tx: Partition1D, ty: Partition1D) -> Self {
        Self { tx, ty }
    }

    pub fn uniform(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        Ok(Self {
            tx: Partition1D::uniform(x.0, x.1, nx)?,
            ty: Partition1D::uniform(y.0, y.1, ny)?,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.tx.elements() * self.ty.elements()
    }

    /// Q1 space dimension including boundary nodes.
    pub fn node_count(&self) -> usize {
        self.tx.node_count() * self.ty.node_count()
    }

    pub fn interior_count(&self) -> usize {
        self.tx.interior_count() * self.ty.interior_count()
    }

    /// Index of interior node `(i, j)` (1-based node indices, x-major).
    #[inline]
    pub fn interior_index(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.ty.interior_count() + (j - 1)
    }

    /// Index of node `(i, j)` in the full row-major-in-x node array.
    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * self.ty.node_count() + j
    }

    /// Expands an interior vector to all nodes with zero boundary values.
    pub fn extend_interior(&self, interior: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.tx.elements(), self.ty.elements());
        let mut full = alloc::vec![0.0; self.node_count()];
        for i in 1..nx {
            for j in 1..ny {
                full[self.node_index(i, j)] = interior[self.interior_index(i, j)];
            }
        }
        full
    }

    pub fn restrict_interior(&self, full: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.tx.elements(), self.ty.elements());
        let mut v = alloc::vec![0.0; self.interior_count()];
        for i in 1..nx {
            for j in 1..ny {
                v[self.interior_index(i, j)] = full[self.node_index(i, j)];
            }
        }
        v
    }

    /// Bilinear interpolation of a full nodal array at `(x, y)`.
    pub fn interpolate(&self, full: &[f64], x: f64, y: f64) -> f64 {
        let ex = self.tx.element_of(x);
        let ey = self.ty.element_of(y);
        let s = (x - self.tx.node(ex)) / self.tx.spacing();
        let t = (y - self.ty.node(ey)) / self.ty.spacing();
        let v = |i, j| full[self.node_index(i, j)];
        (1.0 - s) * ((1.0 - t) * v(ex, ey) + t * v(ex, ey + 1))
            + s * ((1.0 - t) * v(ex + 1, ey) + t * v(ex + 1, ey + 1))
    }

    /// Nodal interpolant over all nodes.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.node_count());
        for &x in self.tx.nodes() {
            for &y in self.ty.nodes() {
                v.push(f(x, y));
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_partition_nodes() {
        let p = Partition1D::uniform(0.0, 2.0, 4).unwrap();
        assert_eq!(p.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let p = Partition1D::uniform(0.0, 1.0, 1).unwrap();
        assert_eq!(p.nodes(), &[0.0, 1.0]);
        let p = Partition1D::uniform(0.0, 2.0, 800).unwrap();
        assert_eq!(p.node_count(), 801);
        assert!((p.spacing() - 0.0025).abs() < 1e-15);
        for w in p.nodes().windows(2) {
            assert!((w[1] - w[0] - 0.0025).abs() < 1e-12);
        }
        assert_eq!(p.node(800), 2.0);
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(Partition1D::uniform(0.0, 1.0, 0).is_err());
        assert!(Partition1D::uniform(1.0, 1.0, 3).is_err());
        assert!(Partition1D::uniform(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn hat_values_and_node_convention() {
        let p = Partition1D::uniform(0.0, 1.0, 2).unwrap();
        assert_eq!(p.eval_p1(1, 0.5).unwrap(), (1.0, 0.0));
        assert_eq!(p.eval_p1(0, 0.25).unwrap(), (0.5, -2.0));
        assert!(matches!(
            p.eval_p1(3, 0.5),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
        let s: f64 = (0..=2).map(|i| p.eval_p1(i, 0.33).unwrap().0).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bilinear_interpolation_is_exact_for_bilinear_fields() {
        let g = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 5, 3).unwrap();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * y;
        let v = g.sample(f);
        for &(x, y) in &[(0.13, 0.77), (1.99, 0.01), (1.0, 0.5)] {
            assert!((g.interpolate(&v, x, y) - f(x, y)).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(n in 1usize..40, t in 0.0f64..1.0) {
            let p = Partition1D::uniform(-1.0, 3.0, n).unwrap();
            let x = -1.0 + 4.0 * t;
            let s: f64 = (0..=n).map(|i| p.eval_p1(i, x).unwrap().0).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let ds: f64 = (0..=n).map(|i| p.eval_p1(i, x).unwrap().1).sum();
            prop_assert!(ds.abs() < 1e-9);
        }

        #[test]
        fn derivative_matches_finite_difference(n in 1usize..30, i in 0usize..31, t in 0.0f64..1.0) {
            let p = Partition1D::uniform(0.0, 1.0, n).unwrap();
            let i = i.min(n);
            let h = p.spacing();
            let e = ((t * n as f64) as usize).min(n - 1);
            // interior point of element e, away from nodes
            let x = p.node(e) + h * (0.05 + 0.9 * (t * n as f64).fract());
            let step = 1e-6;
            let (v1, _) = p.eval_p1(i, x - step).unwrap();
            let (v2, _) = p.eval_p1(i, x + step).unwrap();
            let (_, d) = p.eval_p1(i, x).unwrap();
            prop_assert!(((v2 - v1) / (2.0 * step) - d).abs() <= 1e-4 * (1.0 + d.abs()));
        }
    }
}
