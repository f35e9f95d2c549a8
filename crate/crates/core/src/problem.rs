//! Problem data, lifting functions and the bilinear (Q1) reference problem
//!
//! ```text
//! find p ∈ V:  a(p, v) = f(v) − a(h, v)   ∀ v ∈ V
//! a(u, v) = ∫ k ∇u·∇v + (b·∇u) v,   f(v) = ∫ F v
//! ```
//!
//! with homogeneous Dirichlet conditions on all of `∂Ω`; the lifting `h`
//! carries the boundary data and the physical field is `p + h`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{self, BandLu, BandMatrix};
use crate::mesh::{TensorGrid, GAUSS2_POINTS, GAUSS2_WEIGHTS};
use crate::{Error, Result};

pub type FieldFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A scalar function on `Ω` with a declared smoothness flag.
#[derive(Clone)]
pub struct ScalarField {
    f: FieldFn,
    smooth: bool,
}

impl ScalarField {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            smooth: true,
        }
    }

    /// A field with jumps; integrated with the same rule, flagged for callers.
    pub fn discontinuous(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            smooth: false,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |x, y| s * f(x, y)),
            smooth: self.smooth,
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("smooth", &self.smooth)
            .finish_non_exhaustive()
    }
}

/// Coefficients and data of the advection–diffusion problem on a rectangle.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub k: ScalarField,
    pub b1: ScalarField,
    pub b2: ScalarField,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub omega_x: (f64, f64),
    pub omega_y: (f64, f64),
}

impl ProblemData {
    /// `-Δp = F` with the given Dirichlet data.
    pub fn poisson(omega_x: (f64, f64), omega_y: (f64, f64), source: ScalarField, dirichlet: ScalarField) -> Self {
        Self {
            k: ScalarField::constant(1.0),
            b1: ScalarField::zero(),
            b2: ScalarField::zero(),
            source,
            dirichlet,
            omega_x,
            omega_y,
        }
    }

    pub fn with_diffusion(mut self, k: ScalarField) -> Self {
        self.k = k;
        self
    }

    pub fn with_advection(mut self, b1: ScalarField, b2: ScalarField) -> Self {
        self.b1 = b1;
        self.b2 = b2;
        self
    }

    pub fn check_grid(&self, grid: &TensorGrid) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs());
        if !close(grid.tx.start(), self.omega_x.0)
            || !close(grid.tx.end(), self.omega_x.1)
            || !close(grid.ty.start(), self.omega_y.0)
            || !close(grid.ty.end(), self.omega_y.1)
        {
            return Err(Error::invalid("grid does not match the problem domain"));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn diffusion_at(&self, x: f64, y: f64) -> Result<f64> {
        let k = self.k.eval(x, y);
        if !(k > 0.0) {
            return Err(Error::NonPositiveDiffusion { x, y, value: k });
        }
        Ok(k)
    }
}

/// Lifting `h` of the Dirichlet data, with first derivatives and an
/// optional Laplacian.
#[derive(Debug, Clone)]
pub struct LiftingFunction {
    pub value: ScalarField,
    pub dx: ScalarField,
    pub dy: ScalarField,
    pub laplacian: Option<ScalarField>,
}

impl LiftingFunction {
    pub fn new(value: ScalarField, dx: ScalarField, dy: ScalarField) -> Self {
        Self {
            value,
            dx,
            dy,
            laplacian: None,
        }
    }

    pub fn with_laplacian(mut self, lap: ScalarField) -> Self {
        self.laplacian = Some(lap);
        self
    }

    pub fn zero() -> Self {
        Self::new(ScalarField::zero(), ScalarField::zero(), ScalarField::zero()).with_laplacian(ScalarField::zero())
    }

    /// Linear blend of the traces at `x = x0` and `x = x1`:
    /// `(1 − t) h(x0, y) + t h(x1, y)` with `t = (x − x0)/(x1 − x0)`.
    pub fn affine_blend(&self, x0: f64, x1: f64) -> LiftingFunction {
        let len = x1 - x0;
        let v = self.value.clone();
        let value = ScalarField::new(move |x, y| {
            let t = (x - x0) / len;
            (1.0 - t) * v.eval(x0, y) + t * v.eval(x1, y)
        });
        let v = self.value.clone();
        let dx = ScalarField::new(move |_, y| (v.eval(x1, y) - v.eval(x0, y)) / len);
        let d = self.dy.clone();
        let dy = ScalarField::new(move |x, y| {
            let t = (x - x0) / len;
            (1.0 - t) * d.eval(x0, y) + t * d.eval(x1, y)
        });
        LiftingFunction::new(value, dx, dy)
    }

    pub fn scaled(&self, s: f64) -> LiftingFunction {
        LiftingFunction {
            value: self.value.scaled(s),
            dx: self.dx.scaled(s),
            dy: self.dy.scaled(s),
            laplacian: self.laplacian.as_ref().map(|l| l.scaled(s)),
        }
    }
}

/// How the lifting enters the discrete problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftingMode {
    /// `f(v) − a(h, v)` with the interface-carrying lifting `h`.
    WeakLifting,
    /// `f(v) + ∫ (k Δh − b·∇h) v`, no `a(h, ·)` term.
    DeltaH,
    /// Like `DeltaH` with `k Δh − b·∇h` replaced by `−R`, the L²-Riesz
    /// representative of `a(h, ·)` on the Q1 space.
    RieszRecon,
    /// Weak lifting with the affine blend of the `x`-boundary traces of `h`.
    PlainGd,
}

impl LiftingMode {
    pub const ALL: [LiftingMode; 4] = [
        LiftingMode::WeakLifting,
        LiftingMode::DeltaH,
        LiftingMode::RieszRecon,
        LiftingMode::PlainGd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LiftingMode::WeakLifting => "lift",
            LiftingMode::DeltaH => "delta-h",
            LiftingMode::RieszRecon => "riesz",
            LiftingMode::PlainGd => "gD",
        }
    }
}

impl core::str::FromStr for LiftingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lift" | "weak" | "weak_lifting" => Ok(LiftingMode::WeakLifting),
            "delta-h" | "delta_h" => Ok(LiftingMode::DeltaH),
            "riesz" | "riesz_recon" => Ok(LiftingMode::RieszRecon),
            "gD" | "gd" | "plain_gD" => Ok(LiftingMode::PlainGd),
            _ => Err(Error::invalid(alloc::format!("unknown lifting mode '{s}'"))),
        }
    }
}

/// A Q1 function given by its values at all nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub grid: TensorGrid,
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.grid.interpolate(&self.values, x, y)
    }
}

/// The data actually seen by every assembly routine once a lifting mode is
/// fixed: an effective source term and, for the weak modes, the lifting whose
/// `a(h, ·)` is subtracted.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub mode: LiftingMode,
    /// Physical lifting: the reconstructed field is `p + lifting`.
    pub lifting: LiftingFunction,
    /// `Some` when `a(lifting, ·)` appears on the right-hand side.
    pub weak_lifting: Option<LiftingFunction>,
    pub source: ScalarField,
    /// Riesz field `R` for [`LiftingMode::RieszRecon`].
    pub reconstruction: Option<Arc<NodalField>>,
}

impl Formulation {
    /// Builds the formulation; `grid` is only used by [`LiftingMode::RieszRecon`]
    /// to compute the Riesz field.
    pub fn new(pd: &ProblemData, lift: &LiftingFunction, mode: LiftingMode, grid: &TensorGrid) -> Result<Self> {
        match mode {
            LiftingMode::WeakLifting => Ok(Self {
                mode,
                lifting: lift.clone(),
                weak_lifting: Some(lift.clone()),
                source: pd.source.clone(),
                reconstruction: None,
            }),
            LiftingMode::PlainGd => {
                let gd = lift.affine_blend(pd.omega_x.0, pd.omega_x.1);
                Ok(Self {
                    mode,
                    lifting: gd.clone(),
                    weak_lifting: Some(gd),
                    source: pd.source.clone(),
                    reconstruction: None,
                })
            }
            LiftingMode::DeltaH => {
                let lap = lift.laplacian.clone().ok_or(Error::MissingLaplacian)?;
                let (f, k, b1, b2) = (pd.source.clone(), pd.k.clone(), pd.b1.clone(), pd.b2.clone());
                let (hx, hy) = (lift.dx.clone(), lift.dy.clone());
                let smooth = f.is_smooth() && lap.is_smooth();
                let g = move |x: f64, y: f64| {
                    f.eval(x, y) + k.eval(x, y) * lap.eval(x, y)
                        - b1.eval(x, y) * hx.eval(x, y)
                        - b2.eval(x, y) * hy.eval(x, y)
                };
                let source = if smooth {
                    ScalarField::new(g)
                } else {
                    ScalarField::discontinuous(g)
                };
                Ok(Self {
                    mode,
                    lifting: lift.clone(),
                    weak_lifting: None,
                    source,
                    reconstruction: None,
                })
            }
            LiftingMode::RieszRecon => {
                let r = Arc::new(crate::reduced::riesz_lifting_reconstruction(pd, lift, grid)?);
                let f = pd.source.clone();
                let rr = r.clone();
                let source = ScalarField::discontinuous(move |x, y| f.eval(x, y) - rr.eval(x, y));
                Ok(Self {
                    mode,
                    lifting: lift.clone(),
                    weak_lifting: None,
                    source,
                    reconstruction: Some(r),
                })
            }
        }
    }

    /// Right-hand side density at `(x, y)` tested against `(v, ∂x v, ∂y v)`.
    #[inline]
    pub(crate) fn rhs_density(&self, pd: &ProblemData, x: f64, y: f64, k: f64) -> RhsDensity {
        let src = self.source.eval(x, y);
        match &self.weak_lifting {
            None => RhsDensity {
                value: src,
                dx: 0.0,
                dy: 0.0,
            },
            Some(h) => {
                let hx = h.dx.eval(x, y);
                let hy = h.dy.eval(x, y);
                let adv = pd.b1.eval(x, y) * hx + pd.b2.eval(x, y) * hy;
                RhsDensity {
                    value: src - adv,
                    dx: -k * hx,
                    dy: -k * hy,
                }
            }
        }
    }
}

/// Coefficients of `∫ value·v + dx·∂x v + dy·∂y v`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RhsDensity {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Assembled linear system over the interior Q1 nodes (x-major ordering).
#[derive(Debug, Clone)]
pub struct ReferenceSystem {
    pub grid: TensorGrid,
    pub mode: LiftingMode,
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct QPoint {
    x: f64,
    y: f64,
    w: f64,
    // values and derivatives of the four local bilinear functions,
    // ordered (0,0), (0,1), (1,0), (1,1) in (x, y)
    phi: [f64; 4],
    dphi_x: [f64; 4],
    dphi_y: [f64; 4],
}

fn cell_qpoints(grid: &TensorGrid, ex: usize, ey: usize) -> [QPoint; 4] {
    let hx = grid.tx.spacing();
    let hy = grid.ty.spacing();
    let x0 = grid.tx.node(ex);
    let y0 = grid.ty.node(ey);
    let mut out = [QPoint {
        x: 0.0,
        y: 0.0,
        w: 0.0,
        phi: [0.0; 4],
        dphi_x: [0.0; 4],
        dphi_y: [0.0; 4],
    }; 4];
    let mut q = 0;
    for (gx, wx) in GAUSS2_POINTS.iter().zip(GAUSS2_WEIGHTS) {
        for (gy, wy) in GAUSS2_POINTS.iter().zip(GAUSS2_WEIGHTS) {
            let xs = [1.0 - gx, *gx];
            let ys = [1.0 - gy, *gy];
            let dxs = [-1.0 / hx, 1.0 / hx];
            let dys = [-1.0 / hy, 1.0 / hy];
            let p = &mut out[q];
            p.x = x0 + gx * hx;
            p.y = y0 + gy * hy;
            p.w = wx * wy * hx * hy;
            for a in 0..2 {
                for b in 0..2 {
                    let l = 2 * a + b;
                    p.phi[l] = xs[a] * ys[b];
                    p.dphi_x[l] = dxs[a] * ys[b];
                    p.dphi_y[l] = xs[a] * dys[b];
                }
            }
            q += 1;
        }
    }
    out
}

/// Interior index of local node `l` of cell `(ex, ey)`, if it is interior.
fn local_dof(grid: &TensorGrid, ex: usize, ey: usize, l: usize) -> Option<usize> {
    let i = ex + l / 2;
    let j = ey + l % 2;
    let nx = grid.tx.elements();
    let ny = grid.ty.elements();
    if i == 0 || i == nx || j == 0 || j == ny {
        None
    } else {
        Some(grid.interior_index(i, j))
    }
}

pub(crate) fn empty_operator(grid: &TensorGrid) -> BandMatrix {
    let n = grid.interior_count();
    let bw = grid.ty.interior_count() + 1;
    BandMatrix::zeros(n, bw, bw)
}

/// Assembles the operator `a(·,·)` alone.
pub fn assemble_operator(pd: &ProblemData, grid: &TensorGrid) -> Result<BandMatrix> {
    let mut a = empty_operator(grid);
    for ex in 0..grid.tx.elements() {
        for ey in 0..grid.ty.elements() {
            let dofs: [Option<usize>; 4] = core::array::from_fn(|l| local_dof(grid, ex, ey, l));
            for q in cell_qpoints(grid, ex, ey) {
                let k = pd.diffusion_at(q.x, q.y)?;
                let b1 = pd.b1.eval(q.x, q.y);
                let b2 = pd.b2.eval(q.x, q.y);
                for (c, dc) in dofs.iter().enumerate() {
                    let Some(row) = dc else { continue };
                    for (t, dt) in dofs.iter().enumerate() {
                        let Some(col) = dt else { continue };
                        let v = k * (q.dphi_x[t] * q.dphi_x[c] + q.dphi_y[t] * q.dphi_y[c])
                            + (b1 * q.dphi_x[t] + b2 * q.dphi_y[t]) * q.phi[c];
                        a.add(*row, *col, q.w * v);
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Assembles `∫ d·v + ex·∂x v + ey·∂y v` for a density given pointwise.
pub(crate) fn assemble_load<F>(grid: &TensorGrid, mut density: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64) -> Result<RhsDensity>,
{
    let mut rhs = vec![0.0; grid.interior_count()];
    for ex in 0..grid.tx.elements() {
        for ey in 0..grid.ty.elements() {
            let dofs: [Option<usize>; 4] = core::array::from_fn(|l| local_dof(grid, ex, ey, l));
            if dofs.iter().all(Option::is_none) {
                continue;
            }
            for q in cell_qpoints(grid, ex, ey) {
                let d = density(q.x, q.y)?;
                for (c, dc) in dofs.iter().enumerate() {
                    if let Some(row) = dc {
                        rhs[*row] += q.w * (d.value * q.phi[c] + d.dx * q.dphi_x[c] + d.dy * q.dphi_y[c]);
                    }
                }
            }
        }
    }
    Ok(rhs)
}

/// Right-hand side of the reference problem for a fixed formulation.
pub fn assemble_rhs(pd: &ProblemData, form: &Formulation, grid: &TensorGrid) -> Result<Vec<f64>> {
    assemble_load(grid, |x, y| {
        let k = pd.diffusion_at(x, y)?;
        Ok(form.rhs_density(pd, x, y, k))
    })
}

/// Q1 mass matrix over interior nodes (exact with the 2×2 rule).
pub fn assemble_mass(grid: &TensorGrid) -> BandMatrix {
    let mut m = empty_operator(grid);
    for ex in 0..grid.tx.elements() {
        for ey in 0..grid.ty.elements() {
            let dofs: [Option<usize>; 4] = core::array::from_fn(|l| local_dof(grid, ex, ey, l));
            for q in cell_qpoints(grid, ex, ey) {
                for (c, dc) in dofs.iter().enumerate() {
                    let Some(row) = dc else { continue };
                    for (t, dt) in dofs.iter().enumerate() {
                        let Some(col) = dt else { continue };
                        m.add(*row, *col, q.w * q.phi[t] * q.phi[c]);
                    }
                }
            }
        }
    }
    m
}

/// Matrix and right-hand side of the reference Q1 problem.
pub fn assemble_reference_system(
    pd: &ProblemData,
    lift: &LiftingFunction,
    grid: &TensorGrid,
    mode: LiftingMode,
) -> Result<ReferenceSystem> {
    pd.check_grid(grid)?;
    let form = Formulation::new(pd, lift, mode, grid)?;
    assemble_reference_with(pd, &form, grid)
}

pub fn assemble_reference_with(pd: &ProblemData, form: &Formulation, grid: &TensorGrid) -> Result<ReferenceSystem> {
    pd.check_grid(grid)?;
    Ok(ReferenceSystem {
        grid: grid.clone(),
        mode: form.mode,
        matrix: assemble_operator(pd, grid)?,
        rhs: assemble_rhs(pd, form, grid)?,
    })
}

/// Discrete reference solution `p^{H×h}` (homogenized part).
#[derive(Debug, Clone, PartialEq)]
pub struct FullSolution {
    pub grid: TensorGrid,
    /// Values at all grid nodes, boundary entries zero.
    pub coeffs: Vec<f64>,
    pub lifting_mode: LiftingMode,
}

impl FullSolution {
    pub fn interior(&self) -> Vec<f64> {
        self.grid.restrict_interior(&self.coeffs)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.grid.interpolate(&self.coeffs, x, y)
    }
}

pub const SOLVE_TOLERANCE: f64 = 1e-10;

pub fn solve_reference(system: &ReferenceSystem) -> Result<FullSolution> {
    let x = linalg::solve_checked(&system.matrix, &system.rhs, SOLVE_TOLERANCE)?;
    Ok(FullSolution {
        grid: system.grid.clone(),
        coeffs: system.grid.extend_interior(&x),
        lifting_mode: system.mode,
    })
}

/// `a_s(u, v)` for interior nodal vectors, where `a_s` is the symmetric part
/// of the assembled operator.
pub fn v_inner(grid: &TensorGrid, pd: &ProblemData, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = grid.interior_count();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let a = assemble_operator(pd, grid)?.symmetric_part();
    Ok(a.bilinear(u, v))
}

/// Reference problem with all factorizations needed by the reduced solves,
/// the estimator and the error norms.
#[derive(Debug, Clone)]
pub struct ReferenceModel {
    pub pd: ProblemData,
    pub form: Formulation,
    pub system: ReferenceSystem,
    pub lu: BandLu,
    /// Symmetric part of the operator: Gram matrix of the V-inner product.
    pub gram: BandMatrix,
    pub gram_lu: BandLu,
    pub mass: BandMatrix,
}

impl ReferenceModel {
    pub fn new(pd: &ProblemData, form: &Formulation, grid: &TensorGrid) -> Result<Self> {
        let system = assemble_reference_with(pd, form, grid)?;
        let lu = system.matrix.lu()?;
        let gram = system.matrix.symmetric_part();
        let gram_lu = gram.lu()?;
        Ok(Self {
            pd: pd.clone(),
            form: form.clone(),
            mass: assemble_mass(grid),
            system,
            lu,
            gram,
            gram_lu,
        })
    }

    pub fn build(pd: &ProblemData, lift: &LiftingFunction, mode: LiftingMode, grid: &TensorGrid) -> Result<Self> {
        let form = Formulation::new(pd, lift, mode, grid)?;
        Self::new(pd, &form, grid)
    }

    pub fn grid(&self) -> &TensorGrid {
        &self.system.grid
    }

    pub fn solve(&self) -> Result<FullSolution> {
        let x = self.lu.solve(&self.system.rhs);
        linalg::check_residual(&self.system.matrix, &x, &self.system.rhs, SOLVE_TOLERANCE)?;
        Ok(FullSolution {
            grid: self.grid().clone(),
            coeffs: self.grid().extend_interior(&x),
            lifting_mode: self.form.mode,
        })
    }

    /// `f(v) − a(h, v) − a(u, v)` for all interior test functions.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let au = self.system.matrix.mul_vec(u);
        self.system.rhs.iter().zip(au).map(|(b, a)| b - a).collect()
    }

    pub fn v_norm(&self, u: &[f64]) -> f64 {
        self.gram.bilinear(u, u).max(0.0).sqrt()
    }

    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.mass.bilinear(u, u).max(0.0).sqrt()
    }
}
