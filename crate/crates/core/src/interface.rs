//! Interface location from data functions, liftings that follow a located
//! interface, and the Boussinesq water-table model
//! `dw/dt − (K/2) Δ(w²) + N = 0`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mesh::Partition1D;
use crate::problem::{LiftingFunction, ProblemData, ScalarField};
use crate::{Error, Result};

/// Which derivative extremes mark the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumMode {
    Max,
    Min,
    Both,
}

/// Located interface: per coarse x-cell midpoint, the midpoints of the
/// selected fine y-elements.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceCurve {
    pub xs: Vec<f64>,
    pub ys_lo: Vec<f64>,
    pub ys_hi: Option<Vec<f64>>,
    /// Selected y-element indices `(lower, upper)` per x.
    pub elements: Vec<(usize, usize)>,
}

impl InterfaceCurve {
    /// Center line: the mean of both bands when present.
    pub fn centers(&self) -> Vec<f64> {
        match &self.ys_hi {
            Some(hi) => self.ys_lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            None => self.ys_lo.clone(),
        }
    }
}

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Transverse profile `s(t)` with derivatives and the range on which it is
/// defined.
#[derive(Clone)]
pub struct Profile {
    pub value: Fn1,
    pub deriv: Fn1,
    pub second: Option<Fn1>,
    pub range: (f64, f64),
}

impl Profile {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            second: None,
            range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn with_second(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(f));
        self
    }

    pub fn on(mut self, lo: f64, hi: f64) -> Self {
        self.range = (lo, hi);
        self
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("range", &self.range)
            .field("has_second", &self.second.is_some())
            .finish_non_exhaustive()
    }
}

/// For each coarse x-cell midpoint, samples `data` at the fine y-cell
/// midpoints and selects the element(s) where the forward difference is
/// extremal.
pub fn locate_interface(
    data: &ScalarField,
    coarse_x: &Partition1D,
    fine_y: &Partition1D,
    mode: ExtremumMode,
) -> Result<InterfaceCurve> {
    if coarse_x.elements() < 2 || fine_y.elements() < 4 {
        return Err(Error::invalid("need at least 2 coarse x-cells and 4 fine y-cells"));
    }
    let ny = fine_y.elements();
    let h = fine_y.spacing();
    let mut out = InterfaceCurve {
        xs: Vec::new(),
        ys_lo: Vec::new(),
        ys_hi: Some(Vec::new()),
        elements: Vec::new(),
    };
    let mut diffs = vec![0.0; ny - 1];
    for c in 0..coarse_x.elements() {
        let x = coarse_x.midpoint(c);
        let vals: Vec<f64> = (0..ny).map(|e| data.eval(x, fine_y.midpoint(e))).collect();
        for e in 0..ny - 1 {
            diffs[e] = (vals[e + 1] - vals[e]) / h;
        }
        let (lo_d, hi_d) = diffs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
        let scale = lo_d.abs().max(hi_d.abs());
        if !(hi_d - lo_d > 1e-12 * scale) {
            return Err(Error::NoInterface { x });
        }
        let (a, b) = match mode {
            ExtremumMode::Max => two_peaks(&diffs, 1.0),
            ExtremumMode::Min => two_peaks(&diffs, -1.0),
            ExtremumMode::Both => (argext(&diffs, 1.0, None), argext(&diffs, -1.0, None)),
        };
        let (lo, hi) = (a.min(b), a.max(b));
        out.xs.push(x);
        out.ys_lo.push(fine_y.midpoint(lo));
        if let Some(v) = out.ys_hi.as_mut() {
            v.push(fine_y.midpoint(hi));
        }
        out.elements.push((lo, hi));
    }
    if out.elements.iter().all(|(a, b)| a == b) {
        out.ys_hi = None;
    }
    Ok(out)
}

/// Index of the largest `sign·d`, excluding the neighbourhood of `skip`.
fn argext(d: &[f64], sign: f64, skip: Option<usize>) -> usize {
    let mut best = usize::MAX;
    let mut bv = f64::NEG_INFINITY;
    for (i, &v) in d.iter().enumerate() {
        if let Some(s) = skip {
            if i + 1 >= s && i <= s + 1 {
                continue;
            }
        }
        if sign * v > bv {
            bv = sign * v;
            best = i;
        }
    }
    best
}

/// The strongest extremum and, if at least half as strong and not adjacent,
/// the second one; otherwise the first twice.
fn two_peaks(d: &[f64], sign: f64) -> (usize, usize) {
    let first = argext(d, sign, None);
    let second = argext(d, sign, Some(first));
    if second != usize::MAX && sign * d[second] >= 0.5 * sign * d[first] && sign * d[first] > 0.0 {
        (first, second)
    } else {
        (first, first)
    }
}

/// Piecewise linear interpolant through `(xs, ys)`, extended linearly.
#[derive(Debug, Clone)]
struct Polyline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // Hermite slopes when smoothed
    slopes: Option<Vec<f64>>,
}

impl Polyline {
    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.iter().position(|&t| t > x) {
            None => n - 2,
            Some(0) => 0,
            Some(i) => (i - 1).min(n - 2),
        }
    }

    /// `(w, w', w'')`.
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let h = x1 - x0;
        let secant = (y1 - y0) / h;
        match &self.slopes {
            None => (y0 + secant * (x - x0), secant, 0.0),
            Some(m) => {
                // linear extension with the end slopes outside the knots
                if x < self.xs[0] {
                    return (self.ys[0] + m[0] * (x - self.xs[0]), m[0], 0.0);
                }
                let last = self.xs.len() - 1;
                if x > self.xs[last] {
                    return (self.ys[last] + m[last] * (x - self.xs[last]), m[last], 0.0);
                }
                let t = (x - x0) / h;
                let (m0, m1) = (m[i], m[i + 1]);
                let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
                let h10 = t * t * t - 2.0 * t * t + t;
                let h01 = -2.0 * t * t * t + 3.0 * t * t;
                let h11 = t * t * t - t * t;
                let v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
                let d00 = (6.0 * t * t - 6.0 * t) / h;
                let d10 = 3.0 * t * t - 4.0 * t + 1.0;
                let d01 = (-6.0 * t * t + 6.0 * t) / h;
                let d11 = 3.0 * t * t - 2.0 * t;
                let d = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
                let s00 = (12.0 * t - 6.0) / (h * h);
                let s10 = (6.0 * t - 4.0) / h;
                let s01 = (-12.0 * t + 6.0) / (h * h);
                let s11 = (6.0 * t - 2.0) / h;
                let s = s00 * y0 + s10 * m0 + s01 * y1 + s11 * m1;
                (v, d, s)
            }
        }
    }

    fn is_collinear(&self) -> bool {
        let n = self.xs.len();
        let s0 = (self.ys[1] - self.ys[0]) / (self.xs[1] - self.xs[0]);
        (1..n - 1).all(|i| {
            let s = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
            (s - s0).abs() <= 1e-10 * (1.0 + s0.abs())
        })
    }

    /// Fritsch–Carlson monotone slopes.
    fn smoothed(mut self) -> Self {
        let n = self.xs.len();
        let d: Vec<f64> = (0..n - 1)
            .map(|i| (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]))
            .collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (self.xs[i] - self.xs[i - 1], self.xs[i + 1] - self.xs[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / d[i - 1] + w2 / d[i])
            };
        }
        self.slopes = Some(m);
        self
    }
}

/// Builds `h(x, y) = s(y − w(x) + w(x₀))` from a located curve, where `w`
/// interpolates the curve centers and `x₀` is the left end of `Ω_1D`.
///
/// With `smooth` the interpolant is a monotone cubic. The Laplacian is
/// provided when the profile has a second derivative and `w` is smooth or
/// a straight line.
pub fn build_lifting(
    curve: &InterfaceCurve,
    profile: &Profile,
    pd: &ProblemData,
    smooth: bool,
) -> Result<LiftingFunction> {
    if curve.xs.len() < 2 {
        return Err(Error::invalid("interface curve needs at least two points"));
    }
    if curve.xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("curve abscissae must increase strictly"));
    }
    let mut w = Polyline {
        xs: curve.xs.clone(),
        ys: curve.centers(),
        slopes: None,
    };
    let collinear = w.is_collinear();
    if smooth {
        w = w.smoothed();
    }
    let (x0, x1) = pd.omega_x;
    let (y0, y1) = pd.omega_y;
    let anchor = w.eval(x0).0;
    let mut shifts: Vec<f64> = w.xs.iter().map(|&x| anchor - w.eval(x).0).collect();
    shifts.push(anchor - w.eval(x1).0);
    shifts.push(0.0);
    let smin = shifts.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (need_lo, need_hi) = (y0 + smin, y1 + smax);
    if need_lo < profile.range.0 || need_hi > profile.range.1 {
        return Err(Error::ProfileRange {
            lo: need_lo,
            hi: need_hi,
        });
    }
    let w = Arc::new(w);
    let arg = {
        let w = w.clone();
        move |x: f64, y: f64| y - w.eval(x).0 + anchor
    };
    let value = {
        let (p, a) = (profile.value.clone(), arg.clone());
        ScalarField::new(move |x, y| p(a(x, y)))
    };
    let dx = {
        let (p, a, w) = (profile.deriv.clone(), arg.clone(), w.clone());
        ScalarField::new(move |x, y| -w.eval(x).1 * p(a(x, y)))
    };
    let dy = {
        let (p, a) = (profile.deriv.clone(), arg.clone());
        ScalarField::new(move |x, y| p(a(x, y)))
    };
    let mut lift = LiftingFunction::new(value, dx, dy);
    if let (Some(p2), true) = (profile.second.clone(), smooth || collinear) {
        let (p1, a, w) = (profile.deriv.clone(), arg, w);
        lift = lift.with_laplacian(ScalarField::new(move |x, y| {
            let (_, d, s) = w.eval(x);
            let t = a(x, y);
            p2(t) * (1.0 + d * d) - s * p1(t)
        }));
    }
    Ok(lift)
}

/// Water table `w ≥ 0` on a 1D partition.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterTable {
    pub part: Partition1D,
    pub w: Vec<f64>,
    /// Hydraulic conductivity `K`.
    pub conductivity: f64,
    /// Accretion rate `N`.
    pub accretion: f64,
}

/// Semi-implicit steps of `dw/dt = K ∂x(w ∂x w) − N` with Dirichlet ends:
/// the face coefficient `w` is taken from the previous step. Returns the
/// nodal heights at every step, starting with the initial state.
pub fn solve_boussinesq(wt: &WaterTable, dt: f64, t_final: f64, bc: (f64, f64)) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::invalid("dt must be positive and T nonnegative"));
    }
    let n = wt.part.elements();
    if wt.w.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: wt.w.len(),
        });
    }
    if wt.w.iter().any(|v| !(*v >= 0.0)) || bc.0 < 0.0 || bc.1 < 0.0 {
        return Err(Error::invalid("water table heights must be nonnegative"));
    }
    let steps = (t_final / dt).round() as usize;
    let h = wt.part.spacing();
    let c = wt.conductivity * dt / (h * h);
    let mut traj = Vec::with_capacity(steps + 1);
    let mut w = wt.w.clone();
    w[0] = bc.0;
    w[n] = bc.1;
    traj.push(w.clone());
    let m = n - 1;
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for _ in 0..steps {
        for i in 1..n {
            let fl = 0.5 * (w[i - 1] + w[i]);
            let fr = 0.5 * (w[i] + w[i + 1]);
            let r = i - 1;
            lower[r] = -c * fl;
            upper[r] = -c * fr;
            diag[r] = 1.0 + c * (fl + fr);
            rhs[r] = w[i] - dt * wt.accretion;
        }
        rhs[0] += c * 0.5 * (w[0] + w[1]) * bc.0;
        rhs[m - 1] += c * 0.5 * (w[n - 1] + w[n]) * bc.1;
        let x = thomas(&lower, &diag, &upper, &rhs)?;
        w[1..n].copy_from_slice(&x);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("water table step produced non-finite heights"));
        }
        traj.push(w.clone());
    }
    Ok(traj)
}

/// Tridiagonal solve without pivoting; fails on a vanishing pivot.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if !(piv.abs() > 1e-300) {
        return Err(Error::Singular { column: 0 });
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if !(piv.abs() > 1e-300) {
            return Err(Error::Singular { column: i });
        }
        c[i] = upper[i] / piv;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
