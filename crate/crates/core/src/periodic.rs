//! Uniform periodic grids on `S_m^1 = R / 2mπZ`, positive profiles sampled on
//! them, and the closure functional `∫ v^{1-p} e^{ix} dx`.
//!
//! Grids are node-centred: node `i` sits at `x_i = -mπ + i·2mπ/n`, so the
//! reflection `x ↦ -x` maps node `i` to node `(n - i) mod n` and node `n/2`
//! (the origin) is fixed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// Smallest grid `make_grid` accepts.
pub const MIN_GRID: usize = 4;
/// Smallest grid a flow run accepts.
pub const MIN_FLOW_GRID: usize = 16;

/// Uniform partition of `[-mπ, mπ)` with `n` nodes.
pub fn make_grid(m: u32, n: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(FlowError::InvalidParameter("rotation index m must be >= 1".into()));
    }
    if !n.is_multiple_of(2) || n < MIN_GRID {
        return Err(FlowError::InvalidParameter(format!(
            "grid size must be even and >= {MIN_GRID}, got {n}"
        )));
    }
    let h = grid_spacing(m, n);
    let half = (n / 2) as f64;
    Ok((0..n).map(|i| (i as f64 - half) * h).collect())
}

pub fn grid_spacing(m: u32, n: usize) -> f64 {
    2.0 * m as f64 * PI / n as f64
}

/// `x^p`, using repeated multiplication when `p` is a small integer.
#[inline]
pub fn real_pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 16.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Finite-difference order for the periodic derivative stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Second,
    #[default]
    Fourth,
}

/// Parameters of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    /// Exponent `p = 1 + 1/α`.
    pub p: f64,
    /// Rotation index.
    pub m: u32,
    pub n_grid: usize,
    pub cfl: f64,
    /// Stop once `v_max >= v_cap · v_max(0)`.
    pub v_cap: f64,
    pub closure_tol: f64,
    pub stencil: Stencil,
    /// Optional stopping time, needed when `p <= 0` (no finite-time blow-up).
    pub t_horizon: Option<f64>,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            p: 2.0,
            m: 2,
            n_grid: 256,
            cfl: 0.4,
            v_cap: 100.0,
            closure_tol: 1e-8,
            stencil: Stencil::Fourth,
            t_horizon: None,
            max_steps: 50_000_000,
        }
    }
}

impl FlowParams {
    pub fn new(p: f64, m: u32, n_grid: usize) -> Result<Self> {
        let params = FlowParams { p, m, n_grid, ..Default::default() };
        params.validate()?;
        Ok(params)
    }

    /// Builds the parameters from `α`, so that `p = 1 + 1/α`.
    pub fn from_alpha(alpha: f64, m: u32, n_grid: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(FlowError::InvalidParameter(format!("alpha must be finite and nonzero, got {alpha}")));
        }
        Self::new(1.0 + 1.0 / alpha, m, n_grid)
    }

    /// `α = 1/(p - 1)`, undefined at `p = 1`.
    pub fn alpha(&self) -> Option<f64> {
        (self.p != 1.0).then(|| 1.0 / (self.p - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FlowError::InvalidParameter(msg));
        if !self.p.is_finite() {
            return bad(format!("p must be finite, got {}", self.p));
        }
        if self.m == 0 {
            return bad("rotation index m must be >= 1".into());
        }
        if self.n_grid < MIN_FLOW_GRID || !self.n_grid.is_multiple_of(2) {
            return bad(format!("n_grid must be even and >= {MIN_FLOW_GRID}, got {}", self.n_grid));
        }
        if self.n_grid <= 2 * self.m as usize {
            return bad(format!("n_grid {} does not resolve the first harmonic on S_{}", self.n_grid, self.m));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0,1), got {}", self.cfl));
        }
        if !(self.v_cap > 1.0) {
            return bad(format!("v_cap must exceed 1, got {}", self.v_cap));
        }
        if !(self.closure_tol > 0.0) {
            return bad(format!("closure_tol must be positive, got {}", self.closure_tol));
        }
        if let Some(t) = self.t_horizon {
            if !(t > 0.0) {
                return bad(format!("t_horizon must be positive, got {t}"));
            }
        }
        if self.p <= 0.0 && self.t_horizon.is_none() {
            return bad("p <= 0 never blows up; a t_horizon is required".into());
        }
        Ok(())
    }
}

/// Samples of a positive `2mπ`-periodic function on the node-centred grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicProfile {
    m: u32,
    values: Vec<f64>,
}

impl PeriodicProfile {
    /// Wraps `values`, rejecting non-positive or non-finite samples.
    pub fn new(m: u32, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(FlowError::InvalidParameter("rotation index m must be >= 1".into()));
        }
        if !values.len().is_multiple_of(2) || values.len() < MIN_GRID {
            return Err(FlowError::InvalidParameter(format!(
                "grid size must be even and >= {MIN_GRID}, got {}",
                values.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(FlowError::NonPositive { index, value });
        }
        Ok(PeriodicProfile { m, values })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(m: u32, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let xs = make_grid(m, n)?;
        Self::new(m, xs.into_iter().map(f).collect())
    }

    pub fn constant(m: u32, n: usize, c: f64) -> Result<Self> {
        Self::from_fn(m, n, |_| c)
    }

    /// CSV with header `x,value`, one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{:.16e},{:.16e}\n", self.x(i), v));
        }
        out
    }

    /// Parses the output of [`PeriodicProfile::to_csv`]. The rotation index is
    /// read off the first abscissa, which must be `-mπ`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("x,value") => {}
            other => return Err(FlowError::Io(format!("expected header x,value, found {other:?}"))),
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut cols = line.split(',');
            let mut field = || -> Result<f64> {
                cols.next()
                    .and_then(|c| c.trim().parse().ok())
                    .ok_or_else(|| FlowError::Io(format!("bad profile row {}: {line}", k + 2)))
            };
            xs.push(field()?);
            vs.push(field()?);
        }
        let first = *xs.first().ok_or_else(|| FlowError::Io("profile has no rows".into()))?;
        let m = (-first / PI).round();
        if !(m >= 1.0) {
            return Err(FlowError::GridMismatch(format!("first abscissa {first} is not -m*pi")));
        }
        let grid = make_grid(m as u32, xs.len())?;
        let h = grid_spacing(m as u32, xs.len());
        if let Some(i) = grid.iter().zip(&xs).position(|(g, x)| (g - x).abs() > 1e-9 * h.max(1.0)) {
            return Err(FlowError::GridMismatch(format!("abscissa {} at row {} is off the grid", xs[i], i + 2)));
        }
        Self::new(m as u32, vs)
    }

    pub(crate) fn from_values_unchecked(m: u32, values: Vec<f64>) -> Self {
        PeriodicProfile { m, values }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dx(&self) -> f64 {
        grid_spacing(self.m, self.len())
    }

    /// Abscissa of node `i`, computed as `(i - n/2)·Δx` so that mirror nodes
    /// carry exactly negated abscissae.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.len() / 2) as f64) * self.dx()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        self.len() / 2
    }

    /// Index of the mirror node of `i` under `x ↦ -x`.
    pub fn mirror(&self, i: usize) -> usize {
        (self.len() - i) % self.len()
    }

    /// Index of the node nearest to `x` (reduced modulo `2mπ`).
    pub fn nearest_index(&self, x: f64) -> usize {
        let n = self.len() as f64;
        let k = ((x + self.m as f64 * PI) / self.dx()).round();
        (k.rem_euclid(n)) as usize
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First index attaining the maximum.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Pointwise map, re-validating positivity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.m, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Largest deviation from evenness, `max_i |v_i - v_{-i}|`.
    pub fn asymmetry(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.values[i] - self.values[self.mirror(i)]).abs())
            .fold(0.0, f64::max)
    }

    /// Even about `x = 0` and strictly decreasing on `(0, mπ)`.
    pub fn is_symmetric_decreasing(&self, tol: f64) -> bool {
        if self.asymmetry() > tol {
            return false;
        }
        let n = self.len();
        (n / 2..n).all(|i| self.values[i] > self.values[(i + 1) % n])
    }

    pub fn second_derivative(&self, stencil: Stencil) -> Vec<f64> {
        second_derivative(&self.values, self.dx(), stencil)
    }

    pub fn first_derivative(&self, stencil: Stencil) -> Vec<f64> {
        first_derivative(&self.values, self.dx(), stencil)
    }

    /// Trapezoid (exact-periodic) integral of `f(x_i, v_i)` over the full circle.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let h = self.dx();
        self.values.iter().enumerate().map(|(i, &v)| f(self.x(i), v)).sum::<f64>() * h
    }
}

/// Periodic second difference. Symmetric pairs are summed first so that even
/// data yields bit-exactly even output.
pub fn second_derivative(v: &[f64], h: f64, stencil: Stencil) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    match stencil {
        Stencil::Second => {
            let c = 1.0 / (h * h);
            for i in 0..n {
                let l = v[(i + n - 1) % n];
                let r = v[(i + 1) % n];
                out[i] = ((l + r) - 2.0 * v[i]) * c;
            }
        }
        Stencil::Fourth => {
            let c = 1.0 / (12.0 * h * h);
            for i in 0..n {
                let l1 = v[(i + n - 1) % n];
                let r1 = v[(i + 1) % n];
                let l2 = v[(i + n - 2) % n];
                let r2 = v[(i + 2) % n];
                out[i] = (16.0 * (l1 + r1) - (l2 + r2) - 30.0 * v[i]) * c;
            }
        }
    }
    out
}

/// Periodic central first difference.
pub fn first_derivative(v: &[f64], h: f64, stencil: Stencil) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    match stencil {
        Stencil::Second => {
            let c = 1.0 / (2.0 * h);
            for i in 0..n {
                out[i] = (v[(i + 1) % n] - v[(i + n - 1) % n]) * c;
            }
        }
        Stencil::Fourth => {
            let c = 1.0 / (12.0 * h);
            for i in 0..n {
                let d1 = v[(i + 1) % n] - v[(i + n - 1) % n];
                let d2 = v[(i + 2) % n] - v[(i + n - 2) % n];
                out[i] = (8.0 * d1 - d2) * c;
            }
        }
    }
    out
}

/// Spectral second derivative of periodic samples over `[-mπ, mπ)`.
///
/// The Nyquist mode is dropped.
pub fn spectral_second_derivative(v: &[f64], m: u32) -> Vec<f64> {
    use rustfft::{num_complex::Complex, FftPlanner};
    let n = v.len();
    let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / m as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        *c *= if 2 * k == n { 0.0 } else { -(freq * scale).powi(2) / n as f64 };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Number of sign changes of a periodic sequence, exact zeros skipped.
pub fn count_sign_changes(values: &[f64]) -> usize {
    let signs: Vec<bool> = values.iter().filter(|v| **v != 0.0).map(|v| *v > 0.0).collect();
    if signs.len() < 2 {
        return 0;
    }
    let n = signs.len();
    (0..n).filter(|&i| signs[i] != signs[(i + 1) % n]).count()
}

/// Samples of `v_x` below this fraction of `max |v_x|` count as zeros.
pub const SLOPE_ZERO_TOL: f64 = 1e-9;

/// Sign changes of a derivative sample, ignoring roundoff-level values.
pub fn zero_count(vx: &[f64]) -> usize {
    let scale = vx.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    let cleaned: Vec<f64> = vx.iter().map(|&d| if d.abs() <= SLOPE_ZERO_TOL * scale { 0.0 } else { d }).collect();
    count_sign_changes(&cleaned)
}

/// Value of `∫ f e^{ix} dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ComplexMoment {
    pub re: f64,
    pub im: f64,
}

impl ComplexMoment {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// The density `v^{1-p}` whose first Fourier mode encodes closure (`log v` at `p = 1`).
pub fn closure_density(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.ln()
    } else {
        real_pow(v, 1.0 - p)
    }
}

fn density_inverse(f: f64, p: f64) -> f64 {
    if p == 1.0 {
        f.exp()
    } else {
        f.powf(1.0 / (1.0 - p))
    }
}

/// Trapezoid approximation of `∫_{-mπ}^{mπ} v^{1-p}(x) e^{ix} dx`.
pub fn closure_moment(v: &PeriodicProfile, p: f64) -> ComplexMoment {
    let h = v.dx();
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &vi) in v.values().iter().enumerate() {
        let f = closure_density(vi, p);
        let (s, c) = v.x(i).sin_cos();
        re += f * c;
        im += f * s;
    }
    ComplexMoment { re: re * h, im: im * h }
}

/// Reasons a closure projection may surprise the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionWarning {
    /// The input was even and decreasing on `(0, mπ)`; the output is not.
    SymmetricClassLost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureProjection {
    pub profile: PeriodicProfile,
    /// Removed first-harmonic coefficients of the density.
    pub removed: ComplexMoment,
    pub warning: Option<ProjectionWarning>,
}

/// Removes the `cos x`, `sin x` components of `f = v0^{1-p}` (discrete L²
/// projection) and maps back, so that the closure moment vanishes.
pub fn project_closure(v0: &PeriodicProfile, p: f64) -> Result<ClosureProjection> {
    let n = v0.len();
    if n <= 2 * v0.m() as usize {
        return Err(FlowError::InvalidParameter(format!(
            "grid of {n} nodes cannot resolve the first harmonic on S_{}",
            v0.m()
        )));
    }
    let trig: Vec<(f64, f64)> = (0..n).map(|i| v0.x(i).sin_cos()).collect();
    let f: Vec<f64> = v0.values().iter().map(|&v| closure_density(v, p)).collect();
    let (mut fc, mut fs, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
    for (fi, &(s, c)) in f.iter().zip(&trig) {
        fc += fi * c;
        fs += fi * s;
        cc += c * c;
        ss += s * s;
    }
    let (a, b) = (fc / cc, fs / ss);
    let mut out = Vec::with_capacity(n);
    for (fi, &(s, c)) in f.iter().zip(&trig) {
        let g = fi - a * c - b * s;
        if p != 1.0 && g <= 0.0 {
            return Err(FlowError::ProjectionNonPositive);
        }
        out.push(density_inverse(g, p));
    }
    let profile = PeriodicProfile::new(v0.m(), out).map_err(|_| FlowError::ProjectionNonPositive)?;
    let warning = (v0.is_symmetric_decreasing(1e-12) && !profile.is_symmetric_decreasing(1e-12))
        .then_some(ProjectionWarning::SymmetricClassLost);
    Ok(ClosureProjection { profile, removed: ComplexMoment { re: a, im: b }, warning })
}

/// `max_i |a_i - b_i|` on a shared grid.
pub fn sup_norm_distance(a: &PeriodicProfile, b: &PeriodicProfile) -> Result<f64> {
    if a.m() != b.m() || a.len() != b.len() {
        return Err(FlowError::GridMismatch(format!(
            "(m={}, n={}) vs (m={}, n={})",
            a.m(),
            a.len(),
            b.m(),
            b.len()
        )));
    }
    Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
