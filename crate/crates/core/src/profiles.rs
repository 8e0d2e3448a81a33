//! Homothetic profiles: periodic solutions of `w'' + w - w^{1-p} = 0`.
//!
//! Orbits of the steady equation are level sets of
//! `E = (w')² + F(w)` with `F(s) = s² - (2/(2-p)) s^{2-p}` (`s² - 2 log s` at
//! `p = 2`). A profile oscillates between its minimum `a ≤ 1` and its
//! companion maximum `b ≥ 1`; the half period is
//! `R(a) = ∫_a^b ds / sqrt(F(a) - F(s))`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::periodic::{real_pow, second_derivative, spectral_second_derivative, PeriodicProfile, Stencil};

/// Gauss–Legendre nodes used by [`half_period`].
pub const PERIOD_NODES: usize = 256;
/// Integration steps per half period before refinement.
pub const BASE_STEPS: usize = 5000;
/// Tolerated drift of the first integral along an integrated profile.
pub const ENERGY_TOL: f64 = 1e-6;
const MAX_REFINEMENTS: u32 = 6;

fn check_positive(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(FlowError::InvalidParameter(format!("argument must be positive, got {s}")))
    }
}

/// The energy landscape `F(s)`.
pub fn energy_f(s: f64, p: f64) -> Result<f64> {
    check_positive(s)?;
    Ok(EnergyLandscape { p }.value(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLandscape {
    pub p: f64,
}

impl EnergyLandscape {
    /// `F(s)` for `s > 0` (unchecked).
    pub fn value(&self, s: f64) -> f64 {
        let p = self.p;
        if p == 2.0 {
            s * s - 2.0 * s.ln()
        } else {
            s * s - 2.0 / (2.0 - p) * real_pow(s, 2.0 - p)
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        2.0 * s - 2.0 * real_pow(s, 1.0 - self.p)
    }

    /// `F(a) - F(a + d)` without cancellation for small `d`.
    fn drop_from(&self, a: f64, d: f64) -> f64 {
        let p = self.p;
        let quad = -d * (2.0 * a + d);
        let r = (d / a).ln_1p();
        if p == 2.0 {
            quad + 2.0 * r
        } else {
            let q = 2.0 - p;
            quad + 2.0 / q * real_pow(a, q) * (q * r).exp_m1()
        }
    }

    /// First integral `(w')² + F(w)` of the steady equation.
    pub fn orbit_energy(&self, w: f64, dw: f64) -> f64 {
        dw * dw + self.value(w)
    }
}

/// Result of [`companion_max`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompanionMax {
    pub b: f64,
    /// Set when `a ≥ 1`: the orbit collapses to the constant solution.
    pub degenerate: bool,
}

/// The unique `b > 1` with `F(b) = F(a)`, by bisection on `(1, 2 sqrt(F(a))]`.
pub fn companion_max(a: f64, p: f64) -> Result<CompanionMax> {
    check_positive(a)?;
    if !(p >= 2.0) {
        return Err(FlowError::InvalidParameter(format!("companion_max needs p >= 2, got {p}")));
    }
    if a >= 1.0 {
        return Ok(CompanionMax { b: 1.0, degenerate: true });
    }
    let f = EnergyLandscape { p };
    let level = f.value(a);
    let (mut lo, mut hi) = (1.0, 2.0 * level.sqrt());
    if f.value(hi) < level {
        return Err(FlowError::BracketFailure(format!("F(2 sqrt F(a)) < F(a) at a = {a}")));
    }
    // Bisect to the resolution of the doubles; at least to 1e-12.
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.value(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CompanionMax { b: 0.5 * (lo + hi), degenerate: false })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn period_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PERIOD_NODES))
}

/// Half period `R(a)` of the orbit through the minimum `a`.
///
/// Uses `s = a + (b - a) sin²θ`, which turns both inverse-square-root
/// endpoint singularities into a smooth integrand on `[0, π/2]`.
pub fn half_period(a: f64, p: f64) -> Result<f64> {
    if !(p > 2.0) {
        return Err(FlowError::InvalidParameter(format!("half_period needs p > 2, got {p}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(FlowError::InvalidParameter(format!("half_period needs a in (0, 1], got {a}")));
    }
    if a == 1.0 {
        return Ok(PI / p.sqrt());
    }
    let b = companion_max(a, p)?.b;
    let f = EnergyLandscape { p };
    let span = b - a;
    let (nodes, weights) = period_rule();
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let theta = FRAC_PI_2 * 0.5 * (x + 1.0);
        let (s, c) = theta.sin_cos();
        let drop = f.drop_from(a, span * s * s);
        if drop <= 0.0 {
            continue;
        }
        sum += w * 2.0 * span * s * c / drop.sqrt();
    }
    Ok(sum * FRAC_PI_2 * 0.5)
}

fn steady_accel(w: f64, p: f64) -> f64 {
    -w + real_pow(w, 1.0 - p)
}

fn rk4_orbit(w: f64, dw: f64, h: f64, p: f64) -> (f64, f64) {
    let k1 = (dw, steady_accel(w, p));
    let k2 = (dw + 0.5 * h * k1.1, steady_accel(w + 0.5 * h * k1.0, p));
    let k3 = (dw + 0.5 * h * k2.1, steady_accel(w + 0.5 * h * k2.0, p));
    let k4 = (dw + h * k3.1, steady_accel(w + h * k3.0, p));
    (
        w + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        dw + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Integration of one full period from the minimum.
struct Orbit {
    /// `(w, w')` at `k·h`, `k = 0..=steps` over the half period.
    half: Vec<(f64, f64)>,
    h: f64,
    drift: f64,
    /// `(w, w')` after the full period.
    closing: (f64, f64),
}

fn integrate_orbit(a: f64, p: f64, r: f64, steps: usize) -> Orbit {
    let f = EnergyLandscape { p };
    let e0 = f.value(a);
    let h = r / steps as f64;
    let mut state = (a, 0.0);
    let mut half = Vec::with_capacity(steps + 1);
    half.push(state);
    let mut drift: f64 = 0.0;
    for k in 0..2 * steps {
        state = rk4_orbit(state.0, state.1, h, p);
        if !(state.0 > 0.0) {
            drift = f64::INFINITY;
            break;
        }
        drift = drift.max((f.orbit_energy(state.0, state.1) - e0).abs());
        if k < steps {
            half.push(state);
        }
    }
    Orbit { half, h, drift, closing: state }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Constant,
    /// Hermite table over `[0, R]` measured from the minimum.
    Table { h: f64, nodes: Vec<(f64, f64)> },
    /// `(1+β²)^{-1/4} sqrt(1 + β² cos² x)`, maximum at `x = 0`.
    Ellipse { beta: f64 },
}

/// A periodic solution of the steady equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub p: f64,
    /// Minimum value.
    pub a: f64,
    /// Maximum value.
    pub b: f64,
    pub half_period: f64,
    /// Abscissa of the minimum in the profile's own coordinate.
    pub origin: f64,
    /// Uniform samples over `[origin - R, origin + R)`, node `n/2` at the origin.
    pub samples: Vec<(f64, f64)>,
    /// Largest deviation of `(w')² + F(w)` from `F(a)` along the integration.
    pub energy_drift: f64,
    /// Richardson estimate of the integration error.
    pub error_estimate: f64,
    shape: Shape,
}

fn hermite(h: f64, y0: (f64, f64), y1: (f64, f64), t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0.0
        + (t3 - 2.0 * t2 + t) * h * y0.1
        + (-2.0 * t3 + 3.0 * t2) * y1.0
        + (t3 - t2) * h * y1.1
}

impl SteadyProfile {
    /// `w` at distance `y` from the minimum.
    pub fn eval_from_min(&self, y: f64) -> f64 {
        match &self.shape {
            Shape::Constant => 1.0,
            Shape::Ellipse { beta } => ellipse_value(*beta, y + FRAC_PI_2),
            Shape::Table { h, nodes } => {
                let r = self.half_period;
                let mut y = y.abs().rem_euclid(2.0 * r);
                if y > r {
                    y = 2.0 * r - y;
                }
                let pos = y / h;
                let k = (pos.floor() as usize).min(nodes.len() - 2);
                hermite(*h, nodes[k], nodes[k + 1], pos - k as f64)
            }
        }
    }

    /// `w` at abscissa `x` of the profile's own coordinate.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_from_min(x - self.origin)
    }

    /// Number of periods the profile completes on `S_m^1`, if it fits.
    pub fn periods_on(&self, m: u32) -> Option<u32> {
        if matches!(self.shape, Shape::Constant) {
            return None;
        }
        let j = m as f64 * PI / self.half_period;
        let jr = j.round();
        ((j - jr).abs() < 1e-6 && jr >= 1.0).then_some(jr as u32)
    }

    /// Samples on the `S_m^1` grid with the minimum at `x = 0`.
    ///
    /// Fails unless the period divides `2mπ` (constants always fit).
    pub fn on_circle(&self, m: u32, n: usize) -> Result<PeriodicProfile> {
        if !matches!(self.shape, Shape::Constant) && self.periods_on(m).is_none() {
            return Err(FlowError::InvalidParameter(format!(
                "period {} does not divide 2π·{m}",
                2.0 * self.half_period
            )));
        }
        PeriodicProfile::from_fn(m, n, |x| self.eval_from_min(x))
    }

    /// Sup distance to `other` after aligning minima, over `n` points of one period.
    pub fn aligned_distance(&self, other: &SteadyProfile, n: usize) -> f64 {
        let r = self.half_period.max(other.half_period);
        (0..n)
            .map(|i| {
                let y = -r + 2.0 * r * i as f64 / n as f64;
                (self.eval_from_min(y) - other.eval_from_min(y)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// One row of the `a,b,R` table.
    pub fn table_row(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.half_period)
    }
}

/// CSV with header `a,b,R`.
pub fn profile_table_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("a,b,R\n");
    for (a, b, r) in rows {
        out.push_str(&format!("{a:.16e},{b:.16e},{r:.16e}\n"));
    }
    out
}

fn uniform_samples(origin: f64, r: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let h = 2.0 * r / n as f64;
    let half = (n / 2) as f64;
    (0..n)
        .map(|i| {
            let x = origin + (i as f64 - half) * h;
            (x, f(x))
        })
        .collect()
}

/// Integrates the steady equation from `w(0) = a`, `w'(0) = 0` over one period.
pub fn solve_profile(a: f64, p: f64, n: usize) -> Result<SteadyProfile> {
    if !(p > 2.0) {
        return Err(FlowError::InvalidParameter(format!("solve_profile needs p > 2, got {p}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(FlowError::InvalidParameter(format!("solve_profile needs a in (0, 1], got {a}")));
    }
    if n < 4 || !n.is_multiple_of(2) {
        return Err(FlowError::InvalidParameter(format!("sample count must be even and >= 4, got {n}")));
    }
    let r = half_period(a, p)?;
    if a == 1.0 {
        return Ok(SteadyProfile {
            p,
            a,
            b: 1.0,
            half_period: r,
            origin: 0.0,
            samples: uniform_samples(0.0, r, n, |_| 1.0),
            energy_drift: 0.0,
            error_estimate: 0.0,
            shape: Shape::Constant,
        });
    }
    let mut steps = BASE_STEPS;
    let mut coarse = integrate_orbit(a, p, r, steps);
    for _ in 0..=MAX_REFINEMENTS {
        let fine = integrate_orbit(a, p, r, 2 * steps);
        let err = (fine.half[2 * steps].0 - coarse.half[steps].0).abs() / 15.0;
        if fine.drift <= ENERGY_TOL && coarse.drift <= ENERGY_TOL {
            let b = fine.half.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
            let shape = Shape::Table { h: fine.h, nodes: fine.half };
            let mut prof = SteadyProfile {
                p,
                a,
                b,
                half_period: r,
                origin: 0.0,
                samples: Vec::new(),
                energy_drift: fine.drift,
                error_estimate: err.max((fine.closing.0 - a).abs()),
                shape,
            };
            prof.samples = uniform_samples(0.0, r, n, |x| prof.eval_from_min(x));
            return Ok(prof);
        }
        steps *= 2;
        coarse = fine;
    }
    Err(FlowError::EnergyDrift { drift: coarse.drift })
}

fn ellipse_value(beta: f64, x: f64) -> f64 {
    let b2 = beta * beta;
    let c = x.cos();
    (1.0 + b2).powf(-0.25) * (1.0 + b2 * c * c).sqrt()
}

/// The closed-form `p = 4` family `(1+β²)^{-1/4} sqrt(1 + β² cos² x)`.
///
/// Samples cover `[-π/2, π/2)` with the maximum at `x = 0`.
pub fn ellipse_profile(beta: f64, n: usize) -> Result<SteadyProfile> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(FlowError::InvalidParameter(format!("ellipse parameter must be >= 0, got {beta}")));
    }
    if n < 4 || !n.is_multiple_of(2) {
        return Err(FlowError::InvalidParameter(format!("sample count must be even and >= 4, got {n}")));
    }
    let k = (1.0 + beta * beta).powf(0.25);
    Ok(SteadyProfile {
        p: 4.0,
        a: 1.0 / k,
        b: k,
        half_period: FRAC_PI_2,
        origin: FRAC_PI_2,
        samples: uniform_samples(0.0, FRAC_PI_2, n, |x| ellipse_value(beta, x)),
        energy_drift: 0.0,
        error_estimate: 0.0,
        shape: if beta == 0.0 { Shape::Constant } else { Shape::Ellipse { beta } },
    })
}

/// Ellipse parameter `β` of the `p = 4` profile with minimum `a`.
pub fn ellipse_beta_for_min(a: f64) -> f64 {
    (a.powi(-4) - 1.0).max(0.0).sqrt()
}

/// Periodic profiles that fit `S_m^1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicFamily {
    /// `(a, j)`: `j` periods of the orbit through `a` fill `2mπ`.
    Discrete(Vec<(f64, u32)>),
    /// Every `a` works with `j = 2m` (`p = 4`).
    Continuum { j: u32 },
}

/// Solves `j·2R(a) = 2mπ` for every admissible `j`.
pub fn find_periodic_profiles(p: f64, m: u32) -> Result<PeriodicFamily> {
    if !(p > 2.0) || m == 0 {
        return Err(FlowError::InvalidParameter(format!("need p > 2 and m >= 1, got p = {p}, m = {m}")));
    }
    if p == 4.0 {
        return Ok(PeriodicFamily::Continuum { j: 2 * m });
    }
    let a_lo = 1e-9;
    let r_lo = half_period(a_lo, p)?;
    let r_hi = PI / p.sqrt();
    let (lo, hi) = (FRAC_PI_2.min(r_hi), FRAC_PI_2.max(r_hi));
    let mut out = Vec::new();
    let mpi = m as f64 * PI;
    let j_min = (mpi / hi).floor() as u32 + 1;
    let j_max = (mpi / lo).ceil() as u32;
    for j in j_min..j_max.max(j_min) {
        let target = mpi / j as f64;
        if !(target > lo && target < hi) {
            continue;
        }
        // R is monotone in a; bracket on [a_lo, 1].
        let g = |a: f64| half_period(a, p).map(|r| r - target);
        let (g_lo, g_hi) = (r_lo - target, r_hi - target);
        if g_lo * g_hi > 0.0 {
            continue;
        }
        let (mut a0, mut a1) = (a_lo, 1.0);
        while a1 - a0 > 1e-13 {
            let mid = 0.5 * (a0 + a1);
            let gm = g(mid)?;
            if (gm < 0.0) == (g_lo < 0.0) {
                a0 = mid;
            } else {
                a1 = mid;
            }
        }
        out.push((0.5 * (a0 + a1), j));
    }
    Ok(PeriodicFamily::Discrete(out))
}

/// Sup norm of `(K^α)'' + K^α - 1/K` on the grid (spectral second derivative).
pub fn curvature_ode_residual(k: &PeriodicProfile, alpha: f64) -> f64 {
    let w: Vec<f64> = k.values().iter().map(|&x| x.powf(alpha)).collect();
    let d2 = spectral_second_derivative(&w, k.m());
    w.iter()
        .zip(&d2)
        .zip(k.values())
        .map(|((wi, di), ki)| (di + wi - 1.0 / ki).abs())
        .fold(0.0, f64::max)
}

/// Sup norm of `w'' + w - w^{1-p}` on the grid (spectral second derivative).
pub fn steady_residual(w: &PeriodicProfile, p: f64) -> f64 {
    let d2 = spectral_second_derivative(w.values(), w.m());
    w.values()
        .iter()
        .zip(&d2)
        .map(|(wi, di)| (di + wi - real_pow(*wi, 1.0 - p)).abs())
        .fold(0.0, f64::max)
}

/// Newton iteration for the even steady state of the discrete operator
/// `D² u + u - u^{1-p}` started from `guess`.
///
/// The unknowns are the samples on `[0, mπ]`; evenness removes the
/// translation kernel.
pub fn discrete_steady_state(guess: &PeriodicProfile, p: f64, stencil: Stencil) -> Result<PeriodicProfile> {
    if guess.asymmetry() > 1e-8 * guess.max() {
        return Err(FlowError::Asymmetric(format!("asymmetry {:e}", guess.asymmetry())));
    }
    let n = guess.len();
    let c = guess.center();
    let half = n / 2;
    let h = guess.dx();
    let node = |k: usize| (c + k) % n;
    let mut u = guess.values().to_vec();
    let offsets: Vec<(isize, f64)> = match stencil {
        Stencil::Second => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        Stencil::Fourth => vec![(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
    };
    for _ in 0..50 {
        let d2 = second_derivative(&u, h, stencil);
        let res: Vec<f64> = (0..=half)
            .map(|k| {
                let i = node(k);
                d2[i] + u[i] - real_pow(u[i], 1.0 - p)
            })
            .collect();
        let norm = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if norm < 1e-12 {
            break;
        }
        // Column k of the reduced Jacobian collects both mirror nodes of unknown k.
        let mut jac = DMatrix::<f64>::zeros(half + 1, half + 1);
        for r in 0..=half {
            let i = node(r);
            for &(off, w) in &offsets {
                let jn = (i as isize + off).rem_euclid(n as isize) as usize;
                let k = (jn + n - c) % n;
                let k = if k > half { n - k } else { k };
                jac[(r, k)] += w / (h * h);
            }
            jac[(r, r)] += 1.0 - (1.0 - p) * real_pow(u[i], -p);
        }
        let delta = jac
            .lu()
            .solve(&DVector::from_vec(res))
            .ok_or_else(|| FlowError::InvalidParameter("singular steady-state Jacobian".into()))?;
        for k in 0..=half {
            let i = node(k);
            u[i] -= delta[k];
            let mi = (n - i) % n;
            u[mi] = u[i];
        }
        if u.iter().any(|x| !(*x > 0.0)) {
            return Err(FlowError::NonPositive { index: 0, value: u.iter().copied().fold(f64::INFINITY, f64::min) });
        }
    }
    PeriodicProfile::new(guess.m(), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_values() {
        assert!((energy_f(1.0, 3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((energy_f(0.5, 3.0).unwrap() - 4.25).abs() < 1e-15);
        assert!((energy_f(1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(energy_f(0.0, 3.0).is_err());
        for p in [2.5, 3.0, 5.0] {
            let f = EnergyLandscape { p };
            assert!((f.value(1.0) - (1.0 - 2.0 / (2.0 - p))).abs() < 1e-14);
            assert!(f.value(0.99) > f.value(1.0) && f.value(1.01) > f.value(1.0));
        }
    }

    #[test]
    fn drop_matches_direct_difference() {
        let f = EnergyLandscape { p: 3.0 };
        let (a, d) = (0.4, 0.3);
        assert!((f.drop_from(a, d) - (f.value(a) - f.value(a + d))).abs() < 1e-14);
        let f = EnergyLandscape { p: 2.0 };
        assert!((f.drop_from(a, d) - (f.value(a) - f.value(a + d))).abs() < 1e-14);
    }

    /// Largest real root of `b³ - c b + 2 = 0` by the trigonometric formula.
    fn cubic_root(c: f64) -> f64 {
        let r = 2.0 * (c / 3.0).sqrt();
        let phi = ((-2.0 / 2.0) * (3.0 / c).powf(1.5) * 1.0).acos() / 3.0;
        r * phi.cos()
    }

    #[test]
    fn companion_max_examples() {
        // p = 3: b² + 2/b = 4.25, i.e. b³ - 4.25 b + 2 = 0.
        let b = companion_max(0.5, 3.0).unwrap();
        assert!(!b.degenerate);
        let oracle = cubic_root(4.25);
        assert!((oracle.powi(3) - 4.25 * oracle + 2.0).abs() < 1e-12);
        assert!((b.b - oracle).abs() < 1e-12, "{} vs {oracle}", b.b);

        // p = 4: b² + 1/b² = 0.81 + 1/0.81, solved by b = 1/0.9.
        let b = companion_max(0.9, 4.0).unwrap();
        assert!((b.b - 1.0 / 0.9).abs() < 1e-12);

        let near = companion_max(1.0 - 1e-6, 3.0).unwrap();
        assert!(near.b > 1.0 && near.b - 1.0 < 1e-5);
        assert_eq!(companion_max(1.0, 3.0).unwrap(), CompanionMax { b: 1.0, degenerate: true });
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let i30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i30 - 2.0 / 31.0).abs() < 1e-14);
        let (x, w) = period_rule();
        let cos: f64 = x.iter().zip(w).map(|(x, w)| w * x.cos()).sum();
        assert!((cos - 2.0 * 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn half_period_examples() {
        for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!((half_period(a, 4.0).unwrap() - FRAC_PI_2).abs() < 1e-6);
        }
        assert!((half_period(1e-3, 3.0).unwrap() - FRAC_PI_2).abs() < 1e-2);
        assert!((half_period(0.999, 3.0).unwrap() - PI / 3f64.sqrt()).abs() < 1e-3);
        assert_eq!(half_period(1.0, 5.0).unwrap(), PI / 5f64.sqrt());
        assert!(half_period(0.5, 2.0).is_err());
    }

    #[test]
    fn half_period_against_direct_integration() {
        // Time from the minimum to the maximum of the integrated orbit.
        let (a, p) = (0.5, 3.0);
        let r = half_period(a, p).unwrap();
        let h = 1e-4;
        let (mut w, mut dw, mut t) = (a, 0.0, 0.0);
        loop {
            let (nw, ndw) = rk4_orbit(w, dw, h, p);
            if ndw < 0.0 {
                t += h * dw / (dw - ndw);
                break;
            }
            w = nw;
            dw = ndw;
            t += h;
        }
        assert!((t - r).abs() < 1e-7, "{t} vs {r}");
    }

    #[test]
    fn solve_profile_examples() {
        let flat = solve_profile(1.0, 3.0, 64).unwrap();
        assert!(flat.samples.iter().all(|s| s.1 == 1.0));

        let w = solve_profile(0.5, 4.0, 256).unwrap();
        let e = ellipse_profile(ellipse_beta_for_min(0.5), 256).unwrap();
        assert!((e.a - 0.5).abs() < 1e-14);
        assert!(w.aligned_distance(&e, 1000) < 1e-8);

        let w = solve_profile(0.5, 3.0, 256).unwrap();
        let b = companion_max(0.5, 3.0).unwrap().b;
        assert!((w.eval_from_min(w.half_period) - b).abs() < 1e-8);
        assert!((w.b - b).abs() < 1e-8);
        assert!(w.energy_drift < ENERGY_TOL);
        let min = w.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        assert!((min - 0.5).abs() < 1e-8);
        for i in 1..w.samples.len() / 2 {
            let (l, r) = (w.samples[w.samples.len() / 2 - i].1, w.samples[w.samples.len() / 2 + i].1);
            assert!((l - r).abs() < 1e-8);
        }
    }

    #[test]
    fn ellipse_examples() {
        let e = ellipse_profile(0.0, 16).unwrap();
        assert!(e.samples.iter().all(|s| (s.1 - 1.0).abs() < 1e-15));
        let e = ellipse_profile(1.0, 16).unwrap();
        assert!((e.eval(0.0) - 2f64.powf(0.25)).abs() < 1e-15);
        assert!((e.samples[8].1 - 2f64.powf(0.25)).abs() < 1e-15);
        let w = e.on_circle(1, 512).unwrap();
        assert!(steady_residual(&w, 4.0) < 1e-10);
    }

    #[test]
    fn periodic_families() {
        assert_eq!(find_periodic_profiles(3.0, 2).unwrap(), PeriodicFamily::Discrete(vec![]));
        assert_eq!(find_periodic_profiles(4.0, 2).unwrap(), PeriodicFamily::Continuum { j: 4 });
        let PeriodicFamily::Discrete(list) = find_periodic_profiles(3.0, 5).unwrap() else {
            panic!("p = 3 is discrete")
        };
        let (a, _) = *list.iter().find(|(_, j)| *j == 9).expect("j = 9 member");
        assert!((half_period(a, 3.0).unwrap() - 5.0 * PI / 9.0).abs() < 1e-10);
        assert!(a > 0.2 && a < 0.5);
    }

    #[test]
    fn curvature_residual_examples() {
        let k = PeriodicProfile::constant(1, 64, 1.0).unwrap();
        assert!(curvature_ode_residual(&k, 0.5) < 1e-14);

        let alpha = 0.5;
        let w = solve_profile(0.6, 3.0, 64).unwrap();
        let PeriodicFamily::Discrete(list) = find_periodic_profiles(3.0, 5).unwrap() else { unreachable!() };
        let (a, _) = list[0];
        let w9 = solve_profile(a, 3.0, 64).unwrap();
        let kk = w9.on_circle(5, 1024).unwrap().map(|x| x.powf(1.0 / alpha)).unwrap();
        assert!(curvature_ode_residual(&kk, alpha) < 1e-6);
        assert!(w.on_circle(5, 64).is_err());

        let mut vals = kk.values().to_vec();
        vals[100] += 0.1;
        let bumped = PeriodicProfile::new(5, vals).unwrap();
        assert!(curvature_ode_residual(&bumped, alpha) > 0.01);
    }

    #[test]
    fn newton_polish_reaches_discrete_steady_state() {
        let PeriodicFamily::Discrete(list) = find_periodic_profiles(3.0, 5).unwrap() else { unreachable!() };
        let (a, _) = list.iter().copied().find(|e| e.1 == 9).unwrap();
        let w = solve_profile(a, 3.0, 64).unwrap().on_circle(5, 1024).unwrap();
        let u = discrete_steady_state(&w, 3.0, Stencil::Fourth).unwrap();
        let d2 = u.second_derivative(Stencil::Fourth);
        let res = u.values().iter().zip(&d2).map(|(v, d)| (d + v - v.powi(-2)).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
        let d = crate::periodic::sup_norm_distance(&u, &w).unwrap();
        assert!(d < 1e-5, "{d}");
        assert_eq!(u.asymmetry(), 0.0);
    }
}
