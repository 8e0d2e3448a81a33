//! Travelling waves `U^p U'' + U^{p+1} - U + c U' = 0`.
//!
//! With `H = U^p` and `G = H_ξ` the equation becomes the planar system
//! `H' = G`, `G' = (-pH² + pH - cG + ((p-1)/p) G²) / H`. The origin is a
//! degenerate equilibrium whose unstable trajectory leaves along
//! `G = (p/c) H`; it crosses `G = 0` for the first time at `(h_c, 0)` and
//! `U_c(0) = h_c^{1/p}`.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::periodic::real_pow;

/// Relative tolerance of the adaptive integrator.
pub const RTOL: f64 = 1e-11;
const ATOL: f64 = 1e-20;
/// Allowed rise of the Lyapunov energy per step, relative to `max(1, |E|)`.
pub const LYAPUNOV_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub p: f64,
    pub c: f64,
    pub eps0: f64,
    pub xi_span: f64,
}

impl WaveParams {
    pub fn new(p: f64, c: f64) -> Self {
        WaveParams { p, c, eps0: 1e-6, xi_span: 1e3 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FlowError::InvalidParameter(m));
        if !(self.p > 2.0) {
            return bad(format!("wave exponent must exceed 2, got {}", self.p));
        }
        if !(self.c > 0.0) {
            return bad(format!("wave speed must be positive, got {}", self.c));
        }
        if !(self.c * self.c < 4.0 * self.p) {
            return bad(format!("c² < 4p required for the spiral sink, got c = {}", self.c));
        }
        if !(self.eps0 > 0.0 && self.eps0 <= 1e-6) {
            return bad(format!("seed must lie in (0, 1e-6], got {}", self.eps0));
        }
        if !(self.xi_span > 0.0) {
            return bad(format!("xi_span must be positive, got {}", self.xi_span));
        }
        Ok(())
    }
}

/// The desingularized field `(G, (-pH² + pH - cG + ((p-1)/p)G²)/H)`.
pub fn wave_field(h: f64, g: f64, p: f64, c: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(FlowError::InvalidParameter(format!("H must be positive, got {h}")));
    }
    Ok(field(h, g, p, c))
}

#[inline]
fn field(h: f64, g: f64, p: f64, c: f64) -> (f64, f64) {
    (g, (-p * h * h + p * h - c * g + (p - 1.0) / p * g * g) / h)
}

/// An eigenvalue `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    fn real(re: f64) -> Self {
        Eigenvalue { re, im: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub h: f64,
    pub g: f64,
    pub eigenvalues: [Eigenvalue; 2],
}

/// The three equilibria of the polynomial field with their eigenvalues.
pub fn equilibria_and_eigenvalues(p: f64, c: f64) -> [Equilibrium; 3] {
    let disc = c * c - 4.0 * p;
    let sink = if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        [Eigenvalue { re: -0.5 * c, im }, Eigenvalue { re: -0.5 * c, im: -im }]
    } else {
        let s = disc.sqrt();
        [Eigenvalue::real(0.5 * (-c + s)), Eigenvalue::real(0.5 * (-c - s))]
    };
    [
        Equilibrium { h: 0.0, g: 0.0, eigenvalues: [Eigenvalue::real(0.0), Eigenvalue::real(-c)] },
        Equilibrium { h: 1.0, g: 0.0, eigenvalues: sink },
        Equilibrium {
            h: 0.0,
            g: p * c / (p - 1.0),
            eigenvalues: [Eigenvalue::real(p * c / (p - 1.0)), Eigenvalue::real(c)],
        },
    ]
}

/// Lyapunov energy `U'² + U² - (2/(2-p)) U^{2-p}` written in `(H, G)`.
pub fn lyapunov_energy(h: f64, g: f64, p: f64) -> f64 {
    let u = h.powf(1.0 / p);
    let du = g / (p * real_pow(u, p - 1.0));
    let pot = if p == 2.0 { -2.0 * u.ln() } else { -2.0 / (2.0 - p) * real_pow(u, 2.0 - p) };
    du * du + u * u + pot
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State = (f64, f64);

/// One Dormand–Prince step; returns the new state and the error norm, or
/// `None` if a stage leaves `H > 0`.
fn dp_step(y: State, h: f64, p: f64, c: f64) -> Option<(State, f64)> {
    let f = |s: State| -> Option<State> { (s.0 > 0.0).then(|| field(s.0, s.1, p, c)) };
    let add = |coef: &[(f64, State)]| -> State {
        coef.iter().fold(y, |acc, (a, k)| (acc.0 + h * a * k.0, acc.1 + h * a * k.1))
    };
    let k1 = f(y)?;
    let k2 = f(add(&[(A21, k1)]))?;
    let k3 = f(add(&[(A31, k1), (A32, k2)]))?;
    let k4 = f(add(&[(A41, k1), (A42, k2), (A43, k3)]))?;
    let k5 = f(add(&[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))?;
    let k6 = f(add(&[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]))?;
    let next = add(&[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f(next)?;
    let err = |i: usize| -> f64 {
        let pick = |s: State| if i == 0 { s.0 } else { s.1 };
        let e = h * (E1 * pick(k1) + E3 * pick(k3) + E4 * pick(k4) + E5 * pick(k5) + E6 * pick(k6) + E7 * pick(k7));
        let scale = ATOL + RTOL * pick(y).abs().max(pick(next).abs());
        e / scale
    };
    let norm = (0.5 * (err(0).powi(2) + err(1).powi(2))).sqrt();
    Some((next, norm))
}

/// Adaptive integration of the desingularized field, stopping at an event.
struct Integrator {
    p: f64,
    c: f64,
}

struct Arc {
    xi: Vec<f64>,
    states: Vec<State>,
    crossing: Option<(f64, State)>,
    max_energy_rise: f64,
    lyapunov_ok: bool,
}

impl Integrator {
    /// Runs until `G` falls from positive to non-positive. With
    /// `skip_rising` the start may have `G <= 0` and the event arms once `G > 0`.
    fn run(&self, y0: State, xi_span: f64, skip_rising: bool) -> Result<Arc> {
        let (p, c) = (self.p, self.c);
        let mut xi = 0.0;
        let mut y = y0;
        let mut h = 1e-3 * y0.0.max(1e-12) / c.max(1e-3);
        let mut xs = vec![0.0];
        let mut states = vec![y0];
        let mut energy = lyapunov_energy(y0.0, y0.1, p);
        let mut max_rise = f64::NEG_INFINITY;
        let mut lyapunov_ok = true;
        let mut armed = !skip_rising || y0.1 > 0.0;
        for _ in 0..MAX_STEPS {
            if xi >= xi_span {
                return Err(FlowError::HorizonExhausted(format!("G = 0 crossing within xi_span = {xi_span}")));
            }
            let step = h.min(xi_span - xi).max(f64::MIN_POSITIVE);
            let Some((next, err)) = dp_step(y, step, p, c) else {
                h *= 0.25;
                if h < 1e-300 {
                    return Err(FlowError::SeedTooLarge(y.0));
                }
                continue;
            };
            if err > 1.0 {
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
                continue;
            }
            if !(next.0 > 0.0) {
                return Err(FlowError::SeedTooLarge(next.0));
            }
            let crossed = armed && y.1 > 0.0 && next.1 <= 0.0;
            if crossed {
                let (xc, yc) = self.locate(xi, y, step);
                let e = lyapunov_energy(yc.0, yc.1, p);
                let rise = (e - energy) / energy.abs().max(1.0);
                max_rise = max_rise.max(rise);
                lyapunov_ok &= rise <= LYAPUNOV_TOL;
                xs.push(xc);
                states.push(yc);
                return Ok(Arc { xi: xs, states, crossing: Some((xc, yc)), max_energy_rise: max_rise, lyapunov_ok });
            }
            if !armed && next.1 > 0.0 {
                armed = true;
            }
            xi += step;
            y = next;
            let e = lyapunov_energy(y.0, y.1, p);
            let rise = (e - energy) / energy.abs().max(1.0);
            max_rise = max_rise.max(rise);
            lyapunov_ok &= rise <= LYAPUNOV_TOL;
            energy = e;
            xs.push(xi);
            states.push(y);
            h = step * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        }
        Err(FlowError::HorizonExhausted(format!("no crossing after {MAX_STEPS} steps")))
    }

    /// Bisection for `G = 0` inside the step `[xi, xi + step]`, each trial
    /// point computed by a fresh step from the left end.
    fn locate(&self, xi: f64, y: State, step: f64) -> (f64, State) {
        let at = |dx: f64| dp_step(y, dx, self.p, self.c).expect("positive inside an accepted step").0;
        let (mut lo, mut hi) = (0.0, step);
        while hi - lo > 1e-15 * (1.0 + xi.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (xi + hi, at(hi))
    }
}

/// Unstable trajectory of the origin up to its first `G = 0` crossing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrajectory {
    pub params: WaveParams,
    pub xi: Vec<f64>,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    /// `H` at the first crossing.
    pub h_c: f64,
    pub xi_c: f64,
    /// `U_c(0) = h_c^{1/p}`.
    pub u0: f64,
    /// `sup G/(pH) = sup U'/U` over the arc.
    pub lambda_c: f64,
    /// Largest per-step rise of the Lyapunov energy, relative to `max(1, |E|)`.
    pub max_energy_rise: f64,
    pub lyapunov_ok: bool,
    /// `G > 0` at every stored point before the crossing.
    pub monotone_before_crossing: bool,
}

impl WaveTrajectory {
    /// `U'/U` and `U''/U'` at the first stored sample with `H ≥ 10·eps0`.
    pub fn tail_ratios(&self) -> (f64, f64) {
        let p = self.params.p;
        let c = self.params.c;
        let k = self.h.iter().position(|&h| h >= 10.0 * self.params.eps0).unwrap_or(0);
        let (h, g) = (self.h[k], self.g[k]);
        let u = h.powf(1.0 / p);
        let du = g / (p * real_pow(u, p - 1.0));
        let ddu = (u - real_pow(u, p + 1.0) - c * du) / real_pow(u, p);
        (du / u, ddu / du)
    }

    /// `max |G/H - p/c|` over the ten smallest-`H` samples.
    pub fn seed_slope_deviation(&self) -> f64 {
        let target = self.params.p / self.params.c;
        let mut idx: Vec<usize> = (0..self.h.len()).collect();
        idx.sort_by(|&a, &b| self.h[a].total_cmp(&self.h[b]));
        idx.iter().take(10).map(|&i| (self.g[i] / self.h[i] - target).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `xi,H,G,U`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,H,G,U\n");
        for i in 0..self.xi.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.xi[i],
                self.h[i],
                self.g[i],
                self.h[i].powf(1.0 / self.params.p)
            ));
        }
        out
    }

    pub fn summary(&self) -> WaveSummary {
        WaveSummary { p: self.params.p, c: self.params.c, h_c: self.h_c, u0: self.u0, lambda_c: self.lambda_c }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub p: f64,
    pub c: f64,
    pub h_c: f64,
    #[serde(rename = "U0")]
    pub u0: f64,
    pub lambda_c: f64,
}

/// Shoots the unstable trajectory from `(eps0, (p/c)·eps0)`.
pub fn shoot_unstable(params: &WaveParams) -> Result<WaveTrajectory> {
    params.validate()?;
    let (p, c) = (params.p, params.c);
    let seed = (params.eps0, p / c * params.eps0);
    let arc = Integrator { p, c }.run(seed, params.xi_span, false)?;
    let (xi_c, (h_c, _)) = arc.crossing.expect("run returns only at a crossing");
    let (h, g): (Vec<f64>, Vec<f64>) = arc.states.iter().copied().unzip();
    let last = h.len() - 1;
    let monotone = g[..last].iter().all(|&x| x > 0.0);
    let lambda_c = h.iter().zip(&g).map(|(h, g)| g / (p * h)).fold(f64::NEG_INFINITY, f64::max);
    Ok(WaveTrajectory {
        params: *params,
        xi: arc.xi,
        h,
        g,
        h_c,
        xi_c,
        u0: h_c.powf(1.0 / p),
        lambda_c,
        max_energy_rise: arc.max_energy_rise,
        lyapunov_ok: arc.lyapunov_ok,
        monotone_before_crossing: monotone,
    })
}

/// `U_c` tabulated with the crossing moved to `ξ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcProfile {
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub lambda_c: f64,
}

pub fn uc_profile(traj: &WaveTrajectory) -> UcProfile {
    let p = traj.params.p;
    let xi = traj.xi.iter().map(|x| x - traj.xi_c).collect();
    let u: Vec<f64> = traj.h.iter().map(|h| h.powf(1.0 / p)).collect();
    let du: Vec<f64> = traj.g.iter().zip(&u).map(|(g, u)| g / (p * real_pow(*u, p - 1.0))).collect();
    let lambda_c = du.iter().zip(&u).map(|(d, u)| d / u).fold(f64::NEG_INFINITY, f64::max);
    UcProfile { xi, u, du, lambda_c }
}

/// Smallest `U_c'` over `{ξ : 1/A ≤ U_c(ξ) ≤ A}` on the stored arc.
pub fn min_slope_in_band(profile: &UcProfile, a: f64) -> f64 {
    profile
        .u
        .iter()
        .zip(&profile.du)
        .filter(|(u, _)| **u >= 1.0 / a && **u <= a)
        .map(|(_, d)| *d)
        .fold(f64::INFINITY, f64::min)
}

/// Result of [`c_for_level`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSpeed {
    pub c: f64,
    pub u0: f64,
    pub min_slope: f64,
}

/// Upper end of the speed bracket used by [`c_for_level`].
pub const C_BRACKET_HI: f64 = 1.0;

/// A speed `c` with `U_c(0) > A` and `U_c' > A` on `{1/A ≤ U_c ≤ A}`.
pub fn c_for_level(p: f64, a: f64) -> Result<LevelSpeed> {
    if !(a > 1.0) {
        return Err(FlowError::InvalidParameter(format!("level must exceed 1, got {a}")));
    }
    let shoot = |c: f64| shoot_unstable(&WaveParams::new(p, c));
    let hi = shoot(C_BRACKET_HI)?;
    let mut c = C_BRACKET_HI;
    if hi.u0 <= a {
        let mut c_hi = C_BRACKET_HI;
        let mut c_lo = 0.5 * c_hi;
        loop {
            if shoot(c_lo)?.u0 > a {
                break;
            }
            c_hi = c_lo;
            c_lo *= 0.5;
            if c_lo < 1e-4 {
                return Err(FlowError::BracketFailure(format!("U_c(0) stays below {a} down to c = {c_lo}")));
            }
        }
        while c_hi - c_lo > 1e-6 * c_hi {
            let mid = 0.5 * (c_lo + c_hi);
            if shoot(mid)?.u0 > a {
                c_lo = mid;
            } else {
                c_hi = mid;
            }
        }
        c = c_lo;
    }
    for _ in 0..40 {
        let traj = shoot(c)?;
        let slope = min_slope_in_band(&uc_profile(&traj), a);
        if traj.u0 > a && slope > a {
            return Ok(LevelSpeed { c, u0: traj.u0, min_slope: slope });
        }
        c *= 0.8;
    }
    Err(FlowError::BracketFailure(format!("slope condition at level {a} not reached")))
}

/// A `c = 0` orbit started at its maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    pub period: f64,
    /// `|E(end) - E(start)| / |E(start)|`.
    pub energy_change: f64,
    /// `|H(end) - H(start)|`.
    pub return_gap: f64,
}

/// Integrates the `c = 0` field from `(b^p, 0)` around one loop.
pub fn closed_orbit(p: f64, b: f64) -> Result<ClosedOrbit> {
    if !(p > 2.0 && b > 1.0) {
        return Err(FlowError::InvalidParameter(format!("need p > 2 and b > 1, got p = {p}, b = {b}")));
    }
    let start = (real_pow(b, p), 0.0);
    let arc = Integrator { p, c: 0.0 }.run(start, 1e3, true)?;
    let (xi, end) = arc.crossing.expect("run returns only at a crossing");
    let e0 = lyapunov_energy(start.0, start.1, p);
    let e1 = lyapunov_energy(end.0, end.1, p);
    Ok(ClosedOrbit { period: xi, energy_change: (e1 - e0).abs() / e0.abs(), return_gap: (end.0 - start.0).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_examples() {
        assert_eq!(wave_field(1.0, 0.0, 3.0, 0.1).unwrap(), (0.0, 0.0));
        let (dh, dg) = wave_field(0.5, 0.0, 3.0, 0.1).unwrap();
        assert_eq!(dh, 0.0);
        assert!((dg - 1.5).abs() < 1e-15);
        assert!(wave_field(0.0, 1.0, 3.0, 0.1).is_err());
        // Along G = (p/c) H the numerator cancels to leading order.
        let (p, c) = (3.0, 0.5);
        for h in [1e-2, 1e-4, 1e-6] {
            let (_, dg) = wave_field(h, p / c * h, p, c).unwrap();
            assert!(dg.abs() < 200.0 * h, "{dg} at {h}");
        }
    }

    #[test]
    fn eigenvalue_table() {
        let eq = equilibria_and_eigenvalues(3.0, 0.1);
        assert_eq!(eq[0].eigenvalues, [Eigenvalue::real(0.0), Eigenvalue::real(-0.1)]);
        let im = (12.0f64 - 0.01).sqrt() / 2.0;
        assert!((eq[1].eigenvalues[0].re + 0.05).abs() < 1e-15);
        assert!((eq[1].eigenvalues[0].im - im).abs() < 1e-15);
        assert!((im - 1.7313).abs() < 1e-4);
        let eq = equilibria_and_eigenvalues(3.0, 0.2);
        assert!((eq[2].g - 0.3).abs() < 1e-15);
        assert!((eq[2].eigenvalues[0].re - 0.3).abs() < 1e-15);
        assert!((eq[2].eigenvalues[1].re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_match_jacobian_of_polynomial_field() {
        // X = (HG, -pH² + pH - cG + ((p-1)/p)G²), Jacobian by central differences.
        let (p, c) = (3.5, 0.7);
        let x = |h: f64, g: f64| (h * g, -p * h * h + p * h - c * g + (p - 1.0) / p * g * g);
        for eq in equilibria_and_eigenvalues(p, c) {
            let d = 1e-6;
            let a = (x(eq.h + d, eq.g).0 - x(eq.h - d, eq.g).0) / (2.0 * d);
            let b = (x(eq.h, eq.g + d).0 - x(eq.h, eq.g - d).0) / (2.0 * d);
            let cc = (x(eq.h + d, eq.g).1 - x(eq.h - d, eq.g).1) / (2.0 * d);
            let dd = (x(eq.h, eq.g + d).1 - x(eq.h, eq.g - d).1) / (2.0 * d);
            let (tr, det) = (a + dd, a * dd - b * cc);
            let sum = eq.eigenvalues[0].re + eq.eigenvalues[1].re;
            let prod = eq.eigenvalues[0].re * eq.eigenvalues[1].re + eq.eigenvalues[0].im * eq.eigenvalues[0].im;
            assert!((tr - sum).abs() < 1e-6 && (det - prod).abs() < 1e-6, "{eq:?}");
        }
    }

    #[test]
    fn shot_examples() {
        let t = shoot_unstable(&WaveParams::new(3.0, 0.5)).unwrap();
        assert!(t.u0 > 1.0 && t.u0.is_finite());
        assert!(t.lyapunov_ok && t.monotone_before_crossing);
        assert!(t.g.last().unwrap().abs() < 1e-9);
        assert!(t.seed_slope_deviation() < 0.01);
        let (r1, r2) = t.tail_ratios();
        assert!((r1 * 0.5 - 1.0).abs() < 0.01);
        assert!((r2 * 0.5 - 1.0).abs() < 0.02, "{r2}");

        let mut fine = WaveParams::new(3.0, 0.5);
        fine.eps0 = 1e-8;
        let t2 = shoot_unstable(&fine).unwrap();
        assert!((t2.u0 - t.u0).abs() / t.u0 < 1e-6, "{} vs {}", t2.u0, t.u0);
    }

    #[test]
    fn invalid_wave_params() {
        assert!(WaveParams { eps0: 1e-3, ..WaveParams::new(3.0, 0.5) }.validate().is_err());
        assert!(WaveParams::new(2.0, 0.5).validate().is_err());
        assert!(WaveParams::new(3.0, 4.0).validate().is_err());
        let short = WaveParams { xi_span: 0.1, ..WaveParams::new(3.0, 0.5) };
        assert!(matches!(shoot_unstable(&short), Err(FlowError::HorizonExhausted(_))));
    }

    #[test]
    fn uc_profile_crossing_at_origin() {
        let t = shoot_unstable(&WaveParams::new(3.0, 0.3)).unwrap();
        let u = uc_profile(&t);
        assert_eq!(*u.xi.last().unwrap(), 0.0);
        assert!(u.du.last().unwrap().abs() < 1e-10);
        assert!(u.du[..u.du.len() - 1].iter().all(|&d| d > 0.0));
        assert!((u.lambda_c - t.lambda_c).abs() < 1e-9 * t.lambda_c);
    }

    #[test]
    fn closed_orbit_returns() {
        let o = closed_orbit(3.0, 1.5).unwrap();
        assert!(o.energy_change < 1e-8, "{o:?}");
        assert!(o.return_gap < 1e-8);
        // The c = 0 orbit is the steady profile; its period is 2R(a).
        let f = crate::profiles::EnergyLandscape { p: 3.0 };
        let level = f.value(1.5);
        let (mut lo, mut hi) = (1e-6, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f.value(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = crate::profiles::half_period(0.5 * (lo + hi), 3.0).unwrap();
        assert!((o.period - 2.0 * r).abs() < 1e-7, "{} vs {}", o.period, 2.0 * r);
    }

    #[test]
    fn level_speed() {
        let l2 = c_for_level(3.0, 2.0).unwrap();
        assert!(l2.u0 > 2.0 && l2.min_slope > 2.0);
        let again = shoot_unstable(&WaveParams::new(3.0, l2.c)).unwrap();
        assert!(again.u0 > 2.0);
        let l4 = c_for_level(3.0, 4.0).unwrap();
        assert!(l4.c <= l2.c);
        assert!(c_for_level(3.0, 1.0).is_err());
    }
}
