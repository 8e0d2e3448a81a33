//! Blow-up classification and measurable forms of the structural estimates
//! satisfied by flow runs.
//!
//! The type-one/type-two classifier is a heuristic: it thresholds the growth
//! of `Q(t) = v_max(t) (T̂ - t)^{1/p}` over the last two decades of `v_max`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::pde::{estimate_tmax, linear_fit, FlowTrajectory, RescaledTrajectory};
use crate::periodic::{closure_density, zero_count, real_pow, PeriodicProfile, Stencil};
use crate::profiles::solve_profile;

/// Growth factor below which a run is called type one.
pub const TYPE_ONE_MAX_GROWTH: f64 = 1.5;
/// Growth factor above which a run is called type two.
pub const TYPE_TWO_MIN_GROWTH: f64 = 3.0;
/// Decades of `v_max` growth a trajectory must span to be classified.
pub const MIN_DECADES: f64 = 3.0;
/// Decades of `v_max` in the classification window.
pub const WINDOW_DECADES: f64 = 2.0;
/// Slack for estimates that involve the fitted blow-up time.
pub const EPS_FIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupKind {
    TypeOne,
    TypeTwo,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub kind: BlowupKind,
    pub t_max_estimate: f64,
    /// `(t, Q(t))` for every record.
    pub ratio_series: Vec<(f64, f64)>,
    /// `Q(end) / min Q` over the window.
    pub growth_factor: f64,
    /// `sup Q`, reported for type-one runs.
    pub c_bound: Option<f64>,
    /// Time interval of the classification window.
    pub window: (f64, f64),
}

#[derive(Serialize)]
struct ReportJson<'a> {
    kind: BlowupKind,
    growth_factor: f64,
    c_bound: Option<f64>,
    window: (f64, f64),
    t_max_estimate: f64,
    method: &'a str,
}

impl BlowupReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ReportJson {
            kind: self.kind,
            growth_factor: self.growth_factor,
            c_bound: self.c_bound,
            window: self.window,
            t_max_estimate: self.t_max_estimate,
            method: "heuristic: growth of v_max (T - t)^(1/p) over the last two decades",
        })
        .expect("plain data serializes")
    }

    /// CSV with header `t,Q`.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,Q\n");
        for (t, q) in &self.ratio_series {
            out.push_str(&format!("{t:.16e},{q:.16e}\n"));
        }
        out
    }
}

/// Classifies a `(t, v_max)` series against a given blow-up time.
pub fn classify_series(times: &[f64], v_max: &[f64], p: f64, t_max: f64) -> Result<BlowupReport> {
    if times.len() != v_max.len() || times.len() < 2 {
        return Err(FlowError::InsufficientSamples("empty or mismatched series".into()));
    }
    let end = *v_max.last().unwrap();
    if end / v_max[0] < 10f64.powf(MIN_DECADES) * (1.0 - 1e-9) {
        return Err(FlowError::InsufficientSamples(format!(
            "v_max grew by {:.3e}, classification needs {MIN_DECADES} decades",
            end / v_max[0]
        )));
    }
    let ratio_series: Vec<(f64, f64)> = times
        .iter()
        .zip(v_max)
        .map(|(&t, &v)| (t, v * (t_max - t).max(0.0).powf(1.0 / p)))
        .collect();
    let floor = end / 10f64.powf(WINDOW_DECADES);
    let start = v_max.iter().rposition(|&v| v < floor).map(|i| i + 1).unwrap_or(0);
    let window = &ratio_series[start..];
    let q_min = window.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let growth_factor = window.last().unwrap().1 / q_min;
    let kind = if growth_factor < TYPE_ONE_MAX_GROWTH {
        BlowupKind::TypeOne
    } else if growth_factor > TYPE_TWO_MIN_GROWTH {
        BlowupKind::TypeTwo
    } else {
        BlowupKind::Inconclusive
    };
    let c_bound =
        (kind == BlowupKind::TypeOne).then(|| ratio_series.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max));
    Ok(BlowupReport {
        kind,
        t_max_estimate: t_max,
        window: (window[0].0, window.last().unwrap().0),
        ratio_series,
        growth_factor,
        c_bound,
    })
}

/// Classifies a flow run using its fitted blow-up time.
pub fn classify_blowup(traj: &FlowTrajectory) -> Result<BlowupReport> {
    let t_max = match traj.t_max_estimate {
        Some(t) => t,
        None => estimate_tmax(traj)?,
    };
    classify_series(&traj.times(), &traj.v_max_series(), traj.params.p, t_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMatch {
    pub fitted_a: f64,
    /// Infinite when no member of the steady family applies.
    pub sup_error: f64,
    pub matched: bool,
}

/// Relative tolerance of [`match_profile`].
pub const MATCH_TOL: f64 = 0.01;

/// Compares `u` with the steady profile through its minimum, aligned at the minimum.
pub fn match_profile(u: &PeriodicProfile, p: f64, m: u32) -> ProfileMatch {
    let a = u.min();
    let none = ProfileMatch { fitted_a: a, sup_error: f64::INFINITY, matched: false };
    if u.m() != m || !(p > 2.0) || !(a > 1e-3) || a > 1.0 + 1e-9 {
        return none;
    }
    let Ok(w) = solve_profile(a.min(1.0), p, 64) else {
        return none;
    };
    let x0 = u.x(u.argmin());
    let sup_error = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, &ui)| (ui - w.eval_from_min(u.x(i) - x0)).abs())
        .fold(0.0, f64::max);
    ProfileMatch { fitted_a: a, sup_error, matched: sup_error < MATCH_TOL * u.max() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCertificate {
    /// `sup |u_x| / u` over the stored rescaled run.
    pub lambda_emp: f64,
    /// `max (v0_x² + v0²)` with the solver's stencil.
    pub sigma: f64,
    /// `u_max ≤ exp(2 λ mπ) u_min` at every snapshot.
    pub harnack_holds: bool,
}

pub fn gradient_certificate(rtraj: &RescaledTrajectory, v0: &PeriodicProfile) -> GradientCertificate {
    let stencil = rtraj.params.stencil;
    let lambda_emp = rtraj.records.iter().map(|r| r.max_log_slope).fold(0.0, f64::max);
    let vx = v0.first_derivative(stencil);
    let sigma = vx.iter().zip(v0.values()).map(|(d, v)| d * d + v * v).fold(0.0, f64::max);
    let harnack_holds = rtraj.snapshots.iter().all(|(_, u)| {
        let bound = (2.0 * lambda_emp * u.m() as f64 * PI).exp() * u.min();
        u.max() <= bound * (1.0 + 1e-12)
    });
    GradientCertificate { lambda_emp, sigma, harnack_holds }
}

/// `Φ(x) = cos x` on `[-π/2, π/2]`, zero elsewhere.
pub fn phi(x: f64) -> f64 {
    if x.abs() <= FRAC_PI_2 {
        x.cos()
    } else {
        0.0
    }
}

/// Tolerated asymmetry of data in the symmetric class.
pub const SYMMETRY_TOL: f64 = 1e-10;

fn require_symmetric(traj: &FlowTrajectory) -> Result<()> {
    let v0 = traj.initial();
    if v0.asymmetry() > SYMMETRY_TOL {
        return Err(FlowError::Asymmetric(format!("initial asymmetry {:e}", v0.asymmetry())));
    }
    Ok(())
}

/// `sup_x |v(x)/v(0) - Φ(x)|` for one profile.
pub fn cosine_error(v: &PeriodicProfile) -> f64 {
    let v0 = v.values()[v.center()];
    v.values().iter().enumerate().map(|(i, &vi)| (vi / v0 - phi(v.x(i))).abs()).fold(0.0, f64::max)
}

/// `(t, sup_x |v(x,t)/v(0,t) - Φ(x)|)` per snapshot of a symmetric run.
pub fn cosine_convergence_error(traj: &FlowTrajectory) -> Result<Vec<(f64, f64)>> {
    require_symmetric(traj)?;
    Ok(traj.snapshots.iter().map(|s| (s.t, cosine_error(&s.profile))).collect())
}

/// Four-point Lagrange interpolation of a periodic profile.
pub fn interpolate(v: &PeriodicProfile, x: f64) -> f64 {
    let n = v.len() as isize;
    let h = v.dx();
    let s = (x + v.m() as f64 * PI) / h;
    let i0 = s.floor();
    let t = s - i0;
    let at = |k: isize| v.values()[(i0 as isize + k).rem_euclid(n) as usize];
    let (a, b, c, d) = (at(-1), at(0), at(1), at(2));
    -t * (t - 1.0) * (t - 2.0) / 6.0 * a + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * b
        - (t + 1.0) * t * (t - 2.0) / 2.0 * c
        + (t + 1.0) * t * (t - 1.0) / 6.0 * d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSeries {
    pub x: f64,
    /// `(t, max(v(x,t), v(-x,t)), v_max(t))` per snapshot.
    pub samples: Vec<(f64, f64, f64)>,
    pub max: f64,
    /// `max / min` of the probe over the run.
    pub variation: f64,
}

/// Probe of `v` at `±x` over the snapshots.
pub fn probe_series(traj: &FlowTrajectory, x: f64) -> ProbeSeries {
    let samples: Vec<(f64, f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, interpolate(&s.profile, x).max(interpolate(&s.profile, -x)), s.profile.max()))
        .collect();
    let max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    ProbeSeries { x, samples, max, variation: max / min }
}

/// Probe abscissa outside the blow-up window.
pub const OUTSIDE_PROBE: f64 = 2.0;

/// Probe of a symmetric run at `|x| = 2`.
pub fn outside_window_bound(traj: &FlowTrajectory) -> Result<ProbeSeries> {
    require_symmetric(traj)?;
    Ok(probe_series(traj, OUTSIDE_PROBE))
}

/// `∫_0^x f(y) cos y dy` with `f = v^{1-p}`, trapezoid on the grid nodes and
/// a linearly interpolated final partial cell.
pub fn cos_moment_to(v: &PeriodicProfile, p: f64, x: f64) -> f64 {
    let c = v.center();
    let h = v.dx();
    let g = |i: usize| closure_density(v.values()[i], p) * v.x(i).cos();
    let full = (x / h).floor() as usize;
    let mut sum = 0.0;
    for k in 0..full {
        sum += 0.5 * h * (g(c + k) + g(c + k + 1));
    }
    let rest = x - full as f64 * h;
    if rest > 0.0 {
        let (a, b) = (g(c + full), g(c + full + 1));
        let end = a + (b - a) * rest / h;
        sum += 0.5 * rest * (a + end);
    }
    sum
}

/// Upper limit of the monotone moment.
pub const MOMENT_LIMIT: f64 = 3.0 * PI / 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub series: Vec<(f64, f64)>,
    pub strictly_decreasing: bool,
}

pub fn is_strictly_decreasing(series: &[(f64, f64)]) -> bool {
    series.windows(2).all(|w| w[1].1 < w[0].1)
}

/// `D(t) = ∫_0^{3π/4} v^{1-p} cos y dy` per snapshot of a symmetric run.
pub fn monotone_moment_check(traj: &FlowTrajectory) -> Result<MomentSeries> {
    require_symmetric(traj)?;
    if traj.params.m as f64 * PI < MOMENT_LIMIT {
        return Err(FlowError::InvalidParameter("domain shorter than the moment window".into()));
    }
    let p = traj.params.p;
    let series: Vec<(f64, f64)> =
        traj.snapshots.iter().map(|s| (s.t, cos_moment_to(&s.profile, p, MOMENT_LIMIT))).collect();
    Ok(MomentSeries { strictly_decreasing: is_strictly_decreasing(&series), series })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateProbe {
    /// Slope of `log Q` against `log log log (1/(T - t))`.
    pub slope: f64,
    pub intercept: f64,
    pub samples: usize,
    pub valid: bool,
}

/// Fits `log Q` against `log log log(1/(T - t))` over the classification
/// window. Informational only.
pub fn rate_probe_series(times: &[f64], v_max: &[f64], p: f64, t_max: f64) -> RateProbe {
    let end = v_max.last().copied().unwrap_or(0.0);
    let floor = end / 10f64.powf(WINDOW_DECADES);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &v) in times.iter().zip(v_max) {
        let s = t_max - t;
        if v < floor || !(s > 0.0) {
            continue;
        }
        let lll = (1.0 / s).ln().ln().ln();
        let q = v * s.powf(1.0 / p);
        if lll.is_finite() && q > 0.0 {
            xs.push(lll);
            ys.push(q.ln());
        }
    }
    let spread = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - xs.iter().copied().fold(f64::INFINITY, f64::min);
    if xs.len() < 3 || !(spread > 1e-6) {
        return RateProbe { slope: f64::NAN, intercept: f64::NAN, samples: xs.len(), valid: false };
    }
    let (intercept, slope) = linear_fit(&xs, &ys);
    RateProbe { slope, intercept, samples: xs.len(), valid: true }
}

pub fn rate_probe(traj: &FlowTrajectory) -> RateProbe {
    let t_max = traj.t_max_estimate.unwrap_or(f64::NAN);
    rate_probe_series(&traj.times(), &traj.v_max_series(), traj.params.p, t_max)
}

/// Checks of the estimates every flow run must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunChecks {
    /// `v_min` never decreases.
    pub min_nondecreasing: bool,
    /// `v_min ≤ R(t)(1+ε)` and `R(t) ≤ v_max(1+ε)` with the fitted blow-up time.
    pub sandwich: bool,
    /// `∫ v_x² ≤ ∫ v² + C` at every snapshot.
    pub gradient_energy: bool,
    /// `max |v_x| ≤ max(λ, v_max)` at every step.
    pub gradient_bound: bool,
    /// Zero count of `v_x` never increases across snapshots.
    pub sturm: bool,
    /// `(T̂ - t) v_max` strictly decreasing over the final decade.
    pub rough_estimate: bool,
    /// Largest asymmetry over the snapshots.
    pub max_asymmetry: f64,
    /// Largest closure modulus over the run.
    pub max_closure: f64,
}

/// Relative slack for checks evaluated with discrete derivatives.
pub const DISCRETE_SLACK: f64 = 1e-3;

pub fn zero_counts(traj: &FlowTrajectory) -> Vec<usize> {
    let stencil = traj.params.stencil;
    traj.snapshots.iter().map(|s| zero_count(&s.profile.first_derivative(stencil))).collect()
}

/// `(T̂ - t) v_max(t)` over the records in the final decade of `v_max`.
pub fn rough_series(traj: &FlowTrajectory, t_max: f64) -> Vec<(f64, f64)> {
    let end = traj.records.last().map(|r| r.v_max).unwrap_or(0.0);
    traj.records.iter().filter(|r| r.v_max >= end / 10.0).map(|r| (r.t, (t_max - r.t) * r.v_max)).collect()
}

pub fn run_checks(traj: &FlowTrajectory) -> RunChecks {
    let p = traj.params.p;
    let stencil: Stencil = traj.params.stencil;
    let recs = &traj.records;
    let min_nondecreasing = recs.windows(2).all(|w| w[1].v_min >= w[0].v_min);

    let sandwich = match traj.t_max_estimate {
        Some(tm) if p > 0.0 => recs.iter().all(|r| {
            let big_r = real_pow(p * (tm - r.t), -1.0 / p);
            r.v_min <= big_r * (1.0 + EPS_FIT) && big_r <= r.v_max * (1.0 + EPS_FIT)
        }),
        _ => true,
    };

    let energy = |v: &PeriodicProfile| {
        let vx = v.first_derivative(stencil);
        let h = v.dx();
        let gx: f64 = vx.iter().map(|d| d * d).sum::<f64>() * h;
        let g: f64 = v.values().iter().map(|x| x * x).sum::<f64>() * h;
        (gx, g)
    };
    let (gx0, g0) = energy(traj.initial());
    let c = (gx0 - g0).max(0.0);
    let gradient_energy = traj.snapshots.iter().all(|s| {
        let (gx, g) = energy(&s.profile);
        gx <= (g + c) * (1.0 + DISCRETE_SLACK)
    });

    let lambda = recs[0].max_vx;
    let gradient_bound = recs.iter().all(|r| r.max_vx <= lambda.max(r.v_max) * (1.0 + DISCRETE_SLACK));

    let zc = zero_counts(traj);
    let sturm = zc.windows(2).all(|w| w[1] <= w[0]);

    let rough_estimate = match traj.t_max_estimate {
        Some(tm) => is_strictly_decreasing(&rough_series(traj, tm)),
        None => false,
    };

    RunChecks {
        min_nondecreasing,
        sandwich,
        gradient_energy,
        gradient_bound,
        sturm,
        rough_estimate,
        max_asymmetry: traj.snapshots.iter().map(|s| s.profile.asymmetry()).fold(0.0, f64::max),
        max_closure: recs.iter().map(|r| r.closure_mod).fold(0.0, f64::max),
    }
}

/// Worst relative violation of the separable bounds
/// `(v_min(0)^{-p} - pt)^{-1/p} ≤ v ≤ (v_max(0)^{-p} - pt)^{-1/p}` over the records.
pub fn separable_bounds_violation(traj: &FlowTrajectory) -> f64 {
    let p = traj.params.p;
    let (lo0, hi0) = (traj.records[0].v_min, traj.records[0].v_max);
    let bound = |v0: f64, t: f64| {
        if p == 0.0 {
            v0 * t.exp()
        } else {
            (real_pow(v0, -p) - p * t).powf(-1.0 / p)
        }
    };
    traj.records
        .iter()
        .map(|r| {
            let (lo, hi) = (bound(lo0, r.t), bound(hi0, r.t));
            ((lo - r.v_min) / lo).max((r.v_max - hi) / hi).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Location and value of the maximum from a parabola through the largest
/// sample and its two neighbours.
pub fn refined_peak(v: &PeriodicProfile) -> (f64, f64) {
    let n = v.len();
    let i = v.argmax();
    let (a, b, c) = (v.values()[(i + n - 1) % n], v.values()[i], v.values()[(i + 1) % n]);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return (v.x(i), b);
    }
    let s = 0.5 * (a - c) / curv;
    (v.x(i) + s * v.dx(), b - 0.25 * (a - c) * s)
}

/// Smallest `(v(x) - v_max cos(x - x_t)) / v_max` over grid points with
/// `h/2 < |x - x_t| < arccos(σ / v_max)`, over snapshots with `v_max > σ`.
/// Positive when the cosine lower bound holds; infinite when no point qualifies.
pub fn cosine_window_margin(traj: &FlowTrajectory, sigma: f64) -> f64 {
    let mut margin = f64::INFINITY;
    for s in &traj.snapshots {
        let v = &s.profile;
        let (xt, vmax) = refined_peak(v);
        if vmax <= sigma {
            continue;
        }
        let half = (sigma / vmax).acos();
        let period = 2.0 * v.m() as f64 * PI;
        for (i, &vi) in v.values().iter().enumerate() {
            let d = (v.x(i) - xt + 0.5 * period).rem_euclid(period) - 0.5 * period;
            if d.abs() < half && d.abs() > 0.5 * v.dx() {
                margin = margin.min((vi - vmax * d.cos()) / vmax);
            }
        }
    }
    margin
}

/// `max (v_x² + v²)` with the given stencil.
pub fn sigma_of(v0: &PeriodicProfile, stencil: Stencil) -> f64 {
    v0.first_derivative(stencil).iter().zip(v0.values()).map(|(d, v)| d * d + v * v).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{evolve_rescaled_from, evolve_to_blowup, RescaledParams};
    use crate::periodic::FlowParams;

    fn geometric_times(t_max: f64, s0: f64, s1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_max - s0 * (s1 / s0).powf(k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn separable_series_is_type_one() {
        let (t_max, p) = (0.5, 2.0);
        let ts = geometric_times(t_max, 0.5, 1e-9, 400);
        let vs: Vec<f64> = ts.iter().map(|t| (p * (t_max - t)).powf(-1.0 / p)).collect();
        let r = classify_series(&ts, &vs, p, t_max).unwrap();
        assert_eq!(r.kind, BlowupKind::TypeOne);
        assert!((r.growth_factor - 1.0).abs() < 1e-9);
        assert!((r.c_bound.unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn log_growth_series_is_type_two() {
        // v_max = R(t) log(1/(T - t)): Q = p^{-1/p} log(1/(T - t)).
        let (t_max, p) = (1.0, 2.0);
        let ts = geometric_times(t_max, 0.9, 1e-4, 2000);
        let vs: Vec<f64> = ts.iter().map(|t| (p * (t_max - t)).powf(-1.0 / p) * (1.0 / (t_max - t)).ln()).collect();
        let r = classify_series(&ts, &vs, p, t_max).unwrap();
        assert_eq!(r.kind, BlowupKind::TypeTwo, "growth {}", r.growth_factor);
        assert!(r.c_bound.is_none());
        let est = crate::pde::estimate_tmax_from_series(&ts, &vs, p).unwrap();
        assert!(est >= *ts.last().unwrap() && est <= t_max);
    }

    #[test]
    fn short_series_rejected() {
        let ts = [0.0, 0.1, 0.2];
        let vs = [1.0, 2.0, 3.0];
        assert!(classify_series(&ts, &vs, 2.0, 0.3).is_err());
    }

    #[test]
    fn profile_match_examples() {
        let one = PeriodicProfile::constant(2, 64, 1.0).unwrap();
        let m = match_profile(&one, 3.0, 2);
        assert!(m.matched && m.fitted_a == 1.0 && m.sup_error < 1e-12);

        let e = crate::profiles::ellipse_profile(1.5, 16).unwrap().on_circle(1, 256).unwrap();
        let m = match_profile(&e, 4.0, 1);
        assert!(m.matched && m.sup_error < 1e-6, "{m:?}");

        let cosish = PeriodicProfile::from_fn(2, 256, |x| 1e-4 + phi(x)).unwrap();
        let m = match_profile(&cosish, 3.0, 2);
        assert!(!m.matched && m.sup_error >= 0.0);
    }

    #[test]
    fn certificate_examples() {
        let one = PeriodicProfile::constant(1, 64, 1.0).unwrap();
        let rt = evolve_rescaled_from(&one, &RescaledParams::new(3.0, 0.5), 1.0).unwrap();
        let c = gradient_certificate(&rt, &one);
        assert_eq!(c.lambda_emp, 0.0);
        assert!((c.sigma - 1.0).abs() < 1e-15 && c.harnack_holds);
    }

    #[test]
    fn cosine_error_examples() {
        let v = PeriodicProfile::from_fn(2, 512, |x| phi(x) + 1e-3).unwrap();
        let e = cosine_error(&v);
        assert!((e - 1e-3 / (1.0 + 1e-3)).abs() < 2e-3);
        let bell = PeriodicProfile::from_fn(2, 512, |x| 1.5 + (x / 2.0).cos()).unwrap();
        assert!(cosine_error(&bell) > 0.5);
    }

    #[test]
    fn interpolation_is_cubic_exact() {
        let v = PeriodicProfile::from_fn(1, 1024, |x| 2.0 + x.sin()).unwrap();
        assert!((interpolate(&v, 2.0) - (2.0 + 2f64.sin())).abs() < 1e-9);
    }

    #[test]
    fn moment_sign_bookkeeping() {
        let mut fp = FlowParams::new(2.0, 2, 64).unwrap();
        fp.v_cap = 20.0;
        let tr = evolve_to_blowup(&PeriodicProfile::constant(2, 64, 1.0).unwrap(), &fp).unwrap();
        let d = monotone_moment_check(&tr).unwrap();
        assert!(d.strictly_decreasing);
        let reversed: Vec<(f64, f64)> = d.series.iter().rev().copied().collect();
        assert!(!is_strictly_decreasing(&reversed));
        // D = v^{1-p} sin(3π/4) for constants.
        let (_, d0) = d.series[0];
        assert!((d0 - (3.0 * PI / 4.0).sin()).abs() < 5e-3);

        let probe = outside_window_bound(&tr).unwrap();
        for (_, x, vmax) in &probe.samples {
            assert!((x - vmax).abs() < 1e-12 * vmax);
        }
    }

    #[test]
    fn asymmetric_runs_rejected() {
        let mut fp = FlowParams::new(2.0, 1, 64).unwrap();
        fp.v_cap = 2.0;
        let v0 = PeriodicProfile::from_fn(1, 64, |x| 2.0 + 0.3 * x.sin()).unwrap();
        let tr = evolve_to_blowup(&v0, &fp).unwrap();
        assert!(cosine_convergence_error(&tr).is_err());
        assert!(monotone_moment_check(&tr).is_err());
    }

    #[test]
    fn rate_probe_examples() {
        let (t_max, p) = (0.0, 2.0);
        let ts = geometric_times(t_max, 0.3, 1e-300, 3000);
        let vs: Vec<f64> = ts
            .iter()
            .map(|t| {
                let s = t_max - t;
                s.powf(-1.0 / p) * (1.0 / s).ln().ln().sqrt()
            })
            .collect();
        let r = rate_probe_series(&ts, &vs, p, t_max);
        assert!(r.valid && (r.slope - 0.5).abs() < 1e-9, "{r:?}");
        let flat: Vec<f64> = ts.iter().map(|t| (p * (t_max - t)).powf(-1.0 / p)).collect();
        let r = rate_probe_series(&ts, &flat, p, t_max);
        assert!(r.valid && r.slope.abs() < 1e-9);
        let r = rate_probe_series(&ts[..2], &flat[..2], p, t_max);
        assert!(!r.valid && r.slope.is_nan());
    }
}
