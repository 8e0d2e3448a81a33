//! Explicit time integration of `v_t = v^p (v_xx + v)` and of its rescaled
//! form `u_τ = u^p (u_xx + u - u^{1-p})`.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::periodic::{
    closure_moment, zero_count, real_pow, second_derivative, FlowParams, PeriodicProfile,
    Stencil,
};

/// Maximum number of step halvings before declaring dt underflow.
pub const MAX_HALVINGS: u32 = 40;

/// Which right-hand side is being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    /// `v^p (v_xx + v)`
    Flow,
    /// `u^p (u_xx + u) - u`
    Rescaled,
}

fn rhs_into(values: &[f64], h: f64, p: f64, stencil: Stencil, eq: Equation, out: &mut Vec<f64>) {
    let d2 = second_derivative(values, h, stencil);
    out.clear();
    out.extend(values.iter().zip(&d2).map(|(&v, &vxx)| {
        let r = real_pow(v, p) * (vxx + v);
        match eq {
            Equation::Flow => r,
            Equation::Rescaled => r - v,
        }
    }));
}

/// Pointwise `v^p (D² v + v)`.
pub fn flow_rhs(v: &PeriodicProfile, p: f64, stencil: Stencil) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    rhs_into(v.values(), v.dx(), p, stencil, Equation::Flow, &mut out);
    out
}

/// Pointwise `u^p (D² u + u - u^{1-p})`.
pub fn rescaled_rhs(u: &PeriodicProfile, p: f64, stencil: Stencil) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len());
    rhs_into(u.values(), u.dx(), p, stencil, Equation::Rescaled, &mut out);
    out
}

fn all_positive(v: &[f64]) -> bool {
    v.iter().all(|x| *x > 0.0 && x.is_finite())
}

/// One classical RK4 step of size `dt`; `None` if any stage leaves the positive cone.
fn rk4_step(values: &[f64], h: f64, p: f64, dt: f64, stencil: Stencil, eq: Equation) -> Option<Vec<f64>> {
    let n = values.len();
    let mut k1 = Vec::with_capacity(n);
    let mut k2 = Vec::with_capacity(n);
    let mut k3 = Vec::with_capacity(n);
    let mut k4 = Vec::with_capacity(n);
    rhs_into(values, h, p, stencil, eq, &mut k1);
    let stage: Vec<f64> = values.iter().zip(&k1).map(|(v, k)| v + 0.5 * dt * k).collect();
    if !all_positive(&stage) {
        return None;
    }
    rhs_into(&stage, h, p, stencil, eq, &mut k2);
    let stage: Vec<f64> = values.iter().zip(&k2).map(|(v, k)| v + 0.5 * dt * k).collect();
    if !all_positive(&stage) {
        return None;
    }
    rhs_into(&stage, h, p, stencil, eq, &mut k3);
    let stage: Vec<f64> = values.iter().zip(&k3).map(|(v, k)| v + dt * k).collect();
    if !all_positive(&stage) {
        return None;
    }
    rhs_into(&stage, h, p, stencil, eq, &mut k4);
    let next: Vec<f64> = (0..n)
        .map(|i| values[i] + dt / 6.0 * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i])))
        .collect();
    all_positive(&next).then_some(next)
}

/// Parabolic CFL step `cfl · Δx² / max(v^p)`.
pub fn cfl_dt(v: &PeriodicProfile, p: f64, cfl: f64) -> f64 {
    let stiff = v.values().iter().map(|&x| real_pow(x, p)).fold(0.0, f64::max);
    cfl * v.dx() * v.dx() / stiff
}

fn step_with_retry(
    v: &PeriodicProfile,
    p: f64,
    dt0: f64,
    stencil: Stencil,
    eq: Equation,
    t: f64,
) -> Result<(PeriodicProfile, f64)> {
    let mut dt = dt0;
    for _ in 0..=MAX_HALVINGS {
        if let Some(next) = rk4_step(v.values(), v.dx(), p, dt, stencil, eq) {
            return Ok((PeriodicProfile::from_values_unchecked(v.m(), next), dt));
        }
        dt *= 0.5;
    }
    Err(FlowError::DtUnderflow { halvings: MAX_HALVINGS, t })
}

/// One RK4 step of the flow with the CFL step size, halving on loss of positivity.
pub fn step_flow(v: &PeriodicProfile, p: f64, cfl: f64, stencil: Stencil) -> Result<(PeriodicProfile, f64)> {
    step_with_retry(v, p, cfl_dt(v, p, cfl), stencil, Equation::Flow, 0.0)
}

/// One RK4 step of the flow with a caller-chosen step size.
pub fn step_flow_dt(v: &PeriodicProfile, p: f64, dt: f64, stencil: Stencil) -> Result<(PeriodicProfile, f64)> {
    step_with_retry(v, p, dt, stencil, Equation::Flow, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    CapReached,
    DtUnderflow,
    Horizon,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::CapReached => "cap_reached",
            StopReason::DtUnderflow => "dt_underflow",
            StopReason::Horizon => "horizon",
        }
    }
}

/// Per-step scalars of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub v_max: f64,
    pub v_min: f64,
    pub max_vx: f64,
    pub closure_mod: f64,
    pub zero_count: usize,
}

impl StepRecord {
    fn measure(v: &PeriodicProfile, p: f64, stencil: Stencil, t: f64, dt: f64) -> Self {
        let vx = v.first_derivative(stencil);
        StepRecord {
            t,
            dt,
            v_max: v.max(),
            v_min: v.min(),
            max_vx: vx.iter().fold(0.0, |a, b| a.max(b.abs())),
            closure_mod: closure_moment(v, p).modulus(),
            zero_count: zero_count(&vx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub profile: PeriodicProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub p: f64,
    pub m: u32,
    pub n_grid: usize,
    pub t_end: f64,
    pub t_max_estimate: Option<f64>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub params: FlowParams,
    /// One record per accepted step, starting with `t = 0`.
    pub records: Vec<StepRecord>,
    /// Initial profile, one per doubling of `v_max`, and the final profile.
    pub snapshots: Vec<Snapshot>,
    pub t_end: f64,
    pub t_max_estimate: Option<f64>,
    pub stop_reason: StopReason,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn v_max_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.v_max).collect()
    }

    pub fn initial(&self) -> &PeriodicProfile {
        &self.snapshots[0].profile
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always holds the initial snapshot")
    }

    /// CSV with header `t,dt,v_max,v_min,max_vx,closure_mod,zero_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,dt,v_max,v_min,max_vx,closure_mod,zero_count\n");
        for r in &self.records {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.t, r.dt, r.v_max, r.v_min, r.max_vx, r.closure_mod, r.zero_count
            ));
        }
        out
    }

    pub fn summary(&self) -> FlowSummary {
        FlowSummary {
            p: self.params.p,
            m: self.params.m,
            n_grid: self.params.n_grid,
            t_end: self.t_end,
            t_max_estimate: self.t_max_estimate,
            stop_reason: self.stop_reason,
        }
    }

    /// Growth factor `v_max(end) / v_max(0)`.
    pub fn growth(&self) -> f64 {
        self.records.last().map(|r| r.v_max).unwrap_or(1.0) / self.records[0].v_max
    }
}

/// Integrates until `v_max` grows by `v_cap`, the step underflows, or the horizon is hit.
pub fn evolve_to_blowup(v0: &PeriodicProfile, params: &FlowParams) -> Result<FlowTrajectory> {
    params.validate()?;
    if v0.m() != params.m || v0.len() != params.n_grid {
        return Err(FlowError::GridMismatch(format!(
            "profile (m={}, n={}) vs params (m={}, n={})",
            v0.m(),
            v0.len(),
            params.m,
            params.n_grid
        )));
    }
    let p = params.p;
    let stencil = params.stencil;
    let mut v = v0.clone();
    let mut t = 0.0;
    let first = StepRecord::measure(&v, p, stencil, 0.0, 0.0);
    let v_max0 = first.v_max;
    let cap = params.v_cap * v_max0;
    let mut records = vec![first];
    let mut snapshots = vec![Snapshot { t: 0.0, step: 0, profile: v.clone() }];
    let mut next_level = 2.0 * v_max0;
    let stop_reason;
    let mut step = 0usize;
    loop {
        let mut dt = cfl_dt(&v, p, params.cfl);
        if let Some(th) = params.t_horizon {
            dt = dt.min(th - t);
        }
        match step_with_retry(&v, p, dt, stencil, Equation::Flow, t) {
            Ok((next, used)) => {
                v = next;
                t += used;
                step += 1;
                let rec = StepRecord::measure(&v, p, stencil, t, used);
                records.push(rec);
                let mut snap = false;
                while rec.v_max >= next_level {
                    snap = true;
                    next_level *= 2.0;
                }
                if rec.v_max >= cap {
                    stop_reason = StopReason::CapReached;
                } else if params.t_horizon.is_some_and(|th| t >= th) || step >= params.max_steps {
                    stop_reason = StopReason::Horizon;
                } else {
                    if snap {
                        snapshots.push(Snapshot { t, step, profile: v.clone() });
                    }
                    continue;
                }
                break;
            }
            Err(FlowError::DtUnderflow { .. }) => {
                stop_reason = StopReason::DtUnderflow;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if snapshots.last().map(|s| s.step) != Some(step) {
        snapshots.push(Snapshot { t, step, profile: v });
    }
    let mut traj = FlowTrajectory {
        params: *params,
        records,
        snapshots,
        t_end: t,
        t_max_estimate: None,
        stop_reason,
    };
    if p > 0.0 {
        traj.t_max_estimate = estimate_tmax(&traj).ok();
    }
    Ok(traj)
}

/// Minimum number of samples required in the final decade of `v_max`.
pub const MIN_DECADE_SAMPLES: usize = 10;
/// Growth of `v_max` over the trailing window used by the intercept fit.
pub const TMAX_FIT_RATIO: f64 = 2.0;

/// Blow-up time estimate from a `(t, v_max)` series.
///
/// Needs a full decade of `v_max` growth. Fits `v_max^{-p}` linearly in `t`
/// over the final doubling of `v_max` and takes the zero crossing; the result is raised, if needed, to the lower bound
/// `max_t (t + v_max(t)^{-p}/p)` implied by comparison with the spatially
/// constant solution.
pub fn estimate_tmax_from_series(times: &[f64], v_max: &[f64], p: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(FlowError::InvalidParameter(format!("no finite blow-up time for p = {p}")));
    }
    if times.len() != v_max.len() || times.is_empty() {
        return Err(FlowError::InsufficientSamples("empty or mismatched series".into()));
    }
    let end = *v_max.last().unwrap();
    let start = v_max.iter().rposition(|&v| v < end / TMAX_FIT_RATIO).map(|i| i + 1).unwrap_or(0);
    let window = start..times.len();
    if window.len() < MIN_DECADE_SAMPLES || v_max[0] > end / 10.0 {
        return Err(FlowError::InsufficientSamples(format!(
            "v_max grew by {:.3e} with {} samples in the fit window; need a decade and {MIN_DECADE_SAMPLES} samples",
            end / v_max[0],
            window.len()
        )));
    }
    let ts = &times[window.clone()];
    let ys: Vec<f64> = v_max[window].iter().map(|&v| real_pow(v, -p)).collect();
    let lower = ts.iter().zip(&ys).map(|(t, y)| t + y / p).fold(f64::NEG_INFINITY, f64::max);
    let (intercept, slope) = linear_fit(ts, &ys);
    let fit = if slope < 0.0 { -intercept / slope } else { lower };
    Ok(fit.max(lower))
}

/// Blow-up time estimate of a stored trajectory.
pub fn estimate_tmax(traj: &FlowTrajectory) -> Result<f64> {
    estimate_tmax_from_series(&traj.times(), &traj.v_max_series(), traj.params.p)
}

/// Least-squares line `y = a + b x`, centred for conditioning; returns `(a, b)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - xm) * (y - ym);
        sxx += (x - xm) * (x - xm);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ym - b * xm, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescaledStop {
    Horizon,
    /// `u_min` fell below the floor: the rescaled solution degenerates.
    Degenerate,
    /// `u_max` exceeded its cap.
    Unbounded,
    DtUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledRecord {
    pub tau: f64,
    pub u_max: f64,
    pub u_min: f64,
    /// `max |u_x| / u`
    pub max_log_slope: f64,
}

impl RescaledRecord {
    fn measure(u: &PeriodicProfile, stencil: Stencil, tau: f64) -> Self {
        let ux = u.first_derivative(stencil);
        let slope = ux.iter().zip(u.values()).map(|(d, v)| d.abs() / v).fold(0.0, f64::max);
        RescaledRecord { tau, u_max: u.max(), u_min: u.min(), max_log_slope: slope }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub p: f64,
    pub cfl: f64,
    pub stencil: Stencil,
    pub tau_end: f64,
    /// Spacing in `τ` between stored snapshots.
    pub snapshot_every: f64,
    /// Stop as degenerate once `u_min` drops below this.
    pub u_floor: f64,
    /// Stop once `u_max` exceeds this.
    pub u_cap: f64,
}

impl RescaledParams {
    pub fn new(p: f64, tau_end: f64) -> Self {
        RescaledParams {
            p,
            cfl: 0.4,
            stencil: Stencil::Fourth,
            tau_end,
            snapshot_every: 0.25,
            u_floor: 1e-6,
            u_cap: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledTrajectory {
    pub params: RescaledParams,
    pub t_max: f64,
    pub records: Vec<RescaledRecord>,
    pub snapshots: Vec<(f64, PeriodicProfile)>,
    pub stop: RescaledStop,
}

impl RescaledTrajectory {
    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }
}

/// Initial datum of the rescaled problem, `u0 = (p T_max)^{1/p} v0`.
pub fn rescale_initial(v0: &PeriodicProfile, p: f64, t_max: f64) -> Result<PeriodicProfile> {
    let s = (p * t_max).powf(1.0 / p);
    v0.map(|v| s * v)
}

/// Integrates the rescaled equation from `u0 = (p T_max)^{1/p} v0`.
pub fn evolve_rescaled(v0: &PeriodicProfile, params: &RescaledParams, t_max: f64) -> Result<RescaledTrajectory> {
    if !(params.p > 0.0) {
        return Err(FlowError::InvalidParameter(format!("rescaling needs p > 0, got {}", params.p)));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(FlowError::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    let u0 = rescale_initial(v0, params.p, t_max)?;
    evolve_rescaled_from(&u0, params, t_max)
}

/// Integrates the rescaled equation from a given `u0`.
pub fn evolve_rescaled_from(u0: &PeriodicProfile, params: &RescaledParams, t_max: f64) -> Result<RescaledTrajectory> {
    if !(params.cfl > 0.0 && params.cfl < 1.0) || !(params.tau_end > 0.0) || !(params.snapshot_every > 0.0) {
        return Err(FlowError::InvalidParameter("rescaled run needs cfl in (0,1) and positive horizons".into()));
    }
    let p = params.p;
    let mut u = u0.clone();
    let mut tau = 0.0;
    let mut records = vec![RescaledRecord::measure(&u, params.stencil, 0.0)];
    let mut snapshots = vec![(0.0, u.clone())];
    let mut next_snap = params.snapshot_every;
    let stop = loop {
        let dt = cfl_dt(&u, p, params.cfl).min(params.tau_end - tau).min(next_snap - tau);
        match step_with_retry(&u, p, dt, params.stencil, Equation::Rescaled, tau) {
            Ok((next, used)) => {
                u = next;
                tau += used;
            }
            Err(FlowError::DtUnderflow { .. }) => break RescaledStop::DtUnderflow,
            Err(e) => return Err(e),
        }
        let rec = RescaledRecord::measure(&u, params.stencil, tau);
        records.push(rec);
        if tau >= next_snap - 1e-12 * next_snap.max(1.0) {
            snapshots.push((tau, u.clone()));
            next_snap += params.snapshot_every;
        }
        if rec.u_min < params.u_floor {
            break RescaledStop::Degenerate;
        }
        if rec.u_max > params.u_cap {
            break RescaledStop::Unbounded;
        }
        if tau >= params.tau_end * (1.0 - 1e-14) {
            break RescaledStop::Horizon;
        }
    };
    if snapshots.last().map(|s| s.0) != Some(tau) {
        snapshots.push((tau, u));
    }
    Ok(RescaledTrajectory { params: *params, t_max, records, snapshots, stop })
}
