//! Command execution and persistence.

use std::collections::BTreeMap;
use std::path::Path;

use curveflow::diagnostics::{
    classify_blowup, cosine_convergence_error, gradient_certificate, match_profile, monotone_moment_check,
    outside_window_bound, rate_probe, run_checks, zero_counts,
};
use curveflow::geometry::{curvature_from_v, curves_to_svg, normalize_curve, reconstruct_curve, soliton_curve, PlaneCurve};
use curveflow::pde::{estimate_tmax, evolve_rescaled, evolve_to_blowup, FlowTrajectory, RescaledParams, RescaledTrajectory};
use curveflow::profiles::{find_periodic_profiles, half_period, profile_table_csv, solve_profile, SteadyProfile};
use curveflow::travelling::{c_for_level, shoot_unstable, WaveParams, WaveTrajectory};
use curveflow::{FlowParams, PeriodicProfile, Stencil};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Command, ExperimentConfig};
use crate::presets::{build_initial_data, InitialData};
use crate::CliError;

const FLOW_KEYS: &[&str] =
    &["p", "alpha", "m", "n", "cfl", "v_cap", "closure_tol", "stencil", "t_horizon", "max_steps", "v0", "project"];

/// Files produced by a run, keyed by path relative to the output directory.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), body.into());
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) {
        let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
        text.push('\n');
        self.add(name, text);
    }

    /// `manifest.json` body listing every file with its SHA-256.
    pub fn manifest(&self) -> String {
        let entries: Vec<_> = self
            .files
            .iter()
            .map(|(name, body)| json!({ "path": name, "bytes": body.len(), "sha256": hex::encode(Sha256::digest(body)) }))
            .collect();
        let mut text = serde_json::to_string_pretty(&json!({ "files": entries })).expect("plain data serializes");
        text.push('\n');
        text
    }

    /// Writes every file plus `manifest.json` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        for (name, body) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, body)?;
        }
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.json"), self.manifest())?;
        Ok(())
    }
}

/// Runs the configured command and writes its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let artifacts = execute(config)?;
    artifacts.write_to(&config.output_dir)?;
    Ok(artifacts)
}

/// Runs the configured command without touching the filesystem (except to
/// read `file` presets).
pub fn execute(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    match config.command {
        Command::Flow => run_flow(config),
        Command::Rescaled => run_rescaled(config),
        Command::Profile => run_profile(config),
        Command::Wave => run_wave(config),
        Command::Curve => run_curve(config),
        Command::Classify => run_classify(config),
    }
}

fn exponent(config: &ExperimentConfig) -> Result<f64, CliError> {
    match (config.get::<f64>("p")?, config.get::<f64>("alpha")?) {
        (Some(p), None) => Ok(p),
        (None, Some(alpha)) if alpha != 0.0 => Ok(1.0 + 1.0 / alpha),
        (None, Some(_)) => Err(CliError::Config("alpha must be nonzero".into())),
        (Some(_), Some(_)) => Err(CliError::Config("give either p or alpha, not both".into())),
        (None, None) => Err(CliError::Config(format!("missing key `p` in [{}]", config.command))),
    }
}

fn flow_params(config: &ExperimentConfig) -> Result<FlowParams, CliError> {
    let p = exponent(config)?;
    let mut fp = FlowParams::new(p, config.get_or("m", 1)?, config.get_or("n", 256)?)?;
    fp.cfl = config.get_or("cfl", fp.cfl)?;
    fp.v_cap = config.get_or("v_cap", fp.v_cap)?;
    fp.closure_tol = config.get_or("closure_tol", fp.closure_tol)?;
    fp.t_horizon = config.get("t_horizon")?.or(fp.t_horizon);
    fp.max_steps = config.get_or("max_steps", fp.max_steps)?;
    fp.stencil = match config.raw("stencil") {
        None => fp.stencil,
        Some("second") => Stencil::Second,
        Some("fourth") => Stencil::Fourth,
        Some(s) => return Err(CliError::Config(format!("stencil `{s}`: expected second or fourth"))),
    };
    fp.validate()?;
    Ok(fp)
}

fn initial_profile(config: &ExperimentConfig, fp: &FlowParams) -> Result<PeriodicProfile, CliError> {
    let spec = config.raw("v0").unwrap_or("constant 1");
    let data = InitialData::parse(spec, &config.base_dir)?;
    build_initial_data(&data, fp.p, fp.m, fp.n_grid, config.flag("project")?)
}

fn alpha_of(p: f64) -> Result<f64, CliError> {
    if p > 1.0 {
        Ok(1.0 / (p - 1.0))
    } else {
        Err(CliError::Config(format!("curves need p > 1, got {p}")))
    }
}

fn curve_of(v: &PeriodicProfile, p: f64) -> Result<PlaneCurve, CliError> {
    Ok(reconstruct_curve(&curvature_from_v(v, alpha_of(p)?)?))
}

fn flow_outputs(out: &mut Artifacts, traj: &FlowTrajectory) {
    out.add("initial.csv", traj.initial().to_csv());
    out.add("trajectory.csv", traj.to_csv());
    out.add_json("summary.json", &traj.summary());
    for (k, s) in traj.snapshots.iter().enumerate() {
        out.add(format!("snapshots/level_{k:03}.csv"), s.profile.to_csv());
    }
}

fn run_flow(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    config.check_keys(FLOW_KEYS)?;
    let fp = flow_params(config)?;
    let v0 = initial_profile(config, &fp)?;
    let traj = evolve_to_blowup(&v0, &fp)?;
    let mut out = Artifacts::default();
    flow_outputs(&mut out, &traj);
    if config.emit_svg {
        let first = curve_of(traj.initial(), fp.p)?;
        let last = curve_of(&traj.last().profile, fp.p)?;
        out.add("curves.svg", curves_to_svg(&[&first, &last]));
    }
    Ok(out)
}

fn rescaled_csv(rt: &RescaledTrajectory) -> String {
    let mut s = String::from("tau,u_max,u_min,max_log_slope\n");
    for r in &rt.records {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", r.tau, r.u_max, r.u_min, r.max_log_slope));
    }
    s
}

fn run_rescaled(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let mut keys = FLOW_KEYS.to_vec();
    keys.extend(["tau_end", "snapshot_every", "t_max"]);
    config.check_keys(&keys)?;
    let fp = flow_params(config)?;
    let v0 = initial_profile(config, &fp)?;
    let mut out = Artifacts::default();
    let t_max = match config.get::<f64>("t_max")? {
        Some(t) => t,
        None => {
            let traj = evolve_to_blowup(&v0, &fp)?;
            flow_outputs(&mut out, &traj);
            match traj.t_max_estimate {
                Some(t) => t,
                None => estimate_tmax(&traj)?,
            }
        }
    };
    let mut rp = RescaledParams::new(fp.p, config.get_or("tau_end", 10.0)?);
    rp.cfl = fp.cfl;
    rp.stencil = fp.stencil;
    rp.snapshot_every = config.get_or("snapshot_every", rp.snapshot_every)?;
    let rt = evolve_rescaled(&v0, &rp, t_max)?;
    out.add("rescaled.csv", rescaled_csv(&rt));
    for (k, (_, u)) in rt.snapshots.iter().enumerate() {
        out.add(format!("rescaled/tau_{k:03}.csv"), u.to_csv());
    }
    let last = &rt.snapshots.last().expect("rescaled run stores its initial state").1;
    out.add_json(
        "rescaled_summary.json",
        &json!({
            "p": fp.p,
            "m": fp.m,
            "t_max": t_max,
            "tau_end": rt.records.last().map(|r| r.tau),
            "stop": rt.stop,
            "certificate": gradient_certificate(&rt, &v0),
            "profile_match": match_profile(last, fp.p, fp.m),
        }),
    );
    Ok(out)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("CURVEFLOW_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("CURVEFLOW_THREADS={raw}: expected a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

fn sweep_values(config: &ExperimentConfig, key: &str) -> Result<Vec<f64>, CliError> {
    if let Some(list) = config.list(key)? {
        return Ok(list);
    }
    let lo: f64 = config.require(&format!("{key}_min"))?;
    let hi: f64 = config.require(&format!("{key}_max"))?;
    let count: usize = config.require(&format!("{key}_count"))?;
    match count {
        0 => Err(CliError::Config(format!("{key}_count must be positive"))),
        1 => Ok(vec![lo]),
        _ => Ok((0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()),
    }
}

fn run_profile(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    config.check_keys(&["p", "alpha", "m", "a", "a_min", "a_max", "a_count", "n"])?;
    let p = exponent(config)?;
    let n: usize = config.get_or("n", 256)?;
    let a_values = sweep_values(config, "a")?;
    let solved: Vec<Result<(SteadyProfile, f64), CliError>> = thread_pool()?.install(|| {
        a_values
            .par_iter()
            .map(|&a| {
                let w = solve_profile(a, p, n)?;
                // Table column from the quadrature, independent of the ODE solve.
                let r = half_period(a, p)?;
                Ok((w, r))
            })
            .collect()
    });
    let mut out = Artifacts::default();
    let mut rows = Vec::new();
    for (k, w) in solved.into_iter().enumerate() {
        let (w, r) = w?;
        rows.push((w.a, w.b, r));
        let mut csv = String::from("x,value\n");
        for (x, v) in &w.samples {
            csv.push_str(&format!("{x:.16e},{v:.16e}\n"));
        }
        out.add(format!("profiles/profile_{k:03}.csv"), csv);
    }
    out.add("profiles.csv", profile_table_csv(&rows));
    if let Some(m) = config.get::<u32>("m")? {
        out.add_json("families.json", &json!({ "p": p, "m": m, "family": find_periodic_profiles(p, m)? }));
    }
    Ok(out)
}

fn run_wave(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    config.check_keys(&["p", "alpha", "c", "c_min", "c_max", "c_count", "eps0", "xi_span", "level"])?;
    let p = exponent(config)?;
    let cs = sweep_values(config, "c")?;
    let defaults = WaveParams::new(p, cs[0]);
    let eps0 = config.get_or("eps0", defaults.eps0)?;
    let xi_span = config.get_or("xi_span", defaults.xi_span)?;
    let shots: Vec<Result<WaveTrajectory, CliError>> = thread_pool()?.install(|| {
        cs.par_iter()
            .map(|&c| {
                let params = WaveParams { eps0, xi_span, ..WaveParams::new(p, c) };
                params.validate()?;
                Ok(shoot_unstable(&params)?)
            })
            .collect()
    });
    let mut out = Artifacts::default();
    let mut table = String::from("c,h_c,U0,lambda_c\n");
    let mut summaries = Vec::new();
    for (k, shot) in shots.into_iter().enumerate() {
        let traj = shot?;
        let s = traj.summary();
        table.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", s.c, s.h_c, s.u0, s.lambda_c));
        out.add(format!("waves/wave_{k:03}.csv"), traj.to_csv());
        summaries.push(s);
    }
    out.add("waves.csv", table);
    out.add_json("waves.json", &summaries);
    if let Some(level) = config.get::<f64>("level")? {
        out.add_json("level.json", &c_for_level(p, level)?);
    }
    Ok(out)
}

fn run_curve(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let mut keys = FLOW_KEYS.to_vec();
    keys.extend(["evolve", "normalize", "soliton_eps", "soliton_n"]);
    config.check_keys(&keys)?;
    let fp = flow_params(config)?;
    let alpha = alpha_of(fp.p)?;
    let mut v = initial_profile(config, &fp)?;
    let mut out = Artifacts::default();
    if config.flag("evolve")? {
        let traj = evolve_to_blowup(&v, &fp)?;
        flow_outputs(&mut out, &traj);
        v = traj.last().profile.clone();
    }
    let mut curve = curve_of(&v, fp.p)?;
    if config.flag("normalize")? {
        curve = normalize_curve(&curve)?;
    }
    out.add("curve.csv", curve.to_csv());
    out.add_json(
        "curve.json",
        &json!({
            "alpha": alpha,
            "length": curve.length(),
            "closed_gap": curve.closed_gap,
            "rotation_index": curve.rotation_index,
            "normalization": curve.normalization,
        }),
    );
    let mut drawn = vec![curve];
    if let Some(eps) = config.get::<f64>("soliton_eps")? {
        let sol = soliton_curve(alpha, eps, config.get_or("soliton_n", 2001)?)?;
        out.add("soliton.csv", sol.to_csv());
        drawn.push(sol);
    }
    if config.emit_svg {
        out.add("curve.svg", curves_to_svg(&drawn.iter().collect::<Vec<_>>()));
    }
    Ok(out)
}

fn run_classify(config: &ExperimentConfig) -> Result<Artifacts, CliError> {
    config.check_keys(FLOW_KEYS)?;
    let fp = flow_params(config)?;
    let v0 = initial_profile(config, &fp)?;
    let traj = evolve_to_blowup(&v0, &fp)?;
    let mut out = Artifacts::default();
    flow_outputs(&mut out, &traj);
    let report = classify_blowup(&traj)?;
    let mut report_json = report.to_json();
    report_json.push('\n');
    out.add("report.json", report_json);
    out.add("ratio.csv", report.series_csv());
    out.add_json("checks.json", &run_checks(&traj));
    let mut diag = json!({ "zero_counts": zero_counts(&traj), "rate_probe": rate_probe(&traj) });
    if let Ok(cos) = cosine_convergence_error(&traj) {
        diag["cosine_error"] = json!(cos);
        diag["outside_probe"] = json!(outside_window_bound(&traj)?);
        diag["moment"] = json!(monotone_moment_check(&traj)?);
    }
    out.add_json("diagnostics.json", &diag);
    if config.emit_svg {
        if let Ok(curve) = curve_of(&traj.last().profile, fp.p).and_then(|c| Ok(normalize_curve(&c)?)) {
            out.add("curve.svg", curves_to_svg(&[&curve]));
        }
    }
    Ok(out)
}
