use curveflow::diagnostics::{
    classify_series, cosine_window_margin, run_checks, separable_bounds_violation, sigma_of, EPS_FIT,
};
use curveflow::pde::{evolve_to_blowup, FlowTrajectory, StopReason};
use curveflow::{closure_moment, project_closure, FlowParams, PeriodicProfile};
use proptest::prelude::*;

fn run(v0: &PeriodicProfile, p: f64, v_cap: f64) -> FlowTrajectory {
    let mut fp = FlowParams::new(p, v0.m(), v0.len()).unwrap();
    fp.v_cap = v_cap;
    evolve_to_blowup(v0, &fp).unwrap()
}

fn even_profile(m: u32, n: usize, c0: f64, a1: f64, a2: f64) -> PeriodicProfile {
    let mf = m as f64;
    PeriodicProfile::from_fn(m, n, |x| c0 + a1 * (x / mf).cos() + a2 * (2.0 * x / mf).cos()).unwrap()
}

fn general_profile(m: u32, n: usize, c0: f64, a: f64, b: f64, phase: f64) -> PeriodicProfile {
    let mf = m as f64;
    PeriodicProfile::from_fn(m, n, |x| c0 + a * (x / mf + phase).cos() + b * (3.0 * x / mf).sin()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn blowup_runs_satisfy_structural_estimates(
        c0 in 1.5..3.0f64, a in 0.3..0.6f64, b in -0.1..0.1f64, phase in 0.0..6.3f64,
        p in 2.0..3.5f64, m in 1u32..3,
    ) {
        // single dominant peak; equal spikes are not resolved on this grid
        let v0 = general_profile(m, 128 * m as usize, c0, a, b, phase);
        let tr = run(&v0, p, 1e3);
        prop_assert_eq!(tr.stop_reason, StopReason::CapReached);
        let checks = run_checks(&tr);
        prop_assert!(checks.min_nondecreasing);
        prop_assert!(checks.sandwich);
        prop_assert!(checks.gradient_energy);
        prop_assert!(checks.gradient_bound);
        prop_assert!(checks.sturm);
        prop_assert!(checks.rough_estimate);

        let t_max = tr.t_max_estimate.unwrap();
        let report = classify_series(&tr.times(), &tr.v_max_series(), p, t_max).unwrap();
        let floor = p.powf(-1.0 / p) * (1.0 - EPS_FIT);
        prop_assert!(report.ratio_series.iter().all(|&(_, q)| q >= floor));

        let sigma = sigma_of(&v0, tr.params.stencil);
        let margin = cosine_window_margin(&tr, sigma);
        prop_assert!(margin > 0.0, "margin {margin:e}");
    }

    #[test]
    fn closed_data_stays_closed(c0 in 1.5..3.0f64, a in -0.5..0.5f64, b in -0.2..0.2f64, phase in 0.0..6.3f64, p in 2.0..3.5f64) {
        let raw = general_profile(2, 256, c0, a, b, phase);
        let Ok(proj) = project_closure(&raw, p) else { return Ok(()); };
        let tr = run(&proj.profile, p, 100.0);
        let tol = tr.params.closure_tol;
        prop_assert!(closure_moment(&proj.profile, p).modulus() < tol);
        prop_assert!(tr.records.iter().all(|r| r.closure_mod < 10.0 * tol), "max {:e}",
            tr.records.iter().map(|r| r.closure_mod).fold(0.0, f64::max));
    }

    #[test]
    fn evenness_is_preserved(c0 in 1.2..3.0f64, a1 in -1.0..1.0f64, a2 in -0.3..0.3f64, p in 1.5..3.5f64, m in 1u32..3) {
        prop_assume!(c0 - a1.abs() - a2.abs() > 0.1);
        let v0 = even_profile(m, 128, c0, a1, a2);
        let tr = run(&v0, p, 100.0);
        prop_assert!(run_checks(&tr).max_asymmetry <= 1e-10);
    }

    #[test]
    fn sublinear_bounds_hold_for_negative_p(c0 in 1.0..3.0f64, a in -0.5..0.5f64, p in -2.0..-0.2f64) {
        let v0 = general_profile(1, 64, c0, a, 0.1, 0.3);
        let fp = FlowParams { p, m: 1, n_grid: 64, t_horizon: Some(0.5), ..FlowParams::default() };
        fp.validate().unwrap();
        let tr = evolve_to_blowup(&v0, &fp).unwrap();
        prop_assert_eq!(tr.stop_reason, StopReason::Horizon);
        prop_assert!(separable_bounds_violation(&tr) < 1e-9);
        prop_assert!(run_checks(&tr).min_nondecreasing);
    }
}

#[test]
fn separable_solution_meets_every_estimate() {
    let tr = run(&PeriodicProfile::constant(2, 64, 1.0).unwrap(), 2.0, 1e3);
    let c = run_checks(&tr);
    assert!(c.min_nondecreasing && c.sandwich && c.gradient_energy && c.gradient_bound && c.sturm && c.rough_estimate);
    assert!((tr.t_max_estimate.unwrap() - 0.5).abs() < 1e-6);
}
