use curveflow::profiles::{companion_max, energy_f, half_period, solve_profile, EnergyLandscape, ENERGY_TOL};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extrema_share_the_energy_level(a in 0.01..0.99f64, p in 2.0..8.0f64) {
        let b = companion_max(a, p).unwrap().b;
        prop_assert!(b > 1.0);
        let (fa, fb) = (energy_f(a, p).unwrap(), energy_f(b, p).unwrap());
        prop_assert!((fa - fb).abs() < 1e-10 * fa.abs().max(1.0), "F(a) {fa} F(b) {fb}");
    }

    #[test]
    fn landscape_has_its_minimum_at_one(s in 0.05..20.0f64, p in 2.0..8.0f64) {
        prop_assume!((s - 1.0).abs() > 1e-3);
        let f = EnergyLandscape { p };
        prop_assert!(f.value(s) > f.value(1.0));
        prop_assert!(f.derivative(1.0).abs() < 1e-14);
    }

    #[test]
    fn integrated_profiles_are_positive_symmetric_and_conservative(a in 0.05..0.95f64, p in 2.2..6.0f64) {
        let prof = solve_profile(a, p, 512).unwrap();
        prop_assert!(prof.energy_drift < ENERGY_TOL);
        let min = prof.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        prop_assert!((min - a).abs() < 1e-8, "min {min} a {a}");
        let n = prof.samples.len();
        let c = n / 2;
        for k in 1..c {
            let (l, r) = (prof.samples[c - k], prof.samples[c + k]);
            prop_assert!((l.0 + r.0 - 2.0 * prof.origin).abs() < 1e-12);
            prop_assert!((l.1 - r.1).abs() < 1e-8);
        }
        let max = prof.samples.iter().map(|s| s.1).fold(0.0, f64::max);
        prop_assert!(max <= prof.b + 1e-8 && max > 1.0);
    }

    #[test]
    fn half_period_is_monotone_in_the_minimum(a0 in 0.05..0.9f64, gap in 0.02..0.09f64) {
        let a1 = a0 + gap;
        let (r3_0, r3_1) = (half_period(a0, 3.0).unwrap(), half_period(a1, 3.0).unwrap());
        let (r5_0, r5_1) = (half_period(a0, 5.0).unwrap(), half_period(a1, 5.0).unwrap());
        prop_assert!(r3_0 < r3_1);
        prop_assert!(r5_0 > r5_1);
        let r4 = (half_period(a0, 4.0).unwrap(), half_period(a1, 4.0).unwrap());
        prop_assert!((r4.0 - std::f64::consts::FRAC_PI_2).abs() < 1e-8 && (r4.1 - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }
}
