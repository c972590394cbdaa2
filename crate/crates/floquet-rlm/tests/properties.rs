//! Randomized structural invariants: properties that must hold for *every*
//! admissible parameter set, not just the calibrated operating points.

use proptest::prelude::*;

use floquet_rlm::{DrivenGreen, FluxEngine, ModelParams, QuadratureConfig, TruncationPolicy};

/// Admissible parameters with a comfortably wide band: the validation rule
/// requires band_cutoff > 10·max(|ε₀| + V_ac, |μ|, Γ), which 150 satisfies
/// across all ranges drawn here.
fn params() -> impl Strategy<Value = ModelParams> {
    (
        -3.0..2.0_f64,                                // epsilon0
        0.0..4.0_f64,                                 // v_ac
        0.25..1.5_f64,                                // omega
        -2.0..2.0_f64,                                // mu
        prop_oneof![Just(0.0), 0.05..0.5_f64],        // temperature
    )
        .prop_map(|(epsilon0, v_ac, omega, mu, temperature)| ModelParams {
            epsilon0,
            v_ac,
            omega,
            gamma: 1.0,
            mu,
            temperature,
            band_cutoff: 150.0,
        })
}

fn engine(p: &ModelParams) -> FluxEngine {
    FluxEngine::new(*p, TruncationPolicy::default(), QuadratureConfig::default())
        .expect("admissible parameters must construct")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn occupation_stays_within_physical_bounds(p in params(), frac in 0.0..1.0_f64) {
        let e = engine(&p);
        let pt = e.point(frac * p.period());
        prop_assert!(pt.n_d >= -1e-8, "n_d = {} below 0", pt.n_d);
        prop_assert!(pt.n_d <= 1.0 + 1e-8, "n_d = {} above 1", pt.n_d);
    }

    #[test]
    fn conservation_and_reactance_hold_pointwise(p in params(), frac in 0.0..1.0_f64) {
        let e = engine(&p);
        let pt = e.point(frac * p.period());
        let scale = pt.w_c.abs().max(pt.w_t.abs()).max(pt.w_d.abs()).max(1e-3);
        prop_assert!(
            (pt.w_c + pt.w_t + pt.w_d).abs() <= 1e-12 * scale,
            "conservation residual {:e}",
            pt.w_c + pt.w_t + pt.w_d
        );
        prop_assert!(
            (pt.w_e - pt.w_c - 0.5 * pt.w_t).abs() <= 1e-12 * scale,
            "reactance residual {:e}",
            pt.w_e - pt.w_c - 0.5 * pt.w_t
        );
    }

    #[test]
    fn fluxes_are_periodic(p in params(), frac in 0.0..1.0_f64) {
        let e = engine(&p);
        let t = frac * p.period();
        let a = e.point(t);
        let b = e.point(t + p.period());
        for (x, y) in [(a.i_c, b.i_c), (a.q_dot, b.q_dot), (a.n_d, b.n_d), (a.w_t, b.w_t)] {
            prop_assert!(
                (x - y).abs() <= 1e-9 * (1.0 + x.abs()),
                "period shift changed {x:e} -> {y:e}"
            );
        }
    }

    #[test]
    fn undriven_level_carries_no_flux(p in params(), frac in 0.0..1.0_f64) {
        let p = ModelParams { v_ac: 0.0, ..p };
        let e = engine(&p);
        let pt = e.point(frac * p.period());
        for flux in [pt.i_c, pt.w_c, pt.w_t, pt.w_d, pt.w_e, pt.power, pt.q_dot, pt.q_tilde_dot] {
            prop_assert!(flux.abs() <= 1e-15, "undriven flux {flux:e}");
        }
        prop_assert!(pt.n_d >= 0.0 && pt.n_d <= 1.0);
    }

    #[test]
    fn frozen_density_of_states_is_positive_and_bounded(
        p in params(),
        frac in 0.0..1.0_f64,
        eps in -20.0..20.0_f64,
    ) {
        let rho = p.frozen_dos(frac * p.period(), eps);
        prop_assert!(rho > 0.0, "rho = {rho:e} not positive");
        // Lorentzian peak value 4/Γ bounds the frozen spectral density.
        prop_assert!(rho <= 4.0 / p.gamma * (1.0 + 1e-12));
    }

    #[test]
    fn fermi_function_is_a_decreasing_probability(
        p in params(),
        lo in -30.0..30.0_f64,
        step in 0.0..10.0_f64,
    ) {
        let (a, b) = (p.fermi(lo), p.fermi(lo + step));
        prop_assert!((0.0..=1.0).contains(&a), "f = {a} outside [0,1]");
        prop_assert!(b <= a + 1e-15, "f must not increase: f({lo}) = {a}, f({}) = {b}", lo + step);
    }

    #[test]
    fn series_and_paired_evaluation_agree(
        p in params(),
        frac in 0.0..1.0_f64,
        eps in -12.0..12.0_f64,
    ) {
        let g = DrivenGreen::new(p, TruncationPolicy::default()).expect("admissible");
        let t = frac * p.period();
        let w = g.weights_at(t);
        let (pair, dg) = w.eval_pair(eps);
        let single = g.eval(t, eps);
        prop_assert!((pair - single).norm() <= 1e-12, "eval paths disagree by {:e}", (pair - single).norm());
        let identity = g.time_derivative_from(t, eps, single);
        prop_assert!(
            (dg - identity).norm() <= 1e-9 * (1.0 + identity.norm()),
            "derivative paths disagree by {:e}",
            (dg - identity).norm()
        );
    }
}
