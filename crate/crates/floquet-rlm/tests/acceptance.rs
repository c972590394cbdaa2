//! Acceptance gate: one test per primary quantitative claim, each printing a
//! PASS line with the measured numbers (visible under `--nocapture`; the
//! libtest result line itself is the pass/fail verdict).
//!
//! Run with:
//!
//! ```not_rust
//! cargo test --test acceptance -- --nocapture --test-threads 1
//! ```
//!
//! The strong-drive configuration (V_ac = 10Γ, ℏΩ = 10⁻³Γ) is traced once at
//! 1024 points and shared by every criterion that needs it; the whole gate
//! runs in about a minute on one core.

use std::sync::OnceLock;

use floquet_rlm::green::green_oracle;
use floquet_rlm::harmonic_flux::HarmonicWorkspace;
use floquet_rlm::scattering::default_zone;
use floquet_rlm::{
    build_smatrix, energy_flux_scattering, joule_fit, AdiabaticEngine, DrivenGreen, FluxEngine,
    FluxTrace, HarmonicFlux, ModelParams, QuadratureConfig, TruncationPolicy, R_Q,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig2_params() -> ModelParams {
    ModelParams {
        epsilon0: -1.2,
        v_ac: 10.0,
        omega: 1e-3,
        gamma: 1.0,
        mu: 0.0,
        temperature: 0.0,
        band_cutoff: 150.0,
    }
}

fn moderate_params() -> ModelParams {
    ModelParams {
        epsilon0: -1.2,
        v_ac: 1.0,
        omega: 0.5,
        gamma: 1.0,
        mu: 0.0,
        temperature: 0.0,
        band_cutoff: 250.0,
    }
}

fn trace_of(p: ModelParams, n: usize) -> FluxTrace {
    FluxEngine::new(p, TruncationPolicy::default(), QuadratureConfig::default())
        .expect("valid parameters")
        .trace_period(n)
        .expect("trace")
}

/// Strong drive, 1024 samples: dense enough that the discrete period averages
/// are converged far past the 1e-8 budget (flux harmonics decay like
/// exp(-n Γ / 2V_ac), so aliasing dies only once n_times outruns ~48 V_ac/Γ).
fn fig2_trace() -> &'static FluxTrace {
    static T: OnceLock<FluxTrace> = OnceLock::new();
    T.get_or_init(|| trace_of(fig2_params(), 1024))
}

/// Same drive at twice the frequency, on the 256-point grid used for every
/// fixed-grid comparison against the 1024-point trace's every-4th subsample.
fn fig2_double_omega_trace() -> &'static FluxTrace {
    static T: OnceLock<FluxTrace> = OnceLock::new();
    T.get_or_init(|| {
        trace_of(
            ModelParams {
                omega: 2e-3,
                ..fig2_params()
            },
            256,
        )
    })
}

fn moderate_fixture() -> &'static (FluxEngine, FluxTrace) {
    static T: OnceLock<(FluxEngine, FluxTrace)> = OnceLock::new();
    T.get_or_init(|| {
        let engine = FluxEngine::new(
            moderate_params(),
            TruncationPolicy::default(),
            QuadratureConfig::default(),
        )
        .expect("valid parameters");
        let trace = engine.trace_period(128).expect("trace");
        (engine, trace)
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

fn every_fourth(v: &[f64]) -> Vec<f64> {
    v.iter().step_by(4).copied().collect()
}

#[test]
fn criterion_1_conservation() {
    let trace = fig2_trace();
    let residual = max_abs(&every_fourth(&trace.residual_conservation));
    let budget = 1e-8 * max_abs(&every_fourth(&trace.w_d));
    assert!(
        residual <= budget,
        "conservation residual {residual:.3e} exceeds {budget:.3e}"
    );
    println!("criterion 1 (conservation): PASS  max|W_C+W_T+W_D| = {residual:.3e} <= {budget:.3e} over 256 points");
}

#[test]
fn criterion_2_joule_slope_universal() {
    // Fit branch 1: V_ac = 10, from the shared 1024-point trace.
    let t10 = fig2_trace();
    let fit10 = joule_fit(&t10.q_dot, &t10.i_c).expect("fit");
    let dev10 = (fit10.slope - R_Q).abs() / R_Q;
    assert!(dev10 < 0.01, "V_ac=10 slope {:.6} is {dev10:.2e} from pi", fit10.slope);

    // Fit branch 2: V_ac = 12.
    let t12 = trace_of(
        ModelParams {
            v_ac: 12.0,
            ..fig2_params()
        },
        256,
    );
    let fit12 = joule_fit(&t12.q_dot, &t12.i_c).expect("fit");
    let dev12 = (fit12.slope - R_Q).abs() / R_Q;
    assert!(dev12 < 0.01, "V_ac=12 slope {:.6} is {dev12:.2e} from pi", fit12.slope);

    // Pointwise clause: away from the drive extrema (where I_C passes through
    // zero) the ratio Q_dot/I_C^2 sits within an O(Omega) band around pi, and
    // the band shrinks linearly when Omega is halved.  Both legs use the same
    // 256-point grid.
    let worst_on = |times: &[f64], q: &[f64], i: &[f64]| {
        let ic2_max = i.iter().map(|x| x * x).fold(0.0, f64::max);
        let mut worst = 0.0_f64;
        for k in 0..times.len() {
            let ic2 = i[k] * i[k];
            if ic2 >= 0.01 * ic2_max {
                worst = worst.max((q[k] / ic2 - R_Q).abs());
            }
        }
        worst
    };
    let w1 = worst_on(
        &every_fourth(&t10.times),
        &every_fourth(&t10.q_dot),
        &every_fourth(&t10.i_c),
    );
    let t2 = fig2_double_omega_trace();
    let w2 = worst_on(&t2.times, &t2.q_dot, &t2.i_c);
    assert!(w1 <= 150.0 * 1e-3, "pointwise deviation {w1:.3e} is not O(Omega)");
    let scaling = w2 / w1;
    assert!(
        (1.5..=2.8).contains(&scaling),
        "halving Omega scaled the pointwise band by {scaling:.3}, expected ~2"
    );
    println!(
        "criterion 2 (Joule law): PASS  slope dev {dev10:.2e} (V=10) / {dev12:.2e} (V=12) < 1e-2; \
         pointwise band {w1:.2e} = {:.0}*Omega, halving ratio {scaling:.2}",
        w1 / 1e-3
    );
}

#[test]
fn criterion_3_heat_positivity_contrast() {
    let trace = fig2_trace();
    let min_q = trace.q_dot.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_qt = trace
        .q_tilde_dot
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    assert!(min_q >= -1e-10, "Q_dot dips to {min_q:.3e}");
    assert!(min_qt < 0.0, "Q_tilde_dot never goes negative (min {min_qt:.3e})");
    println!("criterion 3 (second law contrast): PASS  min Q_dot = {min_q:.3e} >= -1e-10, min Q_tilde_dot = {min_qt:.3e} < 0");
}

#[test]
fn criterion_4_energy_reactance_identity() {
    let (engine, trace) = moderate_fixture();
    let ws = HarmonicWorkspace::new(engine.green(), engine.config()).expect("workspace");
    let w_e = energy_flux_scattering(&ws).series(&trace.times);
    let mut dev = 0.0_f64;
    for k in 0..trace.len() {
        dev = dev.max((w_e[k] - trace.w_c[k] - 0.5 * trace.w_t[k]).abs());
    }
    let budget = 1e-6 * max_abs(&w_e);
    assert!(dev <= budget, "reactance identity broken by {dev:.3e} (budget {budget:.3e})");
    println!("criterion 4 (energy reactance): PASS  max|W_E - W_C - W_T/2| = {dev:.3e} <= {budget:.3e}");
}

#[test]
fn criterion_5_period_averages() {
    let mut lines = Vec::new();
    for (label, trace) in [
        ("strong", fig2_trace()),
        ("moderate", &moderate_fixture().1),
    ] {
        let d = &trace.diagnostics;
        let wt_budget = 1e-8 * max_abs(&trace.w_t);
        assert!(
            d.mean_w_t.abs() <= wt_budget,
            "{label}: mean W_T {:.3e} exceeds {wt_budget:.3e}",
            d.mean_w_t
        );
        let p_budget = 1e-8 * d.mean_power;
        assert!(p_budget > 0.0);
        assert!(
            (d.mean_q_dot - d.mean_power).abs() <= p_budget,
            "{label}: mean Q_dot {:.9e} vs mean P {:.9e}",
            d.mean_q_dot,
            d.mean_power
        );
        assert!(
            (d.mean_q_dot - d.mean_q_tilde_dot).abs() <= p_budget,
            "{label}: mean Q_dot {:.9e} vs mean Q_tilde_dot {:.9e}",
            d.mean_q_dot,
            d.mean_q_tilde_dot
        );
        lines.push(format!(
            "{label}: |mean W_T| = {:.2e}, |mean Q - mean P| = {:.2e}, |mean Q - mean Q~| = {:.2e}",
            d.mean_w_t.abs(),
            (d.mean_q_dot - d.mean_power).abs(),
            (d.mean_q_dot - d.mean_q_tilde_dot).abs()
        ));
    }
    println!("criterion 5 (period averages): PASS  {}", lines.join("; "));
}

#[test]
fn criterion_6_dual_path_agreement() {
    // Green function: Bessel series against blind quadrature of the two-time
    // kernel, 100 random (t, eps) pairs in each drive regime.
    let mut rng = ChaCha8Rng::seed_from_u64(0x524c_4d06);
    let mut worst_green = 0.0_f64;
    for p in [moderate_params(), fig2_params()] {
        let green = DrivenGreen::new(p, TruncationPolicy::default()).expect("green");
        let period = 2.0 * std::f64::consts::PI / p.omega;
        for _ in 0..100 {
            let t = rng.gen_range(0.0..period);
            let eps = rng.gen_range(-8.0..8.0);
            let series = green.eval(t, eps);
            let oracle = green_oracle(t, eps, &p, 1e-9).expect("oracle");
            let dev = (series - oracle).norm();
            assert!(
                dev <= 1e-6,
                "G^r({t:.3}, {eps:.3}) at V_ac={} deviates by {dev:.3e}",
                p.v_ac
            );
            worst_green = worst_green.max(dev);
        }
    }

    // Fluxes: harmonic-sum path against the time-domain path, moderate regime.
    let (engine, trace) = moderate_fixture();
    let harmonic = HarmonicFlux::build(engine.green(), engine.config()).expect("harmonic");
    let report = harmonic
        .compare_with_time_domain(trace, f64::INFINITY)
        .expect("comparison");
    let rel_ic = report.max_dev_ic / report.scale_ic;
    let rel_wc = report.max_dev_wc / report.scale_wc;
    assert!(rel_ic <= 1e-6, "harmonic I_C off by {rel_ic:.3e} relative");
    assert!(rel_wc <= 1e-6, "harmonic W_C off by {rel_wc:.3e} relative");
    println!(
        "criterion 6 (dual paths): PASS  worst |series - oracle| = {worst_green:.3e} over 200 samples; \
         harmonic vs time-domain: I_C {rel_ic:.3e}, W_C {rel_wc:.3e} relative"
    );
}

#[test]
fn criterion_7_adiabatic_residual_scaling() {
    // Residual after both expansion orders, summed over a fixed 256-point
    // grid; halving Omega must shrink it by >= 8 (Omega^3 law).
    let residual_mean = |p: ModelParams, times: &[f64], q_dot: &[f64]| {
        let slow = AdiabaticEngine::new(p).expect("adiabatic engine");
        let mut sum = 0.0;
        for (k, &t) in times.iter().enumerate() {
            let a = slow.evaluate(t);
            sum += (q_dot[k] - a.q1 - a.q2).abs();
        }
        sum / times.len() as f64
    };

    let t1 = fig2_trace();
    let res1 = residual_mean(
        fig2_params(),
        &every_fourth(&t1.times),
        &every_fourth(&t1.q_dot),
    );
    let p2 = ModelParams {
        omega: 2e-3,
        ..fig2_params()
    };
    let t2 = fig2_double_omega_trace();
    let res2 = residual_mean(p2, &t2.times, &t2.q_dot);

    let ratio = res2 / res1;
    assert!(
        ratio >= 8.0,
        "residual dropped only {ratio:.3}x when halving Omega ({res2:.3e} -> {res1:.3e})"
    );
    println!("criterion 7 (adiabatic scaling): PASS  residual {res2:.3e} -> {res1:.3e}, drop x{ratio:.2} >= 8");
}

#[test]
fn criterion_8_smatrix_unitarity() {
    let p = moderate_params();
    let green = DrivenGreen::new(p, TruncationPolicy::default()).expect("green");
    let s = build_smatrix(&green, default_zone(&p, 33)).expect("smatrix");
    let defect = s.unitarity_defect();
    assert!(defect <= 1e-6, "unitarity defect {defect:.3e} with default cutoff rule");
    println!(
        "criterion 8 (unitarity): PASS  defect = {defect:.3e} <= 1e-6 at sideband cutoff {}",
        s.n_max()
    );
}
