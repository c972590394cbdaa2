//! Charge current from Floquet harmonic sums against the time-domain value.
//!
//! The harmonic path never touches real time: it assembles I_C(t) from the
//! Fourier components of the Green function, integrating each sideband pair
//! over energy once.  Cross-checking it pointwise against the time-domain
//! engine exercises completely different code for the same observable.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example harmonic_currents
//! ```

use floquet_rlm::{FluxEngine, HarmonicFlux, ModelParams, QuadratureConfig, TruncationPolicy};

fn main() -> Result<(), floquet_rlm::Error> {
    let params = ModelParams {
        epsilon0: -1.2,
        v_ac: 1.0,
        omega: 0.5,
        gamma: 1.0,
        mu: 0.0,
        temperature: 0.0,
        band_cutoff: 250.0,
    };
    let engine = FluxEngine::new(params, TruncationPolicy::default(), QuadratureConfig::default())?;
    let trace = engine.trace_period(48)?;
    let harmonic = HarmonicFlux::build(engine.green(), engine.config())?;

    println!("hermiticity defect of the harmonic occupation matrix: {:.3e}", harmonic.hermiticity_defect());
    println!();
    println!("{:>6} {:>16} {:>16} {:>12}", "t/T", "I_C time-domain", "I_C harmonic", "|difference|");
    let period = 2.0 * std::f64::consts::PI / params.omega;
    for k in (0..trace.len()).step_by(6) {
        let hv = harmonic.charge_current(trace.times[k]);
        println!("{:>6.3} {:>16.9e} {:>16.9e} {:>12.3e}",
                 trace.times[k] / period, trace.i_c[k], hv, (trace.i_c[k] - hv).abs());
    }

    let report = harmonic.compare_with_time_domain(&trace, f64::INFINITY)?;
    println!();
    println!("over the whole trace:");
    println!("  max |dI_C| = {:.3e}  (scale {:.3e})", report.max_dev_ic, report.scale_ic);
    println!("  max |dW_C| = {:.3e}  (scale {:.3e})", report.max_dev_wc, report.scale_wc);
    println!("  max |dW_T| = {:.3e}  (scale {:.3e})", report.max_dev_wt, report.scale_wt);
    Ok(())
}
