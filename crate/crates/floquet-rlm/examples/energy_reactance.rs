//! Energy flux through the scattering region from two unrelated computations.
//!
//! The time-domain path assembles W_E = W_C + W_T/2 from Green-function
//! integrals; the Floquet path builds it from scattering-matrix sideband
//! sums.  Their pointwise agreement is a strong end-to-end check, since the
//! two paths share no code beyond the driven Green function itself.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example energy_reactance
//! ```

use floquet_rlm::harmonic_flux::HarmonicWorkspace;
use floquet_rlm::scattering::energy_flux_scattering;
use floquet_rlm::{FluxEngine, ModelParams, QuadratureConfig, TruncationPolicy};

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
    let cfg = QuadratureConfig::default();
    let engine = FluxEngine::new(params, TruncationPolicy::default(), cfg)?;
    let trace = engine.trace_period(64)?;

    let ws = HarmonicWorkspace::new(engine.green(), engine.config())?;
    let scattering = energy_flux_scattering(&ws);
    let w_e_scat = scattering.series(&trace.times);

    let mut max_dev = 0.0_f64;
    let mut scale = 0.0_f64;
    println!("{:>6} {:>16} {:>16} {:>12}", "t/T", "W_C + W_T/2", "scattering W_E", "|difference|");
    let period = 2.0 * std::f64::consts::PI / params.omega;
    for k in 0..trace.len() {
        let identity = trace.w_c[k] + 0.5 * trace.w_t[k];
        let dev = (identity - w_e_scat[k]).abs();
        max_dev = max_dev.max(dev);
        scale = scale.max(identity.abs());
        if k % 8 == 0 {
            println!("{:>6.3} {:>16.9e} {:>16.9e} {:>12.3e}",
                     trace.times[k] / period, identity, w_e_scat[k], dev);
        }
    }

    println!();
    println!("max pointwise deviation = {:.3e}  ({:.3e} of the flux scale)", max_dev, max_dev / scale);
    println!("sideband cutoff used by the scattering sum: l_max = {}", scattering.l_max());
    Ok(())
}
