//! Unitarity of the Floquet scattering matrix as the sideband cutoff grows.
//!
//! With a single channel the Floquet S-matrix rows must satisfy
//! sum_n |S(e_n, e_m)|^2 = 1.  The defect measures how far the truncated
//! sideband sum is from that; it collapses fast once the cutoff passes the
//! drive ratio alpha = V_ac / (hbar*Omega).
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example smatrix_unitarity
//! ```

use floquet_rlm::scattering::{build_smatrix, default_zone};
use floquet_rlm::{DrivenGreen, ModelParams, TruncationPolicy};

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
    let energies = default_zone(&params, 33);
    println!("alpha = V_ac/(hbar*Omega) = {}", params.v_ac / params.omega);
    println!();
    println!("{:>22} {:>18}", "sideband cutoff n_max", "unitarity defect");

    for n_max in [1, 2, 4, 8] {
        let policy = TruncationPolicy {
            n_max_override: Some(n_max),
            ..TruncationPolicy::default()
        };
        let green = DrivenGreen::new(params, policy)?;
        let s = build_smatrix(&green, energies.clone())?;
        println!("{:>22} {:>18.3e}", n_max, s.unitarity_defect());
    }

    // Default rule: cutoff chosen from the Bessel tail of the drive ratio.
    let green = DrivenGreen::new(params, TruncationPolicy::default())?;
    let s = build_smatrix(&green, energies)?;
    println!("{:>22} {:>18.3e}   (default rule)", green.n_max(), s.unitarity_defect());
    Ok(())
}
