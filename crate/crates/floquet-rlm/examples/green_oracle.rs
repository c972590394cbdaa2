//! Bessel-series Green function against blind quadrature of its definition.
//!
//! The production evaluator sums the Bessel sideband series.  The oracle
//! integrates the exact two-time kernel over the memory variable with
//! adaptive quadrature and knows nothing about Bessel functions.  Agreement
//! across drive regimes pins down both the series and its truncation rule.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example green_oracle
//! ```

use floquet_rlm::green::green_oracle;
use floquet_rlm::{DrivenGreen, ModelParams, TruncationPolicy};

fn main() -> Result<(), floquet_rlm::Error> {
    let regimes = [
        ("moderate (alpha = 2)", 1.0, 0.5),
        ("strong (alpha = 50)", 5.0, 0.1),
    ];
    for (label, v_ac, omega) in regimes {
        let params = ModelParams {
            epsilon0: -1.2,
            v_ac,
            omega,
            gamma: 1.0,
            mu: 0.0,
            temperature: 0.0,
            band_cutoff: 150.0,
        };
        let green = DrivenGreen::new(params, TruncationPolicy::default())?;
        let period = 2.0 * std::f64::consts::PI / omega;

        println!("{label}: sideband cutoff n_max = {}", green.n_max());
        println!("{:>8} {:>8} {:>26} {:>12}", "t/T", "eps", "G^r (series)", "|series-oracle|");
        for (ft, eps) in [(0.13, -3.4), (0.50, -1.2), (0.82, 2.6)] {
            let t = ft * period;
            let series = green.eval(t, eps);
            let oracle = green_oracle(t, eps, &params, 1e-10)?;
            println!(
                "{:>8.2} {:>8.2} {:>12.6} {:>+12.6}i {:>12.3e}",
                ft, eps, series.re, series.im, (series - oracle).norm()
            );
        }
        println!();
    }
    println!("frozen high-precision references for the same function live in");
    println!("tests/golden/green_oracle.txt and are enforced by `cargo test`.");
    Ok(())
}
