//! Physical scenario: the harmonically driven resonant level.
//!
//! A single electronic level with energy ε_d(t) = ε₀ + V_ac·cos(Ωt) is
//! tunnel-coupled to one wide-band fermionic reservoir (hybridization width
//! Γ, chemical potential μ, temperature T). Natural units ℏ = e = 1 are used
//! everywhere; energies are conventionally quoted in units of Γ. In these
//! units Planck's constant is h = 2π and the resistance quantum for a single
//! spinless channel is R_q = h/2e² = π.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant in natural units (ℏ = 1 ⇒ h = 2π).
pub const H_PLANCK: f64 = std::f64::consts::TAU;

/// Relaxation resistance quantum h/2e² for one spinless channel.
pub const R_Q: f64 = std::f64::consts::PI;

/// Immutable description of one driven-level scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Bare level position ε₀.
    pub epsilon0: f64,
    /// Drive amplitude V_ac ≥ 0.
    pub v_ac: f64,
    /// Drive angular frequency Ω > 0.
    pub omega: f64,
    /// Hybridization width Γ > 0 (the energy unit; conventionally 1).
    pub gamma: f64,
    /// Reservoir chemical potential μ.
    pub mu: f64,
    /// Reservoir temperature T ≥ 0 (T = 0 selects sharp occupation).
    pub temperature: f64,
    /// Half-bandwidth D used to truncate energy integrals.
    pub band_cutoff: f64,
}

impl ModelParams {
    /// Validates every documented invariant; returns `self` on success so
    /// construction sites can chain.
    pub fn validated(self) -> Result<Self> {
        if !self.all_finite() {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.v_ac < 0.0 {
            return Err(Error::InvalidParams(format!(
                "v_ac must be non-negative, got {}",
                self.v_ac
            )));
        }
        if self.temperature < 0.0 {
            return Err(Error::InvalidParams(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        let needed = 10.0
            * (self.epsilon0.abs() + self.v_ac)
                .max(self.mu.abs())
                .max(self.gamma);
        if self.band_cutoff <= needed {
            return Err(Error::InvalidParams(format!(
                "band_cutoff {} too small; must exceed {}",
                self.band_cutoff, needed
            )));
        }
        Ok(self)
    }

    fn all_finite(&self) -> bool {
        [
            self.epsilon0,
            self.v_ac,
            self.omega,
            self.gamma,
            self.mu,
            self.temperature,
            self.band_cutoff,
        ]
        .iter()
        .all(|x| x.is_finite())
    }

    /// Drive period τ = 2π/Ω.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// Dimensionless drive ratio α = V_ac/Ω controlling the Bessel series.
    pub fn drive_ratio(&self) -> f64 {
        self.v_ac / self.omega
    }

    /// Instantaneous level energy ε_d(t) = ε₀ + V_ac·cos(Ωt).
    pub fn level_energy(&self, t: f64) -> f64 {
        self.epsilon0 + self.v_ac * (self.omega * t).cos()
    }

    /// dε_d/dt = −V_ac·Ω·sin(Ωt).
    pub fn level_velocity(&self, t: f64) -> f64 {
        -self.v_ac * self.omega * (self.omega * t).sin()
    }

    /// d²ε_d/dt² = −V_ac·Ω²·cos(Ωt).
    pub fn level_acceleration(&self, t: f64) -> f64 {
        -self.v_ac * self.omega * self.omega * (self.omega * t).cos()
    }

    /// d³ε_d/dt³ = V_ac·Ω³·sin(Ωt).
    pub fn level_jerk(&self, t: f64) -> f64 {
        self.v_ac * self.omega.powi(3) * (self.omega * t).sin()
    }

    /// Fermi-Dirac occupation. At T = 0 this is the step θ(μ−ε) with the
    /// symmetric convention f(μ) = 1/2 (a single point never contributes to
    /// the regular integrals, and the symmetric choice avoids bias when
    /// windows are split exactly at μ).
    pub fn fermi(&self, eps: f64) -> f64 {
        if self.temperature == 0.0 {
            return if eps < self.mu {
                1.0
            } else if eps > self.mu {
                0.0
            } else {
                0.5
            };
        }
        let x = (eps - self.mu) / self.temperature;
        // Guard against overflow of exp for |x| large.
        if x > 500.0 {
            0.0
        } else if x < -500.0 {
            1.0
        } else {
            1.0 / (1.0 + x.exp())
        }
    }

    /// ∂f/∂ε = −1/[4T cosh²((ε−μ)/2T)]; only meaningful at T > 0.
    /// The T = 0 delta-function limit is handled analytically by callers.
    pub fn fermi_derivative(&self, eps: f64) -> f64 {
        assert!(
            self.temperature > 0.0,
            "fermi_derivative requires T > 0; T = 0 callers use the delta-function limit"
        );
        let x = (eps - self.mu) / (2.0 * self.temperature);
        if x.abs() > 250.0 {
            return 0.0;
        }
        let c = x.cosh();
        -1.0 / (4.0 * self.temperature * c * c)
    }

    /// Frozen retarded Green function G_f(t,ε) = 1/(ε − ε_d(t) + iΓ/2):
    /// the stationary propagator at the instantaneous level position.
    pub fn frozen_green(&self, t: f64, eps: f64) -> Complex64 {
        let x = eps - self.level_energy(t);
        1.0 / Complex64::new(x, 0.5 * self.gamma)
    }

    /// Frozen local density of states ρ_f(t,ε) = Γ|G_f|² = −2 Im G_f,
    /// a Lorentzian of half-width Γ/2 with ∫ρ_f dε = 2π and peak 4/Γ.
    pub fn frozen_dos(&self, t: f64, eps: f64) -> f64 {
        let x = eps - self.level_energy(t);
        self.gamma / (x * x + 0.25 * self.gamma * self.gamma)
    }

    /// ∂ρ_f/∂ε = −2(ε−ε_d)ρ_f²/Γ; used by the adiabatic expansion.
    pub fn frozen_dos_energy_derivative(&self, t: f64, eps: f64) -> f64 {
        let x = eps - self.level_energy(t);
        let rho = self.frozen_dos(t, eps);
        -2.0 * x * rho * rho / self.gamma
    }

    /// ∂ρ_f/∂t = +2(ε−ε_d)ρ_f²·(dε_d/dt)/Γ (the level moves, the point ε
    /// stays); equals −∂_ερ_f · dε_d/dt.
    pub fn frozen_dos_time_derivative(&self, t: f64, eps: f64) -> f64 {
        -self.frozen_dos_energy_derivative(t, eps) * self.level_velocity(t)
    }
}
