//! Fixed, reproducible energy grids.
//!
//! Every energy integral in the library runs over a grid that is built once
//! per scenario and shared across all time points. Keeping the nodes fixed
//! in time is what turns the analytic time-derivative identities into exact
//! identities of the discretized observables (e.g. the discretized charge
//! current is exactly −d/dt of the discretized occupation), so conservation
//! residuals measure physics, not moving-mesh noise.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quad::push_panel;

/// Default Gauss–Legendre order per panel.
pub const DEFAULT_PANEL_ORDER: usize = 20;
/// Growth ratio of coarse panels away from refined regions.
const COARSE_RATIO: f64 = 1.7;

/// Quadrature nodes/weights plus the refinement descriptors they came from.
#[derive(Debug, Clone)]
pub struct EnergyGrid {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Refinement windows as (center, full width).
    pub windows: Vec<(f64, f64)>,
}

/// Declarative description of a grid before panelization.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    /// (a, b, max panel width) regions needing fine resolution.
    pub refined: Vec<(f64, f64, f64)>,
    /// Energies that must coincide with panel boundaries (e.g. sideband
    /// lattice points, where zero-temperature occupation steps land).
    pub hard_edges: Vec<f64>,
    /// First coarse panel width where no refined neighbor dictates one.
    pub coarse_start: f64,
    pub order: usize,
}

impl GridSpec {
    pub fn build(mut self) -> Result<EnergyGrid> {
        if !(self.hi > self.lo) {
            return Err(Error::InvalidParams(format!(
                "grid range [{}, {}] is empty",
                self.lo, self.hi
            )));
        }
        let span = self.hi - self.lo;
        let tol = 1e-9 * span;

        // Clip refined regions; drop the empty ones.
        self.refined = self
            .refined
            .iter()
            .filter_map(|&(a, b, w)| {
                let a = a.max(self.lo);
                let b = b.min(self.hi);
                (b - a > tol && w > 0.0).then_some((a, b, w))
            })
            .collect();

        let mut breaks = vec![self.lo, self.hi];
        for &(a, b, _) in &self.refined {
            breaks.push(a);
            breaks.push(b);
        }
        for &e in &self.hard_edges {
            if e > self.lo + tol && e < self.hi - tol {
                breaks.push(e);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= tol);

        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for cell in breaks.windows(2) {
            let (a, b) = (cell[0], cell[1]);
            let mid = 0.5 * (a + b);
            let fine = self
                .refined
                .iter()
                .filter(|&&(ra, rb, _)| ra <= mid && mid <= rb)
                .map(|&(_, _, w)| w)
                .fold(f64::INFINITY, f64::min);
            if fine.is_finite() {
                let n = ((b - a) / fine).ceil().max(1.0) as usize;
                let h = (b - a) / n as f64;
                for i in 0..n {
                    push_panel(&mut nodes, &mut weights, a + i as f64 * h, a + (i + 1) as f64 * h, self.order);
                }
            } else {
                self.panel_coarse_cell(a, b, &mut nodes, &mut weights)?;
            }
        }

        let windows = self
            .refined
            .iter()
            .map(|&(a, b, _)| (0.5 * (a + b), b - a))
            .collect();
        let grid = EnergyGrid { lo: self.lo, hi: self.hi, nodes, weights, windows };
        grid.check_consistency()?;
        Ok(grid)
    }

    /// Geometrically growing panels across an unrefined cell, anchored at
    /// whichever side touches a refined region (both, if both do).
    fn panel_coarse_cell(
        &self,
        a: f64,
        b: f64,
        nodes: &mut Vec<f64>,
        weights: &mut Vec<f64>,
    ) -> Result<()> {
        let touches_left = self.refined.iter().any(|&(_, rb, _)| (rb - a).abs() <= 1e-9 * (self.hi - self.lo));
        let touches_right = self.refined.iter().any(|&(ra, _, _)| (ra - b).abs() <= 1e-9 * (self.hi - self.lo));
        let start_w = |side: f64| -> f64 {
            self.refined
                .iter()
                .filter(|&&(ra, rb, _)| (rb - side).abs() <= 1e-9 || (ra - side).abs() <= 1e-9)
                .map(|&(_, _, w)| w)
                .fold(self.coarse_start, f64::min)
        };

        let mut edges = vec![a, b];
        match (touches_left, touches_right) {
            (false, false) | (false, true) => {
                // Grow leftward from b.
                let mut w = if touches_right { start_w(b) } else { self.coarse_start };
                let mut x = b;
                while x - w > a {
                    x -= w;
                    edges.push(x);
                    w *= COARSE_RATIO;
                }
            }
            (true, false) => {
                let mut w = start_w(a);
                let mut x = a;
                while x + w < b {
                    x += w;
                    edges.push(x);
                    w *= COARSE_RATIO;
                }
            }
            (true, true) => {
                let mid = 0.5 * (a + b);
                let mut w = start_w(a);
                let mut x = a;
                while x + w < mid {
                    x += w;
                    edges.push(x);
                    w *= COARSE_RATIO;
                }
                w = start_w(b);
                x = b;
                while x - w > mid {
                    x -= w;
                    edges.push(x);
                    w *= COARSE_RATIO;
                }
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (self.hi - self.lo));
        for pair in edges.windows(2) {
            push_panel(nodes, weights, pair[0], pair[1], self.order);
        }
        Ok(())
    }
}

impl EnergyGrid {
    /// One Gauss–Legendre panel between each pair of consecutive edges.
    pub fn from_edges(edges: &[f64], order: usize) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidParams("need at least two grid edges".into()));
        }
        for pair in edges.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidParams("grid edges must increase strictly".into()));
            }
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in edges.windows(2) {
            push_panel(&mut nodes, &mut weights, pair[0], pair[1], order);
        }
        let grid = EnergyGrid {
            lo: edges[0],
            hi: *edges.last().expect("nonempty edges"),
            nodes,
            weights,
            windows: Vec::new(),
        };
        grid.check_consistency()?;
        Ok(grid)
    }

    /// The occupied-band grid used by the time-domain flux path: from −D up
    /// to μ (T = 0) or μ + 40T, refined where the driven resonance sweeps
    /// and, at finite temperature, around the thermal window at μ.
    pub fn occupied(p: &ModelParams, fine: f64, order: usize) -> Result<Self> {
        let p = p.validated()?;
        let hi = if p.temperature > 0.0 { p.mu + 40.0 * p.temperature } else { p.mu };
        let mut refined = vec![(
            p.epsilon0 - p.v_ac - 10.0 * p.gamma,
            p.epsilon0 + p.v_ac + 10.0 * p.gamma,
            fine,
        )];
        if p.temperature > 0.0 {
            let half = 45.0 * p.temperature;
            refined.push((p.mu - half, p.mu + half, fine.min(2.0 * p.temperature)));
        }
        GridSpec {
            lo: -p.band_cutoff,
            hi,
            refined,
            hard_edges: Vec::new(),
            coarse_start: fine,
            order,
        }
        .build()
    }

    /// ∫ f(ε) dε over the grid.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn check_consistency(&self) -> Result<()> {
        for pair in self.nodes.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidParams("grid nodes must increase strictly".into()));
            }
        }
        let sum: f64 = self.weights.iter().sum();
        let want = self.hi - self.lo;
        if ((sum - want) / want).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "grid weights sum to {sum}, expected {want}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2() -> ModelParams {
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

    #[test]
    fn weights_reproduce_interval_length() {
        let g = EnergyGrid::occupied(&fig2(), 0.75, DEFAULT_PANEL_ORDER).unwrap();
        let sum: f64 = g.weights.iter().sum();
        assert_relative_eq!(sum, g.hi - g.lo, max_relative = 1e-13);
        assert_eq!(g.hi, 0.0);
        assert_eq!(g.lo, -150.0);
        for pair in g.nodes.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn occupied_grid_resolves_lorentzian_everywhere_in_sweep() {
        // Integrate the frozen density of states at several level positions;
        // the analytic antiderivative is 2·atan(2(ε−ε_d)/Γ).
        let p = fig2();
        let g = EnergyGrid::occupied(&p, 0.75, DEFAULT_PANEL_ORDER).unwrap();
        for &ed in &[-11.2, -6.0, -1.2, 0.0, 4.4, 8.8] {
            let num = g.integrate(|e| {
                let x = e - ed;
                p.gamma / (x * x + 0.25 * p.gamma * p.gamma)
            });
            let atan = |x: f64| (2.0 * (x - ed) / p.gamma).atan();
            let exact = 2.0 * (atan(g.hi) - atan(g.lo));
            assert_relative_eq!(num, exact, max_relative = 1e-12, epsilon = 1e-13);
        }
    }

    #[test]
    fn finite_temperature_extends_and_refines_near_mu() {
        let p = ModelParams { temperature: 0.1, ..fig2() };
        let g = EnergyGrid::occupied(&p, 0.75, DEFAULT_PANEL_ORDER).unwrap();
        assert_relative_eq!(g.hi, 4.0, max_relative = 1e-12);
        // ∫(−∂f/∂ε)dε over the window must be 1 up to the exp(−40) tail.
        let num = g.integrate(|e| -p.fermi_derivative(e));
        assert_relative_eq!(num, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn hard_edges_become_panel_boundaries() {
        let spec = GridSpec {
            lo: -2.0,
            hi: 2.0,
            refined: vec![(-1.0, 1.0, 0.5)],
            hard_edges: vec![0.25],
            coarse_start: 0.5,
            order: 8,
        };
        let g = spec.build().unwrap();
        // No node may sit exactly on a hard edge (Gauss nodes are interior).
        assert!(g.nodes.iter().all(|&x| (x - 0.25).abs() > 1e-9));
        // Integrating a function with a kink at 0.25 stays spectrally accurate.
        let num = g.integrate(|e| (e - 0.25).abs());
        let exact = 0.5 * (2.25f64.powi(2) + 1.75f64.powi(2));
        assert_relative_eq!(num, exact, max_relative = 1e-12);
    }

    #[test]
    fn rejects_degenerate_ranges() {
        assert!(EnergyGrid::from_edges(&[1.0], 8).is_err());
        assert!(EnergyGrid::from_edges(&[1.0, 1.0], 8).is_err());
        let spec = GridSpec {
            lo: 3.0,
            hi: 3.0,
            refined: vec![],
            hard_edges: vec![],
            coarse_start: 1.0,
            order: 8,
        };
        assert!(spec.build().is_err());
    }
}
