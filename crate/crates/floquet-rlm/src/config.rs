//! Declarative scenario files: a flat TOML document selecting the physical
//! parameters, the analysis to run, and where the outputs go.
//!
//! Every key has a default and the defaults reproduce the strong-drive
//! operating point of the headline figure (ε₀ = −1.2, V_ac = 10, ℏΩ = 10⁻³,
//! μ = 0, T = 0), so an empty file is a valid scenario. Unknown keys are
//! rejected everywhere — a typo must fail loudly rather than silently fall
//! back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::QuadratureConfig;
use crate::green::TruncationPolicy;
use crate::model::ModelParams;

/// Which analysis a scenario requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    /// One-period time trace of all fluxes.
    Trace,
    /// Slow-driving expansion report.
    Adiabatic,
    /// Cross-path identity audit.
    Audit,
    /// Joule-law scatter reproduction.
    Fig2,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Trace => "trace",
            RunKind::Adiabatic => "adiabatic",
            RunKind::Audit => "audit",
            RunKind::Fig2 => "fig2",
        }
    }

    /// Default number of time samples per period for this analysis.
    fn default_n_times(self) -> usize {
        match self {
            RunKind::Audit => 128,
            _ => 256,
        }
    }
}

/// Tabular output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSection {
    epsilon0: f64,
    v_ac: f64,
    omega: f64,
    gamma: f64,
    mu: f64,
    temperature: f64,
    band_cutoff: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            epsilon0: -1.2,
            v_ac: 10.0,
            omega: 1e-3,
            gamma: 1.0,
            mu: 0.0,
            temperature: 0.0,
            band_cutoff: 150.0,
        }
    }
}

impl ModelSection {
    fn params(&self) -> ModelParams {
        ModelParams {
            epsilon0: self.epsilon0,
            v_ac: self.v_ac,
            omega: self.omega,
            gamma: self.gamma,
            mu: self.mu,
            temperature: self.temperature,
            band_cutoff: self.band_cutoff,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct QuadratureSection {
    abs_tol: f64,
    rel_tol: f64,
    cutoff: Option<f64>,
    fine_panel: Option<f64>,
    panel_order: usize,
    engine_tol: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            cutoff: q.cutoff,
            fine_panel: q.fine_panel,
            panel_order: q.panel_order,
            engine_tol: q.engine_tol,
        }
    }
}

impl QuadratureSection {
    fn config(&self) -> QuadratureConfig {
        QuadratureConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            cutoff: self.cutoff,
            fine_panel: self.fine_panel,
            panel_order: self.panel_order,
            engine_tol: self.engine_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TruncationSection {
    tol: f64,
    n_max_override: Option<usize>,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let t = TruncationPolicy::default();
        Self { tol: t.tol, n_max_override: t.n_max_override }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: PathBuf,
    format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: OutputFormat::Csv }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct Fig2Section {
    /// Drive amplitudes, one scatter branch each.
    amplitudes: Vec<f64>,
}

impl Default for Fig2Section {
    fn default() -> Self {
        Self { amplitudes: vec![10.0, 12.0] }
    }
}

/// Parsed scenario file, before cross-validation against the subcommand.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Analysis selector; must agree with the subcommand when both are given.
    run: Option<RunKind>,
    n_times: Option<usize>,
    threads: Option<usize>,
    model: ModelSection,
    quadrature: QuadratureSection,
    truncation: TruncationSection,
    output: OutputSection,
    fig2: Fig2Section,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Validates everything up front and resolves defaults; nothing is
    /// computed or written before this succeeds.
    pub fn resolve(&self, requested: RunKind) -> Result<Scenario> {
        if let Some(declared) = self.run {
            if declared != requested {
                return Err(Error::Config(format!(
                    "config declares run = \"{}\" but the {} subcommand was invoked",
                    declared.name(),
                    requested.name()
                )));
            }
        }
        let params = self.model.params().validated()?;
        let quadrature = self.quadrature.config().validated(&params)?;
        let truncation = TruncationPolicy {
            tol: self.truncation.tol,
            n_max_override: self.truncation.n_max_override,
        };
        if !(truncation.tol > 0.0) {
            return Err(Error::Config(format!(
                "truncation tol must be positive, got {}",
                truncation.tol
            )));
        }
        let n_times = self.n_times.unwrap_or_else(|| requested.default_n_times());
        if n_times < 16 {
            return Err(Error::Config(format!(
                "n_times must be at least 16, got {n_times}"
            )));
        }
        if let Some(threads) = self.threads {
            if threads == 0 {
                return Err(Error::Config("threads must be positive".into()));
            }
        }
        if requested == RunKind::Fig2 {
            if self.fig2.amplitudes.is_empty() {
                return Err(Error::Config("fig2.amplitudes must not be empty".into()));
            }
            for &a in &self.fig2.amplitudes {
                // Each branch must itself be a valid scenario.
                ModelParams { v_ac: a, ..params }.validated()?;
            }
        }
        Ok(Scenario {
            run: requested,
            params,
            quadrature,
            truncation,
            n_times,
            threads: self.threads,
            out_dir: self.output.dir.clone(),
            format: self.output.format,
            fig2_amplitudes: self.fig2.amplitudes.clone(),
        })
    }
}

/// Fully validated scenario, ready to execute.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub run: RunKind,
    pub params: ModelParams,
    pub quadrature: QuadratureConfig,
    pub truncation: TruncationPolicy,
    pub n_times: usize,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub fig2_amplitudes: Vec<f64>,
}
