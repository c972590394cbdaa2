//! Scenario execution. Each run computes everything first and only then
//! writes files, so a failed run leaves no partial outputs; all writes are
//! single-threaded and ordered.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::adiabatic::{joule_fit, AdiabaticEngine};
use crate::config::{RunKind, Scenario};
use crate::error::{Error, Result};
use crate::flux::{FluxEngine, FluxTrace, TraceDiagnostics};
use crate::harmonic_flux::{HarmonicFlux, HarmonicWorkspace};
use crate::model::{ModelParams, R_Q};
use crate::output::{write_json, write_table, Table};
use crate::scattering::{build_smatrix, default_zone, energy_flux_scattering};

/// Energy samples across the central Floquet zone for the unitarity audit.
const UNITARITY_SAMPLES: usize = 33;

/// Runs one resolved scenario; returns the files written.
pub fn run(s: &Scenario) -> Result<Vec<PathBuf>> {
    match s.run {
        RunKind::Trace => run_trace(s),
        RunKind::Adiabatic => run_adiabatic(s),
        RunKind::Audit => run_audit(s),
        RunKind::Fig2 => run_fig2(s),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::Io)
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    params: &'a ModelParams,
    n_times: usize,
    harmonic_cutoff: usize,
    diagnostics: &'a TraceDiagnostics,
}

fn trace_table(trace: &FluxTrace) -> Table {
    let period = trace.params.period();
    let mut table = Table::new(vec![
        "t_over_period",
        "i_c",
        "w_c",
        "w_t",
        "w_d",
        "w_e",
        "power",
        "q_dot",
        "q_tilde_dot",
        "n_d",
        "res_conservation",
        "res_reactance",
    ]);
    for i in 0..trace.times.len() {
        table.push(vec![
            Some(trace.times[i] / period),
            Some(trace.i_c[i]),
            Some(trace.w_c[i]),
            Some(trace.w_t[i]),
            Some(trace.w_d[i]),
            Some(trace.w_e[i]),
            Some(trace.power[i]),
            Some(trace.q_dot[i]),
            Some(trace.q_tilde_dot[i]),
            Some(trace.n_d[i]),
            Some(trace.residual_conservation[i]),
            Some(trace.residual_reactance[i]),
        ]);
    }
    table
}

fn run_trace(s: &Scenario) -> Result<Vec<PathBuf>> {
    let engine = FluxEngine::new(s.params, s.truncation, s.quadrature)?;
    let trace = engine.trace_period(s.n_times)?;
    let summary = TraceSummary {
        params: &trace.params,
        n_times: s.n_times,
        harmonic_cutoff: engine.green().n_max(),
        diagnostics: &trace.diagnostics,
    };

    ensure_dir(&s.out_dir)?;
    let mut files = vec![write_table(&s.out_dir, "trace", &trace_table(&trace), s.format)?];
    files.push(write_json(&s.out_dir, "summary.json", &summary)?);
    Ok(files)
}

#[derive(Serialize)]
struct AdiabaticSummary<'a> {
    params: &'a ModelParams,
    n_times: usize,
    r_fit: f64,
    r_fit_max_residual: f64,
    r_q: f64,
    relative_deviation: f64,
}

fn run_adiabatic(s: &Scenario) -> Result<Vec<PathBuf>> {
    let engine = AdiabaticEngine::new(s.params)?;
    let report = engine.report(s.n_times)?;
    let period = s.params.period();

    let mut table = Table::new(vec![
        "t_over_period",
        "ic1",
        "ic2",
        "q1",
        "q2",
        "wt1",
        "wt2",
        "we1",
        "we2",
        "p_lowfreq",
        "r_tilde",
    ]);
    for i in 0..report.times.len() {
        table.push(vec![
            Some(report.times[i] / period),
            Some(report.ic1[i]),
            Some(report.ic2[i]),
            Some(report.q1[i]),
            Some(report.q2[i]),
            Some(report.wt1[i]),
            Some(report.wt2[i]),
            Some(report.we1[i]),
            Some(report.we2[i]),
            Some(report.p_lowfreq[i]),
            report.r_tilde[i],
        ]);
    }
    let summary = AdiabaticSummary {
        params: &report.params,
        n_times: s.n_times,
        r_fit: report.r_fit,
        r_fit_max_residual: report.r_fit_max_residual,
        r_q: R_Q,
        relative_deviation: (report.r_fit - R_Q).abs() / R_Q,
    };

    ensure_dir(&s.out_dir)?;
    let mut files = vec![write_table(&s.out_dir, "adiabatic", &table, s.format)?];
    files.push(write_json(&s.out_dir, "summary.json", &summary)?);
    Ok(files)
}

#[derive(Serialize)]
struct AuditCheck {
    name: &'static str,
    /// Absolute residual; null when the path could not be evaluated.
    residual: Option<f64>,
    tolerance: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl AuditCheck {
    fn measured(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self { name, residual: Some(residual), tolerance, pass: residual <= tolerance, note: None }
    }

    fn failed_path(name: &'static str, tolerance: f64, err: &Error) -> Self {
        Self { name, residual: None, tolerance, pass: false, note: Some(err.to_string()) }
    }
}

#[derive(Serialize)]
struct AuditDoc<'a> {
    params: &'a ModelParams,
    n_times: usize,
    checks: Vec<AuditCheck>,
    all_pass: bool,
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn run_audit(s: &Scenario) -> Result<Vec<PathBuf>> {
    // The engine's built-in identity gate would abort a deliberately
    // under-resolved run before anything is reported; the audit judges the
    // same residuals itself, so the gate is lifted here.
    let quadrature =
        crate::flux::QuadratureConfig { engine_tol: f64::INFINITY, ..s.quadrature };
    let engine = FluxEngine::new(s.params, s.truncation, quadrature)?;
    let trace = engine.trace_period(s.n_times)?;
    let d = &trace.diagnostics;
    let mut checks = Vec::new();

    checks.push(AuditCheck::measured(
        "conservation",
        d.max_conservation_residual,
        1e-8 * max_abs(&trace.w_d),
    ));
    checks.push(AuditCheck::measured(
        "mean_contact_flux_zero",
        d.mean_w_t.abs(),
        1e-8 * max_abs(&trace.w_t),
    ));
    let power_scale = d.mean_power.abs().max(1e-300);
    checks.push(AuditCheck::measured(
        "mean_heat_equals_mean_power",
        (d.mean_q_dot - d.mean_power).abs().max((d.mean_q_dot - d.mean_q_tilde_dot).abs()),
        1e-8 * power_scale,
    ));

    // Independent Floquet-harmonic path: W_C and I_C recomputed from a
    // different representation must coincide with the time-domain trace.
    match HarmonicWorkspace::new(engine.green(), &s.quadrature) {
        Ok(ws) => {
            match HarmonicFlux::from_workspace(engine.green(), &ws) {
                Ok(hf) => {
                    let rep = hf.compare_with_time_domain(&trace, f64::INFINITY)?;
                    checks.push(AuditCheck::measured(
                        "dual_path_charge_current",
                        rep.max_dev_ic,
                        1e-6 * rep.scale_ic,
                    ));
                    checks.push(AuditCheck::measured(
                        "dual_path_contact_energy_flux",
                        rep.max_dev_wc,
                        1e-6 * rep.scale_wc,
                    ));
                }
                Err(e) => {
                    checks.push(AuditCheck::failed_path("dual_path_charge_current", 0.0, &e));
                    checks.push(AuditCheck::failed_path("dual_path_contact_energy_flux", 0.0, &e));
                }
            }
            // Reactance identity with W_E from the scattering arrangement.
            let scatt = energy_flux_scattering(&ws);
            let we = scatt.series(&trace.times);
            let scale = max_abs(&we);
            let dev = (0..we.len())
                .map(|i| (we[i] - trace.w_c[i] - 0.5 * trace.w_t[i]).abs())
                .fold(0.0, f64::max);
            checks.push(AuditCheck::measured("energy_reactance_identity", dev, 1e-6 * scale));
        }
        Err(e) => {
            checks.push(AuditCheck::failed_path("dual_path_charge_current", 0.0, &e));
            checks.push(AuditCheck::failed_path("dual_path_contact_energy_flux", 0.0, &e));
            checks.push(AuditCheck::failed_path("energy_reactance_identity", 0.0, &e));
        }
    }

    match build_smatrix(engine.green(), default_zone(&s.params, UNITARITY_SAMPLES)) {
        Ok(sm) => {
            checks.push(AuditCheck::measured("unitarity_defect", sm.unitarity_defect(), 1e-6));
        }
        Err(e) => checks.push(AuditCheck::failed_path("unitarity_defect", 1e-6, &e)),
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let doc = AuditDoc { params: &s.params, n_times: s.n_times, checks, all_pass };

    ensure_dir(&s.out_dir)?;
    let files = vec![write_json(&s.out_dir, "audit.json", &doc)?];
    if !all_pass {
        let failed: Vec<&str> =
            doc.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        return Err(Error::PathMismatch(format!(
            "audit failed: {} (see audit.json)",
            failed.join(", ")
        )));
    }
    Ok(files)
}

#[derive(Serialize)]
struct Fig2Branch {
    v_ac: f64,
    slope: f64,
    intercept: f64,
    max_residual: f64,
    relative_deviation: f64,
}

#[derive(Serialize)]
struct Fig2Fit {
    r_q: f64,
    branches: Vec<Fig2Branch>,
}

fn run_fig2(s: &Scenario) -> Result<Vec<PathBuf>> {
    let mut scatter = Table::new(vec!["i_c_squared", "q_dot", "q_tilde_dot", "v_ac"]);
    let mut inset = Table::new(vec!["t_over_period", "v_ac", "i_c", "q_dot", "q_tilde_dot"]);
    let mut branches = Vec::new();

    for &v_ac in &s.fig2_amplitudes {
        let params = ModelParams { v_ac, ..s.params }.validated()?;
        let engine = FluxEngine::new(params, s.truncation, s.quadrature)?;
        let trace = engine.trace_period(s.n_times)?;
        let period = params.period();
        for i in 0..trace.times.len() {
            scatter.push(vec![
                Some(trace.i_c[i] * trace.i_c[i]),
                Some(trace.q_dot[i]),
                Some(trace.q_tilde_dot[i]),
                Some(v_ac),
            ]);
            inset.push(vec![
                Some(trace.times[i] / period),
                Some(v_ac),
                Some(trace.i_c[i]),
                Some(trace.q_dot[i]),
                Some(trace.q_tilde_dot[i]),
            ]);
        }
        let fit = joule_fit(&trace.q_dot, &trace.i_c)?;
        branches.push(Fig2Branch {
            v_ac,
            slope: fit.slope,
            intercept: fit.intercept,
            max_residual: fit.max_residual,
            relative_deviation: (fit.slope - R_Q).abs() / R_Q,
        });
    }
    let fit_doc = Fig2Fit { r_q: R_Q, branches };

    ensure_dir(&s.out_dir)?;
    let mut files = vec![write_table(&s.out_dir, "fig2_scatter", &scatter, s.format)?];
    files.push(write_table(&s.out_dir, "fig2_inset", &inset, s.format)?);
    files.push(write_json(&s.out_dir, "fit.json", &fit_doc)?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OutputFormat, ScenarioConfig};

    fn scenario(text: &str, run: RunKind, dir: &Path) -> Scenario {
        let mut s = ScenarioConfig::parse(text).unwrap().resolve(run).unwrap();
        s.out_dir = dir.to_path_buf();
        s
    }

    const MODERATE: &str = "[model]\nv_ac = 1.0\nomega = 0.5\nband_cutoff = 250.0\n";

    #[test]
    fn undriven_trace_writes_zero_flux_columns() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n_times = 32\n[model]\nv_ac = 0.0\nomega = 0.5\nband_cutoff = 250.0\n";
        let s = scenario(text, RunKind::Trace, dir.path());
        let files = run(&s).unwrap();
        assert_eq!(files.len(), 2);
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("t_over_period,i_c,w_c,w_t,w_d,w_e,power,q_dot"));
        for line in lines {
            let cells: Vec<f64> =
                line.split(',').map(|c| c.parse().unwrap()).collect();
            for &flux in &cells[1..9] {
                // Zero to machine precision; the kernel's resolvent algebra
                // leaves ulp-level residue rather than literal zeros.
                assert!(flux.abs() <= 1e-15, "flux column {flux:e} not zero");
            }
        }
    }

    #[test]
    fn moderate_audit_passes_and_reports_every_check() {
        let dir = tempfile::tempdir().unwrap();
        let s = scenario(MODERATE, RunKind::Audit, dir.path());
        run(&s).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap())
                .unwrap();
        assert_eq!(doc["all_pass"], serde_json::Value::Bool(true));
        let names: Vec<&str> = doc["checks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["name"].as_str().unwrap())
            .collect();
        for expected in [
            "conservation",
            "mean_contact_flux_zero",
            "mean_heat_equals_mean_power",
            "dual_path_charge_current",
            "dual_path_contact_energy_flux",
            "energy_reactance_identity",
            "unitarity_defect",
        ] {
            assert!(names.contains(&expected), "missing audit check {expected}");
        }
    }

    #[test]
    fn under_resolved_audit_fails_loudly_but_still_reports() {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("{MODERATE}[truncation]\nn_max_override = 1\n");
        let s = scenario(&text, RunKind::Audit, dir.path());
        let err = run(&s).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap())
                .unwrap();
        assert_eq!(doc["all_pass"], serde_json::Value::Bool(false));
        let unitarity = doc["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == "unitarity_defect")
            .unwrap();
        assert_eq!(unitarity["pass"], serde_json::Value::Bool(false));
    }

    #[test]
    fn fig2_single_amplitude_emits_one_branch() {
        let dir = tempfile::tempdir().unwrap();
        // A gentler operating point keeps this test quick; the slope is only
        // meaningful for slow driving, which Ω = 0.02 still satisfies.
        let text = "n_times = 64\n\
                    [model]\nv_ac = 1.0\nomega = 0.02\nband_cutoff = 250.0\n\
                    [fig2]\namplitudes = [1.0]\n";
        let s = scenario(text, RunKind::Fig2, dir.path());
        let files = run(&s).unwrap();
        assert_eq!(files.len(), 3);
        let fit: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("fit.json")).unwrap())
                .unwrap();
        let branches = fit["branches"].as_array().unwrap();
        assert_eq!(branches.len(), 1);
        let slope = branches[0]["slope"].as_f64().unwrap();
        assert!((slope - R_Q).abs() / R_Q < 0.05, "slope {slope} far from R_q");
        let scatter = std::fs::read_to_string(dir.path().join("fig2_scatter.csv")).unwrap();
        assert_eq!(scatter.lines().count(), 1 + 64);
    }

    #[test]
    fn identical_scenarios_write_bit_identical_files() {
        let text = "n_times = 24\n[model]\nv_ac = 1.0\nomega = 0.5\nband_cutoff = 250.0\n";
        let read_all = |dir: &Path| -> Vec<(String, Vec<u8>)> {
            let mut entries: Vec<_> = std::fs::read_dir(dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            entries.sort();
            entries
                .into_iter()
                .map(|p| {
                    (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
                })
                .collect()
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run(&scenario(text, RunKind::Trace, dir_a.path())).unwrap();
        run(&scenario(text, RunKind::Trace, dir_b.path())).unwrap();
        assert_eq!(read_all(dir_a.path()), read_all(dir_b.path()));
    }

    #[test]
    fn adiabatic_run_reports_universal_fit() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n_times = 64\n[model]\nv_ac = 1.0\nomega = 0.01\nband_cutoff = 250.0\n";
        let s = scenario(text, RunKind::Adiabatic, dir.path());
        let files = run(&s).unwrap();
        assert_eq!(files.len(), 2);
        let doc: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        assert!(doc["relative_deviation"].as_f64().unwrap() < 1e-10);
        let csv = std::fs::read_to_string(dir.path().join("adiabatic.csv")).unwrap();
        assert!(csv.lines().next().unwrap().ends_with("r_tilde"));
        // Gaps at the drive extrema appear as empty trailing cells.
        assert!(csv.lines().any(|l| l.ends_with(',')));
    }

    #[test]
    fn json_format_emits_tables_as_json() {
        let dir = tempfile::tempdir().unwrap();
        let text = "n_times = 24\n[model]\nv_ac = 1.0\nomega = 0.5\nband_cutoff = 250.0\n";
        let mut s = scenario(text, RunKind::Trace, dir.path());
        s.format = OutputFormat::Json;
        let files = run(&s).unwrap();
        assert!(files[0].ends_with("trace.json"));
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(doc["columns"][0], "t_over_period");
        assert_eq!(doc["rows"].as_array().unwrap().len(), 24);
    }
}
