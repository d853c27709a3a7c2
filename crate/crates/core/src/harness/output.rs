//! File outputs: CSV tables, validation report JSON, and the run manifest.
//!
//! Every float is written with Rust's shortest round-trip formatting, so a
//! repeated run with the same seed list produces byte-identical files. The
//! manifest carries wall-clock timings and is therefore the one output
//! excluded from determinism comparisons.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use super::config::{ExperimentConfig, Mode};
use super::run::{
    run_ensemble, solve_matching_pde, validate, ConvergenceRow, EnsembleStats, SweepRow,
    ValidationReport,
};
use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::params::ModelParams;
use crate::pde::PdeSolution;
use crate::stationary::{stationary_profile, StationaryProfile};

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

/// `t,q,value,stderr` rows, one per (observation time, bin).
pub fn write_ensemble_csv(path: &Path, stats: &EnsembleStats) -> Result<()> {
    let mut out = String::from("t,q,value,stderr\n");
    for (ti, &t) in stats.times.iter().enumerate() {
        let mean = &stats.mean[ti];
        for (j, &v) in mean.values().iter().enumerate() {
            let q = mean.cell_center(j);
            let se = stats.stderr[ti][j];
            out.push_str(&format!("{t},{q},{v},{se}\n"));
        }
    }
    write_text(path, &out)
}

/// `t,q,rho` rows, one per (record time, cell).
pub fn write_pde_csv(path: &Path, sol: &PdeSolution) -> Result<()> {
    let mut out = String::from("t,q,rho\n");
    for (k, &t) in sol.times().iter().enumerate() {
        let p = &sol.profiles()[k];
        for (j, &v) in p.values().iter().enumerate() {
            out.push_str(&format!("{t},{},{v}\n", p.cell_center(j)));
        }
    }
    write_text(path, &out)
}

/// `q,rho_bar` rows over the profile cells.
pub fn write_stationary_csv(path: &Path, sp: &StationaryProfile) -> Result<()> {
    let mut out = String::from("q,rho_bar\n");
    for (j, &v) in sp.profile.values().iter().enumerate() {
        out.push_str(&format!("{},{v}\n", sp.profile.cell_center(j)));
    }
    write_text(path, &out)
}

/// `gamma,theta,regime,sigma_hat,kappa_hat,m_hat,theta_exponent` grid.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = String::from("gamma,theta,regime,sigma_hat,kappa_hat,m_hat,theta_exponent\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.gamma,
            r.theta,
            r.regime.label(),
            r.sigma_hat,
            r.kappa_hat,
            r.m_hat,
            r.time_scale_exponent
        ));
    }
    write_text(path, &out)
}

/// `n,l1,linf,max_stderr` rows of a lattice-size study.
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = String::from("n,l1,linf,max_stderr\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.l1, r.linf, r.max_stderr));
    }
    write_text(path, &out)
}

pub fn write_validation_json(path: &Path, report: &ValidationReport) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Clone, Serialize)]
struct Versions {
    #[serde(rename = "exclusion-core")]
    core: &'static str,
}

/// Provenance record for one run: parameters, seeds, versions, timings.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub mode: Mode,
    pub params: ModelParams,
    pub time_scale: f64,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub bins: usize,
    pub observe_times: Vec<f64>,
    versions: Versions,
    /// Wall-clock milliseconds; excluded from determinism comparisons.
    pub timings_ms: TimingsMs,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct TimingsMs {
    pub ensemble: u64,
    pub total: u64,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    write_text(path, &text)
}

/// Everything a mode execution produced.
#[derive(Debug)]
pub struct RunOutcome {
    /// False only for a completed `validate` run that missed a tolerance.
    pub passed: bool,
    pub written: Vec<PathBuf>,
    pub report: Option<ValidationReport>,
}

/// Run the configured mode end to end and write its outputs into
/// `cfg.output_dir`.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut report = None;
    let mut passed = true;
    let mut ensemble_wall = Duration::ZERO;
    let mut time_scale = crate::pde::time_scale_for(
        cfg.params.variant,
        cfg.params.n,
        cfg.params.gamma,
        cfg.params.theta,
    );
    match cfg.mode {
        Mode::Simulate => {
            let stats = run_ensemble(cfg)?;
            ensemble_wall = stats.wall;
            time_scale = stats.time_scale;
            let path = dir.join("ensemble.csv");
            write_ensemble_csv(&path, &stats)?;
            written.push(path);
        }
        Mode::Pde => {
            let kernel = JumpKernel::new(cfg.params.gamma)?;
            let sol = solve_matching_pde(cfg, &kernel)?;
            let path = dir.join("pde.csv");
            write_pde_csv(&path, &sol)?;
            written.push(path);
        }
        Mode::Stationary => {
            let kernel = JumpKernel::new(cfg.params.gamma)?;
            let regime = crate::pde::classify_regime_for(
                cfg.params.variant,
                cfg.params.gamma,
                cfg.params.theta,
                &kernel,
                cfg.params.kappa,
            );
            let g = cfg.initial.profile(cfg.pde.m)?;
            let sp = stationary_profile(
                &regime,
                cfg.params.alpha,
                cfg.params.beta,
                Some(&g),
                cfg.pde.m,
            )?;
            let path = dir.join("stationary.csv");
            write_stationary_csv(&path, &sp)?;
            written.push(path);
        }
        Mode::Validate => {
            let (rep, stats, sol) = validate(cfg)?;
            ensemble_wall = stats.wall;
            time_scale = stats.time_scale;
            passed = rep.passed;
            for (name, writer) in [
                ("ensemble.csv", Box::new(|p: &Path| write_ensemble_csv(p, &stats)) as Box<dyn Fn(&Path) -> Result<()>>),
                ("pde.csv", Box::new(|p: &Path| write_pde_csv(p, &sol))),
                ("validation.json", Box::new(|p: &Path| write_validation_json(p, &rep))),
            ] {
                let path = dir.join(name);
                writer(&path)?;
                written.push(path);
            }
            report = Some(rep);
        }
        Mode::Sweep => {
            return Err(Error::config(
                "sweep mode takes its grid from the CLI range flags, not a config file",
            ));
        }
    }
    let manifest = RunManifest {
        mode: cfg.mode,
        params: cfg.params,
        time_scale,
        master_seed: cfg.master_seed,
        seeds: cfg.seeds.seeds()?,
        bins: cfg.bins,
        observe_times: cfg.observe_times.clone(),
        versions: Versions {
            core: env!("CARGO_PKG_VERSION"),
        },
        timings_ms: TimingsMs {
            ensemble: ensemble_wall.as_millis() as u64,
            total: started.elapsed().as_millis() as u64,
        },
        outputs: written
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    let manifest_path = dir.join("manifest.json");
    write_manifest(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(RunOutcome {
        passed,
        written,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{InitialProfile, PdeSettings, SeedSpec, Tolerances};
    use crate::params::ReservoirVariant;

    fn config_in(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            mode: Mode::Validate,
            params: ModelParams {
                n: 32,
                gamma: 3.0,
                theta: 0.0,
                kappa: 1.0,
                alpha: 0.2,
                beta: 0.8,
                variant: ReservoirVariant::Extended,
            },
            initial: InitialProfile::Constant { value: 0.5 },
            observe_times: vec![0.0, 0.02],
            seeds: SeedSpec::Count(6),
            bins: 8,
            pde: PdeSettings { m: 40, dt: None },
            output_dir: dir.to_path_buf(),
            master_seed: 3,
            tolerances: Tolerances {
                l1: 0.5,
                linf: None,
                boxcar: None,
            },
        }
    }

    #[test]
    fn validate_mode_writes_all_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config_in(tmp.path());
        let outcome = execute(&cfg).unwrap();
        assert!(outcome.passed);
        assert!(outcome.report.is_some());
        for name in ["ensemble.csv", "pde.csv", "validation.json", "manifest.json"] {
            assert!(tmp.path().join(name).is_file(), "{name} missing");
        }
        let ensemble = fs::read_to_string(tmp.path().join("ensemble.csv")).unwrap();
        let mut lines = ensemble.lines();
        assert_eq!(lines.next(), Some("t,q,value,stderr"));
        assert_eq!(ensemble.lines().count(), 1 + 2 * 8);
        let manifest = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
        assert!(manifest.contains("\"exclusion-core\""));
        assert!(manifest.contains("\"seeds\""));
    }

    #[test]
    fn repeated_runs_are_byte_identical_outside_the_manifest() {
        let tmp_a = tempfile::tempdir().unwrap();
        let tmp_b = tempfile::tempdir().unwrap();
        let mut cfg_a = config_in(tmp_a.path());
        cfg_a.seeds = SeedSpec::List(vec![11, 3, 7]);
        let mut cfg_b = cfg_a.clone();
        cfg_b.output_dir = tmp_b.path().to_path_buf();
        execute(&cfg_a).unwrap();
        execute(&cfg_b).unwrap();
        for name in ["ensemble.csv", "pde.csv", "validation.json"] {
            let a = fs::read(tmp_a.path().join(name)).unwrap();
            let b = fs::read(tmp_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn simulate_and_pde_modes_write_their_tables() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config_in(tmp.path());
        cfg.mode = Mode::Simulate;
        let outcome = execute(&cfg).unwrap();
        assert!(outcome.passed);
        assert!(tmp.path().join("ensemble.csv").is_file());
        assert!(!tmp.path().join("pde.csv").exists());

        cfg.mode = Mode::Pde;
        execute(&cfg).unwrap();
        let pde = fs::read_to_string(tmp.path().join("pde.csv")).unwrap();
        assert!(pde.starts_with("t,q,rho\n"));
        assert_eq!(pde.lines().count(), 1 + 2 * 40);
    }

    #[test]
    fn stationary_mode_uses_the_classified_regime() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config_in(tmp.path());
        cfg.mode = Mode::Stationary;
        execute(&cfg).unwrap();
        let text = fs::read_to_string(tmp.path().join("stationary.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("q,rho_bar"));
        // HeatDirichlet at alpha = 0.2, beta = 0.8: linear profile.
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        let q: f64 = first[0].parse().unwrap();
        let v: f64 = first[1].parse().unwrap();
        assert!((v - (0.2 + 0.6 * q)).abs() < 1e-12);
    }

    #[test]
    fn sweep_mode_is_rejected_in_config_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config_in(tmp.path());
        cfg.mode = Mode::Sweep;
        let err = execute(&cfg).unwrap_err();
        assert!(err.is_usage());
    }
}
