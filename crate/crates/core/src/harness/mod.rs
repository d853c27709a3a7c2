//! Experiment orchestration: config files, seed-parallel ensembles,
//! Monte-Carlo-vs-PDE validation, convergence tables, phase sweeps, and the
//! CSV/JSON output contract.

mod config;
mod output;
mod run;

pub use config::{
    parse_config, ExperimentConfig, InitialProfile, Mode, PdeSettings, SeedSpec, Tolerances,
};
pub use output::{
    execute, write_convergence_csv, write_ensemble_csv, write_manifest, write_pde_csv,
    write_stationary_csv, write_sweep_csv, write_validation_json, RunManifest, RunOutcome,
    TimingsMs,
};
pub use run::{
    convergence_table, phase_sweep, run_ensemble, run_ensemble_sequential, solve_matching_pde,
    validate, ConvergenceRow, EnsembleStats, SweepRow, TimeComparison, ValidationReport,
};
