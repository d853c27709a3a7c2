//! Ensemble execution, Monte-Carlo-vs-PDE validation, convergence tables,
//! and the regime phase sweep.

use std::time::{Duration, Instant};

use serde::Serialize;

use super::config::{ExperimentConfig, Tolerances};
use crate::error::{Error, Result};
use crate::exec;
use crate::kernel::JumpKernel;
use crate::params::{ModelParams, ReservoirVariant};
use crate::pde::{
    classify_regime_for, solve_at, time_scale_exponent_for, PdeSolution, Regime, RegimeKind,
};
use crate::profile::Profile;
use crate::sim::{boxcar_left, boxcar_right, density_histogram, EventCounts, Simulator};

/// Seed-aggregated binned densities at each observation time.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub params: ModelParams,
    /// Time speed-up Theta(N) relating macroscopic and event time.
    pub time_scale: f64,
    pub bins: usize,
    pub times: Vec<f64>,
    /// Mean binned profile per observation time.
    pub mean: Vec<Profile>,
    /// Standard error of each bin mean, same layout as `mean`.
    pub stderr: Vec<Vec<f64>>,
    /// Seed-averaged boxcar density over the window (0, eps] per time.
    pub boxcar_left: Vec<f64>,
    /// Seed-averaged boxcar density over [1-eps, 1) per time.
    pub boxcar_right: Vec<f64>,
    /// Window width used for the boxcar estimates (one bin).
    pub boxcar_eps: f64,
    pub seeds: Vec<u64>,
    pub events: EventCounts,
    pub wall: Duration,
}

struct SeedOutcome {
    hists: Vec<Vec<f64>>,
    box_l: Vec<f64>,
    box_r: Vec<f64>,
    events: EventCounts,
}

fn run_seed(
    sim: &Simulator,
    g: &Profile,
    times: &[f64],
    bins: usize,
    eps: f64,
    master_seed: u64,
    seed: u64,
) -> Result<SeedOutcome> {
    let mut rng = exec::rng_for(master_seed, seed);
    let cfg = sim.init_from_profile(g, &mut rng)?;
    let t_macro = *times.last().expect("validated nonempty");
    let traj = sim.run(cfg, t_macro, times, seed, &mut rng)?;
    let mut hists = Vec::with_capacity(times.len());
    let mut box_l = Vec::with_capacity(times.len());
    let mut box_r = Vec::with_capacity(times.len());
    for snap in &traj.snapshots {
        let cfg = sim.configuration_from(snap)?;
        hists.push(density_histogram(&cfg, bins)?.values().to_vec());
        box_l.push(boxcar_left(&cfg, eps)?);
        box_r.push(boxcar_right(&cfg, eps)?);
    }
    Ok(SeedOutcome {
        hists,
        box_l,
        box_r,
        events: traj.events,
    })
}

fn aggregate(
    cfg: &ExperimentConfig,
    sim: &Simulator,
    seeds: Vec<u64>,
    outcomes: Vec<Result<SeedOutcome>>,
    wall: Duration,
) -> Result<EnsembleStats> {
    let mut done = Vec::with_capacity(outcomes.len());
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        match outcome {
            Ok(o) => done.push(o),
            Err(e) => {
                return Err(Error::numeric(format!("seed {seed}: {e}")));
            }
        }
    }
    let k = done.len();
    let kf = k as f64;
    let times = cfg.observe_times.clone();
    let bins = cfg.bins;
    let mut mean = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    let mut box_l = Vec::with_capacity(times.len());
    let mut box_r = Vec::with_capacity(times.len());
    for ti in 0..times.len() {
        let mut m = vec![0.0; bins];
        for o in &done {
            for (j, &v) in o.hists[ti].iter().enumerate() {
                m[j] += v;
            }
        }
        for v in &mut m {
            *v /= kf;
        }
        let mut se = vec![0.0; bins];
        if k >= 2 {
            for o in &done {
                for (j, &v) in o.hists[ti].iter().enumerate() {
                    let d = v - m[j];
                    se[j] += d * d;
                }
            }
            for v in &mut se {
                *v = (*v / (kf * (kf - 1.0))).sqrt();
            }
        }
        mean.push(Profile::new(m));
        stderr.push(se);
        box_l.push(done.iter().map(|o| o.box_l[ti]).sum::<f64>() / kf);
        box_r.push(done.iter().map(|o| o.box_r[ti]).sum::<f64>() / kf);
    }
    let mut events = EventCounts::default();
    for o in &done {
        events.flips += o.events.flips;
        events.exchanges += o.events.exchanges;
        events.exchange_noops += o.events.exchange_noops;
    }
    Ok(EnsembleStats {
        params: *sim.params(),
        time_scale: sim.time_scale(),
        bins,
        times,
        mean,
        stderr,
        boxcar_left: box_l,
        boxcar_right: box_r,
        boxcar_eps: 1.0 / bins as f64,
        seeds,
        events,
        wall,
    })
}

fn run_ensemble_impl(cfg: &ExperimentConfig, parallel: bool) -> Result<(EnsembleStats, Simulator)> {
    cfg.validate()?;
    let sim = Simulator::new(cfg.params)?;
    let g = cfg.initial.profile(cfg.params.n - 1)?;
    let seeds = cfg.seeds.seeds()?;
    let eps = 1.0 / cfg.bins as f64;
    let start = Instant::now();
    let times = cfg.observe_times.clone();
    let master = cfg.master_seed;
    let bins = cfg.bins;
    let f = |seed: u64| run_seed(&sim, &g, &times, bins, eps, master, seed);
    let outcomes = if parallel {
        exec::seed_map(&seeds, f)
    } else {
        exec::seed_map_sequential(&seeds, f)
    };
    let stats = aggregate(cfg, &sim, seeds, outcomes, start.elapsed())?;
    Ok((stats, sim))
}

/// Run the configured ensemble with seed-parallel scheduling. The result is
/// identical to the sequential runner for any worker count: per-seed work is
/// independent and the reduction follows the fixed seed order.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleStats> {
    run_ensemble_impl(cfg, true).map(|(stats, _)| stats)
}

/// Single-threaded reference runner for determinism checks and benchmarks.
pub fn run_ensemble_sequential(cfg: &ExperimentConfig) -> Result<EnsembleStats> {
    run_ensemble_impl(cfg, false).map(|(stats, _)| stats)
}

/// Monte Carlo vs PDE comparison at one observation time.
#[derive(Debug, Clone, Serialize)]
pub struct TimeComparison {
    pub t: f64,
    /// Bin-averaged absolute distance between the mean empirical profile
    /// and the PDE solution at bin centers.
    pub l1: f64,
    pub linf: f64,
    pub max_stderr: f64,
    pub boxcar_left_mc: f64,
    pub boxcar_left_pde: f64,
    pub boxcar_right_mc: f64,
    pub boxcar_right_pde: f64,
}

/// Outcome of a `validate` run.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub regime: RegimeKind,
    pub n: usize,
    pub bins: usize,
    pub seed_count: usize,
    pub times: Vec<TimeComparison>,
    pub tolerances: Tolerances,
    /// Human-readable tolerance breaches; empty iff `passed`.
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Solve the PDE matching `cfg` (regime classified from its parameters)
/// through the configured observation times.
pub fn solve_matching_pde(cfg: &ExperimentConfig, kernel: &JumpKernel) -> Result<PdeSolution> {
    let regime = regime_of(cfg, kernel);
    let g = cfg.initial.profile(cfg.pde.m)?;
    solve_at(
        &regime,
        &g,
        cfg.params.alpha,
        cfg.params.beta,
        &cfg.observe_times,
        cfg.pde_dt(),
        cfg.pde.m,
    )
}

fn regime_of(cfg: &ExperimentConfig, kernel: &JumpKernel) -> Regime {
    classify_regime_for(
        cfg.params.variant,
        cfg.params.gamma,
        cfg.params.theta,
        kernel,
        cfg.params.kappa,
    )
}

/// Run the ensemble and the matching PDE solve, compare them, and grade the
/// distances against the configured tolerances.
pub fn validate(cfg: &ExperimentConfig) -> Result<(ValidationReport, EnsembleStats, PdeSolution)> {
    let (stats, sim) = run_ensemble_impl(cfg, true)?;
    let pde = solve_matching_pde(cfg, sim.kernel())?;
    let report = compare(cfg, &stats, &pde, sim.kernel())?;
    Ok((report, stats, pde))
}

fn compare(
    cfg: &ExperimentConfig,
    stats: &EnsembleStats,
    pde: &PdeSolution,
    kernel: &JumpKernel,
) -> Result<ValidationReport> {
    let regime = regime_of(cfg, kernel);
    let tol = cfg.tolerances;
    let mut rows = Vec::with_capacity(stats.times.len());
    let mut failures = Vec::new();
    for (ti, &t) in stats.times.iter().enumerate() {
        let k = pde
            .index_of_time(t)
            .ok_or_else(|| Error::numeric(format!("PDE solution lacks record time {t}")))?;
        let solution = &pde.profiles()[k];
        let mean = &stats.mean[ti];
        let mut l1 = 0.0;
        let mut linf = 0.0f64;
        for (j, &v) in mean.values().iter().enumerate() {
            let d = (v - solution.interp(mean.cell_center(j))).abs();
            l1 += d;
            linf = linf.max(d);
        }
        l1 /= stats.bins as f64;
        let row = TimeComparison {
            t,
            l1,
            linf,
            max_stderr: stats.stderr[ti].iter().cloned().fold(0.0, f64::max),
            boxcar_left_mc: stats.boxcar_left[ti],
            boxcar_left_pde: solution.boundary_left(),
            boxcar_right_mc: stats.boxcar_right[ti],
            boxcar_right_pde: solution.boundary_right(),
        };
        if row.l1 > tol.l1 {
            failures.push(format!("t = {t}: L1 {} exceeds {}", row.l1, tol.l1));
        }
        if let Some(lim) = tol.linf {
            if row.linf > lim {
                failures.push(format!("t = {t}: Linf {} exceeds {lim}", row.linf));
            }
        }
        if let Some(lim) = tol.boxcar {
            let dl = (row.boxcar_left_mc - row.boxcar_left_pde).abs();
            let dr = (row.boxcar_right_mc - row.boxcar_right_pde).abs();
            if dl > lim || dr > lim {
                failures.push(format!(
                    "t = {t}: boxcar deviations ({dl}, {dr}) exceed {lim}"
                ));
            }
        }
        rows.push(row);
    }
    Ok(ValidationReport {
        regime: regime.kind,
        n: cfg.params.n,
        bins: stats.bins,
        seed_count: stats.seeds.len(),
        times: rows,
        tolerances: tol,
        passed: failures.is_empty(),
        failures,
    })
}

/// One row of a lattice-size convergence study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Distances at the final observation time.
    pub l1: f64,
    pub linf: f64,
    pub max_stderr: f64,
}

/// Validate at each lattice size in ascending `n_list`, holding the rest of
/// the configuration fixed.
pub fn convergence_table(cfg: &ExperimentConfig, n_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::argument("n_list must be nonempty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::argument("n_list must be strictly ascending"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut sized = cfg.clone();
        sized.params.n = n;
        let (report, _, _) = validate(&sized)?;
        let last = report
            .times
            .last()
            .expect("observe_times validated nonempty");
        rows.push(ConvergenceRow {
            n,
            l1: last.l1,
            linf: last.linf,
            max_stderr: last.max_stderr,
        });
    }
    Ok(rows)
}

/// One point of the regime phase diagram.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub theta: f64,
    pub regime: RegimeKind,
    pub sigma_hat: f64,
    pub kappa_hat: f64,
    pub m_hat: f64,
    /// Exponent a with Theta(N) = N^a.
    pub time_scale_exponent: f64,
}

/// Classify every (gamma, theta) pair on the grid. Goes through the same
/// classifier as the solvers, so the emitted map cannot drift from the code
/// that actually selects equations.
pub fn phase_sweep(
    gammas: &[f64],
    thetas: &[f64],
    variant: ReservoirVariant,
    kappa: f64,
) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() || thetas.is_empty() {
        return Err(Error::argument("sweep grids must be nonempty"));
    }
    let mut rows = Vec::with_capacity(gammas.len() * thetas.len());
    for &gamma in gammas {
        let kernel = JumpKernel::new(gamma)?;
        for &theta in thetas {
            if !theta.is_finite() {
                return Err(Error::argument(format!("theta {theta} is not finite")));
            }
            let regime = classify_regime_for(variant, gamma, theta, &kernel, kappa);
            rows.push(SweepRow {
                gamma,
                theta,
                regime: regime.kind,
                sigma_hat: regime.sigma_hat,
                kappa_hat: regime.kappa_hat,
                m_hat: regime.m_hat,
                time_scale_exponent: time_scale_exponent_for(variant, gamma, theta),
            });
        }
    }
    Ok(rows)
}
