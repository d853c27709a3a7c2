//! Acceptance suite: one test per release criterion, a01 through a10, plus
//! the central-limit invariant of the harness. Each test prints the
//! measured quantities it judges, so a failure log carries the evidence.

mod common;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use common::{oracle_kernel_constants, power_tail_sum, rkf45};
use exclusion_core::harness::{
    execute, run_ensemble, validate, ExperimentConfig, InitialProfile, Mode, PdeSettings,
    SeedSpec, Tolerances,
};
use exclusion_core::pde::{
    classify_regime_for, discrete_generator_check, solve, solve_at, solve_dense,
    solve_pure_reaction, weak_residual_rd, weak_residual_robin, Regime, RegimeKind,
    SpatialTestFunction, TestFunction,
};
use exclusion_core::sim::{dynkin_residual, Simulator};
use exclusion_core::stationary::{shape_check, stationary_profile, SolutionForm};
use exclusion_core::{JumpKernel, ModelParams, Profile, ReservoirVariant};

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

fn extended(n: usize, theta: f64) -> ModelParams {
    ModelParams {
        n,
        gamma: 3.0,
        theta,
        kappa: 1.0,
        alpha: 0.2,
        beta: 0.8,
        variant: ReservoirVariant::Extended,
    }
}

fn regime(theta: f64, kernel: &JumpKernel, kappa: f64) -> Regime {
    classify_regime_for(ReservoirVariant::Extended, kernel.gamma(), theta, kernel, kappa)
}

#[test]
fn a01_kernel_constants_match_independent_series_oracles() {
    const TOL: f64 = 1e-8;
    for gamma in [2.5, 3.0, 4.0] {
        let k = JumpKernel::new(gamma).unwrap();
        let (c, sigma_sq, m) = oracle_kernel_constants(gamma);
        eprintln!(
            "gamma={gamma}: c rel {:.2e}, sigma^2 rel {:.2e}, m rel {:.2e}",
            rel_err(k.normalization(), c),
            rel_err(k.variance(), sigma_sq),
            rel_err(k.mean_m(), m),
        );
        assert!(rel_err(k.normalization(), c) < TOL, "normalization at gamma={gamma}");
        assert!(rel_err(k.variance(), sigma_sq) < TOL, "variance at gamma={gamma}");
        assert!(rel_err(k.mean_m(), m) < TOL, "first tail moment at gamma={gamma}");
    }

    // Second witnesses at gamma = 3: zeta(4) = pi^4 / 90 and zeta(2) =
    // pi^2 / 6 give c = 45/pi^4 and sigma^2 = 2 c zeta(2) = 15/pi^2, and
    // m = c zeta(3).
    const ZETA_3: f64 = 1.202_056_903_159_594_3;
    let k3 = JumpKernel::new(3.0).unwrap();
    let c3 = 45.0 / PI.powi(4);
    assert!(rel_err(k3.normalization(), c3) < TOL);
    assert!(rel_err(k3.variance(), 15.0 / (PI * PI)) < TOL);
    assert!(rel_err(k3.mean_m(), c3 * ZETA_3) < TOL);
}

/// Rate matrix of the 8-state chain at N = 4, read off the simulator's
/// public rate accessors (flips) and jump law (exchanges). State s encodes
/// site x as bit x - 1; equal-occupancy exchanges are no-ops, not
/// transitions.
fn simulator_generator(sim: &Simulator) -> Vec<Vec<f64>> {
    let sites = sim.params().bulk_sites();
    let states = 1usize << sites;
    let mut l = vec![vec![0.0; states]; states];
    for (s, row) in l.iter_mut().enumerate() {
        let occ: Vec<bool> = (0..sites).map(|i| s >> i & 1 == 1).collect();
        let cfg = sim.configuration_from(&occ).unwrap();
        for x in 1..=sites {
            let live = sim.flip_rate(&cfg, x);
            let indexed = cfg.flip_rate(x);
            assert!(
                (live - indexed).abs() <= 1e-13 * live.max(1.0),
                "rate index disagrees with the recomputed rate at state {s}, site {x}"
            );
            row[s ^ (1 << (x - 1))] += live;
        }
        for x in 1..=sites {
            for y in (x + 1)..=sites {
                if (s >> (x - 1) ^ s >> (y - 1)) & 1 == 1 {
                    row[s ^ (1 << (x - 1)) ^ (1 << (y - 1))] += sim.kernel().prob((y - x) as i64);
                }
            }
        }
        row[s] = -row.iter().sum::<f64>();
    }
    l
}

/// The same matrix built longhand from the model definition, with the jump
/// law and reservoir weights recomputed by brute-force series: site x flips
/// at rate (kappa / N^theta) [w_l(x) c_x(eta; alpha) + w_r(x) c_x(eta; beta)]
/// with c_x(eta; d) = eta_x (1 - d) + (1 - eta_x) d, and an unequal pair
/// {x, y} swaps at rate p(|x - y|).
fn longhand_generator(p: &ModelParams) -> Vec<Vec<f64>> {
    let gamma = p.gamma;
    let c = 0.5 / power_tail_sum(gamma + 1.0, 1);
    let prob = |z: usize| c * (z as f64).powf(-gamma - 1.0);
    let mass_ge = |x: usize| c * power_tail_sum(gamma + 1.0, x as u64);
    let weights = |x: usize| match p.variant {
        ReservoirVariant::Extended => (mass_ge(x), mass_ge(p.n - x)),
        ReservoirVariant::SiteCoupled => (prob(x), prob(p.n - x)),
        ReservoirVariant::BoundaryOnly => (
            if x == 1 { 1.0 } else { 0.0 },
            if x == p.n - 1 { 1.0 } else { 0.0 },
        ),
    };
    let scale = p.kappa / (p.n as f64).powf(p.theta);
    let sites = p.n - 1;
    let states = 1usize << sites;
    let mut l = vec![vec![0.0; states]; states];
    for (s, row) in l.iter_mut().enumerate() {
        for x in 1..=sites {
            let occupied = s >> (x - 1) & 1 == 1;
            let against = |d: f64| if occupied { 1.0 - d } else { d };
            let (wl, wr) = weights(x);
            row[s ^ (1 << (x - 1))] +=
                scale * (wl * against(p.alpha) + wr * against(p.beta));
        }
        for x in 1..=sites {
            for y in (x + 1)..=sites {
                if (s >> (x - 1) ^ s >> (y - 1)) & 1 == 1 {
                    row[s ^ (1 << (x - 1)) ^ (1 << (y - 1))] += prob(y - x);
                }
            }
        }
        row[s] = -row.iter().sum::<f64>();
    }
    l
}

#[test]
fn a02_four_site_generator_matches_longhand_rates() {
    for variant in [
        ReservoirVariant::Extended,
        ReservoirVariant::SiteCoupled,
        ReservoirVariant::BoundaryOnly,
    ] {
        let params = ModelParams {
            n: 4,
            gamma: 3.0,
            theta: 0.5,
            kappa: 0.7,
            alpha: 0.2,
            beta: 0.8,
            variant,
        };
        let sim = Simulator::new(params).unwrap();
        let got = simulator_generator(&sim);
        let want = longhand_generator(&params);
        let mut worst = 0.0f64;
        for s in 0..8 {
            for t in 0..8 {
                worst = worst.max(rel_err(got[s][t], want[s][t]).min(
                    // Exact zeros on both sides compare absolutely.
                    (got[s][t] - want[s][t]).abs(),
                ));
            }
        }
        eprintln!("{}: worst generator entry deviation {worst:.2e}", variant.label());
        assert!(worst < 1e-8, "generator mismatch for {}", variant.label());

        // With equal reservoir densities the Bernoulli product measure is
        // stationary: pi L = 0 columnwise.
        let flat = ModelParams { alpha: 0.4, beta: 0.4, ..params };
        let sim = Simulator::new(flat).unwrap();
        let l = simulator_generator(&sim);
        let pi: Vec<f64> = (0..8)
            .map(|s: usize| {
                (0..3)
                    .map(|i| if s >> i & 1 == 1 { 0.4 } else { 0.6 })
                    .product()
            })
            .collect();
        let residual = (0..8)
            .map(|t| (0..8).map(|s| pi[s] * l[s][t]).sum::<f64>().abs())
            .fold(0.0f64, f64::max);
        eprintln!("{}: product-measure residual {residual:.2e}", variant.label());
        assert!(residual < 1e-12, "pi L != 0 for {}", variant.label());
    }
}

#[test]
fn a03_rescaled_generator_approaches_half_laplacian() {
    let k = JumpKernel::new(3.0).unwrap();
    let g = SpatialTestFunction::mollifier(0.5, 0.35);
    let coarse = discrete_generator_check(&k, 500, &g).unwrap();
    let fine = discrete_generator_check(&k, 2000, &g).unwrap();
    eprintln!("max deviation: N=500 gives {coarse:.4}, N=2000 gives {fine:.4}");
    assert!(fine > 0.0 && coarse > 0.0);
    assert!(fine < coarse, "deviation did not shrink: {fine} vs {coarse}");
}

#[test]
fn a04_solver_property_suite() {
    let k = JumpKernel::new(3.0).unwrap();
    let sigma_sq = k.variance();
    let m = 200;
    let dt = exclusion_core::pde::default_dt(m);

    // Maximum principle: solutions stay inside the hull of the data.
    let g = Profile::from_fn(m, |q| 0.5 + 0.3 * (2.0 * PI * q).sin());
    let (lo, hi) = (g.min().min(0.15), g.max().max(0.85));
    for theta in [0.0, 1.0, -1.0] {
        let sol = solve_at(&regime(theta, &k, 1.0), &g, 0.15, 0.85, &[0.02, 0.1, 0.5], dt, m)
            .unwrap();
        for p in sol.profiles() {
            assert!(p.min() >= lo - 1e-8 && p.max() <= hi + 1e-8, "range escape at theta={theta}");
        }
    }
    eprintln!("max principle: held within 1e-8 for theta in {{0, 1, -1}}");

    // Neumann runs conserve mass.
    let g_lin = Profile::from_fn(m, |q| 0.2 + 0.6 * q);
    let mass0 = g_lin.mean();
    let sol = solve_at(&regime(3.0, &k, 1.0), &g_lin, 0.2, 0.8, &[0.5, 2.0, 5.0], 2e-3, m).unwrap();
    let drift = sol
        .profiles()
        .iter()
        .map(|p| (p.mean() - mass0).abs())
        .fold(0.0f64, f64::max);
    eprintln!("mass conservation: worst drift {drift:.2e}");
    assert!(drift < 1e-8);

    // Comparison principle: ordered data stay ordered. The step is kept in
    // the monotone range of the scheme.
    let mc = 100;
    let dtc = exclusion_core::pde::default_dt(mc);
    let g1 = Profile::from_fn(mc, |q| 0.3 + 0.15 * (PI * q).sin());
    let g2 = Profile::from_fn(mc, |q| 0.33 + 0.15 * (PI * q).sin() + 0.2 * q * (1.0 - q));
    for theta in [0.0, -1.0] {
        let r = regime(theta, &k, 1.0);
        let s1 = solve_at(&r, &g1, 0.25, 0.6, &[0.05, 0.2], dtc, mc).unwrap();
        let s2 = solve_at(&r, &g2, 0.25, 0.6, &[0.05, 0.2], dtc, mc).unwrap();
        for (p1, p2) in s1.profiles().iter().zip(s2.profiles()) {
            for (a, b) in p1.values().iter().zip(p2.values()) {
                assert!(a <= &(b + 1e-10), "comparison broken at theta={theta}");
            }
        }
    }
    eprintln!("comparison: ordered initial data stayed ordered");

    // Fundamental Dirichlet mode decays at rate sigma^2 pi^2 / 2.
    let g_mode = Profile::from_fn(m, |q| 0.5 + 0.3 * (PI * q).sin());
    let t = 0.2;
    let sol = solve(&regime(0.0, &k, 1.0), &g_mode, 0.5, 0.5, t, 2e-4, m).unwrap();
    let decay = (-0.5 * sigma_sq * PI * PI * t).exp();
    let err = (0..m)
        .map(|i| {
            let q = sol.final_profile().cell_center(i);
            (sol.final_profile().get(i) - (0.5 + 0.3 * (PI * q).sin() * decay)).abs()
        })
        .fold(0.0f64, f64::max);
    eprintln!("eigenmode decay: L-inf error {err:.2e} against exp({:.4})", -0.5 * sigma_sq * PI * PI * t);
    assert!(err < 1e-3);

    // The closed-form relaxation solution agrees with an adaptive ODE
    // integration of d rho / dt = kappa_hat (V0 - V1 rho) cell by cell.
    let ro = regime(-2.0, &k, 1.0);
    assert_eq!(ro.kind, RegimeKind::ReactionOnly);
    let (alpha, beta, t) = (0.2, 0.8, 0.02);
    let g20 = Profile::from_fn(20, |q| 0.3 + 0.4 * q);
    let exact = solve_pure_reaction(&g20, alpha, beta, ro.kappa_hat, ro.v_exponent, t).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let q = g20.cell_center(i);
        let v1 = q.powf(-ro.v_exponent) + (1.0 - q).powf(-ro.v_exponent);
        let v0 = alpha * q.powf(-ro.v_exponent) + beta * (1.0 - q).powf(-ro.v_exponent);
        let ode = rkf45(
            |_, y| ro.kappa_hat * (v0 - v1 * y),
            0.0,
            g20.get(i),
            t,
            1e-12,
        );
        worst = worst.max((exact.get(i) - ode).abs());
    }
    eprintln!("pure reaction vs adaptive ODE: worst cell error {worst:.2e}");
    assert!(worst < 1e-8);
}

#[test]
fn a05_long_time_solutions_reach_stationary_profiles() {
    let k = JumpKernel::new(3.0).unwrap();
    let m = 200;
    let (alpha, beta, t_end) = (0.2, 0.8, 20.0);
    let flat = Profile::constant(m, 0.5);
    let ramp = Profile::from_fn(m, |q| 0.2 + 0.6 * q);

    // Flat initial data clash with the Dirichlet boundary values, so the
    // step is chosen to keep the scheme monotone through that first
    // transient: nu = sigma^2 dt / (4 dq^2) <= 1/2.
    let dt_mono = 2.0 * flat.cell_width() * flat.cell_width() / k.variance();
    for (theta, dt, g) in [
        (0.0, dt_mono, &flat),
        (1.0, dt_mono, &flat),
        (3.0, dt_mono, &ramp),
        (-1.0, dt_mono, &flat),
        (-2.0, 1.0, &flat),
    ] {
        let r = regime(theta, &k, 1.0);
        let st = stationary_profile(&r, alpha, beta, Some(g), m).unwrap();
        let sol = solve(&r, g, alpha, beta, t_end, dt, m).unwrap();
        let gap = sol.final_profile().linf_distance(&st.profile).unwrap();
        eprintln!("{}: L-inf gap to stationary {gap:.2e}", r.kind.label());
        assert!(gap <= 1e-4, "{} missed its stationary profile", r.kind.label());
    }

    // Robin boundary values match the linear form and close in on
    // (alpha + beta) / 2 monotonically as kappa shrinks.
    let mut devs = Vec::new();
    for kappa in [1.0, 0.1, 0.01] {
        let r = regime(1.0, &k, kappa);
        let st = stationary_profile(&r, alpha, beta, None, m).unwrap();
        let sol = solve(&r, &flat, alpha, beta, t_end, dt_mono, m).unwrap();
        let (bl, br) = (
            sol.final_profile().boundary_left(),
            sol.final_profile().boundary_right(),
        );
        assert!((bl - st.profile.boundary_left()).abs() <= 1e-4);
        assert!((br - st.profile.boundary_right()).abs() <= 1e-4);
        eprintln!("kappa={kappa}: boundary values ({bl:.6}, {br:.6})");
        devs.push((bl - 0.5f64 * (alpha + beta)).abs());
    }
    assert!(devs[1] < devs[0] && devs[2] < devs[1], "no monotone approach: {devs:?}");
}

#[test]
fn a06_stationary_shape_claims() {
    let k = JumpKernel::new(3.0).unwrap();
    let (alpha, beta, m) = (0.2, 0.8, 400);

    let ro = stationary_profile(&regime(-2.0, &k, 1.0), alpha, beta, None, m).unwrap();
    assert_eq!(ro.closed_form, SolutionForm::WeightRatio);
    let report = shape_check(&ro, alpha, beta);
    eprintln!("weight-ratio profile: {:?}", report.violations);
    assert!(report.passed(), "{:?}", report.violations);

    let rdd = stationary_profile(&regime(-1.0, &k, 1.0), alpha, beta, None, m).unwrap();
    assert_eq!(rdd.closed_form, SolutionForm::NumericBvp);
    let report = shape_check(&rdd, alpha, beta);
    eprintln!("boundary-value profile: {:?}", report.violations);
    assert!(report.passed(), "{:?}", report.violations);
}

fn convergence_config(n: usize, theta: f64) -> ExperimentConfig {
    ExperimentConfig {
        mode: Mode::Validate,
        params: extended(n, theta),
        initial: InitialProfile::Constant { value: 0.5 },
        observe_times: vec![0.1],
        seeds: SeedSpec::Count(200),
        bins: 16,
        pde: PdeSettings::default(),
        output_dir: std::env::temp_dir(),
        master_seed: 2026,
        tolerances: Tolerances::default(),
    }
}

#[test]
fn a07_ensemble_profiles_converge_to_the_limit_equations() {
    for (theta, expect) in [
        (0.0, RegimeKind::HeatDirichlet),
        (1.0, RegimeKind::HeatRobin),
        (3.0, RegimeKind::HeatNeumann),
        (-1.0, RegimeKind::ReactionDiffusionDirichlet),
        (-2.0, RegimeKind::ReactionOnly),
    ] {
        let mut dist = Vec::new();
        for n in [64, 128, 256] {
            let (report, _, _) = validate(&convergence_config(n, theta)).unwrap();
            assert_eq!(report.regime, expect);
            dist.push(report.times[0].l1);
        }
        eprintln!(
            "{}: L1 = {:.4} (N=64), {:.4} (N=128), {:.4} (N=256)",
            expect.label(),
            dist[0],
            dist[1],
            dist[2]
        );
        assert!(dist[1] < 0.05, "{}: L1 at N=128 is {}", expect.label(), dist[1]);
        assert!(
            dist[2] < dist[0],
            "{}: no decay from N=64 ({}) to N=256 ({})",
            expect.label(),
            dist[0],
            dist[2]
        );
    }
}

#[test]
fn a08_dynkin_martingales_are_centered_with_matched_variance() {
    let sim = Simulator::new(extended(64, 0.0)).unwrap();
    let init = Profile::constant(8, 0.5);
    let seeds: Vec<u64> = (0..200).collect();
    let tests: [(&str, fn(f64) -> f64); 2] = [
        ("sine", |q| (PI * q).sin()),
        ("cubic", |q| q * (1.0 - q) * (1.0 - q)),
    ];
    for (name, g) in tests {
        let stats = dynkin_residual(&sim, &init, g, 0.05, &seeds, 7).unwrap();
        let ratio = stats.variance / stats.mean_quadratic_variation;
        eprintln!(
            "{name}: mean {:.3e} (stderr {:.3e}), variance/QV {ratio:.3}",
            stats.mean, stats.stderr
        );
        assert!(stats.mean.abs() < 3.0 * stats.stderr, "{name} martingale is biased");
        assert!((0.5..=2.0).contains(&ratio), "{name} variance/QV ratio {ratio}");
    }
}

#[test]
fn a09_weak_residuals_decay_at_second_order() {
    let k = JumpKernel::new(3.0).unwrap();
    let g = |m: usize| Profile::from_fn(m, |q| 0.5 + 0.25 * (PI * q).sin());
    let t = 0.05;

    // The smooth bump has superalgebraic quadrature error, so the plain
    // second-order scheme error only dominates once the bump is well
    // resolved; the base grid is chosen past that point.
    let rdd = regime(-1.0, &k, 1.0);
    let tf = TestFunction::modulated_mollifier(0.5, 0.3, 2.0);
    let mut res = Vec::new();
    for (m, dt) in [(400, 1.25e-5), (800, 6.25e-6)] {
        let sol = solve_dense(&rdd, &g(m), 0.2, 0.8, t, dt, m).unwrap();
        res.push(weak_residual_rd(&sol, &tf, t).unwrap().residual.abs());
    }
    let ratio = res[0] / res[1];
    eprintln!("interior weak form: residuals {:.3e} -> {:.3e}, ratio {ratio:.2}", res[0], res[1]);
    assert!((3.0..=5.0).contains(&ratio), "interior-form ratio {ratio}");

    let rob = regime(1.0, &k, 1.0);
    let tf = TestFunction::modulated_boundary_quadratic(1.5);
    let mut res = Vec::new();
    for (m, dt) in [(200, 2.5e-5), (400, 1.25e-5)] {
        let sol = solve_dense(&rob, &g(m), 0.2, 0.8, t, dt, m).unwrap();
        res.push(weak_residual_robin(&sol, &tf, t).unwrap().residual.abs());
    }
    let ratio = res[0] / res[1];
    eprintln!("boundary weak form: residuals {:.3e} -> {:.3e}, ratio {ratio:.2}", res[0], res[1]);
    assert!((3.0..=5.0).contains(&ratio), "boundary-form ratio {ratio}");
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn a10_validation_outputs_are_worker_count_invariant() {
    let make = |dir: PathBuf| ExperimentConfig {
        mode: Mode::Validate,
        params: extended(32, 0.0),
        initial: InitialProfile::Linear { left: 0.3, right: 0.7 },
        observe_times: vec![0.02, 0.05],
        seeds: SeedSpec::List(vec![11, 3, 7, 42, 5, 28, 9, 1]),
        bins: 8,
        pde: PdeSettings { m: 64, dt: None },
        output_dir: dir,
        master_seed: 99,
        tolerances: Tolerances { l1: 0.5, linf: None, boxcar: None },
    };
    let dirs: Vec<tempfile::TempDir> =
        (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (workers, dir) in [1usize, 4, 4].iter().zip(&dirs) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(*workers)
            .build()
            .unwrap();
        let outcome = pool.install(|| execute(&make(dir.path().to_path_buf()))).unwrap();
        assert!(outcome.passed);
    }
    for name in ["ensemble.csv", "pde.csv", "validation.json"] {
        let reference = read(dirs[0].path(), name);
        assert!(!reference.is_empty());
        for other in &dirs[1..] {
            assert_eq!(
                reference,
                read(other.path(), name),
                "{name} differs across worker counts"
            );
        }
        eprintln!("{name}: byte-identical across 1, 4, 4 workers");
    }
}

#[test]
fn harness_stderr_follows_the_central_limit_scaling() {
    let mean_stderr = |count: usize| {
        let cfg = ExperimentConfig {
            seeds: SeedSpec::Count(count),
            ..convergence_config(64, 0.0)
        };
        let stats = run_ensemble(&cfg).unwrap();
        let last = stats.stderr.last().unwrap();
        last.iter().sum::<f64>() / last.len() as f64
    };
    let s: Vec<f64> = [50, 200, 800].iter().map(|&c| mean_stderr(c)).collect();
    let (r1, r2) = (s[0] / s[1], s[1] / s[2]);
    eprintln!("stderr at 50/200/800 seeds: {:.5} / {:.5} / {:.5} (ratios {r1:.3}, {r2:.3})", s[0], s[1], s[2]);
    assert!((1.6..=2.4).contains(&r1), "ratio 50/200 is {r1}");
    assert!((1.6..=2.4).contains(&r2), "ratio 200/800 is {r2}");
}
