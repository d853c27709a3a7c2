//! Time integration of the limiting equations on a cell-centred grid.
//!
//! Diffusion is discretised by Crank-Nicolson with second-order ghost-cell
//! closures (Dirichlet, or Robin with Neumann as the zero-coefficient
//! special case). The reaction term is affine in the density with singular
//! but finite cell coefficients; each step integrates it exactly over half a
//! step on either side of the diffusion solve, which is second order in
//! time, unconditionally stable, and preserves the maximum principle no
//! matter how large the near-boundary weights get.

use super::{reaction_fixed_point, reaction_v1, Regime, RegimeKind};
use crate::error::{Error, Result};
use crate::profile::Profile;

/// Slack allowed on the maximum principle bound, per the solver contract.
const MAX_PRINCIPLE_SLACK: f64 = 1e-8;

/// Cap on `steps * cells` for densely recorded solves, to bound memory.
const DENSE_RECORD_CAP: usize = 20_000_000;

/// Default macroscopic time step for an `m`-cell grid; keeps the temporal
/// error commensurate with the spatial error and the scheme monotone.
pub fn default_dt(m: usize) -> f64 {
    0.25 / (m as f64 * m as f64)
}

/// Time-indexed numerical solution of one limiting equation.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    regime: Regime,
    m: usize,
    dt: f64,
    alpha: f64,
    beta: f64,
    times: Vec<f64>,
    profiles: Vec<Profile>,
}

impl PdeSolution {
    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// Number of grid cells.
    pub fn cells(&self) -> usize {
        self.m
    }

    /// Requested step size (segments between record times may use a smaller
    /// uniform step so that record times are hit exactly).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Left reservoir density the solve was run with.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Right reservoir density the solve was run with.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("solution has at least one record")
    }

    pub fn final_profile(&self) -> &Profile {
        self.profiles.last().expect("solution has at least one record")
    }

    /// Index of the record whose time matches `t` to within `1e-9` of scale.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// Step size if the records are uniformly spaced, as produced by
    /// [`solve_dense`].
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = self.times[1] - self.times[0];
        if h <= 0.0 {
            return None;
        }
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-300) {
                return None;
            }
        }
        Some(h)
    }
}

/// Ghost-cell closure `rho_ghost = coeff * rho_edge + constant`.
pub(crate) struct GhostClosure {
    pub coeff: f64,
    pub constant: f64,
}

/// Closures at the left and right boundary for the given regime.
///
/// Dirichlet places the ghost value so the linear interpolant hits the
/// boundary density at the endpoint; Robin discretises the flux condition
/// with a centred difference across the boundary face. Both are second
/// order; Neumann is Robin with coefficient zero, through the same code.
pub(crate) fn ghost_closures(
    regime: &Regime,
    alpha: f64,
    beta: f64,
    dq: f64,
) -> (GhostClosure, GhostClosure) {
    match regime.kind {
        RegimeKind::ReactionDiffusionDirichlet | RegimeKind::HeatDirichlet => (
            GhostClosure {
                coeff: -1.0,
                constant: 2.0 * alpha,
            },
            GhostClosure {
                coeff: -1.0,
                constant: 2.0 * beta,
            },
        ),
        RegimeKind::HeatRobin | RegimeKind::HeatNeumann => {
            let kp = regime.robin_coefficient();
            let den = 1.0 + 0.5 * kp * dq;
            let coeff = (1.0 - 0.5 * kp * dq) / den;
            (
                GhostClosure {
                    coeff,
                    constant: kp * dq * alpha / den,
                },
                GhostClosure {
                    coeff,
                    constant: kp * dq * beta / den,
                },
            )
        }
        RegimeKind::ReactionOnly => unreachable!("no diffusion operator in the reaction regime"),
    }
}

/// Solve a tridiagonal system with constant off-diagonal `off` in place.
pub(crate) fn solve_constant_off_tridiagonal(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    assert_eq!(m, rhs.len());
    let mut inv_den = vec![0.0; m];
    let mut x = vec![0.0; m];
    inv_den[0] = 1.0 / diag[0];
    x[0] = rhs[0] * inv_den[0];
    for i in 1..m {
        inv_den[i] = 1.0 / (diag[i] - off * off * inv_den[i - 1]);
        x[i] = (rhs[i] - off * x[i - 1]) * inv_den[i];
    }
    for i in (0..m - 1).rev() {
        x[i] -= off * inv_den[i] * x[i + 1];
    }
    x
}

/// Prefactored Crank-Nicolson step for the diffusion part.
struct CrankNicolson {
    nu: f64,
    a_diag: Vec<f64>,
    h_left: f64,
    h_right: f64,
    inv_den: Vec<f64>,
    work: Vec<f64>,
}

impl CrankNicolson {
    fn new(regime: &Regime, alpha: f64, beta: f64, m: usize, dt: f64) -> Self {
        let dq = 1.0 / m as f64;
        let nu = regime.sigma_hat * regime.sigma_hat * dt / (4.0 * dq * dq);
        let (left, right) = ghost_closures(regime, alpha, beta, dq);
        let mut a_diag = vec![-2.0; m];
        a_diag[0] += left.coeff;
        a_diag[m - 1] += right.coeff;
        let mut inv_den = vec![0.0; m];
        inv_den[0] = 1.0 / (1.0 - nu * a_diag[0]);
        for i in 1..m {
            inv_den[i] = 1.0 / (1.0 - nu * a_diag[i] - nu * nu * inv_den[i - 1]);
        }
        CrankNicolson {
            nu,
            a_diag,
            h_left: left.constant,
            h_right: right.constant,
            inv_den,
            work: vec![0.0; m],
        }
    }

    fn step(&mut self, rho: &mut [f64]) {
        let m = rho.len();
        let nu = self.nu;
        for i in 0..m {
            let left = if i > 0 { rho[i - 1] } else { 0.0 };
            let right = if i + 1 < m { rho[i + 1] } else { 0.0 };
            self.work[i] = rho[i] + nu * (left + self.a_diag[i] * rho[i] + right);
        }
        self.work[0] += 2.0 * nu * self.h_left;
        self.work[m - 1] += 2.0 * nu * self.h_right;
        let mut prev = self.work[0] * self.inv_den[0];
        self.work[0] = prev;
        for i in 1..m {
            prev = (self.work[i] + nu * prev) * self.inv_den[i];
            self.work[i] = prev;
        }
        rho[m - 1] = self.work[m - 1];
        for i in (0..m - 1).rev() {
            rho[i] = self.work[i] + nu * self.inv_den[i] * rho[i + 1];
        }
    }
}

/// Exact integrator of the affine reaction flow over half a step.
struct HalfReaction {
    decay: Vec<f64>,
    fixed: Vec<f64>,
}

impl HalfReaction {
    fn new(regime: &Regime, alpha: f64, beta: f64, m: usize, dt: f64) -> Self {
        let e = regime.v_exponent;
        let mut decay = Vec::with_capacity(m);
        let mut fixed = Vec::with_capacity(m);
        for i in 0..m {
            let q = (i as f64 + 0.5) / m as f64;
            decay.push((-0.5 * regime.kappa_hat * reaction_v1(q, e) * dt).exp());
            fixed.push(reaction_fixed_point(q, alpha, beta, e));
        }
        HalfReaction { decay, fixed }
    }

    fn apply(&self, rho: &mut [f64]) {
        for (i, r) in rho.iter_mut().enumerate() {
            *r = self.fixed[i] + (*r - self.fixed[i]) * self.decay[i];
        }
    }
}

struct Stepper {
    reaction: Option<HalfReaction>,
    diffusion: CrankNicolson,
    lo: f64,
    hi: f64,
    steps_done: u64,
}

impl Stepper {
    fn new(regime: &Regime, alpha: f64, beta: f64, m: usize, dt: f64, lo: f64, hi: f64) -> Self {
        let reaction = if regime.has_reaction() {
            Some(HalfReaction::new(regime, alpha, beta, m, dt))
        } else {
            None
        };
        Stepper {
            reaction,
            diffusion: CrankNicolson::new(regime, alpha, beta, m, dt),
            lo,
            hi,
            steps_done: 0,
        }
    }

    fn step(&mut self, rho: &mut [f64], t_after: f64) -> Result<()> {
        if let Some(r) = &self.reaction {
            r.apply(rho);
        }
        self.diffusion.step(rho);
        if let Some(r) = &self.reaction {
            r.apply(rho);
        }
        self.steps_done += 1;
        for (i, &v) in rho.iter().enumerate() {
            if !v.is_finite() || v < self.lo - MAX_PRINCIPLE_SLACK || v > self.hi + MAX_PRINCIPLE_SLACK
            {
                return Err(Error::numeric(format!(
                    "maximum principle violated at step {} (t = {:.6e}): cell {} holds {:e}, \
                     admissible range [{:.6}, {:.6}]",
                    self.steps_done, t_after, i, v, self.lo, self.hi
                )));
            }
        }
        Ok(())
    }
}

fn validate_boundary_density(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::argument(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

fn validate_initial(g: &Profile) -> Result<()> {
    if g.is_empty() {
        return Err(Error::argument("initial profile is empty"));
    }
    for (i, &v) in g.values().iter().enumerate() {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::argument(format!(
                "initial profile value at cell {i} must lie in [0, 1], got {v}"
            )));
        }
    }
    Ok(())
}

fn resample(g: &Profile, m: usize) -> Profile {
    if g.len() == m {
        g.clone()
    } else {
        Profile::from_fn(m, |q| g.interp(q).clamp(0.0, 1.0))
    }
}

/// Solve up to `t_end`, recording the initial and final profiles.
pub fn solve(
    regime: &Regime,
    g: &Profile,
    alpha: f64,
    beta: f64,
    t_end: f64,
    dt: f64,
    m: usize,
) -> Result<PdeSolution> {
    solve_at(regime, g, alpha, beta, &[t_end], dt, m)
}

/// Solve through a nondecreasing list of record times.
///
/// Each segment between consecutive record times is integrated with a
/// uniform step no larger than `dt`, chosen so the record time is hit
/// exactly. Duplicate record times collapse to a single record.
pub fn solve_at(
    regime: &Regime,
    g: &Profile,
    alpha: f64,
    beta: f64,
    times: &[f64],
    dt: f64,
    m: usize,
) -> Result<PdeSolution> {
    run_solver(regime, g, alpha, beta, times, dt, m, false)
}

/// Solve up to `t_end` with a globally uniform step, recording every step.
///
/// The weak-formulation residuals require this record layout.
pub fn solve_dense(
    regime: &Regime,
    g: &Profile,
    alpha: f64,
    beta: f64,
    t_end: f64,
    dt: f64,
    m: usize,
) -> Result<PdeSolution> {
    run_solver(regime, g, alpha, beta, &[t_end], dt, m, true)
}

#[allow(clippy::too_many_arguments)]
fn run_solver(
    regime: &Regime,
    g: &Profile,
    alpha: f64,
    beta: f64,
    times: &[f64],
    dt: f64,
    m: usize,
    dense: bool,
) -> Result<PdeSolution> {
    if m < 2 {
        return Err(Error::argument("grid needs at least two cells"));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::argument(format!("dt must be positive, got {dt}")));
    }
    validate_boundary_density("alpha", alpha)?;
    validate_boundary_density("beta", beta)?;
    validate_initial(g)?;
    if times.is_empty() {
        return Err(Error::argument("no record times given"));
    }
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::argument(format!(
                "record times must be finite and nonnegative, got {t}"
            )));
        }
        if t < prev {
            return Err(Error::argument("record times must be nondecreasing"));
        }
        prev = t;
    }

    let g_m = resample(g, m);

    if regime.kind == RegimeKind::ReactionOnly {
        return solve_reaction_only(regime, &g_m, alpha, beta, times, dt, m, dense);
    }

    let lo = g_m.min().min(alpha).min(beta);
    let hi = g_m.max().max(alpha).max(beta);

    let mut recorded_times = vec![0.0];
    let mut profiles = vec![g_m.clone()];
    let mut rho: Vec<f64> = g_m.values().to_vec();
    let mut cur_t = 0.0;
    let mut stepper: Option<(f64, Stepper)> = None;

    for &target in times {
        if target <= cur_t {
            if recorded_times.last() != Some(&target) {
                recorded_times.push(target);
                profiles.push(Profile::new(rho.clone()));
            }
            continue;
        }
        let span = target - cur_t;
        let n_steps = ((span / dt - 1e-9).ceil() as usize).max(1);
        if dense && n_steps.saturating_mul(m) > DENSE_RECORD_CAP {
            return Err(Error::argument(format!(
                "dense recording of {n_steps} steps on {m} cells exceeds the record cap"
            )));
        }
        let dt_seg = span / n_steps as f64;
        let rebuild = match &stepper {
            Some((built_dt, _)) => (*built_dt - dt_seg).abs() > 1e-15 * dt_seg.max(1e-300),
            None => true,
        };
        if rebuild {
            stepper = Some((dt_seg, Stepper::new(regime, alpha, beta, m, dt_seg, lo, hi)));
        }
        let (_, active) = stepper.as_mut().expect("stepper built above");
        for k in 1..=n_steps {
            let t_after = if k == n_steps {
                target
            } else {
                cur_t + k as f64 * dt_seg
            };
            active.step(&mut rho, t_after)?;
            if dense {
                recorded_times.push(t_after);
                profiles.push(Profile::new(rho.clone()));
            }
        }
        cur_t = target;
        if !dense {
            recorded_times.push(target);
            profiles.push(Profile::new(rho.clone()));
        }
    }

    Ok(PdeSolution {
        regime: *regime,
        m,
        dt,
        alpha,
        beta,
        times: recorded_times,
        profiles,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_reaction_only(
    regime: &Regime,
    g_m: &Profile,
    alpha: f64,
    beta: f64,
    times: &[f64],
    dt: f64,
    m: usize,
    dense: bool,
) -> Result<PdeSolution> {
    // The flow is exactly solvable pointwise, so no stepping happens; dense
    // mode still lays records out on a uniform step grid.
    let mut record_at = vec![0.0];
    if dense {
        let t_end = *times.last().expect("validated nonempty");
        if t_end > 0.0 {
            let n_steps = ((t_end / dt - 1e-9).ceil() as usize).max(1);
            if n_steps.saturating_mul(m) > DENSE_RECORD_CAP {
                return Err(Error::argument(format!(
                    "dense recording of {n_steps} steps on {m} cells exceeds the record cap"
                )));
            }
            let dt_seg = t_end / n_steps as f64;
            for k in 1..=n_steps {
                record_at.push(if k == n_steps {
                    t_end
                } else {
                    k as f64 * dt_seg
                });
            }
        }
    } else {
        for &t in times {
            if record_at.last() != Some(&t) {
                record_at.push(t);
            }
        }
    }
    let mut profiles = Vec::with_capacity(record_at.len());
    for &t in &record_at {
        profiles.push(solve_pure_reaction(
            g_m,
            alpha,
            beta,
            regime.kappa_hat,
            regime.v_exponent,
            t,
        )?);
    }
    Ok(PdeSolution {
        regime: *regime,
        m,
        dt,
        alpha,
        beta,
        times: record_at,
        profiles,
    })
}

/// Pointwise exact solution of the pure reaction equation at time `t`:
/// each cell relaxes toward `V0/V1` at rate `kappa_hat * V1`.
///
/// `exponent` is the exponent of the singular weights (`gamma` for the
/// extended reservoirs, `gamma + 1` for the site-coupled variant).
pub fn solve_pure_reaction(
    g: &Profile,
    alpha: f64,
    beta: f64,
    kappa_hat: f64,
    exponent: f64,
    t: f64,
) -> Result<Profile> {
    if !kappa_hat.is_finite() || kappa_hat < 0.0 {
        return Err(Error::argument(format!(
            "kappa_hat must be nonnegative, got {kappa_hat}"
        )));
    }
    if !exponent.is_finite() || exponent <= 0.0 {
        return Err(Error::argument(format!(
            "weight exponent must be positive, got {exponent}"
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::argument(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    validate_boundary_density("alpha", alpha)?;
    validate_boundary_density("beta", beta)?;
    validate_initial(g)?;
    if t == 0.0 {
        return Ok(g.clone());
    }
    let m = g.len();
    let mut values = Vec::with_capacity(m);
    for (i, &gv) in g.values().iter().enumerate() {
        let q = (i as f64 + 0.5) / m as f64;
        let factor = (-kappa_hat * reaction_v1(q, exponent) * t).exp();
        if factor == 1.0 {
            values.push(gv);
        } else {
            let fixed = reaction_fixed_point(q, alpha, beta, exponent);
            values.push(fixed + (gv - fixed) * factor);
        }
    }
    Ok(Profile::new(values))
}
