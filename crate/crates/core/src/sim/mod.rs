//! Exact continuous-time simulation of the exclusion process with long
//! jumps and reservoir flips, for all three reservoir couplings.
//!
//! Events are drawn by competing exponentials over a configuration-
//! independent total exchange rate plus the per-site flip rates. Exchange
//! proposals pick a pair distance from an alias table weighted by the
//! number of in-range pairs, then a uniform offset, so every proposal is a
//! valid pair and proposals that find equal occupancies are counted as
//! no-ops; the law of the effective jumps is exactly the generator's.

mod martingale;

pub use martingale::{dynkin_residual, martingale_sample, MartingaleSample, MartingaleStats};

use rand::Rng;
use serde::Serialize;

use crate::alias::AliasTable;
use crate::error::{Error, Result};
use crate::fenwick::RateIndex;
use crate::kernel::JumpKernel;
use crate::params::{ModelParams, ReservoirVariant};
use crate::pde::time_scale_for;
use crate::profile::Profile;

/// One transition of the chain. Sites are 1-based bulk labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Event {
    Flip { x: usize },
    Exchange { x: usize, y: usize },
    ExchangeNoOp { x: usize, y: usize },
}

/// Tally of applied events along a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub flips: u64,
    pub exchanges: u64,
    pub exchange_noops: u64,
}

impl EventCounts {
    pub fn total(&self) -> u64 {
        self.flips + self.exchanges + self.exchange_noops
    }

    fn record(&mut self, event: &Event) {
        match event {
            Event::Flip { .. } => self.flips += 1,
            Event::Exchange { .. } => self.exchanges += 1,
            Event::ExchangeNoOp { .. } => self.exchange_noops += 1,
        }
    }
}

/// Occupancies of the bulk together with the cached particle count and the
/// per-site flip rates under a prefix-sampling index.
#[derive(Debug, Clone)]
pub struct Configuration {
    occ: Vec<bool>,
    particles: usize,
    flip_rates: RateIndex,
}

impl Configuration {
    /// Occupancies indexed by site - 1.
    pub fn occupancy(&self) -> &[bool] {
        &self.occ
    }

    pub fn occupied(&self, x: usize) -> bool {
        self.occ[x - 1]
    }

    pub fn particle_count(&self) -> usize {
        self.particles
    }

    /// Number of bulk sites, N - 1.
    pub fn sites(&self) -> usize {
        self.occ.len()
    }

    pub fn flip_rate_total(&self) -> f64 {
        self.flip_rates.total()
    }

    /// Current flip rate of site x, as stored in the sampling index.
    pub fn flip_rate(&self, x: usize) -> f64 {
        self.flip_rates.get(x - 1)
    }
}

/// Snapshots of one realization at the requested macroscopic times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub seed: u64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<bool>>,
    pub events: EventCounts,
    pub final_config: Configuration,
}

/// Immutable rate tables for one parameter set; shared by any number of
/// concurrent trajectories.
pub struct Simulator {
    params: ModelParams,
    kernel: JumpKernel,
    /// Flip rate of site x when empty, indexed by x - 1.
    rate_empty: Vec<f64>,
    /// Flip rate of site x when occupied, indexed by x - 1.
    rate_occupied: Vec<f64>,
    /// Total exchange-proposal rate, sum over pairs of p(y - x).
    exchange_rate: f64,
    /// Alias table over pair distances z = 1..N-2 with weights
    /// (N-1-z) p(z); absent when there are no pairs.
    distance_alias: Option<AliasTable>,
}

impl Simulator {
    pub fn new(params: ModelParams) -> Result<Simulator> {
        params.validate()?;
        let kernel = JumpKernel::new(params.gamma)?;
        Simulator::with_kernel(params, kernel)
    }

    /// Build on an existing kernel (which is expensive to construct) for
    /// sweeps that vary theta or kappa at fixed gamma.
    pub fn with_kernel(params: ModelParams, kernel: JumpKernel) -> Result<Simulator> {
        params.validate()?;
        if kernel.gamma() != params.gamma {
            return Err(Error::argument(format!(
                "kernel gamma {} differs from params gamma {}",
                kernel.gamma(),
                params.gamma
            )));
        }
        let n = params.n;
        let sites = n - 1;
        let reservoir_factor = params.kappa * (n as f64).powf(-params.theta);
        let mut rate_empty = Vec::with_capacity(sites);
        let mut rate_occupied = Vec::with_capacity(sites);
        for x in 1..n {
            let (w_left, w_right) = match params.variant {
                ReservoirVariant::Extended => (kernel.mass_ge(x), kernel.mass_ge(n - x)),
                ReservoirVariant::SiteCoupled => {
                    (kernel.prob(x as i64), kernel.prob((n - x) as i64))
                }
                ReservoirVariant::BoundaryOnly => (
                    if x == 1 { 1.0 } else { 0.0 },
                    if x == n - 1 { 1.0 } else { 0.0 },
                ),
            };
            rate_empty
                .push(reservoir_factor * (w_left * params.alpha + w_right * params.beta));
            rate_occupied.push(
                reservoir_factor
                    * (w_left * (1.0 - params.alpha) + w_right * (1.0 - params.beta)),
            );
        }
        let mut exchange_rate = 0.0;
        let mut weights = Vec::new();
        if sites >= 2 {
            for z in 1..=sites - 1 {
                weights.push((sites - z) as f64 * kernel.prob(z as i64));
            }
            exchange_rate = weights.iter().rev().sum();
        }
        let distance_alias = if weights.is_empty() {
            None
        } else {
            Some(AliasTable::new(&weights))
        };
        Ok(Simulator {
            params,
            kernel,
            rate_empty,
            rate_occupied,
            exchange_rate,
            distance_alias,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    /// Macroscopic-to-microscopic time factor Theta(N) for these params.
    pub fn time_scale(&self) -> f64 {
        time_scale_for(
            self.params.variant,
            self.params.n,
            self.params.gamma,
            self.params.theta,
        )
    }

    /// Current reservoir flip rate of site x.
    pub fn flip_rate(&self, cfg: &Configuration, x: usize) -> f64 {
        if cfg.occupied(x) {
            self.rate_occupied[x - 1]
        } else {
            self.rate_empty[x - 1]
        }
    }

    pub(crate) fn flip_rate_for(&self, x: usize, occupied: bool) -> f64 {
        if occupied {
            self.rate_occupied[x - 1]
        } else {
            self.rate_empty[x - 1]
        }
    }

    /// Total rate of exchange proposals, sum over site pairs of p(y - x);
    /// configuration-independent because no-op proposals are kept.
    pub fn exchange_total_rate(&self) -> f64 {
        self.exchange_rate
    }

    /// Configuration with every site drawn Bernoulli(g(x/N)).
    pub fn init_from_fn<R: Rng + ?Sized>(
        &self,
        g: impl Fn(f64) -> f64,
        rng: &mut R,
    ) -> Result<Configuration> {
        let n = self.params.n;
        let mut occ = Vec::with_capacity(n - 1);
        for x in 1..n {
            let p = g(x as f64 / n as f64);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::argument(format!(
                    "initial profile value {p} at x = {x} is outside [0, 1]"
                )));
            }
            occ.push(rng.gen::<f64>() < p);
        }
        self.configuration_from_occupancy(occ)
    }

    /// Configuration drawn from a grid profile, interpolated to the sites.
    pub fn init_from_profile<R: Rng + ?Sized>(
        &self,
        g: &Profile,
        rng: &mut R,
    ) -> Result<Configuration> {
        for &v in g.values() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::argument(format!(
                    "initial profile value {v} is outside [0, 1]"
                )));
            }
        }
        self.init_from_fn(|u| g.interp(u).clamp(0.0, 1.0), rng)
    }

    /// Configuration with exactly the given occupancies.
    pub fn configuration_from(&self, occ: &[bool]) -> Result<Configuration> {
        if occ.len() != self.params.n - 1 {
            return Err(Error::argument(format!(
                "occupancy length {} does not match the {} bulk sites",
                occ.len(),
                self.params.n - 1
            )));
        }
        self.configuration_from_occupancy(occ.to_vec())
    }

    fn configuration_from_occupancy(&self, occ: Vec<bool>) -> Result<Configuration> {
        let particles = occ.iter().filter(|&&o| o).count();
        let rates: Vec<f64> = occ
            .iter()
            .enumerate()
            .map(|(i, &o)| self.flip_rate_for(i + 1, o))
            .collect();
        Ok(Configuration {
            occ,
            particles,
            flip_rates: RateIndex::from_rates(&rates),
        })
    }

    /// Total event rate of the current configuration.
    pub fn total_rate(&self, cfg: &Configuration) -> f64 {
        self.exchange_rate + cfg.flip_rates.total()
    }

    /// Draw the next event type and target, given that one occurs.
    pub(crate) fn draw_event<R: Rng + ?Sized>(
        &self,
        cfg: &Configuration,
        rng: &mut R,
    ) -> Event {
        let total = self.total_rate(cfg);
        debug_assert!(total > 0.0);
        if rng.gen::<f64>() * total < self.exchange_rate {
            let z = self
                .distance_alias
                .as_ref()
                .expect("positive exchange rate implies pairs exist")
                .sample(rng)
                + 1;
            let x = rng.gen_range(1..=self.params.n - 1 - z);
            let y = x + z;
            if cfg.occ[x - 1] == cfg.occ[y - 1] {
                Event::ExchangeNoOp { x, y }
            } else {
                Event::Exchange { x, y }
            }
        } else {
            let target = rng.gen::<f64>() * cfg.flip_rates.total();
            let x = cfg.flip_rates.sample(target) + 1;
            Event::Flip { x }
        }
    }

    /// Apply an event, updating occupancy, particle count and rate tables.
    pub(crate) fn apply(&self, cfg: &mut Configuration, event: &Event) {
        match *event {
            Event::Flip { x } => self.toggle(cfg, x),
            Event::Exchange { x, y } => {
                debug_assert_ne!(cfg.occ[x - 1], cfg.occ[y - 1]);
                self.toggle(cfg, x);
                self.toggle(cfg, y);
            }
            Event::ExchangeNoOp { .. } => {}
        }
    }

    fn toggle(&self, cfg: &mut Configuration, x: usize) {
        let now = !cfg.occ[x - 1];
        cfg.occ[x - 1] = now;
        if now {
            cfg.particles += 1;
        } else {
            cfg.particles -= 1;
        }
        cfg.flip_rates.set(x - 1, self.flip_rate_for(x, now));
    }

    /// One exact Gillespie step: the microscopic holding time and the
    /// transition taken (no-op exchanges included).
    pub fn step<R: Rng + ?Sized>(
        &self,
        cfg: &mut Configuration,
        rng: &mut R,
    ) -> Result<(Event, f64)> {
        let total = self.total_rate(cfg);
        if total <= 0.0 {
            return Err(Error::numeric(
                "total event rate is zero; the chain cannot advance",
            ));
        }
        let dt = exponential(rng, total);
        let event = self.draw_event(cfg, rng);
        self.apply(cfg, &event);
        Ok((event, dt))
    }

    /// Advance to macroscopic time `t_macro`, snapshotting the occupancy at
    /// each of the strictly increasing `observe_times`.
    ///
    /// `seed` is carried into the trajectory for bookkeeping; the caller is
    /// responsible for deriving `rng` from it.
    pub fn run<R: Rng + ?Sized>(
        &self,
        mut cfg: Configuration,
        t_macro: f64,
        observe_times: &[f64],
        seed: u64,
        rng: &mut R,
    ) -> Result<Trajectory> {
        if !t_macro.is_finite() || t_macro < 0.0 {
            return Err(Error::argument(format!(
                "t_macro must be finite and nonnegative, got {t_macro}"
            )));
        }
        let mut prev = -1.0;
        for &t in observe_times {
            if !t.is_finite() || t < 0.0 || t > t_macro {
                return Err(Error::argument(format!(
                    "observation time {t} is outside [0, {t_macro}]"
                )));
            }
            if t <= prev {
                return Err(Error::argument(
                    "observation times must be strictly increasing",
                ));
            }
            prev = t;
        }
        let theta_n = self.time_scale();
        let mut events = EventCounts::default();
        let mut times = Vec::with_capacity(observe_times.len());
        let mut snapshots = Vec::with_capacity(observe_times.len());
        let mut t_micro = 0.0;
        let mut targets = observe_times
            .iter()
            .map(|&t| (t, t * theta_n))
            .chain(std::iter::once((t_macro, t_macro * theta_n)))
            .peekable();
        while let Some(&(t_obs, target)) = targets.peek() {
            if t_micro >= target {
                if t_obs < t_macro || observe_times.last() == Some(&t_macro) {
                    // The final target is an observation only if requested.
                    if times.last() != Some(&t_obs) {
                        times.push(t_obs);
                        snapshots.push(cfg.occ.clone());
                    }
                }
                targets.next();
                continue;
            }
            let total = self.total_rate(&cfg);
            if total <= 0.0 {
                return Err(Error::numeric(
                    "total event rate is zero; the chain cannot advance",
                ));
            }
            let dt = exponential(rng, total);
            if t_micro + dt >= target {
                // Truncate at the observation point; by memorylessness the
                // discarded residual clock does not bias the law.
                t_micro = target;
                continue;
            }
            t_micro += dt;
            let event = self.draw_event(&cfg, rng);
            self.apply(&mut cfg, &event);
            events.record(&event);
        }
        Ok(Trajectory {
            seed,
            times,
            snapshots,
            events,
            final_config: cfg,
        })
    }
}

pub(crate) fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // gen::<f64>() lies in [0, 1); flip to (0, 1] so ln is finite.
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// Pairing of the empirical measure with a test function:
/// (N-1)^{-1} sum_x G(x/N) eta_x.
pub fn empirical_pairing(cfg: &Configuration, g: impl Fn(f64) -> f64) -> f64 {
    let n = cfg.sites() + 1;
    let mut acc = 0.0;
    for (i, &o) in cfg.occ.iter().enumerate() {
        if o {
            acc += g((i + 1) as f64 / n as f64);
        }
    }
    acc / cfg.sites() as f64
}

/// Mean occupancy per spatial bin, as a cell-centered profile.
pub fn density_histogram(cfg: &Configuration, bins: usize) -> Result<Profile> {
    let sites = cfg.sites();
    if bins == 0 || bins > sites {
        return Err(Error::argument(format!(
            "bins must lie in [1, {sites}], got {bins}"
        )));
    }
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (i, &o) in cfg.occ.iter().enumerate() {
        let b = i * bins / sites;
        counts[b] += 1;
        if o {
            sums[b] += 1.0;
        }
    }
    Ok(Profile::new(
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect(),
    ))
}

/// Mean occupancy over the first ⌊eps N⌋ sites.
pub fn boxcar_left(cfg: &Configuration, eps: f64) -> Result<f64> {
    let l = boxcar_window(cfg, eps)?;
    let hi = l.min(cfg.sites());
    let occ = &cfg.occ[..hi];
    Ok(occ.iter().filter(|&&o| o).count() as f64 / hi as f64)
}

/// Mean occupancy over the mirrored window at the right boundary,
/// sites N-1-⌊eps N⌋ through N-1, normalized by the actual site count.
pub fn boxcar_right(cfg: &Configuration, eps: f64) -> Result<f64> {
    let l = boxcar_window(cfg, eps)?;
    let lo = cfg.sites().saturating_sub(l + 1);
    let occ = &cfg.occ[lo..];
    Ok(occ.iter().filter(|&&o| o).count() as f64 / occ.len() as f64)
}

fn boxcar_window(cfg: &Configuration, eps: f64) -> Result<usize> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::argument(format!("eps must be positive, got {eps}")));
    }
    let l = (eps * (cfg.sites() + 1) as f64).floor() as usize;
    if l == 0 {
        return Err(Error::argument(format!(
            "boxcar window floor(eps*N) is empty for eps = {eps}"
        )));
    }
    Ok(l)
}
