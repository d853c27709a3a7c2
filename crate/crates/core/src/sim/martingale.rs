//! Dynkin martingale diagnostics along simulated trajectories.
//!
//! For a test function G the process
//! `M_t(G) = <pi_t, G> - <pi_0, G> - int_0^t (generator action) ds`
//! is a mean-zero martingale whose predictable quadratic variation
//! integrates the squared-jump rate. Both integrands are piecewise
//! constant between events, so the integrals are exact given the event
//! sequence; the accumulators update incrementally per event and are
//! cross-checked against from-scratch evaluation in tests.

use rand::Rng;
use serde::Serialize;

use super::{exponential, Configuration, Event, Simulator};
use crate::error::{Error, Result};
use crate::exec;
use crate::profile::Profile;

/// Lattice data for one test function.
struct Tables {
    /// G(x/N), indexed by x-1.
    g: Vec<f64>,
    /// Bulk generator action sum_y p(y-x)(G(y/N) - G(x/N)) over bulk y.
    bulk: Vec<f64>,
    /// p(d) by pair distance, indexed by d-1.
    dist: Vec<f64>,
}

impl Tables {
    fn new(sim: &Simulator, g: impl Fn(f64) -> f64) -> Tables {
        let n = sim.params().n;
        let sites = n - 1;
        let g_vals: Vec<f64> = (1..n).map(|x| g(x as f64 / n as f64)).collect();
        let dist: Vec<f64> = (1..sites).map(|d| sim.kernel().prob(d as i64)).collect();
        let mut bulk = vec![0.0; sites];
        for x in 0..sites {
            let mut acc = 0.0;
            for y in 0..sites {
                if y != x {
                    acc += dist[x.abs_diff(y) - 1] * (g_vals[y] - g_vals[x]);
                }
            }
            bulk[x] = acc;
        }
        Tables {
            g: g_vals,
            bulk,
            dist,
        }
    }

    fn pairing(&self, occ: &[bool]) -> f64 {
        let mut acc = 0.0;
        for (i, &o) in occ.iter().enumerate() {
            if o {
                acc += self.g[i];
            }
        }
        acc / occ.len() as f64
    }
}

/// Running drift and quadratic-variation rates of one trajectory.
struct DriftState<'a> {
    sim: &'a Simulator,
    tables: &'a Tables,
    occ: Vec<bool>,
    /// sum_x eta_x * bulk[x].
    s_bulk: f64,
    /// sum_x G_x (1 - 2 eta_x) lambda_x.
    s_res: f64,
    /// sum_{x<y} p(y-x)(G_x - G_y)^2 (eta_x - eta_y)^2.
    qv_ex: f64,
    /// sum_x lambda_x G_x^2.
    qv_flip: f64,
}

impl<'a> DriftState<'a> {
    fn new(sim: &'a Simulator, tables: &'a Tables, occ: &[bool]) -> Self {
        let sites = occ.len();
        let mut s_bulk = 0.0;
        let mut s_res = 0.0;
        let mut qv_flip = 0.0;
        for i in 0..sites {
            let lam = sim.flip_rate_for(i + 1, occ[i]);
            let sign = if occ[i] { -1.0 } else { 1.0 };
            if occ[i] {
                s_bulk += tables.bulk[i];
            }
            s_res += tables.g[i] * sign * lam;
            qv_flip += tables.g[i] * tables.g[i] * lam;
        }
        let mut qv_ex = 0.0;
        for x in 0..sites {
            for y in x + 1..sites {
                if occ[x] != occ[y] {
                    let d = tables.g[x] - tables.g[y];
                    qv_ex += tables.dist[y - x - 1] * d * d;
                }
            }
        }
        DriftState {
            sim,
            tables,
            occ: occ.to_vec(),
            s_bulk,
            s_res,
            qv_ex,
            qv_flip,
        }
    }

    /// Generator action on the empirical pairing.
    fn drift(&self) -> f64 {
        (self.s_bulk + self.s_res) / self.occ.len() as f64
    }

    /// Rate of the predictable quadratic variation.
    fn qv_rate(&self) -> f64 {
        let sites = self.occ.len() as f64;
        (self.qv_ex + self.qv_flip) / (sites * sites)
    }

    fn toggle(&mut self, i: usize) {
        let old = self.occ[i];
        let lam_old = self.sim.flip_rate_for(i + 1, old);
        let lam_new = self.sim.flip_rate_for(i + 1, !old);
        let g = self.tables.g[i];
        let sign_old = if old { -1.0 } else { 1.0 };
        self.s_bulk += sign_old * self.tables.bulk[i];
        self.s_res += -g * sign_old * (lam_new + lam_old);
        self.qv_flip += g * g * (lam_new - lam_old);
        let mut dq = 0.0;
        for y in 0..self.occ.len() {
            if y == i {
                continue;
            }
            let d = g - self.tables.g[y];
            let w = self.tables.dist[i.abs_diff(y) - 1] * d * d;
            dq += if self.occ[y] == old { w } else { -w };
        }
        self.qv_ex += dq;
        self.occ[i] = !old;
    }

    fn apply(&mut self, event: &Event) {
        match *event {
            Event::Flip { x } => self.toggle(x - 1),
            Event::Exchange { x, y } => {
                self.toggle(x - 1);
                self.toggle(y - 1);
            }
            Event::ExchangeNoOp { .. } => {}
        }
    }
}

/// One trajectory's martingale value and integrated quadratic variation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MartingaleSample {
    pub m_value: f64,
    pub quadratic_variation: f64,
}

/// Simulate one trajectory to macroscopic time `t_macro` and evaluate the
/// martingale for the test function `g`.
pub fn martingale_sample<R: Rng + ?Sized>(
    sim: &Simulator,
    mut cfg: Configuration,
    g: impl Fn(f64) -> f64,
    t_macro: f64,
    rng: &mut R,
) -> Result<MartingaleSample> {
    if !t_macro.is_finite() || t_macro < 0.0 {
        return Err(Error::argument(format!(
            "t_macro must be finite and nonnegative, got {t_macro}"
        )));
    }
    let tables = Tables::new(sim, g);
    let target = t_macro * sim.time_scale();
    let pair0 = tables.pairing(cfg.occupancy());
    let mut state = DriftState::new(sim, &tables, cfg.occupancy());
    let mut drift_int = 0.0;
    let mut qv_int = 0.0;
    let mut t = 0.0;
    while t < target {
        let total = sim.total_rate(&cfg);
        if total <= 0.0 {
            break; // frozen chain: both integrands are exactly zero
        }
        let dt = exponential(rng, total);
        if t + dt >= target {
            drift_int += state.drift() * (target - t);
            qv_int += state.qv_rate() * (target - t);
            break;
        }
        drift_int += state.drift() * dt;
        qv_int += state.qv_rate() * dt;
        t += dt;
        let event = sim.draw_event(&cfg, rng);
        sim.apply(&mut cfg, &event);
        state.apply(&event);
    }
    Ok(MartingaleSample {
        m_value: tables.pairing(cfg.occupancy()) - pair0 - drift_int,
        quadratic_variation: qv_int,
    })
}

/// Ensemble statistics of the Dynkin martingale.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MartingaleStats {
    pub mean: f64,
    pub stderr: f64,
    pub variance: f64,
    pub mean_quadratic_variation: f64,
    pub samples: usize,
}

/// Run an ensemble started from `init` and test that the martingale is
/// statistically centered: returns the ensemble mean, its standard error,
/// the sample variance and the mean integrated quadratic variation.
pub fn dynkin_residual(
    sim: &Simulator,
    init: &Profile,
    g: impl Fn(f64) -> f64 + Sync + Send,
    t_macro: f64,
    seeds: &[u64],
    master_seed: u64,
) -> Result<MartingaleStats> {
    if seeds.len() < 2 {
        return Err(Error::argument(
            "martingale statistics need at least two seeds",
        ));
    }
    let samples: Vec<Result<MartingaleSample>> = exec::seed_map(seeds, |seed| {
        let mut rng = exec::rng_for(master_seed, seed);
        let cfg = sim.init_from_profile(init, &mut rng)?;
        martingale_sample(sim, cfg, &g, t_macro, &mut rng)
    });
    let mut values = Vec::with_capacity(samples.len());
    let mut qv_sum = 0.0;
    for s in samples {
        let s = s?;
        values.push(s.m_value);
        qv_sum += s.quadratic_variation;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    Ok(MartingaleStats {
        mean,
        stderr: (variance / k).sqrt(),
        variance,
        mean_quadratic_variation: qv_sum / k,
        samples: values.len(),
    })
}
