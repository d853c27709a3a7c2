use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which reservoir coupling acts on the bulk.
///
/// `Extended`: every site x exchanges with every site of the two infinite
/// reservoirs, so the flip rate at x carries the full jump-law tails
/// r^-(x/N) and r^+(x/N).
///
/// `SiteCoupled`: the whole left (right) reservoir acts through the single
/// jump probability p(x) (p(N-x)), as if all reservoir mass sat at the
/// origin (at N).
///
/// `BoundaryOnly`: only the boundary sites 1 and N-1 feel the reservoirs,
/// with density-matching rates independent of the jump law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReservoirVariant {
    Extended,
    SiteCoupled,
    BoundaryOnly,
}

impl ReservoirVariant {
    pub fn label(&self) -> &'static str {
        match self {
            ReservoirVariant::Extended => "extended",
            ReservoirVariant::SiteCoupled => "site_coupled",
            ReservoirVariant::BoundaryOnly => "boundary_only",
        }
    }
}

/// Parameters of one finite-N particle system on the bulk {1, ..., N-1}.
///
/// `gamma` is the jump-law exponent (rates decay as |z|^{-gamma-1}),
/// `theta` tunes the reservoir speed through the factor kappa / N^theta,
/// `alpha` and `beta` are the left and right reservoir densities.
/// `kappa = 0` disables the reservoirs (bulk-only test mode).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub gamma: f64,
    pub theta: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub variant: ReservoirVariant,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::argument(format!(
                "lattice size n must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.gamma > 2.0) {
            return Err(Error::domain(format!(
                "jump exponent gamma must exceed 2 (finite variance), got {}",
                self.gamma
            )));
        }
        if !self.theta.is_finite() {
            return Err(Error::argument("theta must be finite".to_string()));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::argument(format!(
                "kappa must be a finite nonnegative real, got {}",
                self.kappa
            )));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::argument(format!(
                    "reservoir density {name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Number of bulk sites, N - 1.
    pub fn bulk_sites(&self) -> usize {
        self.n - 1
    }

    /// Macroscopic position of site x.
    pub fn site_position(&self, x: usize) -> f64 {
        x as f64 / self.n as f64
    }
}
