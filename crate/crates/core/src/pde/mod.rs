//! Regime classification and solvers for the limiting equations.
//!
//! The jump exponent `gamma` and the boundary strength exponent `theta`
//! partition the parameter plane into five limiting equations. [`Regime`]
//! carries the effective coefficients, [`solve`] integrates the equation on a
//! cell-centred grid, the `weak_residual_*` functions measure how well a
//! numerical solution annihilates the weak formulation, and
//! [`discrete_generator_check`] quantifies how fast the rescaled jump
//! generator approaches the Laplacian.

mod generator;
pub(crate) mod solver;
mod weak;

pub use generator::{discrete_generator_check, SpatialTestFunction};
pub use solver::{default_dt, solve, solve_at, solve_dense, solve_pure_reaction, PdeSolution};
pub use weak::{weak_residual_rd, weak_residual_robin, ResidualReport, TestFunction};

use crate::kernel::JumpKernel;
use crate::params::ReservoirVariant;
use serde::{Deserialize, Serialize};

/// The five limiting equations, keyed by their boundary behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// Reservoirs dominate transport entirely: no diffusion, singular
    /// relaxation toward the boundary densities at every point.
    ReactionOnly,
    /// Crossover case: diffusion and the singular reaction act together,
    /// with Dirichlet boundary data.
    ReactionDiffusionDirichlet,
    /// Fast reservoirs pin the boundary values: heat equation with
    /// inhomogeneous Dirichlet data.
    HeatDirichlet,
    /// Critically slow reservoirs: heat equation with Robin data.
    HeatRobin,
    /// Very slow reservoirs decouple in the limit: heat equation with
    /// Neumann data.
    HeatNeumann,
}

impl RegimeKind {
    /// Stable identifier used in CSV output and on the command line.
    pub fn label(self) -> &'static str {
        match self {
            RegimeKind::ReactionOnly => "reaction_only",
            RegimeKind::ReactionDiffusionDirichlet => "reaction_diffusion_dirichlet",
            RegimeKind::HeatDirichlet => "heat_dirichlet",
            RegimeKind::HeatRobin => "heat_robin",
            RegimeKind::HeatNeumann => "heat_neumann",
        }
    }

    /// Inverse of [`RegimeKind::label`].
    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "reaction_only" => Some(RegimeKind::ReactionOnly),
            "reaction_diffusion_dirichlet" => Some(RegimeKind::ReactionDiffusionDirichlet),
            "heat_dirichlet" => Some(RegimeKind::HeatDirichlet),
            "heat_robin" => Some(RegimeKind::HeatRobin),
            "heat_neumann" => Some(RegimeKind::HeatNeumann),
            _ => None,
        }
    }

    /// All five kinds in classification order.
    pub fn all() -> [RegimeKind; 5] {
        [
            RegimeKind::ReactionOnly,
            RegimeKind::ReactionDiffusionDirichlet,
            RegimeKind::HeatDirichlet,
            RegimeKind::HeatRobin,
            RegimeKind::HeatNeumann,
        ]
    }
}

/// Effective coefficients of the limiting equation at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// Effective diffusivity; zero only in the pure reaction regime.
    pub sigma_hat: f64,
    /// Strength of the singular reaction term; zero in the heat regimes.
    pub kappa_hat: f64,
    /// Boundary exchange coefficient; nonzero only in the Robin regime.
    pub m_hat: f64,
    /// Exponent of the singular weights in the reaction term.
    pub v_exponent: f64,
}

impl Regime {
    /// Coefficient `2 m_hat / sigma_hat^2` of the Robin flux condition;
    /// zero for Neumann data.
    pub fn robin_coefficient(&self) -> f64 {
        if self.sigma_hat > 0.0 {
            2.0 * self.m_hat / (self.sigma_hat * self.sigma_hat)
        } else {
            0.0
        }
    }

    pub fn has_diffusion(&self) -> bool {
        self.sigma_hat > 0.0
    }

    pub fn has_reaction(&self) -> bool {
        self.kappa_hat > 0.0
    }
}

/// Classify `(gamma, theta)` for the default extended reservoirs.
///
/// The thresholds are `theta = 2 - gamma` (reaction/diffusion crossover,
/// included in the crossover case) and `theta = 1` (Robin, included there).
pub fn classify_regime(gamma: f64, theta: f64, kernel: &JumpKernel, kappa: f64) -> Regime {
    classify_regime_for(ReservoirVariant::Extended, gamma, theta, kernel, kappa)
}

/// Classify `(gamma, theta)` for any reservoir variant.
pub fn classify_regime_for(
    variant: ReservoirVariant,
    gamma: f64,
    theta: f64,
    kernel: &JumpKernel,
    kappa: f64,
) -> Regime {
    debug_assert!((kernel.gamma() - gamma).abs() < 1e-12);
    let kind = match variant {
        ReservoirVariant::Extended => {
            if theta < 2.0 - gamma {
                RegimeKind::ReactionOnly
            } else if theta == 2.0 - gamma {
                RegimeKind::ReactionDiffusionDirichlet
            } else if theta < 1.0 {
                RegimeKind::HeatDirichlet
            } else if theta == 1.0 {
                RegimeKind::HeatRobin
            } else {
                RegimeKind::HeatNeumann
            }
        }
        ReservoirVariant::SiteCoupled => {
            if theta < 1.0 - gamma {
                RegimeKind::ReactionOnly
            } else if theta == 1.0 - gamma {
                RegimeKind::ReactionDiffusionDirichlet
            } else if theta < 1.0 {
                RegimeKind::HeatDirichlet
            } else if theta == 1.0 {
                RegimeKind::HeatRobin
            } else {
                RegimeKind::HeatNeumann
            }
        }
        ReservoirVariant::BoundaryOnly => {
            if theta < 1.0 {
                RegimeKind::HeatDirichlet
            } else if theta == 1.0 {
                RegimeKind::HeatRobin
            } else {
                RegimeKind::HeatNeumann
            }
        }
    };
    regime_for_kind(variant, kind, kernel, kappa)
}

/// Effective coefficients for an explicitly chosen regime kind.
///
/// This is the single place where the coefficient formulas live; the
/// classifier and the CLI `stationary` entry point both go through it.
pub fn regime_for_kind(
    variant: ReservoirVariant,
    kind: RegimeKind,
    kernel: &JumpKernel,
    kappa: f64,
) -> Regime {
    let gamma = kernel.gamma();
    let sigma = kernel.variance().sqrt();
    let (kappa_hat, v_exponent) = match variant {
        ReservoirVariant::Extended => (kappa * kernel.normalization() / gamma, gamma),
        ReservoirVariant::SiteCoupled => (kappa * kernel.normalization(), gamma + 1.0),
        // No reaction regime exists for boundary-only reservoirs; the weight
        // exponent is never used.
        ReservoirVariant::BoundaryOnly => (0.0, gamma),
    };
    let robin_m_hat = match variant {
        ReservoirVariant::Extended => kernel.mean_m() * kappa,
        // A single flip clock at each boundary site carries total reservoir
        // weight sum_{x>=1} p(x) = 1/2, so the exchange coefficient halves.
        ReservoirVariant::SiteCoupled => kappa / 2.0,
        ReservoirVariant::BoundaryOnly => kappa,
    };
    match kind {
        RegimeKind::ReactionOnly => Regime {
            kind,
            sigma_hat: 0.0,
            kappa_hat,
            m_hat: 0.0,
            v_exponent,
        },
        RegimeKind::ReactionDiffusionDirichlet => Regime {
            kind,
            sigma_hat: sigma,
            kappa_hat,
            m_hat: 0.0,
            v_exponent,
        },
        RegimeKind::HeatDirichlet => Regime {
            kind,
            sigma_hat: sigma,
            kappa_hat: 0.0,
            m_hat: 0.0,
            v_exponent,
        },
        RegimeKind::HeatRobin => Regime {
            kind,
            sigma_hat: sigma,
            kappa_hat: 0.0,
            m_hat: robin_m_hat,
            v_exponent,
        },
        RegimeKind::HeatNeumann => Regime {
            kind,
            sigma_hat: sigma,
            kappa_hat: 0.0,
            m_hat: 0.0,
            v_exponent,
        },
    }
}

/// Time speed-up `Theta(N)` for the default extended reservoirs.
pub fn time_scale(n: usize, gamma: f64, theta: f64) -> f64 {
    time_scale_for(ReservoirVariant::Extended, n, gamma, theta)
}

/// Time speed-up `Theta(N)` for any reservoir variant.
pub fn time_scale_for(variant: ReservoirVariant, n: usize, gamma: f64, theta: f64) -> f64 {
    (n as f64).powf(time_scale_exponent_for(variant, gamma, theta))
}

/// Exponent `e` with `Theta(N) = N^e`.
pub fn time_scale_exponent_for(variant: ReservoirVariant, gamma: f64, theta: f64) -> f64 {
    match variant {
        ReservoirVariant::Extended => {
            if theta >= 2.0 - gamma {
                2.0
            } else {
                gamma + theta
            }
        }
        ReservoirVariant::SiteCoupled => {
            if theta >= 1.0 - gamma {
                2.0
            } else {
                1.0 + gamma + theta
            }
        }
        ReservoirVariant::BoundaryOnly => 2.0,
    }
}

/// Singular weight `V1(q) = q^{-e} + (1-q)^{-e}` of the reaction term.
pub fn reaction_v1(q: f64, exponent: f64) -> f64 {
    q.powf(-exponent) + (1.0 - q).powf(-exponent)
}

/// Singular weight `V0(q) = alpha q^{-e} + beta (1-q)^{-e}`.
pub fn reaction_v0(q: f64, alpha: f64, beta: f64, exponent: f64) -> f64 {
    alpha * q.powf(-exponent) + beta * (1.0 - q).powf(-exponent)
}

/// Stationary point `V0(q)/V1(q)` of the reaction flow, evaluated without
/// overflow for q arbitrarily close to either endpoint.
pub fn reaction_fixed_point(q: f64, alpha: f64, beta: f64, exponent: f64) -> f64 {
    if q <= 0.5 {
        let r = (q / (1.0 - q)).powf(exponent);
        (alpha + beta * r) / (1.0 + r)
    } else {
        let r = ((1.0 - q) / q).powf(exponent);
        (alpha * r + beta) / (r + 1.0)
    }
}
