//! Stationary profiles of the five limiting equations and the shape
//! diagnostics they are supposed to satisfy.
//!
//! Four regimes admit closed forms; the reaction-diffusion regime is solved
//! as a tridiagonal boundary-value problem on the same grid and with the
//! same boundary closure as the time-dependent solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::solver::{ghost_closures, solve_constant_off_tridiagonal};
use crate::pde::{reaction_fixed_point, reaction_v0, reaction_v1, Regime, RegimeKind};
use crate::profile::Profile;

/// Analytic family of a stationary profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionForm {
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "robin-linear")]
    RobinLinear,
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "V0-over-V1")]
    WeightRatio,
    #[serde(rename = "numeric-bvp")]
    NumericBvp,
}

impl SolutionForm {
    pub fn label(&self) -> &'static str {
        match self {
            SolutionForm::Linear => "linear",
            SolutionForm::RobinLinear => "robin-linear",
            SolutionForm::Constant => "constant",
            SolutionForm::WeightRatio => "V0-over-V1",
            SolutionForm::NumericBvp => "numeric-bvp",
        }
    }

    /// Default shape-check tolerance: tight for closed forms, looser for
    /// the numeric boundary-value solution.
    fn shape_tolerance(&self) -> f64 {
        match self {
            SolutionForm::NumericBvp => 1e-6,
            _ => 1e-10,
        }
    }
}

/// Stationary profile together with its regime and analytic family.
#[derive(Debug, Clone)]
pub struct StationaryProfile {
    pub regime: Regime,
    pub profile: Profile,
    pub closed_form: SolutionForm,
}

/// Stationary profile of the given regime on an `m`-cell grid.
///
/// `g` fixes the conserved mass and is consulted only in the Neumann
/// regime, where the stationary state is the constant `∫g`.
pub fn stationary_profile(
    regime: &Regime,
    alpha: f64,
    beta: f64,
    g: Option<&Profile>,
    m: usize,
) -> Result<StationaryProfile> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::argument(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    if m == 0 {
        return Err(Error::argument("grid needs at least one cell"));
    }
    let (profile, closed_form) = match regime.kind {
        RegimeKind::ReactionOnly => (
            Profile::from_fn(m, |q| reaction_fixed_point(q, alpha, beta, regime.v_exponent)),
            SolutionForm::WeightRatio,
        ),
        RegimeKind::HeatDirichlet => (
            Profile::from_fn(m, |q| alpha + (beta - alpha) * q),
            SolutionForm::Linear,
        ),
        RegimeKind::HeatRobin => {
            let kp = regime.robin_coefficient();
            let slope = kp * (beta - alpha) / (2.0 + kp);
            let a = alpha + (beta - alpha) / (2.0 + kp);
            (
                Profile::from_fn(m, |q| a + slope * q),
                SolutionForm::RobinLinear,
            )
        }
        RegimeKind::HeatNeumann => {
            let g = g.ok_or_else(|| {
                Error::argument("the Neumann stationary state needs an initial profile")
            })?;
            if g.is_empty() {
                return Err(Error::argument("initial profile is empty"));
            }
            (Profile::constant(m, g.mean()), SolutionForm::Constant)
        }
        RegimeKind::ReactionDiffusionDirichlet => {
            if m < 2 {
                return Err(Error::argument(
                    "the boundary-value solve needs at least two cells",
                ));
            }
            (
                reaction_diffusion_bvp(regime, alpha, beta, m),
                SolutionForm::NumericBvp,
            )
        }
    };
    Ok(StationaryProfile {
        regime: *regime,
        profile,
        closed_form,
    })
}

/// Solve `(sigma^2/2) rho'' + kappa (V0 - rho V1) = 0` with the Dirichlet
/// ghost closure. The reaction term makes the system strictly diagonally
/// dominant, so the unpivoted tridiagonal solve is stable.
fn reaction_diffusion_bvp(regime: &Regime, alpha: f64, beta: f64, m: usize) -> Profile {
    let dq = 1.0 / m as f64;
    let s2h = 0.5 * regime.sigma_hat * regime.sigma_hat / (dq * dq);
    let e = regime.v_exponent;
    let (left, right) = ghost_closures(regime, alpha, beta, dq);
    let mut diag = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let q = (i as f64 + 0.5) / m as f64;
        let mut d = regime.kappa_hat * reaction_v1(q, e) + 2.0 * s2h;
        let mut r = regime.kappa_hat * reaction_v0(q, alpha, beta, e);
        if i == 0 {
            d -= s2h * left.coeff;
            r += s2h * left.constant;
        }
        if i == m - 1 {
            d -= s2h * right.coeff;
            r += s2h * right.constant;
        }
        diag.push(d);
        rhs.push(r);
    }
    Profile::new(solve_constant_off_tridiagonal(&diag, -s2h, &rhs))
}

/// Outcome of the qualitative shape checks on a stationary profile.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub degenerate: bool,
    pub strictly_increasing: bool,
    pub convex_left: bool,
    pub concave_right: bool,
    pub endpoints_ok: bool,
    pub tol: f64,
    pub violations: Vec<String>,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.strictly_increasing && self.convex_left && self.concave_right && self.endpoints_ok
    }
}

/// Shape checks with the default tolerance for the profile's family.
pub fn shape_check(sp: &StationaryProfile, alpha: f64, beta: f64) -> ShapeReport {
    shape_check_with_tol(sp, alpha, beta, sp.closed_form.shape_tolerance())
}

/// Verify the asserted shape of an increasing stationary profile: strict
/// monotonicity, convexity left of the midpoint and concavity right of it
/// (discrete second differences within `tol`), and endpoint values within
/// one grid spacing of the reservoir densities.
pub fn shape_check_with_tol(
    sp: &StationaryProfile,
    alpha: f64,
    beta: f64,
    tol: f64,
) -> ShapeReport {
    let v = sp.profile.values();
    let m = v.len();
    let dq = sp.profile.cell_width();
    let mut report = ShapeReport {
        degenerate: alpha == beta,
        strictly_increasing: true,
        convex_left: true,
        concave_right: true,
        endpoints_ok: true,
        tol,
        violations: Vec::new(),
    };
    if report.degenerate {
        report.violations.push("degenerate: alpha=beta".to_string());
    } else {
        for i in 0..m.saturating_sub(1) {
            if v[i + 1] <= v[i] {
                report.strictly_increasing = false;
                report.violations.push(format!(
                    "not strictly increasing at cells {}..{}: {} -> {}",
                    i,
                    i + 1,
                    v[i],
                    v[i + 1]
                ));
            }
        }
    }
    for i in 1..m.saturating_sub(1) {
        let q = sp.profile.cell_center(i);
        let dd = v[i + 1] - 2.0 * v[i] + v[i - 1];
        if q < 0.5 && dd < -tol {
            report.convex_left = false;
            report
                .violations
                .push(format!("second difference {dd:e} < -tol at q={q}"));
        }
        if q > 0.5 && dd > tol {
            report.concave_right = false;
            report
                .violations
                .push(format!("second difference {dd:e} > tol at q={q}"));
        }
    }
    if m > 0 {
        if (v[0] - alpha).abs() > dq {
            report.endpoints_ok = false;
            report.violations.push(format!(
                "left endpoint {} is more than one cell from alpha={alpha}",
                v[0]
            ));
        }
        if (v[m - 1] - beta).abs() > dq {
            report.endpoints_ok = false;
            report.violations.push(format!(
                "right endpoint {} is more than one cell from beta={beta}",
                v[m - 1]
            ));
        }
    }
    report
}

/// Discrete norms of the difference `p1 - p2` on a shared grid: plain L²,
/// the forward-difference H¹ seminorm, and L² weighted by the singular
/// reaction weight `V1` with the given exponent.
pub fn appendix_norms(p1: &Profile, p2: &Profile, gamma: f64) -> Result<(f64, f64, f64)> {
    if p1.len() != p2.len() || p1.is_empty() {
        return Err(Error::argument(format!(
            "profiles must share a nonempty grid, got {} and {} cells",
            p1.len(),
            p2.len()
        )));
    }
    let m = p1.len();
    let dq = 1.0 / m as f64;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut v1 = 0.0;
    for i in 0..m {
        let d = p1.values()[i] - p2.values()[i];
        let q = p1.cell_center(i);
        l2 += d * d * dq;
        v1 += d * d * reaction_v1(q, gamma) * dq;
        if i + 1 < m {
            let dd = (p1.values()[i + 1] - p2.values()[i + 1] - d) / dq;
            h1 += dd * dd * dq;
        }
    }
    Ok((l2.sqrt(), h1.sqrt(), v1.sqrt()))
}
