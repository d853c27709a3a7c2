//! Weak-formulation residuals for numerically computed solutions.
//!
//! Both residuals integrate with the trapezoid rule on the extended node
//! set {0, cell centers, 1}, with one-sided second-order extrapolation for
//! the boundary density values, and the midpoint rule in time over the
//! densely recorded step grid (profile at a half step is the average of the
//! bracketing records). A solution that satisfies the weak form drives the
//! residual to zero at the rate of the scheme plus quadrature error.

use serde::Serialize;

use super::{reaction_v0, reaction_v1, PdeSolution, RegimeKind};
use crate::error::{Error, Result};
use crate::profile::Profile;

/// Smooth compactly supported bump and its derivatives with respect to the
/// scaled coordinate `s`: returns `(phi, phi', phi'')` for
/// `phi(s) = exp(-1/(1-s^2))` inside `|s| < 1`, zero outside. All
/// derivatives vanish at the support boundary, so trapezoid sums over it
/// converge faster than any power of the grid spacing.
pub(crate) fn bump(s: f64) -> (f64, f64, f64) {
    let s2 = s * s;
    if s2 >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 1.0 / (1.0 - s2);
    let phi = (-u).exp();
    let d1 = -2.0 * s * u * u * phi;
    let d2 = (6.0 * s2 * s2 - 2.0) * u * u * u * u * phi;
    (phi, d1, d2)
}

/// Space-time test function with analytically supplied derivatives.
pub struct TestFunction {
    id: String,
    support: (f64, f64),
    value: Box<dyn Fn(f64, f64) -> f64>,
    time_deriv: Box<dyn Fn(f64, f64) -> f64>,
    space_deriv: Box<dyn Fn(f64, f64) -> f64>,
    laplacian: Box<dyn Fn(f64, f64) -> f64>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("support", &self.support)
            .finish()
    }
}

impl TestFunction {
    /// Assemble from closures `(s, q) -> f64`. `support` is the spatial
    /// interval outside of which the function and its derivatives vanish;
    /// use `(0.0, 1.0)` for functions active on the whole domain.
    pub fn new(
        id: impl Into<String>,
        support: (f64, f64),
        value: impl Fn(f64, f64) -> f64 + 'static,
        time_deriv: impl Fn(f64, f64) -> f64 + 'static,
        space_deriv: impl Fn(f64, f64) -> f64 + 'static,
        laplacian: impl Fn(f64, f64) -> f64 + 'static,
    ) -> Self {
        TestFunction {
            id: id.into(),
            support,
            value: Box::new(value),
            time_deriv: Box::new(time_deriv),
            space_deriv: Box::new(space_deriv),
            laplacian: Box::new(laplacian),
        }
    }

    /// Time-independent smooth bump supported on
    /// `(center - half_width, center + half_width)`.
    pub fn mollifier(center: f64, half_width: f64) -> Self {
        Self::modulated_mollifier(center, half_width, 0.0)
    }

    /// Smooth bump modulated by `cos(omega * s)` in time.
    pub fn modulated_mollifier(center: f64, half_width: f64, omega: f64) -> Self {
        let h = half_width;
        let id = if omega == 0.0 {
            format!("bump({center},{half_width})")
        } else {
            format!("cos({omega}t)*bump({center},{half_width})")
        };
        TestFunction {
            id,
            support: (center - half_width, center + half_width),
            value: Box::new(move |s, q| {
                let (p, _, _) = bump((q - center) / h);
                (omega * s).cos() * p
            }),
            time_deriv: Box::new(move |s, q| {
                let (p, _, _) = bump((q - center) / h);
                -omega * (omega * s).sin() * p
            }),
            space_deriv: Box::new(move |s, q| {
                let (_, d1, _) = bump((q - center) / h);
                (omega * s).cos() * d1 / h
            }),
            laplacian: Box::new(move |s, q| {
                let (_, _, d2) = bump((q - center) / h);
                (omega * s).cos() * d2 / (h * h)
            }),
        }
    }

    /// Time-independent `1 + q^2`, active up to the boundary; suitable for
    /// the Robin and Neumann weak forms, which carry explicit flux terms.
    pub fn boundary_quadratic() -> Self {
        Self::modulated_boundary_quadratic(0.0)
    }

    /// `cos(omega * s) * (1 + q^2)`.
    pub fn modulated_boundary_quadratic(omega: f64) -> Self {
        let id = if omega == 0.0 {
            "1+q^2".to_string()
        } else {
            format!("cos({omega}t)*(1+q^2)")
        };
        TestFunction {
            id,
            support: (0.0, 1.0),
            value: Box::new(move |s, q| (omega * s).cos() * (1.0 + q * q)),
            time_deriv: Box::new(move |s, q| -omega * (omega * s).sin() * (1.0 + q * q)),
            space_deriv: Box::new(move |s, q| (omega * s).cos() * 2.0 * q),
            laplacian: Box::new(move |s, _| (omega * s).cos() * 2.0),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn value(&self, s: f64, q: f64) -> f64 {
        (self.value)(s, q)
    }

    pub fn time_deriv(&self, s: f64, q: f64) -> f64 {
        (self.time_deriv)(s, q)
    }

    pub fn space_deriv(&self, s: f64, q: f64) -> f64 {
        (self.space_deriv)(s, q)
    }

    pub fn laplacian(&self, s: f64, q: f64) -> f64 {
        (self.laplacian)(s, q)
    }
}

/// Weak-form residual of a recorded solution against one test function.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub regime: RegimeKind,
    #[serde(rename = "M")]
    pub m: usize,
    pub dt: f64,
    pub t: f64,
    #[serde(rename = "G_id")]
    pub g_id: String,
    pub residual: f64,
}

/// Trapezoid over {0, cell centers, 1} of `f(q, rho(q))`, with the
/// boundary densities extrapolated one-sidedly to second order.
fn extended_trapezoid(p: &Profile, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
    let m = p.len();
    debug_assert!(m >= 2);
    let dq = 1.0 / m as f64;
    let mut acc = 0.25 * dq * f(0.0, p.boundary_left());
    for (i, &v) in p.values().iter().enumerate() {
        let w = if i == 0 || i == m - 1 { 0.75 } else { 1.0 };
        acc += w * dq * f(p.cell_center(i), v);
    }
    acc + 0.25 * dq * f(1.0, p.boundary_right())
}

/// As [`extended_trapezoid`] with the density taken as the average of two
/// records, used at half steps of the midpoint rule in time.
fn averaged_extended_trapezoid(
    p0: &Profile,
    p1: &Profile,
    mut f: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let m = p0.len();
    debug_assert!(m >= 2 && p1.len() == m);
    let dq = 1.0 / m as f64;
    let mut acc = 0.25 * dq * f(0.0, 0.5 * (p0.boundary_left() + p1.boundary_left()));
    for i in 0..m {
        let w = if i == 0 || i == m - 1 { 0.75 } else { 1.0 };
        let rho = 0.5 * (p0.values()[i] + p1.values()[i]);
        acc += w * dq * f(p0.cell_center(i), rho);
    }
    acc + 0.25 * dq * f(1.0, 0.5 * (p0.boundary_right() + p1.boundary_right()))
}

fn locate_record(sol: &PdeSolution, t: f64) -> Result<usize> {
    if sol.is_empty() || sol.times()[0] != 0.0 {
        return Err(Error::argument("solution records must start at time zero"));
    }
    if sol.len() > 1 && sol.uniform_step().is_none() {
        return Err(Error::argument(
            "weak residuals need densely recorded solutions with uniform steps",
        ));
    }
    sol.index_of_time(t)
        .ok_or_else(|| Error::argument(format!("time {t} is not a recorded solution time")))
}

/// Residual of the weak form whose boundary action enters through singular
/// bulk weights (the reaction regimes) or a Dirichlet condition. Test
/// functions must be supported strictly inside the open unit interval.
pub fn weak_residual_rd(sol: &PdeSolution, g: &TestFunction, t: f64) -> Result<ResidualReport> {
    let regime = *sol.regime();
    match regime.kind {
        RegimeKind::ReactionOnly
        | RegimeKind::ReactionDiffusionDirichlet
        | RegimeKind::HeatDirichlet => {}
        RegimeKind::HeatRobin | RegimeKind::HeatNeumann => {
            return Err(Error::argument(
                "boundary-flux regimes take the Robin weak form",
            ))
        }
    }
    let (a, b) = g.support();
    if !(a > 0.0 && b < 1.0 && a < b) {
        return Err(Error::argument(format!(
            "test function support ({a}, {b}) must close strictly inside (0, 1)"
        )));
    }
    let k_end = locate_record(sol, t)?;
    let times = sol.times();
    let profiles = sol.profiles();
    let (alpha, beta) = (sol.alpha(), sol.beta());
    let sq_half = 0.5 * regime.sigma_hat * regime.sigma_hat;
    let kap = regime.kappa_hat;
    let e = regime.v_exponent;

    let t_rec = times[k_end];
    let mut acc = extended_trapezoid(&profiles[k_end], |q, rho| rho * g.value(t_rec, q));
    acc -= extended_trapezoid(&profiles[0], |q, rho| rho * g.value(0.0, q));
    for n in 0..k_end {
        let ds = times[n + 1] - times[n];
        let sm = 0.5 * (times[n] + times[n + 1]);
        let inner = averaged_extended_trapezoid(&profiles[n], &profiles[n + 1], |q, rho| {
            let mut val = rho * (sq_half * g.laplacian(sm, q) + g.time_deriv(sm, q));
            if kap > 0.0 {
                let gv = g.value(sm, q);
                if gv != 0.0 {
                    val += kap * gv * (reaction_v0(q, alpha, beta, e) - rho * reaction_v1(q, e));
                }
            }
            val
        });
        acc -= ds * inner;
    }

    Ok(ResidualReport {
        regime: regime.kind,
        m: sol.cells(),
        dt: sol.dt(),
        t: t_rec,
        g_id: g.id().to_string(),
        residual: acc,
    })
}

/// Residual of the weak form with explicit boundary flux and exchange
/// terms (the Robin regime; Neumann is the zero-exchange case). Test
/// functions may be active up to the boundary.
pub fn weak_residual_robin(sol: &PdeSolution, g: &TestFunction, t: f64) -> Result<ResidualReport> {
    let regime = *sol.regime();
    match regime.kind {
        RegimeKind::HeatRobin | RegimeKind::HeatNeumann => {}
        _ => {
            return Err(Error::argument(
                "only the boundary-flux regimes take the Robin weak form",
            ))
        }
    }
    let k_end = locate_record(sol, t)?;
    let times = sol.times();
    let profiles = sol.profiles();
    let (alpha, beta) = (sol.alpha(), sol.beta());
    let sq_half = 0.5 * regime.sigma_hat * regime.sigma_hat;
    let m_hat = regime.m_hat;

    let t_rec = times[k_end];
    let mut acc = extended_trapezoid(&profiles[k_end], |q, rho| rho * g.value(t_rec, q));
    acc -= extended_trapezoid(&profiles[0], |q, rho| rho * g.value(0.0, q));
    for n in 0..k_end {
        let ds = times[n + 1] - times[n];
        let sm = 0.5 * (times[n] + times[n + 1]);
        let inner = averaged_extended_trapezoid(&profiles[n], &profiles[n + 1], |q, rho| {
            rho * (sq_half * g.laplacian(sm, q) + g.time_deriv(sm, q))
        });
        let rho_left = 0.5 * (profiles[n].boundary_left() + profiles[n + 1].boundary_left());
        let rho_right = 0.5 * (profiles[n].boundary_right() + profiles[n + 1].boundary_right());
        let flux =
            sq_half * (rho_right * g.space_deriv(sm, 1.0) - rho_left * g.space_deriv(sm, 0.0));
        let exchange = m_hat
            * (g.value(sm, 0.0) * (alpha - rho_left) + g.value(sm, 1.0) * (beta - rho_right));
        acc += ds * (flux - exchange - inner);
    }

    Ok(ResidualReport {
        regime: regime.kind,
        m: sol.cells(),
        dt: sol.dt(),
        t: t_rec,
        g_id: g.id().to_string(),
        residual: acc,
    })
}
