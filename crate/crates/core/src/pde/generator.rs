//! Consistency of the rescaled jump generator with its diffusive limit.
//!
//! For a smooth compactly supported G the free-lattice action is
//! `(K_N G)(u) = sum_z p(z) [G(u + z/N) - G(u)]`, and `N^2 K_N G` converges
//! to `(sigma^2 / 2) G''` pointwise. Because the jump law sums to one, the
//! action reduces exactly to a finite window sum minus `G(u)` once the
//! support of G is accounted for; no tail truncation enters.

use super::weak::bump;
use crate::error::{Error, Result};
use crate::kernel::JumpKernel;

/// Spatial test function with an analytic second derivative. The support
/// may extend beyond the unit interval; the function is evaluated wherever
/// lattice jumps land.
pub struct SpatialTestFunction {
    id: String,
    support: (f64, f64),
    value: Box<dyn Fn(f64) -> f64>,
    laplacian: Box<dyn Fn(f64) -> f64>,
}

impl std::fmt::Debug for SpatialTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpatialTestFunction")
            .field("id", &self.id)
            .field("support", &self.support)
            .finish()
    }
}

impl SpatialTestFunction {
    /// Assemble from closures; the function and its derivatives must vanish
    /// outside `support`.
    pub fn new(
        id: impl Into<String>,
        support: (f64, f64),
        value: impl Fn(f64) -> f64 + 'static,
        laplacian: impl Fn(f64) -> f64 + 'static,
    ) -> Self {
        SpatialTestFunction {
            id: id.into(),
            support,
            value: Box::new(value),
            laplacian: Box::new(laplacian),
        }
    }

    /// Smooth bump supported on `(center - half_width, center + half_width)`.
    pub fn mollifier(center: f64, half_width: f64) -> Self {
        let h = half_width;
        SpatialTestFunction {
            id: format!("bump({center},{half_width})"),
            support: (center - half_width, center + half_width),
            value: Box::new(move |q| bump((q - center) / h).0),
            laplacian: Box::new(move |q| bump((q - center) / h).2 / (h * h)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn value(&self, q: f64) -> f64 {
        (self.value)(q)
    }

    pub fn laplacian(&self, q: f64) -> f64 {
        (self.laplacian)(q)
    }
}

/// Worst-case deviation `max_x |N^2 (K_N G)(x/N) - (sigma^2/2) G''(x/N)|`
/// over the bulk sites `x = 1, ..., n-1`.
pub fn discrete_generator_check(
    kernel: &JumpKernel,
    n: usize,
    g: &SpatialTestFunction,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::argument("lattice needs at least one bulk site"));
    }
    let (a, b) = g.support();
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::argument(format!(
            "test function support ({a}, {b}) must be a bounded interval"
        )));
    }
    let nf = n as f64;
    // Integer landing points j with j/n inside the support.
    let j_min = (a * nf).floor() as i64 + 1;
    let j_max = (b * nf).ceil() as i64 - 1;
    if j_min > j_max {
        // No lattice point lands inside the support, so the action and the
        // limit both vanish at every bulk site.
        return Ok(0.0);
    }
    let g_vals: Vec<f64> = (j_min..=j_max).map(|j| g.value(j as f64 / nf)).collect();
    // Jump displacements that can reach the window from some bulk site;
    // prob(0) = 0, so the excluded self-jump needs no special casing.
    let z_min = j_min - (n as i64 - 1);
    let z_max = j_max - 1;
    let p_vals: Vec<f64> = (z_min..=z_max).map(|z| kernel.prob(z)).collect();

    let half_sigma_sq = 0.5 * kernel.variance();
    let n_sq = nf * nf;
    let mut worst = 0.0f64;
    for x in 1..n as i64 {
        let mut sum = 0.0;
        for (offset, gv) in g_vals.iter().enumerate() {
            let j = j_min + offset as i64;
            sum += p_vals[(j - x - z_min) as usize] * gv;
        }
        let u = x as f64 / nf;
        let action = n_sq * (sum - g.value(u));
        worst = worst.max((action - half_sigma_sq * g.laplacian(u)).abs());
    }
    Ok(worst)
}
