//! Independent oracles for the acceptance suite.
//!
//! Everything here is deliberately written against the mathematical
//! definitions rather than the library's own algorithms: plain Kahan-summed
//! power series with midpoint-rule tails for the jump-law constants, and an
//! adaptive Runge-Kutta-Fehlberg integrator for reference ODE solutions.

#![allow(dead_code)]

/// Compensated accumulator.
#[derive(Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

const SERIES_CUTOFF: u64 = 10_000_000;

/// Sum of k^(-s) for k >= start, by brute series up to the cutoff plus a
/// midpoint-rule integral tail (error O(cutoff^(-s-1))).
pub fn power_tail_sum(s: f64, start: u64) -> f64 {
    assert!(s > 1.0 && start >= 1);
    let mut acc = Kahan::default();
    for k in start..=SERIES_CUTOFF {
        acc.add((k as f64).powf(-s));
    }
    let edge = SERIES_CUTOFF as f64 + 0.5;
    acc.value() + edge.powf(1.0 - s) / (s - 1.0)
}

/// Brute-force (normalization, sigma^2, m) for the symmetric law
/// p(z) = c |z|^(-gamma-1).
pub fn oracle_kernel_constants(gamma: f64) -> (f64, f64, f64) {
    let mut norm = Kahan::default();
    let mut var = Kahan::default();
    let mut mean = Kahan::default();
    for z in 1..=SERIES_CUTOFF {
        let zf = z as f64;
        let p = zf.powf(-gamma - 1.0);
        norm.add(p);
        var.add(p * zf * zf);
        mean.add(p * zf);
    }
    let edge = SERIES_CUTOFF as f64 + 0.5;
    let norm_tail = edge.powf(-gamma) / gamma;
    let var_tail = edge.powf(2.0 - gamma) / (gamma - 2.0);
    let mean_tail = edge.powf(1.0 - gamma) / (gamma - 1.0);
    let c = 0.5 / (norm.value() + norm_tail);
    let sigma_sq = 2.0 * c * (var.value() + var_tail);
    let m = c * (mean.value() + mean_tail);
    (c, sigma_sq, m)
}

/// Brute-force reservoir tail mass sum_{z >= x} p(z).
pub fn oracle_tail_mass(gamma: f64, x: u64) -> f64 {
    let (c, _, _) = oracle_kernel_constants(gamma);
    c * power_tail_sum(gamma + 1.0, x)
}

/// Same tail mass reusing a precomputed normalization (the constants sweep
/// is the expensive part).
pub fn oracle_tail_mass_with(c: f64, gamma: f64, x: u64) -> f64 {
    c * power_tail_sum(gamma + 1.0, x)
}

/// Adaptive Runge-Kutta-Fehlberg 4(5) for a scalar ODE y' = f(t, y).
pub fn rkf45(f: impl Fn(f64, f64) -> f64, t0: f64, y0: f64, t1: f64, tol: f64) -> f64 {
    assert!(t1 >= t0 && tol > 0.0);
    if t1 == t0 {
        return y0;
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = ((t1 - t0) / 64.0).min(1e-2).max(1e-12);
    let mut guard = 0u64;
    while t < t1 {
        guard += 1;
        assert!(guard < 100_000_000, "step-size collapse in rkf45");
        if t + h > t1 {
            h = t1 - t;
        }
        let k1 = h * f(t, y);
        let k2 = h * f(t + h / 4.0, y + k1 / 4.0);
        let k3 = h * f(t + 3.0 * h / 8.0, y + 3.0 * k1 / 32.0 + 9.0 * k2 / 32.0);
        let k4 = h * f(
            t + 12.0 * h / 13.0,
            y + 1932.0 * k1 / 2197.0 - 7200.0 * k2 / 2197.0 + 7296.0 * k3 / 2197.0,
        );
        let k5 = h * f(
            t + h,
            y + 439.0 * k1 / 216.0 - 8.0 * k2 + 3680.0 * k3 / 513.0 - 845.0 * k4 / 4104.0,
        );
        let k6 = h * f(
            t + h / 2.0,
            y - 8.0 * k1 / 27.0 + 2.0 * k2 - 3544.0 * k3 / 2565.0 + 1859.0 * k4 / 4104.0
                - 11.0 * k5 / 40.0,
        );
        let y4 = y + 25.0 * k1 / 216.0 + 1408.0 * k3 / 2565.0 + 2197.0 * k4 / 4104.0 - k5 / 5.0;
        let y5 = y + 16.0 * k1 / 135.0 + 6656.0 * k3 / 12825.0 + 28561.0 * k4 / 56430.0
            - 9.0 * k5 / 50.0
            + 2.0 * k6 / 55.0;
        let err = (y5 - y4).abs().max(1e-300);
        let scale = tol * y.abs().max(1.0);
        if err <= scale || h <= 1e-13 {
            t += h;
            y = y5;
        }
        let factor = (0.84 * (scale / err).powf(0.25)).clamp(0.1, 4.0);
        h = (h * factor).min(t1 - t + 1e-300).max(1e-13);
    }
    y
}

#[cfg(test)]
mod sanity {
    use super::*;

    #[test]
    fn rkf45_integrates_exponential_decay() {
        let y = rkf45(|_, y| -2.0 * y, 0.0, 1.0, 1.5, 1e-10);
        assert!((y - (-3.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn power_tail_matches_the_basel_value() {
        let s = power_tail_sum(2.0, 1);
        assert!((s - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-10);
    }
}
