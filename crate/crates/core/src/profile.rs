use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar field sampled on the cell-centered grid of (0, 1):
/// cell i (0-based) has center (i + 1/2) / m and width 1 / m.
///
/// Both macroscopic density profiles and binned particle data live on this
/// grid, so distances between them are plain vector norms weighted by the
/// cell width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    values: Vec<f64>,
}

impl Profile {
    pub fn new(values: Vec<f64>) -> Profile {
        assert!(!values.is_empty());
        Profile { values }
    }

    pub fn constant(m: usize, value: f64) -> Profile {
        assert!(m > 0);
        Profile { values: vec![value; m] }
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Profile {
        assert!(m > 0);
        Profile {
            values: (0..m).map(|i| f((i as f64 + 0.5) / m as f64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Midpoint-rule integral over (0, 1), i.e. the mean value.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation at q in (0, 1); outside the outermost cell
    /// centers the interpolant is continued linearly from the nearest two
    /// cells (second-order one-sided extrapolation).
    pub fn interp(&self, q: f64) -> f64 {
        let m = self.values.len();
        if m == 1 {
            return self.values[0];
        }
        let t = q * m as f64 - 0.5;
        let i = t.floor().clamp(0.0, (m - 2) as f64);
        let frac = t - i;
        let i = i as usize;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Value extrapolated to the left endpoint q = 0.
    pub fn boundary_left(&self) -> f64 {
        if self.values.len() == 1 {
            self.values[0]
        } else {
            1.5 * self.values[0] - 0.5 * self.values[1]
        }
    }

    /// Value extrapolated to the right endpoint q = 1.
    pub fn boundary_right(&self) -> f64 {
        let m = self.values.len();
        if m == 1 {
            self.values[0]
        } else {
            1.5 * self.values[m - 1] - 0.5 * self.values[m - 2]
        }
    }

    fn check_same_grid(&self, other: &Profile) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::argument(format!(
                "profiles live on different grids: {} vs {} cells",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// L1 distance over (0, 1) (cell-width weighted).
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.cell_width())
    }

    pub fn linf_distance(&self, other: &Profile) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_centers_tile_the_unit_interval() {
        let p = Profile::constant(4, 0.0);
        assert_eq!(p.cell_center(0), 0.125);
        assert_eq!(p.cell_center(3), 0.875);
        assert_eq!(p.cell_width(), 0.25);
    }

    #[test]
    fn interpolation_reproduces_linear_fields_exactly() {
        let p = Profile::from_fn(16, |q| 0.2 + 0.6 * q);
        for q in [0.0, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0] {
            assert!((p.interp(q) - (0.2 + 0.6 * q)).abs() < 1e-14);
        }
        assert!((p.boundary_left() - 0.2).abs() < 1e-14);
        assert!((p.boundary_right() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn midpoint_mean_is_second_order() {
        let exact = 1.0 / 3.0;
        let coarse = (Profile::from_fn(20, |q| q * q).mean() - exact).abs();
        let fine = (Profile::from_fn(40, |q| q * q).mean() - exact).abs();
        assert!(fine < coarse / 3.5);
    }

    #[test]
    fn distances_require_matching_grids() {
        let a = Profile::constant(8, 1.0);
        let b = Profile::constant(9, 1.0);
        assert!(a.l1_distance(&b).is_err());
        let c = Profile::constant(8, 0.75);
        assert!((a.l1_distance(&c).unwrap() - 0.25).abs() < 1e-15);
        assert!((a.linf_distance(&c).unwrap() - 0.25).abs() < 1e-15);
    }
}
