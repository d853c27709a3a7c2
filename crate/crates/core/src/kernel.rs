use rand::Rng;

use crate::alias::AliasTable;
use crate::error::{Error, Result};

/// Cutoff for the series defining the second and first moments.
const Z_MOMENT: usize = 1_000_000;
/// Cutoff for the tabulated suffix sums backing the per-site tail rates.
const Z_TABLE: usize = 100_000;
/// Largest jump magnitude covered by the alias table; the (tiny) remaining
/// mass is drawn from the analytic tail.
const Z_ALIAS: usize = 100_000;

const DEFAULT_TOL: f64 = 1e-10;

/// Midpoint-rule estimate of sum_{y >= x} y^{-s} for s > 1 and real x >= 1,
/// together with a rigorous truncation bound. The estimate integrates
/// t^{-s} from x - 1/2; the bound controls the midpoint error of every
/// omitted unit cell.
fn tail_sum(x: f64, s: f64) -> (f64, f64) {
    let a = x - 0.5;
    let value = a.powf(1.0 - s) / (s - 1.0);
    let bound = s / 24.0 * a.powf(-s - 1.0) * (1.0 + (s + 1.0) / a);
    (value, bound)
}

/// The symmetric long-jump law p(z) = c_gamma |z|^{-gamma-1}, p(0) = 0.
///
/// All derived quantities (normalization, moments, tail sums) come from
/// truncated series with analytic integral tail corrections; the truncation
/// error is certified below the kernel tolerance at construction time.
/// Closed forms in terms of zeta values are deliberately not used here, so
/// tests can hold them up as independent witnesses.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    gamma: f64,
    tol: f64,
    c_gamma: f64,
    sigma_sq: f64,
    mean_m: f64,
    /// suffix_p[x] = sum_{y >= x} y^{-gamma-1}, for 1 <= x <= Z_TABLE + 1.
    suffix_p: Vec<f64>,
    /// suffix_zp[x] = sum_{y >= x} y^{-gamma}, same index range.
    suffix_zp: Vec<f64>,
    alias: AliasTable,
    /// Probability that a jump draw falls beyond the alias table.
    tail_mass: f64,
}

impl JumpKernel {
    pub fn new(gamma: f64) -> Result<JumpKernel> {
        JumpKernel::with_tolerance(gamma, DEFAULT_TOL)
    }

    pub fn with_tolerance(gamma: f64, tol: f64) -> Result<JumpKernel> {
        if !(gamma > 2.0) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "jump exponent gamma must exceed 2, got {gamma}"
            )));
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::argument(format!(
                "kernel tolerance must be a positive real, got {tol}"
            )));
        }
        let s = gamma + 1.0;

        let mut suffix_p = vec![0.0; Z_TABLE + 2];
        let mut suffix_zp = vec![0.0; Z_TABLE + 2];
        let (tp, tp_err) = tail_sum((Z_TABLE + 1) as f64, s);
        let (tzp, tzp_err) = tail_sum((Z_TABLE + 1) as f64, gamma);
        suffix_p[Z_TABLE + 1] = tp;
        suffix_zp[Z_TABLE + 1] = tzp;
        for x in (1..=Z_TABLE).rev() {
            let pz = (x as f64).powf(-s);
            suffix_p[x] = suffix_p[x + 1] + pz;
            suffix_zp[x] = suffix_zp[x + 1] + pz * x as f64;
        }

        // Normalize off the same suffix table that serves the tail queries,
        // so that mass identities like 2 * mass_ge(1) = 1 hold exactly.
        let half_mass = suffix_p[1];
        let c_gamma = 1.0 / (2.0 * half_mass);

        // Second and first moments need the longer cutoff: their series
        // decay as z^{1-gamma} and z^{-gamma}.
        let mut sum_z2p = 0.0;
        let mut sum_zp = 0.0;
        for z in (1..=Z_MOMENT).rev() {
            let zf = z as f64;
            let pz = zf.powf(-s);
            sum_z2p += pz * zf * zf;
            sum_zp += pz * zf;
        }
        let (t2, t2_err) = tail_sum((Z_MOMENT + 1) as f64, gamma - 1.0);
        let (t1, t1_err) = tail_sum((Z_MOMENT + 1) as f64, gamma);
        let sigma_sq = 2.0 * c_gamma * (sum_z2p + t2);
        let mean_m = c_gamma * (sum_zp + t1);

        let rel = [
            tp_err / half_mass,
            tzp_err / suffix_zp[1],
            t2_err / (sum_z2p + t2),
            t1_err / (sum_zp + t1),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        if rel > tol {
            return Err(Error::numeric(format!(
                "series truncation bound {rel:.3e} exceeds requested tolerance {tol:.3e} \
                 for gamma = {gamma}"
            )));
        }

        let weights: Vec<f64> = (1..=Z_ALIAS).map(|z| (z as f64).powf(-s)).collect();
        let alias = AliasTable::new(&weights);
        let tail_mass = 2.0 * c_gamma * suffix_p[Z_ALIAS + 1];

        Ok(JumpKernel {
            gamma,
            tol,
            c_gamma,
            sigma_sq,
            mean_m,
            suffix_p,
            suffix_zp,
            alias,
            tail_mass,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Normalization constant c_gamma.
    pub fn normalization(&self) -> f64 {
        self.c_gamma
    }

    /// Jump probability p(z).
    pub fn prob(&self, z: i64) -> f64 {
        if z == 0 {
            0.0
        } else {
            self.c_gamma * (z.unsigned_abs() as f64).powf(-self.gamma - 1.0)
        }
    }

    /// sigma^2 = sum_z z^2 p(z), the jump variance.
    pub fn variance(&self) -> f64 {
        self.sigma_sq
    }

    /// m = sum_{z >= 1} z p(z), the one-sided first moment.
    pub fn mean_m(&self) -> f64 {
        self.mean_m
    }

    fn suffix_p_at(&self, z: usize) -> f64 {
        if z <= Z_TABLE + 1 {
            self.suffix_p[z]
        } else {
            tail_sum(z as f64, self.gamma + 1.0).0
        }
    }

    fn suffix_zp_at(&self, z: usize) -> f64 {
        if z <= Z_TABLE + 1 {
            self.suffix_zp[z]
        } else {
            tail_sum(z as f64, self.gamma).0
        }
    }

    /// sum_{y >= z} p(y) for z >= 1.
    pub fn mass_ge(&self, z: usize) -> f64 {
        assert!(z >= 1, "mass_ge is defined for z >= 1");
        self.c_gamma * self.suffix_p_at(z)
    }

    /// sum_{y >= z} y p(y) for z >= 1.
    pub fn first_moment_ge(&self, z: usize) -> f64 {
        assert!(z >= 1, "first_moment_ge is defined for z >= 1");
        self.c_gamma * self.suffix_zp_at(z)
    }

    fn check_site(&self, x: usize, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::argument(format!("lattice size must be >= 2, got {n}")));
        }
        if x < 1 || x > n - 1 {
            return Err(Error::argument(format!(
                "site {x} outside the bulk 1..={} of a lattice of size {n}",
                n - 1
            )));
        }
        Ok(())
    }

    /// Rate mass a bulk site x receives from the left reservoir:
    /// r^-_N(x/N) = sum_{y <= 0} p(x - y) = sum_{y >= x} p(y).
    pub fn tail_left(&self, x: usize, n: usize) -> Result<f64> {
        self.check_site(x, n)?;
        Ok(self.mass_ge(x))
    }

    /// Rate mass from the right reservoir:
    /// r^+_N(x/N) = sum_{y >= N} p(x - y) = sum_{y >= N - x} p(y).
    pub fn tail_right(&self, x: usize, n: usize) -> Result<f64> {
        self.check_site(x, n)?;
        Ok(self.mass_ge(n - x))
    }

    /// First-moment tail sum_{y >= x} y p(y); summed over the bulk these
    /// converge to sigma^2 / 2.
    pub fn theta_minus(&self, x: usize) -> Result<f64> {
        if x < 1 {
            return Err(Error::argument("theta_minus is defined for x >= 1"));
        }
        Ok(self.first_moment_ge(x))
    }

    /// Mirror tail sum_{y >= N - x} y p(y).
    pub fn theta_plus(&self, x: usize, n: usize) -> Result<f64> {
        self.check_site(x, n)?;
        Ok(self.first_moment_ge(n - x))
    }

    /// Draw a jump displacement z (never 0) from p.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let magnitude = if u < self.tail_mass {
            // Rescale u to a uniform within the tail and invert the analytic
            // tail law P(|Z| > x) ~ (x / (Z_ALIAS + 1/2))^{-gamma}.
            let v = (u / self.tail_mass).min(1.0 - f64::EPSILON);
            let x = (Z_ALIAS as f64 + 0.5) * (1.0 - v).powf(-1.0 / self.gamma);
            (x + 0.5).floor() as i64
        } else {
            self.alias.sample(rng) as i64 + 1
        };
        if rng.gen::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}
