/// Fenwick-tree-backed table of per-site event rates.
///
/// Supports O(log n) point updates and O(log n) sampling of a site
/// proportionally to its current rate. Exact per-site values are kept in a
/// plain side array so that updates assign (rather than accumulate) and the
/// table cannot drift away from the rates it was told to store.
#[derive(Debug, Clone)]
pub struct RateIndex {
    tree: Vec<f64>,
    rates: Vec<f64>,
}

impl RateIndex {
    pub fn new(n: usize) -> Self {
        RateIndex {
            tree: vec![0.0; n + 1],
            rates: vec![0.0; n],
        }
    }

    pub fn from_rates(rates: &[f64]) -> Self {
        let mut idx = RateIndex::new(rates.len());
        for (i, &r) in rates.iter().enumerate() {
            idx.set(i, r);
        }
        idx
    }

    pub fn get(&self, i: usize) -> f64 {
        self.rates[i]
    }

    pub fn set(&mut self, i: usize, rate: f64) {
        debug_assert!(rate >= 0.0 && rate.is_finite());
        let delta = rate - self.rates[i];
        self.rates[i] = rate;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    /// Sum of all rates. Uses the tree, so it is exact up to the rounding of
    /// the point updates applied so far.
    pub fn total(&self) -> f64 {
        self.prefix(self.rates.len())
    }

    /// Sum of rates at indices < i.
    pub fn prefix(&self, i: usize) -> f64 {
        let mut s = 0.0;
        let mut j = i;
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    /// Index i with prefix(i) <= target < prefix(i+1), i.e. the site selected
    /// by a rate-proportional draw with `target` uniform on [0, total).
    /// Zero-rate sites are never returned for targets strictly inside the
    /// total mass; floating-point edge cases are clamped to the nearest site
    /// with positive rate.
    pub fn sample(&self, target: f64) -> usize {
        let n = self.rates.len();
        debug_assert!(target >= 0.0);
        let mut idx = 0usize;
        let mut rem = target;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = idx + step;
            if next < self.tree.len() && self.tree[next] <= rem {
                rem -= self.tree[next];
                idx = next;
            }
            step >>= 1;
        }
        // idx now counts the sites whose cumulative rate is <= target.
        let mut site = idx.min(n - 1);
        while self.rates[site] == 0.0 && site + 1 < n {
            site += 1;
        }
        while self.rates[site] == 0.0 && site > 0 {
            site -= 1;
        }
        site
    }
}
