use rand::Rng;

/// Walker/Vose alias table for O(1) draws from a fixed discrete law.
#[derive(Debug, Clone)]
pub(crate) struct AliasTable {
    accept: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub(crate) fn new(weights: &[f64]) -> AliasTable {
        let n = weights.len();
        assert!(n > 0 && n <= u32::MAX as usize);
        let total: f64 = weights.iter().rev().sum();
        assert!(total > 0.0);
        let mut accept = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let scale = n as f64 / total;
        let mut small = Vec::new();
        let mut large = Vec::new();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        for (i, &w) in scaled.iter().enumerate() {
            if w < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while !small.is_empty() && !large.is_empty() {
            let s = small.pop().unwrap();
            let l = large.pop().unwrap();
            accept[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            accept[i] = 1.0;
            alias[i] = i as u32;
        }
        AliasTable { accept, alias }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.accept.len());
        if rng.gen::<f64>() < self.accept[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}
