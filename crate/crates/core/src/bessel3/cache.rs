use std::collections::HashMap;
use std::sync::RwLock;

use super::{bessel_kernel, KernelValue, Sign, SpectralParams};
use crate::error::Result;

type Key = (u64, Sign, [u64; 9], u32);

/// Memoized kernel values, safe for concurrent readers and writers.
#[derive(Debug, Default)]
pub struct KernelCache {
    map: RwLock<HashMap<Key, KernelValue>>,
}

impl KernelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(&self, x: f64, sign: Sign, params: &SpectralParams, precision: u32) -> Result<KernelValue> {
        let key = (x.to_bits(), sign, params.key(), precision);
        if let Some(v) = self.map.read().expect("kernel cache poisoned").get(&key) {
            return Ok(*v);
        }
        let value = bessel_kernel(x, sign, params, precision)?;
        self.map
            .write()
            .expect("kernel cache poisoned")
            .entry(key)
            .or_insert(value);
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("kernel cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    #[test]
    fn concurrent_lookups_agree_with_direct_evaluation() {
        let cache = KernelCache::new();
        let p = SpectralParams::trivial();
        let xs = [0.5, 2.0, 9.0, 0.5, 2.0, 9.0];
        let values: Vec<KernelValue> = xs
            .par_iter()
            .map(|&x| cache.get_or_compute(x, Sign::Plus, &p, 20).unwrap())
            .collect();
        assert_eq!(cache.len(), 3);
        for (x, v) in xs.iter().zip(&values) {
            assert_eq!(bessel_kernel(*x, Sign::Plus, &p, 20).unwrap().value, v.value);
        }
    }
}
