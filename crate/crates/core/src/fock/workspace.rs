//! Cached unitaries on a truncated Fock basis.
//!
//! Every unitary is the exponential of a real antisymmetric generator, so it
//! is stored as a real orthogonal matrix. Entries are keyed by the exact bit
//! pattern of their parameter, which keeps repeated oracle runs cheap
//! without changing any result.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use super::expm::expm_orthogonal;
use super::operator::{beamsplitter_sector_generator, displacement_generator, squeeze_generator};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Squeeze(u64, usize),
    Displace(u64, usize),
    Beamsplitter(u64, usize),
}

#[derive(Clone)]
enum Entry {
    Single(Arc<DMatrix<f64>>),
    Sectors(Arc<Vec<DMatrix<f64>>>),
}

/// Thread-safe cache shared by every oracle evaluation.
#[derive(Default)]
pub struct FockWorkspace {
    cache: Mutex<HashMap<Key, Entry>>,
}

impl FockWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn lookup(&self, key: Key) -> Option<Entry> {
        self.cache.lock().expect("cache lock").get(&key).cloned()
    }

    fn store(&self, key: Key, entry: Entry) {
        self.cache.lock().expect("cache lock").insert(key, entry);
    }

    /// `exp[(r/2)(a² − a†²)]` on `dim` levels. The generator only links
    /// levels of equal parity, so the two parity blocks are exponentiated
    /// separately.
    pub fn squeeze(&self, r: f64, dim: usize) -> Result<Arc<DMatrix<f64>>> {
        let key = Key::Squeeze(r.to_bits(), dim);
        if let Some(Entry::Single(m)) = self.lookup(key) {
            return Ok(m);
        }
        let g = squeeze_generator(r, dim);
        let mut u = DMatrix::zeros(dim, dim);
        for parity in 0..2 {
            let idx: Vec<usize> = (parity..dim).step_by(2).collect();
            if idx.is_empty() {
                continue;
            }
            let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])]);
            let e = expm_orthogonal(&block)?;
            for (i, &gi) in idx.iter().enumerate() {
                for (j, &gj) in idx.iter().enumerate() {
                    u[(gi, gj)] = e[(i, j)];
                }
            }
        }
        let u = Arc::new(u);
        self.store(key, Entry::Single(u.clone()));
        Ok(u)
    }

    /// `exp[x(a† − a)]`, the displacement by real `α = x`.
    pub fn displacement(&self, x: f64, dim: usize) -> Result<Arc<DMatrix<f64>>> {
        let key = Key::Displace(x.to_bits(), dim);
        if let Some(Entry::Single(m)) = self.lookup(key) {
            return Ok(m);
        }
        let u = Arc::new(expm_orthogonal(&displacement_generator(x, dim))?);
        self.store(key, Entry::Single(u.clone()));
        Ok(u)
    }

    /// Beam splitter `exp[θ(a₁†a₂ − a₁a₂†)]` as one orthogonal block per
    /// total photon number `s = 0 ..= 2(cutoff−1)`.
    pub fn beamsplitter(&self, theta: f64, cutoff: usize) -> Result<Arc<Vec<DMatrix<f64>>>> {
        let key = Key::Beamsplitter(theta.to_bits(), cutoff);
        if let Some(Entry::Sectors(m)) = self.lookup(key) {
            return Ok(m);
        }
        let mut blocks = Vec::with_capacity(2 * cutoff - 1);
        for s in 0..(2 * cutoff - 1) {
            let (lo, hi) = sector_range(s, cutoff);
            blocks.push(expm_orthogonal(&beamsplitter_sector_generator(theta, s, lo, hi))?);
        }
        let blocks = Arc::new(blocks);
        self.store(key, Entry::Sectors(blocks.clone()));
        Ok(blocks)
    }
}

/// Range of the first mode's level within sector `s`.
pub(crate) fn sector_range(s: usize, cutoff: usize) -> (usize, usize) {
    (s.saturating_sub(cutoff - 1), s.min(cutoff - 1))
}
