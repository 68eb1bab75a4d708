//! Seeded generators for random physical states, symplectic maps and the
//! label-keyed noise streams used by the shot simulator.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::linalg;
use crate::state::GaussianState;
use crate::symplectic::SymplecticGate;

pub type StreamRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for `(seed, domain, label)`.
///
/// The key is hashed, so nearby seeds and labels give unrelated streams and
/// the stream for a label does not depend on what else is drawn.
pub fn keyed(seed: u64, domain: &str, label: &str) -> StreamRng {
    let mut h = Sha256::new();
    h.update((domain.len() as u64).to_le_bytes());
    h.update(domain.as_bytes());
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// Random symplectic map built from elementary gates: a layer of local
/// squeezers between phase shifts, a beam splitter on every pair, then a
/// second local layer. Squeezing parameters are uniform in `[-max_r, max_r]`.
pub fn random_symplectic(n: usize, max_r: f64, rng: &mut StreamRng) -> Result<SymplecticGate> {
    let mut total = SymplecticGate::identity(n)?;
    let tau = std::f64::consts::TAU;
    let local = |rng: &mut StreamRng, total: &mut SymplecticGate| -> Result<()> {
        for m in 0..n {
            let g = SymplecticGate::rotation(rng.random_range(0.0..tau))
                .compose(&SymplecticGate::squeeze(rng.random_range(-max_r..=max_r)))?
                .compose(&SymplecticGate::rotation(rng.random_range(0.0..tau)))?;
            *total = g.embed(&[m], n)?.compose(total)?;
        }
        Ok(())
    };
    local(rng, &mut total)?;
    for i in 0..n {
        for j in i + 1..n {
            let b = SymplecticGate::beamsplitter(rng.random_range(0.0..tau));
            total = b.embed(&[i, j], n)?.compose(&total)?;
        }
    }
    local(rng, &mut total)?;
    Ok(total)
}

/// Random physical state `V = S·diag(ν₁,ν₁,…,νₙ,νₙ)·Sᵀ` with symplectic
/// eigenvalues `ν ∈ [½, 2]`, squeezing `|r| ≤ ½` and mean entries in `[-1, 1]`.
pub fn random_state(n: usize, rng: &mut StreamRng) -> Result<GaussianState> {
    let s = random_symplectic(n, 0.5, rng)?;
    let mut diag = DVector::zeros(2 * n);
    for k in 0..n {
        let v = rng.random_range(0.5..=2.0);
        diag[2 * k] = v;
        diag[2 * k + 1] = v;
    }
    let v = s.matrix() * DMatrix::from_diagonal(&diag) * s.matrix().transpose();
    let d = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..=1.0));
    GaussianState::new(d, linalg::symmetrize(&v))
}
