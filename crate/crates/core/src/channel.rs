//! Gaussian channels `(A, B)`: `d → Ad`, `V → AVAᵀ + B/2`.

use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::random;
use crate::state::{GaussianState, Moments, SYMMETRY_TOL};
use crate::symplectic::omega_matrix;

/// Smallest tolerated eigenvalue in both positivity conditions.
pub const CP_FLOOR: f64 = -1e-10;

/// Margin used by the random channel generator.
pub const RANDOM_CP_MARGIN: f64 = 0.05;

/// Eigenvalue diagnostics for a candidate `(A, B)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpDiagnostic {
    /// Minimum eigenvalue of `B`.
    pub noise_min_eigenvalue: f64,
    /// Minimum eigenvalue of the Hermitian matrix `B + iΩ − iAΩAᵀ`.
    pub cp_min_eigenvalue: f64,
    pub is_cp: bool,
}

/// Minimum eigenvalue of `B + iΩ − iAΩAᵀ`.
pub fn cp_min_eigenvalue(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let om = omega_matrix(a.nrows() / 2);
    let im = &om - a * &om * a.transpose();
    linalg::min_eigenvalue_hermitian(&linalg::symmetrize(b), &im)
}

/// Checks both positivity conditions. `B` must be symmetric.
pub fn is_cp(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<CpDiagnostic> {
    check_pair(a, b)?;
    let asymmetry = linalg::asymmetry(b);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric {
            what: "noise matrix B",
            asymmetry,
        });
    }
    Ok(diagnose(a, b))
}

/// Diagnostics without the symmetry gate, for estimates that are
/// symmetrized but otherwise unconstrained.
pub fn diagnose(a: &DMatrix<f64>, b: &DMatrix<f64>) -> CpDiagnostic {
    let noise_min_eigenvalue = linalg::min_eigenvalue_symmetric(&linalg::symmetrize(b));
    let cp_min_eigenvalue = cp_min_eigenvalue(a, b);
    CpDiagnostic {
        noise_min_eigenvalue,
        cp_min_eigenvalue,
        is_cp: noise_min_eigenvalue >= CP_FLOOR && cp_min_eigenvalue >= CP_FLOOR,
    }
}

fn check_pair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    let dim = a.nrows();
    if dim == 0 || dim % 2 != 0 || a.ncols() != dim {
        return Err(Error::InvalidParameter(format!(
            "A must be square with positive even size, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if b.nrows() != dim || b.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.nrows().max(b.ncols()),
        });
    }
    if !linalg::all_finite(a) || !linalg::all_finite(b) {
        return Err(Error::NonFinite("channel matrices"));
    }
    Ok(())
}

/// A completely positive Gaussian channel on `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianChannel {
    n: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl GaussianChannel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        let diag = is_cp(&a, &b)?;
        if diag.noise_min_eigenvalue < CP_FLOOR {
            return Err(Error::NoiseNotPositive {
                min_eigenvalue: diag.noise_min_eigenvalue,
            });
        }
        if diag.cp_min_eigenvalue < CP_FLOOR {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: diag.cp_min_eigenvalue,
            });
        }
        Ok(Self {
            n: a.nrows() / 2,
            a,
            b: linalg::symmetrize(&b),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        nonzero(n)?;
        Ok(Self {
            n,
            a: DMatrix::identity(2 * n, 2 * n),
            b: DMatrix::zeros(2 * n, 2 * n),
        })
    }

    /// Pure loss with transmissivity `eta ∈ [0, 1]`.
    pub fn attenuator(n: usize, eta: f64) -> Result<Self> {
        nonzero(n)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "attenuator transmissivity must lie in [0, 1], got {eta}"
            )));
        }
        Self::new(
            DMatrix::identity(2 * n, 2 * n) * eta.sqrt(),
            DMatrix::identity(2 * n, 2 * n) * (1.0 - eta),
        )
    }

    /// Phase-insensitive amplifier with amplitude gain `g ≥ 1`.
    pub fn amplifier(n: usize, g: f64) -> Result<Self> {
        nonzero(n)?;
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplifier gain must be at least 1, got {g}"
            )));
        }
        Self::new(
            DMatrix::identity(2 * n, 2 * n) * g,
            DMatrix::identity(2 * n, 2 * n) * (g * g - 1.0),
        )
    }

    /// Additive classical noise of strength `c ≥ 0`.
    pub fn classical_noise(n: usize, c: f64) -> Result<Self> {
        nonzero(n)?;
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "classical noise strength must be non-negative, got {c}"
            )));
        }
        Self::new(
            DMatrix::identity(2 * n, 2 * n),
            DMatrix::identity(2 * n, 2 * n) * c,
        )
    }

    /// Random channel: `A` uniform in `[-1, 1]`, then `B` is the smallest
    /// multiple of the identity that makes the pair CP, plus `margin`, plus a
    /// random positive semidefinite part.
    pub fn random(n: usize, seed: u64, margin: f64) -> Result<Self> {
        nonzero(n)?;
        if !(margin >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "CP margin must be non-negative, got {margin}"
            )));
        }
        let dim = 2 * n;
        let mut rng = random::keyed(seed, "random-channel", &n.to_string());
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..=1.0));
        let zero = DMatrix::zeros(dim, dim);
        let shift = (-cp_min_eigenvalue(&a, &zero)).max(0.0) + margin;
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.5..=0.5));
        let b = DMatrix::identity(dim, dim) * shift + linalg::symmetrize(&(&g * g.transpose()));
        Self::new(a, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn diagnostic(&self) -> CpDiagnostic {
        diagnose(&self.a, &self.b)
    }

    pub fn apply_moments(&self, m: &Moments) -> Result<Moments> {
        if m.d.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: m.d.len(),
            });
        }
        Ok(Moments {
            d: &self.a * &m.d,
            v: linalg::symmetrize(&(&self.a * &m.v * self.a.transpose() + &self.b * 0.5)),
        })
    }

    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        GaussianState::from_moments(self.apply_moments(&state.moments())?)
    }

    /// Output moments for the coherent probe with mean `probe`.
    pub fn probe_output(&self, probe: &DVector<f64>) -> Result<GaussianState> {
        if probe.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: probe.len(),
            });
        }
        let v = (&self.a * self.a.transpose() + &self.b) * 0.5;
        GaussianState::new(&self.a * probe, linalg::symmetrize(&v))
    }
}

fn nonzero(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::ZeroModes)
    } else {
        Ok(())
    }
}

/// Named test channels with the default parameters used across the suite.
pub fn catalog(n: usize, random_seeds: &[u64]) -> Result<Vec<(String, GaussianChannel)>> {
    let mut out = vec![
        ("identity".to_string(), GaussianChannel::identity(n)?),
        ("attenuator(0.5)".to_string(), GaussianChannel::attenuator(n, 0.5)?),
        ("amplifier(1.2)".to_string(), GaussianChannel::amplifier(n, 1.2)?),
        (
            "classical-noise(0.3)".to_string(),
            GaussianChannel::classical_noise(n, 0.3)?,
        ),
    ];
    for &seed in random_seeds {
        out.push((
            format!("random(seed={seed})"),
            GaussianChannel::random(n, seed, RANDOM_CP_MARGIN)?,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::state::PhotonStatistics;
    use crate::symplectic::DisplacementVector;

    #[test]
    fn identity_channel_is_identity_map() {
        let ch = GaussianChannel::identity(2).unwrap();
        let st = random::random_state(2, &mut random::seeded(3)).unwrap();
        let out = ch.apply(&st).unwrap();
        assert!((out.covariance() - st.covariance()).amax() < 1e-15);
        assert_eq!(out.mean(), st.mean());
        let d = is_cp(ch.a(), ch.b()).unwrap();
        assert!(d.is_cp);
        assert!(d.cp_min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn attenuator_keeps_coherent_covariance() {
        let ch = GaussianChannel::attenuator(1, 0.5).unwrap();
        let coh = GaussianState::coherent(&DisplacementVector::from_slice(&[1.0, 0.0]).unwrap());
        let out = ch.apply(&coh).unwrap();
        assert!((out.mean()[0] - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(out.mean()[1], 0.0);
        assert!((out.covariance() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        // Hermitian part 0.5·I + 0.5·iΩ has eigenvalues {0, 1}
        assert!(ch.diagnostic().cp_min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn noiseless_amplification_is_not_cp() {
        let a = DMatrix::identity(2, 2) * 2.0;
        let b = DMatrix::zeros(2, 2);
        let d = is_cp(&a, &b).unwrap();
        assert!(!d.is_cp);
        assert!((d.cp_min_eigenvalue + 3.0).abs() < 1e-12);
        assert!(matches!(
            GaussianChannel::new(a, b),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn invalid_inputs_are_named() {
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.0, 1.0]);
        assert!(matches!(
            is_cp(&DMatrix::identity(2, 2), &skew),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            GaussianChannel::attenuator(1, 1.5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            GaussianChannel::amplifier(1, 0.9),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            GaussianChannel::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2) * -0.1),
            Err(Error::NoiseNotPositive { .. })
        ));
    }

    #[test]
    fn amplifier_at_unit_gain_is_identity() {
        assert_eq!(
            GaussianChannel::amplifier(2, 1.0).unwrap(),
            GaussianChannel::identity(2).unwrap()
        );
    }

    #[test]
    fn catalog_is_cp_and_random_is_reproducible() {
        for n in 1..=3 {
            for (name, ch) in catalog(n, &[1, 2, 3, 4]).unwrap() {
                let d = ch.diagnostic();
                assert!(d.is_cp, "{name}: {d:?}");
            }
            let r1 = GaussianChannel::random(n, 9, RANDOM_CP_MARGIN).unwrap();
            let r2 = GaussianChannel::random(n, 9, RANDOM_CP_MARGIN).unwrap();
            assert_eq!(r1, r2);
            assert!(r1.diagnostic().cp_min_eigenvalue >= RANDOM_CP_MARGIN - 1e-10);
        }
    }

    #[test]
    fn probe_outputs_share_covariance() {
        let ch = GaussianChannel::random(2, 5, RANDOM_CP_MARGIN).unwrap();
        let mut prev: Option<DMatrix<f64>> = None;
        for k in 0..4 {
            let e = DisplacementVector::unit(2, k).unwrap();
            let via_apply = ch.apply(&GaussianState::coherent(&e)).unwrap();
            let direct = ch.probe_output(e.as_vector()).unwrap();
            assert!((via_apply.covariance() - direct.covariance()).amax() < 1e-14);
            assert!((via_apply.mean() - ch.a().column(k)).amax() < 1e-15);
            if let Some(p) = &prev {
                assert!((p - direct.covariance()).amax() < 1e-15);
            }
            prev = Some(direct.covariance().clone());
        }
    }
}
