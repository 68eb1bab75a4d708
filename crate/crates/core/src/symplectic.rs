//! Phase-space linear algebra: the symplectic form, elementary Gaussian gates
//! and their embeddings into n-mode phase space.
//!
//! Quadratures are ordered `(q₁, p₁, …, qₙ, pₙ)` everywhere, with ħ = 1.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Frobenius tolerance on `SΩSᵀ - Ω` for constructed gates.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// The block-diagonal commutation matrix `Ω = ⊕ ω`, `ω = [[0, 1], [-1, 0]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: DMatrix<f64>,
}

pub fn omega(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::ZeroModes);
    }
    Ok(SymplecticForm {
        n,
        matrix: omega_matrix(n),
    })
}

pub(crate) fn omega_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

impl SymplecticForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Which quadrature of a mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quadrature::Q => write!(f, "q"),
            Quadrature::P => write!(f, "p"),
        }
    }
}

/// A phase-space displacement `(q₁, p₁, …, qₙ, pₙ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementVector(DVector<f64>);

impl DisplacementVector {
    pub fn new(r: DVector<f64>) -> Result<Self> {
        if r.is_empty() || r.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "displacement length {} is not a positive even number",
                r.len()
            )));
        }
        if !r.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("displacement vector"));
        }
        Ok(Self(r))
    }

    pub fn from_slice(r: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(r))
    }

    /// Displacement by `amount` along one quadrature of one mode.
    pub fn along(n: usize, mode: usize, axis: Quadrature, amount: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        if mode >= n {
            return Err(Error::ModeOutOfRange { index: mode, n });
        }
        let mut r = DVector::zeros(2 * n);
        r[2 * mode + axis.offset()] = amount;
        Self::new(r)
    }

    /// Unit vector `e_j` (zero-based `index`) in a 2n-dimensional phase space.
    pub fn unit(n: usize, index: usize) -> Result<Self> {
        if index >= 2 * n {
            return Err(Error::ModeOutOfRange { index: index / 2, n });
        }
        let mut r = DVector::zeros(2 * n);
        r[index] = 1.0;
        Self::new(r)
    }

    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

/// Provenance of a gate matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GateLabel {
    Identity,
    Rotation { phi: f64 },
    Squeeze { r: f64 },
    BeamSplitter { theta: f64 },
    PGate { r: f64, phi: f64 },
    QGate { r: f64, phi: f64 },
    Embedded { inner: Box<GateLabel>, modes: Vec<usize> },
    Product { factors: Vec<GateLabel> },
    Custom { name: String },
}

/// A real symplectic matrix acting on the quadratures of `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticGate {
    n: usize,
    matrix: DMatrix<f64>,
    label: GateLabel,
}

impl SymplecticGate {
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self {
            n,
            matrix: DMatrix::identity(2 * n, 2 * n),
            label: GateLabel::Identity,
        })
    }

    /// Wraps an arbitrary matrix after checking it is symplectic.
    pub fn from_matrix(matrix: DMatrix<f64>, label: GateLabel) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 || matrix.nrows() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "gate matrix must be square with positive even size, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !linalg::all_finite(&matrix) {
            return Err(Error::NonFinite("gate matrix"));
        }
        let gate = Self {
            n: matrix.nrows() / 2,
            matrix,
            label,
        };
        gate.verify(SYMPLECTIC_TOL)?;
        Ok(gate)
    }

    fn trusted(matrix: DMatrix<f64>, label: GateLabel) -> Self {
        Self {
            n: matrix.nrows() / 2,
            matrix,
            label,
        }
    }

    /// Phase rotation `R(φ) = [[cos φ, sin φ], [-sin φ, cos φ]]`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self::trusted(
            DMatrix::from_row_slice(2, 2, &[c, s, -s, c]),
            GateLabel::Rotation { phi },
        )
    }

    /// Single-mode squeezer `S(r) = diag(e^{-r}, e^{r})`.
    pub fn squeeze(r: f64) -> Self {
        Self::trusted(
            DMatrix::from_row_slice(2, 2, &[(-r).exp(), 0.0, 0.0, r.exp()]),
            GateLabel::Squeeze { r },
        )
    }

    /// Two-mode beam splitter with transmittivity `cos²θ`.
    pub fn beamsplitter(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::zeros(4, 4);
        for k in 0..2 {
            m[(k, k)] = c;
            m[(k, k + 2)] = s;
            m[(k + 2, k)] = -s;
            m[(k + 2, k + 2)] = c;
        }
        Self::trusted(m, GateLabel::BeamSplitter { theta })
    }

    /// Single-mode probe gate: phase shift followed by squeezing, `S(r)·R(φ)`.
    pub fn p_gate(r: f64, phi: f64) -> Self {
        let m = Self::squeeze(r).matrix * Self::rotation(phi).matrix;
        Self::trusted(m, GateLabel::PGate { r, phi })
    }

    /// Two-mode probe gate `(S(r)⊕I)·B(π/4)·(R(φ)⊕I)`.
    pub fn q_gate(r: f64, phi: f64) -> Self {
        let id = DMatrix::identity(2, 2);
        let squeeze = linalg::direct_sum(&Self::squeeze(r).matrix, &id);
        let rotate = linalg::direct_sum(&Self::rotation(phi).matrix, &id);
        let bs = Self::beamsplitter(std::f64::consts::FRAC_PI_4).matrix;
        Self::trusted(squeeze * bs * rotate, GateLabel::QGate { r, phi })
    }

    /// Places this gate on the listed modes of an `n`-mode system, acting as
    /// the identity on every other mode. `modes[k]` receives local mode `k`.
    pub fn embed(&self, modes: &[usize], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        if modes.len() != self.n {
            return Err(Error::ModeListLength {
                gate_modes: self.n,
                listed: modes.len(),
            });
        }
        for (k, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::ModeOutOfRange { index: m, n });
            }
            if modes[..k].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
        }
        let mut out = DMatrix::identity(2 * n, 2 * n);
        for (a, &ma) in modes.iter().enumerate() {
            for (b, &mb) in modes.iter().enumerate() {
                for x in 0..2 {
                    for y in 0..2 {
                        out[(2 * ma + x, 2 * mb + y)] = self.matrix[(2 * a + x, 2 * b + y)];
                    }
                }
            }
        }
        Ok(Self::trusted(
            out,
            GateLabel::Embedded {
                inner: Box::new(self.label.clone()),
                modes: modes.to_vec(),
            },
        ))
    }

    /// Matrix product `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: 2 * other.n,
            });
        }
        Ok(Self::trusted(
            &self.matrix * &other.matrix,
            GateLabel::Product {
                factors: vec![self.label.clone(), other.label.clone()],
            },
        ))
    }

    /// Frobenius norm of `SΩSᵀ - Ω`.
    pub fn symplectic_residual(&self) -> f64 {
        let om = omega_matrix(self.n);
        (&self.matrix * &om * self.matrix.transpose() - om).norm()
    }

    pub fn verify(&self, tol: f64) -> Result<()> {
        let residual = self.symplectic_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NotSymplectic { residual })
        }
    }

    /// `SᵀS`, the matrix that enters every photon-number expectation.
    pub fn gram(&self) -> DMatrix<f64> {
        self.matrix.transpose() * &self.matrix
    }

    /// Symplectic inverse `-Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let om = omega_matrix(self.n);
        Self::trusted(
            -(&om * self.matrix.transpose() * &om),
            GateLabel::Custom {
                name: "inverse".into(),
            },
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn label(&self) -> &GateLabel {
        &self.label
    }
}

/// Squeezing parameter `r` for a squeezing gain `e^r`.
pub fn squeeze_from_gain(gain: f64) -> f64 {
    gain.ln()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    use proptest::prelude::*;

    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).amax() <= tol
    }

    #[test]
    fn omega_blocks() {
        let w = omega(1).unwrap();
        assert_eq!(w.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let w2 = omega(2).unwrap();
        let m = w2.matrix();
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(3, 2)], -1.0);
        assert_eq!(m[(0, 3)], 0.0);
        assert_eq!(m[(1, 2)], 0.0);
        for n in 1..5 {
            let m = omega(n).unwrap().matrix().clone();
            assert_eq!(&m * &m, -DMatrix::<f64>::identity(2 * n, 2 * n));
            assert_eq!(m.transpose(), -&m);
            assert!((m.determinant() - 1.0).abs() < 1e-14);
        }
        assert_eq!(omega(0), Err(Error::ZeroModes));
    }

    #[test]
    fn elementary_gates_at_reference_points() {
        let id2 = DMatrix::<f64>::identity(2, 2);
        assert_eq!(SymplecticGate::rotation(0.0).matrix(), &id2);
        assert!(close(
            SymplecticGate::rotation(FRAC_PI_2).matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            1e-16
        ));
        let rr = SymplecticGate::rotation(0.7)
            .compose(&SymplecticGate::rotation(-0.7))
            .unwrap();
        assert!(close(rr.matrix(), &id2, 1e-15));

        assert_eq!(SymplecticGate::squeeze(0.0).matrix(), &id2);
        let s = SymplecticGate::squeeze(squeeze_from_gain(SQRT_2));
        assert!(close(
            s.matrix(),
            &DMatrix::from_row_slice(2, 2, &[1.0 / SQRT_2, 0.0, 0.0, SQRT_2]),
            1e-15
        ));

        assert_eq!(
            SymplecticGate::beamsplitter(0.0).matrix(),
            &DMatrix::<f64>::identity(4, 4)
        );
        let b = SymplecticGate::beamsplitter(FRAC_PI_4);
        let h = 1.0 / SQRT_2;
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[h, 0.0, h, 0.0, 0.0, h, 0.0, h, -h, 0.0, h, 0.0, 0.0, -h, 0.0, h],
        );
        assert!(close(b.matrix(), &expected, 1e-15));
        assert!(b.symplectic_residual() < 1e-15);
    }

    #[test]
    fn embedding_places_blocks() {
        let id = SymplecticGate::identity(1).unwrap();
        assert_eq!(
            id.embed(&[0], 3).unwrap().matrix(),
            &DMatrix::<f64>::identity(6, 6)
        );
        let r = 0.4;
        let e = SymplecticGate::squeeze(r).embed(&[1], 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0,
            1.0,
            (-r).exp(),
            r.exp(),
        ]));
        assert!(close(e.matrix(), &expected, 1e-16));
    }

    #[test]
    fn embedding_matches_permutation_conjugation() {
        // oracle: permute modes (0, 2, 1) so the targets come first, act with
        // B ⊕ I, permute back
        let b = SymplecticGate::beamsplitter(FRAC_PI_4);
        let e = b.embed(&[0, 2], 3).unwrap();
        let order = [0usize, 2, 1];
        let mut perm = DMatrix::<f64>::zeros(6, 6);
        for (new, &old) in order.iter().enumerate() {
            perm[(2 * new, 2 * old)] = 1.0;
            perm[(2 * new + 1, 2 * old + 1)] = 1.0;
        }
        let block = linalg::direct_sum(b.matrix(), &DMatrix::identity(2, 2));
        let dense = perm.transpose() * block * &perm;
        assert!(close(e.matrix(), &dense, 1e-15));
        // mode 1 untouched
        for k in 0..6 {
            assert_eq!(e.matrix()[(2, k)], if k == 2 { 1.0 } else { 0.0 });
            assert_eq!(e.matrix()[(k, 3)], if k == 3 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn embedding_rejects_bad_mode_lists() {
        let b = SymplecticGate::beamsplitter(0.3);
        assert_eq!(b.embed(&[1, 1], 3), Err(Error::DuplicateMode(1)));
        assert_eq!(
            b.embed(&[0, 3], 3),
            Err(Error::ModeOutOfRange { index: 3, n: 3 })
        );
        assert!(matches!(
            b.embed(&[0], 3),
            Err(Error::ModeListLength { .. })
        ));
    }

    #[test]
    fn q_gate_without_squeezing_is_balanced_beamsplitter() {
        let q = SymplecticGate::q_gate(0.0, 0.0);
        assert!(close(
            q.matrix(),
            SymplecticGate::beamsplitter(FRAC_PI_4).matrix(),
            1e-16
        ));
    }

    #[test]
    fn from_matrix_rejects_non_symplectic() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            SymplecticGate::from_matrix(m, GateLabel::Custom { name: "x".into() }),
            Err(Error::NotSymplectic { .. })
        ));
    }

    proptest! {
        #[test]
        fn constructed_gates_are_symplectic(r in -3.0f64..3.0, phi in -3.0f64..3.0, theta in -3.0f64..3.0) {
            // e^{±6} entries make the residual scale with ‖S‖², so allow for that
            let scale = |g: &SymplecticGate| g.matrix().norm().powi(2).max(1.0);
            for g in [
                SymplecticGate::rotation(phi),
                SymplecticGate::squeeze(r),
                SymplecticGate::beamsplitter(theta),
                SymplecticGate::p_gate(r, phi),
                SymplecticGate::q_gate(r, phi),
            ] {
                prop_assert!(g.symplectic_residual() <= 1e-12 * scale(&g), "{:?}", g.label());
            }
            prop_assert!((SymplecticGate::squeeze(r).matrix().determinant() - 1.0).abs() < 1e-12);
            let e = SymplecticGate::q_gate(r, phi).embed(&[2, 0], 3).unwrap();
            prop_assert!(e.symplectic_residual() <= 1e-12 * scale(&e));
        }

        #[test]
        fn embedding_commutes_with_composition(r in -1.5f64..1.5, phi in -3.0f64..3.0, theta in -3.0f64..3.0) {
            let g1 = SymplecticGate::q_gate(r, phi);
            let g2 = SymplecticGate::beamsplitter(theta);
            let modes = [3, 1];
            let lhs = g1.compose(&g2).unwrap().embed(&modes, 4).unwrap();
            let rhs = g1.embed(&modes, 4).unwrap().compose(&g2.embed(&modes, 4).unwrap()).unwrap();
            prop_assert!((lhs.matrix() - rhs.matrix()).amax() < 1e-12);
        }
    }
}
