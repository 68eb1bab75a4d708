//! Gaussian states `(d, V)` and their closed-form photon-number statistics.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::symplectic::{omega_matrix, DisplacementVector, SymplecticGate};

/// Largest tolerated `|V - Vᵀ|` entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest tolerated eigenvalue of `V + iΩ/2`.
pub const PHYSICALITY_FLOOR: f64 = -1e-10;

/// Which expression to use for the photon-number variance after a gate.
///
/// `Transformed` evaluates the ungated variance on the transformed moments
/// `(Sd, SVSᵀ)`. `AsPrinted` keeps the displacement term as `dᵀVd` with the
/// untransformed moments while transforming only the trace term. The Fock
/// oracle agrees with `Transformed`; `AsPrinted` exists so that disagreement
/// can be demonstrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceForm {
    #[default]
    Transformed,
    AsPrinted,
}

/// Photon-number statistics shared by validated states and raw estimates.
pub trait PhotonStatistics {
    fn mean(&self) -> &DVector<f64>;
    fn covariance(&self) -> &DMatrix<f64>;

    fn modes(&self) -> usize {
        self.mean().len() / 2
    }

    /// `⟨N⟩ = ½[Tr(V - I/2) + ‖d‖²]`.
    fn mean_photon(&self) -> f64 {
        mean_photon_of(self.mean(), self.covariance())
    }

    /// `Var(N) = ½Tr[(V - I/2)(V + I/2)] + dᵀVd`.
    fn photon_variance(&self) -> f64 {
        photon_variance_of(self.mean(), self.covariance())
    }

    /// `⟨N⟩` after displacing by `r`.
    fn displaced_mean_photon(&self, r: &DisplacementVector) -> Result<f64> {
        check_len(self.mean().len(), r.as_vector().len())?;
        Ok(mean_photon_of(&(self.mean() + r.as_vector()), self.covariance()))
    }

    fn displaced_photon_variance(&self, r: &DisplacementVector) -> Result<f64> {
        check_len(self.mean().len(), r.as_vector().len())?;
        Ok(photon_variance_of(
            &(self.mean() + r.as_vector()),
            self.covariance(),
        ))
    }

    /// `⟨N⟩` after the gate: `½Tr(V SᵀS) - n/2 + ½ dᵀSᵀSd`.
    fn gated_mean_photon(&self, gate: &SymplecticGate) -> Result<f64> {
        check_len(self.mean().len(), gate.matrix().nrows())?;
        let g = gate.gram();
        let d = self.mean();
        let n = self.modes() as f64;
        Ok(0.5 * (self.covariance() * &g).trace() - 0.5 * n + 0.5 * d.dot(&(&g * d)))
    }

    fn gated_photon_variance(&self, gate: &SymplecticGate, form: VarianceForm) -> Result<f64> {
        check_len(self.mean().len(), gate.matrix().nrows())?;
        let s = gate.matrix();
        let v = self.covariance();
        let d = self.mean();
        let vs = s * v * s.transpose();
        Ok(match form {
            VarianceForm::Transformed => photon_variance_of(&(s * d), &vs),
            VarianceForm::AsPrinted => trace_term(&vs) + d.dot(&(v * d)),
        })
    }

    /// Minimum eigenvalue of the Hermitian matrix `V + iΩ/2`.
    fn physicality_margin(&self) -> f64 {
        let n = self.modes();
        linalg::min_eigenvalue_hermitian(
            &linalg::symmetrize(self.covariance()),
            &(omega_matrix(n) * 0.5),
        )
    }

    /// Symplectic eigenvalues in ascending order (one per mode).
    ///
    /// NaN entries signal a covariance that is not positive definite.
    fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues_of(self.covariance())
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn trace_term(v: &DMatrix<f64>) -> f64 {
    // ½Tr[(V - I/2)(V + I/2)] = ½Tr(V²) - n/4, with 2n = dim
    0.5 * v.component_mul(&v.transpose()).sum() - v.nrows() as f64 / 8.0
}

pub(crate) fn mean_photon_of(d: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    0.5 * (v.trace() - 0.5 * v.nrows() as f64 + d.norm_squared())
}

pub(crate) fn photon_variance_of(d: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    trace_term(v) + d.dot(&(v * d))
}

pub(crate) fn symplectic_eigenvalues_of(v: &DMatrix<f64>) -> Vec<f64> {
    let n = v.nrows() / 2;
    let sym = linalg::symmetrize(v);
    let Some(root) = sqrt_psd(&sym) else {
        return vec![f64::NAN; n];
    };
    // A = V^{1/2} Ω V^{1/2} is antisymmetric with spectrum ±iν; AᵀA has ν² twice
    let a = &root * omega_matrix(n) * &root;
    let mut nu2: Vec<f64> = (a.transpose() * &a)
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    nu2.sort_by(f64::total_cmp);
    nu2.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Symmetric square root of a positive definite matrix.
fn sqrt_psd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// Raw first and second moments with no physicality requirement.
///
/// Estimates from finite-shot data live here, since noise can push them
/// outside the set of physical states.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub d: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Moments {
    pub fn new(d: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        if d.is_empty() || d.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "mean vector length {} is not a positive even number",
                d.len()
            )));
        }
        if v.nrows() != d.len() || v.ncols() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                found: v.nrows().max(v.ncols()),
            });
        }
        if !d.iter().all(|x| x.is_finite()) || !linalg::all_finite(&v) {
            return Err(Error::NonFinite("moments"));
        }
        Ok(Self { d, v })
    }

    /// Nearest physical covariance in the sense of clipping every symplectic
    /// eigenvalue at ½, keeping the symplectic basis.
    ///
    /// A covariance that is not positive definite is first floored at a tiny
    /// positive eigenvalue so the Williamson form exists.
    pub fn project_to_physical(&self) -> Moments {
        let n = self.modes();
        let mut v = linalg::symmetrize(&self.v);
        let eig = v.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&x| x <= 1e-9) {
            let floored = eig.eigenvalues.map(|x| x.max(1e-9));
            v = &eig.eigenvectors * DMatrix::from_diagonal(&floored) * eig.eigenvectors.transpose();
        }
        let root = sqrt_psd(&v).expect("floored covariance is positive definite");
        let a = &root * omega_matrix(n) * &root;
        // V' = V^{1/2} h(AᵀA) V^{1/2}, h(x) = max(√x, ½)/√x
        let k = (a.transpose() * &a).symmetric_eigen();
        let h = k.eigenvalues.map(|x| {
            let nu = x.max(0.0).sqrt();
            if nu >= 0.5 {
                1.0
            } else {
                0.5 / nu.max(1e-300)
            }
        });
        let hk = &k.eigenvectors * DMatrix::from_diagonal(&h) * k.eigenvectors.transpose();
        Moments {
            d: self.d.clone(),
            v: linalg::symmetrize(&(&root * hk * &root)),
        }
    }
}

impl PhotonStatistics for Moments {
    fn mean(&self) -> &DVector<f64> {
        &self.d
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.v
    }
}

/// A physical n-mode Gaussian state.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    n: usize,
    d: DVector<f64>,
    v: DMatrix<f64>,
}

impl PhotonStatistics for GaussianState {
    fn mean(&self) -> &DVector<f64> {
        &self.d
    }

    fn covariance(&self) -> &DMatrix<f64> {
        &self.v
    }
}

impl GaussianState {
    /// Validates symmetry and the uncertainty relation `V + iΩ/2 ⪰ 0`.
    pub fn new(d: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let m = Moments::new(d, v)?;
        let asymmetry = linalg::asymmetry(&m.v);
        if asymmetry > SYMMETRY_TOL {
            return Err(Error::NotSymmetric {
                what: "covariance matrix",
                asymmetry,
            });
        }
        let min_eigenvalue = m.physicality_margin();
        if min_eigenvalue < PHYSICALITY_FLOOR {
            return Err(Error::Unphysical { min_eigenvalue });
        }
        Ok(Self {
            n: m.d.len() / 2,
            d: m.d,
            v: linalg::symmetrize(&m.v),
        })
    }

    pub fn from_moments(m: Moments) -> Result<Self> {
        Self::new(m.d, m.v)
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroModes);
        }
        Ok(Self {
            n,
            d: DVector::zeros(2 * n),
            v: DMatrix::identity(2 * n, 2 * n) * 0.5,
        })
    }

    /// Coherent state with mean `d`.
    pub fn coherent(d: &DisplacementVector) -> Self {
        let n = d.n();
        Self {
            n,
            d: d.as_vector().clone(),
            v: DMatrix::identity(2 * n, 2 * n) * 0.5,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn moments(&self) -> Moments {
        Moments {
            d: self.d.clone(),
            v: self.v.clone(),
        }
    }

    pub fn displace(&self, r: &DisplacementVector) -> Result<Self> {
        check_len(2 * self.n, r.as_vector().len())?;
        Ok(Self {
            n: self.n,
            d: &self.d + r.as_vector(),
            v: self.v.clone(),
        })
    }

    /// `d → Sd`, `V → SVSᵀ`. Physicality is invariant under symplectic maps.
    pub fn apply_gate(&self, gate: &SymplecticGate) -> Result<Self> {
        check_len(2 * self.n, gate.matrix().nrows())?;
        let s = gate.matrix();
        Ok(Self {
            n: self.n,
            d: s * &self.d,
            v: linalg::symmetrize(&(s * &self.v * s.transpose())),
        })
    }

    /// Reduced state on the listed modes, in the listed order.
    pub fn marginal(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::ZeroModes);
        }
        let mut idx = Vec::with_capacity(2 * modes.len());
        for (k, &m) in modes.iter().enumerate() {
            if m >= self.n {
                return Err(Error::ModeOutOfRange {
                    index: m,
                    n: self.n,
                });
            }
            if modes[..k].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
            idx.extend([2 * m, 2 * m + 1]);
        }
        let k = idx.len();
        Ok(Self {
            n: modes.len(),
            d: DVector::from_fn(k, |i, _| self.d[idx[i]]),
            v: DMatrix::from_fn(k, k, |i, j| self.v[(idx[i], idx[j])]),
        })
    }

    /// Single-mode squeezed coherent thermal state.
    pub fn squeezed_thermal(p: &SqueezedThermalParams) -> Result<Self> {
        p.validate()?;
        Self::new(DVector::from_vec(vec![p.u, p.u]), p.covariance())
    }

    /// Two-mode benchmark: two squeezed thermal factors mixed on a balanced
    /// beam splitter, with joint mean `(u, u, u, u)`.
    pub fn two_mode_benchmark(b: &TwoModeBenchmark) -> Result<Self> {
        b.validate()?;
        Self::new(DVector::from_element(4, b.u), b.covariance())
    }
}

/// Parameters of the single-mode squeezed coherent thermal state with mean
/// `(u, u)` and covariance `(N_th + ½)·R(β)S(2s)R(β)ᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezedThermalParams {
    pub n_th: f64,
    pub s: f64,
    pub beta: f64,
    pub u: f64,
}

impl SqueezedThermalParams {
    pub fn new(n_th: f64, s: f64, beta: f64, u: f64) -> Self {
        Self { n_th, s, beta, u }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.n_th, self.s, self.beta, self.u]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::NonFinite("squeezed thermal parameters"));
        }
        if self.n_th < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "thermal noise parameter must be non-negative, got {}",
                self.n_th
            )));
        }
        Ok(())
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let r = SymplecticGate::rotation(self.beta);
        let s = SymplecticGate::squeeze(2.0 * self.s);
        let rs = r.matrix() * s.matrix() * r.matrix().transpose();
        linalg::symmetrize(&(rs * (self.n_th + 0.5)))
    }

    /// `N_th cosh 2s + sinh²s + u²`.
    pub fn mean_photon(&self) -> f64 {
        self.n_th * (2.0 * self.s).cosh() + self.s.sinh().powi(2) + self.u * self.u
    }

    /// `(N_th+½)² cosh 4s − ¼ + 2u²(N_th+½)(cosh 2s + sin 2β sinh 2s)`.
    pub fn photon_variance(&self) -> f64 {
        let a = self.n_th + 0.5;
        let two_s = 2.0 * self.s;
        a * a * (2.0 * two_s).cosh() - 0.25
            + 2.0 * self.u * self.u * a * (two_s.cosh() + (2.0 * self.beta).sin() * two_s.sinh())
    }
}

/// Two squeezed thermal factors (their own `u` is ignored) and the joint
/// displacement `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoModeBenchmark {
    pub first: SqueezedThermalParams,
    pub second: SqueezedThermalParams,
    pub u: f64,
}

impl TwoModeBenchmark {
    pub fn validate(&self) -> Result<()> {
        self.first.validate()?;
        self.second.validate()?;
        if !self.u.is_finite() {
            return Err(Error::NonFinite("two-mode displacement"));
        }
        Ok(())
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let b = SymplecticGate::beamsplitter(std::f64::consts::FRAC_PI_4);
        let local = linalg::direct_sum(&self.first.covariance(), &self.second.covariance());
        linalg::symmetrize(&(b.matrix() * local * b.matrix().transpose()))
    }

    /// Sum of the factors' thermal-squeezing photons plus `2u²`.
    pub fn mean_photon(&self) -> f64 {
        let bare = |p: &SqueezedThermalParams| SqueezedThermalParams { u: 0.0, ..*p }.mean_photon();
        bare(&self.first) + bare(&self.second) + 2.0 * self.u * self.u
    }

    /// The beam splitter routes the whole mean `(u,u,u,u)` into the second
    /// factor as `(√2u, √2u)`, so only that factor's displacement term
    /// survives.
    pub fn photon_variance(&self) -> f64 {
        let bare = |p: &SqueezedThermalParams| SqueezedThermalParams { u: 0.0, ..*p }.photon_variance();
        let second = SqueezedThermalParams {
            u: std::f64::consts::SQRT_2 * self.u,
            ..self.second
        };
        bare(&self.first) + second.photon_variance()
    }
}
