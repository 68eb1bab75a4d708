//! Gaussian states on a truncated Fock basis, held as a weighted ensemble of
//! pure states.
//!
//! A pure state on one or two modes is an amplitude matrix `ψ[i, j]` for
//! `|i, j⟩`; a single mode is a one-column matrix. Real and imaginary parts
//! are kept apart so every unitary, being real up to diagonal phases, runs
//! as plain real matrix products.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DMatrixView};

use super::operator::C64;
use super::workspace::{sector_range, FockWorkspace};
use crate::error::{Error, Result};
use crate::state::{SqueezedThermalParams, TwoModeBenchmark};

/// Tolerated probability weight outside the trusted part of the basis.
pub const LEAKAGE_TOL: f64 = 1e-8;

pub const MIN_CUTOFF: usize = 8;

/// Width of the band below the cutoff whose population counts as leakage.
pub fn guard_band(dim: usize) -> usize {
    (dim / 8).max(2)
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Amplitudes {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Amplitudes {
    fn basis(level: usize, cutoff: usize) -> Self {
        let mut re = DMatrix::zeros(cutoff, 1);
        re[(level, 0)] = 1.0;
        Self {
            re,
            im: DMatrix::zeros(cutoff, 1),
        }
    }

    /// `|ψ₁⟩ ⊗ |ψ₂⟩` from two single-mode states.
    fn tensor(a: &Self, b: &Self) -> Self {
        let (ar, ai) = (&a.re, &a.im);
        let (br, bi) = (b.re.transpose(), b.im.transpose());
        Self {
            re: ar * &br - ai * &bi,
            im: ar * &bi + ai * &br,
        }
    }

    pub fn swap_modes(&mut self) {
        self.re.transpose_mut();
        self.im.transpose_mut();
    }

    /// Applies a real matrix to `mode`. The matrix may be rectangular, which
    /// re-expresses the state on a different number of levels.
    pub fn apply(&mut self, mode: usize, u: DMatrixView<'_, f64>) {
        if mode == 0 {
            self.re = u * &self.re;
            self.im = u * &self.im;
        } else {
            self.re = &self.re * u.transpose();
            self.im = &self.im * u.transpose();
        }
    }

    /// `exp(−iφN)` on `mode`.
    pub fn phase(&mut self, mode: usize, phi: f64) {
        if phi == 0.0 {
            return;
        }
        let (rows, cols) = self.re.shape();
        for i in 0..rows {
            for j in 0..cols {
                let level = if mode == 0 { i } else { j };
                let (s, c) = (phi * level as f64).sin_cos();
                let (x, y) = (self.re[(i, j)], self.im[(i, j)]);
                self.re[(i, j)] = x * c + y * s;
                self.im[(i, j)] = y * c - x * s;
            }
        }
    }

    /// `D(α)` with `α = (q + ip)/√2` on `mode`, written as
    /// `e^{iθN} D(|α|) e^{−iθN}` so the displacement itself is real.
    pub fn displace(&mut self, mode: usize, q: f64, p: f64, ws: &FockWorkspace) -> Result<()> {
        let amp = q.hypot(p) * std::f64::consts::FRAC_1_SQRT_2;
        if amp == 0.0 {
            return Ok(());
        }
        let theta = p.atan2(q);
        let dim = if mode == 0 { self.re.nrows() } else { self.re.ncols() };
        let d = ws.displacement(amp, dim)?;
        self.phase(mode, theta);
        self.apply(mode, d.as_view());
        self.phase(mode, -theta);
        Ok(())
    }

    pub fn squeeze(&mut self, mode: usize, r: f64, ws: &FockWorkspace) -> Result<()> {
        if r == 0.0 {
            return Ok(());
        }
        let dim = if mode == 0 { self.re.nrows() } else { self.re.ncols() };
        let s = ws.squeeze(r, dim)?;
        self.apply(mode, s.as_view());
        Ok(())
    }

    /// `exp[θ(a₁†a₂ − a₁a₂†)]`, one photon-number sector at a time.
    pub fn beamsplitter(&mut self, theta: f64, ws: &FockWorkspace) -> Result<()> {
        let cutoff = self.re.nrows();
        if self.re.ncols() != cutoff {
            return Err(Error::InvalidParameter(
                "beam splitter needs a square two-mode amplitude matrix".into(),
            ));
        }
        let blocks = ws.beamsplitter(theta, cutoff)?;
        for part in [&mut self.re, &mut self.im] {
            for (s, block) in blocks.iter().enumerate() {
                let (lo, hi) = sector_range(s, cutoff);
                let v = nalgebra::DVector::from_fn(hi - lo + 1, |k, _| part[(lo + k, s - lo - k)]);
                let w = block * v;
                for (k, x) in w.iter().enumerate() {
                    part[(lo + k, s - lo - k)] = *x;
                }
            }
        }
        Ok(())
    }

    /// `(‖ψ‖², ⟨N⟩, ⟨N²⟩)` without normalisation.
    pub fn number_moments(&self) -> (f64, f64, f64) {
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let (rows, cols) = self.re.shape();
        for j in 0..cols {
            for i in 0..rows {
                let p = self.re[(i, j)].powi(2) + self.im[(i, j)].powi(2);
                let n = (i + j) as f64;
                z += p;
                m1 += p * n;
                m2 += p * n * n;
            }
        }
        (z, m1, m2)
    }

    /// Weight on levels inside the guard band of any mode.
    pub fn boundary_population(&self) -> f64 {
        let (rows, cols) = self.re.shape();
        let row_edge = rows - guard_band(rows);
        let col_edge = if cols == 1 { 1 } else { cols - guard_band(cols) };
        let mut acc = 0.0;
        for j in 0..cols {
            for i in 0..rows {
                if i >= row_edge || j >= col_edge {
                    acc += self.re[(i, j)].powi(2) + self.im[(i, j)].powi(2);
                }
            }
        }
        acc
    }
}

/// How the thermal factor of each mode is unravelled into pure states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ThermalStrategy {
    /// Number states `|k⟩` with Bose–Einstein weights; the tail beyond the
    /// cutoff is counted as leakage.
    FockDiagonal,
    /// Coherent states at the nodes of a seven-point cubature of the
    /// Gaussian P-function: the origin plus a regular hexagon, exact for
    /// polynomials of degree ≤ 5. Photon moments up to the second are
    /// polynomials of degree ≤ 4 in the node amplitude, so nothing is lost. Each member is a squeezed coherent state,
    /// whose number distribution has far shorter tails than a squeezed
    /// number state, so this converges at much smaller cutoffs.
    #[default]
    CoherentQuadrature,
}

/// Gaussian state families the oracle can build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FockRecipe {
    SingleMode(SqueezedThermalParams),
    TwoMode(TwoModeBenchmark),
}

impl FockRecipe {
    pub fn modes(&self) -> usize {
        match self {
            FockRecipe::SingleMode(_) => 1,
            FockRecipe::TwoMode(_) => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FockRecipe::SingleMode(p) => p.validate(),
            FockRecipe::TwoMode(b) => b.validate(),
        }
    }
}

/// Weighted pure-state ensemble on `cutoff` levels per mode.
#[derive(Clone, Debug)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    pub(crate) members: Vec<(f64, Amplitudes)>,
    discarded: f64,
}

impl FockState {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn ensemble_size(&self) -> usize {
        self.members.len()
    }

    /// Thermal weight that never entered the ensemble.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded
    }

    /// Discarded weight plus the population in the guard band.
    pub fn leakage(&self) -> f64 {
        self.discarded
            + self
                .members
                .iter()
                .map(|(w, a)| w * a.boundary_population())
                .sum::<f64>()
    }

    pub fn trace(&self) -> f64 {
        self.members.iter().map(|(w, a)| w * a.number_moments().0).sum()
    }

    /// `ρ = Σ w |ψ⟩⟨ψ|` on the product basis (mode 0 most significant).
    pub fn density_matrix(&self) -> Result<DMatrix<C64>> {
        let dim = self.cutoff.pow(self.modes as u32);
        if dim > 4096 {
            return Err(Error::InvalidParameter(format!(
                "density matrix of dimension {dim} is too large to materialise"
            )));
        }
        let mut rho = DMatrix::<C64>::zeros(dim, dim);
        for (w, a) in &self.members {
            let cols = a.re.ncols();
            let psi = nalgebra::DVector::<C64>::from_fn(dim, |k, _| {
                let (i, j) = (k / cols, k % cols);
                C64::new(a.re[(i, j)], a.im[(i, j)])
            });
            rho += &psi * psi.adjoint() * C64::new(*w, 0.0);
        }
        Ok(rho)
    }
}

/// Nodes and weights for `E f(x, y)` with `x, y` independent standard
/// normals: weight ½ at the origin and 1/12 at six points of radius 2.
pub fn hexagon_rule() -> [((f64, f64), f64); 7] {
    let mut out = [((0.0, 0.0), 0.5); 7];
    for (k, node) in out.iter_mut().skip(1).enumerate() {
        let (s, c) = (k as f64 * std::f64::consts::FRAC_PI_3).sin_cos();
        *node = ((2.0 * c, 2.0 * s), 1.0 / 12.0);
    }
    out
}

/// Pure-state unravelling of a thermal state with mean photon number `n_th`.
fn thermal_ensemble(
    n_th: f64,
    cutoff: usize,
    strategy: ThermalStrategy,
    ws: &FockWorkspace,
) -> Result<(Vec<(f64, Amplitudes)>, f64)> {
    if n_th == 0.0 {
        return Ok((vec![(1.0, Amplitudes::basis(0, cutoff))], 0.0));
    }
    match strategy {
        ThermalStrategy::FockDiagonal => {
            let ratio = n_th / (n_th + 1.0);
            let members = (0..cutoff)
                .map(|k| (ratio.powi(k as i32) / (n_th + 1.0), Amplitudes::basis(k, cutoff)))
                .filter(|(w, _)| *w > 0.0)
                .collect();
            Ok((members, ratio.powi(cutoff as i32)))
        }
        ThermalStrategy::CoherentQuadrature => {
            // P(α) ∝ exp(−|α|²/N): each quadrature of α is normal with
            // variance N/2, and D(α) shifts (q, p) by √2·(Re α, Im α).
            let sigma = (n_th / 2.0).sqrt() * std::f64::consts::SQRT_2;
            let mut members = Vec::with_capacity(7);
            for ((x, y), w) in hexagon_rule() {
                let mut a = Amplitudes::basis(0, cutoff);
                a.displace(0, sigma * x, sigma * y, ws)?;
                members.push((w, a));
            }
            Ok((members, 0.0))
        }
    }
}

/// Thermal → `S(s)` → `R(β)` on one mode; displacement is left to the caller.
fn local_factor(
    p: &SqueezedThermalParams,
    cutoff: usize,
    strategy: ThermalStrategy,
    ws: &FockWorkspace,
) -> Result<(Vec<(f64, Amplitudes)>, f64)> {
    let (mut members, discarded) = thermal_ensemble(p.n_th, cutoff, strategy, ws)?;
    for (_, a) in members.iter_mut() {
        a.squeeze(0, p.s, ws)?;
        a.phase(0, p.beta);
    }
    Ok((members, discarded))
}

/// Builds the state without judging its leakage.
pub(crate) fn prepare(
    recipe: &FockRecipe,
    cutoff: usize,
    strategy: ThermalStrategy,
    ws: &FockWorkspace,
) -> Result<FockState> {
    recipe.validate()?;
    if cutoff < MIN_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be at least {MIN_CUTOFF}, got {cutoff}"
        )));
    }
    match recipe {
        FockRecipe::SingleMode(p) => {
            let (mut members, discarded) = local_factor(p, cutoff, strategy, ws)?;
            for (_, a) in members.iter_mut() {
                a.displace(0, p.u, p.u, ws)?;
            }
            Ok(FockState {
                modes: 1,
                cutoff,
                members,
                discarded,
            })
        }
        FockRecipe::TwoMode(b) => {
            let (first, d1) = local_factor(&b.first, cutoff, strategy, ws)?;
            let (second, d2) = local_factor(&b.second, cutoff, strategy, ws)?;
            let mut members = Vec::with_capacity(first.len() * second.len());
            for (w1, a1) in &first {
                for (w2, a2) in &second {
                    let mut a = Amplitudes::tensor(a1, a2);
                    a.beamsplitter(FRAC_PI_4, ws)?;
                    a.displace(0, b.u, b.u, ws)?;
                    a.displace(1, b.u, b.u, ws)?;
                    members.push((w1 * w2, a));
                }
            }
            Ok(FockState {
                modes: 2,
                cutoff,
                members,
                discarded: d1 + d2 - d1 * d2,
            })
        }
    }
}

/// Builds a Gaussian state on `cutoff` levels per mode.
///
/// Fails with [`Error::Truncation`] when more than [`LEAKAGE_TOL`] of the
/// weight is lost to the truncation.
pub fn build_gaussian_fock(recipe: &FockRecipe, cutoff: usize) -> Result<FockState> {
    build_gaussian_fock_with(recipe, cutoff, ThermalStrategy::default(), &FockWorkspace::new())
}

pub fn build_gaussian_fock_with(
    recipe: &FockRecipe,
    cutoff: usize,
    strategy: ThermalStrategy,
    ws: &FockWorkspace,
) -> Result<FockState> {
    let state = prepare(recipe, cutoff, strategy, ws)?;
    let leakage = state.leakage();
    if leakage > LEAKAGE_TOL {
        return Err(Error::Truncation { cutoff, leakage });
    }
    Ok(state)
}

/// Photon-number mean and variance, normalised by the retained trace.
pub fn fock_mean_and_variance(state: &FockState) -> (f64, f64) {
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (w, a) in &state.members {
        let (az, a1, a2) = a.number_moments();
        z += w * az;
        m1 += w * a1;
        m2 += w * a2;
    }
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}
