//! Ladder operators on a truncated Fock basis.
//!
//! Multi-mode operators act on the product basis with mode 0 as the most
//! significant index, so `|i, j⟩` sits at `i·cutoff + j`.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Real annihilation matrix: `a|k⟩ = √k |k−1⟩`.
pub fn annihilation(cutoff: usize) -> DMatrix<f64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// `(r/2)(a² − a†²)`, whose exponential realises `S(r) = diag(e^-r, e^r)`.
pub fn squeeze_generator(r: f64, dim: usize) -> DMatrix<f64> {
    let a = annihilation(dim);
    let a2 = &a * &a;
    (&a2 - a2.transpose()) * (0.5 * r)
}

/// `x(a† − a)`: real displacement by `α = x`.
pub fn displacement_generator(x: f64, dim: usize) -> DMatrix<f64> {
    let a = annihilation(dim);
    (a.transpose() - a) * x
}

/// `θ(a₁†a₂ − a₁a₂†)` restricted to the sector of total photon number `s`,
/// on the basis `|i, s−i⟩` for `i` in `lo..=hi`.
pub fn beamsplitter_sector_generator(theta: f64, s: usize, lo: usize, hi: usize) -> DMatrix<f64> {
    let m = hi - lo + 1;
    DMatrix::from_fn(m, m, |row, col| {
        let (i, k) = (lo + row, lo + col);
        if i == k + 1 {
            // a₁†a₂ |k, s−k⟩ = √(k+1)√(s−k) |k+1, s−k−1⟩
            theta * ((k + 1) as f64 * (s - k) as f64).sqrt()
        } else if k == i + 1 {
            // a₁a₂† |k, s−k⟩ = √k √(s−k+1) |k−1, s−k+1⟩
            -theta * (k as f64 * (s - k + 1) as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// Operator on `modes` copies of a `cutoff`-level oscillator.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    modes: usize,
    cutoff: usize,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    fn check(modes: usize, cutoff: usize, mode: usize) -> Result<()> {
        if modes == 0 {
            return Err(Error::ZeroModes);
        }
        if mode >= modes {
            return Err(Error::ModeOutOfRange { index: mode, n: modes });
        }
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!("cutoff must be at least 2, got {cutoff}")));
        }
        Ok(())
    }

    fn local(modes: usize, cutoff: usize, mode: usize, op: &DMatrix<f64>) -> Result<Self> {
        Self::check(modes, cutoff, mode)?;
        let mut m = DMatrix::<C64>::identity(1, 1);
        for k in 0..modes {
            let factor = if k == mode {
                op.map(|x| C64::new(x, 0.0))
            } else {
                DMatrix::identity(cutoff, cutoff)
            };
            m = m.kronecker(&factor);
        }
        Ok(Self { modes, cutoff, matrix: m })
    }

    pub fn annihilation(modes: usize, cutoff: usize, mode: usize) -> Result<Self> {
        Self::local(modes, cutoff, mode, &annihilation(cutoff))
    }

    pub fn creation(modes: usize, cutoff: usize, mode: usize) -> Result<Self> {
        Ok(Self::annihilation(modes, cutoff, mode)?.adjoint())
    }

    pub fn number(modes: usize, cutoff: usize, mode: usize) -> Result<Self> {
        let a = annihilation(cutoff);
        Self::local(modes, cutoff, mode, &(a.transpose() * a))
    }

    /// Total photon number `Σ aₖ†aₖ`.
    pub fn total_number(modes: usize, cutoff: usize) -> Result<Self> {
        let mut acc = Self::number(modes, cutoff, 0)?;
        for k in 1..modes {
            acc.matrix += Self::number(modes, cutoff, k)?.matrix;
        }
        Ok(acc)
    }

    /// `q = (a + a†)/√2`.
    pub fn position(modes: usize, cutoff: usize, mode: usize) -> Result<Self> {
        let a = Self::annihilation(modes, cutoff, mode)?;
        let m = (&a.matrix + a.matrix.adjoint()) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(Self { matrix: m, ..a })
    }

    /// `p = i(a† − a)/√2`.
    pub fn momentum(modes: usize, cutoff: usize, mode: usize) -> Result<Self> {
        let a = Self::annihilation(modes, cutoff, mode)?;
        let m = (a.matrix.adjoint() - &a.matrix) * C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        Ok(Self { matrix: m, ..a })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            ..*self
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
            ..*self
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            ..*self
        }
    }

    /// Largest entry of `self − c·I` over basis states whose every mode sits
    /// below `cutoff − 1`, where truncation cannot distort single ladder
    /// steps.
    pub fn deviation_from_scalar_below_boundary(&self, c: C64) -> f64 {
        let dim = self.matrix.nrows();
        let interior = |idx: usize| {
            let mut rest = idx;
            (0..self.modes).all(|_| {
                let level = rest % self.cutoff;
                rest /= self.cutoff;
                level + 1 < self.cutoff
            })
        };
        let mut worst = 0.0f64;
        for i in (0..dim).filter(|&i| interior(i)) {
            for j in (0..dim).filter(|&j| interior(j)) {
                let want = if i == j { c } else { C64::new(0.0, 0.0) };
                worst = worst.max((self.matrix[(i, j)] - want).norm());
            }
        }
        worst
    }
}
