//! Two-channel scattering matrices of the detector barriers.
//!
//! Each barrier is described by three angles. `theta` fixes the magnitude
//! of transmission and reflection, `phi` is an overall scattering phase,
//! and `eta` is a direction-asymmetry phase that distinguishes probes
//! incident with wave vector +k from probes incident with -k. The
//! resulting matrix
//!
//! ```text
//! S = e^{i phi} | cos(theta)                 i e^{-i eta} sin(theta) |
//!               | i e^{i eta} sin(theta)     cos(theta)              |
//! ```
//!
//! is unitary and time-reversal symmetric (equal diagonal entries) by
//! construction. Row/column 0 refers to wave vector +k and row/column 1
//! to -k; a column holds the transmission (diagonal) and reflection
//! (off-diagonal) amplitudes for that incoming direction.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_range, Error};

/// Propagation direction of the detector current.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Wave vector +k; matrix index 0.
    Forward,
    /// Wave vector -k; matrix index 1.
    Backward,
}

impl Direction {
    /// Row/column index of this direction in a [`ScatteringMatrix`].
    pub fn index(self) -> usize {
        match self {
            Direction::Forward => 0,
            Direction::Backward => 1,
        }
    }

    /// The opposite current direction.
    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Three-angle parameterization of one barrier's scattering matrix.
///
/// Angle domains are canonical: `theta` in `[0, pi/2]`, `phi` and `eta`
/// in `(-pi, pi]`. Construction rejects anything else, so a value of this
/// type always describes a valid barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    theta: f64,
    phi: f64,
    eta: f64,
}

impl BarrierParams {
    pub fn new(theta: f64, phi: f64, eta: f64) -> Result<Self, Error> {
        check_range("theta", theta, 0.0, FRAC_PI_2)?;
        check_phase("phi", phi)?;
        check_phase("eta", eta)?;
        Ok(BarrierParams { theta, phi, eta })
    }

    /// Transmission/reflection magnitude angle in radians.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Overall scattering phase in radians.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Direction-asymmetry phase in radians.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

fn check_phase(name: &'static str, value: f64) -> Result<(), Error> {
    if !value.is_finite() || value <= -PI || value > PI {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must lie in (-pi, pi], got {value}"),
        });
    }
    Ok(())
}

/// A 2x2 complex scattering matrix.
///
/// Index 0 corresponds to wave vector +k and index 1 to -k; columns are
/// labeled by the incoming direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    entries: [[Complex64; 2]; 2],
}

impl ScatteringMatrix {
    pub fn from_entries(entries: [[Complex64; 2]; 2]) -> Self {
        ScatteringMatrix { entries }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        ScatteringMatrix {
            entries: [
                [e[0][0].conj(), e[1][0].conj()],
                [e[0][1].conj(), e[1][1].conj()],
            ],
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.entries;
        let b = &other.entries;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        ScatteringMatrix { entries: out }
    }

    /// True iff the max-norm of `S S^dagger - I` is at most `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self.mul(&self.dagger());
        let mut max_dev: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                max_dev = max_dev.max((product.entries[i][j] - expected).norm());
            }
        }
        max_dev <= tol
    }

    /// True iff the two diagonal entries (the +k and -k transmission
    /// amplitudes) agree to within `tol`.
    pub fn is_time_reversal_symmetric(&self, tol: f64) -> bool {
        (self.entries[0][0] - self.entries[1][1]).norm() <= tol
    }
}

/// Builds the scattering matrix of a barrier from its three angles.
pub fn build_smatrix(params: &BarrierParams) -> ScatteringMatrix {
    let phase = Complex64::from_polar(1.0, params.phi);
    let cos_t = Complex64::new(params.theta.cos(), 0.0);
    let refl_fwd = Complex64::i() * Complex64::from_polar(params.theta.sin(), params.eta);
    let refl_bwd = Complex64::i() * Complex64::from_polar(params.theta.sin(), -params.eta);
    ScatteringMatrix::from_entries([
        [phase * cos_t, phase * refl_bwd],
        [phase * refl_fwd, phase * cos_t],
    ])
}

/// Single-probe transmission probability `cos^2(theta)`.
///
/// Identical for both current directions: time reversal forces equal
/// transmission amplitudes for +k and -k probes.
pub fn transmission_probability(params: &BarrierParams) -> f64 {
    params.theta.cos().powi(2)
}

/// True iff the barrier is parity symmetric, i.e. `|eta| <= tol`.
///
/// A parity-symmetric barrier scatters +k and -k probes identically; its
/// matrix has equal off-diagonal (reflection) entries.
pub fn is_parity_symmetric(params: &BarrierParams, tol: f64) -> bool {
    params.eta.abs() <= tol
}
