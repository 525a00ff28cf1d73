//! Finite-difference discretization of `H = −∂ₓₓ + V_Z(x)` on `[−1, 1]` with
//! `V_Z = +iZ` for `x < 0` and `−iZ` for `x > 0`, Dirichlet at `x = ±1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antiunitary::AntiUnitaryOp;
use crate::linalg::{CMatrix, Tridiagonal};
use crate::{Error, Result};

pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareWellModel {
    pub z: f64,
    pub n: usize,
}

impl SquareWellModel {
    pub fn new(z: f64, n: usize) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::InvalidParameter(format!("Z must be finite, got {z}")));
        }
        if n < MIN_GRID {
            return Err(Error::InvalidParameter(format!("grid size N = {n} is below {MIN_GRID}")));
        }
        if !n.is_multiple_of(2) {
            // an odd grid puts a point on x = 0 where the potential is undefined
            return Err(Error::InvalidParameter(format!("grid size N = {n} must be even")));
        }
        Ok(Self { z, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.n as f64 + 1.0)
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..=self.n).map(|j| -1.0 + j as f64 * h).collect()
    }

    pub fn potential(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            Complex64::new(0.0, self.z)
        } else {
            Complex64::new(0.0, -self.z)
        }
    }

    pub fn tridiagonal(&self) -> Tridiagonal {
        let h = self.spacing();
        let inv_h2 = 1.0 / (h * h);
        let diag: Vec<Complex64> = self
            .grid()
            .into_iter()
            .map(|x| Complex64::new(2.0 * inv_h2, 0.0) + self.potential(x))
            .collect();
        let off = vec![Complex64::new(-inv_h2, 0.0); self.n - 1];
        Tridiagonal::new(diag, off).expect("square-well grid is well formed")
    }

    /// Parity (index reversal) composed with complex conjugation.
    pub fn symmetry(&self) -> AntiUnitaryOp {
        AntiUnitaryOp::parity_time(self.n)
    }
}

/// Tridiagonal Hamiltonian and its PT operator.
pub fn build_square_well(z: f64, n: usize) -> Result<(Tridiagonal, AntiUnitaryOp)> {
    let model = SquareWellModel::new(z, n)?;
    Ok((model.tridiagonal(), model.symmetry()))
}

/// Same as [`build_square_well`] with the Hamiltonian as a dense matrix.
pub fn build_square_well_dense(z: f64, n: usize) -> Result<(CMatrix, AntiUnitaryOp)> {
    let (t, a) = build_square_well(z, n)?;
    Ok((t.to_dense(), a))
}
