//! Dense complex linear algebra: matrices, general eigendecomposition and
//! bi-orthonormal eigensystems.

pub mod biortho;
pub mod eig;
pub mod matrix;
pub mod random;
pub mod tridiag;

use num_complex::Complex64;

pub use biortho::{biorthogonalize, cluster_eigenvalues, BiorthogonalSystem};
pub use eig::eig_general;
pub use matrix::{CMatrix, CVector};
pub use tridiag::Tridiagonal;

use crate::antiunitary::AntiUnitaryOp;
use crate::Result;

/// A finite-dimensional operator whose spectrum can be analysed: the dense
/// path handles arbitrary matrices, the tridiagonal path large grids.
pub trait SpectralOperator {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[Complex64]) -> CVector;

    fn frobenius_norm(&self) -> f64;

    /// Eigenvalues sorted by `(Re, Im)`.
    fn eigenvalues(&self) -> Result<Vec<Complex64>>;

    fn biorthogonalize(&self, tol_degeneracy: f64) -> Result<BiorthogonalSystem>;

    /// Relative residual `‖U·conj(H)·U† − H‖_F / max(1, ‖H‖_F)`.
    fn commutation_residual(&self, a: &AntiUnitaryOp) -> Result<f64>;
}

impl SpectralOperator for CMatrix {
    fn dim(&self) -> usize {
        CMatrix::dim(self)
    }

    fn apply(&self, v: &[Complex64]) -> CVector {
        self.matvec(v)
    }

    fn frobenius_norm(&self) -> f64 {
        CMatrix::frobenius_norm(self)
    }

    fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eig::eigenvalues(self)
    }

    fn biorthogonalize(&self, tol_degeneracy: f64) -> Result<BiorthogonalSystem> {
        biortho::biorthogonalize(self, tol_degeneracy)
    }

    fn commutation_residual(&self, a: &AntiUnitaryOp) -> Result<f64> {
        crate::antiunitary::check_commutation(self, a)
    }
}

impl SpectralOperator for Tridiagonal {
    fn dim(&self) -> usize {
        Tridiagonal::dim(self)
    }

    fn apply(&self, v: &[Complex64]) -> CVector {
        self.matvec(v)
    }

    fn frobenius_norm(&self) -> f64 {
        Tridiagonal::frobenius_norm(self)
    }

    fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        Tridiagonal::eigenvalues(self)
    }

    fn biorthogonalize(&self, tol_degeneracy: f64) -> Result<BiorthogonalSystem> {
        biortho::biorthogonalize_tridiagonal(self, tol_degeneracy)
    }

    fn commutation_residual(&self, a: &AntiUnitaryOp) -> Result<f64> {
        crate::antiunitary::check_commutation_tridiagonal(self, a)
    }
}
