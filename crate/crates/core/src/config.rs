//! Default numerical tolerances shared by the library and the CLI.

use serde::{Deserialize, Serialize};

pub const TOL_SYM: f64 = 1e-10;
pub const TOL_REAL: f64 = 1e-8;
pub const TOL_PROP: f64 = 1e-8;
pub const TOL_PARAM: f64 = 1e-6;
pub const TOL_DEGENERACY: f64 = 1e-8;

/// Largest `max_n ‖ψ_n‖·‖ψⁿ‖` accepted before a matrix is reported as
/// not diagonalizable.
pub const COND_LIMIT: f64 = 1e8;

/// Thresholds used by [`crate::classifier::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Bound on the relative commutation residual `‖U H̄ U† − H‖ / max(1, ‖H‖)`.
    pub symmetry: f64,
    /// `|Im E| ≤ reality · max(1, |E|)` counts as a real eigenvalue.
    pub reality: f64,
    /// `|⟨ψ, Aψ⟩| / (‖ψ‖‖Aψ‖) ≥ 1 − proportionality` counts as `Aψ ∝ ψ`.
    pub proportionality: f64,
    /// Eigenvalues closer than `degeneracy · max(1, ρ(H))` form one cluster.
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: TOL_SYM,
            reality: TOL_REAL,
            proportionality: TOL_PROP,
            degeneracy: TOL_DEGENERACY,
        }
    }
}

impl Tolerances {
    /// Uses `tol` for reality, proportionality and degeneracy, keeping the
    /// default symmetry bound.
    pub fn uniform(tol: f64) -> Self {
        Self {
            reality: tol,
            proportionality: tol,
            degeneracy: tol,
            ..Self::default()
        }
    }

    /// Defect above which a block is reported as inconsistent.
    pub fn defect_limit(&self) -> f64 {
        100.0 * self.proportionality
    }

    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("symmetry", self.symmetry),
            ("reality", self.reality),
            ("proportionality", self.proportionality),
            ("degeneracy", self.degeneracy),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(crate::Error::InvalidParameter(format!(
                    "tolerance `{name}` must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}
