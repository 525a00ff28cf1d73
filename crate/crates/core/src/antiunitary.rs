//! Anti-unitary operators `A = U∘K`: a unitary `U` composed with entrywise
//! complex conjugation `K` in the computational basis.
//!
//! Basis transport needs care. For a unitary change of basis `V`,
//! `V A V⁻¹ = V U K V† = V U V̄† K = (V U Vᵀ) K`, so the transported unitary
//! part is `V·U·Vᵀ` (transpose, not adjoint).

use std::collections::HashMap;

use num_complex::Complex64;

use crate::linalg::matrix::{CMatrix, CVector};
use crate::linalg::Tridiagonal;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Entry-wise bound on `U†U − I` accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum UnitaryPart {
    Dense(CMatrix),
    /// One nonzero per row: `U[i][col] = phase`.
    Monomial(Vec<(usize, Complex64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiUnitaryOp {
    label: String,
    unitary: UnitaryPart,
}

impl AntiUnitaryOp {
    /// Validates unitarity of `u` to [`UNITARY_TOL`].
    pub fn new(unitary_part: CMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerance(unitary_part, label, UNITARY_TOL)
    }

    pub fn with_tolerance(unitary_part: CMatrix, label: impl Into<String>, tol: f64) -> Result<Self> {
        let label = label.into();
        if let Some(pattern) = unitary_part.monomial_pattern() {
            return Self::from_monomial(pattern, label);
        }
        let deviation = max_unitarity_deviation(&unitary_part);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            label,
            unitary: UnitaryPart::Dense(unitary_part),
        })
    }

    /// `U[i][entries[i].0] = entries[i].1`; entries must form a permutation
    /// with unimodular phases.
    pub fn from_monomial(entries: Vec<(usize, Complex64)>, label: impl Into<String>) -> Result<Self> {
        let n = entries.len();
        let mut seen = vec![false; n];
        let mut deviation: f64 = 0.0;
        for &(col, phase) in &entries {
            if col >= n || seen[col] {
                return Err(Error::NotUnitary { deviation: 1.0 });
            }
            seen[col] = true;
            deviation = deviation.max((phase.norm_sqr() - 1.0).abs());
        }
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            label: label.into(),
            unitary: UnitaryPart::Monomial(entries),
        })
    }

    /// Pure complex conjugation `K`.
    pub fn conjugation(dim: usize) -> Self {
        Self {
            label: "K".into(),
            unitary: UnitaryPart::Monomial((0..dim).map(|i| (i, ONE)).collect()),
        }
    }

    /// Index reversal followed by conjugation: `𝒫𝒯` on a grid symmetric
    /// about the origin.
    pub fn parity_time(dim: usize) -> Self {
        Self {
            label: "PT".into(),
            unitary: UnitaryPart::Monomial((0..dim).map(|i| (dim - 1 - i, ONE)).collect()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        match &self.unitary {
            UnitaryPart::Dense(u) => u.dim(),
            UnitaryPart::Monomial(e) => e.len(),
        }
    }

    pub fn unitary_part(&self) -> CMatrix {
        match &self.unitary {
            UnitaryPart::Dense(u) => u.clone(),
            UnitaryPart::Monomial(entries) => {
                let mut u = CMatrix::zeros(entries.len());
                for (i, &(j, z)) in entries.iter().enumerate() {
                    u[(i, j)] = z;
                }
                u
            }
        }
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// `A v = U · conj(v)`.
    pub fn apply(&self, v: &[Complex64]) -> Result<CVector> {
        self.check_dim(v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[Complex64]) -> CVector {
        match &self.unitary {
            UnitaryPart::Dense(u) => {
                let vc: CVector = v.iter().map(|z| z.conj()).collect();
                u.matvec(&vc)
            }
            UnitaryPart::Monomial(entries) => entries.iter().map(|&(j, z)| z * v[j].conj()).collect(),
        }
    }

    /// `A² v`, without forming the square.
    pub fn apply_twice(&self, v: &[Complex64]) -> Result<CVector> {
        self.check_dim(v.len())?;
        Ok(self.apply_unchecked(&self.apply_unchecked(v)))
    }

    /// The unitary `A² = U · conj(U)`.
    pub fn square(&self) -> CMatrix {
        match &self.unitary {
            UnitaryPart::Dense(u) => u.matmul(&u.conj()),
            UnitaryPart::Monomial(entries) => {
                let mut s = CMatrix::zeros(entries.len());
                for (i, &(j, z)) in entries.iter().enumerate() {
                    let (k, w) = entries[j];
                    s[(i, k)] = z * w.conj();
                }
                s
            }
        }
    }

    /// `U·conj(X)·U†` for a dense `X`.
    fn transform(&self, x: &CMatrix) -> CMatrix {
        match &self.unitary {
            UnitaryPart::Dense(u) => u.matmul(&x.conj()).matmul(&u.adjoint()),
            UnitaryPart::Monomial(entries) => CMatrix::from_fn(x.dim(), |a, b| {
                let (pa, ua) = entries[a];
                let (pb, ub) = entries[b];
                ua * x[(pa, pb)].conj() * ub.conj()
            }),
        }
    }
}

fn max_unitarity_deviation(u: &CMatrix) -> f64 {
    let g = u.adjoint().matmul(u);
    let n = u.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Relative commutation residual `‖U·conj(H)·U† − H‖_F / max(1, ‖H‖_F)`;
/// zero iff `A H A⁻¹ = H`.
pub fn check_commutation(h: &CMatrix, a: &AntiUnitaryOp) -> Result<f64> {
    a.check_dim(h.dim())?;
    let diff = a.transform(h).sub(h).frobenius_norm();
    Ok(diff / h.frobenius_norm().max(1.0))
}

/// Same residual for a tridiagonal `H`, in O(n) when `U` is monomial.
pub fn check_commutation_tridiagonal(t: &Tridiagonal, a: &AntiUnitaryOp) -> Result<f64> {
    a.check_dim(t.dim())?;
    let entries = match &a.unitary {
        UnitaryPart::Monomial(e) => e,
        UnitaryPart::Dense(_) => return check_commutation(&t.to_dense(), a),
    };
    let n = t.dim();
    let mut inverse = vec![0usize; n];
    for (i, &(j, _)) in entries.iter().enumerate() {
        inverse[j] = i;
    }
    let mut nonzeros: Vec<(usize, usize, Complex64)> = Vec::with_capacity(3 * n);
    for i in 0..n {
        nonzeros.push((i, i, t.diag()[i]));
        if i + 1 < n {
            nonzeros.push((i, i + 1, t.off()[i]));
            nonzeros.push((i + 1, i, t.off()[i]));
        }
    }
    let mut diff: HashMap<(usize, usize), Complex64> = HashMap::with_capacity(6 * n);
    for &(p, q, x) in &nonzeros {
        // (U X̄ U†)_{ab} = u_a conj(X_{π(a)π(b)}) conj(u_b)
        let (a_idx, b_idx) = (inverse[p], inverse[q]);
        let ua = entries[a_idx].1;
        let ub = entries[b_idx].1;
        *diff.entry((a_idx, b_idx)).or_insert(ZERO) += ua * x.conj() * ub.conj();
        *diff.entry((p, q)).or_insert(ZERO) -= x;
    }
    let norm = diff.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(norm / t.frobenius_norm().max(1.0))
}

/// The transported operator `V∘A∘V⁻¹`, with unitary part `V·U·Vᵀ`.
pub fn conjugate_basis(a: &AntiUnitaryOp, v: &CMatrix) -> Result<AntiUnitaryOp> {
    a.check_dim(v.dim())?;
    let deviation = max_unitarity_deviation(v);
    if !(deviation <= 1e-10) {
        return Err(Error::NotUnitary { deviation });
    }
    let u = v.matmul(&a.unitary_part()).matmul(&v.transpose());
    // rounding in the product may exceed the strict bound for large dims
    AntiUnitaryOp::with_tolerance(u, a.label.clone(), 1e-10)
}
