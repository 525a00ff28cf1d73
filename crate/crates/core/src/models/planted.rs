//! Synthetic `(H, A)` pairs with known representation content.
//!
//! Each block is a 2×2 (or 1×1) frame on which `A = U∘K` acts as in the
//! representation table; the direct sum is then hidden by a seeded Haar
//! unitary `V`: `H → V H V†`, `U → V U Vᵀ`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antiunitary::{conjugate_basis, AntiUnitaryOp};
use crate::classifier::{flip_value, ClassificationReport, Multiplicities, RepBlock, RepKind};
use crate::linalg::random::{random_unitary, rng};
use crate::linalg::CMatrix;
use crate::{Error, Result};

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBlock {
    pub kind: RepKind,
    pub energy: C,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_sq: Option<C>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPlan {
    pub seed: u64,
    pub blocks: Vec<PlantedBlock>,
}

impl PlantedPlan {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.kind.dimension()).sum()
    }

    pub fn multiplicities(&self) -> Multiplicities {
        Multiplicities::from_kinds(self.blocks.iter().map(|b| b.kind))
    }

    /// Checks the invariants of every block and that distinct blocks do not
    /// share eigenvalues (shared eigenvalues would merge into one
    /// degenerate eigenspace with different representation content).
    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidPlan("plan has no blocks".into()));
        }
        let mut points: Vec<(usize, C)> = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let e = b.energy;
            let bad = |msg: &str| Err(Error::InvalidPlan(format!("block {i} ({}): {msg}", b.kind.name())));
            if !(e.re.is_finite() && e.im.is_finite()) {
                return bad("energy is not finite");
            }
            let scale = e.norm().max(1.0);
            let real = e.im == 0.0;
            match b.kind {
                RepKind::GammaPlus1D | RepKind::GammaPlusDeg | RepKind::GammaMinusDeg | RepKind::GammaStarDeg
                    if !real =>
                {
                    return bad("energy must be real");
                }
                RepKind::GammaPlus2D | RepKind::GammaMinus2D | RepKind::GammaStar2D if e.im.abs() <= 1e-6 * scale => {
                    return bad("energy must have a nonzero imaginary part");
                }
                _ => {}
            }
            let expected_omega = match b.kind {
                RepKind::GammaPlus1D | RepKind::GammaPlus2D | RepKind::GammaPlusDeg => Some(ONE),
                RepKind::GammaMinus2D | RepKind::GammaMinusDeg => Some(-ONE),
                RepKind::GammaStar2D | RepKind::GammaStarDeg => None,
            };
            match (expected_omega, b.omega_sq) {
                (Some(w), Some(given)) if (given - w).norm() > 1e-12 => {
                    return bad(&format!("Omega is fixed to {w} for this kind"));
                }
                (None, None) => return bad("Omega is required"),
                (None, Some(w)) => {
                    if !((w.norm() - 1.0).abs() <= 1e-12) {
                        return bad("Omega must be unimodular");
                    }
                    if w.im.abs() <= 1e-6 {
                        return bad("Omega must lie off the real axis");
                    }
                }
                _ => {}
            }
            points.push((i, e));
            if b.kind.dimension() == 2 {
                points.push((i, e.conj()));
            }
        }
        for (a, &(ia, ea)) in points.iter().enumerate() {
            for &(ib, eb) in &points[a + 1..] {
                if ia != ib && (ea - eb).norm() <= 1e-4 * ea.norm().max(eb.norm()).max(1.0) {
                    return Err(Error::InvalidPlan(format!("blocks {ia} and {ib} share the eigenvalue {ea}")));
                }
            }
        }
        Ok(())
    }
}

fn frame(b: &PlantedBlock) -> (CMatrix, CMatrix) {
    let e = b.energy;
    let h = CMatrix::from_diag(&[e, e.conj()]);
    let u = match b.kind {
        RepKind::GammaPlus1D => return (CMatrix::from_diag(&[e]), CMatrix::identity(1)),
        RepKind::GammaPlus2D | RepKind::GammaPlusDeg => CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        RepKind::GammaMinus2D | RepKind::GammaMinusDeg => {
            CMatrix::from_rows(&[vec![ZERO, -ONE], vec![ONE, ZERO]])
        }
        RepKind::GammaStar2D | RepKind::GammaStarDeg => {
            let w = b.omega_sq.expect("validated");
            CMatrix::from_rows(&[vec![ZERO, ONE], vec![w, ZERO]])
        }
    };
    (h, u.expect("2x2 frame"))
}

/// Block the classifier is expected to report. The primary state is the one
/// with `Im E > 0` (or, for `Γ*ᵈ`, with `Im Ω > 0`).
fn expected_block(b: &PlantedBlock) -> RepBlock {
    let e = b.energy;
    let (energies, omega_sq) = match b.kind {
        RepKind::GammaPlus1D => (vec![e], ONE),
        RepKind::GammaPlus2D => (vec![upper(e), upper(e).conj()], ONE),
        RepKind::GammaMinus2D => (vec![upper(e), upper(e).conj()], -ONE),
        RepKind::GammaPlusDeg => (vec![e, e], ONE),
        RepKind::GammaMinusDeg => (vec![e, e], -ONE),
        RepKind::GammaStar2D => {
            // on diag(E, E*) the square of A is diag(Ω*, Ω)
            let w = b.omega_sq.expect("validated");
            (vec![upper(e), upper(e).conj()], if e.im > 0.0 { w.conj() } else { w })
        }
        RepKind::GammaStarDeg => {
            let w = b.omega_sq.expect("validated");
            (vec![e, e], if w.im > 0.0 { w } else { w.conj() })
        }
    };
    let omega = match b.kind {
        RepKind::GammaPlus1D => None,
        _ => flip_value(omega_sq).ok(),
    };
    RepBlock {
        kind: b.kind,
        omega_sq,
        omega,
        energies,
        state_indices: Vec::new(),
        residuals: BTreeMap::new(),
        states: Vec::new(),
    }
}

fn upper(e: C) -> C {
    if e.im >= 0.0 {
        e
    } else {
        e.conj()
    }
}

/// Assembles the planted pair and the report a correct classifier returns
/// (state indices, residuals and states left empty).
pub fn build_planted(plan: &PlantedPlan) -> Result<(CMatrix, AntiUnitaryOp, ClassificationReport)> {
    plan.validate()?;
    let (hs, us): (Vec<CMatrix>, Vec<CMatrix>) = plan.blocks.iter().map(frame).unzip();
    let h0 = CMatrix::block_diag(&hs);
    let a0 = AntiUnitaryOp::new(CMatrix::block_diag(&us), "planted")?;
    let v = random_unitary(&mut rng(plan.seed), h0.dim());
    let h = v.matmul(&h0).matmul(&v.adjoint());
    let a = conjugate_basis(&a0, &v)?;

    let mut blocks: Vec<RepBlock> = plan.blocks.iter().map(expected_block).collect();
    blocks.sort_by(|x, y| {
        let (a, b) = (x.energies[0], y.energies[0]);
        a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)).then(x.kind.cmp(&y.kind))
    });
    let report = ClassificationReport {
        multiplicities: plan.multiplicities(),
        blocks,
        commutation_residual: 0.0,
        unassigned: Vec::new(),
        dim: h.dim(),
        cond: 1.0,
    };
    Ok((h, a, report))
}

/// Random valid plan of dimension in `[2, max_dim]` mixing every kind.
pub fn random_plan<R: Rng + ?Sized>(r: &mut R, max_dim: usize, seed: u64) -> PlantedPlan {
    let max_dim = max_dim.max(2);
    let target = r.random_range(2..=max_dim);
    let mut blocks: Vec<PlantedBlock> = Vec::new();
    let mut dim = 0;
    while dim < target {
        let kind = if target - dim == 1 {
            RepKind::GammaPlus1D
        } else {
            RepKind::ALL[r.random_range(0..RepKind::ALL.len())]
        };
        let block = loop {
            let re = r.random_range(-5.0..5.0);
            let im = r.random_range(0.3..3.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 };
            let energy = if kind.is_conjugate_pair() { C::new(re, im) } else { C::new(re, 0.0) };
            let omega_sq = matches!(kind, RepKind::GammaStar2D | RepKind::GammaStarDeg).then(|| {
                let phi = r.random_range(0.3..std::f64::consts::PI - 0.3);
                C::from_polar(1.0, if r.random_bool(0.5) { phi } else { -phi })
            });
            let candidate = PlantedBlock { kind, energy, omega_sq };
            // keep eigenvalues of different blocks well apart
            let clash = blocks.iter().any(|b| {
                let pts = |x: &PlantedBlock| [x.energy, x.energy.conj()];
                pts(b).iter().any(|p| pts(&candidate).iter().any(|q| (p - q).norm() < 0.05))
            });
            if !clash {
                break candidate;
            }
        };
        dim += block.kind.dimension();
        blocks.push(block);
    }
    PlantedPlan { seed, blocks }
}
