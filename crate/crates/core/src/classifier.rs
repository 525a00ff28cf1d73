//! Classification of the spectrum of a non-hermitean operator `H` with an
//! anti-unitary symmetry `A` into Wigner's representation types.
//!
//! | kind            | `Ω = ω²`   | action of `A`                       | dim |
//! |-----------------|------------|-------------------------------------|-----|
//! | `GammaStar2D`   | `Ω ≠ Ω*`   | `A|Ω⟩ = ω*|Ω*⟩`, `A|Ω*⟩ = ω|Ω⟩`     | 2   |
//! | `GammaMinus2D`  | `−1`       | `A|−⟩ = −i|−*⟩`, `A|−*⟩ = +i|−⟩`    | 2   |
//! | `GammaPlus2D`   | `+1`       | `A|+⟩ = |+*⟩`, `A|+*⟩ = |+⟩`        | 2   |
//! | `GammaPlus1D`   | `+1`       | `A|1⟩ = |1⟩`                        | 1   |
//!
//! Two-dimensional kinds with a real, twofold degenerate energy are reported
//! with the `*Deg` variants.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antiunitary::AntiUnitaryOp;
use crate::config::Tolerances;
use crate::linalg::matrix::{axpy_sub, inner, norm, normalized, orthonormalize, overlap, scaled, CVector};
use crate::linalg::{cluster_eigenvalues, eig, BiorthogonalSystem, CMatrix, SpectralOperator};
use crate::{Error, Result};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepKind {
    GammaPlus1D,
    GammaPlus2D,
    GammaMinus2D,
    GammaStar2D,
    GammaPlusDeg,
    GammaMinusDeg,
    GammaStarDeg,
}

impl RepKind {
    pub const ALL: [RepKind; 7] = [
        RepKind::GammaPlus1D,
        RepKind::GammaPlus2D,
        RepKind::GammaMinus2D,
        RepKind::GammaStar2D,
        RepKind::GammaPlusDeg,
        RepKind::GammaMinusDeg,
        RepKind::GammaStarDeg,
    ];

    pub fn dimension(self) -> usize {
        match self {
            RepKind::GammaPlus1D => 1,
            _ => 2,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            RepKind::GammaPlusDeg | RepKind::GammaMinusDeg | RepKind::GammaStarDeg
        )
    }

    /// Two-dimensional kinds with a complex-conjugate energy pair.
    pub fn is_conjugate_pair(self) -> bool {
        matches!(
            self,
            RepKind::GammaPlus2D | RepKind::GammaMinus2D | RepKind::GammaStar2D
        )
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RepKind::GammaPlus1D => "γ₊",
            RepKind::GammaPlus2D => "Γ₊",
            RepKind::GammaMinus2D => "Γ₋",
            RepKind::GammaStar2D => "Γ*",
            RepKind::GammaPlusDeg => "Γ₊ᵈ",
            RepKind::GammaMinusDeg => "Γ₋ᵈ",
            RepKind::GammaStarDeg => "Γ*ᵈ",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RepKind::GammaPlus1D => "GammaPlus1D",
            RepKind::GammaPlus2D => "GammaPlus2D",
            RepKind::GammaMinus2D => "GammaMinus2D",
            RepKind::GammaStar2D => "GammaStar2D",
            RepKind::GammaPlusDeg => "GammaPlusDeg",
            RepKind::GammaMinusDeg => "GammaMinusDeg",
            RepKind::GammaStarDeg => "GammaStarDeg",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl std::fmt::Display for RepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One classified block.
#[derive(Debug, Clone, PartialEq)]
pub struct RepBlock {
    pub kind: RepKind,
    /// Eigenvalue `Ω` of `A²` on the primary state.
    pub omega_sq: Complex64,
    /// Flipping value `ω` with `ω² = Ω`; `None` for gauge-fixed `γ₊`.
    pub omega: Option<Complex64>,
    /// One energy for `γ₊`, otherwise `(E, partner energy)`.
    pub energies: Vec<Complex64>,
    pub state_indices: Vec<usize>,
    pub residuals: BTreeMap<String, f64>,
    /// Primary state (gauge-fixed for `γ₊`) and, for 2D kinds, its partner.
    pub states: Vec<CVector>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicities {
    pub n_star: usize,
    pub n_minus: usize,
    pub n_plus: usize,
    pub n_plus_1d: usize,
    pub n_star_deg: usize,
    pub n_minus_deg: usize,
    pub n_plus_deg: usize,
}

impl Multiplicities {
    pub fn from_kinds(kinds: impl IntoIterator<Item = RepKind>) -> Self {
        let mut m = Self::default();
        for k in kinds {
            match k {
                RepKind::GammaPlus1D => m.n_plus_1d += 1,
                RepKind::GammaPlus2D => m.n_plus += 1,
                RepKind::GammaMinus2D => m.n_minus += 1,
                RepKind::GammaStar2D => m.n_star += 1,
                RepKind::GammaPlusDeg => m.n_plus_deg += 1,
                RepKind::GammaMinusDeg => m.n_minus_deg += 1,
                RepKind::GammaStarDeg => m.n_star_deg += 1,
            }
        }
        m
    }

    /// `2·(N* + N₋ + N₊ + degenerate) + n₊`.
    pub fn total_dimension(&self) -> usize {
        2 * (self.n_star + self.n_minus + self.n_plus + self.n_star_deg + self.n_minus_deg + self.n_plus_deg)
            + self.n_plus_1d
    }

    pub fn complex_pairs(&self) -> usize {
        self.n_star + self.n_minus + self.n_plus
    }
}

impl std::fmt::Display for Multiplicities {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N*={} N-={} N+={} n+={}",
            self.n_star + self.n_star_deg,
            self.n_minus + self.n_minus_deg,
            self.n_plus + self.n_plus_deg,
            self.n_plus_1d
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unassigned {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub blocks: Vec<RepBlock>,
    pub multiplicities: Multiplicities,
    pub commutation_residual: f64,
    pub unassigned: Vec<Unassigned>,
    pub dim: usize,
    pub cond: f64,
}

impl ClassificationReport {
    /// Sorted `(kind, primary energy)` list, convenient for comparisons.
    pub fn signature(&self) -> Vec<(RepKind, Complex64)> {
        let mut sig: Vec<(RepKind, Complex64)> = self.blocks.iter().map(|b| (b.kind, b.energies[0])).collect();
        sig.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.re.total_cmp(&b.1.re))
                .then(a.1.im.total_cmp(&b.1.im))
        });
        sig
    }

    /// Representation kind of every state index covered by a block.
    pub fn kind_of_state(&self) -> Vec<Option<RepKind>> {
        let mut out = vec![None; self.dim];
        for b in &self.blocks {
            for &i in &b.state_indices {
                if i < out.len() {
                    out[i] = Some(b.kind);
                }
            }
        }
        out
    }
}

/// Principal square root `ω` of a unimodular `Ω`, with `arg ω ∈ (−π/2, π/2]`
/// so that `Ω = −1 ↦ ω = i`.
pub fn flip_value(omega_sq: Complex64) -> Result<Complex64> {
    if !((omega_sq.norm() - 1.0).abs() <= 1e-6) {
        return Err(Error::NotUnimodular { value: omega_sq });
    }
    let mut theta = omega_sq.arg();
    if theta <= -PI {
        theta = PI;
    }
    Ok(Complex64::from_polar(1.0, theta / 2.0))
}

/// Rephases a state with `Aψ = e^{iθ}ψ` into a fixed point of `A`.
///
/// Returns `(ψ', e^{iθ/2})` with `ψ' = e^{iθ/2}ψ`; antilinearity gives
/// `Aψ' = e^{−iθ/2}e^{iθ}ψ = ψ'`.
pub fn gauge_fix(psi: &[Complex64], a: &AntiUnitaryOp) -> Result<(CVector, Complex64)> {
    gauge_fix_with_tol(psi, a, 1e-8)
}

pub fn gauge_fix_with_tol(psi: &[Complex64], a: &AntiUnitaryOp, tol: f64) -> Result<(CVector, Complex64)> {
    let phi = a.apply(psi)?;
    let ov = overlap(psi, &phi);
    let np = norm(psi);
    if np == 0.0 || !(ov >= 1.0 - tol) {
        return Err(Error::NotProportional { overlap: ov });
    }
    let ratio = inner(psi, &phi) / (np * np);
    if !((ratio.norm() - 1.0).abs() <= tol.sqrt().max(1e-10)) {
        return Err(Error::NotProportional { overlap: ov });
    }
    let theta = ratio.arg();
    let theta = if theta <= -PI { PI } else { theta };
    let phase = Complex64::from_polar(1.0, theta / 2.0);
    Ok((scaled(psi, phase), phase))
}

/// Classifies `H` (dense or tridiagonal) with respect to `A`.
pub fn classify<H: SpectralOperator + ?Sized>(
    h: &H,
    a: &AntiUnitaryOp,
    tol: &Tolerances,
) -> Result<ClassificationReport> {
    tol.validate()?;
    let residual = h.commutation_residual(a)?;
    if !(residual <= tol.symmetry) {
        return Err(Error::SymmetryViolated {
            residual,
            tol: tol.symmetry,
        });
    }
    let sys = h.biorthogonalize(tol.degeneracy)?;
    classify_system(h, a, &sys, residual, tol)
}

/// Convenience wrapper using the default tolerances with `tol` for the
/// reality, proportionality and degeneracy thresholds.
pub fn classify_matrix(h: &CMatrix, a: &AntiUnitaryOp, tol: f64) -> Result<ClassificationReport> {
    classify(h, a, &Tolerances::uniform(tol))
}

struct Ctx<'a, H: SpectralOperator + ?Sized> {
    h: &'a H,
    a: &'a AntiUnitaryOp,
    sys: &'a BiorthogonalSystem,
    tol: &'a Tolerances,
    hscale: f64,
}

impl<H: SpectralOperator + ?Sized> Ctx<'_, H> {
    fn is_real(&self, e: Complex64) -> bool {
        e.im.abs() <= self.tol.reality * e.norm().max(1.0)
    }

    fn energy_defect(&self, v: &[Complex64], e: Complex64) -> f64 {
        let hv = self.h.apply(v);
        let res = hv.iter().zip(v).map(|(x, y)| (x - e * y).norm_sqr()).sum::<f64>().sqrt();
        res / (norm(v) * e.norm().max(1.0).max(self.hscale))
    }

    /// Rayleigh quotient of `A²` on `ψ` and its residual.
    fn omega_of(&self, psi: &[Complex64]) -> (Complex64, f64) {
        let s = self.a.apply_unchecked(&self.a.apply_unchecked(psi));
        let np = norm(psi);
        let omega_sq = inner(psi, &s) / (np * np);
        let res = s
            .iter()
            .zip(psi)
            .map(|(x, y)| (x - omega_sq * y).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / np;
        (omega_sq, res)
    }

    fn omega_tol(&self) -> f64 {
        self.tol.defect_limit()
    }
}

pub(crate) fn classify_system<H: SpectralOperator + ?Sized>(
    h: &H,
    a: &AntiUnitaryOp,
    sys: &BiorthogonalSystem,
    commutation_residual: f64,
    tol: &Tolerances,
) -> Result<ClassificationReport> {
    let n = sys.dim();
    // energy defects of eigenvectors are limited by the backward error of
    // the eigensolver, which scales with ‖H‖ rather than |E|
    let hscale = 1e-6 * h.frobenius_norm() / (n as f64).sqrt().max(1.0);
    let ctx = Ctx {
        h,
        a,
        sys,
        tol,
        hscale,
    };
    let clusters = if sys.clusters.is_empty() {
        cluster_eigenvalues(&sys.eigenvalues, tol.degeneracy)
    } else {
        sys.clusters.clone()
    };
    let center = |c: &[usize]| -> Complex64 {
        c.iter().map(|&i| sys.eigenvalues[i]).sum::<Complex64>() / c.len() as f64
    };

    let mut blocks: Vec<RepBlock> = Vec::new();
    let mut unassigned: Vec<Unassigned> = Vec::new();

    let mut upper: Vec<usize> = Vec::new();
    let mut lower: Vec<usize> = Vec::new();
    for (ci, c) in clusters.iter().enumerate() {
        let e = center(c);
        if ctx.is_real(e) {
            if c.len() == 1 {
                classify_real_single(&ctx, c[0], &mut blocks, &mut unassigned);
            } else {
                classify_real_degenerate(&ctx, c, e, &mut blocks, &mut unassigned);
            }
        } else if e.im > 0.0 {
            upper.push(ci);
        } else {
            lower.push(ci);
        }
    }

    // conjugate pairing: mutual nearest match of E against conj(E')
    let mut lower_used = vec![false; lower.len()];
    for &ui in &upper {
        let eu = center(&clusters[ui]);
        let best = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !lower_used[*k])
            .map(|(k, &li)| (k, (center(&clusters[li]) - eu.conj()).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some((k, dist)) = best else {
            let idx = clusters[ui][0];
            return Err(Error::UnpairedEigenvalue {
                index: idx,
                value: sys.eigenvalues[idx],
            });
        };
        let li = lower[k];
        let el = center(&clusters[li]);
        // mutual-best check from the lower side
        let back = upper
            .iter()
            .map(|&u2| (u2, (center(&clusters[u2]).conj() - el).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|x| x.0);
        let pair_tol = 1e-6 * eu.norm().max(1.0);
        if back != Some(ui) || dist > pair_tol || clusters[ui].len() != clusters[li].len() {
            let idx = clusters[ui][0];
            return Err(Error::UnpairedEigenvalue {
                index: idx,
                value: sys.eigenvalues[idx],
            });
        }
        lower_used[k] = true;
        classify_complex_pair(&ctx, &clusters[ui], &clusters[li], &mut blocks, &mut unassigned);
    }
    if let Some(k) = lower_used.iter().position(|u| !u) {
        let idx = clusters[lower[k]][0];
        return Err(Error::UnpairedEigenvalue {
            index: idx,
            value: sys.eigenvalues[idx],
        });
    }

    blocks.sort_by(|x, y| {
        let (a, b) = (x.energies[0], y.energies[0]);
        a.re.total_cmp(&b.re)
            .then(a.im.total_cmp(&b.im))
            .then(x.kind.cmp(&y.kind))
            .then(x.state_indices.cmp(&y.state_indices))
    });
    unassigned.sort_by_key(|u| u.index);
    let multiplicities = Multiplicities::from_kinds(blocks.iter().map(|b| b.kind));
    Ok(ClassificationReport {
        blocks,
        multiplicities,
        commutation_residual,
        unassigned,
        dim: n,
        cond: sys.cond,
    })
}

fn classify_real_single<H: SpectralOperator + ?Sized>(
    ctx: &Ctx<'_, H>,
    idx: usize,
    blocks: &mut Vec<RepBlock>,
    unassigned: &mut Vec<Unassigned>,
) {
    let psi = &ctx.sys.right[idx];
    let e = ctx.sys.eigenvalues[idx];
    let (omega_sq, omega_defect) = ctx.omega_of(psi);
    let phi = ctx.a.apply_unchecked(psi);
    let ov = overlap(psi, &phi);
    if !(ov >= 1.0 - ctx.tol.proportionality) {
        unassigned.push(Unassigned {
            index: idx,
            reason: format!(
                "real nondegenerate eigenvalue whose state is not mapped onto itself (overlap {ov:.3e})"
            ),
        });
        return;
    }
    if !((omega_sq - ONE).norm() <= ctx.omega_tol()) {
        unassigned.push(Unassigned {
            index: idx,
            reason: format!("A-invariant state with inconsistent Omega = {omega_sq}"),
        });
        return;
    }
    let Ok((fixed, _phase)) = gauge_fix_with_tol(psi, ctx.a, ctx.tol.proportionality) else {
        unassigned.push(Unassigned {
            index: idx,
            reason: "gauge fix failed".into(),
        });
        return;
    };
    let af = ctx.a.apply_unchecked(&fixed);
    let flip_defect = crate::linalg::matrix::diff_norm(&af, &fixed) / norm(&fixed);
    let mut residuals = BTreeMap::new();
    residuals.insert("omega_defect".into(), omega_defect);
    residuals.insert("proportionality_defect".into(), 1.0 - ov);
    residuals.insert("flip_defect".into(), flip_defect);
    residuals.insert("energy_defect".into(), ctx.energy_defect(&fixed, e));
    if flip_defect > ctx.omega_tol() {
        unassigned.push(Unassigned {
            index: idx,
            reason: format!("gauge-fixed state not invariant (defect {flip_defect:.3e})"),
        });
        return;
    }
    blocks.push(RepBlock {
        kind: RepKind::GammaPlus1D,
        omega_sq,
        omega: None,
        energies: vec![e],
        state_indices: vec![idx],
        residuals,
        states: vec![fixed],
    });
}

/// Real eigenvalue of multiplicity `k ≥ 2`: analyse `A` restricted to the
/// eigenspace through the projected unitary `a = Q†·U·conj(Q)`.
fn classify_real_degenerate<H: SpectralOperator + ?Sized>(
    ctx: &Ctx<'_, H>,
    cluster: &[usize],
    e: Complex64,
    blocks: &mut Vec<RepBlock>,
    unassigned: &mut Vec<Unassigned>,
) {
    let vecs: Vec<CVector> = cluster.iter().map(|&i| ctx.sys.right[i].clone()).collect();
    let q = orthonormalize(&vecs, 1e-8);
    let k = q.len();
    if k != cluster.len() {
        for &i in cluster {
            unassigned.push(Unassigned {
                index: i,
                reason: "degenerate eigenvectors are linearly dependent".into(),
            });
        }
        return;
    }
    let aq: Vec<CVector> = q.iter().map(|v| ctx.a.apply_unchecked(v)).collect();
    // A(Q c) = Q (proj · conj(c)), proj[m][j] = ⟨q_m, A q_j⟩
    let proj = CMatrix::from_fn(k, |m, j| inner(&q[m], &aq[j]));
    // leakage of A out of the eigenspace signals an inconsistent block
    let leak = aq
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut w = v.clone();
            for m in 0..k {
                axpy_sub(&mut w, proj[(m, j)], &q[m]);
            }
            norm(&w)
        })
        .fold(0.0, f64::max);
    let s_small = proj.matmul(&proj.conj());
    let Ok((omegas, coeffs)) = eig::eig_general(&s_small) else {
        for &i in cluster {
            unassigned.push(Unassigned {
                index: i,
                reason: "could not diagonalize A² on the eigenspace".into(),
            });
        }
        return;
    };
    let lift = |c: &CVector| -> CVector {
        let mut v = vec![Complex64::new(0.0, 0.0); q[0].len()];
        for (m, &cm) in c.iter().enumerate() {
            for (vi, qi) in v.iter_mut().zip(&q[m]) {
                *vi += cm * qi;
            }
        }
        v
    };
    let otol = ctx.omega_tol();
    let mut plus: Vec<CVector> = Vec::new();
    let mut minus: Vec<CVector> = Vec::new();
    let mut star_up: Vec<(Complex64, CVector)> = Vec::new();
    let mut star_down = 0usize;
    for (om, c) in omegas.iter().zip(&coeffs) {
        let v = lift(c);
        if (om - ONE).norm() <= otol {
            plus.push(v);
        } else if (om + ONE).norm() <= otol {
            minus.push(v);
        } else if om.im > 0.0 {
            star_up.push((*om, v));
        } else {
            star_down += 1;
        }
    }
    let mut slots = cluster.iter().copied();
    let mut take = |count: usize| -> Vec<usize> { (&mut slots).take(count).collect() };
    let mut base_residuals = BTreeMap::new();
    base_residuals.insert("subspace_leakage".to_string(), leak);

    // Ω = +1: A-fixed orthonormal basis, paired into Γ₊ᵈ, odd one out is γ₊
    let fixed = fixed_basis(&plus, ctx.a);
    let mut it = fixed.chunks(2);
    for chunk in &mut it {
        let idx = take(chunk.len());
        let mut residuals = base_residuals.clone();
        let flip = chunk
            .iter()
            .map(|v| crate::linalg::matrix::diff_norm(&ctx.a.apply_unchecked(v), v))
            .fold(0.0, f64::max);
        residuals.insert("flip_defect".into(), flip);
        residuals.insert(
            "energy_defect".into(),
            chunk.iter().map(|v| ctx.energy_defect(v, e)).fold(0.0, f64::max),
        );
        let kind = if chunk.len() == 2 {
            RepKind::GammaPlusDeg
        } else {
            RepKind::GammaPlus1D
        };
        push_checked(
            ctx,
            RepBlock {
                kind,
                omega_sq: ONE,
                omega: if kind == RepKind::GammaPlus1D { None } else { Some(ONE) },
                energies: vec![e; chunk.len()],
                state_indices: idx,
                residuals,
                states: chunk.to_vec(),
            },
            blocks,
            unassigned,
        );
    }

    // Ω = −1: Kramers pairs (w, i·A w)
    let minus_basis = orthonormalize(&minus, 1e-8);
    let mut remaining = minus_basis;
    while let Some(w) = remaining.first().cloned() {
        let p = scaled(&ctx.a.apply_unchecked(&w), I);
        if remaining.len() < 2 {
            for i in take(1) {
                unassigned.push(Unassigned {
                    index: i,
                    reason: "odd-dimensional Omega = -1 eigenspace".into(),
                });
            }
            break;
        }
        let idx = take(2);
        let (omega_sq, omega_defect) = ctx.omega_of(&w);
        let mut residuals = base_residuals.clone();
        residuals.insert("omega_defect".into(), omega_defect);
        residuals.insert(
            "flip_defect".into(),
            crate::linalg::matrix::diff_norm(&ctx.a.apply_unchecked(&p), &scaled(&w, I)),
        );
        residuals.insert("energy_defect".into(), ctx.energy_defect(&p, e));
        push_checked(
            ctx,
            RepBlock {
                kind: RepKind::GammaMinusDeg,
                omega_sq,
                omega: Some(I),
                energies: vec![e, e],
                state_indices: idx,
                residuals,
                states: vec![w.clone(), p.clone()],
            },
            blocks,
            unassigned,
        );
        let mut rest: Vec<CVector> = remaining[1..].to_vec();
        for v in rest.iter_mut() {
            for basis in [&w, &normalized(&p)] {
                let c = inner(basis, v);
                axpy_sub(v, c, basis);
            }
        }
        remaining = orthonormalize(&rest, 1e-6);
    }

    // complex Ω: flipping pairs (w, ω A w)
    if star_up.len() != star_down {
        for i in take(usize::MAX) {
            unassigned.push(Unassigned {
                index: i,
                reason: "unbalanced complex Omega values in degenerate eigenspace".into(),
            });
        }
        return;
    }
    for (om, w) in star_up {
        let idx = take(2);
        let Ok(omega) = flip_value(om) else {
            for i in idx {
                unassigned.push(Unassigned {
                    index: i,
                    reason: format!("non-unimodular Omega = {om}"),
                });
            }
            continue;
        };
        let p = scaled(&ctx.a.apply_unchecked(&w), omega);
        let (omega_sq, omega_defect) = ctx.omega_of(&w);
        let mut residuals = base_residuals.clone();
        residuals.insert("omega_defect".into(), omega_defect);
        residuals.insert(
            "flip_defect".into(),
            crate::linalg::matrix::diff_norm(&ctx.a.apply_unchecked(&p), &scaled(&w, omega)) / norm(&w),
        );
        residuals.insert("energy_defect".into(), ctx.energy_defect(&p, e));
        push_checked(
            ctx,
            RepBlock {
                kind: RepKind::GammaStarDeg,
                omega_sq,
                omega: Some(omega),
                energies: vec![e, e],
                state_indices: idx,
                residuals,
                states: vec![w, p],
            },
            blocks,
            unassigned,
        );
    }
    for i in take(usize::MAX) {
        unassigned.push(Unassigned {
            index: i,
            reason: "state left over in degenerate eigenspace".into(),
        });
    }
}

/// Orthonormal basis of `A`-fixed vectors spanning the same space as `vecs`
/// (requires `A² = 1` there).
fn fixed_basis(vecs: &[CVector], a: &AntiUnitaryOp) -> Vec<CVector> {
    let mut remaining = orthonormalize(vecs, 1e-8);
    let mut out: Vec<CVector> = Vec::new();
    while let Some(w) = remaining.first().cloned() {
        let aw = a.apply_unchecked(&w);
        let sym: CVector = w.iter().zip(&aw).map(|(x, y)| x + y).collect();
        let anti: CVector = w.iter().zip(&aw).map(|(x, y)| (x - y) * I).collect();
        let f = if norm(&sym) >= norm(&anti) { sym } else { anti };
        let f = normalized(&f);
        let mut rest: Vec<CVector> = remaining[1..].to_vec();
        for v in rest.iter_mut() {
            let c = inner(&f, v);
            axpy_sub(v, c, &f);
        }
        // w itself may retain a component orthogonal to f
        let mut wr = w.clone();
        let c = inner(&f, &wr);
        axpy_sub(&mut wr, c, &f);
        out.push(f);
        let mut candidates = vec![wr];
        candidates.extend(rest);
        let mut next = Vec::new();
        for v in candidates {
            let mut v = v;
            for b in &out {
                let c = inner(b, &v);
                axpy_sub(&mut v, c, b);
            }
            next.push(v);
        }
        remaining = orthonormalize(&next, 1e-6);
        if out.len() >= vecs.len() {
            break;
        }
    }
    out
}

fn push_checked<H: SpectralOperator + ?Sized>(
    ctx: &Ctx<'_, H>,
    block: RepBlock,
    blocks: &mut Vec<RepBlock>,
    unassigned: &mut Vec<Unassigned>,
) {
    let limit = ctx.omega_tol();
    let worst = ["flip_defect", "omega_defect", "subspace_leakage", "energy_defect"]
        .iter()
        .filter_map(|k| block.residuals.get(*k).map(|v| (*k, *v)))
        .find(|(_, v)| !(*v <= limit));
    if let Some((name, value)) = worst {
        for &i in &block.state_indices {
            unassigned.push(Unassigned {
                index: i,
                reason: format!("inconsistent {} block: {name} = {value:.3e}", block.kind.name()),
            });
        }
    } else {
        blocks.push(block);
    }
}

fn classify_complex_pair<H: SpectralOperator + ?Sized>(
    ctx: &Ctx<'_, H>,
    up: &[usize],
    down: &[usize],
    blocks: &mut Vec<RepBlock>,
    unassigned: &mut Vec<Unassigned>,
) {
    let sys = ctx.sys;
    // states carrying definite Ω inside the E-eigenspace
    let primaries: Vec<(CVector, usize, usize)> = if up.len() == 1 {
        vec![(sys.right[up[0]].clone(), up[0], down[0])]
    } else {
        let vecs: Vec<CVector> = up.iter().map(|&i| sys.right[i].clone()).collect();
        let q = orthonormalize(&vecs, 1e-8);
        if q.len() != up.len() {
            for &i in up.iter().chain(down) {
                unassigned.push(Unassigned {
                    index: i,
                    reason: "degenerate eigenvectors are linearly dependent".into(),
                });
            }
            return;
        }
        let sq: Vec<CVector> = q
            .iter()
            .map(|v| ctx.a.apply_unchecked(&ctx.a.apply_unchecked(v)))
            .collect();
        let s_small = CMatrix::from_fn(q.len(), |m, j| inner(&q[m], &sq[j]));
        match eig::eig_general(&s_small) {
            Ok((_, coeffs)) => coeffs
                .iter()
                .zip(up.iter().zip(down))
                .map(|(c, (&u, &d))| {
                    let mut v = vec![Complex64::new(0.0, 0.0); q[0].len()];
                    for (m, &cm) in c.iter().enumerate() {
                        for (vi, qi) in v.iter_mut().zip(&q[m]) {
                            *vi += cm * qi;
                        }
                    }
                    (v, u, d)
                })
                .collect(),
            Err(_) => {
                for &i in up.iter().chain(down) {
                    unassigned.push(Unassigned {
                        index: i,
                        reason: "could not diagonalize A² on the eigenspace".into(),
                    });
                }
                return;
            }
        }
    };
    let down_vecs: Vec<CVector> = down.iter().map(|&i| sys.right[i].clone()).collect();
    let down_basis = orthonormalize(&down_vecs, 1e-8);
    let otol = ctx.omega_tol();
    for (psi, iu, id) in primaries {
        let e = sys.eigenvalues[iu];
        let e_partner = sys.eigenvalues[id];
        let (omega_sq, omega_defect) = ctx.omega_of(&psi);
        let (kind, omega) = if (omega_sq - ONE).norm() <= otol {
            (RepKind::GammaPlus2D, Ok(ONE))
        } else if (omega_sq + ONE).norm() <= otol {
            (RepKind::GammaMinus2D, Ok(I))
        } else {
            (RepKind::GammaStar2D, flip_value(omega_sq))
        };
        let Ok(omega) = omega else {
            for i in [iu, id] {
                unassigned.push(Unassigned {
                    index: i,
                    reason: format!("non-unimodular Omega = {omega_sq}"),
                });
            }
            continue;
        };
        // partner |n,Ω*⟩ = ω A |n,Ω⟩
        let partner = scaled(&ctx.a.apply_unchecked(&psi), omega);
        let flip_defect = crate::linalg::matrix::diff_norm(&ctx.a.apply_unchecked(&partner), &scaled(&psi, omega))
            / norm(&psi);
        // partner must lie in the E*-eigenspace spanned by the computed vectors
        let mut resid = partner.clone();
        for b in &down_basis {
            let c = inner(b, &resid);
            axpy_sub(&mut resid, c, b);
        }
        let partner_overlap_defect = norm(&resid) / norm(&partner);
        let mut residuals = BTreeMap::new();
        residuals.insert("omega_defect".into(), omega_defect);
        residuals.insert("flip_defect".into(), flip_defect);
        residuals.insert("energy_defect".into(), ctx.energy_defect(&psi, e));
        residuals.insert("partner_energy_defect".into(), ctx.energy_defect(&partner, e.conj()));
        residuals.insert("partner_overlap_defect".into(), partner_overlap_defect);
        let worst = ["omega_defect", "flip_defect", "partner_energy_defect", "partner_overlap_defect"]
            .iter()
            .map(|k| (*k, residuals[*k]))
            .find(|(_, v)| !(*v <= otol));
        if let Some((name, value)) = worst {
            for i in [iu, id] {
                unassigned.push(Unassigned {
                    index: i,
                    reason: format!("inconsistent {} block: {name} = {value:.3e}", kind.name()),
                });
            }
            continue;
        }
        blocks.push(RepBlock {
            kind,
            omega_sq,
            omega: Some(omega),
            energies: vec![e, e_partner],
            state_indices: vec![iu, id],
            residuals,
            states: vec![psi, partner],
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flip_value_branches() {
        assert!((flip_value(ONE).unwrap() - ONE).norm() < 1e-15);
        assert!((flip_value(-ONE).unwrap() - I).norm() < 1e-15);
        assert!((flip_value(c(-1.0, -0.0)).unwrap() - I).norm() < 1e-15);
        let om = Complex64::from_polar(1.0, PI / 3.0);
        assert!((flip_value(om).unwrap() - Complex64::from_polar(1.0, PI / 6.0)).norm() < 1e-15);
        assert!(matches!(flip_value(c(2.0, 0.0)), Err(Error::NotUnimodular { .. })));
    }

    #[test]
    fn gauge_fix_examples() {
        let a = AntiUnitaryOp::conjugation(2);
        // Aψ = ψ
        let psi = vec![c(1.0, 0.0), c(2.0, 0.0)];
        let (fixed, phase) = gauge_fix(&psi, &a).unwrap();
        assert_eq!(phase, ONE);
        assert_eq!(fixed, psi);
        // Aψ = −ψ: ψ purely imaginary
        let psi = vec![c(0.0, 1.0), c(0.0, -3.0)];
        let (fixed, phase) = gauge_fix(&psi, &a).unwrap();
        assert!((phase - I).norm() < 1e-15);
        let af = a.apply(&fixed).unwrap();
        assert!(crate::linalg::matrix::diff_norm(&af, &fixed) <= 1e-10 * norm(&fixed));
        // Aψ = e^{iπ/3}ψ
        let rot = Complex64::from_polar(1.0, -PI / 6.0);
        let psi = vec![rot * 2.0, rot * 0.5];
        let (fixed, phase) = gauge_fix(&psi, &a).unwrap();
        assert!((phase - Complex64::from_polar(1.0, PI / 6.0)).norm() < 1e-14);
        let af = a.apply(&fixed).unwrap();
        assert!(crate::linalg::matrix::diff_norm(&af, &fixed) <= 1e-10 * norm(&fixed));
        // not proportional
        let psi = vec![c(1.0, 0.0), c(0.0, 1.0)];
        assert!(matches!(gauge_fix(&psi, &a), Err(Error::NotProportional { .. })));
    }

    #[test]
    fn real_diagonal_is_two_gamma_plus() {
        let h = CMatrix::from_diag(&[c(1.0, 0.0), c(2.5, 0.0)]);
        let report = classify_matrix(&h, &AntiUnitaryOp::conjugation(2), 1e-8).unwrap();
        assert_eq!(report.multiplicities.n_plus_1d, 2);
        assert_eq!(report.blocks.len(), 2);
        assert!(report.blocks.iter().all(|b| b.kind == RepKind::GammaPlus1D && b.energies[0].im == 0.0));
        assert_eq!(format!("{}", report.multiplicities), "N*=0 N-=0 N+=0 n+=2");
    }

    #[test]
    fn planted_gamma_minus_block() {
        let e = c(2.0, 1.0);
        let h = CMatrix::from_diag(&[e, e.conj()]);
        let u = CMatrix::from_rows(&[vec![c(0.0, 0.0), -ONE], vec![ONE, c(0.0, 0.0)]]).unwrap();
        let a = AntiUnitaryOp::new(u, "J").unwrap();
        let report = classify_matrix(&h, &a, 1e-8).unwrap();
        assert_eq!(report.multiplicities.n_minus, 1);
        let b = &report.blocks[0];
        assert_eq!(b.kind, RepKind::GammaMinus2D);
        assert!((b.omega_sq + ONE).norm() < 1e-12);
        assert_eq!(b.omega, Some(I));
        // A|−⟩ = −i|−*⟩ and A|−*⟩ = +i|−⟩
        let (minus, minus_star) = (&b.states[0], &b.states[1]);
        let lhs = a.apply(minus).unwrap();
        assert!(crate::linalg::matrix::diff_norm(&lhs, &scaled(minus_star, -I)) < 1e-12);
        let lhs = a.apply(minus_star).unwrap();
        assert!(crate::linalg::matrix::diff_norm(&lhs, &scaled(minus, I)) < 1e-12);
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let h = CMatrix::from_diag(&[c(0.0, 1.0), c(0.0, 0.0)]);
        let err = classify_matrix(&h, &AntiUnitaryOp::conjugation(2), 1e-8).unwrap_err();
        assert!(matches!(err, Error::SymmetryViolated { .. }));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in RepKind::ALL {
            assert_eq!(RepKind::from_name(k.name()), Some(k));
        }
    }
}
