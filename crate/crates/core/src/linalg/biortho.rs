//! Bi-orthonormal eigensystems of diagonalizable non-hermitean matrices.

use num_complex::Complex64;

use super::eig::{self, spectral_scale, sorted_order};
use super::matrix::{inner, norm, CMatrix, CVector};
use super::tridiag::Tridiagonal;
use crate::config::COND_LIMIT;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Eigenvalues with paired right (`ψ_n`) and left (`ψⁿ`) eigenvectors.
///
/// Right vectors have unit norm; left vectors are scaled so that
/// `⟨ψⁿ|ψ_m⟩ = δ`. `cond` is `max_n ‖ψ_n‖·‖ψⁿ‖`, equal to one for normal
/// matrices and diverging at an exceptional point.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub eigenvalues: Vec<Complex64>,
    pub right: Vec<CVector>,
    pub left: Vec<CVector>,
    pub cond: f64,
    /// Index groups of numerically degenerate eigenvalues, in sorted order.
    pub clusters: Vec<Vec<usize>>,
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of the adjoint, index-matched: `Eⁿ = conj(E_n)`.
    pub fn left_eigenvalues(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|z| z.conj()).collect()
    }

    /// `max_{m,n} |⟨ψᵐ|ψ_n⟩ − δ_mn|`.
    pub fn duality_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in 0..n {
                let target = if m == k { 1.0 } else { 0.0 };
                let d = (inner(&self.left[m], &self.right[k]) - target).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `‖Σ_n |ψ_n⟩⟨ψⁿ| − I‖_F`.
    pub fn resolution_residual(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.right[k][i] * self.left[k][j].conj();
                }
                if i == j {
                    s -= 1.0;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖Σ_n |ψⁿ⟩⟨ψ_n| − I‖_F`, the second resolution of unity.
    pub fn dual_resolution_residual(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = ZERO;
                for k in 0..n {
                    s += self.left[k][i] * self.right[k][j].conj();
                }
                if i == j {
                    s -= 1.0;
                }
                acc += s.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Groups sorted eigenvalues into clusters: single-linkage with threshold
/// `tol · max(1, spectral radius)`.
pub fn cluster_eigenvalues(vals: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = vals.len();
    let thresh = tol * spectral_scale(vals);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (vals[i] - vals[j]).norm() <= thresh {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Bi-orthonormal system of a dense matrix.
pub fn biorthogonalize(h: &CMatrix, tol_degeneracy: f64) -> Result<BiorthogonalSystem> {
    let schur = eig::schur(h)?;
    let raw = schur.eigenvalues();
    let cluster_tol = tol_degeneracy * spectral_scale(&raw);
    let right_raw = eig::right_eigenvectors(&schur, cluster_tol);
    let left_raw = eig::left_eigenvectors(&schur, cluster_tol);
    let order = sorted_order(&raw);
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| raw[i]).collect();
    let right: Vec<CVector> = order.iter().map(|&i| right_raw[i].clone()).collect();
    let mut left: Vec<CVector> = order.iter().map(|&i| left_raw[i].clone()).collect();
    let clusters = cluster_eigenvalues(&eigenvalues, tol_degeneracy);

    // defective eigenvalues show up as large residuals of the computed vectors
    let hnorm = h.frobenius_norm().max(1.0);
    for (v, lam) in right.iter().zip(&eigenvalues) {
        let hv = h.matvec(v);
        let res = hv.iter().zip(v).map(|(a, b)| (a - lam * b).norm_sqr()).sum::<f64>().sqrt();
        if !(res <= 1e-6 * hnorm) {
            return Err(Error::NotDiagonalizable { cond: f64::INFINITY });
        }
    }

    // per-cluster biorthogonalization: L_c ← L_c (L_c† R_c)^{-†}
    for cluster in &clusters {
        let k = cluster.len();
        let m = CMatrix::from_fn(k, |a, b| inner(&left[cluster[a]], &right[cluster[b]]));
        let minv_adj = match m.inverse() {
            Ok(inv) => inv.adjoint(),
            Err(_) => return Err(Error::NotDiagonalizable { cond: f64::INFINITY }),
        };
        let old: Vec<CVector> = cluster.iter().map(|&i| left[i].clone()).collect();
        for (b, &idx) in cluster.iter().enumerate() {
            let mut v = vec![ZERO; h.dim()];
            for (a, col) in old.iter().enumerate() {
                let f = minv_adj[(a, b)];
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi += ci * f;
                }
            }
            left[idx] = v;
        }
    }

    let cond = left
        .iter()
        .zip(&right)
        .map(|(l, r)| norm(l) * norm(r))
        .fold(0.0, f64::max);
    if !(cond <= COND_LIMIT) {
        return Err(Error::NotDiagonalizable { cond });
    }

    // global near-identity correction so that L†R = I to working precision
    let n = h.dim();
    let gram = CMatrix::from_fn(n, |a, b| inner(&left[a], &right[b]));
    if let Ok(inv) = gram.inverse() {
        let corr = inv.adjoint();
        let old = left.clone();
        for b in 0..n {
            let mut v = vec![ZERO; n];
            for (a, col) in old.iter().enumerate() {
                let f = corr[(a, b)];
                if f == ZERO {
                    continue;
                }
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi += ci * f;
                }
            }
            left[b] = v;
        }
    }

    Ok(BiorthogonalSystem {
        eigenvalues,
        right,
        left,
        cond,
        clusters,
    })
}

/// Bi-orthonormal system of a complex symmetric tridiagonal matrix, using
/// `ψⁿ = conj(ψ_n) / conj(ψ_nᵀψ_n)`.
pub fn biorthogonalize_tridiagonal(
    t: &Tridiagonal,
    tol_degeneracy: f64,
) -> Result<BiorthogonalSystem> {
    let eigenvalues = t.eigenvalues()?;
    let clusters = cluster_eigenvalues(&eigenvalues, tol_degeneracy);
    if clusters.iter().any(|c| c.len() > 1) {
        // an unreduced symmetric tridiagonal matrix has no semisimple
        // degenerate eigenvalues; coincident values mean a Jordan block
        return Err(Error::NotDiagonalizable { cond: f64::INFINITY });
    }
    let mut right = Vec::with_capacity(eigenvalues.len());
    let mut left = Vec::with_capacity(eigenvalues.len());
    let mut cond: f64 = 0.0;
    for &lam in &eigenvalues {
        let r = t.inverse_iteration(lam);
        let s = super::matrix::dot_unconj(&r, &r);
        let l: CVector = r.iter().map(|z| z.conj() / s.conj()).collect();
        cond = cond.max(norm(&l));
        right.push(r);
        left.push(l);
    }
    if !(cond <= COND_LIMIT) {
        return Err(Error::NotDiagonalizable { cond });
    }
    Ok(BiorthogonalSystem {
        eigenvalues,
        right,
        left,
        cond,
        clusters,
    })
}
