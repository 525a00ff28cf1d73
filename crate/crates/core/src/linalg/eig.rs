//! Dense eigendecomposition of general complex matrices.
//!
//! The matrix is reduced to upper Hessenberg form with Householder
//! reflectors and then to complex Schur form `H = Q T Q†` with an implicit
//! single-shift QR iteration (Wilkinson shifts, occasional exceptional
//! shifts). Right eigenvectors of `T` are obtained by back substitution and
//! left eigenvectors (eigenvectors of `T†`) by forward substitution; both are
//! carried back to the original basis through `Q`.

use num_complex::Complex64;

use super::matrix::{norm, CMatrix, CVector};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Complex Schur form `H = Q T Q†` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: CMatrix,
    pub q: CMatrix,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.dim()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Eigenvalues sorted by `(Re, Im)` ascending together with unit-norm right
/// eigenvectors.
pub fn eig_general(h: &CMatrix) -> Result<(Vec<Complex64>, Vec<CVector>)> {
    let schur = schur(h)?;
    let scale = spectral_scale(&schur.eigenvalues());
    let tol = crate::config::TOL_DEGENERACY * scale;
    let vals = schur.eigenvalues();
    let right = right_eigenvectors(&schur, tol);
    let order = sorted_order(&vals);
    Ok((
        order.iter().map(|&i| vals[i]).collect(),
        order.iter().map(|&i| right[i].clone()).collect(),
    ))
}

/// Eigenvalues only, sorted by `(Re, Im)`.
pub fn eigenvalues(h: &CMatrix) -> Result<Vec<Complex64>> {
    let mut vals = schur(h)?.eigenvalues();
    sort_complex(&mut vals);
    Ok(vals)
}

pub(crate) fn spectral_scale(vals: &[Complex64]) -> f64 {
    vals.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

pub fn sort_complex(vals: &mut [Complex64]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub(crate) fn sorted_order(vals: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        vals[a]
            .re
            .total_cmp(&vals[b].re)
            .then(vals[a].im.total_cmp(&vals[b].im))
    });
    idx
}

/// Complex Schur decomposition of a square matrix.
pub fn schur(h: &CMatrix) -> Result<Schur> {
    if !h.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    let n = h.dim();
    let mut t = h.clone();
    let mut q = CMatrix::identity(n);
    hessenberg(&mut t, &mut q);
    qr_iterate(&mut t, &mut q)?;
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t, q })
}

fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_norm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // A ← (I − 2vv†) A on rows k+1..n
        for j in 0..n {
            let mut s = ZERO;
            for (r, vi) in v.iter().enumerate() {
                s += vi.conj() * a[(k + 1 + r, j)];
            }
            s *= 2.0;
            for (r, vi) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= vi * s;
            }
        }
        // A ← A (I − 2vv†) and Q ← Q (I − 2vv†) on columns k+1..n
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut s = ZERO;
                for (r, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + r)] * vi;
                }
                s *= 2.0;
                for (r, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= s * vi.conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [−s̄, c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let rho = ax.hypot(ay);
    let phase = x / ax;
    (ax / rho, phase * y.conj() / rho)
}

#[inline]
fn rotate_rows(m: &mut CMatrix, k: usize, c: f64, s: Complex64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = m[(k, j)];
        let b = m[(k + 1, j)];
        m[(k, j)] = a * c + s * b;
        m[(k + 1, j)] = -s.conj() * a + b * c;
    }
}

#[inline]
fn rotate_cols(m: &mut CMatrix, k: usize, c: f64, s: Complex64, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = m[(i, k)];
        let b = m[(i, k + 1)];
        m[(i, k)] = a * c + b * s.conj();
        m[(i, k + 1)] = -a * s + b * c;
    }
}

fn qr_iterate(t: &mut CMatrix, q: &mut CMatrix) -> Result<()> {
    let n = t.dim();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64) / eps;
    let max_iter_per_eig = 60;
    let mut ihi = n - 1;
    let mut iter = 0usize;
    while ihi > 0 {
        // locate the start of the active unreduced block
        let mut l = ihi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let mut diag = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if diag == 0.0 {
                diag = (l.saturating_sub(1)..=(l + 1).min(ihi))
                    .map(|i| t[(i, l.saturating_sub(1))].norm())
                    .sum();
            }
            if sub <= small || sub <= eps * diag {
                t[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == ihi {
            ihi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter_per_eig {
            return Err(Error::NoConvergence { index: ihi });
        }

        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            t[(ihi, ihi)] + Complex64::new(0.75 * t[(ihi, ihi - 1)].norm(), 0.0)
        } else if iter.is_multiple_of(17) {
            t[(ihi, ihi)] + Complex64::new(0.0, 0.5 * t[(ihi, ihi - 1)].norm())
        } else {
            wilkinson_shift(
                t[(ihi - 1, ihi - 1)],
                t[(ihi - 1, ihi)],
                t[(ihi, ihi - 1)],
                t[(ihi, ihi)],
            )
        };

        let mut x = t[(l, l)] - mu;
        let mut y = t[(l + 1, l)];
        for k in l..ihi {
            if k > l {
                x = t[(k, k - 1)];
                y = t[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let col_start = if k > l { k - 1 } else { l };
            rotate_rows(t, k, c, s, col_start..n);
            let row_end = (k + 2).min(ihi) + 1;
            rotate_cols(t, k, c, s, 0..row_end);
            rotate_cols(q, k, c, s, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = ZERO;
            }
        }
    }
    Ok(())
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Unit-norm right eigenvectors in Schur order. Diagonal entries of `T`
/// within `cluster_tol` of the target are treated as the same eigenvalue
/// (their coefficient is set to zero), which yields independent vectors for
/// semisimple degenerate eigenvalues.
pub fn right_eigenvectors(schur: &Schur, cluster_tol: f64) -> Vec<CVector> {
    let t = &schur.t;
    let n = t.dim();
    let smin = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut x = vec![ZERO; n];
            x[k] = ONE;
            for i in (0..k).rev() {
                let mut s = ZERO;
                for j in i + 1..=k {
                    s += t[(i, j)] * x[j];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() <= cluster_tol {
                    x[i] = ZERO;
                    continue;
                }
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                x[i] = -s / d;
            }
            let v = schur.q.matvec(&x);
            let nv = norm(&v);
            v.into_iter().map(|z| z / nv).collect()
        })
        .collect()
}

/// Unit-norm left eigenvectors `ψⁿ` (kets with `H†ψⁿ = λ̄ₙψⁿ`) in Schur order.
pub fn left_eigenvectors(schur: &Schur, cluster_tol: f64) -> Vec<CVector> {
    let t = &schur.t;
    let n = t.dim();
    let smin = f64::EPSILON * t.frobenius_norm().max(f64::MIN_POSITIVE);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            // row vector y with y T = λ y
            let mut y = vec![ZERO; n];
            y[k] = ONE;
            for j in k + 1..n {
                let mut s = ZERO;
                for i in k..j {
                    s += y[i] * t[(i, j)];
                }
                let mut d = t[(j, j)] - lambda;
                if d.norm() <= cluster_tol {
                    y[j] = ZERO;
                    continue;
                }
                if d.norm() < smin {
                    d = Complex64::new(smin, 0.0);
                }
                y[j] = -s / d;
            }
            let yc: Vec<Complex64> = y.iter().map(|z| z.conj()).collect();
            let v = schur.q.matvec(&yc);
            let nv = norm(&v);
            v.into_iter().map(|z| z / nv).collect()
        })
        .collect()
}
