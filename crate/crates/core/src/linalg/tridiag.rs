//! Complex symmetric tridiagonal matrices.
//!
//! Eigenvalues come from an implicit QL iteration with complex rotations
//! (`c² + s² = 1`, not unitary), which preserves complex symmetry and costs
//! O(n²) overall. Eigenvectors are obtained by inverse iteration with a
//! pivoted tridiagonal solve. Since `Hᵀ = H`, left eigenvectors are the
//! complex conjugates of right ones.

use num_complex::Complex64;

use super::matrix::{norm, CMatrix, CVector};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Complex symmetric tridiagonal matrix: `diag[i] = H[i][i]`,
/// `off[i] = H[i][i+1] = H[i+1][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    diag: Vec<Complex64>,
    off: Vec<Complex64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<Complex64>, off: Vec<Complex64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::InvalidMatrix(format!(
                "off-diagonal length {} does not match dimension {}",
                off.len(),
                diag.len()
            )));
        }
        if !diag.iter().chain(&off).all(|z| z.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entries".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[Complex64] {
        &self.diag
    }

    pub fn off(&self) -> &[Complex64] {
        &self.off
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    pub fn matvec(&self, v: &[Complex64]) -> CVector {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|z| z.norm_sqr()).sum();
        let o: f64 = self.off.iter().map(|z| z.norm_sqr()).sum();
        (d + 2.0 * o).sqrt()
    }

    /// All eigenvalues, sorted by `(Re, Im)`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(ZERO);
        ql_implicit(&mut d, &mut e)?;
        super::eig::sort_complex(&mut d);
        Ok(d)
    }

    /// Unit-norm eigenvector for the (approximate) eigenvalue `lambda`.
    pub fn inverse_iteration(&self, lambda: Complex64) -> CVector {
        let n = self.dim();
        let scale = self.frobenius_norm().max(1.0);
        // keep the shifted matrix numerically nonsingular
        let shift = lambda + Complex64::new(f64::EPSILON * scale, f64::EPSILON * scale);
        let mut x: CVector = (0..n)
            .map(|i| Complex64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.05 * ((i * 104729) % 7) as f64))
            .collect();
        let lu = TridiagLu::factor(self, shift);
        for _ in 0..3 {
            x = lu.solve(&x);
            let nx = norm(&x);
            if !(nx.is_finite() && nx > 0.0) {
                break;
            }
            for z in x.iter_mut() {
                *z /= nx;
            }
        }
        let nx = norm(&x);
        x.into_iter().map(|z| z / nx).collect()
    }
}

/// `(c, s)` with `c² + s² = 1` and `r = ±sqrt(f² + g²)` chosen so that
/// `|g + r|` is not small.
#[inline]
fn pick_root(r: Complex64, g: Complex64) -> Complex64 {
    if (g.conj() * r).re >= 0.0 {
        r
    } else {
        -r
    }
}

fn ql_implicit(d: &mut [Complex64], e: &mut [Complex64]) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] * 2.0);
            let mut r = (g * g + ONE).sqrt();
            g = d[m] - d[l] + e[l] / (g + pick_root(r, g));
            let (mut s, mut c, mut p) = (ONE, ONE, ZERO);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = pick_root((f * f + g * g).sqrt(), g);
                e[i + 1] = r;
                if r == ZERO {
                    d[i + 1] -= p;
                    e[m] = ZERO;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + c * b * 2.0;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = ZERO;
        }
    }
    Ok(())
}

/// LU factorization of `T − σI` with partial pivoting (LAPACK `gttrf` layout).
struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &Tridiagonal, sigma: Complex64) -> Self {
        let n = t.dim();
        let mut dl = t.off.clone();
        let mut d: Vec<Complex64> = t.diag.iter().map(|&z| z - sigma).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let tiny = f64::MIN_POSITIVE.sqrt();
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() < tiny {
                    d[i] = Complex64::new(tiny, 0.0);
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1].norm() < tiny {
            d[n - 1] = Complex64::new(tiny, 0.0);
        }
        Self { dl, d, du, du2, swap }
    }

    fn solve(&self, rhs: &[Complex64]) -> CVector {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            let t = b[i];
            b[i + 1] -= self.dl[i] * t;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize) -> Tridiagonal {
        let diag = (0..n).map(|i| c(2.0 + (i as f64).sin(), 0.3 * (i as f64).cos())).collect();
        let off = (0..n - 1).map(|i| c(-1.0, 0.1 * (i as f64 * 0.7).sin())).collect();
        Tridiagonal::new(diag, off).unwrap()
    }

    #[test]
    fn ql_agrees_with_dense_solver() {
        let t = sample(40);
        let ql = t.eigenvalues().unwrap();
        let dense = crate::linalg::eig::eigenvalues(&t.to_dense()).unwrap();
        let mut used = vec![false; dense.len()];
        for z in &ql {
            let (j, dist) = dense
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, (w - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[j] = true;
            assert!(dist < 1e-11, "eigenvalue {z} off by {dist}");
        }
    }

    #[test]
    fn inverse_iteration_yields_eigenvectors() {
        let t = sample(30);
        for lambda in t.eigenvalues().unwrap() {
            let v = t.inverse_iteration(lambda);
            let hv = t.matvec(&v);
            let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - lambda * b).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-12, "residual {res} at {lambda}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Tridiagonal::new(vec![], vec![]).is_err());
        assert!(Tridiagonal::new(vec![ONE, ONE], vec![]).is_err());
    }

    #[test]
    fn one_by_one() {
        let t = Tridiagonal::new(vec![c(3.0, -1.0)], vec![]).unwrap();
        assert_eq!(t.eigenvalues().unwrap(), vec![c(3.0, -1.0)]);
        let v = t.inverse_iteration(c(3.0, -1.0));
        assert!((norm(&v) - 1.0).abs() < 1e-15);
    }
}
