//! The dense eigensolver against an independent oracle: characteristic
//! polynomial by Faddeev–LeVerrier, roots by Durand–Kerner.

use antispec::linalg::eig::eig_general;
use antispec::linalg::random::{gaussian_matrix, random_unitary, rng};
use antispec::sweep::link;
use antispec::{CMatrix, SpectralOperator};
use num_complex::Complex64 as C;

/// Monic coefficients `c[0..=n]` with `c[0] = 1`, `det(λ − H) = Σ c_k λ^{n−k}`.
fn char_poly(h: &CMatrix) -> Vec<C> {
    let n = h.dim();
    let mut c = vec![C::new(1.0, 0.0)];
    let mut m = CMatrix::zeros(n);
    for k in 1..=n {
        let mut shifted = h.matmul(&m);
        for i in 0..n {
            shifted[(i, i)] += c[k - 1];
        }
        m = shifted;
        let hm = h.matmul(&m);
        let trace: C = (0..n).map(|i| hm[(i, i)]).sum();
        c.push(-trace / k as f64);
    }
    c
}

fn poly_roots(c: &[C]) -> Vec<C> {
    let n = c.len() - 1;
    let eval = |z: C| c.iter().fold(C::new(0.0, 0.0), |acc, &ck| acc * z + ck);
    let radius = 1.0 + c.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<C> = (0..n).map(|k| C::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    // polish with Newton on the polynomial
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (mut p, mut dp) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
            for &ck in c {
                dp = dp * *zi + p;
                p = p * *zi + ck;
            }
            if dp.norm() > 0.0 {
                *zi -= p / dp;
            }
        }
    }
    z
}

fn max_distance(a: &[C], b: &[C]) -> f64 {
    link(a, b).iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).fold(0.0, f64::max)
}

#[test]
fn small_matrices_match_polynomial_roots() {
    let mut r = rng(31);
    for dim in 1..=4 {
        for _ in 0..50 {
            let h = gaussian_matrix(&mut r, dim);
            let ev = h.eigenvalues().unwrap();
            let oracle = poly_roots(&char_poly(&h));
            let d = max_distance(&ev, &oracle);
            assert!(d <= 1e-8, "dim {dim}: {d:.2e}\n{ev:?}\n{oracle:?}");
        }
    }
}

#[test]
fn eight_by_eight_residuals_and_polynomial() {
    let mut r = rng(32);
    for _ in 0..20 {
        let h = gaussian_matrix(&mut r, 8);
        let (vals, vecs) = eig_general(&h).unwrap();
        let hn = h.frobenius_norm();
        for (e, v) in vals.iter().zip(&vecs) {
            let hv = h.matvec(v);
            let res: f64 = hv.iter().zip(v).map(|(x, y)| (x - e * y).norm_sqr()).sum::<f64>().sqrt();
            let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(res / (hn * vn) <= 1e-10);
        }
        let oracle = poly_roots(&char_poly(&h));
        assert!(max_distance(&vals, &oracle) <= 1e-8);
        assert!(vals.windows(2).all(|w| (w[0].re, w[0].im) <= (w[1].re, w[1].im)));
    }
}

#[test]
fn adjoint_spectrum_is_conjugate() {
    let mut r = rng(33);
    for dim in [3, 9, 20] {
        let h = gaussian_matrix(&mut r, dim);
        let ev: Vec<C> = h.eigenvalues().unwrap().iter().map(|z| z.conj()).collect();
        let adj = h.adjoint().eigenvalues().unwrap();
        assert!(max_distance(&ev, &adj) <= 1e-10);
    }
}

#[test]
fn unitary_similarity_preserves_spectrum() {
    let mut r = rng(34);
    for dim in [2, 7, 16, 30] {
        let h = gaussian_matrix(&mut r, dim);
        let v = random_unitary(&mut r, dim);
        let g = v.matmul(&h).matmul(&v.adjoint());
        assert!(max_distance(&h.eigenvalues().unwrap(), &g.eigenvalues().unwrap()) <= 1e-8);
    }
}
