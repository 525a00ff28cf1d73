use antispec::linalg::eig::eig_general;
use antispec::models::khare_mandal::KhareMandalModel;
use antispec::models::matching::lowest_roots;
use antispec::models::square_well::SquareWellModel;
use antispec::sweep::link;
use antispec::CMatrix;
use num_complex::Complex64 as C;

type Basis = Vec<Box<dyn Fn(C) -> C>>;

fn i() -> C {
    C::new(0.0, 1.0)
}

/// `(Hψ)(x) / Ψ(x)` for `ψ = Ψ·g`, with `H = −∂² − (ζ cosh 2x − iM)²` and
/// the second derivative from a 7-point stencil.
fn reduced_action(m: u32, zeta: f64, g: &dyn Fn(C) -> C, x: f64) -> C {
    let big = |x: f64| (i() * zeta / 2.0 * (2.0 * x).cosh()).exp();
    let psi = |x: f64| big(x) * g(C::new(x, 0.0));
    let h = 1e-3;
    let w = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
    let d2: C = (0..7).map(|k| psi(x + (k as f64 - 3.0) * h) * w[k]).sum::<C>() / (h * h);
    let v = -(C::new(zeta * (2.0 * x).cosh(), -(m as f64))).powi(2);
    (-d2 + v * psi(x)) / big(x)
}

/// Least-squares matrix `C` with `H(Ψ g_j) ≈ Ψ Σ_i g_i C_ij` over sample
/// points, and the relative residual of the fit.
fn collocation(m: u32, zeta: f64, basis: &Basis, xs: &[f64]) -> (CMatrix, f64) {
    let n = basis.len();
    let g: Vec<Vec<C>> = xs.iter().map(|&x| basis.iter().map(|b| b(C::new(x, 0.0))).collect()).collect();
    let q: Vec<Vec<C>> = xs.iter().map(|&x| basis.iter().map(|b| reduced_action(m, zeta, b.as_ref(), x)).collect()).collect();
    let gram = CMatrix::from_fn(n, |a, b| g.iter().map(|row| row[a].conj() * row[b]).sum());
    let rhs = CMatrix::from_fn(n, |a, j| g.iter().zip(&q).map(|(gr, qr)| gr[a].conj() * qr[j]).sum());
    let c = gram.solve(&rhs).unwrap();
    let (mut res, mut norm) = (0.0, 0.0);
    for (gr, qr) in g.iter().zip(&q) {
        for j in 0..n {
            let fit: C = (0..n).map(|a| gr[a] * c[(a, j)]).sum();
            res += (qr[j] - fit).norm_sqr();
            norm += qr[j].norm_sqr();
        }
    }
    (c, (res / norm).sqrt())
}

fn basis_for(m: u32) -> Basis {
    match m {
        2 => vec![Box::new(|x: C| x.cosh()), Box::new(|x: C| x.sinh())],
        3 => vec![Box::new(|x: C| (2.0 * x).sinh()), Box::new(|x: C| (2.0 * x).cosh()), Box::new(|_| i())],
        4 => vec![
            Box::new(|x: C| x.cosh()),
            Box::new(|x: C| (3.0 * x).cosh()),
            Box::new(|x: C| x.sinh()),
            Box::new(|x: C| (3.0 * x).sinh()),
        ],
        _ => unreachable!(),
    }
}

fn samples() -> Vec<f64> {
    (0..41).map(|k| -1.5 + 3.0 * k as f64 / 40.0).collect()
}

fn check_model(m: u32, zeta: f64) {
    let basis = basis_for(m);
    let xs = samples();
    let (c, fit) = collocation(m, zeta, &basis, &xs);
    assert!(fit <= 1e-8, "M={m}: basis not invariant, fit residual {fit:.2e}");
    let (oracle_e, oracle_v) = eig_general(&c).unwrap();

    let model = KhareMandalModel::new(m, zeta).unwrap();
    let states = model.states();
    let energies: Vec<C> = states.iter().map(|s| s.energy).collect();
    let l = link(&energies, &oracle_e);
    for (k, s) in states.iter().enumerate() {
        let j = l[k];
        assert!((s.energy - oracle_e[j]).norm() <= 1e-6, "M={m} {}: {} vs {}", s.label, s.energy, oracle_e[j]);
        // the closed-form state is the oracle eigenvector, up to scale
        let a: Vec<C> = xs.iter().map(|&x| s.eval(zeta, C::new(x, 0.0)) / (i() * zeta / 2.0 * (2.0 * x).cosh()).exp()).collect();
        let b: Vec<C> = xs
            .iter()
            .map(|&x| basis.iter().zip(&oracle_v[j]).map(|(g, v)| g(C::new(x, 0.0)) * v).sum())
            .collect();
        let dot: C = a.iter().zip(&b).map(|(p, q)| p.conj() * q).sum();
        let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(dot.norm() / (na * nb) >= 1.0 - 1e-8, "M={m} {}: not collinear", s.label);
    }
}

#[test]
fn khare_mandal_m2_collocation() {
    for zeta in [0.1, 0.3, 0.9] {
        check_model(2, zeta);
    }
}

#[test]
fn khare_mandal_m3_least_squares_coefficients() {
    for zeta in [0.05, 0.3, 0.45] {
        check_model(3, zeta);
    }
}

#[test]
fn khare_mandal_m4_collocation() {
    for zeta in [0.2, 0.6, 1.3] {
        check_model(4, zeta);
    }
}

#[test]
fn finite_differences_converge_quadratically() {
    let z = 1.0;
    let exact: Vec<C> = lowest_roots(z, 5, 24).unwrap().iter().map(|s| s.energy).collect();
    let err = |n: usize| -> Vec<f64> {
        let mut ev = SquareWellModel::new(z, n).unwrap().tridiagonal().eigenvalues().unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        ev.iter().zip(&exact).map(|(a, b)| (a - b).norm()).collect()
    };
    let (coarse, fine) = (err(200), err(400));
    for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        let ratio = c / f;
        assert!((3.0..=5.0).contains(&ratio), "level {k}: ratio {ratio:.3}");
    }
}

#[test]
fn matching_pair_above_threshold_is_conjugate() {
    for z in [5.0, 6.0, 8.0] {
        let sols = lowest_roots(z, 4, 24).unwrap();
        let complex: Vec<C> = sols.iter().map(|s| s.energy).filter(|e| e.im.abs() > 1e-8).collect();
        assert_eq!(complex.len(), 2, "Z={z}: {complex:?}");
        assert!((complex[0].im + complex[1].im).abs() <= 1e-10);
        assert!((complex[0].re - complex[1].re).abs() <= 1e-10);
        for s in &sols {
            assert!(s.residual <= 1e-10, "Z={z}: continuity residual {:.2e}", s.residual);
        }
    }
}
