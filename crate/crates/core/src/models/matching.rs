//! Semi-analytic square-well spectrum from the continuity conditions at `x = 0`.
//!
//! With `κ² = −(E + iZ)` and `λ² = −(E − iZ)` the solutions vanishing at the
//! walls are `ψ_R = K_p sinh κ(1−x)` and `ψ_L = K_n sinh λ(1+x)`. Matching
//! value and slope at the origin gives
//!
//! `F(E) = κ cosh κ sinh λ + λ cosh λ sinh κ = 0`.
//!
//! The solver works with `F̃ = F/(κλ) = cosh κ shc λ + cosh λ shc κ`, where
//! `shc z = sinh z / z`. `F̃` depends on `κ²`, `λ²` only, so it is an entire
//! function of `E` with no branch ambiguity, and it drops the spurious zeros
//! of `F` at `E = ∓iZ` where `ψ` vanishes identically.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::RepKind;
use crate::{Error, Result};

const MAX_NEWTON: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite || !(re_min < re_max) || !(im_min <= im_max) {
            return Err(Error::InvalidParameter(format!(
                "search region [{re_min}, {re_max}] x [{im_min}, {im_max}] is not a bounded rectangle"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Region certain to contain every eigenvalue with `Re E ≤ re_max`:
    /// `Re E ≥ π²/4` and `|Im E| ≤ |Z|` hold for all eigenstates.
    pub fn for_coupling(z: f64, re_max: f64) -> Self {
        let pad = 0.5 + 0.05 * z.abs();
        Self {
            re_min: 1.0,
            re_max,
            im_min: -z.abs() - pad,
            im_max: z.abs() + pad,
        }
    }

    pub fn contains(&self, e: Complex64, slack: f64) -> bool {
        e.re >= self.re_min - slack
            && e.re <= self.re_max + slack
            && e.im >= self.im_min - slack
            && e.im <= self.im_max + slack
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingSolution {
    pub energy: Complex64,
    pub kappa: Complex64,
    pub lambda_star: Complex64,
    pub k_p: Complex64,
    pub k_n: Complex64,
    /// Relative mismatch of value and slope at `x = 0`.
    pub residual: f64,
    /// `γ₊` for real energies, `Γ₊` for members of a conjugate pair.
    pub kind: RepKind,
    /// `1 − |⟨ψ, PTψ⟩|/‖ψ‖²` on a sample grid; zero for an invariant state.
    pub pt_defect: f64,
}

impl MatchingSolution {
    pub fn psi(&self, x: f64) -> Complex64 {
        if x >= 0.0 {
            self.k_p * (self.kappa * (1.0 - x)).sinh()
        } else {
            self.k_n * (self.lambda_star * (1.0 + x)).sinh()
        }
    }

    pub fn psi_prime(&self, x: f64) -> Complex64 {
        if x >= 0.0 {
            -self.k_p * self.kappa * (self.kappa * (1.0 - x)).cosh()
        } else {
            self.k_n * self.lambda_star * (self.lambda_star * (1.0 + x)).cosh()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchingDiagnostics {
    pub seeds: usize,
    pub diverged: usize,
    /// Zero count inside the region from the argument principle, when the
    /// boundary stays clear of zeros.
    pub argument_count: Option<usize>,
}

/// `sinh z / z`.
pub fn shc(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let z2 = z * z;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..12 {
            term *= z2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    } else {
        z.sinh() / z
    }
}

/// `(cosh z − shc z) / (2z²)`, the derivative of `shc` with respect to `z²`.
fn shc_deriv(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // Σ_{k≥1} k z^{2k−2} / (2k+1)!
        let z2 = z * z;
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 6.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..14 {
            sum += pow * (k as f64 / fact);
            pow *= z2;
            fact *= (2 * k + 2) as f64 * (2 * k + 3) as f64;
        }
        sum
    } else {
        (z.cosh() - z.sinh() / z) / (2.0 * z * z)
    }
}

/// `κ` and `λ*` (principal roots) for an energy.
pub fn wavenumbers(e: Complex64, z: f64) -> (Complex64, Complex64) {
    let iz = Complex64::new(0.0, z);
    ((-(e + iz)).sqrt(), (-(e - iz)).sqrt())
}

/// `F̃(E)` and `dF̃/dE`.
pub fn matching_function(e: Complex64, z: f64) -> (Complex64, Complex64) {
    let (k, l) = wavenumbers(e, z);
    let (ck, cl) = (k.cosh(), l.cosh());
    let (sk, sl) = (shc(k), shc(l));
    let f = ck * sl + cl * sk;
    let df = -(sk * sl + cl * shc_deriv(k) + ck * shc_deriv(l));
    (f, df)
}

/// Newton iteration on `F̃(E) / Π (E − rⱼ)`; returns the limit and whether it
/// converged.
fn newton(z: f64, seed: Complex64, deflate: &[Complex64], max_step: f64) -> Option<Complex64> {
    let mut e = seed;
    for _ in 0..MAX_NEWTON {
        let (f, df) = matching_function(e, z);
        if f == Complex64::new(0.0, 0.0) {
            return Some(e);
        }
        let mut ratio = df / f;
        for r in deflate {
            ratio -= 1.0 / (e - r);
        }
        let mut step = 1.0 / ratio;
        if !step.is_finite() {
            return None;
        }
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        e -= step;
        if step.norm() <= 1e-14 * e.norm().max(1.0) {
            return Some(e);
        }
    }
    // accept slow convergence (near-double roots) when the function is tiny
    let (f, df) = matching_function(e, z);
    let step = f / df;
    (step.is_finite() && step.norm() <= 1e-10 * e.norm().max(1.0)).then_some(e)
}

/// A few undeflated Newton steps, and a snap onto the real axis when the
/// real-valued restriction of `F̃` has a root there.
fn polish(z: f64, e: Complex64) -> Complex64 {
    let mut e = e;
    for _ in 0..4 {
        let (f, df) = matching_function(e, z);
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        e -= step;
        if step.norm() <= 1e-16 * e.norm().max(1.0) {
            break;
        }
    }
    if e.im.abs() <= 1e-9 * e.norm().max(1.0) {
        // F̃ is real on the real axis, so real roots are found by real Newton
        let mut x = e.re;
        let mut ok = false;
        for _ in 0..20 {
            let (f, df) = matching_function(Complex64::new(x, 0.0), z);
            let step = f.re / df.re;
            if !step.is_finite() {
                break;
            }
            x -= step;
            if step.abs() <= 1e-14 * x.abs().max(1.0) {
                ok = true;
                break;
            }
        }
        if ok && (x - e.re).abs() <= 1e-8 * e.norm().max(1.0) {
            return Complex64::new(x, 0.0);
        }
    }
    e
}

fn arg_diff(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

/// Winding number of `F̃` around the region boundary, refining segments until
/// each phase increment is small. `None` if the boundary passes too close to
/// a zero.
pub fn argument_count(z: f64, region: &SearchRegion) -> Option<usize> {
    let corners = [
        Complex64::new(region.re_min, region.im_min),
        Complex64::new(region.re_max, region.im_min),
        Complex64::new(region.re_max, region.im_max),
        Complex64::new(region.re_min, region.im_max),
    ];
    if region.im_min == region.im_max {
        return None;
    }
    let mut total = 0.0;
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let mut stack = vec![(a, b, 0u32)];
        while let Some((p, q, depth)) = stack.pop() {
            let (fp, _) = matching_function(p, z);
            let (fq, _) = matching_function(q, z);
            if fp.norm() < 1e-12 || fq.norm() < 1e-12 {
                return None;
            }
            let d = arg_diff(fp, fq);
            if d.abs() > 0.3 && depth < 40 {
                let mid = (p + q) * 0.5;
                stack.push((mid, q, depth + 1));
                stack.push((p, mid, depth + 1));
            } else if d.abs() > 0.3 {
                return None;
            } else {
                total += d;
            }
        }
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    ((winding - rounded).abs() < 1e-3 && rounded >= 0.0).then_some(rounded as usize)
}

fn seed_grid(region: &SearchRegion, grid: usize) -> Vec<Complex64> {
    let nre = grid.max(2);
    let im_extent = region.im_max - region.im_min;
    let re_extent = region.re_max - region.re_min;
    let nim = if im_extent == 0.0 {
        1
    } else {
        ((grid as f64 * im_extent / re_extent).ceil() as usize).clamp(3, grid.max(3))
    };
    let mut seeds = Vec::with_capacity(nre * nim);
    for i in 0..nre {
        let re = region.re_min + re_extent * (i as f64 + 0.5) / nre as f64;
        for j in 0..nim {
            let im = if nim == 1 {
                region.im_min
            } else {
                region.im_min + im_extent * (j as f64 + 0.5) / nim as f64
            };
            seeds.push(Complex64::new(re, im));
        }
    }
    seeds
}

fn insert_root(roots: &mut Vec<Complex64>, e: Complex64) -> bool {
    let dup = roots.iter().any(|r| (r - e).norm() <= 1e-8 * e.norm().max(1.0));
    if !dup {
        roots.push(e);
    }
    !dup
}

/// Roots of the matching function inside `region`, found by Newton from a
/// `grid`-spaced seed lattice, sorted by `(Re, Im)`.
pub fn square_well_matching(z: f64, region: &SearchRegion, grid: usize) -> Result<Vec<MatchingSolution>> {
    square_well_matching_with_diagnostics(z, region, grid).map(|(s, _)| s)
}

pub fn square_well_matching_with_diagnostics(
    z: f64,
    region: &SearchRegion,
    grid: usize,
) -> Result<(Vec<MatchingSolution>, MatchingDiagnostics)> {
    if !z.is_finite() {
        return Err(Error::InvalidParameter(format!("Z must be finite, got {z}")));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter("seed grid needs at least 2 points per axis".into()));
    }
    let region = SearchRegion::new(region.re_min, region.re_max, region.im_min, region.im_max)?;
    let seeds = seed_grid(&region, grid);
    let max_step = 0.25 * ((region.re_max - region.re_min) + (region.im_max - region.im_min));
    let slack = 1e-9 * (region.re_max.abs() + region.re_min.abs()).max(1.0);
    let mut diag = MatchingDiagnostics {
        seeds: seeds.len(),
        ..Default::default()
    };
    let mut roots: Vec<Complex64> = Vec::new();
    for &s in &seeds {
        match newton(z, s, &[], max_step) {
            Some(e) => {
                let e = polish(z, e);
                if region.contains(e, slack) {
                    insert_root(&mut roots, e);
                }
            }
            None => diag.diverged += 1,
        }
    }
    diag.argument_count = argument_count(z, &region);
    // deflated passes recover roots hidden behind stronger attractors
    let mut passes = 0;
    while let Some(expected) = diag.argument_count {
        let inside = roots.iter().filter(|r| region.contains(**r, 0.0)).count();
        if inside >= expected || passes >= 3 {
            break;
        }
        passes += 1;
        let mut added = false;
        for &s in &seeds {
            if let Some(e) = newton(z, s, &roots, max_step) {
                let e = polish(z, e);
                if region.contains(e, slack) && insert_root(&mut roots, e) {
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    if roots.is_empty() {
        return Err(Error::NoRootInRegion);
    }
    let solutions = roots.into_iter().map(|e| reconstruct(z, e)).collect();
    Ok((solutions, diag))
}

/// Builds amplitudes, continuity residual and PT diagnostics for a root.
pub fn reconstruct(z: f64, e: Complex64) -> MatchingSolution {
    let (kappa, lambda) = wavenumbers(e, z);
    let (sk, sl) = (kappa.sinh(), lambda.sinh());
    let (kc, lc) = (kappa * kappa.cosh(), lambda * lambda.cosh());
    // two equivalent amplitude choices; the larger one avoids 0/0 when both
    // sinh κ and sinh λ vanish
    let (mut k_p, mut k_n) = if sl.norm() + sk.norm() >= lc.norm() + kc.norm() {
        (sl, sk)
    } else {
        (lc, -kc)
    };
    let scale = k_p.norm().max(k_n.norm());
    if scale > 0.0 {
        k_p /= scale;
        k_n /= scale;
    }
    let value = (k_p * sk - k_n * sl).norm();
    let slope = (-k_p * kc - k_n * lc).norm();
    let denom = (k_p * sk).norm() + (k_n * sl).norm() + (k_p * kc).norm() + (k_n * lc).norm();
    let residual = if denom > 0.0 { (value + slope) / denom } else { f64::INFINITY };
    let kind = if e.im == 0.0 || e.im.abs() <= 1e-8 * e.norm().max(1.0) {
        RepKind::GammaPlus1D
    } else {
        RepKind::GammaPlus2D
    };
    let mut sol = MatchingSolution {
        energy: e,
        kappa,
        lambda_star: lambda,
        k_p,
        k_n,
        residual,
        kind,
        pt_defect: 0.0,
    };
    // (PTψ)(x) = conj ψ(−x)
    let xs: Vec<f64> = (1..200).map(|j| -1.0 + j as f64 / 100.0).collect();
    let psi: Vec<Complex64> = xs.iter().map(|&x| sol.psi(x)).collect();
    let pt: Vec<Complex64> = xs.iter().map(|&x| sol.psi(-x).conj()).collect();
    sol.pt_defect = 1.0 - crate::linalg::matrix::overlap(&psi, &pt);
    sol
}

/// The `levels` lowest (by real part) roots at coupling `z`, enlarging the
/// search window until enough roots are found.
pub fn lowest_roots(z: f64, levels: usize, grid: usize) -> Result<Vec<MatchingSolution>> {
    let mut n_window = levels as f64 + 1.5;
    for _ in 0..6 {
        let re_max = (n_window * std::f64::consts::PI / 2.0).powi(2) + 1.0;
        let region = SearchRegion::for_coupling(z, re_max);
        let g = grid.max((re_max / 2.0).sqrt().ceil() as usize * 4);
        let (sols, diag) = square_well_matching_with_diagnostics(z, &region, g)?;
        let complete = diag.argument_count.is_none_or(|c| c <= sols.len());
        if sols.len() >= levels && complete {
            return Ok(sols.into_iter().take(levels).collect());
        }
        n_window += 2.0;
    }
    Err(Error::NoRootInRegion)
}
