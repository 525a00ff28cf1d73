//! Quasi-exactly solvable family `H_M = p² − (ζ cosh 2x − iM)²` with its
//! shifted parity `x → iπ/2 − x`.
//!
//! Eigenfunctions have the form `ψ = Ψ·f` with `Ψ = exp[(i/2)ζ cosh 2x]`.
//! Substituting gives
//!
//! `−f'' − 2iζ sinh 2x f' + 2iζ(M−1) cosh 2x f + (M² − ζ²) f = E f`,
//!
//! which maps `cosh kx` (and `sinh kx`) onto `k ± 2` harmonics with weights
//! `iζ(M−1∓k)`. The `k + 2` coupling vanishes at `k = M − 1`, so a finite set
//! of harmonics closes. This yields:
//!
//! * `M = 2`: `cosh x`, `sinh x` with `E = 3 − ζ² ± 2iζ`;
//! * `M = 3`: `sinh 2x` with `E = 5 − ζ²`, and `A cosh 2x + iB` with
//!   `E = 7 − ζ² ± 2√(1 − 4ζ²)`;
//! * `M = 4`: two pairs built on `{cosh x, cosh 3x}` and `{sinh x, sinh 3x}`
//!   with `E = 11 − ζ² + 2iζ ± 4√(1 − ζ² + iζ)` and the conjugates.
//!
//! The parity is not a permutation of any real grid, so these states are
//! checked functionally: a local finite-difference residual for the
//! eigenvalue equation and closed-form evaluation at complex arguments for
//! the symmetry.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classifier::{flip_value, RepKind};
use crate::{Error, Result};

type C = Complex64;

const I: C = C { re: 0.0, im: 1.0 };
const STENCIL_STEP: f64 = 1e-3;
const STENCIL: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Harmonic {
    Cosh,
    Sinh,
}

/// `ψ(x) = Ψ(x) Σ c·h(kx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmState {
    pub label: String,
    pub energy: C,
    pub terms: Vec<(C, Harmonic, u32)>,
}

impl KmState {
    pub fn eval(&self, zeta: f64, x: C) -> C {
        let f: C = self
            .terms
            .iter()
            .map(|&(c, h, k)| {
                let arg = x * k as f64;
                c * match h {
                    Harmonic::Cosh => arg.cosh(),
                    Harmonic::Sinh => arg.sinh(),
                }
            })
            .sum();
        big_psi(zeta, x) * f
    }
}

/// `Ψ(x) = exp[(i/2) ζ cosh 2x]`.
pub fn big_psi(zeta: f64, x: C) -> C {
    (I * 0.5 * zeta * (2.0 * x).cosh()).exp()
}

/// Image of a function under the shifted PT operation,
/// `(PTf)(w) = conj f(conj(iπ/2 − w))`, valid for complex `w`.
pub fn pt_image<F: Fn(C) -> C>(f: F) -> impl Fn(C) -> C {
    move |w: C| f((C::new(0.0, FRAC_PI_2) - w).conj()).conj()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhareMandalModel {
    pub m: u32,
    pub zeta: f64,
}

impl KhareMandalModel {
    pub fn new(m: u32, zeta: f64) -> Result<Self> {
        if !(2..=4).contains(&m) {
            return Err(Error::UnknownM(m));
        }
        if !zeta.is_finite() {
            return Err(Error::InvalidParameter(format!("zeta must be finite, got {zeta}")));
        }
        if m == 3 && zeta * zeta >= 0.25 && zeta.abs() != 0.5 {
            return Err(Error::OutOfRegime { m, zeta });
        }
        Ok(Self { m, zeta })
    }

    pub fn potential(&self, x: C) -> C {
        let w = (2.0 * x).cosh() * self.zeta - I * self.m as f64;
        -(w * w)
    }

    /// `|ζ| = 1/2` for `M = 3`: the two cosh-type levels coincide.
    pub fn is_degenerate_point(&self) -> bool {
        self.m == 3 && self.zeta.abs() == 0.5
    }

    pub fn states(&self) -> Vec<KmState> {
        let z = self.zeta;
        let z2 = z * z;
        match self.m {
            2 => vec![
                KmState {
                    label: "psi_plus".into(),
                    energy: C::new(3.0 - z2, 2.0 * z),
                    terms: vec![(C::new(1.0, 0.0), Harmonic::Cosh, 1)],
                },
                KmState {
                    label: "psi_minus".into(),
                    energy: C::new(3.0 - z2, -2.0 * z),
                    terms: vec![(C::new(1.0, 0.0), Harmonic::Sinh, 1)],
                },
            ],
            3 => {
                let r = (1.0 - 4.0 * z2).max(0.0).sqrt();
                let psi = KmState {
                    label: "psi".into(),
                    energy: C::new(5.0 - z2, 0.0),
                    terms: vec![(C::new(1.0, 0.0), Harmonic::Sinh, 2)],
                };
                // coefficients (A, B) of A cosh 2x + iB, from the 2×2 problem
                // on {1, cosh 2x}
                let ab = |a: f64, b: f64| {
                    let n = a.hypot(b);
                    (a / n, b / n)
                };
                let (ap, bp) = ab(2.0 * z, -(1.0 + r));
                let (am, bm) = ab(1.0 + r, -2.0 * z);
                let state = |label: &str, e: f64, a: f64, b: f64| KmState {
                    label: label.into(),
                    energy: C::new(e, 0.0),
                    terms: vec![(C::new(a, 0.0), Harmonic::Cosh, 2), (C::new(0.0, b), Harmonic::Cosh, 0)],
                };
                if self.is_degenerate_point() {
                    vec![psi, state("phi", 7.0 - z2, ap, bp)]
                } else {
                    vec![
                        psi,
                        state("psi_plus", 7.0 - z2 + 2.0 * r, ap, bp),
                        state("psi_minus", 7.0 - z2 - 2.0 * r, am, bm),
                    ]
                }
            }
            _ => {
                let s = C::new(1.0 - z2, z).sqrt();
                let base = C::new(11.0 - z2, 2.0 * z);
                let mut out = Vec::new();
                for (j, sign) in [(1, 1.0), (2, -1.0)] {
                    let e = base + s * (4.0 * sign);
                    // eigenvector of [[15−ζ²+4iζ, 6iζ], [2iζ, 7−ζ²]], from the
                    // better-conditioned row
                    let v1 = (e - (7.0 - z2), C::new(0.0, 2.0 * z));
                    let v2 = (C::new(0.0, 6.0 * z), e - C::new(15.0 - z2, 4.0 * z));
                    let (a, b) = if v1.0.norm() + v1.1.norm() >= v2.0.norm() + v2.1.norm() {
                        v1
                    } else {
                        v2
                    };
                    let n = a.norm().hypot(b.norm());
                    let (a, b) = (a / n, b / n);
                    out.push(KmState {
                        label: format!("psi_plus_{j}"),
                        energy: e,
                        terms: vec![(a, Harmonic::Cosh, 1), (b, Harmonic::Cosh, 3)],
                    });
                    out.push(KmState {
                        label: format!("psi_minus_{j}"),
                        energy: e.conj(),
                        terms: vec![(a.conj(), Harmonic::Sinh, 1), (-b.conj(), Harmonic::Sinh, 3)],
                    });
                }
                out
            }
        }
    }

    /// Largest pointwise relative residual of `−ψ'' + Vψ − Eψ`, with `ψ''`
    /// from a 7-point sixth-order stencil.
    pub fn eigen_residual(&self, state: &KmState, xs: &[f64]) -> f64 {
        let h = STENCIL_STEP;
        xs.iter()
            .map(|&x| {
                let d2: C = STENCIL
                    .iter()
                    .enumerate()
                    .map(|(j, w)| state.eval(self.zeta, C::new(x + (j as f64 - 3.0) * h, 0.0)) * *w)
                    .sum::<C>()
                    / (180.0 * h * h);
                let psi = state.eval(self.zeta, C::new(x, 0.0));
                let vpsi = self.potential(C::new(x, 0.0)) * psi;
                let epsi = state.energy * psi;
                let scale = d2.norm() + vpsi.norm() + epsi.norm();
                (-d2 + vpsi - epsi).norm() / scale.max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCheck {
    pub label: String,
    pub energy: C,
    pub eigen_residual: f64,
    /// `(PT)²ψ = Ω ψ`.
    pub omega_sq: C,
    pub omega_sq_residual: f64,
    /// `‖PTφ − φ‖` for the gauge-fixed state, when `PTψ ∝ ψ`.
    pub invariance_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipCheck {
    pub first: String,
    pub second: String,
    pub kind: RepKind,
    pub omega: C,
    /// `max(|PTψ₁ − ω*ψ₂|, |PTψ₂ − ωψ₁|)` over the samples.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmVerification {
    pub m: u32,
    pub zeta: f64,
    pub states: Vec<StateCheck>,
    pub flips: Vec<FlipCheck>,
    pub kinds: Vec<RepKind>,
    pub representation: String,
    pub notes: Vec<String>,
}

impl KmVerification {
    pub fn max_eigen_residual(&self) -> f64 {
        self.states.iter().map(|s| s.eigen_residual).fold(0.0, f64::max)
    }

    pub fn max_symmetry_residual(&self) -> f64 {
        let inv = self.states.iter().filter_map(|s| s.invariance_residual);
        let flips = self.flips.iter().map(|f| f.residual);
        let omegas = self.states.iter().map(|s| s.omega_sq_residual);
        inv.chain(flips).chain(omegas).fold(0.0, f64::max)
    }
}

fn samples(f: &dyn Fn(C) -> C, xs: &[f64]) -> Vec<C> {
    xs.iter().map(|&x| f(C::new(x, 0.0))).collect()
}

fn ratio(a: &[C], b: &[C]) -> C {
    // least-squares c with b ≈ c·a
    let num: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let den: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    num / den
}

fn sup_diff(a: &[C], b: &[C], s: C) -> f64 {
    // pointwise, relative to max(1, |ψ|)
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - s * y).norm() / y.norm().max(1.0))
        .fold(0.0, f64::max)
}

pub fn default_samples() -> Vec<f64> {
    (0..50).map(|j| -2.0 + 4.0 * j as f64 / 49.0).collect()
}

/// Checks the closed-form states of `H_M` and derives their representation
/// content from the action of the shifted PT operation.
pub fn khare_mandal_verify(m: u32, zeta: f64, xs: &[f64]) -> Result<KmVerification> {
    let model = KhareMandalModel::new(m, zeta)?;
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("sample points must be finite and nonempty".into()));
    }
    let states = model.states();
    let evals: Vec<Box<dyn Fn(C) -> C>> = states
        .iter()
        .map(|s| {
            let s = s.clone();
            Box::new(move |x: C| s.eval(zeta, x)) as Box<dyn Fn(C) -> C>
        })
        .collect();
    let values: Vec<Vec<C>> = evals.iter().map(|f| samples(f.as_ref(), xs)).collect();
    let images: Vec<Vec<C>> = evals.iter().map(|f| samples(&pt_image(f.as_ref()), xs)).collect();
    let doubles: Vec<Vec<C>> = evals
        .iter()
        .map(|f| samples(&pt_image(pt_image(f.as_ref())), xs))
        .collect();

    let mut checks = Vec::new();
    let mut invariant = vec![false; states.len()];
    for (k, st) in states.iter().enumerate() {
        let omega_sq = ratio(&values[k], &doubles[k]);
        let omega_sq_residual = sup_diff(&doubles[k], &values[k], omega_sq);
        let c = ratio(&values[k], &images[k]);
        let prop = sup_diff(&images[k], &values[k], c);
        let invariance_residual = (prop <= 1e-8 && (c.norm() - 1.0).abs() <= 1e-8).then(|| {
            // φ = e^{iθ/2}ψ is a fixed point when PTψ = e^{iθ}ψ
            let phase = C::from_polar(1.0, c.arg() / 2.0);
            let phi: Vec<C> = values[k].iter().map(|v| v * phase).collect();
            let pt_phi: Vec<C> = images[k].iter().map(|v| v * phase.conj()).collect();
            sup_diff(&pt_phi, &phi, C::new(1.0, 0.0))
        });
        invariant[k] = invariance_residual.is_some();
        checks.push(StateCheck {
            label: st.label.clone(),
            energy: st.energy,
            eigen_residual: model.eigen_residual(st, xs),
            omega_sq,
            omega_sq_residual,
            invariance_residual,
        });
    }

    let mut kinds = Vec::new();
    let mut flips = Vec::new();
    let mut notes = Vec::new();
    let mut used = vec![false; states.len()];
    for k in 0..states.len() {
        if used[k] {
            continue;
        }
        used[k] = true;
        if invariant[k] {
            if model.is_degenerate_point() && states[k].label == "phi" {
                kinds.push(RepKind::GammaPlusDeg);
                notes.push(
                    "zeta = 1/2: the two cosh-type levels merge; the companion solution of the \
                     degenerate pair is not constructed"
                        .into(),
                );
            } else {
                kinds.push(RepKind::GammaPlus1D);
            }
            continue;
        }
        // flip partner: the remaining state best matching PTψ_k
        let partner = (0..states.len())
            .filter(|&j| !used[j])
            .map(|j| {
                let c = ratio(&values[j], &images[k]);
                (j, c, sup_diff(&images[k], &values[j], c))
            })
            .min_by(|a, b| a.2.total_cmp(&b.2));
        let Some((j, _, _)) = partner else {
            notes.push(format!("{}: no flip partner found", states[k].label));
            continue;
        };
        used[j] = true;
        let omega_sq = checks[k].omega_sq;
        let omega = flip_value(omega_sq).unwrap_or(C::new(f64::NAN, f64::NAN));
        let residual = sup_diff(&images[k], &values[j], omega.conj()).max(sup_diff(&images[j], &values[k], omega));
        let degenerate = (states[k].energy - states[j].energy).norm() <= 1e-12 * states[k].energy.norm().max(1.0);
        let kind = if (omega_sq + 1.0).norm() <= 1e-8 {
            if degenerate {
                RepKind::GammaMinusDeg
            } else {
                RepKind::GammaMinus2D
            }
        } else if (omega_sq - 1.0).norm() <= 1e-8 {
            if degenerate {
                RepKind::GammaPlusDeg
            } else {
                RepKind::GammaPlus2D
            }
        } else if degenerate {
            RepKind::GammaStarDeg
        } else {
            RepKind::GammaStar2D
        };
        kinds.push(kind);
        flips.push(FlipCheck {
            first: states[k].label.clone(),
            second: states[j].label.clone(),
            kind,
            omega,
            residual,
        });
    }
    let representation = kinds.iter().map(|k| k.symbol()).collect::<Vec<_>>().join(" ⊗ ");
    Ok(KmVerification {
        m,
        zeta,
        states: checks,
        flips,
        kinds,
        representation,
        notes,
    })
}
