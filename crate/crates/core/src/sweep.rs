//! Parameter sweeps, eigenvalue trajectories and bisection for the coupling
//! at which the lowest real pair turns into a complex-conjugate pair.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antiunitary::AntiUnitaryOp;
use crate::classifier::{classify_system, RepKind};
use crate::config::{Tolerances, TOL_REAL};
use crate::linalg::{CMatrix, SpectralOperator};
use crate::models::matching;
use crate::models::square_well::SquareWellModel;
use crate::{Error, Result};

type C = Complex64;

pub const DEFAULT_LEVELS: usize = 4;
const HUNGARIAN_LIMIT: usize = 64;

/// Energies at one parameter value, sorted by `(Re, Im)`, with the
/// representation kind of each state when it could be classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrum {
    pub energies: Vec<C>,
    pub kinds: Vec<Option<RepKind>>,
}

fn classified_spectrum<H: SpectralOperator + ?Sized>(h: &H, a: &AntiUnitaryOp, tol: &Tolerances) -> Result<PointSpectrum> {
    tol.validate()?;
    let residual = h.commutation_residual(a)?;
    if !(residual <= tol.symmetry) {
        return Err(Error::SymmetryViolated {
            residual,
            tol: tol.symmetry,
        });
    }
    let sys = h.biorthogonalize(tol.degeneracy)?;
    let report = classify_system(h, a, &sys, residual, tol)?;
    Ok(PointSpectrum {
        kinds: report.kind_of_state(),
        energies: sys.eigenvalues,
    })
}

/// A one-parameter family of models.
pub trait ModelFamily: Sync {
    fn name(&self) -> &str;

    fn param_name(&self) -> &str {
        "Z"
    }

    /// Full classified spectrum at `p`.
    fn evaluate(&self, p: f64) -> Result<PointSpectrum>;

    /// The lowest few energies (by real part) used for the threshold
    /// predicate; cheaper than [`ModelFamily::evaluate`] where possible.
    fn lowest_levels(&self, p: f64) -> Result<Vec<C>>;

    fn reality_tol(&self) -> f64 {
        TOL_REAL
    }
}

fn is_complex(e: C, tol: f64) -> bool {
    e.im.abs() > tol * e.norm().max(1.0)
}

fn sort_by_re(v: &mut [C]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Number of complex-conjugate pairs among the given energies (members
/// with `Im E > 0`).
pub fn complex_pair_count(energies: &[C], tol: f64) -> usize {
    energies.iter().filter(|e| e.im > 0.0 && is_complex(**e, tol)).count()
}

/// Square well by finite differences; the whole grid spectrum is
/// classified, the predicate looks at the `levels` lowest states.
#[derive(Debug, Clone)]
pub struct SquareWellFd {
    pub n: usize,
    pub levels: usize,
    pub tolerances: Tolerances,
}

impl SquareWellFd {
    pub fn new(n: usize) -> Result<Self> {
        SquareWellModel::new(0.0, n)?;
        Ok(Self {
            n,
            levels: DEFAULT_LEVELS,
            tolerances: Tolerances::default(),
        })
    }
}

impl ModelFamily for SquareWellFd {
    fn name(&self) -> &str {
        "square-well-fd"
    }

    fn evaluate(&self, p: f64) -> Result<PointSpectrum> {
        let model = SquareWellModel::new(p, self.n)?;
        let t = model.tridiagonal();
        classified_spectrum(&t, &model.symmetry(), &self.tolerances)
    }

    fn lowest_levels(&self, p: f64) -> Result<Vec<C>> {
        let t = SquareWellModel::new(p, self.n)?.tridiagonal();
        let mut ev = t.eigenvalues()?;
        sort_by_re(&mut ev);
        ev.truncate(self.levels);
        Ok(ev)
    }

    fn reality_tol(&self) -> f64 {
        self.tolerances.reality
    }
}

/// Square well from the exact matching condition.
#[derive(Debug, Clone)]
pub struct SquareWellMatching {
    pub levels: usize,
    pub grid: usize,
}

impl Default for SquareWellMatching {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            grid: 24,
        }
    }
}

impl ModelFamily for SquareWellMatching {
    fn name(&self) -> &str {
        "square-well-matching"
    }

    fn evaluate(&self, p: f64) -> Result<PointSpectrum> {
        let sols = matching::lowest_roots(p, self.levels, self.grid)?;
        let mut pairs: Vec<(C, RepKind)> = sols.iter().map(|s| (s.energy, s.kind)).collect();
        pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        Ok(PointSpectrum {
            energies: pairs.iter().map(|p| p.0).collect(),
            kinds: pairs.iter().map(|p| Some(p.1)).collect(),
        })
    }

    fn lowest_levels(&self, p: f64) -> Result<Vec<C>> {
        let mut ev: Vec<C> = matching::lowest_roots(p, self.levels, self.grid)?
            .into_iter()
            .map(|s| s.energy)
            .collect();
        sort_by_re(&mut ev);
        Ok(ev)
    }
}

type Builder = dyn Fn(f64) -> Result<(CMatrix, AntiUnitaryOp)> + Send + Sync;

/// Any dense family `p ↦ (H(p), A(p))`.
pub struct MatrixFamily {
    pub label: String,
    pub builder: Box<Builder>,
    pub tolerances: Tolerances,
    /// Number of lowest states entering the predicate; `None` for all.
    pub levels: Option<usize>,
}

impl MatrixFamily {
    pub fn new(
        label: impl Into<String>,
        builder: impl Fn(f64) -> Result<(CMatrix, AntiUnitaryOp)> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            builder: Box::new(builder),
            tolerances: Tolerances::default(),
            levels: None,
        }
    }
}

impl ModelFamily for MatrixFamily {
    fn name(&self) -> &str {
        &self.label
    }

    fn evaluate(&self, p: f64) -> Result<PointSpectrum> {
        let (h, a) = (self.builder)(p)?;
        classified_spectrum(&h, &a, &self.tolerances)
    }

    fn lowest_levels(&self, p: f64) -> Result<Vec<C>> {
        let (h, _) = (self.builder)(p)?;
        let mut ev = h.eigenvalues()?;
        sort_by_re(&mut ev);
        if let Some(l) = self.levels {
            ev.truncate(l);
        }
        Ok(ev)
    }

    fn reality_tol(&self) -> f64 {
        self.tolerances.reality
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub spectrum: Option<PointSpectrum>,
    /// Complex pairs among the predicate levels.
    pub complex_pairs: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub above: bool,
    /// Smallest distance between the predicate levels at `mid`.
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub bracket_width: f64,
    pub history: Vec<BisectionStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: String,
    pub param_name: String,
    pub param_values: Vec<f64>,
    pub points: Vec<SweepPoint>,
    /// `links[k][i]` is the index at point `k + 1` continuing state `i` of
    /// point `k`; empty when either point failed.
    pub links: Vec<Vec<usize>>,
    /// First interval `k` (between points `k` and `k + 1`) where the number
    /// of complex pairs increases.
    pub transition: Option<usize>,
    pub threshold: Option<Threshold>,
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn thread_cap() -> Option<usize> {
    std::env::var("ANTISPEC_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn map_points<T: Send>(ps: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    let run = || ps.par_iter().map(|&p| f(p)).collect::<Vec<T>>();
    match thread_cap() {
        Some(1) => ps.iter().map(|&p| f(p)).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => ps.iter().map(|&p| f(p)).collect(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_points<T: Send>(ps: &[f64], f: impl Fn(f64) -> T + Sync + Send) -> Vec<T> {
    let _ = thread_cap();
    ps.iter().map(|&p| f(p)).collect()
}

/// Classifies the family at `steps` equally spaced values in `[lo, hi]`.
/// Points that fail (typically `NotDiagonalizable` next to an exceptional
/// point) are recorded and the sweep continues.
pub fn sweep<F: ModelFamily + ?Sized>(family: &F, lo: f64, hi: f64, steps: usize) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("a sweep needs at least 2 steps, got {steps}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("invalid sweep range [{lo}, {hi}]")));
    }
    let params = linspace(lo, hi, steps);
    let tol = family.reality_tol();
    let points: Vec<SweepPoint> = map_points(&params, |p| match family.evaluate(p) {
        Ok(spec) => {
            let count = family.lowest_levels(p).map(|l| complex_pair_count(&l, tol)).ok();
            SweepPoint {
                param: p,
                spectrum: Some(spec),
                complex_pairs: count,
                error: None,
            }
        }
        Err(e) => SweepPoint {
            param: p,
            spectrum: None,
            complex_pairs: family.lowest_levels(p).map(|l| complex_pair_count(&l, tol)).ok(),
            error: Some(e.to_string()),
        },
    });
    let links = points
        .windows(2)
        .map(|w| match (&w[0].spectrum, &w[1].spectrum) {
            (Some(a), Some(b)) if a.energies.len() == b.energies.len() => link(&a.energies, &b.energies),
            _ => Vec::new(),
        })
        .collect();
    let transition = points.windows(2).position(|w| match (w[0].complex_pairs, w[1].complex_pairs) {
        (Some(a), Some(b)) => b > a,
        _ => false,
    });
    Ok(SweepResult {
        model: family.name().to_string(),
        param_name: family.param_name().to_string(),
        param_values: params,
        points,
        links,
        transition,
        threshold: None,
    })
}

/// Sweep followed by bisection on the first transition interval.
pub fn sweep_and_refine<F: ModelFamily + ?Sized>(
    family: &F,
    lo: f64,
    hi: f64,
    steps: usize,
    tol_param: f64,
) -> Result<SweepResult> {
    let mut result = sweep(family, lo, hi, steps)?;
    let (a, b) = match result.transition {
        Some(k) => (result.param_values[k], result.param_values[k + 1]),
        None => (lo, hi),
    };
    result.threshold = Some(find_threshold(family, a, b, tol_param)?);
    Ok(result)
}

/// Bisection on the number of complex pairs among the lowest levels. A
/// `NotDiagonalizable` evaluation counts as above the threshold.
pub fn find_threshold<F: ModelFamily + ?Sized>(family: &F, lo: f64, hi: f64, tol_param: f64) -> Result<Threshold> {
    if !(tol_param > 0.0) || !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "invalid bracket [{lo}, {hi}] or tolerance {tol_param}"
        )));
    }
    let tol = family.reality_tol();
    let probe = |p: f64| -> Result<(Option<usize>, Option<f64>)> {
        match family.lowest_levels(p) {
            Ok(levels) => {
                let gap = levels
                    .windows(2)
                    .map(|w| (w[1] - w[0]).norm())
                    .fold(f64::INFINITY, f64::min);
                Ok((Some(complex_pair_count(&levels, tol)), gap.is_finite().then_some(gap)))
            }
            Err(Error::NotDiagonalizable { .. }) => Ok((None, None)),
            Err(e) => Err(e),
        }
    };
    let (c_lo, _) = probe(lo)?;
    let (c_hi, _) = probe(hi)?;
    let Some(c_lo) = c_lo else {
        return Err(Error::BracketInvalid { lo, hi });
    };
    if c_hi == Some(c_lo) {
        return Err(Error::BracketInvalid { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let mut history = Vec::new();
    while b - a > tol_param {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let (count, min_gap) = probe(mid)?;
        let above = count != Some(c_lo);
        history.push(BisectionStep {
            lo: a,
            hi: b,
            mid,
            above,
            min_gap,
        });
        if above {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(Threshold {
        value: 0.5 * (a + b),
        bracket_width: b - a,
        history,
    })
}

/// Bijection between two equally long spectra minimizing `Σ|ΔE|`
/// (Hungarian algorithm up to 64 states, greedy nearest neighbour above).
pub fn link(from: &[C], to: &[C]) -> Vec<usize> {
    let n = from.len();
    assert_eq!(n, to.len(), "linking needs equally long spectra");
    if n <= HUNGARIAN_LIMIT {
        hungarian(&|i, j| (from[i] - to[j]).norm(), n)
    } else {
        greedy(from, to)
    }
}

fn greedy(from: &[C], to: &[C]) -> Vec<usize> {
    let n = from.len();
    let mut used = vec![false; n];
    let mut out = vec![usize::MAX; n];
    for i in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !used[j] {
                let d = (from[i] - to[j]).norm();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        used[best] = true;
        out[i] = best;
    }
    out
}

/// Minimum-cost perfect assignment, `O(n³)` with row/column potentials.
fn hungarian(cost: &dyn Fn(usize, usize) -> f64, n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        out[p[j] - 1] = j - 1;
    }
    out
}

/// Branch id of every state at every point, following the links; a failed
/// point starts fresh ids.
pub fn branch_ids(result: &SweepResult) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(result.points.len());
    let mut next_id = 0usize;
    for (k, pt) in result.points.iter().enumerate() {
        let len = pt.spectrum.as_ref().map_or(0, |s| s.energies.len());
        let inherited = k
            .checked_sub(1)
            .and_then(|prev| result.links.get(prev))
            .filter(|l| !l.is_empty() && l.len() == len);
        let ids = match inherited {
            Some(l) => {
                let prev = &out[k - 1];
                let mut ids = vec![0; len];
                for (i, &j) in l.iter().enumerate() {
                    ids[j] = prev[i];
                }
                ids
            }
            None => {
                let ids: Vec<usize> = (next_id..next_id + len).collect();
                next_id += len;
                ids
            }
        };
        out.push(ids);
    }
    out
}

/// Trajectory table with header `param,branch_id,re_E,im_E,rep_kind`.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "branch_id", "re_E", "im_E", "rep_kind"])?;
    let ids = branch_ids(result);
    for (pt, ids) in result.points.iter().zip(&ids) {
        let Some(spec) = &pt.spectrum else { continue };
        for ((e, kind), id) in spec.energies.iter().zip(&spec.kinds).zip(ids) {
            w.write_record([
                format!("{:.15e}", pt.param),
                id.to_string(),
                format!("{:.15e}", e.re),
                format!("{:.15e}", e.im),
                kind.map(|k| k.name().to_string()).unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::planted::{build_planted, PlantedBlock, PlantedPlan};

    #[test]
    fn hungarian_finds_minimum_assignment() {
        let from = [C::new(0.0, 0.0), C::new(0.2, 0.0)];
        let to = [C::new(0.1, 0.0), C::new(-0.05, 0.0)];
        let l = link(&from, &to);
        assert_eq!(l, vec![1, 0]);
        let perm = hungarian(&|i, j| [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]][i][j], 3);
        assert_eq!(perm, vec![1, 0, 2]);
    }

    #[test]
    fn greedy_is_a_bijection() {
        let from: Vec<C> = (0..100).map(|k| C::new(k as f64, 0.0)).collect();
        let to: Vec<C> = from.iter().rev().map(|e| e + 0.3).collect();
        let mut l = link(&from, &to);
        l.sort();
        assert_eq!(l, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn constant_planted_family_has_no_threshold() {
        let plan = PlantedPlan {
            seed: 3,
            blocks: vec![
                PlantedBlock {
                    kind: RepKind::GammaMinus2D,
                    energy: C::new(1.0, 0.5),
                    omega_sq: None,
                },
                PlantedBlock {
                    kind: RepKind::GammaPlus1D,
                    energy: C::new(-2.0, 0.0),
                    omega_sq: None,
                },
            ],
        };
        let family = MatrixFamily::new("planted", move |_| build_planted(&plan).map(|(h, a, _)| (h, a)));
        let res = sweep(&family, 0.0, 1.0, 5).unwrap();
        assert_eq!(res.transition, None);
        let first = &res.points[0].spectrum.as_ref().unwrap().energies;
        for pt in &res.points {
            let e = &pt.spectrum.as_ref().unwrap().energies;
            for (a, b) in first.iter().zip(e) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        for l in &res.links {
            assert_eq!(l, &vec![0, 1, 2]);
        }
        assert!(matches!(
            find_threshold(&family, 0.0, 1.0, 1e-6),
            Err(Error::BracketInvalid { .. })
        ));
    }

    #[test]
    fn rejects_single_step() {
        let f = SquareWellMatching::default();
        assert!(sweep(&f, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let family = SquareWellFd::new(16).unwrap();
        let res = sweep(&family, 0.0, 0.5, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "param,branch_id,re_E,im_E,rep_kind");
        assert_eq!(lines.len(), 1 + 3 * 16);
        assert!(lines[1].ends_with("GammaPlus1D"));
    }
}
