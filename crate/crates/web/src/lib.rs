//! WebAssembly bindings for the browser demo in `www/`. Every export returns
//! a JSON string; the `*_json` functions are the plain-Rust versions used by
//! the native tests.

use antispec::classifier::classify;
use antispec::config::Tolerances;
use antispec::io::ReportJson;
use antispec::linalg::random::rng;
use antispec::models::planted::{build_planted, random_plan};
use antispec::models::square_well::SquareWellModel;
use antispec::sweep::{self, ModelFamily, SquareWellFd, SquareWellMatching};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_GRID: usize = 400;
const MAX_STEPS: usize = 200;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Finite-difference spectrum of the square well at coupling `z`.
pub fn square_well_spectrum_json(z: f64, n: usize) -> Result<String, String> {
    if n > MAX_GRID {
        return Err(format!("grid limited to {MAX_GRID} points in the browser"));
    }
    let model = SquareWellModel::new(z, n).map_err(err)?;
    let t = model.tridiagonal();
    let report = classify(&t, &model.symmetry(), &Tolerances::default()).map_err(err)?;
    let mut states: Vec<_> = report
        .blocks
        .iter()
        .flat_map(|b| b.energies.iter().map(move |e| json!({"re": e.re, "im": e.im, "kind": b.kind.name()})))
        .collect();
    states.sort_by(|a, b| a["re"].as_f64().unwrap().total_cmp(&b["re"].as_f64().unwrap()));
    Ok(json!({
        "Z": z,
        "grid": n,
        "summary": report.multiplicities.to_string(),
        "residual": report.commutation_residual,
        "states": states,
    })
    .to_string())
}

/// Sweep of the lowest `levels` square-well energies over `[lo, hi]`, with
/// the threshold located by bisection when a pair turns complex.
pub fn sweep_trajectories_json(lo: f64, hi: f64, steps: usize, levels: usize, exact: bool) -> Result<String, String> {
    if steps > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps in the browser"));
    }
    let family: Box<dyn ModelFamily> = if exact {
        Box::new(SquareWellMatching { levels, grid: 24 })
    } else {
        let mut f = SquareWellFd::new(120).map_err(err)?;
        f.levels = levels;
        Box::new(f)
    };
    let result = sweep::sweep(family.as_ref(), lo, hi, steps).map_err(err)?;
    let threshold = result.transition.and_then(|k| {
        sweep::find_threshold(family.as_ref(), result.param_values[k], result.param_values[k + 1], 1e-6).ok()
    });
    let ids = sweep::branch_ids(&result);
    let points: Vec<_> = result
        .points
        .iter()
        .zip(&ids)
        .map(|(p, ids)| {
            let states: Vec<_> = p
                .spectrum
                .iter()
                .flat_map(|s| s.energies.iter().zip(&s.kinds).zip(ids))
                .map(|((e, k), id)| json!({"re": e.re, "im": e.im, "kind": k.map(|k| k.name()), "branch": id}))
                .collect();
            json!({"param": p.param, "complex_pairs": p.complex_pairs, "states": states, "error": p.error})
        })
        .collect();
    Ok(json!({
        "model": family.name(),
        "points": points,
        "threshold": threshold.map(|t| json!({"Z_c": t.value, "bracket": t.bracket_width})),
    })
    .to_string())
}

/// Draws a random planted plan, hides it behind a random unitary and
/// classifies the result.
pub fn classify_planted_json(seed: u64, max_dim: usize) -> Result<String, String> {
    let max_dim = max_dim.clamp(1, 64);
    let plan = random_plan(&mut rng(seed), max_dim, seed);
    let (h, a, expected) = build_planted(&plan).map_err(err)?;
    let found = classify(&h, &a, &Tolerances::default()).map_err(err)?;
    Ok(json!({
        "plan": plan,
        "dim": h.dim(),
        "expected": expected.multiplicities.to_string(),
        "found": found.multiplicities.to_string(),
        "matches": expected.multiplicities == found.multiplicities,
        "report": ReportJson::from(&found),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn square_well_spectrum(z: f64, n: usize) -> Result<String, JsError> {
    square_well_spectrum_json(z, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep_trajectories(lo: f64, hi: f64, steps: usize, levels: usize, exact: bool) -> Result<String, JsError> {
    sweep_trajectories_json(lo, hi, steps, levels, exact).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify_planted(seed: u64, max_dim: usize) -> Result<String, JsError> {
    classify_planted_json(seed, max_dim).map_err(|e| JsError::new(&e))
}
