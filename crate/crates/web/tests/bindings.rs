use antispec_web::{classify_planted_json, square_well_spectrum_json, sweep_trajectories_json};
use serde_json::Value;

#[test]
fn spectrum_below_threshold_is_real() {
    let v: Value = serde_json::from_str(&square_well_spectrum_json(1.0, 60).unwrap()).unwrap();
    assert_eq!(v["summary"], "N*=0 N-=0 N+=0 n+=60");
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 60);
    assert!(states.windows(2).all(|w| w[0]["re"].as_f64() <= w[1]["re"].as_f64()));
}

#[test]
fn spectrum_rejects_bad_grid() {
    assert!(square_well_spectrum_json(1.0, 3).is_err());
    assert!(square_well_spectrum_json(1.0, 1000).is_err());
}

#[test]
fn exact_sweep_finds_threshold() {
    let v: Value = serde_json::from_str(&sweep_trajectories_json(0.0, 10.0, 11, 4, true).unwrap()).unwrap();
    let zc = v["threshold"]["Z_c"].as_f64().unwrap();
    assert!(zc > 4.0 && zc < 5.0, "{zc}");
    assert_eq!(v["points"].as_array().unwrap().len(), 11);
}

#[test]
fn sweep_without_transition_has_no_threshold() {
    let v: Value = serde_json::from_str(&sweep_trajectories_json(0.0, 1.0, 3, 4, false).unwrap()).unwrap();
    assert!(v["threshold"].is_null());
    assert!(sweep_trajectories_json(0.0, 1.0, 1, 4, true).is_err());
}

#[test]
fn planted_draws_are_recovered() {
    for seed in 0..10 {
        let v: Value = serde_json::from_str(&classify_planted_json(seed, 24).unwrap()).unwrap();
        assert_eq!(v["matches"], true, "seed {seed}: {} vs {}", v["expected"], v["found"]);
    }
}
