//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. Times are in units of the total
//! idling time `T`, so `t1 = 2.0` means `T1 = 2T`. The `*_json` functions
//! hold the logic and are what the native tests exercise.

use serde_json::json;
use surfmem::analytic::{self, AnalyticParams, Rates};
use surfmem::estimator::{sweep_cell, IdleMode, SweepSettings};
use surfmem::noise::{idling_probs, t2_from};
use surfmem::{Basis, NoiseParams};
use wasm_bindgen::prelude::*;

/// Largest shot count the page may request per basis and `N`.
pub const MAX_SHOTS: u32 = 20_000;

fn tphi(v: f64) -> f64 {
    if v <= 0.0 {
        f64::INFINITY
    } else {
        v
    }
}

/// Twirled idling channel `(p0, px, pz)` for idle times in `[0, t_max]`.
/// A non-positive `t_phi` means no pure dephasing.
pub fn idling_curve_json(t1: f64, t_phi: f64, t_max: f64, points: u32) -> Result<String, String> {
    if points < 2 {
        return Err("need at least two points".into());
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(format!("t_max must be positive, got {t_max}"));
    }
    let t2 = t2_from(t1, tphi(t_phi)).map_err(|e| e.to_string())?;
    let (mut t, mut p0, mut px, mut pz) = (vec![], vec![], vec![], vec![]);
    for i in 0..points {
        let ti = t_max * i as f64 / (points - 1) as f64;
        let c = idling_probs(ti, t1, t2).map_err(|e| e.to_string())?;
        t.push(ti);
        p0.push(c.p0);
        px.push(c.px);
        pz.push(c.pz);
    }
    Ok(json!({ "t": t, "p0": p0, "px": px, "py": px, "pz": pz }).to_string())
}

/// Leading-order logical failure per basis for `N = 1..=n_max`, plus the optima.
pub fn analytic_curve_json(d: u32, t1: f64, t_phi: f64, p: f64, n_max: u32) -> Result<String, String> {
    let params = AnalyticParams::new(d as usize, 1.0, t1, tphi(t_phi), p).map_err(|e| e.to_string())?;
    let n_max = n_max.clamp(1, 10_000) as usize;
    let mut rounds = vec![];
    let mut x = vec![];
    let mut z = vec![];
    for n in 1..=n_max {
        rounds.push(n);
        x.push(analytic::min_weight_failure_with(&params, n, Basis::X, Rates::Exact).map_err(|e| e.to_string())?);
        z.push(analytic::min_weight_failure_with(&params, n, Basis::Z, Rates::Exact).map_err(|e| e.to_string())?);
    }
    let n_x = analytic::n_star_basis(&params, Basis::X).map_err(|e| e.to_string())?;
    let n_z = analytic::n_star_basis(&params, Basis::Z).map_err(|e| e.to_string())?;
    let combined = analytic::n_star_combined(&params).ok();
    Ok(json!({
        "rounds": rounds,
        "x": x,
        "z": z,
        "n_star_x": finite(n_x),
        "n_star_z": finite(n_z),
        "n_star_combined": combined,
    })
    .to_string())
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Monte Carlo `pL(N)` with the full decoder, single threaded.
#[allow(clippy::too_many_arguments)]
pub fn simulate_json(
    d: u32,
    t1: f64,
    t_phi: f64,
    p: f64,
    q: f64,
    rounds: &[u32],
    shots: u32,
    seed: u64,
) -> Result<String, String> {
    if shots == 0 || shots > MAX_SHOTS {
        return Err(format!("shots must lie in 1..={MAX_SHOTS}"));
    }
    let settings = SweepSettings {
        d: d as usize,
        noise: NoiseParams {
            t1,
            t_phi: tphi(t_phi),
            p,
            q,
            total_time: 1.0,
        },
        rounds: rounds.iter().map(|&n| n as usize).collect(),
        shots: shots as u64,
        seed,
        idle: IdleMode::TotalTime,
    };
    let result = sweep_cell(&settings, 0).map_err(|e| e.to_string())?;
    let points: Vec<_> = result
        .points
        .iter()
        .map(|pt| {
            let e = &pt.estimate;
            json!({ "N": pt.rounds, "pl": e.pl, "dpl": e.dpl, "pxl": e.pxl, "pyl": e.pyl, "pzl": e.pzl })
        })
        .collect();
    let (lo, hi) = result.interval_rounds();
    Ok(json!({
        "points": points,
        "argmin": result.argmin_rounds(),
        "interval": [lo, hi],
    })
    .to_string())
}

#[wasm_bindgen]
pub fn idling_curve(t1: f64, t_phi: f64, t_max: f64, points: u32) -> Result<String, JsError> {
    idling_curve_json(t1, t_phi, t_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn analytic_curve(d: u32, t1: f64, t_phi: f64, p: f64, n_max: u32) -> Result<String, JsError> {
    analytic_curve_json(d, t1, t_phi, p, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    d: u32,
    t1: f64,
    t_phi: f64,
    p: f64,
    q: f64,
    rounds: &[u32],
    shots: u32,
    seed: u64,
) -> Result<String, JsError> {
    simulate_json(d, t1, t_phi, p, q, rounds, shots, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn idling_curve_is_normalised() {
        let v = parse(idling_curve_json(2.0, 12.0, 0.5, 11));
        let t = v["t"].as_array().unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[0].as_f64(), Some(0.0));
        assert!((t[10].as_f64().unwrap() - 0.5).abs() < 1e-15);
        for i in 0..11 {
            let f = |k: &str| v[k][i].as_f64().unwrap();
            assert!((f("p0") + f("px") + f("py") + f("pz") - 1.0).abs() < 1e-12);
            assert!(f("pz") >= 0.0);
        }
        assert_eq!(v["px"][0].as_f64(), Some(0.0));
    }

    #[test]
    fn idling_curve_rejects_bad_input() {
        assert!(idling_curve_json(2.0, 12.0, 1.0, 1).is_err());
        assert!(idling_curve_json(-1.0, 12.0, 1.0, 5).is_err());
        assert!(idling_curve_json(2.0, 12.0, 0.0, 5).is_err());
    }

    #[test]
    fn analytic_curve_matches_core() {
        let v = parse(analytic_curve_json(9, 2.0, 12.0, 0.006, 60));
        assert_eq!(v["rounds"].as_array().unwrap().len(), 60);
        let params = AnalyticParams::new(9, 1.0, 2.0, 12.0, 0.006).unwrap();
        let nx = analytic::n_star_basis(&params, Basis::X).unwrap();
        assert_eq!(v["n_star_x"].as_f64(), Some(nx));
        assert!((v["n_star_x"].as_f64().unwrap() - 44.6).abs() < 0.1);
        assert!((v["n_star_z"].as_f64().unwrap() - 29.8).abs() < 0.1);
        let n = v["n_star_combined"].as_u64().unwrap() as f64;
        assert!((29.0..=45.0).contains(&n));
        // Minimum of the sampled X curve sits at the closest integer.
        let x: Vec<f64> = v["x"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
        let best = (0..x.len()).min_by(|&a, &b| x[a].total_cmp(&x[b])).unwrap() + 1;
        assert!((best as f64 - nx).abs() <= 1.0);
    }

    #[test]
    fn analytic_curve_without_gate_noise_has_no_optimum() {
        let v = parse(analytic_curve_json(5, 2.0, 0.0, 0.0, 10));
        assert!(v["n_star_x"].is_null());
        assert!(v["n_star_combined"].is_null());
    }

    #[test]
    fn simulate_is_seeded() {
        let run = || simulate_json(3, 2.0, 12.0, 0.006, 0.02, &[2, 6, 10], 300, 5);
        let a = run().unwrap();
        assert_eq!(a, run().unwrap());
        let v: Value = serde_json::from_str(&a).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1]["N"].as_u64(), Some(6));
        for pt in pts {
            let pl = pt["pl"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&pl));
        }
        let argmin = v["argmin"].as_u64().unwrap();
        assert!([2, 6, 10].contains(&argmin));
    }

    #[test]
    fn simulate_rejects_bad_input() {
        assert!(simulate_json(3, 2.0, 12.0, 0.006, 0.02, &[2], 0, 1).is_err());
        assert!(simulate_json(3, 2.0, 12.0, 0.006, 0.02, &[2], MAX_SHOTS + 1, 1).is_err());
        assert!(simulate_json(4, 2.0, 12.0, 0.006, 0.02, &[2], 10, 1).is_err());
        assert!(simulate_json(3, 2.0, 12.0, 0.006, 0.02, &[], 10, 1).is_err());
        assert!(simulate_json(3, 2.0, 12.0, 0.006, 0.02, &[4, 2], 10, 1).is_err());
    }
}
