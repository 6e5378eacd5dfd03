//! Browser bindings for the demo page in `www/`.
//!
//! The system is `g × cat` on T³ with `g'(0) = α` fixed and `g'(1/2) = β`
//! adjustable; `β = (3+√5)/2` is the golden example. Splittings are indexed
//! 0: `E1+E2 | E3`, 1: `E2 | E1+E3`, 2: `E1 | E2+E3`.

use gds_core::analysis::{check_gds, marginal_density, ratio_profile, GdsParams};
use gds_core::cocycle::a_trace;
use gds_core::splittings::golden_example_splittings;
use gds_core::systems::Minimality;
use gds_core::{GridSpec, SplittingSpec, TorusMapSystem, TorusPoint};
use wasm_bindgen::prelude::*;

/// Orbit and trace lengths above this are refused to keep the page responsive.
const MAX_STEPS: usize = 1_000_000;

fn setup(beta: f64, splitting: usize) -> Result<(TorusMapSystem, SplittingSpec), String> {
    let system = TorusMapSystem::modified_example(beta).map_err(|e| e.to_string())?;
    let mut all = golden_example_splittings(&system).map_err(|e| e.to_string())?;
    if splitting >= all.len() {
        return Err(format!("splitting index {splitting} out of range 0..3"));
    }
    Ok((system, all.swap_remove(splitting)))
}

fn steps(n: usize) -> Result<usize, String> {
    if n == 0 || n > MAX_STEPS {
        Err(format!("n must be in 1..={MAX_STEPS}"))
    } else {
        Ok(n)
    }
}

/// `[verdict, x_0, a_S(x_0), x_1, a_S(x_1), …]`, the profile along the
/// circle coordinate with the toral coordinates at 0. The verdict is coded
/// 0 dominated, 1 gds_not_dominated, 2 conditions12_only, 3 not_gds.
pub fn profile(beta: f64, splitting: usize, s: usize, points: usize) -> Result<Vec<f64>, String> {
    let (system, sp) = setup(beta, splitting)?;
    if points == 0 || points > 4096 {
        return Err("points must be in 1..=4096".into());
    }
    let params = GdsParams::new(s, 1.0).with_k_max(20);
    let report = check_gds(&system, &sp, &params, &GridSpec::uniform(points.min(256), 2)).map_err(|e| e.to_string())?;
    let code = match report.verdict.as_str() {
        "dominated" => 0.0,
        "gds_not_dominated" => 1.0,
        "conditions12_only" => 2.0,
        _ => 3.0,
    };
    let mut out = vec![code];
    for (x, a) in ratio_profile(&system, &sp, s, 0, points, &[0.0, 0.0, 0.0]).map_err(|e| e.to_string())? {
        out.push(x);
        out.push(a);
    }
    Ok(out)
}

/// `a_n(x)/n` for `n = 1..=n` from `x = (x1, 0.1, 0.2)`.
pub fn convergence(beta: f64, splitting: usize, x1: f64, n: usize) -> Result<Vec<f64>, String> {
    let (system, sp) = setup(beta, splitting)?;
    let x = TorusPoint::new(vec![x1, 0.1, 0.2]);
    let trace = a_trace(&system, &sp, &x, steps(n)?).map_err(|e| e.to_string())?;
    Ok(trace.iter().enumerate().map(|(k, a)| a / (k + 1) as f64).collect())
}

/// Visited-box flags (1.0 or 0.0) for the orbit of 0 under `x ↦ x + freq`.
/// The last entry is the visited fraction.
pub fn density(freq: f64, n: usize, resolution: usize) -> Result<Vec<f64>, String> {
    if resolution == 0 || resolution > 100_000 {
        return Err("resolution must be in 1..=100000".into());
    }
    let system = TorusMapSystem::rotation(vec![freq], Minimality::Unknown).map_err(|e| e.to_string())?;
    let n = steps(n)?;
    let ev = marginal_density(&system, &TorusPoint::new(vec![0.0]), n, resolution, &[0]).map_err(|e| e.to_string())?;
    let mut boxes = vec![0.0; resolution];
    for p in system.orbit(&TorusPoint::new(vec![0.0]), n - 1) {
        let b = ((p.coords()[0] * resolution as f64) as usize).min(resolution - 1);
        boxes[b] = 1.0;
    }
    boxes.push(ev.fraction);
    Ok(boxes)
}

#[wasm_bindgen(js_name = ratioProfile)]
pub fn ratio_profile_js(beta: f64, splitting: usize, s: usize, points: usize) -> Result<Vec<f64>, JsValue> {
    profile(beta, splitting, s, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = convergenceTrace)]
pub fn convergence_trace_js(beta: f64, splitting: usize, x1: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    convergence(beta, splitting, x1, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = rotationDensity)]
pub fn rotation_density_js(freq: f64, n: usize, resolution: usize) -> Result<Vec<f64>, JsValue> {
    density(freq, n, resolution).map_err(|e| JsValue::from_str(&e))
}
