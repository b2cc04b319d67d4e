//! Browser exports. Every function takes plain strings and numbers and returns
//! a JSON document; failures come back as `{"error": "..."}`.

use mexp::gram;
use mexp::intervals::{self, cyclic_level_sets, parse_spectrum};
use mexp::lattice::{self, DensityMode};
use mexp::{IntervalUnion, C64};
use serde_json::{json, Value};
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

const MAX_TRUNC: usize = 2000;
const MAX_WINDOW: usize = 400;

fn spectrum(src: &str) -> Result<IntervalUnion, String> {
    let t = src.trim();
    let wrapped = if t.starts_with('[') { format!("{{\"intervals\": {t}}}") } else { t.to_string() };
    parse_spectrum(&wrapped).map_err(|e| e.to_string())
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn parts(u: &IntervalUnion) -> Vec<[f64; 2]> {
    u.parts().iter().map(|p| [p.a, p.b]).collect()
}

/// Cyclic level sets `A_1 ⊇ … ⊇ A_N` of a spectrum inside `[0, 2π]`; `n = 0`
/// picks the smallest reducing `N`.
#[wasm_bindgen]
pub fn level_sets(spectrum_json: &str, n: usize) -> String {
    respond((|| {
        let s = spectrum(spectrum_json)?;
        let n = if n == 0 { intervals::min_reducing_n(&s, intervals::DEFAULT_N_MAX).map_err(|e| e.to_string())? } else { n };
        let sets = cyclic_level_sets(&s, n).map_err(|e| e.to_string())?;
        let levels: Vec<Value> = sets
            .iter()
            .enumerate()
            .map(|(i, a)| match a {
                Some(a) => json!({ "n": i + 1, "parts": parts(a), "measure": a.measure() }),
                None => json!({ "n": i + 1, "parts": [], "measure": 0.0 }),
            })
            .collect();
        Ok(json!({ "measure": s.measure(), "cell": 2.0 * PI / n as f64, "N": n, "levels": levels }))
    })())
}

/// Constructed frequencies with `|γ| ≤ trunc` and `|G|` sampled on `[-x_max, x_max] + i·y`.
#[wasm_bindgen]
pub fn basis(spectrum_json: &str, trunc: usize, x_max: f64, y: f64, samples: usize) -> String {
    respond((|| {
        let e = spectrum(spectrum_json)?;
        let trunc = trunc.clamp(1, MAX_TRUNC);
        let (set, g) = lattice::multiband_basis(&e, trunc).map_err(|e| e.to_string())?;
        let plan = lattice::plan(&e).map_err(|e| e.to_string())?;
        let samples = samples.clamp(2, 4000);
        let x_max = x_max.abs().min(g.trusted_radius()).max(1.0);
        let profile: Vec<[f64; 2]> = (0..samples)
            .map(|k| {
                let x = -x_max + 2.0 * x_max * k as f64 / (samples - 1) as f64;
                [x, g.vp_eval(C64::new(x, y)).norm()]
            })
            .collect();
        let density = lattice::density_estimate(&set.points, trunc as f64, DensityMode::Disk).map_err(|e| e.to_string())?;
        Ok(json!({
            "label": set.label,
            "points": set.points.iter().map(|p| p.re).collect::<Vec<_>>(),
            "components": plan.components,
            "density": density,
            "target_density": e.measure() / (2.0 * PI),
            "profile": profile,
        }))
    })())
}

/// Riesz bounds of centered Gram sections for a comma-separated list of windows.
#[wasm_bindgen]
pub fn riesz_bounds(spectrum_json: &str, trunc: usize, windows: &str) -> String {
    respond((|| {
        let e = spectrum(spectrum_json)?;
        let ws: Vec<usize> = windows
            .split(',')
            .map(|w| w.trim().parse::<usize>().map_err(|_| format!("bad window {w:?}")))
            .collect::<Result<_, _>>()?;
        if ws.iter().any(|&w| w == 0 || w > MAX_WINDOW) {
            return Err(format!("windows must lie in 1..={MAX_WINDOW}"));
        }
        let (set, _) = lattice::multiband_basis(&e, trunc.clamp(1, MAX_TRUNC)).map_err(|e| e.to_string())?;
        let bounds = gram::riesz_bounds(&e, &set.points, &ws).map_err(|e| e.to_string())?;
        Ok(json!({ "bounds": bounds.iter().map(|b| json!({
            "window": b.window, "A": b.a, "B": b.b,
            "A_normalized": b.a_normalized, "B_normalized": b.b_normalized, "condition": b.cond(),
        })).collect::<Vec<_>>() }))
    })())
}
