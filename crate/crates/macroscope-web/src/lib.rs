//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export is a thin wrapper around a plain function returning `Result<_, String>`,
//! so the same code is exercised by native tests.

use macroscope::constants::HBAR;
use macroscope::devices::preset;
use macroscope::diffusion::{max_dimensionless_rate, SigmaQRange};
use macroscope::inference::{
    default_gamma_grid, jeffreys_posterior, macroscopicity, synthesize_dataset, upper_quantile,
    GridSpec, NoiseModel,
};
use macroscope::wigner::{evolved_wigner_closed, symmetric_axis, EvolutionParams, OscillatorState};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Gamma tau_e against hbar/sigma_q for a preset device, plus the maximum and mu for `gamma_threshold`.
pub fn diffusion_curve(
    device: &str,
    length_min: f64,
    length_max: f64,
    points: usize,
    gamma_threshold: f64,
) -> Result<String, String> {
    let dev = preset(device).ok_or_else(|| format!("unknown device '{device}'"))?;
    let mut range = SigmaQRange::from_lengths(length_min, length_max);
    range.points = points;
    let curve = max_dimensionless_rate(&dev, &range).map_err(|e| e.to_string())?;
    let macro_ = macroscopicity(gamma_threshold, &dev, &range).map_err(|e| e.to_string())?;
    let lengths: Vec<f64> = curve.sigma_q_samples.iter().map(|s| HBAR / s).collect();
    Ok(json!({
        "device": device,
        "lengths": lengths,
        "gamma_tau": curve.gamma_tau_samples,
        "critical_length": curve.max_point.critical_length(),
        "gamma_tau_star": curve.max_point.gamma_tau_star,
        "tau_e_excluded": macro_.tau_e_excluded,
        "mu": macro_.mu,
    })
    .to_string())
}

/// Noise-free W(X, P; t) on an n x n lattice over [-extent, extent], row-major with P slow.
pub fn wigner_snapshot(
    state: &str,
    gamma: f64,
    t1_us: f64,
    t_us: f64,
    extent: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let state = OscillatorState::parse(state).map_err(|e| e.to_string())?;
    if !(t1_us > 0.0) || !(t_us >= 0.0) || !(extent > 0.0) || n < 2 {
        return Err("need T1 > 0, t >= 0, extent > 0 and n >= 2".into());
    }
    let params = EvolutionParams::new(1e6 / t1_us, gamma).map_err(|e| e.to_string())?;
    let axis = symmetric_axis(extent, n);
    let t = t_us * 1e-6;
    let mut out = Vec::with_capacity(n * n);
    for &p in &axis {
        for &x in &axis {
            out.push(evolved_wigner_closed(state, x, p, t, &params));
        }
    }
    Ok(out)
}

/// Synthesize noisy Fock-state snapshots at 10, 20 and 40 us and return the Jeffreys posterior on Gamma.
pub fn posterior_demo(gamma_true: f64, noise: f64, seed: u64, t1_us: f64) -> Result<String, String> {
    if !(t1_us > 0.0) || !(noise > 0.0) {
        return Err("need T1 > 0 and noise > 0".into());
    }
    let gamma_down = 1e6 / t1_us;
    let times = [10e-6, 20e-6, 40e-6];
    let ds = synthesize_dataset(
        OscillatorState::FockOne,
        gamma_true,
        gamma_down,
        &times,
        GridSpec::default(),
        noise,
        seed,
    )
    .map_err(|e| e.to_string())?;
    let noise_model = NoiseModel::new(noise).map_err(|e| e.to_string())?;
    let grid = default_gamma_grid();
    let post = jeffreys_posterior(&ds, &grid, gamma_down, &noise_model).map_err(|e| e.to_string())?;
    let q95 = upper_quantile(&post, 0.05).map_err(|e| e.to_string())?;
    Ok(json!({
        "gamma": post.gamma_grid,
        "density": post.density,
        "mode": post.mode(),
        "q95": q95,
    })
    .to_string())
}

#[wasm_bindgen(js_name = diffusionCurve)]
pub fn diffusion_curve_js(
    device: &str,
    length_min: f64,
    length_max: f64,
    points: usize,
    gamma_threshold: f64,
) -> Result<String, JsError> {
    diffusion_curve(device, length_min, length_max, points, gamma_threshold).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wignerSnapshot)]
pub fn wigner_snapshot_js(
    state: &str,
    gamma: f64,
    t1_us: f64,
    t_us: f64,
    extent: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    wigner_snapshot(state, gamma, t1_us, t_us, extent, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = posteriorDemo)]
pub fn posterior_demo_js(gamma_true: f64, noise: f64, seed: u32, t1_us: f64) -> Result<String, JsError> {
    posterior_demo(gamma_true, noise, seed as u64, t1_us).map_err(|e| JsError::new(&e))
}
