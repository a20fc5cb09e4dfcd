//! Browser bindings for the covml demo page.
//!
//! Every export returns a JSON string; failures come back as `{"error": "..."}`.

use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use covml::cvdisplace::{run_scenario, CvKind, CvScenario};
use covml::estimation::{decompose_state, holevo_chi, optimal_likelihood, orbit_dimension};
use covml::isotypic::isotypic_decompose;
use covml::linalg::CVector;
use covml::grouprep::Representation;

#[derive(Serialize)]
struct SpinPoint {
    theta: f64,
    likelihood: f64,
    orbit_dim: usize,
    chi_bits: f64,
}

#[derive(Serialize)]
struct DensityPoint {
    delta: f64,
    density: f64,
    target: f64,
}

#[derive(Serialize)]
struct DensityProfile {
    kind: &'static str,
    likelihood: f64,
    target_likelihood: f64,
    max_abs_err: f64,
    points: Vec<DensityPoint>,
}

#[derive(Serialize)]
struct SqueezePoint {
    x: f64,
    likelihood: Option<f64>,
    target: f64,
    error: Option<String>,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Optimal likelihood for `|↑⟩ ⊗ (cos θ/2 |↑⟩ + e^{iφ} sin θ/2 |↓⟩)` under `U ⊗ U`, for θ on `[0, π]`.
#[wasm_bindgen]
pub fn spin_pair_curve(points: u32, phi: f64) -> String {
    to_json(spin_pair_points(points.max(2) as usize, phi))
}

fn spin_pair_points(points: usize, phi: f64) -> Result<Vec<SpinPoint>, String> {
    let rep = Representation::spin(1).tensor(&Representation::spin(1)).map_err(|e| e.to_string())?;
    let iso = isotypic_decompose(&rep).map_err(|e| e.to_string())?;
    (0..points)
        .map(|k| {
            let theta = std::f64::consts::PI * k as f64 / (points - 1) as f64;
            let second = [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
            let psi = CVector::from_fn(4, |i, _| if i < 2 { second[i] } else { Complex64::new(0.0, 0.0) });
            let sd = decompose_state(&psi, &iso).map_err(|e| e.to_string())?;
            Ok(SpinPoint {
                theta,
                likelihood: optimal_likelihood(&sd),
                orbit_dim: orbit_dimension(&sd),
                chi_bits: holevo_chi(&sd, &iso).map_err(|e| e.to_string())?,
            })
        })
        .collect()
}

/// Estimation density along `α̂ = 0.5 + δ`, `δ ∈ [−1.5, 1.5]` real, for one continuous-variable scenario.
#[wasm_bindgen]
pub fn cv_density_profile(kind: &str, cutoff: u32, x: f64, points: u32) -> String {
    to_json(density_profile(kind, cutoff as usize, x, points.max(2) as usize))
}

fn density_profile(kind: &str, cutoff: usize, x: f64, points: usize) -> Result<DensityProfile, String> {
    let kind = match kind {
        "identical" => CvKind::Identical,
        "conjugated" => CvKind::Conjugated,
        "squeezed" => CvKind::Squeezed { x },
        other => return Err(format!("unknown kind {other:?}")),
    };
    let alpha = Complex64::new(0.5, 0.0);
    let deltas: Vec<f64> = (0..points).map(|k| -1.5 + 3.0 * k as f64 / (points - 1) as f64).collect();
    let grid = deltas.iter().map(|d| alpha + d).collect();
    let scenario = CvScenario::with_grid(kind, cutoff, alpha, grid).map_err(|e| e.to_string())?;
    let report = run_scenario(&scenario).map_err(|e| e.to_string())?;
    Ok(DensityProfile {
        kind: report.kind,
        likelihood: report.likelihood,
        target_likelihood: report.target_likelihood,
        max_abs_err: report.max_abs_err,
        points: deltas
            .iter()
            .zip(&report.grid)
            .map(|(&delta, p)| DensityPoint { delta, density: p.density, target: p.target })
            .collect(),
    })
}

/// Squeezed-input likelihood against `2(1+x)/(1−x)` for `x` on `[0, x_max]`.
#[wasm_bindgen]
pub fn squeezed_curve(cutoff: u32, x_max: f64, points: u32) -> String {
    let points = points.max(2) as usize;
    let out: Vec<SqueezePoint> = (0..points)
        .map(|k| {
            let x = x_max * k as f64 / (points - 1) as f64;
            let target = 2.0 * (1.0 + x) / (1.0 - x);
            let single = CvScenario::with_grid(CvKind::Squeezed { x }, cutoff as usize, Complex64::new(0.5, 0.0), vec![])
                .and_then(|s| run_scenario(&s));
            match single {
                Ok(r) => SqueezePoint { x, likelihood: Some(r.likelihood), target, error: None },
                Err(e) => SqueezePoint { x, likelihood: None, target, error: Some(e.to_string()) },
            }
        })
        .collect();
    to_json(Ok(out))
}
