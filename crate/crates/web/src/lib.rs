//! Browser bindings: region classification, the dispersion symbol, and
//! Kawahara solitary-wave profiles.
//!
//! Each export is a thin wrapper over a plain function so that the same code
//! paths run in native tests.

use intwave::dispersion::{symbol_minimum, symbol_qtilde};
use intwave::params::{classify_region, Region, DEFAULT_C_WIDTH};
use intwave::profiles::kawahara_solve;
use intwave::NonDimParams;
use wasm_bindgen::prelude::*;

/// Region label of a point in the (β, λ) plane.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: String,
    pub beta0: f64,
    pub lambda0: f64,
    /// `λ − λ₀`.
    pub dist_gamma1: f64,
    pub in_c_tube: bool,
}

/// Samples of the dimensionless symbol and its minimum.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolCurve {
    pub xi: Vec<f64>,
    pub qtilde: Vec<f64>,
    pub argmin_xi: f64,
    pub minimum: f64,
}

/// A converged Kawahara homoclinic orbit on its grid.
#[wasm_bindgen(getter_with_clone)]
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub residual: f64,
    pub decay_rate: f64,
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::A => "A",
        Region::B => "B",
        Region::C => "C",
        Region::Other => "other",
    }
}

pub fn classify_point(beta: f64, lambda: f64, varrho: f64, h: f64) -> Result<Classification, String> {
    let nd = NonDimParams::from_ratios(beta, lambda, varrho, h).map_err(|e| e.to_string())?;
    let label = classify_region(&nd, DEFAULT_C_WIDTH);
    Ok(Classification {
        label: region_name(label.label).to_string(),
        beta0: nd.beta0,
        lambda0: nd.lambda0,
        dist_gamma1: label.dist_gamma1,
        in_c_tube: label.in_c_tube,
    })
}

/// Upper bound on the number of samples a page may request.
pub const MAX_SAMPLES: usize = 100_000;

pub fn sample_symbol(
    beta: f64,
    lambda: f64,
    varrho: f64,
    h: f64,
    xi_max: f64,
    samples: usize,
) -> Result<SymbolCurve, String> {
    let nd = NonDimParams::from_ratios(beta, lambda, varrho, h).map_err(|e| e.to_string())?;
    if !(xi_max > 0.0 && xi_max.is_finite()) || !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(format!("need xi_max > 0 and 2..={MAX_SAMPLES} samples"));
    }
    let xi: Vec<f64> = (0..samples).map(|i| xi_max * i as f64 / (samples - 1) as f64).collect();
    let qtilde = xi.iter().map(|&x| symbol_qtilde(x, &nd)).collect();
    let (argmin_xi, minimum, _) = symbol_minimum(&nd);
    Ok(SymbolCurve { xi, qtilde, argmin_xi, minimum })
}

pub fn solve_kawahara(delta: f64) -> Result<Profile, String> {
    let sol = kawahara_solve(delta, None).map_err(|e| e.to_string())?;
    Ok(Profile {
        x: sol.profile.grid.points(),
        values: sol.profile.values,
        residual: sol.residual_norm,
        decay_rate: sol.decay_rate_fit,
    })
}

#[wasm_bindgen]
pub fn classify(beta: f64, lambda: f64, varrho: f64, h: f64) -> Result<Classification, JsError> {
    classify_point(beta, lambda, varrho, h).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = symbolCurve)]
pub fn symbol_curve(
    beta: f64,
    lambda: f64,
    varrho: f64,
    h: f64,
    xi_max: f64,
    samples: usize,
) -> Result<SymbolCurve, JsError> {
    sample_symbol(beta, lambda, varrho, h, xi_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = kawaharaProfile)]
pub fn kawahara_profile(delta: f64) -> Result<Profile, JsError> {
    solve_kawahara(delta).map_err(|e| JsError::new(&e))
}
