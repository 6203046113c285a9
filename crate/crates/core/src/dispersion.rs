//! Linear dispersion symbol, its continuous-spectrum edge and the Taylor
//! structure at the critical point.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::{NonDimParams, PhysicalParams};

/// Arguments below this magnitude use a Taylor series for `x coth(x)`.
pub const SERIES_SWITCH: f64 = 1e-3;

/// `x coth(a x)` with the removable singularity at `x = 0` filled in.
pub fn x_coth(a: f64, x: f64) -> f64 {
    let y = a * x;
    if y.abs() < SERIES_SWITCH {
        let y2 = y * y;
        (1.0 + y2 / 3.0 - y2 * y2 / 45.0 + 2.0 * y2 * y2 * y2 / 945.0) / a
    } else {
        x / y.tanh()
    }
}

/// `q̃(ξ) = λ + βξ² − Σ ϱ± ξ coth(a± ξ)` with `a₊ = 1`, `a₋ = h`, `ϱ₊ = ϱ`, `ϱ₋ = 1`.
pub fn qtilde(xi: f64, beta: f64, lambda: f64, varrho: f64, h: f64) -> f64 {
    lambda + beta * xi * xi - varrho * x_coth(1.0, xi) - x_coth(h, xi)
}

/// Dimensionless symbol of the flat-state linearized operator.
pub fn symbol_qtilde(xi_hat: f64, nd: &NonDimParams) -> f64 {
    qtilde(xi_hat, nd.beta, nd.lambda, nd.varrho, nd.h)
}

/// Dimensional symbol `(c²ρ₋/d₊) q̃(d₊ξ)`.
pub fn symbol_dimensional(xi: f64, p: &PhysicalParams) -> f64 {
    let nd = p.nondimensionalize_unchecked();
    p.symbol_scale() * symbol_qtilde(p.d_plus * xi, &nd)
}

/// Residual of the dimensional dispersion relation
/// `σξ² − g⟦ρ⟧ − c² Σ ρ± ξ coth(d± ξ)`, which vanishes at the roots of q̃.
pub fn dispersion_residual_dimensional(xi: f64, p: &PhysicalParams) -> f64 {
    let jump = p.rho_plus - p.rho_minus;
    p.sigma * xi * xi - p.g * jump
        - p.c * p.c * (p.rho_plus * x_coth(p.d_plus, xi) + p.rho_minus * x_coth(p.d_minus, xi))
}

/// `𝔯(ξ) = β₀ξ² + λ₀ − Σ ϱ± ξ coth(a± ξ)`.
pub fn residual_r(xi: f64, varrho: f64, h: f64) -> f64 {
    let beta0 = (varrho + h) / 3.0;
    let lambda0 = varrho + 1.0 / h;
    qtilde(xi, beta0, lambda0, varrho, h)
}

fn qtilde_complex(z: Complex64, beta: f64, lambda: f64, varrho: f64, h: f64) -> Complex64 {
    // cosh/sinh rather than 1/tanh: tanh is infinite at az = iπ/2 on the contour.
    let zc = |a: f64| z * (z * a).cosh() / (z * a).sinh();
    lambda + beta * z * z - varrho * zc(1.0) - zc(h)
}

/// Taylor coefficients of `βξ² + λ − Σϱ± ξ coth(a±ξ)` about 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    /// `c0..c6`.
    pub coeffs: [f64; 7],
    /// Contour radius used by the Cauchy integral.
    pub radius: f64,
    pub gamma_quartic: f64,
    pub gamma_printed: f64,
}

impl TaylorCoefficients {
    /// `c4 − gamma_printed`: the size of the printed-constant discrepancy.
    pub fn printed_discrepancy(&self) -> f64 {
        self.coeffs[4] - self.gamma_printed
    }
}

/// Taylor coefficients of `𝔯` at the critical point `(β₀, λ₀)`.
pub fn criticality_check(nd: &NonDimParams) -> TaylorCoefficients {
    criticality_check_at(nd, nd.beta0, nd.lambda0)
}

/// Taylor coefficients at a caller-chosen `(β, λ)`, computed by the
/// trapezoid rule on a circle inside the disc of analyticity
/// (the nearest poles of `ξ coth(aξ)` sit at `±iπ/a`).
pub fn criticality_check_at(nd: &NonDimParams, beta: f64, lambda: f64) -> TaylorCoefficients {
    const M: usize = 128;
    let amax = nd.h.max(1.0);
    let radius = 0.5 * std::f64::consts::PI / amax;
    let samples: Vec<Complex64> = (0..M)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / M as f64);
            qtilde_complex(w * radius, beta, lambda, nd.varrho, nd.h)
        })
        .collect();
    let mut coeffs = [0.0; 7];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, f) in samples.iter().enumerate() {
            let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / M as f64);
            acc += f * w;
        }
        *c = acc.re / M as f64 / radius.powi(k as i32);
    }
    TaylorCoefficients {
        coeffs,
        radius,
        gamma_quartic: nd.gamma_quartic,
        gamma_printed: nd.gamma_printed,
    }
}

/// Minimum of the symbol, i.e. the bottom of the continuous spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub nu_star_dimless: f64,
    pub nu_star_dimensional: f64,
    pub argmin_xi: f64,
    /// Estimated absolute error of `nu_star_dimless`.
    pub numerical_error: f64,
    /// Value of the closed-form edge as printed, for comparison.
    pub printed_nu_star: f64,
    /// Set when the scan minimum sits at the right end of the window.
    pub window_warning: bool,
}

pub const SCAN_MAX: f64 = 50.0;
pub const SCAN_STEP: f64 = 0.01;

/// Minimize `q̃` over `ξ̂ ≥ 0` by a coarse scan followed by golden-section
/// refinement.
pub fn symbol_minimum(nd: &NonDimParams) -> (f64, f64, bool) {
    let f = |x: f64| symbol_qtilde(x, nd);
    let steps = (SCAN_MAX / SCAN_STEP).round() as usize;
    let (mut best_i, mut best_v) = (0usize, f(0.0));
    for i in 1..=steps {
        let v = f(i as f64 * SCAN_STEP);
        if v < best_v {
            best_i = i;
            best_v = v;
        }
    }
    let warn = best_i == steps;
    let lo = (best_i as f64 - 1.0).max(0.0) * SCAN_STEP;
    let hi = (best_i as f64 + 1.0) * SCAN_STEP;
    let (x, v) = golden_section(f, lo, hi, 1e-10);
    if v < best_v {
        (x, v, warn)
    } else {
        (best_i as f64 * SCAN_STEP, best_v, warn)
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Continuous-spectrum edge of the flat-state operator.
pub fn cont_spec_edge(p: &PhysicalParams) -> EdgeReport {
    let nd = p.nondimensionalize_unchecked();
    let (x, v, warn) = symbol_minimum(&nd);
    let scale_terms = nd.lambda.abs() + nd.beta * x * x + nd.varrho * x_coth(1.0, x) + x_coth(nd.h, x);
    let step = 1e-7;
    let curvature_err = (symbol_qtilde(x + step, &nd) - v).abs().max((symbol_qtilde((x - step).max(0.0), &nd) - v).abs());
    let numerical_error = 64.0 * f64::EPSILON * scale_terms + curvature_err * 1e-6;
    let jump = p.rho_plus - p.rho_minus;
    let printed = if nd.beta >= nd.beta0 {
        -p.g * jump * (1.0 - nd.lambda0 * nd.lambda0 / (nd.lambda * nd.lambda))
    } else {
        -p.g * jump * (1.0 - (nd.lambda - v) / (nd.lambda * nd.lambda))
    };
    EdgeReport {
        nu_star_dimless: v,
        nu_star_dimensional: p.symbol_scale() * v,
        argmin_xi: x,
        numerical_error,
        printed_nu_star: printed,
        window_warning: warn,
    }
}

/// Positive roots of `q̃` on `(0, xmax]`, located by sign changes on a fine
/// scan and refined by bisection.
pub fn symbol_roots(nd: &NonDimParams, xmax: f64) -> Vec<f64> {
    let f = |x: f64| symbol_qtilde(x, nd);
    let n = (xmax / 1e-3).ceil() as usize;
    let mut roots = Vec::new();
    let mut x0 = 1e-6;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = i as f64 * xmax / n as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
                if b - a < 1e-15 * b.max(1.0) {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}
