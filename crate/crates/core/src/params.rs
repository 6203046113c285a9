//! Physical and dimensionless parameters, the critical point, the bifurcation
//! curves Γ₂/Γ₃, region classification and the speed parameterization.

use num_complex::Complex64;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensional two-fluid configuration. The `+` layer sits above the interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub sigma: f64,
    pub g: f64,
    pub c: f64,
}

impl PhysicalParams {
    /// Reference configuration with `β ≈ 1`, `λ ≈ 1.01`, `ϱ = 0.5`, `h = 2`.
    pub fn p0() -> Self {
        Self {
            rho_plus: 1.0,
            rho_minus: 2.0,
            d_plus: 1.0,
            d_minus: 2.0,
            sigma: 0.990099,
            g: 1.0,
            c: 0.7035976,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rho_plus, self.rho_minus, self.d_plus, self.d_minus, self.sigma, self.g, self.c];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite field".into()));
        }
        if self.rho_minus <= 0.0 {
            return Err(Error::InvalidParams(format!("rho_minus must be positive, got {}", self.rho_minus)));
        }
        if self.rho_plus < 0.0 || self.rho_plus > self.rho_minus {
            return Err(Error::InvalidParams(format!(
                "need 0 <= rho_plus <= rho_minus, got {} and {}",
                self.rho_plus, self.rho_minus
            )));
        }
        if self.d_plus <= 0.0 || self.d_minus <= 0.0 {
            return Err(Error::InvalidParams("layer depths must be positive".into()));
        }
        if self.sigma <= 0.0 || self.g <= 0.0 {
            return Err(Error::InvalidParams("sigma and g must be positive".into()));
        }
        if self.c == 0.0 {
            return Err(Error::InvalidParams("wave speed must be nonzero".into()));
        }
        Ok(())
    }

    pub fn with_speed(&self, c: f64) -> Self {
        Self { c, ..*self }
    }

    /// `⟦ρ⟧ = ρ₊ − ρ₋`.
    pub fn density_jump(&self) -> f64 {
        self.rho_plus - self.rho_minus
    }

    /// Factor `c²ρ₋/d₊` converting dimensionless symbols to dimensional ones.
    pub fn symbol_scale(&self) -> f64 {
        self.c * self.c * self.rho_minus / self.d_plus
    }

    pub fn nondimensionalize(&self) -> Result<NonDimParams> {
        self.validate()?;
        Ok(self.nondimensionalize_unchecked())
    }

    pub(crate) fn nondimensionalize_unchecked(&self) -> NonDimParams {
        let c2 = self.c * self.c;
        let beta = self.sigma / (self.d_plus * self.rho_minus * c2);
        let lambda = -self.g * self.density_jump() * self.d_plus / (self.rho_minus * c2);
        NonDimParams::build(beta, lambda, self.rho_plus / self.rho_minus, self.d_minus / self.d_plus)
    }

    /// Physical configuration realizing `nd` for the given `ρ₋`, `d₊` and `c`.
    pub fn from_nondim(nd: &NonDimParams, rho_minus: f64, d_plus: f64, c: f64) -> Result<Self> {
        let rho_plus = nd.varrho * rho_minus;
        let jump = rho_plus - rho_minus;
        if jump == 0.0 {
            return Err(Error::InvalidParams("equal densities leave g undetermined".into()));
        }
        let p = Self {
            rho_plus,
            rho_minus,
            d_plus,
            d_minus: nd.h * d_plus,
            sigma: nd.beta * d_plus * rho_minus * c * c,
            g: -nd.lambda * rho_minus * c * c / (jump * d_plus),
            c,
        };
        p.validate()?;
        Ok(p)
    }
}

/// `(β₀, λ₀) = ((ϱ+h)/3, ϱ + 1/h)`, generic so that rational inputs stay exact.
pub fn critical_point<T: Num + Copy>(varrho: T, h: T) -> (T, T) {
    let three = T::one() + T::one() + T::one();
    ((varrho + h) / three, varrho + T::one() / h)
}

/// Quartic Taylor coefficient of the critical symbol, `(ϱ + h³)/45`.
pub fn gamma_quartic(varrho: f64, h: f64) -> f64 {
    (varrho + h * h * h) / 45.0
}

/// The constant `(ϱ + h)/45` as printed in the source derivation.
pub fn gamma_printed(varrho: f64, h: f64) -> f64 {
    (varrho + h) / 45.0
}

/// Which value of the quartic constant γ to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaChoice {
    #[default]
    Quartic,
    Printed,
}

/// Bond number, inverse square Froude number, density and depth ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonDimParams {
    pub beta: f64,
    pub lambda: f64,
    pub varrho: f64,
    pub h: f64,
    pub beta0: f64,
    pub lambda0: f64,
    pub gamma_printed: f64,
    pub gamma_quartic: f64,
}

impl NonDimParams {
    fn build(beta: f64, lambda: f64, varrho: f64, h: f64) -> Self {
        let (beta0, lambda0) = critical_point(varrho, h);
        Self {
            beta,
            lambda,
            varrho,
            h,
            beta0,
            lambda0,
            gamma_printed: gamma_printed(varrho, h),
            gamma_quartic: gamma_quartic(varrho, h),
        }
    }

    pub fn from_ratios(beta: f64, lambda: f64, varrho: f64, h: f64) -> Result<Self> {
        if ![beta, lambda, varrho, h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("non-finite ratio".into()));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !(0.0..=1.0).contains(&varrho) {
            return Err(Error::InvalidParams(format!("varrho must lie in [0, 1], got {varrho}")));
        }
        if h <= 0.0 {
            return Err(Error::InvalidParams(format!("h must be positive, got {h}")));
        }
        if varrho < 1.0 && lambda <= 0.0 {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self::build(beta, lambda, varrho, h))
    }

    /// Same ratios at the critical point.
    pub fn at_critical(&self) -> Self {
        Self { beta: self.beta0, lambda: self.lambda0, ..*self }
    }

    pub fn with_beta_lambda(&self, beta: f64, lambda: f64) -> Self {
        Self { beta, lambda, ..*self }
    }

    pub fn gamma(&self, choice: GammaChoice) -> f64 {
        match choice {
            GammaChoice::Quartic => self.gamma_quartic,
            GammaChoice::Printed => self.gamma_printed,
        }
    }

    /// Quadratic nonlinearity coefficient `ϱ − 1/h²`.
    pub fn quadratic_coefficient(&self) -> f64 {
        self.varrho - 1.0 / (self.h * self.h)
    }

    /// Cubic nonlinearity coefficient `ϱ + 1/h³`.
    pub fn cubic_coefficient(&self) -> f64 {
        self.varrho + 1.0 / (self.h * self.h * self.h)
    }

    /// Layer weights and depth ratios `(ϱ±, a±)` for the upper and lower layer.
    pub fn layers(&self) -> [(f64, f64); 2] {
        [(self.varrho, 1.0), (1.0, self.h)]
    }
}

/// Below this argument the bifurcation-curve kernels use their Taylor series.
/// The kernels lose digits to cancellation well before `x = 10⁻³`, so the
/// series (accurate to `x¹⁰`) takes over earlier than for `x coth x`.
const KERNEL_SERIES_SWITCH: f64 = 0.05;

/// `(x − sin x cos x)/(2x sin²x)`.
fn kernel_trig(x: f64) -> f64 {
    if x.abs() < KERNEL_SERIES_SWITCH {
        let x2 = x * x;
        1.0 / 3.0 + x2 * (2.0 / 45.0 + x2 * (2.0 / 315.0 + x2 * (4.0 / 4725.0 + x2 * 2.0 / 18711.0)))
    } else {
        let s = x.sin();
        (x - s * x.cos()) / (2.0 * x * s * s)
    }
}

/// `(sinh x cosh x − x)/(2x sinh²x)`, written to avoid overflow for large x.
fn kernel_hyp(x: f64) -> f64 {
    if x.abs() < KERNEL_SERIES_SWITCH {
        let x2 = x * x;
        1.0 / 3.0 + x2 * (-2.0 / 45.0 + x2 * (2.0 / 315.0 + x2 * (-4.0 / 4725.0 + x2 * 2.0 / 18711.0)))
    } else {
        let sh = x.sinh();
        (1.0 / x.tanh() - x / (sh * sh)) / (2.0 * x)
    }
}

/// `x cot(a x)` with the removable singularity filled in.
fn x_cot(a: f64, x: f64) -> f64 {
    let y = a * x;
    if y.abs() < crate::dispersion::SERIES_SWITCH {
        let y2 = y * y;
        (1.0 - y2 / 3.0 - y2 * y2 / 45.0 - 2.0 * y2 * y2 * y2 / 945.0) / a
    } else {
        x / y.tan()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    Gamma2,
    Gamma3,
}

/// First pole of the Γ₂ parameterization, `π / max(1, h)`.
pub fn gamma2_pole(nd: &NonDimParams) -> f64 {
    std::f64::consts::PI / nd.h.max(1.0)
}

/// Point `(β, λ)` on Γ₂ or Γ₃ at parameter `s ≥ 0`.
///
/// Γ₂ is the locus of double real roots `±s` of `q̃`; Γ₃ the locus of double
/// imaginary roots `±is`. Γ₂ is only defined on `[0, gamma2_pole)`.
pub fn bifurcation_curve(nd: &NonDimParams, which: Curve, s: f64) -> Result<(f64, f64)> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidParams(format!("curve parameter must be finite and nonnegative, got {s}")));
    }
    let layers = nd.layers();
    match which {
        Curve::Gamma2 => {
            if s >= gamma2_pole(nd) {
                return Err(Error::Singular(format!(
                    "Gamma2 parameter {s} at or beyond the first pole {}",
                    gamma2_pole(nd)
                )));
            }
            let beta: f64 = layers.iter().map(|&(w, a)| w * a * kernel_trig(a * s)).sum();
            let lambda = beta * s * s + layers.iter().map(|&(w, a)| w * x_cot(a, s)).sum::<f64>();
            Ok((beta, lambda))
        }
        Curve::Gamma3 => {
            let beta: f64 = layers.iter().map(|&(w, a)| w * a * kernel_hyp(a * s)).sum();
            let lambda =
                layers.iter().map(|&(w, a)| w * crate::dispersion::x_coth(a, s)).sum::<f64>() - beta * s * s;
            Ok((beta, lambda))
        }
    }
}

/// Γ₂ evaluated at a complex parameter; at `z = is` it reproduces Γ₃(s).
pub fn gamma2_complex(nd: &NonDimParams, z: Complex64) -> (Complex64, Complex64) {
    let mut beta = Complex64::new(0.0, 0.0);
    let mut cot_sum = Complex64::new(0.0, 0.0);
    for (w, a) in nd.layers() {
        let x = z * a;
        let s = x.sin();
        beta += w * a * (x - s * x.cos()) / (2.0 * x * s * s);
        cot_sum += w * z / x.tan();
    }
    (beta, beta * z * z + cot_sum)
}

/// β-value of a curve at the given λ, taking the first crossing from the
/// critical point. `None` when the curve does not reach that λ.
pub fn curve_beta_at_lambda(nd: &NonDimParams, which: Curve, lambda: f64) -> Option<f64> {
    if lambda < nd.lambda0 {
        return None;
    }
    if lambda == nd.lambda0 {
        return Some(nd.beta0);
    }
    let f = |s: f64| bifurcation_curve(nd, which, s).map(|(_, l)| l - lambda);
    let (smax, base_step) = match which {
        Curve::Gamma2 => (gamma2_pole(nd) * (1.0 - 1e-9), gamma2_pole(nd) / 4000.0),
        Curve::Gamma3 => (f64::INFINITY, 0.01 / nd.h.max(1.0)),
    };
    let mut s0 = 0.0;
    let mut f0 = f(s0).ok()?;
    loop {
        let step = base_step * (1.0 + s0 / 10.0);
        let s1 = (s0 + step).min(smax);
        let f1 = f(s1).ok()?;
        if !f1.is_finite() {
            return None;
        }
        if f0 <= 0.0 && f1 >= 0.0 {
            let (mut a, mut b) = (s0, s1);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m).ok()? < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 4.0 * f64::EPSILON * b {
                    break;
                }
            }
            return bifurcation_curve(nd, which, 0.5 * (a + b)).ok().map(|(beta, _)| beta);
        }
        if s1 >= smax || s1 > 1e7 {
            return None;
        }
        s0 = s1;
        f0 = f1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    Other,
}

/// Region label together with the distances that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub label: Region,
    /// `λ − λ₀`, the signed distance above Γ₁.
    pub dist_gamma1: f64,
    /// `β − β_Γ₂(λ)`, absent below Γ₁.
    pub dist_gamma2: Option<f64>,
    /// `β − β_Γ₃(λ)`, absent below Γ₁.
    pub dist_gamma3: Option<f64>,
    pub c_width: f64,
    pub in_c_tube: bool,
    pub in_a: bool,
    pub in_b: bool,
}

/// Default half-width of the Region-C tube around Γ₂, measured in β.
pub const DEFAULT_C_WIDTH: f64 = 0.02;

pub fn classify_region(nd: &NonDimParams, c_width: f64) -> RegionLabel {
    let dist_gamma1 = nd.lambda - nd.lambda0;
    let dist_gamma2 = curve_beta_at_lambda(nd, Curve::Gamma2, nd.lambda).map(|b| nd.beta - b);
    let dist_gamma3 = curve_beta_at_lambda(nd, Curve::Gamma3, nd.lambda).map(|b| nd.beta - b);
    let above = dist_gamma1 > 0.0;
    let in_c_tube = dist_gamma1 >= 0.0 && dist_gamma2.is_some_and(|d| d.abs() <= c_width);
    let in_a = above && dist_gamma2.is_some_and(|d| d > c_width);
    let in_b = above && dist_gamma3.is_some_and(|d| d > 0.0);
    let label = if in_c_tube {
        Region::C
    } else if in_a {
        Region::A
    } else if in_b {
        Region::B
    } else {
        Region::Other
    };
    RegionLabel { label, dist_gamma1, dist_gamma2, dist_gamma3, c_width, in_c_tube, in_a, in_b }
}

/// Dimensionless pair and small parameters along the ray of speeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedScaling {
    pub c: f64,
    pub beta_c: f64,
    pub lambda_c: f64,
    pub beta0: f64,
    pub lambda0: f64,
    pub gamma: f64,
    pub epsilon_a: Option<f64>,
    pub epsilon_c: Option<f64>,
    pub delta_c: Option<f64>,
    pub kappa_a: Option<f64>,
    pub kappa_c: Option<f64>,
}

impl SpeedScaling {
    fn subcritical(&self) -> Error {
        Error::Subcritical { lambda_c: self.lambda_c, lambda0: self.lambda0 }
    }

    pub fn require_epsilon_a(&self) -> Result<f64> {
        self.epsilon_a.ok_or_else(|| self.subcritical())
    }

    pub fn require_epsilon_c(&self) -> Result<f64> {
        self.epsilon_c.ok_or_else(|| self.subcritical())
    }

    pub fn require_delta_c(&self) -> Result<f64> {
        self.delta_c.ok_or_else(|| self.subcritical())
    }

    pub fn require_kappa_a(&self) -> Result<f64> {
        self.kappa_a.ok_or_else(|| self.subcritical())
    }
}

pub fn speed_to_scaling(base: &PhysicalParams, c: f64) -> Result<SpeedScaling> {
    speed_to_scaling_with(base, c, GammaChoice::default())
}

pub fn speed_to_scaling_with(base: &PhysicalParams, c: f64, choice: GammaChoice) -> Result<SpeedScaling> {
    let nd = base.with_speed(c).nondimensionalize()?;
    let gamma = nd.gamma(choice);
    let excess = nd.lambda - nd.lambda0;
    let q = nd.quadratic_coefficient();
    let (epsilon_a, epsilon_c) = if excess >= 0.0 {
        (Some(excess.sqrt()), Some((excess / gamma).powf(0.25)))
    } else {
        (None, None)
    };
    let positive = |e: Option<f64>| e.filter(|&v| v > 0.0);
    let delta_c = positive(epsilon_c).map(|e| (nd.beta - nd.beta0) / (2.0 * gamma * e * e) - 1.0);
    let kappa_a = positive(epsilon_a).map(|e| q / e);
    let kappa_c = positive(epsilon_c).map(|e| q / (e * e));
    Ok(SpeedScaling {
        c,
        beta_c: nd.beta,
        lambda_c: nd.lambda,
        beta0: nd.beta0,
        lambda0: nd.lambda0,
        gamma,
        epsilon_a,
        epsilon_c,
        delta_c,
        kappa_a,
        kappa_c,
    })
}

/// Speed at which `λ_c = λ₀ + excess`, with the sign of `base.c`.
pub fn speed_for_lambda_excess(base: &PhysicalParams, excess: f64) -> Result<f64> {
    base.validate()?;
    let nd = base.nondimensionalize_unchecked();
    let target = nd.lambda0 + excess;
    if target <= 0.0 {
        return Err(Error::InvalidParams(format!("target lambda {target} is not positive")));
    }
    // λ scales like 1/c², so λ_c = λ_base (c_base/c)².
    Ok(base.c * (nd.lambda / target).sqrt())
}
