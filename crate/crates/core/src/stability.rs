//! Energy and momentum functionals, the kinematic substitution `ψ*`, the
//! moment of instability `d(c)` through its derivative `d′(c)`, and the
//! stability verdicts for uniform flows and for Regions A and C.
//!
//! Every verdict follows a three-sigma rule: a sign is only reported when
//! the statistic backing it exceeds three times its estimated error.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dispersion::cont_spec_edge;
use crate::dno::{check_amplitude, kinetic_gradient, Backend, DnOperators};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridProfile};
use crate::params::{classify_region, speed_for_lambda_excess, speed_to_scaling, PhysicalParams, DEFAULT_C_WIDTH};
use crate::profiles::{closed_profile, kawahara_default_grid, kawahara_solve, ProfileSpec};
use crate::spectra::ASYMPTOTIC_GATE;

/// Multiple of the error estimate a sign statistic must exceed.
pub const THREE_SIGMA: f64 = 3.0;

/// Grid points per unit length used for Region-A quadrature, at least.
const QUADRATURE_HALF_PERIOD: f64 = 40.0;
const QUADRATURE_MIN_N: usize = 4096;
const QUADRATURE_MAX_N: usize = 1 << 20;

/// Bound-state families along which the moment of instability is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    AKdv,
    AGardnerPlus,
    AGardnerMinus,
    CKawahara,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::AKdv, Family::AGardnerPlus, Family::AGardnerMinus, Family::CKawahara];

    /// Power `m` in the amplitude scaling `η ~ ε^m`.
    pub fn amplitude_exponent(self) -> i32 {
        match self {
            Family::AKdv => 2,
            Family::AGardnerPlus | Family::AGardnerMinus => 1,
            Family::CKawahara => 4,
        }
    }

    pub fn is_region_c(self) -> bool {
        self == Family::CKawahara
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::AKdv => "a-kdv",
            Family::AGardnerPlus => "a-gardner-plus",
            Family::AGardnerMinus => "a-gardner-minus",
            Family::CKawahara => "c-kawahara",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown family '{s}'")))
    }
}

/// `ψ* = −c A(η)⁻¹η′`, the minimizer of the kinetic part of `E − cP` at fixed `η`.
pub fn psistar(eta: &GridProfile, c: f64, p: &PhysicalParams, backend: Backend) -> Result<GridProfile> {
    let ops = DnOperators::new(eta, p, backend)?;
    psistar_with(&ops, c)
}

fn psistar_with(ops: &DnOperators, c: f64) -> Result<GridProfile> {
    let slope = ops.eta_slope.clone();
    let values = ops.a_inv_projected(&slope)?.into_iter().map(|v| -c * v).collect();
    Ok(ops.eta.with_values(values))
}

/// Kinetic energy `K`, potential energy `V`, total energy `E = K + V` and
/// momentum `P` of an interface state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFunctionals {
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    pub momentum: f64,
}

/// `K = ½∫ψA(η)ψ`, `V = −½g⟦ρ⟧∫η² + σ∫(⟨η′⟩ − 1)`, `P = −∫η′ψ`.
pub fn functionals(eta: &GridProfile, psi: &GridProfile, p: &PhysicalParams, backend: Backend) -> Result<StateFunctionals> {
    same_grid(eta, psi)?;
    let ops = DnOperators::new(eta, p, backend)?;
    let a_psi = ops.a(&psi.values)?;
    let kinetic = 0.5 * ops.integrate_product(&psi.values, &a_psi);
    let potential = potential_energy(&ops);
    let momentum = -ops.integrate_product(&ops.eta_slope, &psi.values);
    Ok(StateFunctionals { kinetic, potential, energy: kinetic + potential, momentum })
}

fn potential_energy(ops: &DnOperators) -> f64 {
    let p = &ops.params;
    let dx = ops.grid().dx();
    let gravity = -0.5 * p.g * p.density_jump() * ops.integrate_product(&ops.eta.values, &ops.eta.values);
    // √(1+s²) − 1 = s²/(√(1+s²) + 1) avoids cancellation for small slopes.
    let surface: f64 = ops.eta_slope.iter().map(|s| s * s / ((1.0 + s * s).sqrt() + 1.0)).sum();
    gravity + p.sigma * dx * surface
}

fn same_grid(a: &GridProfile, b: &GridProfile) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::InvalidGrid(format!("mismatched grids {:?} and {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// Discrete L² norms of the traveling-wave equations `E′ − cP′ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyResidual {
    /// `‖E′_η − cψ′‖`.
    pub res_eta: f64,
    /// `‖A(η)ψ + cη′‖`.
    pub res_psi: f64,
    /// `‖η‖ + ‖ψ‖`, for relative comparisons.
    pub state_norm: f64,
}

/// `E′_η = ½Σρ±(a₁±θ±′ + a₂±A(η)ψ) − g⟦ρ⟧η − σ(η′/⟨η′⟩)′`, `P′_η = ψ′`,
/// `E′_ψ = A(η)ψ`, `P′_ψ = −η′`.
pub fn steady_residual(
    eta: &GridProfile,
    psi: &GridProfile,
    c: f64,
    p: &PhysicalParams,
    backend: Backend,
) -> Result<SteadyResidual> {
    same_grid(eta, psi)?;
    let ops = DnOperators::new(eta, p, backend)?;
    steady_residual_with(&ops, psi, c)
}

fn steady_residual_with(ops: &DnOperators, psi: &GridProfile, c: f64) -> Result<SteadyResidual> {
    let p = &ops.params;
    let (kinetic, a_psi) = kinetic_gradient(ops, &psi.values)?;
    let curvature_flux: Vec<f64> = ops.eta_slope.iter().map(|s| s / (1.0 + s * s).sqrt()).collect();
    let curvature = ops.derivative(&curvature_flux);
    let dpsi = ops.derivative(&psi.values);
    let jump = p.density_jump();
    let grid = ops.grid();
    let res_eta: Vec<f64> = (0..grid.n)
        .map(|j| kinetic[j] - p.g * jump * ops.eta.values[j] - p.sigma * curvature[j] - c * dpsi[j])
        .collect();
    let res_psi: Vec<f64> = (0..grid.n).map(|j| a_psi[j] + c * ops.eta_slope[j]).collect();
    let norm = |v: &[f64]| (grid.dx() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    Ok(SteadyResidual {
        res_eta: norm(&res_eta),
        res_psi: norm(&res_psi),
        state_norm: norm(&ops.eta.values) + norm(&psi.values),
    })
}

/// Profile data entering `d′(c)` at one speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprimeSample {
    pub c: f64,
    pub family: Family,
    /// `ε_A` for Region A, `ε_C` for Region C.
    pub epsilon: f64,
    /// `√(β_c − β₀)` (Region A) or `γ` (Region C).
    pub width_or_gamma: f64,
    /// Region A: `∫η̃²` of the profile as the family defines it (KdV at
    /// width `√(β_c−β₀)`, Gardner at unit width). Region C: `∫Z²_{δ_c}`.
    pub integral: f64,
    pub integral_error: f64,
    /// Region A: `∫η̃²` of the unit-width profile.
    pub unit_width_integral: f64,
    pub dprime: f64,
    /// `d′` with the unit-width integral, which is what `−P(U_c)` reproduces.
    pub dprime_consistent: f64,
    /// Region A: `d′`. Region C: `sign(c)∫Z²_{δ_c}`.
    pub statistic: f64,
    pub statistic_error: f64,
}

fn layer_weight(p: &PhysicalParams) -> f64 {
    p.rho_plus + p.rho_minus * p.d_plus / p.d_minus
}

fn check_gate(epsilon: f64) -> Result<()> {
    if epsilon > ASYMPTOTIC_GATE {
        return Err(Error::InvalidParams(format!(
            "epsilon = {epsilon} lies outside the asymptotic gate {ASYMPTOTIC_GATE}"
        )));
    }
    Ok(())
}

/// `∫f²` by the trapezoid rule with an error estimate from halving `n`.
fn squared_integral(spec: &ProfileSpec, half_period: f64, n: usize) -> Result<(f64, f64)> {
    let fine = closed_profile(spec, Grid::new(half_period, n)?)?;
    let coarse = closed_profile(spec, Grid::new(half_period, n / 2)?)?;
    let i_fine = fine.dot(&fine);
    let i_coarse = coarse.dot(&coarse);
    Ok((i_fine, (i_fine - i_coarse).abs() + 64.0 * f64::EPSILON * i_fine))
}

fn quadrature_points(half_period: f64, dx: f64) -> usize {
    ((2.0 * half_period / dx).ceil() as usize).next_power_of_two().clamp(QUADRATURE_MIN_N, QUADRATURE_MAX_N)
}

/// Core width of the Gardner soliton `2/(κ ± √(κ²+4A)cosh x)`.
fn gardner_core_width(kappa: f64, cubic: f64, elevation: bool) -> f64 {
    let p = 0.5 * kappa.abs();
    let q = (p * p + cubic).sqrt();
    // Depression with κ > 0 (or elevation with κ < 0) sharpens as |κ| grows.
    let sharpening = (elevation && kappa < 0.0) || (!elevation && kappa > 0.0);
    if sharpening {
        (2.0 * cubic / (q * (q + p))).sqrt().min(1.0)
    } else {
        1.0
    }
}

/// `d′(c)` and its ingredients along one family.
pub fn dprime_sample(c: f64, family: Family, base: &PhysicalParams) -> Result<DprimeSample> {
    base.validate()?;
    let scaling = speed_to_scaling(base, c)?;
    let nd = base.with_speed(c).nondimensionalize()?;
    let weight = layer_weight(base);
    let d2 = base.d_plus * base.d_plus;
    if family.is_region_c() {
        let epsilon = scaling.require_epsilon_c()?;
        check_gate(epsilon)?;
        let delta = scaling.require_delta_c()?;
        let gamma = scaling.gamma;
        let grid = kawahara_default_grid(delta)?;
        let coarse = kawahara_solve(delta, Some(grid))?.profile;
        let fine = kawahara_solve(delta, Some(grid.refined()))?.profile;
        let integral = fine.dot(&fine);
        let integral_error = (integral - coarse.dot(&coarse)).abs() + 1e-9 * integral;
        let prefactor = -c * epsilon.powi(7) * d2 * gamma * weight;
        let dprime = prefactor * integral;
        return Ok(DprimeSample {
            c,
            family,
            epsilon,
            width_or_gamma: gamma,
            integral,
            integral_error,
            unit_width_integral: integral,
            dprime,
            dprime_consistent: dprime,
            statistic: c.signum() * integral,
            statistic_error: integral_error,
        });
    }
    let epsilon = scaling.require_epsilon_a()?;
    if epsilon == 0.0 {
        return Err(Error::Subcritical { lambda_c: scaling.lambda_c, lambda0: scaling.lambda0 });
    }
    check_gate(epsilon)?;
    let width_sq = scaling.beta_c - scaling.beta0;
    if width_sq <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "Region A needs beta_c > beta0, got {} <= {}",
            scaling.beta_c, scaling.beta0
        )));
    }
    let width = width_sq.sqrt();
    let (integral, integral_error, unit_width_integral) = match family {
        Family::AKdv => {
            let spec = ProfileSpec::kdv(nd.varrho, nd.h, scaling.beta_c);
            let half = QUADRATURE_HALF_PERIOD * width;
            let (i, e) = squared_integral(&spec, half, quadrature_points(half, width / 50.0))?;
            (i, e, i / width)
        }
        _ => {
            let elevation = family == Family::AGardnerPlus;
            let kappa = scaling.require_kappa_a()?;
            let spec = ProfileSpec::gardner_for(elevation, nd.varrho, nd.h, kappa, None);
            let core = gardner_core_width(kappa, spec.gardner_cubic(), elevation);
            let (i, e) = squared_integral(&spec, QUADRATURE_HALF_PERIOD, quadrature_points(QUADRATURE_HALF_PERIOD, core / 16.0))?;
            (i, e, i)
        }
    };
    let prefactor = -c * epsilon.powi(2 * family.amplitude_exponent() - 1) * d2 * width * weight;
    let dprime = prefactor * integral;
    let dprime_error = prefactor.abs() * integral_error;
    Ok(DprimeSample {
        c,
        family,
        epsilon,
        width_or_gamma: width,
        integral,
        integral_error,
        unit_width_integral,
        dprime,
        dprime_consistent: prefactor * unit_width_integral,
        statistic: dprime,
        statistic_error: dprime_error,
    })
}

/// Leading-order `d′(c)`.
///
/// Region A: `−c ε^{2m−1} d₊² √(β_c−β₀) Σρ±(d₊/d±) ∫η̃²`, where the KdV
/// integral is taken over the width-`√(β_c−β₀)` profile and the Gardner
/// integral over the unit-width profile. Region C:
/// `−c ε⁷ d₊² γ Σρ±(d₊/d±) ∫Z²_{δ_c}`.
pub fn dprime_leading(c: f64, family: Family, base: &PhysicalParams) -> Result<f64> {
    Ok(dprime_sample(c, family, base)?.dprime)
}

/// Leading-order `d′(c)` with every Region-A integral taken over the
/// unit-width profile, so that the width factor appears once.
pub fn dprime_leading_consistent(c: f64, family: Family, base: &PhysicalParams) -> Result<f64> {
    Ok(dprime_sample(c, family, base)?.dprime_consistent)
}

/// `∫(η̃^A±)²` for `η̃ = 2/(κ ± √(κ²+4A) cosh x)` three ways.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GardnerMomentum {
    pub kappa: f64,
    pub cubic: f64,
    pub elevation: bool,
    /// Trapezoid quadrature of the profile; the reference value.
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// Antiderivative of `∫dx/(a + q cosh x)²`.
    pub closed_form: f64,
    /// `κ·atan((κ+√(κ²+4C))/(4C))/(2C^{3/2}) − 1/(2C)` with `C = A`, the
    /// printed expression for the depression branch.
    pub printed: f64,
    /// `printed − quadrature`.
    pub difference: f64,
    /// Set when the printed expression is negative although the integral is not.
    pub printed_negative: bool,
}

/// `∫dx/(a + q cosh x)² = 2/s² − (2a/s³)(π/2 − atan(a/s))`, `s = √(q²−a²)`.
pub fn sech_type_square_integral(a: f64, q: f64) -> Result<f64> {
    let s2 = q * q - a * a;
    if !(s2 > 0.0) {
        return Err(Error::InvalidParams(format!("need |a| < q, got a = {a}, q = {q}")));
    }
    let s = s2.sqrt();
    Ok(2.0 / s2 - 2.0 * a / (s2 * s) * (FRAC_PI_2 - (a / s).atan()))
}

/// The printed arctan expression for the depression integral.
pub fn printed_gardner_integral(kappa: f64, constant: f64) -> f64 {
    let root = (kappa * kappa + 4.0 * constant).sqrt();
    kappa * ((kappa + root) / (4.0 * constant)).atan() / (2.0 * constant.powf(1.5)) - 1.0 / (2.0 * constant)
}

pub fn gardner_momentum_closed_form(kappa: f64, cubic: f64, elevation: bool) -> Result<GardnerMomentum> {
    if !(cubic > 0.0 && cubic.is_finite() && kappa.is_finite()) {
        return Err(Error::InvalidParams(format!("need A > 0 and finite kappa, got A = {cubic}, kappa = {kappa}")));
    }
    let spec = ProfileSpec::gardner(elevation, kappa, cubic);
    let core = gardner_core_width(kappa, cubic, elevation);
    let (quadrature, quadrature_error) =
        squared_integral(&spec, QUADRATURE_HALF_PERIOD, quadrature_points(QUADRATURE_HALF_PERIOD, core / 16.0))?;
    // 2/(κ ± 2q cosh x) = ±1/(q cosh x ± κ/2).
    let p = 0.5 * kappa;
    let q = (p * p + cubic).sqrt();
    let a = if elevation { p } else { -p };
    let closed_form = sech_type_square_integral(a, q)?;
    let printed = printed_gardner_integral(kappa, cubic);
    Ok(GardnerMomentum {
        kappa,
        cubic,
        elevation,
        quadrature,
        quadrature_error,
        closed_form,
        printed,
        difference: printed - quadrature,
        printed_negative: printed < 0.0,
    })
}

/// Whether sampled values rise, fall, or neither.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Yes,
    No,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub c: f64,
    pub dprime: f64,
    pub epsilon: f64,
    pub statistic: f64,
    pub statistic_error: f64,
}

/// Sampled `d′(c)`; `monotone_increasing` is `Yes` for strictly increasing
/// samples, `No` for strictly decreasing ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub family: Family,
    pub samples: Vec<MomentPoint>,
    pub monotone_increasing: Monotonicity,
    /// Sign of `d′(c*+dc) − d′(c*−dc)`, i.e. of the centered estimate of `d′′(c*)`.
    pub second_difference_sign: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conclusion {
    ConditionallyStable,
    Unstable,
    Inconclusive,
}

/// Numbers behind a verdict. `sign_statistic` and `error` are the pair the
/// three-sigma rule was applied to; `details` holds the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub sign_statistic: f64,
    pub error: f64,
    pub details: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub conclusion: Conclusion,
    pub criterion: String,
    pub evidence: Evidence,
}

impl Verdict {
    /// A definite conclusion must rest on a statistic beyond three sigma.
    pub fn is_well_founded(&self) -> bool {
        self.conclusion == Conclusion::Inconclusive
            || self.evidence.sign_statistic.abs() > THREE_SIGMA * self.evidence.error
    }
}

fn map_samples<T: Send>(cs: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cs.par_iter().map(|&c| f(c)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cs.iter().map(|&c| f(c)).collect()
    }
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sample `d′` on `c* + k·dc`, `k = −n..=n`, and apply the monotonicity test.
///
/// Region A can only be judged stable; Region C uses `sign(c)∫Z²_{δ_c}` and
/// can also be judged unstable.
pub fn region_verdict(
    c_star: f64,
    family: Family,
    base: &PhysicalParams,
    dc: f64,
    n: usize,
) -> Result<(Verdict, MomentCurve)> {
    if !(dc > 0.0 && dc.is_finite()) || n == 0 {
        return Err(Error::InvalidParams(format!("need dc > 0 and n >= 1, got dc = {dc}, n = {n}")));
    }
    let speeds: Vec<f64> = (-(n as i64)..=n as i64).map(|k| c_star + k as f64 * dc).collect();
    let samples = map_samples(&speeds, |c| dprime_sample(c, family, base))?;
    let points: Vec<MomentPoint> = samples
        .iter()
        .map(|s| MomentPoint {
            c: s.c,
            dprime: s.dprime,
            epsilon: s.epsilon,
            statistic: s.statistic,
            statistic_error: s.statistic_error,
        })
        .collect();

    let raw: Vec<f64> = points.windows(2).map(|w| w[1].dprime - w[0].dprime).collect();
    let monotone_increasing = if raw.iter().all(|&d| d > 0.0) {
        Monotonicity::Yes
    } else if raw.iter().all(|&d| d < 0.0) {
        Monotonicity::No
    } else {
        Monotonicity::Mixed
    };
    let second_difference_sign = sign_of(points[n + 1].dprime - points[n - 1].dprime);

    // Forward differences of the statistic against their error bars; the
    // worst-resolved one decides.
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    let (mut all_up, mut all_down) = (true, true);
    for w in points.windows(2) {
        let diff = w[1].statistic - w[0].statistic;
        let err = w[0].statistic_error + w[1].statistic_error;
        all_up &= diff > THREE_SIGMA * err;
        all_down &= diff < -THREE_SIGMA * err;
        let ratio = diff.abs() / err.max(f64::MIN_POSITIVE);
        if ratio < worst.0 {
            worst = (ratio, diff, err);
        }
    }
    let conclusion = if all_up {
        Conclusion::ConditionallyStable
    } else if all_down && family.is_region_c() {
        Conclusion::Unstable
    } else {
        Conclusion::Inconclusive
    };
    let criterion = if family.is_region_c() {
        "monotonicity of sign(c) * int Z_delta^2 in c"
    } else {
        "strictly increasing d'(c) across c*"
    };
    let mut details = BTreeMap::new();
    details.insert("c_star".into(), c_star);
    details.insert("dc".into(), dc);
    details.insert("samples".into(), points.len() as f64);
    details.insert("worst_sigma_ratio".into(), worst.0);
    details.insert("dprime_at_c_star".into(), points[n].dprime);
    details.insert("epsilon_at_c_star".into(), points[n].epsilon);
    details.insert("min_difference".into(), raw.iter().copied().fold(f64::INFINITY, f64::min));
    details.insert("max_difference".into(), raw.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let verdict = Verdict {
        conclusion,
        criterion: criterion.into(),
        evidence: Evidence { sign_statistic: worst.1, error: worst.2, details },
    };
    let curve = MomentCurve { family, samples: points, monotone_increasing, second_difference_sign };
    Ok((verdict, curve))
}

/// Uniform flow: conditionally stable when the symbol minimum is positive
/// beyond three sigma. Membership of Region B is reported alongside.
pub fn trivial_flow_verdict(p: &PhysicalParams) -> Result<Verdict> {
    let nd = p.nondimensionalize()?;
    let edge = cont_spec_edge(p);
    let label = classify_region(&nd, DEFAULT_C_WIDTH);
    let positive = edge.nu_star_dimless > THREE_SIGMA * edge.numerical_error;
    let conclusion = if positive { Conclusion::ConditionallyStable } else { Conclusion::Inconclusive };
    let mut details = BTreeMap::new();
    details.insert("beta".into(), nd.beta);
    details.insert("lambda".into(), nd.lambda);
    details.insert("nu_star_dimless".into(), edge.nu_star_dimless);
    details.insert("nu_star_dimensional".into(), edge.nu_star_dimensional);
    details.insert("argmin_xi".into(), edge.argmin_xi);
    details.insert("in_region_b".into(), if label.in_b { 1.0 } else { 0.0 });
    Ok(Verdict {
        conclusion,
        criterion: "positive symbol minimum (uniform flow)".into(),
        evidence: Evidence { sign_statistic: edge.nu_star_dimless, error: edge.numerical_error, details },
    })
}

/// Leading-order Region-A wave in physical variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeadingOrderWave {
    pub family: Family,
    pub params: PhysicalParams,
    pub epsilon: f64,
    pub eta: GridProfile,
    pub psi: GridProfile,
}

/// Grid for a Region-A wave: 25 decay lengths `d₊√(β_c−β₀)/ε` on each side
/// and spacing at most a quarter of `d₊`, or finer for narrow Gardner cores.
pub fn leading_order_grid(c: f64, family: Family, base: &PhysicalParams) -> Result<Grid> {
    let scaling = speed_to_scaling(base, c)?;
    let epsilon = scaling.require_epsilon_a()?;
    let width = (scaling.beta_c - scaling.beta0).max(0.0).sqrt();
    if epsilon == 0.0 || width == 0.0 {
        return Err(Error::InvalidParams("leading-order wave needs epsilon > 0 and beta_c > beta0".into()));
    }
    let decay = base.d_plus * width / epsilon;
    let core = match family {
        Family::AKdv => decay,
        _ => {
            let nd = base.with_speed(c).nondimensionalize()?;
            let kappa = scaling.require_kappa_a()?;
            decay * gardner_core_width(kappa, nd.varrho + 1.0 / nd.h.powi(3), family == Family::AGardnerPlus)
        }
    };
    let half = 25.0 * decay;
    let dx = (0.25 * base.d_plus).min(core / 8.0);
    Grid::new(half, ((2.0 * half / dx).ceil() as usize).next_power_of_two())
}

/// `η(x) = ε^m d₊ η̃(εx/d₊)` with the family's closed-form profile and
/// `ψ = ψ*(η)`.
pub fn leading_order_wave(
    c: f64,
    family: Family,
    base: &PhysicalParams,
    backend: Backend,
    grid: Option<Grid>,
) -> Result<LeadingOrderWave> {
    if family.is_region_c() {
        return Err(Error::InvalidParams("leading-order waves are built for Region A families".into()));
    }
    let params = base.with_speed(c);
    let scaling = speed_to_scaling(base, c)?;
    let epsilon = scaling.require_epsilon_a()?;
    let nd = params.nondimensionalize()?;
    let grid = match grid {
        Some(g) => g,
        None => leading_order_grid(c, family, base)?,
    };
    let spec = match family {
        Family::AKdv => ProfileSpec::kdv(nd.varrho, nd.h, scaling.beta_c),
        _ => ProfileSpec::gardner_for(
            family == Family::AGardnerPlus,
            nd.varrho,
            nd.h,
            scaling.require_kappa_a()?,
            Some(scaling.beta_c),
        ),
    };
    // Sampling the profile on the stretched grid puts y_j = εx_j/d₊ exactly.
    let stretched = Grid::new(epsilon * grid.half_period / base.d_plus, grid.n)?;
    let amplitude = epsilon.powi(family.amplitude_exponent()) * base.d_plus;
    let eta = GridProfile::new(grid, closed_profile(&spec, stretched)?.scale(amplitude).values)?;
    check_amplitude(&eta, &params)?;
    let psi = psistar(&eta, c, &params, backend)?;
    Ok(LeadingOrderWave { family, params, epsilon, eta, psi })
}

/// Leading-order wave at `ε_A = epsilon` for the base fluid pair.
pub fn leading_order_wave_at_epsilon(
    epsilon: f64,
    family: Family,
    base: &PhysicalParams,
    backend: Backend,
) -> Result<LeadingOrderWave> {
    let c = speed_for_lambda_excess(base, epsilon * epsilon)?;
    leading_order_wave(c, family, base, backend, None)
}

/// `E′ − cP′` residual of a leading-order wave.
pub fn wave_residual(wave: &LeadingOrderWave, backend: Backend) -> Result<SteadyResidual> {
    steady_residual(&wave.eta, &wave.psi, wave.params.c, &wave.params, backend)
}

/// Momentum of the assembled leading-order wave against the `d′` formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumCheck {
    pub c: f64,
    pub epsilon: f64,
    /// `−P` on the periodic grid.
    pub minus_momentum_periodic: f64,
    /// `−P` with the zero Fourier mode restored at its long-wave limit.
    pub minus_momentum: f64,
    pub dprime: f64,
    pub dprime_consistent: f64,
    pub relative_error: f64,
    pub relative_error_consistent: f64,
}

/// Zero-mode part of `c∫η′A(η)⁻¹η′` that a periodic grid drops.
///
/// `ξ²·A⁻¹(ξ) → ρ₊/d₊ + ρ₋/d₋` as `ξ → 0`, so the missing term is
/// `c(ρ₊/d₊ + ρ₋/d₋)(∫η)²/(2L)`. It decays only like `1/L` because `ψ*`
/// of a solitary wave has different limits at `±∞`.
pub fn momentum_zero_mode(eta: &GridProfile, c: f64, p: &PhysicalParams) -> f64 {
    let mass = eta.integral();
    c * (p.rho_plus / p.d_plus + p.rho_minus / p.d_minus) * mass * mass / (2.0 * eta.grid.half_period)
}

pub fn momentum_consistency(c: f64, family: Family, base: &PhysicalParams, backend: Backend) -> Result<MomentumCheck> {
    let wave = leading_order_wave(c, family, base, backend, None)?;
    let f = functionals(&wave.eta, &wave.psi, &wave.params, backend)?;
    let sample = dprime_sample(c, family, base)?;
    let minus_momentum_periodic = -f.momentum;
    let minus_momentum = minus_momentum_periodic - momentum_zero_mode(&wave.eta, c, &wave.params);
    let rel = |v: f64| (minus_momentum - v).abs() / v.abs();
    Ok(MomentumCheck {
        c,
        epsilon: wave.epsilon,
        minus_momentum_periodic,
        minus_momentum,
        dprime: sample.dprime,
        dprime_consistent: sample.dprime_consistent,
        relative_error: rel(sample.dprime),
        relative_error_consistent: rel(sample.dprime_consistent),
    })
}
