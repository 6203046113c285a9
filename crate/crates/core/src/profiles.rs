//! Solitary-wave profiles: closed-form KdV and Gardner solitons, the explicit
//! Kawahara solution, and a Newton/continuation solver for the primary
//! homoclinic orbits of the fourth-order steady equations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridProfile, Parity, Spectral};
use crate::params::{critical_point, gamma_quartic};

/// The detuning at which `(35/24) sech⁴(√6 x / 12)` solves
/// `Z'''' − 2(1+δ)Z'' + Z − Z² = 0` exactly.
pub const KAWAHARA_EXPLICIT_DELTA: f64 = 1.0 / 12.0;
/// The detuning quoted alongside the explicit formula in the literature.
pub const KAWAHARA_PRINTED_DELTA: f64 = 1.0 / 6.0;
/// Largest continuation step in `δ`.
pub const CONTINUATION_STEP: f64 = 0.05;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Kdv,
    GardnerElevation,
    GardnerDepression,
    KawaharaExplicit,
    KawaharaNumeric,
    CubicKawaharaNumeric,
}

impl ProfileKind {
    /// Exponent `m` in `η = ε^m d₊ S_ε η̃`.
    pub fn amplitude_exponent(self) -> i32 {
        match self {
            ProfileKind::Kdv | ProfileKind::CubicKawaharaNumeric => 2,
            ProfileKind::GardnerElevation | ProfileKind::GardnerDepression => 1,
            ProfileKind::KawaharaExplicit | ProfileKind::KawaharaNumeric => 4,
        }
    }

    pub fn is_closed_form(self) -> bool {
        !matches!(self, ProfileKind::KawaharaNumeric | ProfileKind::CubicKawaharaNumeric)
    }
}

/// A profile family together with the parameters it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub varrho: f64,
    pub h: f64,
    /// Bond number; sets the width `√(β−β₀)` of the Region-A profiles.
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    /// Gardner cubic coefficient `A`; defaults to `ϱ + 1/h³`.
    pub cubic: Option<f64>,
    pub epsilon: Option<f64>,
    /// Selects the negative homoclinic of the cubic Kawahara equation.
    pub negative_branch: bool,
}

impl ProfileSpec {
    fn base(kind: ProfileKind, varrho: f64, h: f64) -> Self {
        Self {
            kind,
            varrho,
            h,
            beta: None,
            kappa: None,
            delta: None,
            gamma: None,
            cubic: None,
            epsilon: None,
            negative_branch: false,
        }
    }

    pub fn kdv(varrho: f64, h: f64, beta: f64) -> Self {
        Self { beta: Some(beta), ..Self::base(ProfileKind::Kdv, varrho, h) }
    }

    /// Unit-width Gardner soliton with explicit cubic coefficient `A`.
    pub fn gardner(elevation: bool, kappa: f64, cubic: f64) -> Self {
        let kind = if elevation { ProfileKind::GardnerElevation } else { ProfileKind::GardnerDepression };
        Self { kappa: Some(kappa), cubic: Some(cubic), ..Self::base(kind, 0.5, 2.0) }
    }

    /// Gardner soliton for a fluid pair, `A = ϱ + 1/h³` unless overridden.
    pub fn gardner_for(elevation: bool, varrho: f64, h: f64, kappa: f64, beta: Option<f64>) -> Self {
        let kind = if elevation { ProfileKind::GardnerElevation } else { ProfileKind::GardnerDepression };
        Self { kappa: Some(kappa), beta, ..Self::base(kind, varrho, h) }
    }

    pub fn kawahara_explicit() -> Self {
        Self { delta: Some(KAWAHARA_EXPLICIT_DELTA), ..Self::base(ProfileKind::KawaharaExplicit, 0.5, 2.0) }
    }

    pub fn kawahara(delta: f64) -> Self {
        Self { delta: Some(delta), ..Self::base(ProfileKind::KawaharaNumeric, 0.5, 2.0) }
    }

    pub fn cubic_kawahara(delta: f64, kappa: f64, varrho: f64, h: f64, negative_branch: bool) -> Self {
        Self {
            delta: Some(delta),
            kappa: Some(kappa),
            negative_branch,
            ..Self::base(ProfileKind::CubicKawaharaNumeric, varrho, h)
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn amplitude_exponent(&self) -> i32 {
        self.kind.amplitude_exponent()
    }

    fn require(&self, value: Option<f64>, name: &str) -> Result<f64> {
        value.ok_or_else(|| Error::InvalidProfile(format!("{:?} needs {name}", self.kind)))
    }

    pub fn beta0(&self) -> f64 {
        critical_point(self.varrho, self.h).0
    }

    pub fn quadratic_coefficient(&self) -> f64 {
        self.varrho - 1.0 / (self.h * self.h)
    }

    pub fn gardner_cubic(&self) -> f64 {
        self.cubic.unwrap_or(self.varrho + 1.0 / self.h.powi(3))
    }

    pub fn gamma_value(&self) -> f64 {
        self.gamma.unwrap_or_else(|| gamma_quartic(self.varrho, self.h))
    }

    /// Spatial width of the Region-A profiles: `√(β−β₀)`, or 1 without `β`.
    pub fn width(&self) -> Result<f64> {
        match self.beta {
            None => Ok(1.0),
            Some(beta) => {
                let excess = beta - self.beta0();
                if excess > 0.0 {
                    Ok(excess.sqrt())
                } else {
                    Err(Error::InvalidProfile(format!("need beta > beta0 = {}, got {beta}", self.beta0())))
                }
            }
        }
    }

    /// Coefficients `(a, b)` of `Z'''' − 2(1+δ)Z'' + Z − aZ² − bZ³`.
    pub fn fourth_order_coefficients(&self) -> Result<(f64, f64)> {
        match self.kind {
            ProfileKind::KawaharaExplicit | ProfileKind::KawaharaNumeric => Ok((1.0, 0.0)),
            ProfileKind::CubicKawaharaNumeric => {
                let kappa = self.require(self.kappa, "kappa")?;
                let g = self.gamma_value();
                let a = 1.5 * g.powf(-1.5) * kappa;
                let b = 4.0 / (g * g)
                    * (self.varrho + 1.0 / self.h.powi(3) + 2.0 * (self.varrho - 1.0).powi(2) / (225.0 * g));
                Ok((a, b))
            }
            _ => Err(Error::InvalidProfile(format!("{:?} is not a fourth-order family", self.kind))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.varrho >= 0.0 && self.h > 0.0 && self.varrho.is_finite() && self.h.is_finite()) {
            return Err(Error::InvalidProfile(format!("need varrho >= 0, h > 0, got ({}, {})", self.varrho, self.h)));
        }
        match self.kind {
            ProfileKind::Kdv => {
                if self.quadratic_coefficient() == 0.0 {
                    return Err(Error::InvalidProfile("KdV needs varrho - 1/h^2 != 0".into()));
                }
                self.require(self.beta, "beta")?;
                self.width()?;
            }
            ProfileKind::GardnerElevation | ProfileKind::GardnerDepression => {
                self.require(self.kappa, "kappa")?;
                self.width()?;
                let a = self.gardner_cubic();
                if self.kind == ProfileKind::GardnerDepression && a <= 0.0 {
                    return Err(Error::InvalidProfile(format!(
                        "Gardner depression needs kappa^2 + 4A > kappa^2, got A = {a}"
                    )));
                }
                let kappa = self.kappa.unwrap_or(0.0);
                if kappa * kappa + 4.0 * a <= 0.0 {
                    return Err(Error::InvalidProfile("Gardner needs kappa^2 + 4A > 0".into()));
                }
            }
            ProfileKind::KawaharaExplicit => {}
            ProfileKind::KawaharaNumeric | ProfileKind::CubicKawaharaNumeric => {
                let delta = self.require(self.delta, "delta")?;
                if delta <= -2.0 {
                    return Err(Error::InvalidProfile(format!("need delta > -2, got {delta}")));
                }
                self.fourth_order_coefficients()?;
            }
        }
        Ok(())
    }
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `(35/24) sech⁴(√6 x / 12)`.
pub fn kawahara_explicit(x: f64) -> f64 {
    35.0 / 24.0 * sech(6f64.sqrt() * x / 12.0).powi(4)
}

/// `∫ (35/24)² sech⁸(√6 x/12) dx = 70/(3√6)`.
pub fn kawahara_explicit_mass() -> f64 {
    70.0 / (3.0 * 6f64.sqrt())
}

/// Evaluate a closed-form profile on the grid.
pub fn closed_profile(spec: &ProfileSpec, grid: Grid) -> Result<GridProfile> {
    spec.validate()?;
    match spec.kind {
        ProfileKind::Kdv => {
            let w = spec.width()?;
            let amp = 1.0 / spec.quadratic_coefficient();
            Ok(GridProfile::from_fn(grid, |x| amp * sech(x / (2.0 * w)).powi(2)))
        }
        ProfileKind::GardnerElevation | ProfileKind::GardnerDepression => {
            let w = spec.width()?;
            let kappa = spec.kappa.unwrap_or(0.0);
            let root = (kappa * kappa + 4.0 * spec.gardner_cubic()).sqrt();
            let sign = if spec.kind == ProfileKind::GardnerElevation { 1.0 } else { -1.0 };
            Ok(GridProfile::from_fn(grid, |x| 2.0 / (kappa + sign * root * (x / w).cosh())))
        }
        ProfileKind::KawaharaExplicit => Ok(GridProfile::from_fn(grid, kawahara_explicit)),
        _ => Err(Error::InvalidProfile(format!("{:?} has no closed form; use the homoclinic solver", spec.kind))),
    }
}

/// Closed form or numerical solve, whichever the kind calls for.
pub fn build_profile(spec: &ProfileSpec, grid: Grid) -> Result<GridProfile> {
    spec.validate()?;
    match spec.kind {
        ProfileKind::KawaharaNumeric => Ok(kawahara_solve(spec.delta.unwrap_or_default(), Some(grid))?.profile),
        ProfileKind::CubicKawaharaNumeric => Ok(cubic_kawahara_solve(spec, Some(grid))?.profile),
        _ => closed_profile(spec, grid),
    }
}

/// Dimensional interface `η(X) = ε^m d₊ η̃(εX/d₊)` on the given grid, with
/// the Region-C families carrying the extra factor `√γ`.
pub fn dimensional_profile(spec: &ProfileSpec, scaled: &GridProfile, epsilon: f64, d_plus: f64, grid: Grid) -> Result<GridProfile> {
    if !(epsilon > 0.0 && d_plus > 0.0) {
        return Err(Error::InvalidProfile(format!("need epsilon, d_plus > 0, got ({epsilon}, {d_plus})")));
    }
    let amplitude = epsilon.powi(spec.amplitude_exponent()) * d_plus;
    let amplitude = match spec.kind {
        ProfileKind::KawaharaExplicit | ProfileKind::KawaharaNumeric | ProfileKind::CubicKawaharaNumeric => {
            amplitude * spec.gamma_value().sqrt()
        }
        _ => amplitude,
    };
    let spec_scaled = Spectral::new(scaled.grid);
    let coeffs = spec_scaled.forward(&scaled.values);
    let n = scaled.grid.n as f64;
    let half = scaled.grid.half_period;
    let values = grid
        .points()
        .into_iter()
        .map(|x| {
            let y = epsilon * x / d_plus;
            if y.abs() >= half {
                return 0.0;
            }
            amplitude * trig_interpolate(&coeffs, scaled.grid, y) / n
        })
        .collect();
    GridProfile::new(grid, values)
}

/// Evaluate the trigonometric interpolant (unnormalized FFT coefficients).
fn trig_interpolate(coeffs: &[num_complex::Complex64], grid: Grid, x: f64) -> f64 {
    let n = grid.n;
    let shift = x + grid.half_period;
    let mut total = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let xi = grid.wavenumber(k);
        let weight = if k == n / 2 { 0.5 } else { 1.0 };
        let phase = num_complex::Complex64::from_polar(1.0, xi * shift);
        total += weight * (c * phase).re;
        if k == n / 2 {
            total += weight * (c * phase.conj()).re;
        }
    }
    total
}

/// Green's-function decay rate as printed: `√(1+δ−√(δ(2+δ)))` for `δ ≥ 0`,
/// `√(|δ|/2)` for `δ < 0`.
pub fn decay_rate(delta: f64) -> Result<f64> {
    if !(delta > -2.0) {
        return Err(Error::InvalidParams(format!("need delta > -2, got {delta}")));
    }
    Ok(if delta >= 0.0 {
        (1.0 + delta - (delta * (2.0 + delta)).sqrt()).sqrt()
    } else {
        (delta.abs() / 2.0).sqrt()
    })
}

/// Envelope decay rate of the tail, `min Re k` over the roots of
/// `k⁴ − 2(1+δ)k² + 1`; equals [`decay_rate`] for `δ ≥ 0` and
/// `√((2+δ)/2)` for `−2 < δ < 0`.
pub fn tail_decay_rate(delta: f64) -> Result<f64> {
    if delta >= 0.0 {
        return decay_rate(delta);
    }
    decay_rate(delta)?;
    Ok(((2.0 + delta) / 2.0).sqrt())
}

/// Oscillation wavenumber of the tail, `√(|δ|/2)` for `δ < 0` and 0 otherwise.
pub fn tail_oscillation(delta: f64) -> Result<f64> {
    decay_rate(delta)?;
    Ok(if delta < 0.0 { (delta.abs() / 2.0).sqrt() } else { 0.0 })
}

/// Default grid: `L = max(40, 25/s)` with `s` the slowest envelope rate on
/// the continuation path, and `N` the smallest power of two ≥ 512 keeping
/// `dx ≤ 1/4`.
pub fn kawahara_default_grid(delta: f64) -> Result<Grid> {
    let s = tail_decay_rate(delta)?.min(tail_decay_rate(KAWAHARA_EXPLICIT_DELTA)?);
    let half = (25.0 / s).max(40.0);
    let dx_max = 0.25;
    let n = ((2.0 * half / dx_max).ceil() as usize).next_power_of_two().max(512);
    Grid::new(half, n)
}

/// A converged homoclinic orbit with its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomoclinicSolution {
    pub delta: f64,
    pub profile: GridProfile,
    pub residual_norm: f64,
    pub decay_rate_fit: f64,
    /// [`decay_rate`] at `delta`.
    pub predicted_decay_rate: f64,
    /// [`tail_decay_rate`] at `delta`.
    pub tail_decay_rate: f64,
    pub newton_iterations: usize,
    pub continuation_steps: usize,
    /// Largest `‖Z_{k+1} − Z_k‖ / |δ_{k+1} − δ_k|` along the path.
    pub continuation_constant: f64,
}

/// Newton tolerance on a grid: [`NEWTON_TOL`], raised to the rounding floor
/// of the fourth-derivative residual when the grid resolves wavenumbers far
/// beyond the profile's content.
pub fn newton_tolerance(grid: Grid, peak: f64) -> f64 {
    let floor = 0.2 * f64::EPSILON * grid.nyquist().powi(4) * peak.max(1.0) * (2.0 * grid.half_period).sqrt();
    NEWTON_TOL.max(floor)
}

/// Discrete `L²` norm `(dx Σ v²)^{1/2}`.
pub fn discrete_l2(grid: Grid, v: &[f64]) -> f64 {
    (grid.dx() * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Fourth-order steady operator `Z ↦ Z'''' − 2(1+δ)Z'' + Z − aZ² − bZ³`
/// discretized on the even subspace of a periodic grid.
struct EvenNewton {
    grid: Grid,
    spectral: Spectral,
    linear: DMatrix<f64>,
    delta: f64,
}

impl EvenNewton {
    fn new(grid: Grid, delta: f64) -> Self {
        let spectral = Spectral::new(grid);
        let linear = spectral.symbol_matrix(Parity::Even, |xi| linear_symbol(delta, xi));
        Self { grid, spectral, linear, delta }
    }

    /// Grid indices holding the unknowns: `x ≥ 0` plus the point `x = −L`.
    fn unknown_indices(&self) -> Vec<usize> {
        let n = self.grid.n;
        let mut idx: Vec<usize> = (n / 2..n).collect();
        idx.push(0);
        idx
    }

    fn mirror(&self, j: usize) -> usize {
        (self.grid.n - j) % self.grid.n
    }

    fn expand(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let mut full = vec![0.0; n];
        for (i, &j) in self.unknown_indices().iter().enumerate() {
            full[j] = u[i];
            full[self.mirror(j)] = u[i];
        }
        full
    }

    fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.unknown_indices().iter().map(|&j| full[j]).collect()
    }

    fn residual(&self, z: &[f64], a: f64, b: f64) -> Vec<f64> {
        let lz = self.spectral.apply_symbol(z, Parity::Even, |xi| linear_symbol(self.delta, xi));
        lz.iter().zip(z).map(|(l, v)| l - a * v * v - b * v * v * v).collect()
    }

    fn jacobian(&self, z: &[f64], a: f64, b: f64) -> DMatrix<f64> {
        let idx = self.unknown_indices();
        let m = idx.len();
        DMatrix::from_fn(m, m, |i, k| {
            let row = idx[i];
            let col = idx[k];
            let mirror = self.mirror(col);
            let mut v = self.linear[(row, col)];
            if mirror != col {
                v += self.linear[(row, mirror)];
            }
            if row == col {
                v -= 2.0 * a * z[row] + 3.0 * b * z[row] * z[row];
            }
            v
        })
    }

    /// Newton iteration from `guess`; returns `(Z, residual, iterations)`.
    fn solve(&self, guess: &[f64], a: f64, b: f64, tol: f64) -> Result<(Vec<f64>, f64, usize)> {
        let mut z = symmetrize(guess, self);
        let mut res = discrete_l2(self.grid, &self.residual(&z, a, b));
        let mut stalled = 0;
        for it in 0..NEWTON_MAX_ITER {
            if res < tol {
                return Ok((z, res, it));
            }
            let r = self.restrict(&self.residual(&z, a, b));
            let jac = self.jacobian(&z, a, b);
            let step = jac
                .lu()
                .solve(&DVector::from_vec(r))
                .ok_or_else(|| Error::Singular("Newton Jacobian on the even subspace".into()))?;
            let full_step = self.expand(step.as_slice());
            let trial: Vec<f64> = z.iter().zip(&full_step).map(|(v, s)| v - s).collect();
            let trial_res = discrete_l2(self.grid, &self.residual(&trial, a, b));
            if !trial_res.is_finite() {
                break;
            }
            if trial_res >= 0.5 * res {
                stalled += 1;
            } else {
                stalled = 0;
            }
            z = trial;
            res = trial_res;
            if stalled >= 4 {
                break;
            }
        }
        if res < tol {
            return Ok((z, res, NEWTON_MAX_ITER));
        }
        Err(Error::NoConvergence { what: "homoclinic Newton iteration", iterations: NEWTON_MAX_ITER, residual: res })
    }
}

fn symmetrize(v: &[f64], solver: &EvenNewton) -> Vec<f64> {
    solver.expand(&solver.restrict(v))
}

fn linear_symbol(delta: f64, xi: f64) -> f64 {
    let x2 = xi * xi;
    x2 * x2 + 2.0 * (1.0 + delta) * x2 + 1.0
}

fn continuation_deltas(from: f64, to: f64) -> Vec<f64> {
    let steps = ((to - from).abs() / CONTINUATION_STEP).ceil().max(1.0) as usize;
    (1..=steps).map(|k| from + (to - from) * k as f64 / steps as f64).collect()
}

/// Continue a solution of the fourth-order equation in `δ` from
/// `(start_delta, start)` to `target`, halving the step on failure.
fn continue_in_delta(
    grid: Grid,
    start_delta: f64,
    start: Vec<f64>,
    target: f64,
    a: f64,
    b: f64,
) -> Result<(Vec<f64>, f64, usize, usize, f64)> {
    let mut current_delta = start_delta;
    let mut current = start;
    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut steps = 0;
    let mut constant: f64 = 0.0;
    let mut iterations = 0;
    let mut res = discrete_l2(grid, &EvenNewton::new(grid, start_delta).residual(&current, a, b));
    let mut queue = continuation_deltas(start_delta, target);
    queue.reverse();
    while let Some(next) = queue.pop() {
        let guess: Vec<f64> = match &previous {
            Some((pd, pz)) if (current_delta - pd).abs() > 0.0 => {
                let t = (next - current_delta) / (current_delta - pd);
                current.iter().zip(pz).map(|(c, p)| c + t * (c - p)).collect()
            }
            _ => current.clone(),
        };
        let solver = EvenNewton::new(grid, next);
        let tol = newton_tolerance(grid, current.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        match solver.solve(&guess, a, b, tol) {
            Ok((z, r, it)) => {
                if next != current_delta {
                    let diff: Vec<f64> = z.iter().zip(&current).map(|(x, y)| x - y).collect();
                    constant = constant.max(discrete_l2(grid, &diff) / (next - current_delta).abs());
                }
                previous = Some((current_delta, std::mem::replace(&mut current, z)));
                current_delta = next;
                res = r;
                iterations = it;
                steps += 1;
            }
            Err(_) => {
                let half = 0.5 * (next - current_delta);
                if half.abs() < 1e-4 {
                    return Err(Error::Continuation { last_delta: current_delta });
                }
                queue.push(next);
                queue.push(current_delta + half);
            }
        }
    }
    Ok((current, res, iterations, steps, constant))
}

/// Primary homoclinic `Z_δ` of `Z'''' − 2(1+δ)Z'' + Z − Z² = 0`, continued
/// from the explicit solution at `δ = 1/12`.
pub fn kawahara_solve(delta: f64, grid: Option<Grid>) -> Result<HomoclinicSolution> {
    homoclinic_solve(delta, 1.0, 0.0, false, grid)
}

/// Homoclinic of `Z'''' − 2(1+δ)Z'' + Z − aZ² − bZ³ = 0` with the
/// coefficients of the given cubic-Kawahara spec.
pub fn cubic_kawahara_solve(spec: &ProfileSpec, grid: Option<Grid>) -> Result<HomoclinicSolution> {
    spec.validate()?;
    if spec.kind != ProfileKind::CubicKawaharaNumeric {
        return Err(Error::InvalidProfile(format!("{:?} is not the cubic Kawahara family", spec.kind)));
    }
    let (a, b) = spec.fourth_order_coefficients()?;
    homoclinic_solve(spec.delta.unwrap_or_default(), a, b, spec.negative_branch, grid)
}

/// Homoclinic of `Z'''' − 2(1+δ)Z'' + Z − aZ² − bZ³ = 0`: continued in `δ`
/// from the explicit solution, then deformed from `(±1, 0)` to `(a, b)`.
pub fn homoclinic_solve(delta: f64, a: f64, b: f64, negative: bool, grid: Option<Grid>) -> Result<HomoclinicSolution> {
    if !(delta > -2.0) {
        return Err(Error::InvalidParams(format!("need delta > -2, got {delta}")));
    }
    let grid = match grid {
        Some(g) => g,
        None => kawahara_default_grid(delta)?,
    };
    let s_path = tail_decay_rate(delta)?.min(tail_decay_rate(KAWAHARA_EXPLICIT_DELTA)?);
    // Relative slack so that L = 25/s itself passes after rounding.
    if grid.half_period * s_path < 25.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidGrid(format!(
            "half-period {} is below 25/s = {} for the continuation path",
            grid.half_period,
            25.0 / s_path
        )));
    }
    let seed = GridProfile::from_fn(grid, kawahara_explicit).values;
    let (mut z, mut res, mut iterations, mut steps, constant) =
        continue_in_delta(grid, KAWAHARA_EXPLICIT_DELTA, seed, delta, 1.0, 0.0)?;
    if (a, b) != (1.0, 0.0) || negative {
        let (z2, r2, it2, st2) = homotopy_to_cubic(grid, delta, z, a, b, negative)?;
        z = z2;
        res = r2;
        iterations = it2;
        steps += st2;
    }
    let profile = GridProfile::new(grid, z)?;
    Ok(HomoclinicSolution {
        delta,
        decay_rate_fit: fit_decay_rate(&profile)?,
        predicted_decay_rate: decay_rate(delta)?,
        tail_decay_rate: tail_decay_rate(delta)?,
        profile,
        residual_norm: res,
        newton_iterations: iterations,
        continuation_steps: steps,
        continuation_constant: constant,
    })
}

/// Deform `(a, b) = (±1, 0)` into the requested coefficients along
/// `a(t) = (1−t)(±1) + t a`, `b(t) = t b`.
fn homotopy_to_cubic(grid: Grid, delta: f64, z: Vec<f64>, a: f64, b: f64, negative: bool) -> Result<(Vec<f64>, f64, usize, usize)> {
    let sign = if negative { -1.0 } else { 1.0 };
    let solver = EvenNewton::new(grid, delta);
    let mut current: Vec<f64> = z.iter().map(|v| sign * v).collect();
    let mut t: f64 = 0.0;
    let mut dt: f64 = 0.05;
    let mut steps = 0;
    let mut res = f64::NAN;
    let mut iterations = 0;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let an = (1.0 - next) * sign + next * a;
        let tol = newton_tolerance(grid, current.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        match solver.solve(&current, an, next * b, tol) {
            Ok((zn, r, it)) if zn.iter().sum::<f64>() * sign > 0.0 => {
                current = zn;
                t = next;
                res = r;
                iterations = it;
                steps += 1;
                dt = (dt * 1.5).min(0.1);
            }
            _ => {
                dt *= 0.5;
                if dt < 1e-4 {
                    return Err(Error::Continuation { last_delta: delta });
                }
            }
        }
    }
    Ok((current, res, iterations, steps))
}

/// Slowest exponential rate in the tail of an even profile, from a
/// two-term linear-prediction fit on `x > 0` where the envelope lies between
/// `10⁻¹⁰` and `10⁻³` of the peak.
pub fn fit_decay_rate(profile: &GridProfile) -> Result<f64> {
    let grid = profile.grid;
    let peak = profile.max_abs();
    let origin = grid.origin();
    let tail: Vec<(f64, f64)> = (origin..grid.n).map(|j| (grid.x(j), profile.values[j])).collect();
    // Envelope from the right so oscillation zeros do not cut the window.
    let mut envelope = vec![0.0; tail.len()];
    let mut running: f64 = 0.0;
    for i in (0..tail.len()).rev() {
        running = running.max(tail[i].1.abs());
        envelope[i] = running;
    }
    let window: Vec<f64> = tail
        .iter()
        .zip(&envelope)
        .filter(|(_, &e)| e < 1e-3 * peak && e > 1e-10 * peak)
        .map(|((_, v), _)| *v)
        .collect();
    let stride = ((0.5 / grid.dx()).round() as usize).max(1);
    let samples: Vec<f64> = window.iter().step_by(stride).copied().collect();
    if samples.len() < 6 {
        return Err(Error::InvalidProfile("tail window too short to fit a decay rate".into()));
    }
    // z_{k+2} = p z_{k+1} + q z_k in the least-squares sense.
    let rows = samples.len() - 2;
    let m = DMatrix::from_fn(rows, 2, |i, j| if j == 0 { samples[i + 1] } else { samples[i] });
    let rhs = DVector::from_fn(rows, |i, _| samples[i + 2]);
    let normal = m.transpose() * &m;
    let coef = normal
        .lu()
        .solve(&(m.transpose() * rhs))
        .ok_or_else(|| Error::Singular("tail fit normal equations".into()))?;
    let (p, q) = (coef[0], coef[1]);
    let disc = p * p + 4.0 * q;
    let largest = if disc >= 0.0 {
        ((p.abs() + disc.sqrt()) / 2.0).abs()
    } else {
        (-q).sqrt()
    };
    let step = stride as f64 * grid.dx();
    Ok(-largest.ln() / step)
}

/// Steady reduced equation satisfied by each family's scaled profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SteadyEquation {
    /// `−w²η'' + η − (3/2)qη²`.
    Kdv { width_sq: f64, quadratic: f64 },
    /// `−w²η'' + η − (3/2)κη² − 2Aη³`.
    Gardner { width_sq: f64, kappa: f64, cubic: f64 },
    /// `Z'''' − 2(1+δ)Z'' + Z − aZ² − bZ³`.
    FourthOrder { delta: f64, quadratic: f64, cubic: f64 },
}

impl SteadyEquation {
    pub fn for_spec(spec: &ProfileSpec) -> Result<Self> {
        spec.validate()?;
        let w = spec.width()?;
        Ok(match spec.kind {
            ProfileKind::Kdv => SteadyEquation::Kdv { width_sq: w * w, quadratic: spec.quadratic_coefficient() },
            ProfileKind::GardnerElevation | ProfileKind::GardnerDepression => SteadyEquation::Gardner {
                width_sq: w * w,
                kappa: spec.kappa.unwrap_or(0.0),
                cubic: spec.gardner_cubic(),
            },
            _ => {
                let (a, b) = spec.fourth_order_coefficients()?;
                SteadyEquation::FourthOrder { delta: spec.delta.unwrap_or(KAWAHARA_PRINTED_DELTA), quadratic: a, cubic: b }
            }
        })
    }
}

/// Pointwise residual of the steady equation.
pub fn steady_ode_residual_values(profile: &GridProfile, equation: SteadyEquation) -> Vec<f64> {
    let spec = Spectral::new(profile.grid);
    let v = &profile.values;
    match equation {
        SteadyEquation::Kdv { width_sq, quadratic } => {
            let d2 = spec.derivative_values(v, 2);
            v.iter().zip(&d2).map(|(u, u2)| -width_sq * u2 + u - 1.5 * quadratic * u * u).collect()
        }
        SteadyEquation::Gardner { width_sq, kappa, cubic } => {
            let d2 = spec.derivative_values(v, 2);
            v.iter()
                .zip(&d2)
                .map(|(u, u2)| -width_sq * u2 + u - 1.5 * kappa * u * u - 2.0 * cubic * u * u * u)
                .collect()
        }
        SteadyEquation::FourthOrder { delta, quadratic, cubic } => {
            let lz = spec.apply_symbol(v, Parity::Even, |xi| linear_symbol(delta, xi));
            lz.iter().zip(v).map(|(l, u)| l - quadratic * u * u - cubic * u * u * u).collect()
        }
    }
}

/// Discrete `L²` norm of the steady-equation residual.
pub fn steady_ode_residual(profile: &GridProfile, equation: SteadyEquation) -> f64 {
    discrete_l2(profile.grid, &steady_ode_residual_values(profile, equation))
}
