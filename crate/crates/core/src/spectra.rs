//! Dense discretizations of the linearized operators and their spectra: the
//! limiting rescaled operators, the rescaled multiplier-plus-potential
//! operators at small `ε`, the Kawahara linearization and `Q_c(η)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dispersion::qtilde;
use crate::dno::{relative_velocity_with, Backend, DnOperators, Side};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridProfile, Parity, Spectral};
use crate::linalg::{asymmetry, sorted_symmetric_eigen};
use crate::params::{critical_point, gamma_quartic, PhysicalParams};
use crate::profiles::{
    closed_profile, homoclinic_solve, kawahara_default_grid, kawahara_solve, tail_decay_rate, ProfileSpec,
};

/// Largest `ε` accepted by the rescaled convergence study.
pub const ASYMPTOTIC_GATE: f64 = 0.3;
/// Zero-mode tolerance as a fraction of the spectral range, measured from
/// the lowest eigenvalue to the essential-spectrum edge so that the
/// discretized high-wavenumber continuum does not inflate it.
pub const ZERO_MODE_FRACTION: f64 = 1e-4;
/// Tail test: a profile must fall below this fraction of its peak at `|x| = L`.
pub const TAIL_FRACTION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Qtilde0AKdv,
    Qtilde0AGardner,
    Qtilde0C,
    Qtilde0CCubic,
    QepsA,
    QepsC,
    Qdelta,
    QcEta,
}

/// Parameters selecting one operator; `Qc(η)` is assembled by [`assemble_qc`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorRequest {
    Qtilde0AKdv { varrho: f64, h: f64, beta: f64 },
    Qtilde0AGardner { varrho: f64, h: f64, kappa: f64, cubic: Option<f64>, beta: Option<f64>, elevation: bool },
    Qtilde0C { varrho: f64, h: f64, delta: f64 },
    Qtilde0CCubic { varrho: f64, h: f64, delta: f64, kappa: f64, negative_branch: bool },
    QepsA { varrho: f64, h: f64, beta: f64, epsilon: f64 },
    QepsC { varrho: f64, h: f64, delta: f64, epsilon: f64 },
    Qdelta { delta: f64 },
}

impl OperatorRequest {
    pub fn kind(&self) -> OperatorKind {
        match self {
            OperatorRequest::Qtilde0AKdv { .. } => OperatorKind::Qtilde0AKdv,
            OperatorRequest::Qtilde0AGardner { .. } => OperatorKind::Qtilde0AGardner,
            OperatorRequest::Qtilde0C { .. } => OperatorKind::Qtilde0C,
            OperatorRequest::Qtilde0CCubic { .. } => OperatorKind::Qtilde0CCubic,
            OperatorRequest::QepsA { .. } => OperatorKind::QepsA,
            OperatorRequest::QepsC { .. } => OperatorKind::QepsC,
            OperatorRequest::Qdelta { .. } => OperatorKind::Qdelta,
        }
    }

    /// Grid on which the request's profile is resolved: `L = 40√(β−β₀)` and
    /// `N = 1024` in Region A, the homoclinic default grid in Region C.
    pub fn default_grid(&self) -> Result<Grid> {
        match *self {
            OperatorRequest::Qtilde0AKdv { varrho, h, beta } | OperatorRequest::QepsA { varrho, h, beta, .. } => {
                Grid::new(40.0 * width(varrho, h, Some(beta))?, 1024)
            }
            OperatorRequest::Qtilde0AGardner { varrho, h, beta, .. } => Grid::new(40.0 * width(varrho, h, beta)?, 1024),
            OperatorRequest::Qtilde0C { delta, .. }
            | OperatorRequest::Qtilde0CCubic { delta, .. }
            | OperatorRequest::QepsC { delta, .. }
            | OperatorRequest::Qdelta { delta } => kawahara_default_grid(delta),
        }
    }
}

fn width(varrho: f64, h: f64, beta: Option<f64>) -> Result<f64> {
    match beta {
        None => Ok(1.0),
        Some(b) => {
            let excess = b - critical_point(varrho, h).0;
            if excess > 0.0 {
                Ok(excess.sqrt())
            } else {
                Err(Error::InvalidParams(format!("need beta > beta0, got beta - beta0 = {excess}")))
            }
        }
    }
}

/// A dense self-adjoint operator on a periodic grid.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub grid: Grid,
    pub entries: DMatrix<f64>,
    /// `max |M − Mᵀ|` before symmetrization.
    pub asymmetry: f64,
    /// Onset of the continuous spectrum of the continuum operator.
    pub ess_edge: f64,
    /// Profile entering the potential, if any.
    pub profile: Option<GridProfile>,
}

impl OperatorMatrix {
    fn new(kind: OperatorKind, grid: Grid, m: DMatrix<f64>, ess_edge: f64, profile: Option<GridProfile>) -> Self {
        let asym = asymmetry(&m);
        let entries = (&m + m.transpose()) * 0.5;
        Self { kind, grid, entries, asymmetry: asym, ess_edge, profile }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.entries * x).as_slice().to_vec()
    }

    /// Same operator plus `α I`.
    pub fn shifted(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.n() {
            out.entries[(i, i)] += alpha;
        }
        out
    }

    /// `‖M Z′‖ / ‖Z′‖` for the profile's translation mode.
    pub fn kernel_defect(&self) -> Option<f64> {
        let p = self.profile.as_ref()?;
        let d = p.derivative();
        let md = self.apply(&d.values);
        let num = md.iter().map(|v| v * v).sum::<f64>().sqrt();
        let den = d.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(num / den)
    }
}

fn diag(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// Reject profiles that have not decayed at the edge of the period.
fn check_tail(profile: &GridProfile) -> Result<()> {
    let peak = profile.max_abs();
    let edge = profile.values[0].abs().max(profile.values[profile.grid.n - 1].abs());
    if edge > TAIL_FRACTION * peak {
        return Err(Error::InvalidGrid(format!(
            "profile not decayed at |x| = L: edge/peak = {:e}",
            edge / peak
        )));
    }
    Ok(())
}

/// `symbol(ξ) + potential(x)` as a dense matrix.
fn multiplier_plus_potential(grid: Grid, symbol: impl Fn(f64) -> f64, potential: &[f64]) -> DMatrix<f64> {
    Spectral::new(grid).symbol_matrix(Parity::Even, symbol) + diag(potential)
}

/// Region-C scaled profile `η̃ = (2γ/(3(ϱ−1/h²))) Z_δ`, for which the
/// limiting operator is exactly `γ Q_δ`.
pub fn region_c_profile(varrho: f64, h: f64, delta: f64, grid: Grid) -> Result<(GridProfile, f64)> {
    let q = varrho - 1.0 / (h * h);
    if q == 0.0 {
        return Err(Error::InvalidParams("Region C Kawahara family needs varrho - 1/h^2 != 0".into()));
    }
    let gamma = gamma_quartic(varrho, h);
    let z = kawahara_solve(delta, Some(grid))?.profile;
    Ok((z.scale(2.0 * gamma / (3.0 * q)), gamma))
}

pub fn assemble_operator(request: &OperatorRequest, grid: Grid) -> Result<OperatorMatrix> {
    let kind = request.kind();
    match *request {
        OperatorRequest::Qtilde0AKdv { varrho, h, beta } => {
            let spec = ProfileSpec::kdv(varrho, h, beta);
            let eta = closed_profile(&spec, grid)?;
            check_tail(&eta)?;
            let w2 = beta - critical_point(varrho, h).0;
            let q = spec.quadratic_coefficient();
            let pot: Vec<f64> = eta.values.iter().map(|e| 1.0 - 3.0 * q * e).collect();
            let m = multiplier_plus_potential(grid, |xi| w2 * xi * xi, &pot);
            Ok(OperatorMatrix::new(kind, grid, m, 1.0, Some(eta)))
        }
        OperatorRequest::Qtilde0AGardner { varrho, h, kappa, cubic, beta, elevation } => {
            let mut spec = ProfileSpec::gardner_for(elevation, varrho, h, kappa, beta);
            spec.cubic = cubic;
            let eta = closed_profile(&spec, grid)?;
            check_tail(&eta)?;
            let w = spec.width()?;
            let a = spec.gardner_cubic();
            let pot: Vec<f64> = eta.values.iter().map(|e| 1.0 - 3.0 * kappa * e - 6.0 * a * e * e).collect();
            let m = multiplier_plus_potential(grid, |xi| w * w * xi * xi, &pot);
            Ok(OperatorMatrix::new(kind, grid, m, 1.0, Some(eta)))
        }
        OperatorRequest::Qtilde0C { varrho, h, delta } => {
            let (eta, gamma) = region_c_profile(varrho, h, delta, grid)?;
            check_tail(&eta)?;
            let q = varrho - 1.0 / (h * h);
            let pot: Vec<f64> = eta.values.iter().map(|e| -3.0 * q * e).collect();
            let m = multiplier_plus_potential(grid, |xi| gamma * fourth_order_symbol(delta, xi), &pot);
            Ok(OperatorMatrix::new(kind, grid, m, gamma, Some(eta)))
        }
        OperatorRequest::Qtilde0CCubic { varrho, h, delta, kappa, negative_branch } => {
            let gamma = gamma_quartic(varrho, h);
            let cubic = varrho + 1.0 / h.powi(3);
            // η̃ solves γη̃'''' − 2(1+δ)γη̃'' + γη̃ − (3/2)κη̃² − 2(ϱ+1/h³)η̃³ = 0.
            let sol = homoclinic_solve(delta, 1.5 * kappa / gamma, 2.0 * cubic / gamma, negative_branch, Some(grid))?;
            let eta = sol.profile;
            check_tail(&eta)?;
            let pot: Vec<f64> =
                eta.values.iter().map(|e| -3.0 * kappa * e - 6.0 * cubic * e * e).collect();
            let spectral = Spectral::new(grid);
            let d1 = spectral.symbol_matrix(Parity::Odd, |xi| xi);
            let eta2 = spectral.derivative_values(&eta.values, 2);
            let mixed = &d1 * diag(&eta.values) * &d1 + diag(&eta2);
            let m = multiplier_plus_potential(grid, |xi| gamma * fourth_order_symbol(delta, xi), &pot)
                + mixed * (1.0 - varrho);
            Ok(OperatorMatrix::new(kind, grid, m, gamma, Some(eta)))
        }
        OperatorRequest::QepsA { varrho, h, beta, epsilon } => {
            check_epsilon(epsilon)?;
            let spec = ProfileSpec::kdv(varrho, h, beta);
            let eta = closed_profile(&spec, grid)?;
            check_tail(&eta)?;
            let q = spec.quadratic_coefficient();
            let lambda = critical_point(varrho, h).1 + epsilon * epsilon;
            let pot: Vec<f64> = eta.values.iter().map(|e| -3.0 * q * e).collect();
            let symbol = |xi: f64| rescaled_symbol(xi, epsilon, 2, beta, lambda, varrho, h);
            let m = multiplier_plus_potential(grid, symbol, &pot);
            Ok(OperatorMatrix::new(kind, grid, m, 1.0, Some(eta)))
        }
        OperatorRequest::QepsC { varrho, h, delta, epsilon } => {
            check_epsilon(epsilon)?;
            let (eta, gamma) = region_c_profile(varrho, h, delta, grid)?;
            check_tail(&eta)?;
            let (beta0, lambda0) = critical_point(varrho, h);
            let beta = beta0 + 2.0 * (1.0 + delta) * gamma * epsilon * epsilon;
            let lambda = lambda0 + gamma * epsilon.powi(4);
            let q = varrho - 1.0 / (h * h);
            let pot: Vec<f64> = eta.values.iter().map(|e| -3.0 * q * e).collect();
            let symbol = |xi: f64| rescaled_symbol(xi, epsilon, 4, beta, lambda, varrho, h);
            let m = multiplier_plus_potential(grid, symbol, &pot);
            Ok(OperatorMatrix::new(kind, grid, m, gamma, Some(eta)))
        }
        OperatorRequest::Qdelta { delta } => {
            let z = kawahara_solve(delta, Some(grid))?.profile;
            check_tail(&z)?;
            let pot: Vec<f64> = z.values.iter().map(|v| -2.0 * v).collect();
            let m = multiplier_plus_potential(grid, |xi| fourth_order_symbol(delta, xi), &pot);
            Ok(OperatorMatrix::new(kind, grid, m, 1.0, Some(z)))
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= ASYMPTOTIC_GATE) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, {ASYMPTOTIC_GATE}], got {epsilon}")));
    }
    Ok(())
}

/// `ξ⁴ + 2(1+δ)ξ² + 1`.
fn fourth_order_symbol(delta: f64, xi: f64) -> f64 {
    let x2 = xi * xi;
    x2 * x2 + 2.0 * (1.0 + delta) * x2 + 1.0
}

/// `ε⁻ⁿ q̃(εξ)`, the exact symbol of the rescaled flat-state operator.
pub fn rescaled_symbol(xi: f64, epsilon: f64, n: i32, beta: f64, lambda: f64, varrho: f64, h: f64) -> f64 {
    qtilde(epsilon * xi, beta, lambda, varrho, h) / epsilon.powi(n)
}

/// How `G±(η)⁻¹` is realized inside `Q_c(η)`.
pub type InverseBackend = Backend;

/// Sign convention for the `Σ ± ρ± b₁±(b₂±)′` potential term of `Q_c(η)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialSign {
    /// `+ρ₊b₁₊(b₂₊)′ − ρ₋b₁₋(b₂₋)′`.
    #[default]
    Printed,
    /// `−ρ₊b₁₊(b₂₊)′ + ρ₋b₁₋(b₂₋)′`.
    Flipped,
}

/// `Q_c(η)η̇ = −(σ η̇′/⟨η′⟩³)′ − (g⟦ρ⟧ + Σ ±ρ± b₁±(b₂±)′)η̇ + Σ ρ± b₁±(G±(η)⁻¹(b₁±η̇)′)′`.
pub fn assemble_qc(eta: &GridProfile, p: &PhysicalParams, backend: InverseBackend) -> Result<OperatorMatrix> {
    assemble_qc_with(eta, p, backend, PotentialSign::default())
}

pub fn assemble_qc_with(
    eta: &GridProfile,
    p: &PhysicalParams,
    backend: InverseBackend,
    sign: PotentialSign,
) -> Result<OperatorMatrix> {
    let ops = DnOperators::new(eta, p, backend)?;
    let rv = relative_velocity_with(&ops)?;
    let grid = eta.grid;
    let n = grid.n;
    let spectral = Spectral::new(grid);
    let d1 = spectral.symbol_matrix(Parity::Odd, |xi| xi);
    let slope = &ops.eta_slope;
    let tension: Vec<f64> = slope.iter().map(|s| p.sigma / (1.0 + s * s).powf(1.5)).collect();
    let mut m = -(&d1 * diag(&tension) * &d1);
    let flip = match sign {
        PotentialSign::Printed => 1.0,
        PotentialSign::Flipped => -1.0,
    };
    let mut potential = vec![-p.g * p.density_jump(); n];
    for (side, b1, b2) in [(Side::Plus, &rv.b1_plus, &rv.b2_plus), (Side::Minus, &rv.b1_minus, &rv.b2_minus)] {
        let rho = side.density(p);
        let db2 = spectral.derivative_values(&b2.values, 1);
        for j in 0..n {
            potential[j] -= flip * side.sign() * rho * b1.values[j] * db2[j];
        }
    }
    m += diag(&potential);
    for side in Side::BOTH {
        let rho = side.density(p);
        if rho == 0.0 {
            continue;
        }
        let b1 = match side {
            Side::Plus => &rv.b1_plus.values,
            Side::Minus => &rv.b1_minus.values,
        };
        let inner = &d1 * diag(b1);
        let mut ginv_inner = DMatrix::zeros(n, n);
        for col in 0..n {
            let column: Vec<f64> = inner.column(col).iter().copied().collect();
            let w = ops.g_inv_projected(side, &column)?;
            ginv_inner.set_column(col, &nalgebra::DVector::from_vec(w));
        }
        m += (diag(b1) * &d1 * ginv_inner) * rho;
    }
    let edge = crate::dispersion::cont_spec_edge(p).nu_star_dimensional;
    Ok(OperatorMatrix::new(OperatorKind::QcEta, grid, m, edge, Some(eta.clone())))
}

/// Eigenvalues and low eigenvectors of an assembled operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub kind: OperatorKind,
    pub grid: Grid,
    /// Lowest `k` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub n_negative: usize,
    pub zero_modes: Vec<f64>,
    pub ess_edge: f64,
    /// Number of discrete eigenvalues at or above the edge.
    pub discretized_continuum: usize,
    pub tolerance: f64,
    pub spectral_range: f64,
    pub asymmetry: f64,
    pub lowest_vectors: Vec<GridProfile>,
    /// Cosine similarity of the eigenvector nearest zero with the profile's derivative.
    pub kernel_alignment: Option<f64>,
}

pub fn eigensolve(m: &OperatorMatrix, k: usize) -> SpectrumReport {
    let (values, vectors) = sorted_symmetric_eigen(m.entries.clone());
    let lowest = values.first().copied().unwrap_or(0.0);
    let range = (m.ess_edge - lowest).abs().max(m.ess_edge.abs());
    let tol = ZERO_MODE_FRACTION * range.abs();
    let n_negative = values.iter().filter(|&&v| v < -tol).count();
    let zero_modes: Vec<f64> = values.iter().copied().filter(|v| v.abs() <= tol).collect();
    let discretized_continuum = values.iter().filter(|&&v| v >= m.ess_edge).count();
    let column = |i: usize| GridProfile { grid: m.grid, values: vectors.column(i).iter().copied().collect() };
    let lowest_vectors = (0..values.len().min(2)).map(column).collect();
    let kernel_alignment = m.profile.as_ref().and_then(|p| {
        let nearest = (0..values.len()).min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))?;
        Some(cosine_similarity(&column(nearest).values, &p.derivative().values))
    });
    SpectrumReport {
        kind: m.kind,
        grid: m.grid,
        eigenvalues: values.iter().take(k).copied().collect(),
        n_negative,
        zero_modes,
        ess_edge: m.ess_edge,
        discretized_continuum,
        tolerance: tol,
        spectral_range: range,
        asymmetry: m.asymmetry,
        lowest_vectors,
        kernel_alignment,
    }
}

/// `|⟨u, v⟩| / (‖u‖‖v‖)`.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot.abs() / (nu * nv)
}

/// Which rescaled family a convergence study follows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ConvergenceFamily {
    RegionAKdv { varrho: f64, h: f64, beta: f64 },
    RegionCKawahara { varrho: f64, h: f64, delta: f64 },
}

impl ConvergenceFamily {
    fn request(&self, epsilon: Option<f64>) -> OperatorRequest {
        match (*self, epsilon) {
            (ConvergenceFamily::RegionAKdv { varrho, h, beta }, None) => OperatorRequest::Qtilde0AKdv { varrho, h, beta },
            (ConvergenceFamily::RegionAKdv { varrho, h, beta }, Some(epsilon)) => {
                OperatorRequest::QepsA { varrho, h, beta, epsilon }
            }
            (ConvergenceFamily::RegionCKawahara { varrho, h, delta }, None) => OperatorRequest::Qtilde0C { varrho, h, delta },
            (ConvergenceFamily::RegionCKawahara { varrho, h, delta }, Some(epsilon)) => {
                OperatorRequest::QepsC { varrho, h, delta, epsilon }
            }
        }
    }

    pub fn default_grid(&self) -> Result<Grid> {
        self.request(None).default_grid()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub nu1: f64,
    pub nu2: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub family: ConvergenceFamily,
    pub rows: Vec<ConvergenceRow>,
    /// The `ε = 0` row from the limiting operator.
    pub limit: ConvergenceRow,
    /// `|ν₁(εₖ) − ν₁(0)| / |ν₁(εₖ₊₁) − ν₁(0)|` for successive rows.
    pub nu1_ratios: Vec<f64>,
    pub nu2_ratios: Vec<f64>,
    /// Whether `|ν₁(ε) − ν₁(0)|` decreases along the list.
    pub monotone: bool,
}

fn lowest_pair(m: &OperatorMatrix) -> (f64, f64) {
    let r = eigensolve(m, 2);
    (r.eigenvalues[0], r.eigenvalues[1])
}

pub fn rescaled_convergence_study(family: ConvergenceFamily, eps_list: &[f64], grid: Grid) -> Result<ConvergenceStudy> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("epsilon list must be strictly decreasing".into()));
    }
    for &e in eps_list {
        check_epsilon(e)?;
    }
    let (l1, l2) = lowest_pair(&assemble_operator(&family.request(None), grid)?);
    let limit = ConvergenceRow { epsilon: 0.0, nu1: l1, nu2: l2 };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &e in eps_list {
        let (nu1, nu2) = lowest_pair(&assemble_operator(&family.request(Some(e)), grid)?);
        rows.push(ConvergenceRow { epsilon: e, nu1, nu2 });
    }
    let ratios = |f: fn(&ConvergenceRow) -> f64| -> Vec<f64> {
        rows.windows(2)
            .map(|w| (f(&w[0]) - f(&limit)).abs() / (f(&w[1]) - f(&limit)).abs())
            .collect()
    };
    let nu1_ratios = ratios(|r| r.nu1);
    let nu2_ratios = ratios(|r| r.nu2);
    let monotone = nu1_ratios.iter().all(|&r| r > 1.0);
    Ok(ConvergenceStudy { family, rows, limit, nu1_ratios, nu2_ratios, monotone })
}

/// Minimum half-period keeping a homoclinic tail resolved, `25/s`.
pub fn minimum_half_period(delta: f64) -> Result<f64> {
    Ok(25.0 / tail_decay_rate(delta)?)
}
