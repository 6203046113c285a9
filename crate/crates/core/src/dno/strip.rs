//! Finite-difference Dirichlet-Neumann operators for a curved interface.
//!
//! Each layer is mapped to the strip `[-L, L) × [0, 1]` by a vertical stretch
//! with `t = 0` on the interface and `t = 1` on the rigid wall. The Dirichlet
//! energy in the stretched coordinates is discretized cell by cell, which
//! yields a symmetric stiffness matrix `K`. The Dirichlet-Neumann operator is
//! the Schur complement of `K` onto the interface row divided by `Δx`, so it is
//! symmetric, positive semidefinite and conserves `∫ G f dx = 0` exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::flat::check_mean_zero;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridProfile, Spectral};
use crate::linalg::{pcg, solve_tridiagonal};
use crate::params::PhysicalParams;

/// Upper (`Plus`) or lower (`Minus`) layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn depth(self, p: &PhysicalParams) -> f64 {
        match self {
            Side::Plus => p.d_plus,
            Side::Minus => p.d_minus,
        }
    }

    pub fn density(self, p: &PhysicalParams) -> f64 {
        match self {
            Side::Plus => p.rho_plus,
            Side::Minus => p.rho_minus,
        }
    }

    /// `+1` for the upper layer, `−1` for the lower one.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];
}

/// Interfaces with `‖η‖∞` at or above this fraction of the thinner layer are
/// refused.
pub const AMPLITUDE_GATE: f64 = 0.2;

/// Default relative tolerance of the strip solves.
pub const STRIP_TOL: f64 = 1e-12;

const MAX_ITER: usize = 2000;

pub fn check_amplitude(eta: &GridProfile, p: &PhysicalParams) -> Result<()> {
    let limit = AMPLITUDE_GATE * p.d_plus.min(p.d_minus);
    let amplitude = eta.max_abs();
    if amplitude >= limit {
        return Err(Error::AmplitudeGate { amplitude, limit });
    }
    Ok(())
}

/// Potential on the stretched strip of one layer, stored row by row
/// (`values[k * nx + j]` at `x_j`, `t_k = k/ny`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StripField {
    pub nx: usize,
    pub ny: usize,
    pub side: Side,
    pub values: Vec<f64>,
    /// Physical height of each node.
    pub heights: Vec<f64>,
    /// Final relative residual of the linear solve.
    pub residual: f64,
}

impl StripField {
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[k * self.nx + j]
    }

    pub fn height(&self, j: usize, k: usize) -> f64 {
        self.heights[k * self.nx + j]
    }
}

/// Stiffness operator and flat preconditioner for one layer.
#[derive(Clone)]
pub struct StripSolver {
    grid: Grid,
    side: Side,
    nx: usize,
    ny: usize,
    dx: f64,
    dt: f64,
    tol: f64,
    eta: Vec<f64>,
    thickness: Vec<f64>,
    /// Layer thickness at `x_{j+1/2}`.
    coef_xx: Vec<f64>,
    /// Mixed coefficient per cell `(j+1/2, k+1/2)`.
    coef_xt: Vec<f64>,
    /// `t`-coefficient per vertical edge `(j, k+1/2)`.
    coef_tt: Vec<f64>,
    mean_thickness: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StripSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StripSolver")
            .field("side", &self.side)
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl StripSolver {
    pub fn new(eta: &GridProfile, side: Side, p: &PhysicalParams, ny: usize) -> Result<Self> {
        p.validate()?;
        check_amplitude(eta, p)?;
        if ny < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 vertical cells, got {ny}")));
        }
        let grid = eta.grid;
        let nx = grid.n;
        let dx = grid.dx();
        let dt = 1.0 / ny as f64;
        let depth = side.depth(p);
        // Plus layer spans [η, d₊], minus layer spans [−d₋, η].
        let thickness: Vec<f64> = eta.values.iter().map(|&e| depth - side.sign() * e).collect();
        let slope = Spectral::new(grid).derivative_values(&eta.values, 1);
        // The mixed term carries +η' for the lower layer and −η' for the upper one.
        let chi = -side.sign();
        let mut coef_xx = vec![0.0; nx];
        let mut slope_mid = vec![0.0; nx];
        for j in 0..nx {
            let jp = (j + 1) % nx;
            coef_xx[j] = 0.5 * (thickness[j] + thickness[jp]);
            slope_mid[j] = 0.5 * (slope[j] + slope[jp]);
        }
        let mut coef_xt = vec![0.0; nx * ny];
        let mut coef_tt = vec![0.0; nx * ny];
        for k in 0..ny {
            let s = 1.0 - (k as f64 + 0.5) * dt;
            for j in 0..nx {
                coef_xt[k * nx + j] = chi * s * slope_mid[j];
                coef_tt[k * nx + j] = (1.0 + s * s * slope[j] * slope[j]) / thickness[j];
            }
        }
        let mean_thickness = thickness.iter().sum::<f64>() / nx as f64;
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            side,
            nx,
            ny,
            dx,
            dt,
            tol: STRIP_TOL,
            eta: eta.values.clone(),
            thickness,
            coef_xx,
            coef_xt,
            coef_tt,
            mean_thickness,
            fwd: planner.plan_fft_forward(nx),
            inv: planner.plan_fft_inverse(nx),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// `K u` on all `(ny+1)·nx` nodes.
    fn apply_full(&self, u: &[f64]) -> Vec<f64> {
        let (nx, ny, dx, dt) = (self.nx, self.ny, self.dx, self.dt);
        let w = dx * dt;
        let mut out = vec![0.0; u.len()];
        for k in 0..ny {
            let r0 = k * nx;
            let r1 = (k + 1) * nx;
            for j in 0..nx {
                let jp = if j + 1 == nx { 0 } else { j + 1 };
                let (u00, u10, u01, u11) = (u[r0 + j], u[r0 + jp], u[r1 + j], u[r1 + jp]);
                let gx0 = (u10 - u00) / dx;
                let gx1 = (u11 - u01) / dx;
                let gt0 = (u01 - u00) / dt;
                let gt1 = (u11 - u10) / dt;
                let ux = 0.5 * (gx0 + gx1);
                let ut = 0.5 * (gt0 + gt1);
                let a = self.coef_xx[j];
                let b = self.coef_xt[r0 + j];
                let x0 = 0.5 * a * gx0 / dx;
                let x1 = 0.5 * a * gx1 / dx;
                let t0 = 0.5 * self.coef_tt[r0 + j] * gt0 / dt;
                let t1 = 0.5 * self.coef_tt[r0 + jp] * gt1 / dt;
                let mx = 0.5 * b * ut / dx;
                let mt = 0.5 * b * ux / dt;
                out[r0 + j] += w * (-x0 - t0 - mx - mt);
                out[r0 + jp] += w * (x0 - t1 + mx - mt);
                out[r1 + j] += w * (-x1 + t0 - mx + mt);
                out[r1 + jp] += w * (x1 + t1 + mx + mt);
            }
        }
        out
    }

    /// Flat-strip solve with constant thickness, row by row in Fourier space.
    /// `first_row` is 1 for the Dirichlet problem (rows `1..=ny` unknown) and
    /// 0 for the Neumann problem, whose zero mode is pinned at the interface.
    fn precondition(&self, r: &[f64], first_row: usize) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let rows = ny + 1 - first_row;
        let h = self.mean_thickness;
        let along = h * self.dt / self.dx;
        let across = self.dx / (h * self.dt);
        let mut spec: Vec<Vec<Complex64>> = (0..rows)
            .map(|i| {
                let mut row: Vec<Complex64> = r[i * nx..(i + 1) * nx].iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.fwd.process(&mut row);
                row
            })
            .collect();
        let mut lower = vec![0.0; rows];
        let mut diag = vec![0.0; rows];
        let mut upper = vec![0.0; rows];
        let mut re = vec![0.0; rows];
        let mut im = vec![0.0; rows];
        for m in 0..nx {
            let theta = 2.0 * std::f64::consts::PI * m as f64 / nx as f64;
            let stiff = 2.0 - 2.0 * theta.cos();
            let pinned = first_row == 0 && m == 0;
            let start = usize::from(pinned);
            for i in start..rows {
                let k = i + first_row;
                let weight = if k == 0 || k == ny { 0.5 } else { 1.0 };
                let edges = if k == 0 || k == ny { 1.0 } else { 2.0 };
                diag[i] = along * weight * stiff + across * edges;
                lower[i] = -across;
                upper[i] = -across;
                re[i] = spec[i][m].re;
                im[i] = spec[i][m].im;
            }
            solve_tridiagonal(&lower[start..], &diag[start..], &upper[start..], &mut re[start..]);
            solve_tridiagonal(&lower[start..], &diag[start..], &upper[start..], &mut im[start..]);
            if pinned {
                spec[0][m] = Complex64::new(0.0, 0.0);
            }
            for i in start..rows {
                spec[i][m] = Complex64::new(re[i], im[i]);
            }
        }
        let scale = 1.0 / nx as f64;
        let mut out = vec![0.0; rows * nx];
        for (i, row) in spec.iter_mut().enumerate() {
            self.inv.process(row);
            for j in 0..nx {
                out[i * nx + j] = row[j].re * scale;
            }
        }
        out
    }

    fn heights(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut h = vec![0.0; nx * (ny + 1)];
        for k in 0..=ny {
            let t = k as f64 * self.dt;
            for j in 0..nx {
                h[k * nx + j] = self.eta[j] + self.side.sign() * t * self.thickness[j];
            }
        }
        h
    }

    /// Harmonic extension of interface data `f`.
    pub fn extend(&self, f: &[f64]) -> Result<StripField> {
        let nx = self.nx;
        let mut boundary = vec![0.0; nx * (self.ny + 1)];
        boundary[..nx].copy_from_slice(f);
        let kb = self.apply_full(&boundary);
        let rhs: Vec<f64> = kb[nx..].iter().map(|v| -v).collect();
        let apply = |v: &[f64]| {
            let mut u = vec![0.0; nx * (self.ny + 1)];
            u[nx..].copy_from_slice(v);
            self.apply_full(&u)[nx..].to_vec()
        };
        let solve = pcg(apply, |r: &[f64]| self.precondition(r, 1), &rhs, None, self.tol, MAX_ITER, "strip Dirichlet solve")?;
        let mut values = boundary;
        values[nx..].copy_from_slice(&solve.x);
        Ok(StripField {
            nx,
            ny: self.ny,
            side: self.side,
            values,
            heights: self.heights(),
            residual: solve.relative_residual,
        })
    }

    /// Interface flux of a solved field, `(K u)|_{t=0} / Δx`.
    pub fn flux(&self, field: &StripField) -> Vec<f64> {
        let ku = self.apply_full(&field.values);
        ku[..self.nx].iter().map(|v| v / self.dx).collect()
    }

    /// Dirichlet-Neumann operator applied to `f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        let field = self.extend(f)?;
        Ok(self.flux(&field))
    }

    /// Normal derivative from one-sided second-order differences in `t`,
    /// kept to compare against the variational flux.
    pub fn one_sided_flux(&self, field: &StripField) -> Vec<f64> {
        let nx = self.nx;
        let slope = Spectral::new(self.grid).derivative_values(&field.values[..nx], 1);
        let eta_slope = Spectral::new(self.grid).derivative_values(&self.eta, 1);
        (0..nx)
            .map(|j| {
                let h = self.thickness[j];
                let ut = (-3.0 * field.at(j, 0) + 4.0 * field.at(j, 1) - field.at(j, 2)) / (2.0 * self.dt);
                // u_y = ±u_t/h and u_x = U_x ∓ η'(1−t)u_t/h at t = 0.
                let s = self.side.sign();
                let uy = s * ut / h;
                let ux = slope[j] - s * eta_slope[j] * ut / h;
                // Outward normal: downward for the upper layer, upward for the lower one.
                -s * (uy - eta_slope[j] * ux)
            })
            .collect()
    }

    /// Inverse of the Dirichlet-Neumann operator on mean-zero data; the
    /// result is the mean-zero representative.
    pub fn apply_inverse(&self, g: &[f64]) -> Result<Vec<f64>> {
        check_mean_zero(g)?;
        let nx = self.nx;
        let total = nx * (self.ny + 1);
        let gmean = g.iter().sum::<f64>() / nx as f64;
        let mut rhs = vec![0.0; total];
        for j in 0..nx {
            rhs[j] = self.dx * (g[j] - gmean);
        }
        let project = |v: &mut Vec<f64>| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|x| *x -= m);
        };
        let precondition = |r: &[f64]| {
            let mut rr = r.to_vec();
            project(&mut rr);
            let mut z = self.precondition(&rr, 0);
            project(&mut z);
            z
        };
        let solve = pcg(|v: &[f64]| self.apply_full(v), precondition, &rhs, None, self.tol, MAX_ITER, "strip Neumann solve")?;
        let row = &solve.x[..nx];
        let mean = row.iter().sum::<f64>() / nx as f64;
        Ok(row.iter().map(|v| v - mean).collect())
    }
}
