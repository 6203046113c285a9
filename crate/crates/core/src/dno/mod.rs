//! Two-layer Dirichlet-Neumann operators `G±(η)`, their combinations
//! `B(η) = ρ₊G₋ + ρ₋G₊` and `A(η) = G₋B⁻¹G₊`, and their variations.
//!
//! `A(η)⁻¹ = ρ₊G₊(η)⁻¹ + ρ₋G₋(η)⁻¹`, so inverses are the cheap direction;
//! `A(η)` itself is obtained by conjugate gradients on `A(η)⁻¹`.

mod flat;
mod strip;
mod variations;

pub use flat::{apply_flat_multiplier, flat_symbol, layer_symbol, symbol_a_ordered, symbol_b, FlatKind, MEAN_ZERO_TOL};
pub use strip::{check_amplitude, Side, StripField, StripSolver, AMPLITUDE_GATE, STRIP_TOL};
pub use variations::{
    coefficients, dg_apply, first_variations, kinetic_gradient, relative_velocity, relative_velocity_with,
    second_variation_quadforms,
    FirstVariations, RelativeVelocity, SecondVariations,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridProfile, Spectral};
use crate::linalg::pcg;
use crate::params::PhysicalParams;
use flat::{apply_flat_values, check_mean_zero};

/// How the nonlocal operators are realized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    /// Flat-interface multipliers, i.e. the operators at `η = 0`.
    Flat,
    /// Finite-difference strip solver with `ny` vertical cells per layer.
    Curved { ny: usize, tol: f64 },
}

impl Backend {
    pub fn curved(ny: usize) -> Self {
        Backend::Curved { ny, tol: STRIP_TOL }
    }
}

pub(crate) fn remove_mean(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

/// The operator stack at one interface profile.
#[derive(Clone, Debug)]
pub struct DnOperators {
    pub params: PhysicalParams,
    pub eta: GridProfile,
    pub eta_slope: Vec<f64>,
    pub backend: Backend,
    spectral: Spectral,
    plus: Option<StripSolver>,
    minus: Option<StripSolver>,
}

impl DnOperators {
    pub fn new(eta: &GridProfile, p: &PhysicalParams, backend: Backend) -> Result<Self> {
        p.validate()?;
        let spectral = Spectral::new(eta.grid);
        let eta_slope = spectral.derivative_values(&eta.values, 1);
        let (plus, minus) = match backend {
            Backend::Flat => (None, None),
            Backend::Curved { ny, tol } => (
                Some(StripSolver::new(eta, Side::Plus, p, ny)?.with_tolerance(tol)),
                Some(StripSolver::new(eta, Side::Minus, p, ny)?.with_tolerance(tol)),
            ),
        };
        Ok(Self { params: *p, eta: eta.clone(), eta_slope, backend, spectral, plus, minus })
    }

    pub fn grid(&self) -> Grid {
        self.eta.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        self.spectral.derivative_values(v, 1)
    }

    /// `∫ f g dx` on the grid.
    pub fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        self.grid().dx() * crate::linalg::dot(f, g)
    }

    fn solver(&self, side: Side) -> Option<&StripSolver> {
        match side {
            Side::Plus => self.plus.as_ref(),
            Side::Minus => self.minus.as_ref(),
        }
    }

    fn flat(&self, kind: FlatKind, v: &[f64]) -> Vec<f64> {
        apply_flat_values(&self.spectral, kind, v, &self.params)
    }

    fn flat_kind(side: Side) -> FlatKind {
        match side {
            Side::Plus => FlatKind::GPlus,
            Side::Minus => FlatKind::GMinus,
        }
    }

    /// `G±(η) f`.
    pub fn g(&self, side: Side, f: &[f64]) -> Result<Vec<f64>> {
        match self.solver(side) {
            Some(s) => s.apply(f),
            None => Ok(self.flat(Self::flat_kind(side), f)),
        }
    }

    /// `G±(η)⁻¹ g` for mean-zero `g`, returning the mean-zero preimage.
    pub fn g_inv(&self, side: Side, g: &[f64]) -> Result<Vec<f64>> {
        check_mean_zero(g)?;
        self.g_inv_projected(side, g)
    }

    /// `G±(η)⁻¹` applied to the mean-zero part of `g`.
    pub fn g_inv_projected(&self, side: Side, g: &[f64]) -> Result<Vec<f64>> {
        let g = remove_mean(g);
        match self.solver(side) {
            Some(s) => s.apply_inverse(&g),
            None => {
                let spec = &self.spectral;
                let p = &self.params;
                let d = side.depth(p);
                Ok(spec.apply_symbol(&g, crate::grid::Parity::Even, |xi| {
                    if xi == 0.0 {
                        0.0
                    } else {
                        1.0 / layer_symbol(d, xi)
                    }
                }))
            }
        }
    }

    /// `B(η) f = ρ₊G₋f + ρ₋G₊f`.
    pub fn b(&self, f: &[f64]) -> Result<Vec<f64>> {
        let gm = self.g(Side::Minus, f)?;
        let gp = self.g(Side::Plus, f)?;
        let p = &self.params;
        Ok(gm.iter().zip(&gp).map(|(m, q)| p.rho_plus * m + p.rho_minus * q).collect())
    }

    /// `A(η)⁻¹ f` for mean-zero `f`.
    pub fn a_inv(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_mean_zero(f)?;
        self.a_inv_projected(f)
    }

    pub fn a_inv_projected(&self, f: &[f64]) -> Result<Vec<f64>> {
        let p = &self.params;
        let f = remove_mean(f);
        if self.plus.is_none() {
            return Ok(self.flat(FlatKind::AInv, &f));
        }
        let mut out = vec![0.0; f.len()];
        for side in Side::BOTH {
            let rho = side.density(p);
            if rho == 0.0 {
                continue;
            }
            let part = self.g_inv_projected(side, &f)?;
            out.iter_mut().zip(&part).for_each(|(o, v)| *o += rho * v);
        }
        Ok(out)
    }

    /// `A(η) f`; constants are in the kernel, so only the mean-zero part of
    /// `f` matters.
    pub fn a(&self, f: &[f64]) -> Result<Vec<f64>> {
        let f = remove_mean(f);
        match self.backend {
            Backend::Flat => Ok(self.flat(FlatKind::A, &f)),
            Backend::Curved { tol, .. } => {
                let failure = std::cell::RefCell::new(None);
                let apply = |v: &[f64]| match self.a_inv_projected(v) {
                    Ok(w) => w,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        vec![0.0; v.len()]
                    }
                };
                let precondition = |r: &[f64]| self.flat(FlatKind::A, &remove_mean(r));
                let x0 = Some(self.flat(FlatKind::A, &f));
                let outer_tol = (100.0 * tol).max(1e-13);
                let solve = pcg(apply, precondition, &f, x0, outer_tol, 500, "A(eta) solve");
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                Ok(remove_mean(&solve?.x))
            }
        }
    }
}
