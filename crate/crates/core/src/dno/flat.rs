//! Fourier multipliers of the Dirichlet-Neumann operators at the flat interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridProfile, Parity, Spectral};
use crate::params::PhysicalParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlatKind {
    GPlus,
    GMinus,
    B,
    BInv,
    A,
    AInv,
}

impl FlatKind {
    /// Kinds whose symbol vanishes or blows up at `ξ = 0`.
    pub fn needs_mean_zero(self) -> bool {
        matches!(self, FlatKind::BInv | FlatKind::A | FlatKind::AInv)
    }
}

/// `|ξ| tanh(d |ξ|)`.
pub fn layer_symbol(depth: f64, xi: f64) -> f64 {
    let k = xi.abs();
    k * (depth * k).tanh()
}

/// Symbol of `B = ρ₊G₋ + ρ₋G₊`.
pub fn symbol_b(p: &PhysicalParams, xi: f64) -> f64 {
    p.rho_plus * layer_symbol(p.d_minus, xi) + p.rho_minus * layer_symbol(p.d_plus, xi)
}

/// Symbol of `first · B⁻¹ · second`; with `(G₋, G₊)` or `(G₊, G₋)` this is `A`.
pub fn symbol_a_ordered(p: &PhysicalParams, first: f64, second: f64, xi: f64) -> f64 {
    let b = symbol_b(p, xi);
    if b == 0.0 {
        0.0
    } else {
        first * second / b
    }
}

/// Value of the multiplier at `ξ`; the zero mode maps to zero for every kind.
pub fn flat_symbol(kind: FlatKind, p: &PhysicalParams, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    let sp = layer_symbol(p.d_plus, xi);
    let sm = layer_symbol(p.d_minus, xi);
    match kind {
        FlatKind::GPlus => sp,
        FlatKind::GMinus => sm,
        FlatKind::B => symbol_b(p, xi),
        FlatKind::BInv => 1.0 / symbol_b(p, xi),
        FlatKind::A => symbol_a_ordered(p, sm, sp, xi),
        FlatKind::AInv => p.rho_plus / sp + p.rho_minus / sm,
    }
}

/// Relative size of the mean beyond which singular kinds reject their input.
pub const MEAN_ZERO_TOL: f64 = 1e-9;

pub(crate) fn check_mean_zero(values: &[f64]) -> Result<()> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mean.abs() > MEAN_ZERO_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotMeanZero { mean });
    }
    Ok(())
}

pub(crate) fn apply_flat_values(spec: &Spectral, kind: FlatKind, values: &[f64], p: &PhysicalParams) -> Vec<f64> {
    spec.apply_symbol(values, Parity::Even, |xi| flat_symbol(kind, p, xi))
}

/// Apply a flat-interface multiplier to a profile.
pub fn apply_flat_multiplier(kind: FlatKind, f: &GridProfile, p: &PhysicalParams) -> Result<GridProfile> {
    p.validate()?;
    if kind.needs_mean_zero() {
        check_mean_zero(&f.values)?;
    }
    let spec = Spectral::new(f.grid);
    Ok(f.with_values(apply_flat_values(&spec, kind, &f.values, p)))
}
