//! First and second variations of `G±(η)` and `A(η)`, and the relative
//! velocity of a travelling wave at the interface.

use serde::{Deserialize, Serialize};

use super::{remove_mean, Backend, DnOperators, Side};
use crate::error::Result;
use crate::grid::GridProfile;
use crate::params::PhysicalParams;

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn axpy(acc: &mut [f64], alpha: f64, v: &[f64]) {
    acc.iter_mut().zip(v).for_each(|(a, x)| *a += alpha * x);
}

/// Coefficients `(a₁±, a₂±)` for a potential trace `psi` with `g_psi = G±(η)ψ`:
/// `a₁± = (∓ψ′ − η′G±ψ)/(1+η′²)`, `a₂± = (±G±ψ − η′ψ′)/(1+η′²)`.
pub fn coefficients(ops: &DnOperators, side: Side, psi: &[f64], g_psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let s = side.sign();
    let dpsi = ops.derivative(psi);
    let n = psi.len();
    let mut a1 = vec![0.0; n];
    let mut a2 = vec![0.0; n];
    for j in 0..n {
        let e = ops.eta_slope[j];
        let w = 1.0 / (1.0 + e * e);
        a1[j] = w * (-s * dpsi[j] - e * g_psi[j]);
        a2[j] = w * (s * g_psi[j] - e * dpsi[j]);
    }
    (a1, a2)
}

/// `DG±(η)[η̇]ψ = −(a₁±η̇)′ + G±(η)(a₂±η̇)`, given the coefficients for ψ.
pub fn dg_apply(ops: &DnOperators, side: Side, a1: &[f64], a2: &[f64], etadot: &[f64]) -> Result<Vec<f64>> {
    let flux = ops.derivative(&mul(a1, etadot));
    let normal = ops.g(side, &mul(a2, etadot))?;
    Ok(normal.iter().zip(&flux).map(|(g, f)| g - f).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FirstVariations {
    pub dg_plus: GridProfile,
    pub dg_minus: GridProfile,
    pub da: GridProfile,
}

/// Per-layer data for `θ± = G±(η)⁻¹A(η)ψ`.
struct ThetaData {
    a_psi: Vec<f64>,
    theta: [Vec<f64>; 2],
    a1: [Vec<f64>; 2],
    a2: [Vec<f64>; 2],
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

fn theta_data(ops: &DnOperators, psi: &[f64]) -> Result<ThetaData> {
    let a_psi = ops.a(psi)?;
    let mut theta: [Vec<f64>; 2] = Default::default();
    let mut a1: [Vec<f64>; 2] = Default::default();
    let mut a2: [Vec<f64>; 2] = Default::default();
    for side in Side::BOTH {
        let i = side_index(side);
        theta[i] = ops.g_inv_projected(side, &a_psi)?;
        // G±θ± = Aψ holds by construction.
        let (c1, c2) = coefficients(ops, side, &theta[i], &a_psi);
        a1[i] = c1;
        a2[i] = c2;
    }
    Ok(ThetaData { a_psi, theta, a1, a2 })
}

/// Strong forms of `DG±(η)[η̇]ψ` and `DA(η)[η̇]ψ`.
///
/// `DA(η)[η̇]ψ = A(η) Σ ρ± G±(η)⁻¹ DG±(η)[η̇]θ±` with `θ± = G±(η)⁻¹A(η)ψ`,
/// which is the derivative of `A⁻¹ = Σ ρ± G±⁻¹`.
pub fn first_variations(
    eta: &GridProfile,
    psi: &GridProfile,
    etadot: &GridProfile,
    p: &PhysicalParams,
    backend: Backend,
) -> Result<FirstVariations> {
    let ops = DnOperators::new(eta, p, backend)?;
    let mut dg = Vec::new();
    for side in Side::BOTH {
        let g_psi = ops.g(side, &psi.values)?;
        let (a1, a2) = coefficients(&ops, side, &psi.values, &g_psi);
        dg.push(dg_apply(&ops, side, &a1, &a2, &etadot.values)?);
    }
    let td = theta_data(&ops, &psi.values)?;
    let mut inner = vec![0.0; eta.grid.n];
    for side in Side::BOTH {
        let rho = side.density(p);
        if rho == 0.0 {
            continue;
        }
        let i = side_index(side);
        let dgt = dg_apply(&ops, side, &td.a1[i], &td.a2[i], &etadot.values)?;
        axpy(&mut inner, rho, &ops.g_inv_projected(side, &dgt)?);
    }
    let da = ops.a(&inner)?;
    let dg_minus = dg.pop().expect("two layers");
    let dg_plus = dg.pop().expect("two layers");
    Ok(FirstVariations {
        dg_plus: eta.with_values(dg_plus),
        dg_minus: eta.with_values(dg_minus),
        da: eta.with_values(da),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondVariations {
    pub q_g_plus: f64,
    pub q_g_minus: f64,
    pub q_a: f64,
}

/// `∫ (a₄ η̇² + 2a₂η̇ G(a₂η̇))` with `a₄ = −2a₁′a₂`.
fn quadform_g(ops: &DnOperators, side: Side, a1: &[f64], a2: &[f64], etadot: &[f64]) -> Result<f64> {
    let da1 = ops.derivative(a1);
    let a2e = mul(a2, etadot);
    let g_a2e = ops.g(side, &a2e)?;
    let integrand: Vec<f64> = (0..etadot.len())
        .map(|j| -2.0 * da1[j] * a2[j] * etadot[j] * etadot[j] + 2.0 * a2e[j] * g_a2e[j])
        .collect();
    Ok(ops.grid().dx() * integrand.iter().sum::<f64>())
}

/// Quadratic forms `∫ψ D²G±(η)[η̇,η̇]ψ` and `∫ψ D²A(η)[η̇,η̇]ψ`.
pub fn second_variation_quadforms(
    eta: &GridProfile,
    psi: &GridProfile,
    etadot: &GridProfile,
    p: &PhysicalParams,
    backend: Backend,
) -> Result<SecondVariations> {
    let ops = DnOperators::new(eta, p, backend)?;
    let ed = &etadot.values;
    let mut q = [0.0; 2];
    for side in Side::BOTH {
        let g_psi = ops.g(side, &psi.values)?;
        let (a1, a2) = coefficients(&ops, side, &psi.values, &g_psi);
        q[side_index(side)] = quadform_g(&ops, side, &a1, &a2, ed)?;
    }

    let td = theta_data(&ops, &psi.values)?;
    let n = ed.len();
    let mut q_a = 0.0;
    let mut l_ops: [Vec<f64>; 2] = Default::default();
    let mut l_total = vec![0.0; n];
    for side in Side::BOTH {
        let rho = side.density(p);
        let i = side_index(side);
        q_a += rho * quadform_g(&ops, side, &td.a1[i], &td.a2[i], ed)?;
        let flux = ops.derivative(&mul(&td.a1[i], ed));
        let mut l = ops.g_inv_projected(side, &flux)?;
        l.iter_mut().zip(&td.a2[i]).zip(ed).for_each(|((v, a2), e)| *v = -*v + a2 * e);
        axpy(&mut l_total, rho, &l);
        l_ops[i] = l;
    }
    let a_l = ops.a(&l_total)?;
    let mut m_term = vec![0.0; n];
    let mut n_term = vec![0.0; n];
    for side in Side::BOTH {
        let rho = side.density(p);
        if rho == 0.0 {
            continue;
        }
        let i = side_index(side);
        let l = &l_ops[i];
        let dl = ops.derivative(l);
        let gl = ops.g(side, l)?;
        let ag = ops.a(&ops.g_inv_projected(side, &l_total)?)?;
        let dag = ops.derivative(&ag);
        for j in 0..n {
            m_term[j] += rho * (td.a1[i][j] * dl[j] + td.a2[i][j] * gl[j]);
            n_term[j] += rho * (td.a1[i][j] * dag[j] + td.a2[i][j] * a_l[j]);
        }
    }
    let correction: f64 = (0..n).map(|j| (-2.0 * m_term[j] + 2.0 * n_term[j]) * ed[j]).sum::<f64>();
    q_a += ops.grid().dx() * correction;
    Ok(SecondVariations { q_g_plus: q[0], q_g_minus: q[1], q_a })
}

/// Interface velocities relative to the wave frame in each layer.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelativeVelocity {
    pub b1_plus: GridProfile,
    pub b1_minus: GridProfile,
    pub b2_plus: GridProfile,
    pub b2_minus: GridProfile,
    /// `φ± = ±c G±(η)⁻¹η′`.
    pub phi_plus: GridProfile,
    pub phi_minus: GridProfile,
    /// `ψ* = ρ₋φ₋ − ρ₊φ₊`.
    pub psistar: GridProfile,
}

impl RelativeVelocity {
    /// `max |b₂± − η′b₁±|` over both layers.
    pub fn kinematic_defect(&self, eta: &GridProfile) -> f64 {
        let slope = eta.derivative();
        let mut worst: f64 = 0.0;
        for (b1, b2) in [(&self.b1_plus, &self.b2_plus), (&self.b1_minus, &self.b2_minus)] {
            for j in 0..slope.values.len() {
                worst = worst.max((b2.values[j] - slope.values[j] * b1.values[j]).abs());
            }
        }
        worst
    }
}

/// `b₁± = ∓a₁±(φ±) − c`, `b₂± = −a₂±(φ±)`.
pub fn relative_velocity(eta: &GridProfile, p: &PhysicalParams, backend: Backend) -> Result<RelativeVelocity> {
    let ops = DnOperators::new(eta, p, backend)?;
    relative_velocity_with(&ops)
}

pub fn relative_velocity_with(ops: &DnOperators) -> Result<RelativeVelocity> {
    let p = &ops.params;
    let eta = &ops.eta;
    let slope = remove_mean(&ops.eta_slope);
    let mut out: Vec<[Vec<f64>; 3]> = Vec::new();
    for side in Side::BOTH {
        let s = side.sign();
        let phi: Vec<f64> = ops.g_inv_projected(side, &slope)?.iter().map(|v| s * p.c * v).collect();
        let g_phi = ops.g(side, &phi)?;
        let (a1, a2) = coefficients(ops, side, &phi, &g_phi);
        let b1: Vec<f64> = a1.iter().map(|v| -s * v - p.c).collect();
        let b2: Vec<f64> = a2.iter().map(|v| -v).collect();
        out.push([b1, b2, phi]);
    }
    let [b1m, b2m, phim] = out.pop().expect("two layers");
    let [b1p, b2p, phip] = out.pop().expect("two layers");
    let psistar: Vec<f64> = phim.iter().zip(&phip).map(|(m, q)| p.rho_minus * m - p.rho_plus * q).collect();
    Ok(RelativeVelocity {
        b1_plus: eta.with_values(b1p),
        b1_minus: eta.with_values(b1m),
        b2_plus: eta.with_values(b2p),
        b2_minus: eta.with_values(b2m),
        phi_plus: eta.with_values(phip),
        phi_minus: eta.with_values(phim),
        psistar: eta.with_values(psistar),
    })
}

/// Kinetic part of the `η`-gradient of the energy,
/// `½ Σ ρ± (a₁±(θ±)θ±′ + a₂±(θ±)A(η)ψ)`.
pub fn kinetic_gradient(ops: &DnOperators, psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let td = theta_data(ops, psi)?;
    let n = psi.len();
    let mut out = vec![0.0; n];
    for side in Side::BOTH {
        let rho = side.density(&ops.params);
        let i = side_index(side);
        let dtheta = ops.derivative(&td.theta[i]);
        for j in 0..n {
            out[j] += 0.5 * rho * (td.a1[i][j] * dtheta[j] + td.a2[i][j] * td.a_psi[j]);
        }
    }
    Ok((out, td.a_psi))
}
