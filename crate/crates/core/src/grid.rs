//! Uniform periodic grids, sampled profiles and Fourier multipliers.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic grid on `[-L, L)` with `n` points, `x_j = -L + 2Lj/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_period: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(half_period: f64, n: usize) -> Result<Self> {
        if !(half_period.is_finite() && half_period > 0.0) {
            return Err(Error::InvalidGrid(format!("half-period must be positive, got {half_period}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 8, got {n}")));
        }
        Ok(Self { half_period, n })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_period / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_period + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Index of the grid point at `x = 0`.
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    /// Angular wavenumber of FFT bin `k` (standard FFT ordering).
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n as i64;
        let k = k as i64;
        let m = if k <= n / 2 { k } else { k - n };
        std::f64::consts::PI * m as f64 / self.half_period
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.wavenumber(k)).collect()
    }

    /// Largest resolved wavenumber.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * (self.n / 2) as f64 / self.half_period
    }

    /// Same grid with twice the period and twice the points.
    pub fn doubled(&self) -> Self {
        Self { half_period: 2.0 * self.half_period, n: 2 * self.n }
    }

    /// Same period, twice the points.
    pub fn refined(&self) -> Self {
        Self { half_period: self.half_period, n: 2 * self.n }
    }
}

/// Real function sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridProfile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridProfile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "profile has {} values for a grid of {}",
                values.len(),
                grid.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.n] }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.n);
        Self { grid: self.grid, values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.with_values(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// Rectangle rule, spectrally accurate for smooth periodic data.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.n as f64
    }

    /// `∫ f g dx`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.grid.dx() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Discrete L² norm `(∫ f² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Translate by whole grid cells, `f(x - shift·dx)`.
    pub fn shifted(&self, shift: usize) -> Self {
        let n = self.grid.n;
        let mut out = vec![0.0; n];
        for j in 0..n {
            out[(j + shift) % n] = self.values[j];
        }
        self.with_values(out)
    }

    /// Reflection `x -> -x` on the grid (index `j -> n - j`).
    pub fn reflected(&self) -> Self {
        let n = self.grid.n;
        self.with_values((0..n).map(|j| self.values[(n - j) % n]).collect())
    }

    pub fn derivative(&self) -> Self {
        Spectral::new(self.grid).derivative(self, 1)
    }
}

/// Parity of a Fourier symbol; odd symbols are purely imaginary and vanish at
/// the Nyquist bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// FFT plans for one grid.
#[derive(Clone)]
pub struct Spectral {
    pub grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    xi: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
            xi: grid.wavenumbers(),
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.xi
    }

    pub fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let s = 1.0 / self.grid.n as f64;
        spec.into_iter().map(|z| z.re * s).collect()
    }

    /// Multiply by `symbol(ξ)` (even) or `i·symbol(ξ)` (odd) in Fourier space.
    pub fn apply_symbol(&self, v: &[f64], parity: Parity, symbol: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut spec = self.forward(v);
        let nyq = self.grid.n / 2;
        for (k, z) in spec.iter_mut().enumerate() {
            let xi = self.xi[k];
            *z *= match parity {
                Parity::Even => Complex64::new(symbol(xi), 0.0),
                Parity::Odd if k == nyq => Complex64::new(0.0, 0.0),
                Parity::Odd => Complex64::new(0.0, symbol(xi)),
            };
        }
        self.inverse(spec)
    }

    /// `order`-th spectral derivative.
    pub fn derivative(&self, f: &GridProfile, order: u32) -> GridProfile {
        f.with_values(self.derivative_values(&f.values, order))
    }

    pub fn derivative_values(&self, v: &[f64], order: u32) -> Vec<f64> {
        if order == 0 {
            return v.to_vec();
        }
        let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let parity = if order % 2 == 0 { Parity::Even } else { Parity::Odd };
        self.apply_symbol(v, parity, |xi| sign * xi.powi(order as i32))
    }

    /// Dense circulant matrix of the multiplier, so `M v` equals
    /// `apply_symbol(v, parity, symbol)`.
    pub fn symbol_matrix(&self, parity: Parity, symbol: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.grid.n;
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let col = self.apply_symbol(&e0, parity, symbol);
        DMatrix::from_fn(n, n, |j, l| col[(j + n - l) % n])
    }
}
