//! Discretized Bohmian mechanics on a 1D grid.
//!
//! The ontic space is the set of grid points. Grid basis vectors `|x⟩` are
//! scaled by `1/√dx`, so `⟨x|ψ⟩` is the wavefunction value and
//! `dx · Σ |ψ(x)|² = 1`. Boundaries are hard walls (Dirichlet): the wavefunction
//! is implicitly zero just outside the grid.

mod evolve;
mod fields;
mod hamiltonian;
mod trajectories;

pub use evolve::{evolve, resolution_ratio, CrankNicolson};
pub use fields::{ensemble_average, local_value, velocity_field, ValueField, VelocityField};
pub use hamiltonian::{build_hamiltonian, momentum_operator, position_operator};
pub use trajectories::{
    equivariance_check, integrate_trajectories, sample_initial_positions, TrajectoryEnsemble,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{CVector, StateVector};

/// `dx · Σ|ψ|²` must be within this of 1.
pub const WAVEFUNCTION_NORM_TOL: f64 = 1e-8;

/// Relative density below which a grid point counts as a node.
pub const NODE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 8 {
            return Err(Error::InvalidInput(format!("grid needs at least 8 points, got {n_points}")));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::InvalidInput(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")));
        }
        Ok(Self { n_points, x_min, x_max })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, index: usize) -> f64 {
        self.x_min + index as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

/// Potential energy on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    Free,
    /// `½ m ω² (x − center)²`
    Harmonic { omega: f64, #[serde(default)] center: f64 },
    /// One value per grid point.
    Table { values: Vec<f64> },
}

impl Potential {
    pub fn sample(&self, grid: &Grid1D, mass: f64) -> Result<Vec<f64>> {
        match self {
            Potential::Free => Ok(vec![0.0; grid.n_points()]),
            Potential::Harmonic { omega, center } => {
                Ok(grid.points().iter().map(|x| 0.5 * mass * omega * omega * (x - center).powi(2)).collect())
            }
            Potential::Table { values } => {
                if values.len() != grid.n_points() {
                    return Err(Error::DimMismatch { expected: grid.n_points(), found: values.len() });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput("potential table has non-finite values".into()));
                }
                Ok(values.clone())
            }
        }
    }
}

/// Physical constants, time step and sampled potential.
#[derive(Debug, Clone, PartialEq)]
pub struct BohmConfig {
    hbar: f64,
    mass: f64,
    dt: f64,
    potential: Vec<f64>,
}

impl BohmConfig {
    pub fn new(hbar: f64, mass: f64, dt: f64, potential: Vec<f64>) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("dt", dt)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { hbar, mass, dt, potential })
    }

    pub fn with_potential(grid: &Grid1D, hbar: f64, mass: f64, dt: f64, potential: &Potential) -> Result<Self> {
        Self::new(hbar, mass, dt, potential.sample(grid, mass)?)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

/// `ψ(x) = ⟨x|ψ⟩` sampled on a grid with `dx · Σ|ψ|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::DimMismatch { expected: grid.n_points(), found: amplitudes.len() });
        }
        let norm = grid.dx() * amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !norm.is_finite() || (norm - 1.0).abs() > WAVEFUNCTION_NORM_TOL {
            return Err(Error::NotNormalized { norm: norm.sqrt() });
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn normalized(grid: Grid1D, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::DimMismatch { expected: grid.n_points(), found: amplitudes.len() });
        }
        let norm = (grid.dx() * amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { grid, amplitudes })
    }

    /// `exp(−(x−x₀)²/(4σ₀²) + i k₀ x)`, so that `|ψ|²` has standard deviation `σ₀`.
    pub fn gaussian(grid: Grid1D, x0: f64, sigma0: f64, k0: f64) -> Result<Self> {
        if !(sigma0.is_finite() && sigma0 > 0.0) {
            return Err(Error::InvalidInput(format!("sigma0 must be positive, got {sigma0}")));
        }
        let amplitudes = grid
            .points()
            .iter()
            .map(|&x| {
                let envelope = (-(x - x0).powi(2) / (4.0 * sigma0 * sigma0)).exp();
                Complex64::from_polar(envelope, k0 * x)
            })
            .collect();
        Self::normalized(grid, amplitudes)
    }

    /// Interprets a unit vector of grid-basis coefficients as `√dx · ψ(x)`.
    pub fn from_state(grid: Grid1D, state: &StateVector) -> Result<Self> {
        let scale = grid.dx().sqrt();
        Self::normalized(grid, state.amplitudes().iter().map(|z| z / scale).collect())
    }

    /// Unit vector of grid-basis coefficients `√dx · ψ(x)`.
    pub fn to_state(&self) -> StateVector {
        let scale = self.grid.dx().sqrt();
        StateVector::normalized(CVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|z| z * scale)))
            .expect("normalized wavefunction")
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|ψ(x)|²` per grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `dx · Σ|ψ|²`
    pub fn norm_squared(&self) -> f64 {
        self.grid.dx() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Mean and standard deviation of `|ψ|²`.
    pub fn position_moments(&self) -> (f64, f64) {
        let dx = self.grid.dx();
        let density = self.density();
        let norm: f64 = density.iter().sum::<f64>() * dx;
        let mean = (0..density.len()).map(|i| self.grid.x(i) * density[i]).sum::<f64>() * dx / norm;
        let var = (0..density.len()).map(|i| (self.grid.x(i) - mean).powi(2) * density[i]).sum::<f64>() * dx / norm;
        (mean, var.sqrt())
    }

    /// Per-point node mask: `|ψ(x)|² ≤ NODE_FLOOR · max|ψ|²`.
    pub fn node_mask(&self) -> Vec<bool> {
        let density = self.density();
        let max = density.iter().cloned().fold(0.0, f64::max);
        density.iter().map(|&d| d <= NODE_FLOOR * max).collect()
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Self {
        Self { grid: self.grid, amplitudes }
    }
}
