use num_complex::Complex64;

use super::{BohmConfig, Grid1D};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, Observable};

/// `H = −ħ²/(2m) ∂² + V` with the `(1, −2, 1)/dx²` stencil and hard walls.
pub fn build_hamiltonian(grid: &Grid1D, cfg: &BohmConfig) -> Result<Observable> {
    let n = grid.n_points();
    if cfg.potential().len() != n {
        return Err(Error::DimMismatch { expected: n, found: cfg.potential().len() });
    }
    let dx = grid.dx();
    let kinetic = cfg.hbar() * cfg.hbar() / (2.0 * cfg.mass() * dx * dx);
    let mut h = CMatrix::zeros(n, n);
    for (j, v) in cfg.potential().iter().enumerate() {
        h[(j, j)] = Complex64::new(2.0 * kinetic + v, 0.0);
        if j + 1 < n {
            h[(j, j + 1)] = Complex64::new(-kinetic, 0.0);
            h[(j + 1, j)] = Complex64::new(-kinetic, 0.0);
        }
    }
    Observable::new(h)
}

/// Diagonal position operator `X`.
pub fn position_operator(grid: &Grid1D) -> Observable {
    Observable::from_real_diagonal(&grid.points()).expect("grid points are finite")
}

/// `P = −iħ ∂` with centered differences; Hermitian by construction.
pub fn momentum_operator(grid: &Grid1D, hbar: f64) -> Observable {
    let n = grid.n_points();
    let c = hbar / (2.0 * grid.dx());
    let mut p = CMatrix::zeros(n, n);
    for j in 0..n - 1 {
        p[(j, j + 1)] = Complex64::new(0.0, -c);
        p[(j + 1, j)] = Complex64::new(0.0, c);
    }
    Observable::new(p).expect("antisymmetric imaginary stencil is Hermitian")
}
