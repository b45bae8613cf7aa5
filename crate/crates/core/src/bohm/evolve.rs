use nalgebra::linalg::LU;
use nalgebra::Dyn;
use num_complex::Complex64;

use super::{BohmConfig, WaveFunction};
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, CMatrix, CVector, Observable};

/// Crank–Nicolson propagator `(1 + iHdt/2ħ)ψ' = (1 − iHdt/2ħ)ψ`.
///
/// Tridiagonal Hamiltonians are factored once for the Thomas sweep; anything
/// else falls back to a dense LU factorization.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Tridiagonal {
        /// `−iτ` times H's sub-, main and super-diagonal for the explicit half step.
        explicit: Bands,
        /// Super-diagonal of the implicit matrix after forward elimination.
        upper: Vec<Complex64>,
        /// Implicit matrix sub-diagonal.
        lower: Vec<Complex64>,
        /// Inverse pivots of the forward elimination.
        inv_pivot: Vec<Complex64>,
    },
    Dense {
        explicit: CMatrix,
        lu: LU<Complex64, Dyn, Dyn>,
    },
}

#[derive(Debug, Clone)]
struct Bands {
    sub: Vec<Complex64>,
    diag: Vec<Complex64>,
    sup: Vec<Complex64>,
}

const PIVOT_FLOOR: f64 = 1e-300;

fn is_tridiagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|r| (0..n).all(|c| r.abs_diff(c) <= 1 || m[(r, c)] == Complex64::new(0.0, 0.0)))
}

impl CrankNicolson {
    pub fn new(h: &Observable, dt: f64, hbar: f64) -> Result<Self> {
        let m = h.matrix();
        let n = h.dim();
        // τ = dt / 2ħ
        let tau = Complex64::new(0.0, dt / (2.0 * hbar));
        let one = Complex64::new(1.0, 0.0);

        if is_tridiagonal(m) {
            let diag: Vec<Complex64> = (0..n).map(|j| m[(j, j)]).collect();
            let sub: Vec<Complex64> = (1..n).map(|j| m[(j, j - 1)]).collect();
            let sup: Vec<Complex64> = (0..n - 1).map(|j| m[(j, j + 1)]).collect();

            let explicit = Bands {
                sub: sub.iter().map(|h| -tau * h).collect(),
                diag: diag.iter().map(|h| one - tau * h).collect(),
                sup: sup.iter().map(|h| -tau * h).collect(),
            };
            let lower: Vec<Complex64> = sub.iter().map(|h| tau * h).collect();
            let implicit_diag: Vec<Complex64> = diag.iter().map(|h| one + tau * h).collect();
            let implicit_sup: Vec<Complex64> = sup.iter().map(|h| tau * h).collect();

            let mut upper = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
            let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
            let mut prev_upper = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let pivot = if j == 0 { implicit_diag[0] } else { implicit_diag[j] - lower[j - 1] * prev_upper };
                if pivot.norm() < PIVOT_FLOOR || !pivot.re.is_finite() || !pivot.im.is_finite() {
                    return Err(Error::SolverFailure(format!("zero pivot at row {j}")));
                }
                inv_pivot[j] = one / pivot;
                if j + 1 < n {
                    upper[j] = implicit_sup[j] * inv_pivot[j];
                    prev_upper = upper[j];
                }
            }
            return Ok(Self { kind: Kind::Tridiagonal { explicit, upper, lower, inv_pivot } });
        }

        let id = CMatrix::identity(n, n);
        let explicit = &id - m * tau;
        let implicit = &id + m * tau;
        let lu = implicit.lu();
        if !lu.is_invertible() {
            return Err(Error::SolverFailure("implicit Crank-Nicolson matrix is singular".into()));
        }
        Ok(Self { kind: Kind::Dense { explicit, lu } })
    }

    pub fn step(&self, psi: &mut [Complex64]) -> Result<()> {
        match &self.kind {
            Kind::Tridiagonal { explicit, upper, lower, inv_pivot } => {
                let n = psi.len();
                check_dim(inv_pivot.len(), n)?;
                let mut rhs = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    let mut v = explicit.diag[j] * psi[j];
                    if j > 0 {
                        v += explicit.sub[j - 1] * psi[j - 1];
                    }
                    if j + 1 < n {
                        v += explicit.sup[j] * psi[j + 1];
                    }
                    rhs[j] = v;
                }
                // Forward sweep.
                let mut y = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    let carry = if j == 0 { Complex64::new(0.0, 0.0) } else { lower[j - 1] * y[j - 1] };
                    y[j] = (rhs[j] - carry) * inv_pivot[j];
                }
                // Back substitution.
                for j in (0..n.saturating_sub(1)).rev() {
                    y[j] = y[j] - upper[j] * y[j + 1];
                }
                psi.copy_from_slice(&y);
            }
            Kind::Dense { explicit, lu } => {
                check_dim(explicit.nrows(), psi.len())?;
                let rhs = explicit * CVector::from_column_slice(psi);
                let next = lu
                    .solve(&rhs)
                    .ok_or_else(|| Error::SolverFailure("dense Crank-Nicolson solve failed".into()))?;
                psi.copy_from_slice(next.as_slice());
            }
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SolverFailure("non-finite amplitudes after step".into()));
        }
        Ok(())
    }
}

/// `dt · E_scale / ħ`, where `E_scale = |⟨H⟩| + 3ΔH` is the energy range the
/// state actually occupies.
pub fn resolution_ratio(psi: &WaveFunction, h: &Observable, cfg: &BohmConfig) -> Result<f64> {
    let state = psi.to_state();
    check_dim(h.dim(), state.dim())?;
    let h_psi = h.matrix() * state.amplitudes();
    let mean = state.amplitudes().dotc(&h_psi).re;
    let second = h_psi.norm_squared();
    let spread = (second - mean * mean).max(0.0).sqrt();
    Ok(cfg.dt() * (mean.abs() + 3.0 * spread) / cfg.hbar())
}

/// Advances `ψ` by `n_steps` Crank–Nicolson steps of size `cfg.dt`.
pub fn evolve(psi: &WaveFunction, h: &Observable, cfg: &BohmConfig, n_steps: usize) -> Result<WaveFunction> {
    check_dim(h.dim(), psi.amplitudes().len())?;
    if n_steps == 0 {
        return Ok(psi.clone());
    }
    let ratio = resolution_ratio(psi, h, cfg)?;
    if ratio > 0.5 {
        log::warn!("dt * E/hbar = {ratio:.3} > 0.5: time step may not resolve the dynamics");
    }
    let propagator = CrankNicolson::new(h, cfg.dt(), cfg.hbar())?;
    let mut amps = psi.amplitudes().to_vec();
    for _ in 0..n_steps {
        propagator.step(&mut amps)?;
    }
    Ok(psi.with_amplitudes(amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::{build_hamiltonian, Grid1D, Potential};

    fn free_setup(n: usize, half_width: f64, dt: f64) -> (Grid1D, BohmConfig, Observable) {
        let grid = Grid1D::new(n, -half_width, half_width).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, dt, &Potential::Free).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        (grid, cfg, h)
    }

    #[test]
    fn zero_steps_is_identity() {
        let (grid, cfg, h) = free_setup(64, 10.0, 0.01);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(evolve(&psi, &h, &cfg, 0).unwrap(), psi);
    }

    #[test]
    fn eigenstate_only_acquires_phase() {
        let grid = Grid1D::new(200, -8.0, 8.0).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, 0.01, &Potential::Harmonic { omega: 1.0, center: 0.0 }).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        let real = h.matrix().map(|z| z.re);
        let eig = real.symmetric_eigen();
        let k = (0..200).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
        let e = eig.eigenvalues[k];
        let amps: Vec<Complex64> = eig.eigenvectors.column(k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let steps = 100;
        let out = evolve(&psi, &h, &cfg, steps).unwrap();
        // Exact CN phase for an eigenvalue E: (1 − iEτ)/(1 + iEτ) per step.
        let tau = Complex64::new(0.0, cfg.dt() / 2.0);
        let phase = ((Complex64::new(1.0, 0.0) - tau * e) / (Complex64::new(1.0, 0.0) + tau * e)).powu(steps as u32);
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-8);
            assert!((a * phase - b).norm() < 1e-8);
        }
    }

    #[test]
    fn dense_and_tridiagonal_paths_agree() {
        let (grid, cfg, h) = free_setup(48, 6.0, 0.02);
        let psi = WaveFunction::gaussian(grid, 0.5, 0.8, 1.5).unwrap();
        let tri = CrankNicolson::new(&h, cfg.dt(), cfg.hbar()).unwrap();
        assert!(matches!(tri.kind, Kind::Tridiagonal { .. }));

        // Same operator with a negligible long-range coupling forces the dense path.
        let mut m = h.matrix().clone();
        m[(0, 47)] = Complex64::new(1e-300, 0.0);
        m[(47, 0)] = Complex64::new(1e-300, 0.0);
        let dense = CrankNicolson::new(&Observable::new(m).unwrap(), cfg.dt(), cfg.hbar()).unwrap();
        assert!(matches!(dense.kind, Kind::Dense { .. }));

        let mut a = psi.amplitudes().to_vec();
        let mut b = a.clone();
        for _ in 0..20 {
            tri.step(&mut a).unwrap();
            dense.step(&mut b).unwrap();
        }
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_and_energy_conserved() {
        let (grid, cfg, h) = free_setup(256, 15.0, 0.01);
        let psi = WaveFunction::gaussian(grid, -1.0, 1.0, 1.0).unwrap();
        let e0 = h.expectation(&psi.to_state()).unwrap().re;
        let out = evolve(&psi, &h, &cfg, 1000).unwrap();
        assert!((out.norm_squared().sqrt() - 1.0).abs() <= 1e-10);
        let e1 = h.expectation(&out.to_state()).unwrap().re;
        assert!((e1 - e0).abs() <= 1e-8 * e0.abs());
    }

    #[test]
    fn free_gaussian_width_law() {
        let (grid, cfg, h) = free_setup(800, 20.0, 0.005);
        let sigma0 = 1.0;
        let psi = WaveFunction::gaussian(grid, 0.0, sigma0, 0.0).unwrap();
        // σ(t) = 2σ₀ at ħt/(2mσ₀²) = √3.
        let t = 2.0 * 3f64.sqrt();
        let steps = (t / cfg.dt()).round() as usize;
        let t = steps as f64 * cfg.dt();
        let out = evolve(&psi, &h, &cfg, steps).unwrap();
        let (_, sigma) = out.position_moments();
        let expected = sigma0 * (1.0 + (t / 2.0).powi(2)).sqrt();
        assert!((sigma - expected).abs() / expected < 0.01, "sigma = {sigma}, expected {expected}");
    }

    #[test]
    fn resolution_ratio_flags_coarse_steps() {
        let (grid, _, h) = free_setup(128, 10.0, 0.01);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 3.0).unwrap();
        let fine = BohmConfig::with_potential(&grid, 1.0, 1.0, 0.01, &Potential::Free).unwrap();
        let coarse = BohmConfig::with_potential(&grid, 1.0, 1.0, 1.0, &Potential::Free).unwrap();
        assert!(resolution_ratio(&psi, &h, &fine).unwrap() < 0.5);
        assert!(resolution_ratio(&psi, &h, &coarse).unwrap() > 0.5);
    }
}
