use num_complex::Complex64;

use super::{BohmConfig, Grid1D, WaveFunction};
use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, CVector, Observable};

/// Guiding-equation velocity `(ħ/m) Im(ψ′/ψ)`; `None` at nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub grid: Grid1D,
    pub values: Vec<Option<f64>>,
}

impl VelocityField {
    /// Linear interpolation between neighbouring grid points; `None` outside
    /// the grid or when either neighbour is a node.
    pub fn at(&self, x: f64) -> Option<f64> {
        let grid = &self.grid;
        if !grid.contains(x) {
            return None;
        }
        let s = (x - grid.x_min()) / grid.dx();
        let i = (s.floor() as usize).min(grid.n_points() - 2);
        let frac = s - i as f64;
        let left = self.values[i]?;
        let right = self.values[i + 1]?;
        Some(left + frac * (right - left))
    }
}

/// Centered-difference `ψ′` with zero ghost points beyond the walls.
fn centered_derivative(psi: &WaveFunction) -> Vec<Complex64> {
    let amps = psi.amplitudes();
    let n = amps.len();
    let inv = 1.0 / (2.0 * psi.grid().dx());
    let zero = Complex64::new(0.0, 0.0);
    (0..n)
        .map(|j| {
            let right = if j + 1 < n { amps[j + 1] } else { zero };
            let left = if j > 0 { amps[j - 1] } else { zero };
            (right - left) * inv
        })
        .collect()
}

pub fn velocity_field(psi: &WaveFunction, cfg: &BohmConfig) -> VelocityField {
    let derivative = centered_derivative(psi);
    let nodes = psi.node_mask();
    let scale = cfg.hbar() / cfg.mass();
    let values = psi
        .amplitudes()
        .iter()
        .zip(&derivative)
        .zip(&nodes)
        .map(|((p, d), &node)| (!node).then(|| scale * (d / p).im))
        .collect();
    VelocityField { grid: *psi.grid(), values }
}

/// Local value `⟨A⟩^α_ψ(x)` of an observable at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    pub grid: Grid1D,
    /// `None` where `|ψ(x)|²` is below the node floor.
    pub values: Vec<Option<Complex64>>,
    pub alpha: AlphaParam,
    pub observable_tag: String,
}

impl ValueField {
    pub fn tagged(mut self, tag: impl Into<String>) -> Self {
        self.observable_tag = tag.into();
        self
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }
}

/// `⟨A⟩^α_ψ(x) = α⟨x|A|ψ⟩/⟨x|ψ⟩ + (1−α)⟨ψ|A|x⟩/⟨ψ|x⟩`.
///
/// At `α = ½` this is the real local expectation value
/// `Re ⟨x|A|ψ⟩/⟨x|ψ⟩`.
pub fn local_value(a: &Observable, psi: &WaveFunction, alpha: AlphaParam) -> Result<ValueField> {
    let n = psi.amplitudes().len();
    check_dim(a.dim(), n)?;
    let amps = CVector::from_column_slice(psi.amplitudes());
    let forward_num = a.matrix() * &amps;
    // ⟨ψ|A|x⟩ = conj((A†ψ)(x))
    let reverse_num = a.matrix().ad_mul(&amps);
    let nodes = psi.node_mask();
    let values = (0..n)
        .map(|j| {
            (!nodes[j]).then(|| {
                let p = amps[j];
                alpha.mix(forward_num[j] / p, (reverse_num[j] / p).conj())
            })
        })
        .collect();
    Ok(ValueField { grid: *psi.grid(), values, alpha, observable_tag: "custom".into() })
}

/// `dx · Σ ⟨A⟩^α_ψ(x) |ψ(x)|²` over the defined points; nodes carry no weight.
pub fn ensemble_average(field: &ValueField, psi: &WaveFunction) -> Result<Complex64> {
    if field.grid != *psi.grid() || field.values.len() != psi.amplitudes().len() {
        return Err(Error::GridMismatch);
    }
    let dx = psi.grid().dx();
    Ok(field
        .values
        .iter()
        .zip(psi.amplitudes())
        .filter_map(|(v, p)| v.map(|v| v * p.norm_sqr()))
        .sum::<Complex64>()
        * dx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::{build_hamiltonian, momentum_operator, position_operator, Potential};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(grid: &Grid1D) -> BohmConfig {
        BohmConfig::with_potential(grid, 1.0, 1.0, 0.01, &Potential::Free).unwrap()
    }

    #[test]
    fn real_wavefunction_has_zero_velocity() {
        let grid = Grid1D::new(128, -10.0, 10.0).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.0, 1.5, 0.0).unwrap();
        let v = velocity_field(&psi, &cfg(&grid));
        assert!(v.values.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn carrier_shifts_velocity_uniformly() {
        // Fine grid: centered differences are accurate to O(dx²).
        let grid = Grid1D::new(10001, -10.0, 10.0).unwrap();
        let (hbar, mass, k) = (1.0, 2.0, 0.5);
        let cfg = BohmConfig::new(hbar, mass, 0.01, vec![0.0; grid.n_points()]).unwrap();
        let sigma = 1.0;
        let base = WaveFunction::gaussian(grid, 0.0, sigma, 0.0).unwrap();
        let moving = WaveFunction::gaussian(grid, 0.0, sigma, k).unwrap();
        let v0 = velocity_field(&base, &cfg);
        let v1 = velocity_field(&moving, &cfg);
        for i in 0..grid.n_points() {
            if grid.x(i).abs() > 2.0 * sigma {
                continue;
            }
            let shift = v1.values[i].unwrap() - v0.values[i].unwrap();
            assert!((shift - hbar * k / mass).abs() < 1e-6, "shift {shift} at x = {}", grid.x(i));
        }
    }

    #[test]
    fn nodes_are_flagged() {
        let grid = Grid1D::new(64, -1.0, 1.0).unwrap();
        let mut amps = vec![Complex64::new(1.0, 0.0); 64];
        amps[10] = Complex64::new(0.0, 0.0);
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let v = velocity_field(&psi, &cfg(&grid));
        assert!(v.values[10].is_none());
        assert!(v.values[11].is_some());
        assert!(v.at(grid.x(10) + 0.3 * grid.dx()).is_none());
        assert!(v.at(grid.x(30) + 0.3 * grid.dx()).is_some());
        assert!(v.at(5.0).is_none());

        let x = position_operator(&grid);
        let field = local_value(&x, &psi, AlphaParam::HALF).unwrap();
        assert!(field.values[10].is_none());
        assert_eq!(field.defined_count(), 63);
    }

    #[test]
    fn position_local_value_is_x() {
        let grid = Grid1D::new(64, -5.0, 5.0).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.3, 2.0, 1.1).unwrap();
        let x = position_operator(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let field = local_value(&x, &psi, random::alpha(&mut rng)).unwrap();
            for (i, v) in field.values.iter().enumerate() {
                assert!((v.unwrap() - Complex64::new(grid.x(i), 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn momentum_local_value_matches_guiding_velocity() {
        let grid = Grid1D::new(256, -10.0, 10.0).unwrap();
        let (hbar, mass) = (0.7, 1.9);
        let cfg = BohmConfig::new(hbar, mass, 0.01, vec![0.0; 256]).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.5, 1.5, 2.0).unwrap();
        let p = momentum_operator(&grid, hbar);
        let field = local_value(&p, &psi, AlphaParam::HALF).unwrap();
        let v = velocity_field(&psi, &cfg);
        for (f, v) in field.values.iter().zip(&v.values) {
            match (f, v) {
                (Some(f), Some(v)) => {
                    assert!(f.im.abs() < 1e-12);
                    assert!((f.re - mass * v).abs() < 1e-9 * (1.0 + f.re.abs()));
                }
                (None, None) => {}
                _ => panic!("node masks differ"),
            }
        }
    }

    #[test]
    fn eigenstate_energy_field_is_constant() {
        let grid = Grid1D::new(120, -6.0, 6.0).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, 0.01, &Potential::Harmonic { omega: 1.0, center: 0.0 }).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        let real = h.matrix().map(|z| z.re);
        let eig = real.symmetric_eigen();
        let k = (0..120).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
        let amps = eig.eigenvectors.column(k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let field = local_value(&h, &psi, random::alpha(&mut rng)).unwrap();
        for v in field.values.iter().flatten() {
            assert!((v - Complex64::new(eig.eigenvalues[k], 0.0)).norm() < 1e-6 * (1.0 + eig.eigenvalues[k].abs()));
        }
    }

    #[test]
    fn ensemble_average_examples() {
        let grid = Grid1D::new(256, -10.0, 10.0).unwrap();
        let x0 = 1.25;
        let k = 0.8;
        let hbar = 1.0;
        let psi = WaveFunction::gaussian(grid, x0, 1.0, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alpha = random::alpha(&mut rng);
        let x = local_value(&position_operator(&grid), &psi, alpha).unwrap();
        assert!((ensemble_average(&x, &psi).unwrap() - Complex64::new(x0, 0.0)).norm() < 1e-6);

        // The centered stencil measures ħ sin(k dx)/dx for a pure carrier; on
        // this grid that is within 1e-6 of ħk only for a finer mesh, so compare
        // against ⟨ψ|P|ψ⟩ exactly and against ħk loosely.
        let p = momentum_operator(&grid, hbar);
        let field = local_value(&p, &psi, alpha).unwrap();
        let avg = ensemble_average(&field, &psi).unwrap();
        let exact = p.expectation(&psi.to_state()).unwrap();
        assert!((avg - exact).norm() < 1e-10);
        assert!((avg.re - hbar * k).abs() < 1e-2);

        let other = Grid1D::new(255, -10.0, 10.0).unwrap();
        let psi2 = WaveFunction::gaussian(other, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(ensemble_average(&field, &psi2), Err(Error::GridMismatch)));
    }

    #[test]
    fn carrier_momentum_average_matches_hbar_k() {
        // For a real envelope the centered stencil gives
        // ⟨P⟩ ≈ ħk (1 − k²dx²/6)(1 − dx²/(8σ²)); with k = 0.1, dx = 0.008
        // the error is below 1e-6.
        let grid = Grid1D::new(2001, -8.0, 8.0).unwrap();
        let (hbar, k) = (1.0, 0.1);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, k).unwrap();
        let p = momentum_operator(&grid, hbar);
        let field = local_value(&p, &psi, AlphaParam::from_parts(0.3, -0.9).unwrap()).unwrap();
        let avg = ensemble_average(&field, &psi).unwrap();
        assert!((avg - Complex64::new(hbar * k, 0.0)).norm() < 1e-6, "avg = {avg}");
    }

    #[test]
    fn random_observable_average_is_alpha_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = Grid1D::new(16, -1.0, 1.0).unwrap();
        let a = random::hermitian(&mut rng, 16);
        let psi = WaveFunction::from_state(grid, &random::state(&mut rng, 16)).unwrap();
        let exact = a.expectation(&psi.to_state()).unwrap();
        for _ in 0..10 {
            let field = local_value(&a, &psi, random::alpha(&mut rng)).unwrap();
            assert!((ensemble_average(&field, &psi).unwrap() - exact).norm() < 1e-10);
        }
        let half = local_value(&a, &psi, AlphaParam::HALF).unwrap();
        assert!(half.values.iter().flatten().all(|v| v.im.abs() < 1e-12));
    }
}
