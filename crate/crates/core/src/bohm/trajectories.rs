use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::evolve::{resolution_ratio, CrankNicolson};
use super::fields::{velocity_field, VelocityField};
use super::{BohmConfig, Grid1D, WaveFunction};
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, Observable};

/// Bohmian trajectories `x_k(t_j)` sharing one time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub times: Vec<f64>,
    /// One trajectory per start point, each with `times.len()` positions.
    pub positions: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    /// `ψ` at the last time.
    pub final_state: WaveFunction,
}

impl TrajectoryEnsemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn initial_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|p| p[0]).collect()
    }

    pub fn final_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|p| *p.last().expect("non-empty trajectory")).collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// 1D trajectories cannot cross: the final order must equal the initial order.
    pub fn ordering_preserved(&self) -> bool {
        let order = |xs: Vec<f64>| {
            let mut idx: Vec<usize> = (0..xs.len()).collect();
            idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
            idx
        };
        order(self.initial_positions()) == order(self.final_positions())
    }
}

/// Cell `j` covers `[x_j − dx/2, x_j + dx/2]` clipped to the grid.
fn cell_bounds(grid: &Grid1D, j: usize) -> (f64, f64) {
    let half = 0.5 * grid.dx();
    let x = grid.x(j);
    ((x - half).max(grid.x_min()), (x + half).min(grid.x_max()))
}

/// Normalized cumulative cell weights of `|ψ|²`.
fn cell_cdf(psi: &WaveFunction) -> Vec<f64> {
    let grid = psi.grid();
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = psi
        .density()
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let (lo, hi) = cell_bounds(grid, j);
            acc += d * (hi - lo);
            acc
        })
        .collect();
    let total = acc;
    cdf.iter_mut().for_each(|c| *c /= total);
    cdf
}

/// The piecewise-linear CDF the samples are drawn from.
fn density_cdf_at(psi: &WaveFunction, cdf: &[f64], x: f64) -> f64 {
    let grid = psi.grid();
    if x <= grid.x_min() {
        return 0.0;
    }
    if x >= grid.x_max() {
        return 1.0;
    }
    let j = (((x - grid.x_min()) / grid.dx()) + 0.5).floor() as usize;
    let j = j.min(grid.n_points() - 1);
    let (lo, hi) = cell_bounds(grid, j);
    let before = if j == 0 { 0.0 } else { cdf[j - 1] };
    let frac = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    before + frac * (cdf[j] - before)
}

/// Draws positions from `|ψ|²` by inverse CDF over grid cells with uniform
/// jitter inside the chosen cell.
///
/// Sample `k` uses its own ChaCha stream `(seed, k)`, so the output does not
/// depend on how the work is scheduled.
pub fn sample_initial_positions(psi: &WaveFunction, m_samples: usize, seed: u64) -> Result<Vec<f64>> {
    if m_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let cdf = cell_cdf(psi);
    let grid = *psi.grid();
    Ok((0..m_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let u: f64 = rng.random();
            let j = cdf.partition_point(|&c| c < u).min(grid.n_points() - 1);
            let (lo, hi) = cell_bounds(&grid, j);
            lo + rng.random::<f64>() * (hi - lo)
        })
        .collect())
}

/// Velocity at `x` and time `t_j + θ·dt` (θ ∈ [0, 1]) from linear
/// interpolation between the snapshots at `t_j` and `t_{j+1}`.
fn velocity_between(fields: &[VelocityField], j: usize, theta: f64, x: f64) -> Option<f64> {
    let a = fields[j].at(x)?;
    if theta == 0.0 {
        return Some(a);
    }
    let b = fields[j + 1].at(x)?;
    Some(a + theta * (b - a))
}

/// Integrates `dx/dt = v(ψ_t, x)` for each start point with RK4, advancing
/// `ψ_t` by Crank–Nicolson in lockstep.
pub fn integrate_trajectories(
    psi0: &WaveFunction,
    h: &Observable,
    cfg: &BohmConfig,
    starts: &[f64],
    t_final: f64,
) -> Result<TrajectoryEnsemble> {
    check_dim(h.dim(), psi0.amplitudes().len())?;
    if starts.is_empty() {
        return Err(Error::InvalidInput("need at least one start point".into()));
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidInput(format!("t_final must be non-negative, got {t_final}")));
    }
    let dt = cfg.dt();
    let n_steps = (t_final / dt).round() as usize;
    if (n_steps as f64 * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::InvalidInput(format!("t_final = {t_final} is not a multiple of dt = {dt}")));
    }
    let grid = psi0.grid();
    if let Some(&x) = starts.iter().find(|&&x| !grid.contains(x)) {
        return Err(Error::InvalidInput(format!("start point {x} outside the grid")));
    }
    let ratio = resolution_ratio(psi0, h, cfg)?;
    if ratio > 0.5 {
        log::warn!("dt * E/hbar = {ratio:.3} > 0.5: time step may not resolve the dynamics");
    }

    // Velocity snapshots at t_0 … t_N, shared read-only by all trajectories.
    let propagator = CrankNicolson::new(h, dt, cfg.hbar())?;
    let mut amps = psi0.amplitudes().to_vec();
    let mut fields = Vec::with_capacity(n_steps + 1);
    fields.push(velocity_field(psi0, cfg));
    for _ in 0..n_steps {
        propagator.step(&mut amps)?;
        fields.push(velocity_field(&psi0.with_amplitudes(amps.clone()), cfg));
    }
    let final_state = psi0.with_amplitudes(amps);
    let times: Vec<f64> = (0..=n_steps).map(|j| j as f64 * dt).collect();

    let positions = starts
        .par_iter()
        .enumerate()
        .map(|(k, &x0)| {
            let node = |time: f64, position: f64| Error::NodeEncounter { trajectory: k, time, position };
            let mut path = Vec::with_capacity(n_steps + 1);
            let mut x = x0;
            path.push(x);
            for (j, &t) in times.iter().enumerate().take(n_steps) {
                let k1 = velocity_between(&fields, j, 0.0, x).ok_or_else(|| node(t, x))?;
                let x2 = x + 0.5 * dt * k1;
                let k2 = velocity_between(&fields, j, 0.5, x2).ok_or_else(|| node(t + 0.5 * dt, x2))?;
                let x3 = x + 0.5 * dt * k2;
                let k3 = velocity_between(&fields, j, 0.5, x3).ok_or_else(|| node(t + 0.5 * dt, x3))?;
                let x4 = x + dt * k3;
                let k4 = velocity_between(&fields, j, 1.0, x4).ok_or_else(|| node(t + dt, x4))?;
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if !grid.contains(x) {
                    return Err(node(t + dt, x));
                }
                path.push(x);
            }
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(TrajectoryEnsemble { times, positions, seed: None, final_state })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of the final
/// positions and the CDF of `|ψ_t|² dx`.
pub fn equivariance_check(ensemble: &TrajectoryEnsemble, psi_t: &WaveFunction) -> f64 {
    let mut xs = ensemble.final_positions();
    xs.sort_by(f64::total_cmp);
    let cdf = cell_cdf(psi_t);
    let m = xs.len() as f64;
    xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = density_cdf_at(psi_t, &cdf, x);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::{build_hamiltonian, Potential};
    use num_complex::Complex64;

    fn free(n: usize, half: f64, dt: f64) -> (Grid1D, BohmConfig, Observable) {
        let grid = Grid1D::new(n, -half, half).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, dt, &Potential::Free).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        (grid, cfg, h)
    }

    #[test]
    fn sampling_is_deterministic_and_centered() {
        let grid = Grid1D::new(512, -10.0, 10.0).unwrap();
        let psi = WaveFunction::gaussian(grid, 1.0, 1.0, 0.0).unwrap();
        let a = sample_initial_positions(&psi, 100_000, 7).unwrap();
        let b = sample_initial_positions(&psi, 100_000, 7).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        assert!((mean - 1.0).abs() < 4.0 / (a.len() as f64).sqrt(), "mean {mean}");
        assert!(a.iter().all(|&x| grid.contains(x)));
        assert_ne!(a, sample_initial_positions(&psi, 100_000, 8).unwrap());
    }

    #[test]
    fn concentrated_state_samples_one_cell() {
        let grid = Grid1D::new(32, 0.0, 31.0).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[12] = Complex64::new(1.0, 0.0);
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let xs = sample_initial_positions(&psi, 1000, 1).unwrap();
        assert!(xs.iter().all(|&x| (11.5..=12.5).contains(&x)));
        assert!(sample_initial_positions(&psi, 0, 1).is_err());
    }

    #[test]
    fn stationary_real_state_has_constant_trajectories() {
        let grid = Grid1D::new(128, -8.0, 8.0).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, 0.01, &Potential::Harmonic { omega: 1.0, center: 0.0 }).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        let real = h.matrix().map(|z| z.re);
        let eig = real.symmetric_eigen();
        let k = (0..128).min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
        let amps = eig.eigenvectors.column(k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let starts = [-1.0, -0.3, 0.0, 0.7, 1.5];
        let ens = integrate_trajectories(&psi, &h, &cfg, &starts, 1.0).unwrap();
        for (path, &x0) in ens.positions.iter().zip(&starts) {
            assert_eq!(path.len(), 101);
            assert!(path.iter().all(|&x| (x - x0).abs() < 1e-10));
        }
    }

    #[test]
    fn free_gaussian_trajectories_scale_with_width() {
        let (grid, cfg, h) = free(800, 20.0, 0.005);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
        let t = 2.0 * 3f64.sqrt();
        let steps = (t / cfg.dt()).round() as usize;
        let t = steps as f64 * cfg.dt();
        let starts = [-2.0, -1.0, -0.25, 0.5, 1.0, 1.8];
        let ens = integrate_trajectories(&psi, &h, &cfg, &starts, t).unwrap();
        let ratio = (1.0 + (t / 2.0).powi(2)).sqrt();
        for (&x0, x1) in starts.iter().zip(ens.final_positions()) {
            let expected = x0 * ratio;
            assert!((x1 - expected).abs() / expected.abs() < 0.01, "x0 {x0}: {x1} vs {expected}");
        }
        assert!(ens.ordering_preserved());
    }

    #[test]
    fn t_final_must_be_multiple_of_dt() {
        let (grid, cfg, h) = free(64, 10.0, 0.1);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
        assert!(integrate_trajectories(&psi, &h, &cfg, &[0.0], 0.25).is_err());
        assert!(integrate_trajectories(&psi, &h, &cfg, &[], 0.2).is_err());
        assert!(integrate_trajectories(&psi, &h, &cfg, &[11.0], 0.2).is_err());
    }

    #[test]
    fn node_encounter_is_reported() {
        let grid = Grid1D::new(64, -1.0, 1.0).unwrap();
        let cfg = BohmConfig::with_potential(&grid, 1.0, 1.0, 0.001, &Potential::Free).unwrap();
        let h = build_hamiltonian(&grid, &cfg).unwrap();
        // Nonzero only on the left half; starting on the right lands on nodes.
        let amps = (0..64)
            .map(|j| if j < 20 { Complex64::from_polar(1.0, j as f64) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let psi = WaveFunction::normalized(grid, amps).unwrap();
        let err = integrate_trajectories(&psi, &h, &cfg, &[-0.9, 0.5], 0.001).unwrap_err();
        assert!(matches!(err, Error::NodeEncounter { trajectory: 1, .. }), "{err:?}");
    }

    #[test]
    fn equivariance_at_time_zero() {
        let (grid, cfg, h) = free(512, 15.0, 0.01);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 0.5).unwrap();
        let m = 10_000;
        let starts = sample_initial_positions(&psi, m, 3).unwrap();
        let ens = integrate_trajectories(&psi, &h, &cfg, &starts, 0.0).unwrap();
        let ks = equivariance_check(&ens, &psi);
        assert!(ks < 1.63 / (m as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn random_starts_keep_order() {
        let (grid, cfg, h) = free(400, 15.0, 0.01);
        let psi = WaveFunction::gaussian(grid, 0.0, 1.0, 1.0).unwrap();
        let starts = sample_initial_positions(&psi, 100, 99).unwrap();
        let ens = integrate_trajectories(&psi, &h, &cfg, &starts, 2.0).unwrap().with_seed(99);
        assert!(ens.ordering_preserved());
        assert_eq!(ens.seed, Some(99));
    }
}
