//! Seeded random instances for property sweeps.
//!
//! Entries are standard-normal real and imaginary parts; states are
//! normalized Gaussian vectors (Haar-distributed) and Hermitian matrices are
//! `(M + M†)/2` of a Gaussian `M`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::alpha::AlphaParam;
use crate::hilbert::{CMatrix, CVector, DensityOperator, Observable, StateVector};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng))
}

pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        if let Ok(psi) = StateVector::normalized(v) {
            return psi;
        }
    }
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let m = matrix(rng, dim);
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    // Symmetrize exactly: take the upper triangle and mirror it.
    let h = CMatrix::from_fn(dim, dim, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Less => h[(r, c)],
        std::cmp::Ordering::Equal => Complex64::new(h[(r, c)].re, 0.0),
        std::cmp::Ordering::Greater => h[(c, r)].conj(),
    });
    Observable::new(h).expect("symmetrized matrix is Hermitian")
}

/// Complex α with both parts uniform in `[-2, 2]`.
pub fn alpha<R: Rng + ?Sized>(rng: &mut R) -> AlphaParam {
    AlphaParam::from_parts(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)).unwrap()
}

/// Random density operator of the given rank (`1 ≤ rank ≤ dim`).
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    assert!(rank >= 1 && rank <= dim, "rank must be in 1..=dim");
    let g = CMatrix::from_fn(dim, rank, |_, _| gaussian_complex(rng));
    let mut rho = &g * g.adjoint();
    let trace = rho.trace().re;
    rho.unscale_mut(trace);
    let rho = CMatrix::from_fn(dim, dim, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Less => rho[(r, c)],
        std::cmp::Ordering::Equal => Complex64::new(rho[(r, c)].re, 0.0),
        std::cmp::Ordering::Greater => rho[(c, r)].conj(),
    });
    DensityOperator::new(rho).expect("Wishart matrix is a valid density operator")
}
