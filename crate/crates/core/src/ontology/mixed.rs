//! Mixed-state versions of the joint forms, `Tr[(X ∘_α Y) ρ]`.

use num_complex::Complex64;

use super::bipartite::{assemble, check_bipartite, product_projectors, TwoParticleQp};
use crate::alpha::AlphaParam;
use crate::error::Result;
use crate::hilbert::{check_dim, CMatrix, DensityOperator, SpectralDecomposition};
use crate::quasiprob::{joint_from_values, marginalize_reference, QpDistribution};

/// `Tr[X Y ρ]` without forming the product matrix.
fn trace_of_product(x: &CMatrix, y: &CMatrix, rho: &CMatrix) -> Complex64 {
    let yr = y * rho;
    let n = x.nrows();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            sum += x[(i, k)] * yr[(k, i)];
        }
    }
    sum
}

/// `p^α(b,a|ρ) = Tr[(E^B(b) ∘_α E^A(a)) ρ]`, reference-major.
pub fn joint_qp_mixed(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    rho: &DensityOperator,
    alpha: AlphaParam,
) -> Result<QpDistribution> {
    check_dim(b.dim(), rho.dim())?;
    check_dim(a.dim(), rho.dim())?;
    let mut values = Vec::with_capacity(b.len() * a.len());
    for pb in b.projectors() {
        for pa in a.projectors() {
            // Tr[E_a E_b ρ] is the conjugate of Tr[E_b E_a ρ] for Hermitian ρ.
            let w = trace_of_product(pb, pa, rho.matrix());
            values.push(alpha.mix(w, w.conj()));
        }
    }
    Ok(joint_from_values(b, a, values, alpha, "density operator rho, reference observable B"))
}

/// `p^α(a|ρ) = Σ_b p^α(b,a|ρ)`
pub fn marginal_qp_mixed(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    rho: &DensityOperator,
    alpha: AlphaParam,
) -> Result<QpDistribution> {
    let joint = joint_qp_mixed(b, a, rho, alpha)?;
    Ok(marginalize_reference(&joint, a, "density operator rho, reference observable B summed out"))
}

/// `Tr[(E^X(x) ∘_α (E^A(a) ⊗ E^B(b))) ρ]`
pub fn two_particle_joint_qp_mixed(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    rho: &DensityOperator,
    alpha: AlphaParam,
) -> Result<TwoParticleQp> {
    check_bipartite(a, b, rho.dim())?;
    let r = rho.matrix();
    // Tr[E^X(x) E ρ] = (E ρ)_{xx}
    let diagonals: Vec<Vec<Complex64>> = product_projectors(a, b)
        .iter()
        .map(|e| {
            let er = e * r;
            (0..r.nrows()).map(|x| er[(x, x)]).collect()
        })
        .collect();
    Ok(assemble(a, b, |x, ab| {
        let w = diagonals[ab][x];
        alpha.mix(w, w.conj())
    }))
}
