use num_complex::Complex64;
use serde::Serialize;

use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::hilbert::{check_dim, CMatrix, CVector, Observable, SpectralDecomposition, StateVector};
use crate::quasiprob::DENSITY_FLOOR;

/// `p(x1, x2, a, b)` for a bipartite system, with `x1, x2` computational
/// basis labels of the two factors and `a, b` outcome indices of `A ⊗ I`
/// and `I ⊗ B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoParticleQp {
    dims: (usize, usize),
    outcomes: (usize, usize),
    values: Vec<Complex64>,
}

impl TwoParticleQp {
    fn index(&self, x1: usize, x2: usize, a: usize, b: usize) -> usize {
        ((x1 * self.dims.1 + x2) * self.outcomes.0 + a) * self.outcomes.1 + b
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn outcome_counts(&self) -> (usize, usize) {
        self.outcomes
    }

    pub fn get(&self, x1: usize, x2: usize, a: usize, b: usize) -> Complex64 {
        self.values[self.index(x1, x2, a, b)]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn total(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// `Σ_{a,b} p(x1,x2,a,b)`
    pub fn position_density(&self, x1: usize, x2: usize) -> Complex64 {
        let (na, nb) = self.outcomes;
        (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).map(|(a, b)| self.get(x1, x2, a, b)).sum()
    }

    /// `p(x1, a) = Σ_{x2,b} p(x1,x2,a,b)` as `[x1][a]`.
    pub fn marginal_first(&self) -> Vec<Vec<Complex64>> {
        let (d1, d2) = self.dims;
        let (na, nb) = self.outcomes;
        (0..d1)
            .map(|x1| {
                (0..na)
                    .map(|a| (0..d2).flat_map(|x2| (0..nb).map(move |b| (x2, b))).map(|(x2, b)| self.get(x1, x2, a, b)).sum())
                    .collect()
            })
            .collect()
    }

    /// `p(x2, b) = Σ_{x1,a} p(x1,x2,a,b)` as `[x2][b]`.
    pub fn marginal_second(&self) -> Vec<Vec<Complex64>> {
        let (d1, d2) = self.dims;
        let (na, nb) = self.outcomes;
        (0..d2)
            .map(|x2| {
                (0..nb)
                    .map(|b| (0..d1).flat_map(|x1| (0..na).map(move |a| (x1, a))).map(|(x1, a)| self.get(x1, x2, a, b)).sum())
                    .collect()
            })
            .collect()
    }

    /// `max |p(x1,x2,a,b) − p(x1,a)·p(x2,b)|` against the table's own
    /// marginals.
    pub fn factorization_deviation(&self) -> f64 {
        let m1 = self.marginal_first();
        let m2 = self.marginal_second();
        let mut worst = 0.0_f64;
        for (x1, row1) in m1.iter().enumerate() {
            for (x2, row2) in m2.iter().enumerate() {
                for (a, p1) in row1.iter().enumerate() {
                    for (b, p2) in row2.iter().enumerate() {
                        worst = worst.max((self.get(x1, x2, a, b) - p1 * p2).norm());
                    }
                }
            }
        }
        worst
    }
}

pub(crate) fn check_bipartite(a: &SpectralDecomposition, b: &SpectralDecomposition, dim: usize) -> Result<()> {
    check_dim(a.dim() * b.dim(), dim)
}

pub(crate) fn product_projectors(a: &SpectralDecomposition, b: &SpectralDecomposition) -> Vec<CMatrix> {
    a.projectors().iter().flat_map(|pa| b.projectors().iter().map(move |pb| pa.kronecker(pb))).collect()
}

pub(crate) fn assemble(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    mut entry: impl FnMut(usize, usize) -> Complex64,
) -> TwoParticleQp {
    let (d1, d2) = (a.dim(), b.dim());
    let (na, nb) = (a.len(), b.len());
    let mut values = Vec::with_capacity(d1 * d2 * na * nb);
    for x in 0..d1 * d2 {
        for ab in 0..na * nb {
            values.push(entry(x, ab));
        }
    }
    TwoParticleQp { dims: (d1, d2), outcomes: (na, nb), values }
}

/// `p^α(x1,x2,a,b|ψ) = ⟨ψ|E^X(x) ∘_α (E^A(a) ⊗ E^B(b))|ψ⟩`, with `E^X`
/// the joint computational-basis projector.
pub fn two_particle_joint_qp(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<TwoParticleQp> {
    check_bipartite(a, b, psi.dim())?;
    let amps = psi.amplitudes();
    let projected: Vec<CVector> = product_projectors(a, b).iter().map(|p| p * amps).collect();
    Ok(assemble(a, b, |x, ab| {
        let w = amps[x].conj() * projected[ab][x];
        alpha.mix(w, w.conj())
    }))
}

/// Alternative joint QP with separate α per particle:
/// `⟨ψ|(E^{X1}(x1) ∘_{α1} E^A(a)) ⊗ (E^{X2}(x2) ∘_{α2} E^B(b))|ψ⟩`.
///
/// Factorizes into single-particle QPs on product states, and coincides with
/// [`two_particle_joint_qp`] at `α1 = α2 = 1`.
pub fn alt_joint_qp(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    psi: &StateVector,
    alpha1: AlphaParam,
    alpha2: AlphaParam,
) -> Result<TwoParticleQp> {
    check_bipartite(a, b, psi.dim())?;
    let d2 = b.dim();
    let local = |d: &SpectralDecomposition, x: usize, k: usize, alpha: AlphaParam| -> CMatrix {
        let dim = d.dim();
        let mut ex = CMatrix::zeros(dim, dim);
        ex[(x, x)] = Complex64::new(1.0, 0.0);
        let p = d.projector(k);
        (&ex * p) * alpha.value() + (p * &ex) * alpha.complement()
    };
    let amps = psi.amplitudes();
    let nb = b.len();
    Ok(assemble(a, b, |x, ab| {
        let (x1, x2) = (x / d2, x % d2);
        let (ai, bi) = (ab / nb, ab % nb);
        let op = local(a, x1, ai, alpha1).kronecker(&local(b, x2, bi, alpha2));
        amps.dotc(&(op * amps))
    }))
}

/// Local weak value `α⟨x|A|ψ⟩/⟨x|ψ⟩ + (1−α)⟨ψ|A|x⟩/⟨ψ|x⟩`.
pub fn local_weak_value(a: &Observable, psi: &StateVector, x: usize, alpha: AlphaParam) -> Result<Complex64> {
    check_dim(a.dim(), psi.dim())?;
    if x >= psi.dim() {
        return Err(Error::InvalidInput(format!("basis index {x} out of range")));
    }
    let amp = psi.amplitudes()[x];
    if amp.norm_sqr() <= DENSITY_FLOOR {
        return Err(Error::ZeroDensityPoint { density: amp.norm_sqr() });
    }
    let forward = (a.matrix() * psi.amplitudes())[x] / amp;
    // A is Hermitian, so ⟨ψ|A|x⟩/⟨ψ|x⟩ is the conjugate of the forward ratio.
    Ok(alpha.mix(forward, forward.conj()))
}

/// Local correlation `⟨AB⟩^α(x) = Σ_{a,b} a·b·p^α(x,a,b|ψ) / p(x|ψ)` at
/// `x = (x1, x2)`.
pub fn correlation(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
    x: (usize, usize),
) -> Result<Complex64> {
    check_bipartite(a, b, psi.dim())?;
    if x.0 >= a.dim() || x.1 >= b.dim() {
        return Err(Error::InvalidInput(format!("position {x:?} out of range")));
    }
    let density = psi.amplitudes()[x.0 * b.dim() + x.1].norm_sqr();
    if density <= DENSITY_FLOOR {
        return Err(Error::ZeroDensityPoint { density });
    }
    let qp = two_particle_joint_qp(a, b, psi, alpha)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (ai, av) in a.eigenvalues().iter().enumerate() {
        for (bi, bv) in b.eigenvalues().iter().enumerate() {
            sum += qp.get(x.0, x.1, ai, bi) * (av * bv);
        }
    }
    Ok(sum / density)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpistemicOverlap {
    pub ontic: usize,
    pub overlap: f64,
}

/// `max_λ |p(λ|ψ)·p(λ|φ)|`; positive means the two epistemic states share
/// support, i.e. the model is ψ-epistemic on this pair.
pub fn psi_epistemic_witness(p: &[Complex64], q: &[Complex64]) -> Result<EpistemicOverlap> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch { expected: p.len(), found: q.len() });
    }
    if p.is_empty() {
        return Err(Error::InvalidInput("empty epistemic state".into()));
    }
    let (ontic, overlap) = p
        .iter()
        .zip(q)
        .map(|(x, y)| (x * y).norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(EpistemicOverlap { ontic, overlap })
}
