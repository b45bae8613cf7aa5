//! Weak values and α-parameterized quasiprobability (QP) distributions.
//!
//! For a transition `ψ → φ` the conditional QP of the outcome `a` of `A` is
//!
//! ```text
//! p^α(a|ψ,φ) = α ⟨φ|E(a)|ψ⟩/⟨φ|ψ⟩ + (1−α) ⟨ψ|E(a)|φ⟩/⟨ψ|φ⟩
//! ```
//!
//! and the joint QP with a reference observable `B` is
//! `p^α(b,a|ψ) = ⟨ψ|E^B(b) ∘_α E^A(a)|ψ⟩`. Summing the joint QP over `b`
//! gives the Born probabilities of `A` for every α.
//!
//! All outcome lists are in ascending eigenvalue order.

use num_complex::Complex64;
use serde::Serialize;

use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, hermiticity_defect, idempotency_defect, projector_onto, CMatrix, CVector, Observable,
    SpectralDecomposition, StateVector, PROJECTOR_TOL,
};

/// `|⟨φ|ψ⟩|` at or below this (times the norms, which are 1) is treated as
/// orthogonal.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// Reference outcomes with `⟨ψ|E^B(b)|ψ⟩` at or below this are skipped when
/// dividing by them.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QpKind {
    Conditional,
    Joint,
    Marginal,
}

impl QpKind {
    pub fn name(self) -> &'static str {
        match self {
            QpKind::Conditional => "conditional",
            QpKind::Joint => "joint",
            QpKind::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum OutcomeLabel {
    Single(f64),
    /// `(b, a)`: reference outcome first.
    Pair { b: f64, a: f64 },
}

/// A complex-valued distribution over outcome labels.
///
/// Joint distributions are stored reference-major: index `bi * n_a + ai`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QpDistribution {
    kind: QpKind,
    outcomes: Vec<OutcomeLabel>,
    values: Vec<Complex64>,
    alpha: AlphaParam,
    context: String,
    #[serde(skip)]
    shape: (usize, usize),
}

impl QpDistribution {
    pub fn kind(&self) -> QpKind {
        self.kind
    }

    pub fn outcomes(&self) -> &[OutcomeLabel] {
        &self.outcomes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn alpha(&self) -> AlphaParam {
        self.alpha
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(n_b, n_a)` for joint distributions, `(1, n)` otherwise.
    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Joint value `p(b_bi, a_ai)`; for other kinds `bi` must be 0.
    pub fn get(&self, bi: usize, ai: usize) -> Complex64 {
        assert!(bi < self.shape.0 && ai < self.shape.1, "index out of range");
        self.values[bi * self.shape.1 + ai]
    }

    pub fn total(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// `|Σ values − 1|`
    pub fn normalization_defect(&self) -> f64 {
        (self.total() - Complex64::new(1.0, 0.0)).norm()
    }

    /// Largest `|Im|` among the values.
    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Real parts of the values.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// `⟨φ|ψ⟩`, rejecting (near-)orthogonal pairs.
fn transition_amplitude(psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    let overlap = phi.inner(psi)?;
    if overlap.norm() <= OVERLAP_FLOOR {
        return Err(Error::OrthogonalPrePost { overlap: overlap.norm() });
    }
    Ok(overlap)
}

/// `α ⟨φ|X|ψ⟩/⟨φ|ψ⟩ + (1−α) ⟨ψ|X|φ⟩/⟨ψ|φ⟩` for an arbitrary operator `X`.
fn mixed_weak_value(x: &CMatrix, psi: &StateVector, phi: &StateVector, alpha: AlphaParam) -> Result<Complex64> {
    check_dim(psi.dim(), x.nrows())?;
    let overlap = transition_amplitude(psi, phi)?;
    let forward = phi.amplitudes().dotc(&(x * psi.amplitudes())) / overlap;
    let reverse = psi.amplitudes().dotc(&(x * phi.amplitudes())) / overlap.conj();
    Ok(alpha.mix(forward, reverse))
}

/// Weak value `A_w = ⟨φ|A|ψ⟩/⟨φ|ψ⟩` for pre-selection `ψ` and post-selection `φ`.
pub fn weak_value(a: &Observable, psi: &StateVector, phi: &StateVector) -> Result<Complex64> {
    check_dim(a.dim(), psi.dim())?;
    check_dim(a.dim(), phi.dim())?;
    mixed_weak_value(a.matrix(), psi, phi, AlphaParam::ONE)
}

/// Conditional QP `p^α(a|ψ,φ)`, one value per distinct eigenvalue of `A`.
pub fn conditional_qp(
    a: &SpectralDecomposition,
    psi: &StateVector,
    phi: &StateVector,
    alpha: AlphaParam,
) -> Result<QpDistribution> {
    check_dim(a.dim(), psi.dim())?;
    check_dim(a.dim(), phi.dim())?;
    let overlap = transition_amplitude(psi, phi)?;
    let values = a
        .projectors()
        .iter()
        .map(|p| {
            let forward = phi.amplitudes().dotc(&(p * psi.amplitudes())) / overlap;
            let reverse = psi.amplitudes().dotc(&(p * phi.amplitudes())) / overlap.conj();
            alpha.mix(forward, reverse)
        })
        .collect();
    Ok(QpDistribution {
        kind: QpKind::Conditional,
        outcomes: a.eigenvalues().iter().map(|&v| OutcomeLabel::Single(v)).collect(),
        values,
        alpha,
        context: "pre-selected psi, post-selected phi".into(),
        shape: (1, a.len()),
    })
}

/// `Σ a·p(a)` of a conditional QP; equals the weak value at `α = 1`.
pub fn weak_value_from_qp(qp: &QpDistribution) -> Result<Complex64> {
    if qp.kind != QpKind::Conditional {
        return Err(Error::WrongKind { expected: "conditional", found: qp.kind.name() });
    }
    Ok(qp
        .outcomes
        .iter()
        .zip(&qp.values)
        .map(|(label, p)| match label {
            OutcomeLabel::Single(a) => p * *a,
            OutcomeLabel::Pair { .. } => unreachable!("conditional QPs carry single labels"),
        })
        .sum())
}

/// The linear functional `f_{ψ,φ}(P) = α⟨φ|P|ψ⟩/⟨φ|ψ⟩ + (1−α)⟨ψ|P|φ⟩/⟨ψ|φ⟩`
/// on projectors.
pub fn morita_form(p: &CMatrix, psi: &StateVector, phi: &StateVector, alpha: AlphaParam) -> Result<Complex64> {
    check_dim(psi.dim(), p.nrows())?;
    check_dim(psi.dim(), p.ncols())?;
    let deviation = idempotency_defect(p).max(hermiticity_defect(p));
    if deviation > PROJECTOR_TOL {
        return Err(Error::NotProjector { deviation });
    }
    mixed_weak_value(p, psi, phi, alpha)
}

/// Outcome of [`check_morita_conditions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoritaReport {
    /// `max |f(Σ_{i∈S} Pᵢ) − Σ_{i∈S} f(Pᵢ)|` over prefix sums `S`.
    pub additivity_deviation: f64,
    /// `f(P_ψ), f(P_ψ⊥), f(P_φ), f(P_φ⊥)`, expected `1, 0, 1, 0`.
    pub boundary_values: [Complex64; 4],
    pub boundary_deviation: f64,
    /// `dim ≥ 3`, the dimension for which the form is characterized by C1/C2.
    pub dimension_hypothesis: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Verifies additivity over orthogonal projectors (C1) and the boundary
/// values `f(P_ψ) = f(P_φ) = 1`, `f(P_ψ⊥) = f(P_φ⊥) = 0` (C2) for the form
/// of [`morita_form`].
pub fn check_morita_conditions(
    psi: &StateVector,
    phi: &StateVector,
    alpha: AlphaParam,
    decomposition: &SpectralDecomposition,
) -> MoritaReport {
    const TOL: f64 = 1e-10;
    let mut failures = Vec::new();
    let dimension_hypothesis = psi.dim() >= 3;
    if !dimension_hypothesis {
        failures.push(format!("dim {} < 3", psi.dim()));
    }

    let mut additivity_deviation = 0.0_f64;
    let mut boundary_values = [Complex64::new(f64::NAN, f64::NAN); 4];
    let mut boundary_deviation = f64::NAN;

    let run = || -> Result<(f64, [Complex64; 4])> {
        let dim = decomposition.dim();
        let mut partial = CMatrix::zeros(dim, dim);
        let mut partial_sum = Complex64::new(0.0, 0.0);
        let mut worst = 0.0_f64;
        for p in decomposition.projectors() {
            partial += p;
            partial_sum += morita_form(p, psi, phi, alpha)?;
            let joint = morita_form(&partial, psi, phi, alpha)?;
            worst = worst.max((joint - partial_sum).norm());
        }
        let psi_perp = psi.orthogonal_complement_vector()?;
        let phi_perp = phi.orthogonal_complement_vector()?;
        let values = [
            morita_form(&projector_onto(psi), psi, phi, alpha)?,
            morita_form(&projector_onto(&psi_perp), psi, phi, alpha)?,
            morita_form(&projector_onto(phi), psi, phi, alpha)?,
            morita_form(&projector_onto(&phi_perp), psi, phi, alpha)?,
        ];
        Ok((worst, values))
    };

    match run() {
        Ok((worst, values)) => {
            additivity_deviation = worst;
            let expected = [1.0, 0.0, 1.0, 0.0];
            boundary_deviation = values
                .iter()
                .zip(expected)
                .fold(0.0, |m, (v, e)| m.max((v - Complex64::new(e, 0.0)).norm()));
            boundary_values = values;
            if additivity_deviation > TOL {
                failures.push(format!("C1 additivity deviation {additivity_deviation:e}"));
            }
            if boundary_deviation > TOL {
                failures.push(format!("C2 boundary deviation {boundary_deviation:e}"));
            }
        }
        Err(e) => failures.push(e.to_string()),
    }

    MoritaReport {
        additivity_deviation,
        boundary_values,
        boundary_deviation,
        dimension_hypothesis,
        passed: failures.is_empty(),
        failures,
    }
}

/// `(E^B(b)ψ, E^A(a)ψ)` projected vectors used by the joint forms.
fn projected(d: &SpectralDecomposition, psi: &StateVector) -> Vec<CVector> {
    d.projectors().iter().map(|p| p * psi.amplitudes()).collect()
}

/// Joint QP `p^α(b,a|ψ) = ⟨ψ|E^B(b) ∘_α E^A(a)|ψ⟩` with `B` as reference.
///
/// Finite even when `⟨b|ψ⟩ = 0`, where the product form
/// `p^α(a|ψ,b)·p(b|ψ)` is `0/0`.
pub fn joint_qp(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<QpDistribution> {
    check_dim(b.dim(), psi.dim())?;
    check_dim(a.dim(), psi.dim())?;
    let eb = projected(b, psi);
    let ea = projected(a, psi);
    let mut values = Vec::with_capacity(b.len() * a.len());
    let mut outcomes = Vec::with_capacity(b.len() * a.len());
    for (bv, u) in b.eigenvalues().iter().zip(&eb) {
        for (av, v) in a.eigenvalues().iter().zip(&ea) {
            // ⟨ψ|E_b E_a|ψ⟩ = (E_b ψ)†(E_a ψ); the reversed order is its conjugate.
            let w = u.dotc(v);
            values.push(alpha.mix(w, w.conj()));
            outcomes.push(OutcomeLabel::Pair { b: *bv, a: *av });
        }
    }
    Ok(QpDistribution {
        kind: QpKind::Joint,
        outcomes,
        values,
        alpha,
        context: "state psi, reference observable B".into(),
        shape: (b.len(), a.len()),
    })
}

/// `p^α(b,a|ψ) − p^α(a,b|ψ)` per `(b, a)`, reference-major.
///
/// Equals `(2α−1)⟨ψ|[E^B(b), E^A(a)]|ψ⟩`.
pub fn commutator_asymmetry(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<Vec<Vec<Complex64>>> {
    let forward = joint_qp(b, a, psi, alpha)?;
    let swapped = joint_qp(a, b, psi, alpha)?;
    Ok((0..b.len())
        .map(|bi| (0..a.len()).map(|ai| forward.get(bi, ai) - swapped.get(ai, bi)).collect())
        .collect())
}

/// Marginal QP `p^α(a|ψ) = Σ_b p^α(b,a|ψ)`.
pub fn marginal_qp(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<QpDistribution> {
    let joint = joint_qp(b, a, psi, alpha)?;
    Ok(marginalize_reference(&joint, a, "state psi, reference observable B summed out"))
}

pub(crate) fn marginalize_reference(joint: &QpDistribution, a: &SpectralDecomposition, context: &str) -> QpDistribution {
    let (nb, na) = joint.shape;
    let values = (0..na).map(|ai| (0..nb).map(|bi| joint.get(bi, ai)).sum()).collect();
    QpDistribution {
        kind: QpKind::Marginal,
        outcomes: a.eigenvalues().iter().map(|&v| OutcomeLabel::Single(v)).collect(),
        values,
        alpha: joint.alpha,
        context: context.into(),
        shape: (1, na),
    }
}

pub(crate) fn joint_from_values(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    values: Vec<Complex64>,
    alpha: AlphaParam,
    context: &str,
) -> QpDistribution {
    let outcomes = b
        .eigenvalues()
        .iter()
        .flat_map(|&bv| a.eigenvalues().iter().map(move |&av| OutcomeLabel::Pair { b: bv, a: av }))
        .collect();
    QpDistribution {
        kind: QpKind::Joint,
        outcomes,
        values,
        alpha,
        context: context.into(),
        shape: (b.len(), a.len()),
    }
}

/// Born probabilities `⟨ψ|E^A(a)|ψ⟩` (rank-weighted for degenerate outcomes).
pub fn born_probabilities(a: &SpectralDecomposition, psi: &StateVector) -> Result<Vec<f64>> {
    check_dim(a.dim(), psi.dim())?;
    Ok(projected(a, psi).iter().map(|v| v.norm_squared()).collect())
}

/// A set of outcome positions of a spectral decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSet {
    indices: Vec<usize>,
}

impl OutcomeSet {
    pub fn new(mut indices: Vec<usize>, n_outcomes: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("outcome set has repeated indices".into()));
        }
        if let Some(&i) = indices.last() {
            if i >= n_outcomes {
                return Err(Error::InvalidInput(format!("outcome index {i} out of range ({n_outcomes} outcomes)")));
            }
        }
        Ok(Self { indices })
    }

    pub fn all(n_outcomes: usize) -> Self {
        Self { indices: (0..n_outcomes).collect() }
    }

    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_disjoint(&self, other: &OutcomeSet) -> bool {
        self.indices.iter().all(|i| !other.indices.contains(i))
    }

    pub fn union(&self, other: &OutcomeSet) -> OutcomeSet {
        let mut indices = self.indices.clone();
        indices.extend(other.indices.iter().filter(|i| !self.indices.contains(i)));
        indices.sort_unstable();
        OutcomeSet { indices }
    }
}

/// `p^α(a∈Δ|ψ,φ)` using `E^A(Δ) = Σ_{i∈Δ} Pᵢ`.
pub fn qp_of_set(
    a: &SpectralDecomposition,
    psi: &StateVector,
    phi: &StateVector,
    alpha: AlphaParam,
    set: &OutcomeSet,
) -> Result<Complex64> {
    check_dim(a.dim(), psi.dim())?;
    check_dim(a.dim(), phi.dim())?;
    if let Some(&i) = set.indices.last() {
        if i >= a.len() {
            return Err(Error::InvalidInput(format!("outcome index {i} out of range")));
        }
    }
    mixed_weak_value(&a.set_projector(&set.indices), psi, phi, alpha)
}

/// Conditional QP given a reference outcome, `p^α(a|ψ,b)`, at projector level:
/// `⟨ψ|E^B(b) ∘_α E^A(a)|ψ⟩ / ⟨ψ|E^B(b)|ψ⟩`.
///
/// Entries for `b` with `⟨ψ|E^B(b)|ψ⟩ ≤ DENSITY_FLOOR` are `None`.
pub fn reference_conditional_qp(
    b: &SpectralDecomposition,
    a: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<Vec<Option<Vec<Complex64>>>> {
    let joint = joint_qp(b, a, psi, alpha)?;
    let born = born_probabilities(b, psi)?;
    Ok(born
        .iter()
        .enumerate()
        .map(|(bi, &pb)| (pb > DENSITY_FLOOR).then(|| (0..a.len()).map(|ai| joint.get(bi, ai) / pb).collect()))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicReport {
    pub max_deviation: f64,
    pub tested_outcomes: usize,
    pub skipped_outcomes: usize,
    pub passed: bool,
}

/// With `B` as both measured and reference observable, `p^α(b′|ψ,b)` must be
/// `δ_{bb′}` for every `b` that `ψ` populates.
pub fn deterministic_reference_check(
    b: &SpectralDecomposition,
    psi: &StateVector,
    alpha: AlphaParam,
) -> Result<DeterministicReport> {
    let table = reference_conditional_qp(b, b, psi, alpha)?;
    let mut max_deviation = 0.0_f64;
    let mut tested = 0;
    for (bi, row) in table.iter().enumerate() {
        if let Some(row) = row {
            tested += 1;
            for (bj, v) in row.iter().enumerate() {
                let expected = if bi == bj { 1.0 } else { 0.0 };
                max_deviation = max_deviation.max((v - Complex64::new(expected, 0.0)).norm());
            }
        }
    }
    Ok(DeterministicReport {
        max_deviation,
        tested_outcomes: tested,
        skipped_outcomes: table.len() - tested,
        passed: tested > 0 && max_deviation <= 1e-10,
    })
}
