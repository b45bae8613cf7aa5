//! Finite-dimensional Hilbert-space primitives.
//!
//! Everything here is dense. Matrices are `nalgebra::DMatrix<Complex64>` and
//! the tensor-product index convention is `(i₁, i₂) ↦ i₁·dim₂ + i₂`, which is
//! what `DMatrix::kronecker` produces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::max_abs_diff;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const STATE_NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PROJECTOR_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A normalized state vector `|ψ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps already-normalized amplitudes.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("state vector must have dim >= 1".into()));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary (nonzero, finite) amplitudes.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::normalized(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn zero() -> Self {
        Self::basis(2, 0).unwrap()
    }

    pub fn one() -> Self {
        Self::basis(2, 1).unwrap()
    }

    /// `(|0⟩ + |1⟩)/√2`
    pub fn plus_x() -> Self {
        Self::qubit(ONE, ONE)
    }

    /// `(|0⟩ − |1⟩)/√2`
    pub fn minus_x() -> Self {
        Self::qubit(ONE, -ONE)
    }

    /// `(|0⟩ + i|1⟩)/√2`
    pub fn plus_y() -> Self {
        Self::qubit(ONE, I)
    }

    /// `(|0⟩ − i|1⟩)/√2`
    pub fn minus_y() -> Self {
        Self::qubit(ONE, -I)
    }

    fn qubit(a: Complex64, b: Complex64) -> Self {
        Self::normalized(CVector::from_column_slice(&[a, b])).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        inner(self, other)
    }

    /// Some unit vector orthogonal to `self` (requires `dim ≥ 2`).
    pub fn orthogonal_complement_vector(&self) -> Result<StateVector> {
        if self.dim() < 2 {
            return Err(Error::InvalidInput("no orthogonal vector in dimension 1".into()));
        }
        // Gram-Schmidt against the basis vector with the smallest overlap.
        let k = (0..self.dim())
            .min_by(|&i, &j| self.amplitudes[i].norm().total_cmp(&self.amplitudes[j].norm()))
            .unwrap();
        let mut v = CVector::zeros(self.dim());
        v[k] = ONE;
        let overlap = self.amplitudes[k].conj();
        v -= &self.amplitudes * overlap;
        StateVector::normalized(v)
    }
}

/// `⟨φ|ψ⟩ = Σ conj(φᵢ) ψᵢ`
pub fn inner(phi: &StateVector, psi: &StateVector) -> Result<Complex64> {
    check_dim(phi.dim(), psi.dim())?;
    Ok(phi.amplitudes.dotc(&psi.amplitudes))
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimMismatch { expected, found });
    }
    Ok(())
}

/// Rank-one projector `|χ⟩⟨χ|`.
pub fn projector_onto(chi: &StateVector) -> CMatrix {
    &chi.amplitudes * chi.amplitudes.adjoint()
}

/// `max |m − m†|`
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `max |P² − P|`
pub fn idempotency_defect(p: &CMatrix) -> f64 {
    max_abs_diff(&(p * p), p)
}

/// A Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "observable must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("observable has non-finite entries".into()));
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self::new(CMatrix::from_diagonal(&diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn pauli_x() -> Self {
        Self { matrix: CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]) }
    }

    pub fn pauli_y() -> Self {
        Self { matrix: CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]) }
    }

    pub fn pauli_z() -> Self {
        Self { matrix: CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]) }
    }

    /// Diagonal "position" observable `diag(0, 1, …, d−1)` of the computational basis.
    pub fn position(dim: usize) -> Self {
        let values: Vec<f64> = (0..dim).map(|i| i as f64).collect();
        Self::from_real_diagonal(&values).unwrap()
    }

    /// Spin-`j` component along `axis` (ħ = 1), with `j = two_j / 2`.
    ///
    /// Basis order is `m = j, j−1, …, −j`.
    pub fn spin(two_j: usize, axis: SpinAxis) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidInput("spin must be >= 1/2".into()));
        }
        let dim = two_j + 1;
        let j = two_j as f64 / 2.0;
        let m = |k: usize| j - k as f64;
        // J+ |j, m⟩ = sqrt(j(j+1) − m(m+1)) |j, m+1⟩; |m+1⟩ sits at index k−1.
        let mut raise = CMatrix::zeros(dim, dim);
        for k in 1..dim {
            let mk = m(k);
            raise[(k - 1, k)] = Complex64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
        let lower = raise.adjoint();
        let matrix = match axis {
            SpinAxis::X => (&raise + &lower) * Complex64::new(0.5, 0.0),
            SpinAxis::Y => (&raise - &lower) * Complex64::new(0.0, -0.5),
            SpinAxis::Z => CMatrix::from_diagonal(&CVector::from_iterator(dim, (0..dim).map(|k| Complex64::new(m(k), 0.0)))),
        };
        Self::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `⟨ψ|A|ψ⟩`
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), psi.dim())?;
        Ok(psi.amplitudes.dotc(&(&self.matrix * &psi.amplitudes)))
    }

    /// Spectral decomposition with the default degeneracy tolerance
    /// `1e-9 · spectral radius`.
    pub fn decompose(&self) -> SpectralDecomposition {
        decompose_clustered(&self.matrix, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinAxis {
    X,
    Y,
    Z,
}


/// Eigenvalues in strictly ascending order with one orthogonal projector per
/// distinct eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
}

impl SpectralDecomposition {
    /// Builds a decomposition from trusted parts, checking the invariants.
    pub fn from_parts(eigenvalues: Vec<f64>, projectors: Vec<CMatrix>) -> Result<Self> {
        if eigenvalues.len() != projectors.len() || eigenvalues.is_empty() {
            return Err(Error::InvalidInput("need one projector per eigenvalue".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("eigenvalues must be strictly ascending".into()));
        }
        let dim = projectors[0].nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &projectors {
            if p.shape() != (dim, dim) {
                return Err(Error::DimMismatch { expected: dim, found: p.nrows() });
            }
            let deviation = idempotency_defect(p).max(hermiticity_defect(p));
            if deviation > PROJECTOR_TOL {
                return Err(Error::NotProjector { deviation });
            }
            sum += p;
        }
        let deviation = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
        if deviation > PROJECTOR_TOL {
            return Err(Error::InvalidInput(format!("projectors do not resolve the identity (deviation {deviation:e})")));
        }
        Ok(Self { eigenvalues, projectors })
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// Number of distinct outcomes.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, index: usize) -> &CMatrix {
        &self.projectors[index]
    }

    /// Rank of the projector for outcome `index`.
    pub fn rank(&self, index: usize) -> usize {
        self.projectors[index].trace().re.round() as usize
    }

    /// `Σ aᵢ Pᵢ`
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.dim();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(dim, dim), |acc, (&a, p)| acc + p * Complex64::new(a, 0.0))
    }

    /// `E(Δ) = Σ_{i∈Δ} Pᵢ`
    pub fn set_projector(&self, indices: &[usize]) -> CMatrix {
        let dim = self.dim();
        indices.iter().fold(CMatrix::zeros(dim, dim), |acc, &i| acc + &self.projectors[i])
    }

    /// The observable `Σ aᵢ Pᵢ` this decomposition describes.
    pub fn observable(&self) -> Observable {
        Observable { matrix: self.reconstruct() }
    }
}

/// Hermitian eigendecomposition with eigenvalues closer than `degeneracy_tol`
/// merged into one projector.
pub fn spectral_decompose(a: &Observable, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    if degeneracy_tol.is_nan() || degeneracy_tol <= 0.0 {
        return Err(Error::InvalidInput("degeneracy_tol must be > 0".into()));
    }
    let deviation = hermiticity_defect(&a.matrix);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation });
    }
    Ok(decompose_clustered(&a.matrix, Some(degeneracy_tol)))
}

/// `tol = None` selects `1e-9 · spectral radius`.
fn decompose_clustered(matrix: &CMatrix, tol: Option<f64>) -> SpectralDecomposition {
    let dim = matrix.nrows();
    let eig = matrix.clone().symmetric_eigen();
    let degeneracy_tol = tol.unwrap_or_else(|| {
        let radius = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if radius > 0.0 {
            1e-9 * radius
        } else {
            1e-15
        }
    });
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    // Chain clustering over the sorted spectrum.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &k in &order {
        let value = eig.eigenvalues[k];
        match clusters.last_mut() {
            Some(cluster) if value - last <= degeneracy_tol => cluster.push(k),
            _ => clusters.push(vec![k]),
        }
        last = value;
    }

    let half = Complex64::new(0.5, 0.0);
    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let mean = cluster.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
        let mut p = CMatrix::zeros(dim, dim);
        for &k in &cluster {
            let v = eig.eigenvectors.column(k);
            p += v * v.adjoint();
        }
        let p = (&p + p.adjoint()) * half;
        eigenvalues.push(mean);
        projectors.push(p);
    }
    SpectralDecomposition { eigenvalues, projectors }
}

/// A density operator `ρ`: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDensity("must be a non-empty square matrix".into()));
        }
        let deviation = hermiticity_defect(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace is {trace}, expected 1")));
        }
        let min_eig = matrix.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn pure(psi: &StateVector) -> Self {
        Self { matrix: projector_onto(psi) }
    }

    /// `I / d`
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim).unscale(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Tr[X ρ]`
    pub fn expectation(&self, x: &CMatrix) -> Result<Complex64> {
        check_dim(self.dim(), x.nrows())?;
        Ok((x * &self.matrix).trace())
    }
}

/// Kronecker product with index convention `(i₁, i₂) ↦ i₁·dim₂ + i₂`.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        // A product of unit vectors is a unit vector up to round-off; renormalize.
        let v = self.amplitudes.kronecker(&other.amplitudes);
        StateVector::normalized(v).expect("product of unit vectors is nonzero")
    }
}

impl Tensor for Observable {
    fn tensor(&self, other: &Self) -> Self {
        Observable { matrix: self.matrix.kronecker(&other.matrix) }
    }
}

impl Tensor for CMatrix {
    fn tensor(&self, other: &Self) -> Self {
        self.kronecker(other)
    }
}

/// JSON form shared by states and matrices: `{"dim": n, "re": [...], "im": [...]}`,
/// row-major for matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexArrayJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexArrayJson {
    fn values(&self, expected_len: usize) -> Result<Vec<Complex64>> {
        if self.re.len() != expected_len || self.im.len() != expected_len {
            return Err(Error::InvalidInput(format!(
                "expected {expected_len} re/im entries for dim {}, got {}/{}",
                self.dim,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&re, &im)| Complex64::new(re, im)).collect())
    }

    pub fn to_state(&self) -> Result<StateVector> {
        StateVector::from_slice(&self.values(self.dim)?)
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        Ok(CMatrix::from_row_slice(self.dim, self.dim, &self.values(self.dim * self.dim)?))
    }

    pub fn to_observable(&self) -> Result<Observable> {
        Observable::new(self.to_matrix()?)
    }

    pub fn from_state(psi: &StateVector) -> Self {
        Self {
            dim: psi.dim(),
            re: psi.amplitudes.iter().map(|z| z.re + 0.0).collect(),
            im: psi.amplitudes.iter().map(|z| z.im + 0.0).collect(),
        }
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        // nalgebra stores column-major; emit row-major.
        let mut re = Vec::with_capacity(m.len());
        let mut im = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                // `+ 0.0` turns -0.0 into 0.0.
                re.push(m[(r, c)].re + 0.0);
                im.push(m[(r, c)].im + 0.0);
            }
        }
        Self { dim: m.nrows(), re, im }
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexArrayJson::from_state(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ComplexArrayJson::deserialize(d)?.to_state().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexArrayJson::from_matrix(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ComplexArrayJson::deserialize(d)?.to_observable().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{max_abs, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sigma_z_decomposes_to_basis_projectors() {
        let d = Observable::pauli_z().decompose();
        assert_eq!(d.eigenvalues(), &[-1.0, 1.0]);
        let p1 = projector_onto(&StateVector::one());
        let p0 = projector_onto(&StateVector::zero());
        assert!(max_abs_diff(d.projector(0), &p1) < 1e-14);
        assert!(max_abs_diff(d.projector(1), &p0) < 1e-14);
    }

    #[test]
    fn identity_is_fully_degenerate() {
        let d = Observable::identity(3).decompose();
        assert_eq!(d.len(), 1);
        assert!((d.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(d.projector(0), &CMatrix::identity(3, 3)) < 1e-12);
        assert_eq!(d.rank(0), 3);
    }

    #[test]
    fn sigma_x_projectors_are_half_identity_plus_minus_sigma_x() {
        let sx = Observable::pauli_x();
        let d = sx.decompose();
        assert_eq!(d.len(), 2);
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let half = c(0.5, 0.0);
        let id = CMatrix::identity(2, 2);
        let minus = (&id - sx.matrix()) * half;
        let plus = (&id + sx.matrix()) * half;
        assert!(max_abs_diff(d.projector(0), &minus) < 1e-12);
        assert!(max_abs_diff(d.projector(1), &plus) < 1e-12);
        for p in d.projectors() {
            assert!(idempotency_defect(p) < 1e-12);
        }
        assert!(max_abs_diff(&d.reconstruct(), sx.matrix()) < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(Observable::new(m.clone()), Err(Error::NonHermitian { .. })));
        let fake = Observable { matrix: m };
        assert!(matches!(spectral_decompose(&fake, 1e-9), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn degeneracy_tolerance_merges_close_eigenvalues() {
        let a = Observable::from_real_diagonal(&[1.0, 1.0 + 1e-11, 2.0]).unwrap();
        let d = spectral_decompose(&a, 1e-9).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.rank(0), 2);
        let split = spectral_decompose(&a, 1e-13).unwrap();
        assert_eq!(split.len(), 3);
    }

    #[test]
    fn projector_examples() {
        let p = projector_onto(&StateVector::zero());
        assert_eq!(p, CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]));

        let p = projector_onto(&StateVector::plus_x());
        let expected = CMatrix::from_element(2, 2, c(0.5, 0.0));
        assert!(max_abs_diff(&p, &expected) < 1e-15);

        // (|0⟩ + i|1⟩)/√2 → ½[[1, −i], [i, 1]]
        let p = projector_onto(&StateVector::plus_y());
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)]);
        assert!(max_abs_diff(&p, &expected) < 1e-15);
    }

    #[test]
    fn tensor_examples() {
        let v = StateVector::zero().tensor(&StateVector::one());
        assert_eq!(v.amplitudes().as_slice(), &[ZERO, ONE, ZERO, ZERO]);

        let i4 = Observable::identity(2).tensor(&Observable::identity(2));
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));

        let zz = Observable::pauli_z().tensor(&Observable::pauli_z());
        let expected = Observable::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]).unwrap();
        assert_eq!(zz, expected);
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(&StateVector::zero(), &StateVector::zero()).unwrap(), ONE);
        assert_eq!(inner(&StateVector::zero(), &StateVector::one()).unwrap(), ZERO);
        let v = inner(&StateVector::plus_y(), &StateVector::plus_x()).unwrap();
        assert!((v - c(0.5, -0.5)).norm() < 1e-15);
        let three = StateVector::basis(3, 0).unwrap();
        assert!(matches!(inner(&three, &StateVector::zero()), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let v = CVector::from_column_slice(&[ONE, ONE]);
        assert!(matches!(StateVector::new(v), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn spin_one_matrices() {
        let jz = Observable::spin(2, SpinAxis::Z).unwrap();
        assert_eq!(jz.decompose().eigenvalues().len(), 3);
        let jx = Observable::spin(2, SpinAxis::X).unwrap();
        let jy = Observable::spin(2, SpinAxis::Y).unwrap();
        // [Jx, Jy] = i Jz
        let comm = jx.matrix() * jy.matrix() - jy.matrix() * jx.matrix();
        assert!(max_abs_diff(&comm, &(jz.matrix() * I)) < 1e-12);
        // Spin-1/2 is half the Pauli matrices.
        let sx = Observable::spin(1, SpinAxis::X).unwrap();
        assert!(max_abs_diff(sx.matrix(), &(Observable::pauli_x().matrix() * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn random_decompositions_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=8 {
            for _ in 0..5 {
                let a = random::hermitian(&mut rng, dim);
                let d = a.decompose();
                assert!(max_abs_diff(&d.reconstruct(), a.matrix()) < 1e-9);
                let sum = d.projectors().iter().fold(CMatrix::zeros(dim, dim), |acc, p| acc + p);
                assert!(max_abs_diff(&sum, &CMatrix::identity(dim, dim)) < 1e-10);
                for (i, p) in d.projectors().iter().enumerate() {
                    assert!(idempotency_defect(p) < 1e-10);
                    assert!(hermiticity_defect(p) < 1e-10);
                    for q in &d.projectors()[i + 1..] {
                        assert!(max_abs(&(p * q)) < 1e-10);
                    }
                }
                assert!(d.eigenvalues().windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn degenerate_tensor_observable_decomposes() {
        let zz = Observable::pauli_z().tensor(&Observable::pauli_z());
        let d = zz.decompose();
        assert_eq!(d.len(), 2);
        assert_eq!(d.rank(0), 2);
        assert_eq!(d.rank(1), 2);
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random::state(&mut rng, 2);
        let y = random::state(&mut rng, 3);
        let z = random::state(&mut rng, 2);
        let left = x.tensor(&y).tensor(&z);
        let right = x.tensor(&y.tensor(&z));
        assert_eq!(left.dim(), 12);
        assert!((left.amplitudes() - right.amplitudes()).camax() < 1e-12);

        let a = random::hermitian(&mut rng, 2);
        let b = random::hermitian(&mut rng, 2);
        let cc = random::hermitian(&mut rng, 3);
        let left = a.tensor(&b).tensor(&cc);
        let right = a.tensor(&b.tensor(&cc));
        assert!(max_abs_diff(left.matrix(), right.matrix()) < 1e-12);
    }

    #[test]
    fn inner_is_conjugate_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in 1..=6 {
            let phi = random::state(&mut rng, dim);
            let psi = random::state(&mut rng, dim);
            let a = inner(&phi, &psi).unwrap();
            let b = inner(&psi, &phi).unwrap();
            assert!((a - b.conj()).norm() <= 1e-15);
        }
    }

    #[test]
    fn density_operator_validation() {
        let rho = DensityOperator::pure(&StateVector::plus_x());
        assert!(DensityOperator::new(rho.matrix().clone()).is_ok());
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(matches!(DensityOperator::new(bad), Err(Error::InvalidDensity(_))));
        let half = CMatrix::identity(2, 2);
        assert!(matches!(DensityOperator::new(half), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn json_round_trip_is_row_major() {
        let json = serde_json::to_string(&Observable::pauli_y()).unwrap();
        assert_eq!(json, r#"{"dim":2,"re":[0.0,0.0,0.0,0.0],"im":[0.0,-1.0,1.0,0.0]}"#);
        let back: Observable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Observable::pauli_y());

        let psi: StateVector = serde_json::from_str(r#"{"dim":2,"re":[1,0],"im":[0,0]}"#).unwrap();
        assert_eq!(psi, StateVector::zero());
        assert!(serde_json::from_str::<StateVector>(r#"{"dim":2,"re":[1],"im":[0]}"#).is_err());
    }

    #[test]
    fn orthogonal_complement_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dim in 2..6 {
            let psi = random::state(&mut rng, dim);
            let perp = psi.orthogonal_complement_vector().unwrap();
            assert!(inner(&psi, &perp).unwrap().norm() < 1e-14);
        }
    }
}
