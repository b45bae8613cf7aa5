use num_complex::Complex64;

use super::{JointTable, OntModel};
use crate::alpha::AlphaParam;
use crate::error::{Error, Result};
use crate::hilbert::{Observable, SpectralDecomposition, StateVector};
use crate::quasiprob::{born_probabilities, joint_qp};

/// Bohmian mechanics with the QP embedded: ontic states are position
/// (computational-basis) labels and `p^α(x,a|ψ) = ⟨ψ|E^X(x) ∘_α E^A(a)|ψ⟩`.
#[derive(Debug, Clone)]
pub struct BohmianModel {
    alpha: AlphaParam,
    position: SpectralDecomposition,
}

impl BohmianModel {
    pub fn new(dim: usize, alpha: AlphaParam) -> Self {
        Self { alpha, position: Observable::position(dim).decompose() }
    }

    pub fn dim(&self) -> usize {
        self.position.dim()
    }

    pub fn alpha(&self) -> AlphaParam {
        self.alpha
    }

    pub fn position(&self) -> &SpectralDecomposition {
        &self.position
    }
}

impl OntModel for BohmianModel {
    type Observable = SpectralDecomposition;
    type Preparation = StateVector;

    fn ontic_len(&self) -> usize {
        self.dim()
    }

    fn joint_table(&self, observable: &SpectralDecomposition, preparation: &StateVector) -> Result<JointTable> {
        let joint = joint_qp(&self.position, observable, preparation, self.alpha)?;
        let (nx, na) = joint.shape();
        Ok((0..nx).map(|x| (0..na).map(|a| joint.get(x, a)).collect()).collect())
    }

    fn target_distribution(&self, observable: &SpectralDecomposition, preparation: &StateVector) -> Result<Vec<f64>> {
        born_probabilities(observable, preparation)
    }
}

/// An observable of a classical toy model: a deterministic map `λ ↦ a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicObservable {
    assignment: Vec<usize>,
    n_outcomes: usize,
    /// Cyclic shift applied to the prior by the observable-dependent toy.
    shift: usize,
}

impl DeterministicObservable {
    pub fn new(assignment: Vec<usize>, n_outcomes: usize) -> Result<Self> {
        if let Some(&a) = assignment.iter().find(|&&a| a >= n_outcomes) {
            return Err(Error::InvalidInput(format!("outcome {a} out of range ({n_outcomes} outcomes)")));
        }
        Ok(Self { assignment, n_outcomes, shift: 0 })
    }

    pub fn with_shift(mut self, shift: usize) -> Self {
        self.shift = shift;
        self
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

fn check_prior(prior: &[f64], n: usize) -> Result<()> {
    if prior.len() != n {
        return Err(Error::DimMismatch { expected: n, found: prior.len() });
    }
    if prior.iter().any(|&p| p.is_nan() || p < 0.0) || (prior.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("prior must be a probability vector".into()));
    }
    Ok(())
}

fn deterministic_table(obs: &DeterministicObservable, weight: impl Fn(usize) -> f64, n: usize) -> Result<JointTable> {
    if obs.assignment.len() != n {
        return Err(Error::DimMismatch { expected: n, found: obs.assignment.len() });
    }
    Ok((0..n)
        .map(|l| {
            (0..obs.n_outcomes)
                .map(|a| if obs.assignment[l] == a { Complex64::new(weight(l), 0.0) } else { Complex64::new(0.0, 0.0) })
                .collect()
        })
        .collect())
}

fn pushforward(obs: &DeterministicObservable, weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; obs.n_outcomes];
    for (l, &a) in obs.assignment.iter().enumerate() {
        out[a] += weight(l);
    }
    out
}

/// Classical deterministic model: preparations are priors over `λ`,
/// observables read a fixed outcome off `λ`. Asynlogical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalToy {
    ontic: usize,
}

impl ClassicalToy {
    pub fn new(ontic: usize) -> Self {
        Self { ontic }
    }
}

impl OntModel for ClassicalToy {
    type Observable = DeterministicObservable;
    type Preparation = Vec<f64>;

    fn ontic_len(&self) -> usize {
        self.ontic
    }

    fn joint_table(&self, observable: &DeterministicObservable, prior: &Vec<f64>) -> Result<JointTable> {
        check_prior(prior, self.ontic)?;
        deterministic_table(observable, |l| prior[l], self.ontic)
    }

    fn target_distribution(&self, observable: &DeterministicObservable, prior: &Vec<f64>) -> Result<Vec<f64>> {
        check_prior(prior, self.ontic)?;
        Ok(pushforward(observable, |l| prior[l]))
    }
}

/// Like [`ClassicalToy`], but measuring `A` first permutes the prior by the
/// observable's shift, so `p(λ|A,ψ)` depends on `A` (O-S).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OsToy {
    ontic: usize,
}

impl OsToy {
    pub fn new(ontic: usize) -> Self {
        Self { ontic }
    }
}

impl OntModel for OsToy {
    type Observable = DeterministicObservable;
    type Preparation = Vec<f64>;

    fn ontic_len(&self) -> usize {
        self.ontic
    }

    fn joint_table(&self, observable: &DeterministicObservable, prior: &Vec<f64>) -> Result<JointTable> {
        check_prior(prior, self.ontic)?;
        let n = self.ontic;
        deterministic_table(observable, |l| prior[(l + observable.shift) % n], n)
    }

    fn target_distribution(&self, observable: &DeterministicObservable, prior: &Vec<f64>) -> Result<Vec<f64>> {
        check_prior(prior, self.ontic)?;
        let n = self.ontic;
        Ok(pushforward(observable, |l| prior[(l + observable.shift) % n]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::*;
    use crate::random;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bohmian_epistemic_state_is_born_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let dim = rng.random_range(2..=6);
            let model = BohmianModel::new(dim, random::alpha(&mut rng));
            let a = random::hermitian(&mut rng, dim).decompose();
            let psi = random::state(&mut rng, dim);
            let ep = epistemic_state(&model, &a, &psi).unwrap();
            for (x, p) in ep.iter().enumerate() {
                assert!((p - c(psi.amplitudes()[x].norm_sqr())).norm() < 1e-10);
            }
            assert!((ep.iter().sum::<Complex64>() - c(1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn bohmian_indicator_is_conditional_qp_given_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dim = 4;
        let alpha = random::alpha(&mut rng);
        let model = BohmianModel::new(dim, alpha);
        let a = random::hermitian(&mut rng, dim).decompose();
        let psi = random::state(&mut rng, dim);
        let ind = indicator_functions(&model, &a, &psi).unwrap();
        for x in 0..dim {
            let ex = StateVector::basis(dim, x).unwrap();
            let cond = crate::quasiprob::conditional_qp(&a, &psi, &ex, alpha).unwrap();
            for (ai, v) in cond.values().iter().enumerate() {
                assert!((ind.outcome_given_ontic[x][ai].unwrap() - v).norm() < 1e-10);
            }
        }
        assert!(bayes_check(&model, &a, &psi).unwrap() <= 1e-10);
        let born = born_probabilities(&a, &psi).unwrap();
        assert!(reproduction_check(&model, &a, &psi, &born).unwrap() <= 1e-10);
    }

    fn toy_observables() -> Vec<DeterministicObservable> {
        vec![
            DeterministicObservable::new(vec![0, 1, 1, 0], 2).unwrap(),
            DeterministicObservable::new(vec![2, 0, 1, 1], 3).unwrap(),
        ]
    }

    fn toy_priors() -> Vec<Vec<f64>> {
        vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.5, 0.0]]
    }

    #[test]
    fn classical_toy_is_asynlogical() {
        let model = ClassicalToy::new(4);
        let report = classify_synlogicality(&model, &toy_observables(), &toy_priors()).unwrap();
        assert!(report.is_asynlogical(), "{report:?}");
        assert_eq!(report.classification(), "O-AS/P-AS");
        assert!(report.reproduction_ok);
        // λ = 3 has zero weight in the second prior.
        assert!(report.excluded_entries > 0);

        let obs = &toy_observables()[0];
        let prior = &toy_priors()[0];
        let ep = epistemic_state(&model, obs, prior).unwrap();
        assert_eq!(ep, prior.iter().map(|&p| c(p)).collect::<Vec<_>>());
        let ind = indicator_functions(&model, obs, prior).unwrap();
        for row in &ind.outcome_given_ontic {
            for v in row.iter().flatten() {
                assert!(*v == c(0.0) || *v == c(1.0));
            }
        }
    }

    #[test]
    fn os_toy_is_detected() {
        let model = OsToy::new(4);
        let obs = vec![
            DeterministicObservable::new(vec![0, 1, 1, 0], 2).unwrap(),
            DeterministicObservable::new(vec![0, 1, 1, 0], 2).unwrap().with_shift(1),
        ];
        let report = classify_synlogicality(&model, &obs, &toy_priors()).unwrap();
        assert!(report.observable_synlogical);
        assert!(report.observable_witness.is_some());
        assert!(report.reproduction_ok);
    }

    #[test]
    fn random_toy_brute_force() {
        // Two ontic states, complex joint table given directly.
        struct Table(JointTable);
        impl OntModel for Table {
            type Observable = ();
            type Preparation = ();
            fn ontic_len(&self) -> usize {
                self.0.len()
            }
            fn joint_table(&self, _: &(), _: &()) -> Result<JointTable> {
                Ok(self.0.clone())
            }
            fn target_distribution(&self, _: &(), _: &()) -> Result<Vec<f64>> {
                Ok(vec![0.5, 0.5])
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t: JointTable =
            (0..2).map(|_| (0..2).map(|_| Complex64::new(rng.random(), rng.random())).collect()).collect();
        let total: Complex64 = t.iter().flatten().sum();
        t.iter_mut().flatten().for_each(|v| *v /= total);
        let model = Table(t.clone());
        let ep = epistemic_state(&model, &(), &()).unwrap();
        assert!((ep[0] - (t[0][0] + t[0][1])).norm() < 1e-15);
        assert!((ep[1] - (t[1][0] + t[1][1])).norm() < 1e-15);
        let ind = indicator_functions(&model, &(), &()).unwrap();
        let pa0 = t[0][0] + t[1][0];
        assert!((ind.outcome_given_ontic[1][0].unwrap() - t[1][0] / ep[1]).norm() < 1e-15);
        assert!((ind.ontic_given_outcome[1][0].unwrap() - t[1][0] / pa0).norm() < 1e-15);
        assert!(bayes_check(&model, &(), &()).unwrap() <= 1e-10);
    }

    #[test]
    fn reproduction_violation_reported() {
        let model = ClassicalToy::new(4);
        let obs = &toy_observables()[0];
        let prior = &toy_priors()[0];
        let wrong = [0.9, 0.1];
        assert!(reproduction_check(&model, obs, prior, &wrong).unwrap() > 0.3);
        let right = model.target_distribution(obs, prior).unwrap();
        assert!(reproduction_check(&model, obs, prior, &right).unwrap() < 1e-15);
    }

    #[test]
    fn zero_probability_outcome_is_excluded_from_bayes() {
        let model = ClassicalToy::new(4);
        // Outcome 2 never occurs under this prior.
        let obs = DeterministicObservable::new(vec![0, 1, 2, 1], 3).unwrap();
        let prior = vec![0.5, 0.25, 0.0, 0.25];
        let ind = indicator_functions(&model, &obs, &prior).unwrap();
        assert!(ind.ontic_given_outcome.iter().all(|row| row[2].is_none()));
        assert!(ind.outcome_given_ontic[2].iter().all(Option::is_none));
        assert!(bayes_check(&model, &obs, &prior).unwrap() <= 1e-10);
    }

    #[test]
    fn classification_needs_two_probes() {
        let model = ClassicalToy::new(4);
        assert!(classify_synlogicality(&model, &toy_observables()[..1], &toy_priors()).is_err());
    }

    #[test]
    fn invalid_toy_inputs() {
        assert!(DeterministicObservable::new(vec![0, 3], 2).is_err());
        let model = ClassicalToy::new(2);
        let obs = DeterministicObservable::new(vec![0, 1], 2).unwrap();
        assert!(model.joint_table(&obs, &vec![0.5, 0.6]).is_err());
        assert!(model.joint_table(&obs, &vec![1.0]).is_err());
    }
}
