//! Ontological models with (possibly complex) joint distributions
//! `p(λ, a | A, ψ)`, their epistemic states and indicator functions, and the
//! synlogicality classification:
//!
//! * observable-asynlogical (O-AS): `p(λ|A,ψ)` does not depend on `A`;
//! * preparation-asynlogical (P-AS): `p(a|λ,A,ψ)` does not depend on `ψ`.
//!
//! A model that is both is asynlogical; otherwise synlogical.
//!
//! [`OntModel::joint_table`] must be a pure function of its arguments:
//! classification sweeps call it repeatedly and may do so from several
//! threads.

mod bipartite;
mod mixed;
mod models;

pub use bipartite::{
    alt_joint_qp, correlation, local_weak_value, psi_epistemic_witness, two_particle_joint_qp, EpistemicOverlap,
    TwoParticleQp,
};
pub use mixed::{joint_qp_mixed, marginal_qp_mixed, two_particle_joint_qp_mixed};
pub use models::{BohmianModel, ClassicalToy, DeterministicObservable, OsToy};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute tolerance for "agrees" in the classification.
pub const AGREEMENT_TOL: f64 = 1e-10;

/// Denominators at or below this leave the conditional undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// A P-S witness is only taken where both epistemic densities exceed this.
pub const WITNESS_DENSITY: f64 = 1e-6;

/// `p(λ, a | A, ψ)` tabulated as `[λ][a]`.
pub type JointTable = Vec<Vec<Complex64>>;

pub trait OntModel {
    type Observable;
    type Preparation;

    /// Number of ontic states `|Λ|`.
    fn ontic_len(&self) -> usize;

    fn joint_table(&self, observable: &Self::Observable, preparation: &Self::Preparation) -> Result<JointTable>;

    /// The operational outcome distribution the model has to reproduce.
    fn target_distribution(&self, observable: &Self::Observable, preparation: &Self::Preparation) -> Result<Vec<f64>>;
}

fn check_table(table: &JointTable, ontic_len: usize) -> Result<usize> {
    if table.len() != ontic_len {
        return Err(Error::DimMismatch { expected: ontic_len, found: table.len() });
    }
    let n_outcomes = table.first().map_or(0, Vec::len);
    if let Some(row) = table.iter().find(|r| r.len() != n_outcomes) {
        return Err(Error::DimMismatch { expected: n_outcomes, found: row.len() });
    }
    Ok(n_outcomes)
}

/// Epistemic state `p(λ|A,ψ) = Σ_a p(λ,a|A,ψ)`.
pub fn epistemic_state<M: OntModel>(model: &M, observable: &M::Observable, preparation: &M::Preparation) -> Result<Vec<Complex64>> {
    let table = model.joint_table(observable, preparation)?;
    check_table(&table, model.ontic_len())?;
    Ok(table.iter().map(|row| row.iter().sum()).collect())
}

/// `p(a|A,ψ) = Σ_λ p(λ,a|A,ψ)`
pub fn outcome_distribution<M: OntModel>(model: &M, observable: &M::Observable, preparation: &M::Preparation) -> Result<Vec<Complex64>> {
    let table = model.joint_table(observable, preparation)?;
    let n = check_table(&table, model.ontic_len())?;
    Ok((0..n).map(|a| table.iter().map(|row| row[a]).sum()).collect())
}

/// The two conditionals of a joint table, `None` where the denominator
/// vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorFunctions {
    /// `p(a|λ,A,ψ)` as `[λ][a]`.
    pub outcome_given_ontic: Vec<Vec<Option<Complex64>>>,
    /// `p(λ|a,A,ψ)` as `[λ][a]`.
    pub ontic_given_outcome: Vec<Vec<Option<Complex64>>>,
    pub epistemic: Vec<Complex64>,
    pub outcome_marginal: Vec<Complex64>,
}

fn indicators_from_table(table: &JointTable) -> IndicatorFunctions {
    let n_outcomes = table.first().map_or(0, Vec::len);
    let epistemic: Vec<Complex64> = table.iter().map(|row| row.iter().sum()).collect();
    let outcome_marginal: Vec<Complex64> = (0..n_outcomes).map(|a| table.iter().map(|row| row[a]).sum()).collect();
    let divide = |num: Complex64, den: Complex64| (den.norm() > DENOMINATOR_FLOOR).then(|| num / den);
    let outcome_given_ontic = table
        .iter()
        .zip(&epistemic)
        .map(|(row, &pl)| row.iter().map(|&j| divide(j, pl)).collect())
        .collect();
    let ontic_given_outcome = table
        .iter()
        .map(|row| row.iter().zip(&outcome_marginal).map(|(&j, &pa)| divide(j, pa)).collect())
        .collect();
    IndicatorFunctions { outcome_given_ontic, ontic_given_outcome, epistemic, outcome_marginal }
}

pub fn indicator_functions<M: OntModel>(
    model: &M,
    observable: &M::Observable,
    preparation: &M::Preparation,
) -> Result<IndicatorFunctions> {
    let table = model.joint_table(observable, preparation)?;
    check_table(&table, model.ontic_len())?;
    Ok(indicators_from_table(&table))
}

/// `max |p(λ|a) − p(a|λ)p(λ)/p(a)|` over the entries where both
/// conditionals are defined.
pub fn bayes_check<M: OntModel>(model: &M, observable: &M::Observable, preparation: &M::Preparation) -> Result<f64> {
    let ind = indicator_functions(model, observable, preparation)?;
    Ok(bayes_deviation(&ind))
}

fn bayes_deviation(ind: &IndicatorFunctions) -> f64 {
    let mut worst = 0.0_f64;
    for (l, row) in ind.ontic_given_outcome.iter().enumerate() {
        for (a, lhs) in row.iter().enumerate() {
            if let (Some(lhs), Some(cond)) = (lhs, ind.outcome_given_ontic[l][a]) {
                let rhs = cond * ind.epistemic[l] / ind.outcome_marginal[a];
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    worst
}

/// `max_a |Σ_λ p(λ,a|A,ψ) − born(a)|`
pub fn reproduction_check<M: OntModel>(
    model: &M,
    observable: &M::Observable,
    preparation: &M::Preparation,
    born: &[f64],
) -> Result<f64> {
    let marginal = outcome_distribution(model, observable, preparation)?;
    if marginal.len() != born.len() {
        return Err(Error::DimMismatch { expected: marginal.len(), found: born.len() });
    }
    Ok(marginal
        .iter()
        .zip(born)
        .fold(0.0, |m, (p, b)| m.max((p - Complex64::new(*b, 0.0)).norm())))
}

/// A concrete `(λ, a, A, ψ, ψ′)` where the indicator functions differ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreparationWitness {
    pub ontic: usize,
    pub outcome: usize,
    pub observable: usize,
    pub preparations: (usize, usize),
    pub values: (Complex64, Complex64),
    pub difference: f64,
}

/// A concrete `(λ, ψ, A, A′)` where the epistemic states differ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableWitness {
    pub ontic: usize,
    pub preparation: usize,
    pub observables: (usize, usize),
    pub values: (Complex64, Complex64),
    pub difference: f64,
}

/// Largest `p(λ|ψ)p(λ|φ)` over probed preparation pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapWitness {
    pub preparations: (usize, usize),
    pub ontic: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynlogicalityReport {
    /// O-S: epistemic states differ across observables.
    pub observable_synlogical: bool,
    pub observable_deviation: f64,
    pub observable_witness: Option<ObservableWitness>,
    /// P-S: indicator functions differ across preparations.
    pub preparation_synlogical: bool,
    pub preparation_deviation: f64,
    pub preparation_witness: Option<PreparationWitness>,
    pub reproduction_ok: bool,
    pub reproduction_deviation: f64,
    pub bayes_deviation: f64,
    pub psi_epistemic_witness: Option<OverlapWitness>,
    /// Indicator entries left out of the P-AS comparison because a
    /// denominator vanished.
    pub excluded_entries: usize,
}

impl SynlogicalityReport {
    pub fn is_asynlogical(&self) -> bool {
        !self.observable_synlogical && !self.preparation_synlogical
    }

    /// e.g. `"O-AS/P-S"`.
    pub fn classification(&self) -> String {
        format!(
            "{}/{}",
            if self.observable_synlogical { "O-S" } else { "O-AS" },
            if self.preparation_synlogical { "P-S" } else { "P-AS" }
        )
    }
}

/// Probes every (observable, preparation) pair and classifies the model.
///
/// P-S is reported as an existential witness; undefined conditionals are
/// excluded from the comparison rather than treated as equal.
pub fn classify_synlogicality<M: OntModel>(
    model: &M,
    observables: &[M::Observable],
    preparations: &[M::Preparation],
) -> Result<SynlogicalityReport> {
    if observables.len() < 2 || preparations.len() < 2 {
        return Err(Error::InvalidInput("classification needs at least two observables and two preparations".into()));
    }
    let n_ontic = model.ontic_len();

    // tables[o][p]
    let mut tables = Vec::with_capacity(observables.len());
    for obs in observables {
        let mut row = Vec::with_capacity(preparations.len());
        for prep in preparations {
            let t = model.joint_table(obs, prep)?;
            check_table(&t, n_ontic)?;
            row.push(indicators_from_table(&t));
        }
        tables.push(row);
    }

    // O-AS: p(λ|A,ψ) equal across A for each ψ.
    let mut observable_deviation = 0.0_f64;
    let mut observable_witness = None;
    for p in 0..preparations.len() {
        let reference = &tables[0][p].epistemic;
        for (o, row) in tables.iter().enumerate().skip(1) {
            for (l, (&x, &y)) in reference.iter().zip(&row[p].epistemic).enumerate() {
                let d = (x - y).norm();
                if d > observable_deviation {
                    observable_deviation = d;
                    observable_witness =
                        Some(ObservableWitness { ontic: l, preparation: p, observables: (0, o), values: (x, y), difference: d });
                }
            }
        }
    }

    // P-AS: p(a|λ,A,ψ) equal across ψ for each (A, λ, a) where defined.
    let mut preparation_deviation = 0.0_f64;
    let mut best_witness: Option<PreparationWitness> = None;
    let mut fallback_witness: Option<PreparationWitness> = None;
    let mut excluded = 0usize;
    for (o, row) in tables.iter().enumerate() {
        for p in 0..preparations.len() {
            for q in p + 1..preparations.len() {
                let (ip, iq) = (&row[p], &row[q]);
                for l in 0..n_ontic {
                    let strong = ip.epistemic[l].norm() > WITNESS_DENSITY && iq.epistemic[l].norm() > WITNESS_DENSITY;
                    for (a, (x, y)) in ip.outcome_given_ontic[l].iter().zip(&iq.outcome_given_ontic[l]).enumerate() {
                        let (Some(x), Some(y)) = (x, y) else {
                            excluded += 1;
                            continue;
                        };
                        let d = (x - y).norm();
                        let witness =
                            || PreparationWitness { ontic: l, outcome: a, observable: o, preparations: (p, q), values: (*x, *y), difference: d };
                        if d > preparation_deviation {
                            preparation_deviation = d;
                            fallback_witness = Some(witness());
                        }
                        if strong && best_witness.as_ref().is_none_or(|w| d > w.difference) {
                            best_witness = Some(witness());
                        }
                    }
                }
            }
        }
    }
    let preparation_synlogical = preparation_deviation > AGREEMENT_TOL;
    let preparation_witness = if preparation_synlogical {
        best_witness.filter(|w| w.difference > AGREEMENT_TOL).or(fallback_witness)
    } else {
        None
    };

    let mut reproduction_deviation = 0.0_f64;
    let mut bayes = 0.0_f64;
    for (o, obs) in observables.iter().enumerate() {
        for (p, prep) in preparations.iter().enumerate() {
            let target = model.target_distribution(obs, prep)?;
            let marginal = &tables[o][p].outcome_marginal;
            if target.len() != marginal.len() {
                return Err(Error::DimMismatch { expected: marginal.len(), found: target.len() });
            }
            for (m, t) in marginal.iter().zip(&target) {
                reproduction_deviation = reproduction_deviation.max((m - Complex64::new(*t, 0.0)).norm());
            }
            bayes = bayes.max(bayes_deviation(&tables[o][p]));
        }
    }

    // ψ-epistemic overlap, read off the first observable's epistemic states.
    let mut psi_epistemic_witness: Option<OverlapWitness> = None;
    for p in 0..preparations.len() {
        for q in p + 1..preparations.len() {
            for l in 0..n_ontic {
                let overlap = (tables[0][p].epistemic[l] * tables[0][q].epistemic[l]).norm();
                if overlap > 0.0 && psi_epistemic_witness.as_ref().is_none_or(|w| overlap > w.overlap) {
                    psi_epistemic_witness = Some(OverlapWitness { preparations: (p, q), ontic: l, overlap });
                }
            }
        }
    }

    Ok(SynlogicalityReport {
        observable_synlogical: observable_deviation > AGREEMENT_TOL,
        observable_deviation,
        observable_witness: observable_witness.filter(|w| w.difference > AGREEMENT_TOL),
        preparation_synlogical,
        preparation_deviation,
        preparation_witness,
        reproduction_ok: reproduction_deviation <= AGREEMENT_TOL,
        reproduction_deviation,
        bayes_deviation: bayes,
        psi_epistemic_witness,
        excluded_entries: excluded,
    })
}
