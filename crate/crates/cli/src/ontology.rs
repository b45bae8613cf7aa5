use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use weakqp::bohm::{build_hamiltonian, momentum_operator, position_operator, BohmConfig, Potential, WaveFunction};
use weakqp::hilbert::ComplexArrayJson;
use weakqp::ontology::{classify_synlogicality, BohmianModel, ClassicalToy, DeterministicObservable, OsToy};
use weakqp::{random, AlphaParam, SpectralDecomposition, StateVector};

use crate::bohm::GridSpec;
use crate::error::{invalid, CliError, CliResult};
use crate::named;
use crate::output::{clean, emit, json_document, Provenance};
use crate::{Format, Global};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableProbe {
    /// position, momentum, hamiltonian, random, or any named observable of matching size.
    Named(String),
    Matrix(ComplexArrayJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianProbe {
    #[serde(default)]
    kind: Option<String>,
    x0: f64,
    sigma0: f64,
    #[serde(default)]
    k0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PreparationProbe {
    /// `random`
    Named(String),
    Gaussian(GaussianProbe),
    State(ComplexArrayJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyObservable {
    assignment: Vec<usize>,
    outcomes: usize,
    #[serde(default)]
    shift: usize,
}

fn one() -> f64 {
    1.0
}

fn free() -> Potential {
    Potential::Free
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OntologyScenario {
    BohmianGrid {
        grid: GridSpec,
        #[serde(default = "one")]
        hbar: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "free")]
        potential: Potential,
        #[serde(default)]
        alpha: Option<Value>,
        #[serde(default)]
        seed: Option<u64>,
        observables: Vec<ObservableProbe>,
        preparations: Vec<PreparationProbe>,
    },
    ClassicalToy {
        ontic: usize,
        observables: Vec<ToyObservable>,
        preparations: Vec<Vec<f64>>,
    },
    OsToy {
        ontic: usize,
        observables: Vec<ToyObservable>,
        preparations: Vec<Vec<f64>>,
    },
}

fn toy_observables(obs: &[ToyObservable]) -> CliResult<Vec<DeterministicObservable>> {
    obs.iter()
        .map(|o| Ok(DeterministicObservable::new(o.assignment.clone(), o.outcomes)?.with_shift(o.shift)))
        .collect()
}

struct Rng {
    seed: Option<u64>,
    rng: Option<ChaCha8Rng>,
}

impl Rng {
    fn get(&mut self) -> CliResult<&mut ChaCha8Rng> {
        let Some(seed) = self.seed else {
            return invalid("random probes need a seed (--seed or \"seed\")");
        };
        Ok(self.rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(seed)))
    }
}

pub fn run(global: &Global, scenario: Option<Value>) -> CliResult<()> {
    if global.format == Some(Format::Csv) {
        return invalid("ontology reports are JSON only");
    }
    let Some(raw) = scenario else {
        return invalid("ontology needs --scenario FILE");
    };
    let sc: OntologyScenario = serde_json::from_value(raw)?;
    let mut canonical = serde_json::to_value(&sc)?;
    canonical["command"] = json!("ontology");

    let (model_name, alpha, report) = match &sc {
        OntologyScenario::BohmianGrid { grid, hbar, mass, potential, alpha, seed, observables, preparations } => {
            let alpha = match (&global.alpha, alpha) {
                (Some(a), _) => a.parse()?,
                (None, Some(v)) => named::alpha_value(v)?,
                (None, None) => AlphaParam::HALF,
            };
            let seed = global.seed.or(*seed);
            canonical["alpha"] = json!([clean(alpha.s()), clean(alpha.t())]);
            canonical["seed"] = json!(seed);
            let grid = grid.build()?;
            let n = grid.n_points();
            // dt only matters for evolution, which classification never runs.
            let cfg = BohmConfig::with_potential(&grid, *hbar, *mass, 1.0, potential)?;
            let mut rng = Rng { seed, rng: None };
            let obs: Vec<SpectralDecomposition> = observables
                .iter()
                .map(|probe| {
                    let o = match probe {
                        ObservableProbe::Named(name) => match name.as_str() {
                            "position" => position_operator(&grid),
                            "momentum" => momentum_operator(&grid, cfg.hbar()),
                            "hamiltonian" => build_hamiltonian(&grid, &cfg)?,
                            "random" => random::hermitian(rng.get()?, n),
                            other => named::observable(other)?,
                        },
                        ObservableProbe::Matrix(m) => m.to_observable()?,
                    };
                    if o.dim() != n {
                        return invalid(format!("observable has dimension {}, grid has {n} points", o.dim()));
                    }
                    Ok(o.decompose())
                })
                .collect::<CliResult<_>>()?;
            let preps: Vec<StateVector> = preparations
                .iter()
                .map(|probe| -> CliResult<StateVector> {
                    Ok(match probe {
                        PreparationProbe::Named(name) if name == "random" => random::state(rng.get()?, n),
                        PreparationProbe::Named(other) => named::state(other)?,
                        PreparationProbe::Gaussian(g) => {
                            if g.kind.as_deref().is_some_and(|k| k != "gaussian") {
                                return invalid(format!("unknown preparation kind {:?}", g.kind));
                            }
                            WaveFunction::gaussian(grid, g.x0, g.sigma0, g.k0)?.to_state()
                        }
                        PreparationProbe::State(s) => s.to_state()?,
                    })
                })
                .collect::<CliResult<_>>()?;
            let model = BohmianModel::new(n, alpha);
            ("bohmian-grid", alpha, classify_synlogicality(&model, &obs, &preps)?)
        }
        OntologyScenario::ClassicalToy { ontic, observables, preparations } => {
            let model = ClassicalToy::new(*ontic);
            let report = classify_synlogicality(&model, &toy_observables(observables)?, preparations)?;
            ("classical-toy", AlphaParam::HALF, report)
        }
        OntologyScenario::OsToy { ontic, observables, preparations } => {
            let model = OsToy::new(*ontic);
            let report = classify_synlogicality(&model, &toy_observables(observables)?, preparations)?;
            ("os-toy", AlphaParam::HALF, report)
        }
    };

    let provenance = Provenance::new(&canonical, alpha);
    let mut body = Map::new();
    body.insert("model".into(), Value::from(model_name));
    body.insert("classification".into(), Value::from(report.classification()));
    body.insert("report".into(), serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?);
    emit(global.out.as_deref(), &json_document(&provenance, body))
}
