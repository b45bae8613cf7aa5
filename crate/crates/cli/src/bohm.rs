use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use weakqp::bohm::{
    build_hamiltonian, ensemble_average, equivariance_check, integrate_trajectories, local_value, momentum_operator,
    position_operator, resolution_ratio, sample_initial_positions, velocity_field, BohmConfig, Grid1D, Potential,
    ValueField, WaveFunction,
};
use weakqp::{AlphaParam, Complex64, Observable};

use crate::error::{invalid, CliResult};
use crate::named;
use crate::output::{clean, complex_json, json_document, num, Csv, Provenance};
use crate::Global;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl GridSpec {
    pub fn build(&self) -> CliResult<Grid1D> {
        Ok(Grid1D::new(self.n_points, self.x_min, self.x_max)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    Gaussian {
        x0: f64,
        sigma0: f64,
        #[serde(default)]
        k0: f64,
    },
    /// `index`-th lowest eigenvector of the grid Hamiltonian.
    Eigenstate {
        #[serde(default)]
        index: usize,
    },
}

fn one() -> f64 {
    1.0
}

fn default_trajectories() -> usize {
    1000
}

fn default_record_every() -> usize {
    1
}

fn default_observables() -> Vec<String> {
    vec!["position".into(), "momentum".into(), "hamiltonian".into()]
}

fn free() -> Potential {
    Potential::Free
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohmScenario {
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub dt: f64,
    #[serde(default = "free")]
    pub potential: Potential,
    pub initial: Initial,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    pub t_final: f64,
    #[serde(default)]
    pub alpha: Option<Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Local-value fields to write: position, momentum, hamiltonian.
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    /// Write every n-th time step to trajectories.csv (the last one always).
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

pub fn initial_state(initial: &Initial, grid: Grid1D, h: &Observable) -> CliResult<WaveFunction> {
    match *initial {
        Initial::Gaussian { x0, sigma0, k0 } => Ok(WaveFunction::gaussian(grid, x0, sigma0, k0)?),
        Initial::Eigenstate { index } => {
            let d = h.decompose();
            if index >= d.len() {
                return invalid(format!("eigenstate index {index} out of range ({} levels)", d.len()));
            }
            if d.rank(index) != 1 {
                return invalid(format!("eigenvalue {index} is degenerate"));
            }
            // A rank-one projector's largest column is the eigenvector up to phase.
            let p = d.projector(index);
            let col = (0..p.ncols())
                .max_by(|&i, &j| p[(i, i)].re.total_cmp(&p[(j, j)].re))
                .expect("non-empty grid");
            let amps: Vec<Complex64> = (0..p.nrows()).map(|r| p[(r, col)]).collect();
            Ok(WaveFunction::normalized(grid, amps)?)
        }
    }
}

fn operator(name: &str, grid: &Grid1D, cfg: &BohmConfig, h: &Observable) -> CliResult<Observable> {
    Ok(match name {
        "position" => position_operator(grid),
        "momentum" => momentum_operator(grid, cfg.hbar()),
        "hamiltonian" => h.clone(),
        other => return invalid(format!("unknown field observable {other:?}; use position, momentum or hamiltonian")),
    })
}

fn value_csv(field: &ValueField, provenance: &Provenance) -> String {
    let mut csv = Csv::new(provenance, &["x", "re", "im"]);
    for (i, v) in field.values.iter().enumerate() {
        let v = v.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        csv.row([field.grid.x(i), v.re, v.im]);
    }
    csv.into_string()
}

fn velocity_csv(psi: &WaveFunction, cfg: &BohmConfig, provenance: &Provenance) -> String {
    let field = velocity_field(psi, cfg);
    let mut csv = Csv::new(provenance, &["x", "re", "im"]);
    for (i, v) in field.values.iter().enumerate() {
        csv.row([field.grid.x(i), v.unwrap_or(f64::NAN), v.map_or(f64::NAN, |_| 0.0)]);
    }
    csv.into_string()
}

fn write(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn run(global: &Global, scenario: Option<Value>) -> CliResult<()> {
    let Some(raw) = scenario else {
        return invalid("bohm needs --scenario FILE");
    };
    let sc: BohmScenario = serde_json::from_value(raw)?;
    let alpha = match (&global.alpha, &sc.alpha) {
        (Some(a), _) => a.parse()?,
        (None, Some(v)) => named::alpha_value(v)?,
        (None, None) => AlphaParam::HALF,
    };
    let Some(seed) = global.seed.or(sc.seed) else {
        return invalid("bohm samples initial positions and needs a seed (--seed or \"seed\")");
    };
    if sc.trajectories == 0 {
        return invalid("trajectories must be at least 1");
    }
    if sc.record_every == 0 {
        return invalid("record_every must be at least 1");
    }
    let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("bohm-output"));

    let grid = sc.grid.build()?;
    let cfg = BohmConfig::with_potential(&grid, sc.hbar, sc.mass, sc.dt, &sc.potential)?;
    let h = build_hamiltonian(&grid, &cfg)?;
    let psi0 = initial_state(&sc.initial, grid, &h)?;
    let operators: Vec<(String, Observable)> = sc
        .observables
        .iter()
        .map(|n| operator(n, &grid, &cfg, &h).map(|o| (n.clone(), o)))
        .collect::<CliResult<_>>()?;

    let mut canonical = serde_json::to_value(&sc)?;
    canonical["alpha"] = json!([clean(alpha.s()), clean(alpha.t())]);
    canonical["seed"] = json!(seed);
    canonical["command"] = json!("bohm");
    let provenance = Provenance::new(&canonical, alpha);

    let starts = sample_initial_positions(&psi0, sc.trajectories, seed)?;
    let ratio = resolution_ratio(&psi0, &h, &cfg)?;
    let ensemble = integrate_trajectories(&psi0, &h, &cfg, &starts, sc.t_final)?.with_seed(seed);
    let psi_t = &ensemble.final_state;

    fs::create_dir_all(&dir)?;
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=ensemble.len()).map(|k| format!("x_{k}")));
    let mut text = provenance.csv_header();
    text.push_str(&columns.join(","));
    text.push('\n');
    let last = ensemble.times.len() - 1;
    for (j, t) in ensemble.times.iter().enumerate() {
        if j % sc.record_every != 0 && j != last {
            continue;
        }
        text.push_str(&num(*t));
        for path in &ensemble.positions {
            text.push(',');
            text.push_str(&num(path[j]));
        }
        text.push('\n');
    }
    write(&dir, "trajectories.csv", &text)?;

    write(&dir, "field_velocity_initial.csv", &velocity_csv(&psi0, &cfg, &provenance))?;
    write(&dir, "field_velocity_final.csv", &velocity_csv(psi_t, &cfg, &provenance))?;
    let mut averages = Map::new();
    for (name, op) in &operators {
        let initial = local_value(op, &psi0, alpha)?.tagged(name.as_str());
        let last_field = local_value(op, psi_t, alpha)?.tagged(name.as_str());
        write(&dir, &format!("field_{name}_initial.csv"), &value_csv(&initial, &provenance))?;
        write(&dir, &format!("field_{name}_final.csv"), &value_csv(&last_field, &provenance))?;
        averages.insert(
            name.clone(),
            json!({
                "initial": complex_json(ensemble_average(&initial, &psi0)?),
                "final": complex_json(ensemble_average(&last_field, psi_t)?),
            }),
        );
    }

    let m = ensemble.len() as f64;
    let ks = equivariance_check(&ensemble, psi_t);
    let (mean0, width0) = psi0.position_moments();
    let (mean_t, width_t) = psi_t.position_moments();
    let mut body = Map::new();
    body.insert("seed".into(), json!(seed));
    body.insert("trajectories".into(), json!(ensemble.len()));
    body.insert("steps".into(), json!(last));
    body.insert("t_final".into(), json!(clean(sc.t_final)));
    body.insert("ks_statistic".into(), json!(clean(ks)));
    body.insert("ks_critical_95".into(), json!(1.36 / m.sqrt()));
    body.insert("ordering_preserved".into(), json!(ensemble.ordering_preserved()));
    body.insert("norm_final".into(), json!(psi_t.norm_squared()));
    body.insert("position_mean".into(), json!({ "initial": clean(mean0), "final": clean(mean_t) }));
    body.insert("position_width".into(), json!({ "initial": width0, "final": width_t }));
    body.insert("resolution_ratio".into(), json!(ratio));
    body.insert("ensemble_averages".into(), Value::Object(averages));
    write(&dir, "equivariance.json", &json_document(&provenance, body))?;
    Ok(())
}
