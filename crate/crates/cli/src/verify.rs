use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use weakqp::alpha::{alpha_commut_defect, alpha_product, commutator};
use weakqp::bohm::{ensemble_average, local_value, Grid1D, WaveFunction};
use weakqp::quasiprob::{
    born_probabilities, check_morita_conditions, commutator_asymmetry, conditional_qp, joint_qp, marginal_qp,
    qp_of_set, OutcomeSet,
};
use weakqp::{max_abs_diff, random, AlphaParam, CMatrix, Complex64};

use crate::error::{invalid, CliError, CliResult};
use crate::output::{clean, emit, json_document, Provenance};
use crate::{Format, Global};

pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Hilbert-space dimension of the random instances.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Random instances per identity.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Adds this offset to every marginal QP value before the Born-rule check.
    #[arg(long, hide = true, default_value_t = 0.0)]
    perturb: f64,
}

#[derive(Debug, Serialize)]
struct IdentityResult {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Default)]
struct Tracker {
    worst: Vec<(&'static str, f64)>,
}

impl Tracker {
    fn record(&mut self, name: &'static str, deviation: f64) {
        // NaN counts as a failure.
        let deviation = if deviation.is_nan() { f64::INFINITY } else { deviation };
        match self.worst.iter_mut().find(|(n, _)| *n == name) {
            Some((_, w)) => *w = w.max(deviation),
            None => self.worst.push((name, deviation)),
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn run_trial(rng: &mut ChaCha8Rng, dim: usize, perturb: f64, t: &mut Tracker) -> weakqp::Result<()> {
    let a = random::hermitian(rng, dim).decompose();
    let b = random::hermitian(rng, dim).decompose();
    let psi = random::state(rng, dim);
    let phi = random::state(rng, dim);
    let alpha = random::alpha(rng);

    // K1 over a random two-block partition, K2 over the full set.
    let n = a.len();
    let first: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    let rest: Vec<usize> = (0..n).filter(|i| !first.contains(i)).collect();
    let s1 = OutcomeSet::new(first, n)?;
    let s2 = OutcomeSet::new(rest, n)?;
    let whole = qp_of_set(&a, &psi, &phi, alpha, &OutcomeSet::all(n))?;
    let split = qp_of_set(&a, &psi, &phi, alpha, &s1)? + qp_of_set(&a, &psi, &phi, alpha, &s2)?;
    t.record("K1 additivity", (whole - split).norm());
    t.record("K2 normalization", (whole - c(1.0)).norm());
    t.record("K2 joint normalization", joint_qp(&b, &a, &psi, alpha)?.normalization_defect());

    let marginal = marginal_qp(&b, &a, &psi, alpha)?;
    let born = born_probabilities(&a, &psi)?;
    let dev = marginal.values().iter().zip(&born).map(|(m, p)| (m + perturb - c(*p)).norm()).fold(0.0, f64::max);
    t.record("Born-rule marginal", dev);

    let asym = commutator_asymmetry(&b, &a, &psi, alpha)?;
    let mut worst = 0.0_f64;
    for (bi, pb) in b.projectors().iter().enumerate() {
        for (ai, pa) in a.projectors().iter().enumerate() {
            let comm = commutator(pb, pa)?;
            let expect = psi.amplitudes().dotc(&(comm * psi.amplitudes())) * (alpha.value() * 2.0 - 1.0);
            worst = worst.max((asym[bi][ai] - expect).norm());
        }
    }
    t.record("commutator asymmetry", worst);

    let zero = conditional_qp(&a, &psi, &phi, AlphaParam::ZERO)?;
    let one = conditional_qp(&a, &psi, &phi, AlphaParam::ONE)?;
    let conj = zero.values().iter().zip(one.values()).map(|(x, y)| (x - y.conj()).norm()).fold(0.0, f64::max);
    t.record("conjugation symmetry", conj);
    let half = joint_qp(&b, &a, &psi, AlphaParam::HALF)?;
    let swapped = joint_qp(&a, &b, &psi, AlphaParam::HALF)?;
    let mut swap = half.max_imaginary();
    for bi in 0..b.len() {
        for ai in 0..a.len() {
            swap = swap.max((half.get(bi, ai) - swapped.get(ai, bi)).norm());
        }
    }
    t.record("alpha=1/2 reality and swap symmetry", swap);

    let md = dim.max(3);
    let (mp, mq) = (random::state(rng, md), random::state(rng, md));
    let ma = random::hermitian(rng, md).decompose();
    let report = check_morita_conditions(&mp, &mq, alpha, &ma);
    t.record("Morita C1 additivity", report.additivity_deviation);
    t.record("Morita C2 boundary values", report.boundary_deviation);

    let x = random::matrix(rng, dim);
    let y = random::matrix(rng, dim);
    let xy = &x * &y;
    let yx = &y * &x;
    let comm = &xy - &yx;
    let anti = &xy + &yx;
    let half_anti = &anti * c(0.5);
    t.record(
        "alpha-product endpoints",
        max_abs_diff(&alpha_product(&x, &y, AlphaParam::ONE)?, &xy)
            .max(max_abs_diff(&alpha_product(&x, &y, AlphaParam::ZERO)?, &yx)),
    );
    t.record("alpha-product Jordan", max_abs_diff(&alpha_product(&x, &y, AlphaParam::HALF)?, &half_anti));
    let s_only = alpha_product(&x, &y, AlphaParam::real(alpha.s())?)? + &comm * Complex64::new(0.0, alpha.t());
    t.record("alpha-product real/imaginary split", max_abs_diff(&alpha_product(&x, &y, alpha)?, &s_only));
    let special: CMatrix = &half_anti + &comm / Complex64::new(0.0, 2.0);
    t.record(
        "alpha-product at (1-i)/2",
        max_abs_diff(&alpha_product(&x, &y, AlphaParam::from_parts(0.5, -0.5)?)?, &special),
    );
    t.record(
        "alpha-product symmetric sum",
        max_abs_diff(&(alpha_product(&x, &y, alpha)? + alpha_product(&y, &x, alpha)?), &anti),
    );
    t.record(
        "alpha-product antisymmetric difference",
        max_abs_diff(&alpha_commut_defect(&x, &y, alpha)?, &(&comm * (alpha.value() * 2.0 - 1.0))),
    );
    Ok(())
}

fn ensemble_trial(rng: &mut ChaCha8Rng, dim: usize, t: &mut Tracker) -> weakqp::Result<()> {
    let n = dim.max(16);
    let grid = Grid1D::new(n, -6.0, 6.0)?;
    let psi = WaveFunction::gaussian(grid, rng.random_range(-1.0..1.0), rng.random_range(1.0..1.5), rng.random_range(-2.0..2.0))?;
    let a = random::hermitian(rng, n);
    let state = psi.to_state();
    let expect = a.expectation(&state)?;
    let alpha = random::alpha(rng);
    let avg = ensemble_average(&local_value(&a, &psi, alpha)?, &psi)?;
    t.record("alpha-independent ensemble average", (avg - expect).norm());
    Ok(())
}

pub fn run(args: &VerifyArgs, global: &Global) -> CliResult<()> {
    if global.format == Some(Format::Csv) {
        return invalid("verify reports are JSON only");
    }
    if args.trials == 0 {
        return invalid("--trials must be at least 1");
    }
    if args.dim < 2 {
        return invalid("--dim must be at least 2");
    }
    if !args.perturb.is_finite() {
        return invalid("--perturb must be finite");
    }
    let seed = global.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Tracker::default();
    for _ in 0..args.trials {
        run_trial(&mut rng, args.dim, args.perturb, &mut tracker)?;
    }
    for _ in 0..args.trials.min(10) {
        ensemble_trial(&mut rng, args.dim, &mut tracker)?;
    }

    let results: Vec<IdentityResult> = tracker
        .worst
        .iter()
        .map(|&(name, w)| IdentityResult { name, max_deviation: w, tolerance: TOLERANCE, passed: w <= TOLERANCE })
        .collect();
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();

    let canonical = json!({
        "command": "verify", "dim": args.dim, "trials": args.trials, "seed": seed, "perturb": clean(args.perturb),
    });
    let provenance = Provenance::new(&canonical, AlphaParam::HALF);
    let mut body = Map::new();
    body.insert("alpha_sampling".into(), Value::from("uniform on [-2,2] x [-2,2] per trial"));
    body.insert("seed".into(), json!(seed));
    body.insert("dim".into(), json!(args.dim));
    body.insert("trials".into(), json!(args.trials));
    body.insert("identities".into(), serde_json::to_value(&results).map_err(|e| CliError::Runtime(e.to_string()))?);
    body.insert("passed".into(), json!(failed.is_empty()));
    emit(global.out.as_deref(), &json_document(&provenance, body))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Identity(failed.join(", ")))
    }
}
