use clap::Args;
use serde_json::{json, Map, Value};
use weakqp::quasiprob::{conditional_qp, joint_qp, marginal_qp, OutcomeLabel, QpDistribution};
use weakqp::AlphaParam;

use crate::error::{invalid, CliResult};
use crate::named;
use crate::output::{clean, emit, json_document, Csv, Provenance};
use crate::{Format, Global};

#[derive(Debug, Args)]
pub struct QpArgs {
    /// Conditional QP p(a|psi,phi) for pre-selection --pre and post-selection --post.
    #[arg(long, conflicts_with_all = ["joint", "marginal"])]
    conditional: bool,
    /// Joint QP p(b,a|psi) with --B as the reference observable.
    #[arg(long, conflicts_with = "marginal")]
    joint: bool,
    /// Marginal QP p(a|psi), i.e. the joint QP summed over --B.
    #[arg(long)]
    marginal: bool,
    /// Measured observable: pauli-x|y|z, spin-J[:axis], identity-N, position-N, JSON or @file.
    #[arg(long = "A", value_name = "OBS", allow_hyphen_values = true)]
    a: Option<String>,
    /// Reference observable for --joint and --marginal.
    #[arg(long = "B", value_name = "OBS", allow_hyphen_values = true)]
    b: Option<String>,
    /// Pre-selected state: 0, 1, +x, -x, +y, -y, basis-N:I, JSON or @file.
    #[arg(long, value_name = "STATE", allow_hyphen_values = true)]
    pre: Option<String>,
    /// Post-selected state for --conditional.
    #[arg(long, value_name = "STATE", allow_hyphen_values = true)]
    post: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Conditional,
    Joint,
    Marginal,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Conditional => "conditional",
            Mode::Joint => "joint",
            Mode::Marginal => "marginal",
        }
    }
}

/// Flags override the scenario file field by field.
fn field(flag: &Option<String>, scenario: &Map<String, Value>, key: &str) -> Option<String> {
    flag.clone().or_else(|| scenario.get(key).map(named::spec_text))
}

pub fn run(args: &QpArgs, global: &Global, scenario: Option<Value>) -> CliResult<()> {
    let scenario = match scenario {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return invalid("qp scenario must be a JSON object"),
    };
    let from_scenario = scenario.get("mode").and_then(Value::as_str);
    let mode = match (args.conditional, args.joint, args.marginal, from_scenario) {
        (true, _, _, _) => Mode::Conditional,
        (_, true, _, _) => Mode::Joint,
        (_, _, true, _) => Mode::Marginal,
        (_, _, _, Some("conditional")) => Mode::Conditional,
        (_, _, _, Some("joint")) => Mode::Joint,
        (_, _, _, Some("marginal")) => Mode::Marginal,
        _ => return invalid("choose one of --conditional, --joint, --marginal"),
    };
    let alpha = match (&global.alpha, scenario.get("alpha")) {
        (Some(a), _) => a.parse()?,
        (None, Some(v)) => named::alpha_value(v)?,
        (None, None) => AlphaParam::HALF,
    };

    let a_spec = field(&args.a, &scenario, "A");
    let b_spec = field(&args.b, &scenario, "B");
    let pre_spec = field(&args.pre, &scenario, "pre");
    let post_spec = field(&args.post, &scenario, "post");
    let require = |v: &Option<String>, what: &str| -> CliResult<String> {
        v.clone().map_or_else(|| invalid(format!("{} QP requires {what}", mode.name())), Ok)
    };
    let a_text = require(&a_spec, "--A")?;
    let pre_text = require(&pre_spec, "--pre (the state psi)")?;
    let a = named::observable(&a_text)?.decompose();
    let psi = named::state(&pre_text)?;

    let (dist, canonical) = match mode {
        Mode::Conditional => {
            let post_text = require(&post_spec, "--post (the post-selected state phi)")?;
            let phi = named::state(&post_text)?;
            let d = conditional_qp(&a, &psi, &phi, alpha)?;
            (d, json!({ "command": "qp", "mode": "conditional", "A": a_text, "pre": pre_text, "post": post_text }))
        }
        Mode::Joint | Mode::Marginal => {
            let b_text = require(&b_spec, "--B (the reference observable)")?;
            let b = named::observable(&b_text)?.decompose();
            let d = if mode == Mode::Joint {
                joint_qp(&b, &a, &psi, alpha)?
            } else {
                marginal_qp(&b, &a, &psi, alpha)?
            };
            (d, json!({ "command": "qp", "mode": mode.name(), "A": a_text, "B": b_text, "pre": pre_text }))
        }
    };
    let mut canonical = canonical;
    canonical["alpha"] = json!([clean(alpha.s()), clean(alpha.t())]);
    let provenance = Provenance::new(&canonical, alpha);

    let text = match global.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(&dist, &provenance),
        Format::Json => to_json(&dist, &provenance),
    };
    emit(global.out.as_deref(), &text)
}

/// Rows are listed from the largest eigenvalue down.
fn row_order(dist: &QpDistribution) -> Vec<usize> {
    (0..dist.len()).rev().collect()
}

fn to_csv(dist: &QpDistribution, provenance: &Provenance) -> String {
    let pairs = matches!(dist.outcomes().first(), Some(OutcomeLabel::Pair { .. }));
    let columns: &[&str] = if pairs { &["b", "a", "re", "im"] } else { &["a", "re", "im"] };
    let mut csv = Csv::new(provenance, columns);
    for i in row_order(dist) {
        let v = dist.values()[i];
        match dist.outcomes()[i] {
            OutcomeLabel::Single(a) => csv.row([a, v.re, v.im]),
            OutcomeLabel::Pair { b, a } => csv.row([b, a, v.re, v.im]),
        }
    }
    csv.into_string()
}

fn to_json(dist: &QpDistribution, provenance: &Provenance) -> String {
    let rows: Vec<Value> = row_order(dist)
        .into_iter()
        .map(|i| {
            let v = dist.values()[i];
            match dist.outcomes()[i] {
                OutcomeLabel::Single(a) => json!({ "a": clean(a), "re": clean(v.re), "im": clean(v.im) }),
                OutcomeLabel::Pair { b, a } => json!({ "b": clean(b), "a": clean(a), "re": clean(v.re), "im": clean(v.im) }),
            }
        })
        .collect();
    let total = dist.total();
    let mut body = Map::new();
    body.insert("kind".into(), Value::from(dist.kind().name()));
    body.insert("context".into(), Value::from(dist.context()));
    body.insert("values".into(), Value::Array(rows));
    body.insert("total".into(), json!({ "re": clean(total.re), "im": clean(total.im) }));
    json_document(provenance, body)
}
