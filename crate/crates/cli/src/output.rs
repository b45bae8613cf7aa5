use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use weakqp::{AlphaParam, Complex64};

use crate::error::CliResult;

pub const TOOL: &str = concat!("weakqp ", env!("CARGO_PKG_VERSION"));

/// Shortest round-trip decimal, with `-0` written as `0.0`.
pub fn num(x: f64) -> String {
    format!("{:?}", clean(x))
}

pub fn clean(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": clean(z.re), "im": clean(z.im) })
}

/// What every output file records about how it was produced.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub scenario_hash: String,
    pub alpha: AlphaParam,
}

impl Provenance {
    /// Hashes the canonical (key-sorted, compact) JSON form of the scenario.
    pub fn new(scenario: &Value, alpha: AlphaParam) -> Self {
        let bytes = serde_json::to_vec(scenario).expect("JSON values always serialize");
        let digest = Sha256::digest(&bytes);
        let scenario_hash = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Self { scenario_hash, alpha }
    }

    fn alpha_text(&self) -> String {
        format!("{},{}", num(self.alpha.s()), num(self.alpha.t()))
    }

    pub fn csv_header(&self) -> String {
        format!("# {TOOL} scenario_sha256={} alpha={}\n", self.scenario_hash, self.alpha_text())
    }

    /// Leading fields of a JSON document.
    pub fn json_fields(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("tool".into(), Value::from(TOOL));
        m.insert("scenario_sha256".into(), Value::from(self.scenario_hash.clone()));
        m.insert("alpha".into(), json!({ "re": clean(self.alpha.s()), "im": clean(self.alpha.t()) }));
        m
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(provenance: &Provenance, columns: &[&str]) -> Self {
        let mut text = provenance.csv_header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = f64>) {
        let cells: Vec<String> = cells.into_iter().map(num).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn json_document(provenance: &Provenance, body: Map<String, Value>) -> String {
    let mut doc = provenance.json_fields();
    doc.extend(body);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, content: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => std::io::stdout().lock().write_all(content.as_bytes())?,
    }
    Ok(())
}
