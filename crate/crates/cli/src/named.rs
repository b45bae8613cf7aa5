//! Built-in observables and states, plus explicit JSON forms.

use std::fs;

use serde_json::Value;
use weakqp::hilbert::{ComplexArrayJson, SpinAxis};
use weakqp::{AlphaParam, Observable, StateVector};

use crate::error::{invalid, CliError, CliResult};

/// `{dim, re, im}` inline, `@path` to such a file, or a plain name.
fn explicit(spec: &str) -> CliResult<Option<ComplexArrayJson>> {
    let text = if let Some(path) = spec.strip_prefix('@') {
        fs::read_to_string(path).map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?
    } else if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        return Ok(None);
    };
    Ok(Some(serde_json::from_str(&text)?))
}

fn parse_spin(j: &str) -> CliResult<usize> {
    let twice = match j.split_once('/') {
        Some((num, "2")) => num.parse::<usize>().ok(),
        Some(_) => None,
        None => j.parse::<usize>().ok().map(|v| 2 * v),
    };
    match twice {
        Some(t) if t > 0 => Ok(t),
        _ => invalid(format!("spin must be a positive integer or half-integer like 3/2, got {j:?}")),
    }
}

/// `pauli-x|y|z`, `spin-J[:x|y|z]`, `identity-N`, `position-N`, or explicit.
pub fn observable(spec: &str) -> CliResult<Observable> {
    if let Some(arr) = explicit(spec)? {
        return Ok(arr.to_observable()?);
    }
    let lower = spec.trim().to_ascii_lowercase();
    let sized = |prefix: &str| -> Option<CliResult<usize>> {
        lower.strip_prefix(prefix).map(|n| {
            n.parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| CliError::Validation(format!("bad dimension in {spec:?}")))
        })
    };
    match lower.as_str() {
        "pauli-x" => return Ok(Observable::pauli_x()),
        "pauli-y" => return Ok(Observable::pauli_y()),
        "pauli-z" => return Ok(Observable::pauli_z()),
        _ => {}
    }
    if let Some(rest) = lower.strip_prefix("spin-") {
        let (j, axis) = rest.split_once(':').unwrap_or((rest, "z"));
        let axis = match axis {
            "x" => SpinAxis::X,
            "y" => SpinAxis::Y,
            "z" => SpinAxis::Z,
            other => return invalid(format!("unknown spin axis {other:?}")),
        };
        return Ok(Observable::spin(parse_spin(j)?, axis)?);
    }
    if let Some(d) = sized("identity-") {
        return Ok(Observable::identity(d?));
    }
    if let Some(d) = sized("position-") {
        return Ok(Observable::position(d?));
    }
    invalid(format!("unknown observable {spec:?}"))
}

/// `0`, `1`, `+x`, `-x`, `+y`, `-y`, `basis-N:I`, or explicit.
pub fn state(spec: &str) -> CliResult<StateVector> {
    if let Some(arr) = explicit(spec)? {
        return Ok(arr.to_state()?);
    }
    Ok(match spec.trim() {
        "0" => StateVector::zero(),
        "1" => StateVector::one(),
        "+x" => StateVector::plus_x(),
        "-x" => StateVector::minus_x(),
        "+y" => StateVector::plus_y(),
        "-y" => StateVector::minus_y(),
        other => {
            let Some((d, i)) = other.strip_prefix("basis-").and_then(|r| r.split_once(':')) else {
                return invalid(format!("unknown state {spec:?}"));
            };
            match (d.parse(), i.parse()) {
                (Ok(d), Ok(i)) => StateVector::basis(d, i)?,
                _ => return invalid(format!("bad basis state {spec:?}")),
            }
        }
    })
}

/// Scenario values may name a built-in (string) or give `{dim, re, im}`.
pub fn spec_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `0.5`, `"0.5,0.2"` or `[0.5, 0.2]`.
pub fn alpha_value(v: &Value) -> CliResult<AlphaParam> {
    match v {
        Value::Number(n) => Ok(AlphaParam::real(n.as_f64().unwrap_or(f64::NAN))?),
        Value::String(s) => Ok(s.parse()?),
        Value::Array(a) if a.len() == 2 => match (a[0].as_f64(), a[1].as_f64()) {
            (Some(re), Some(im)) => Ok(AlphaParam::from_parts(re, im)?),
            _ => invalid("alpha array must hold two numbers"),
        },
        _ => invalid(format!("cannot read alpha from {v}")),
    }
}
