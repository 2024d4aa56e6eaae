//! Key-value description of a generic driving measure.
//!
//! ```text
//! # Beta(a, b) density, a, b > 0
//! kind = beta
//! a = 0.5
//! b = 1.5
//! ```
//!
//! ```text
//! # density values on an equally spaced grid of [0, 1], linearly interpolated
//! kind = grid
//! values = 0, 1.2, 1.9, 1.2, 0
//! normalize = true
//! ```
//!
//! Blank lines and `#` comments are ignored. Without `normalize = true` the
//! density must already integrate to 1.

use crate::HarnessError;
use coalesce_core::numerics::log_beta;
use coalesce_core::rates::{Density, LambdaMeasure};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("measure file line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().to_ascii_lowercase();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(HarnessError::Usage(format!("measure file: duplicate key {key}")));
        }
    }
    Ok(map)
}

fn number(map: &BTreeMap<String, String>, key: &str) -> Result<f64, HarnessError> {
    let v = map
        .get(key)
        .ok_or_else(|| HarnessError::Usage(format!("measure file: missing key {key}")))?;
    v.parse()
        .map_err(|_| HarnessError::Usage(format!("measure file: {key} = {v} is not a number")))
}

/// Parses the text of a measure file; `label` names the measure in reports.
pub fn parse_measure(text: &str, label: &str) -> Result<(LambdaMeasure, String), HarnessError> {
    let map = parse_pairs(text)?;
    let kind = map
        .get("kind")
        .ok_or_else(|| HarnessError::Usage("measure file: missing key kind".into()))?
        .to_ascii_lowercase();
    let normalize = match map.get("normalize").map(|s| s.to_ascii_lowercase()) {
        None => false,
        Some(s) if s == "true" => true,
        Some(s) if s == "false" => false,
        Some(s) => return Err(HarnessError::Usage(format!("measure file: normalize = {s}"))),
    };
    let (density, description): (Density, String) = match kind.as_str() {
        "beta" => {
            let a = number(&map, "a")?;
            let b = number(&map, "b")?;
            if !(a > 0.0 && b > 0.0) {
                return Err(HarnessError::Usage(format!("measure file: beta needs a, b > 0, got {a}, {b}")));
            }
            let lb = log_beta(a, b)?;
            let d: Density = Arc::new(move |x: f64, c: f64| ((a - 1.0) * x.ln() + (b - 1.0) * c.ln() - lb).exp());
            (d, format!("beta density a = {a}, b = {b}"))
        }
        "grid" => {
            let raw = map
                .get("values")
                .ok_or_else(|| HarnessError::Usage("measure file: missing key values".into()))?;
            let values = raw
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| HarnessError::Usage("measure file: values must be numbers".into()))?;
            if values.len() < 2 || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(HarnessError::Usage(
                    "measure file: grid needs at least two finite non-negative values".into(),
                ));
            }
            let cells = (values.len() - 1) as f64;
            let n = values.len();
            let d: Density = Arc::new(move |x: f64, _c: f64| {
                let pos = (x * cells).clamp(0.0, cells);
                let k = (pos.floor() as usize).min(n - 2);
                let w = pos - k as f64;
                values[k] * (1.0 - w) + values[k + 1] * w
            });
            (d, format!("grid density with {n} points"))
        }
        other => return Err(HarnessError::Usage(format!("measure file: unknown kind {other}"))),
    };
    let measure = if normalize {
        LambdaMeasure::generic_normalized(density, label)?
    } else {
        LambdaMeasure::generic(density, label)?
    };
    Ok((measure, description))
}

pub fn load_measure(path: &Path) -> Result<(LambdaMeasure, String), HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Usage(format!("cannot read measure file {}: {e}", path.display())))?;
    parse_measure(&text, &path.display().to_string())
}
