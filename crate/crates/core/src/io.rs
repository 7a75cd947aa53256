//! Parameter files and the provenance header shared by every output.
//!
//! Parameter files are flat `key = value` lines; `#` starts a comment.
//! Missing keys keep their defaults (t = 1, everything else 0).

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::TOOLKIT_VERSION;

/// Schema tag carried by every JSON and CSV output.
pub const FORMAT: &str = "nhdeg/1";

pub fn parse_params(text: &str) -> Result<ModelParams> {
    let mut p = ModelParams::default();
    let mut seen: Vec<String> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: no + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let x: f64 = value
            .parse()
            .map_err(|_| parse_err(format!("value {value:?} for {key} is not a number")))?;
        if seen.iter().any(|k| k == key) {
            return Err(parse_err(format!("duplicate key {key}")));
        }
        p.set(key, x)
            .ok_or_else(|| parse_err(format!("unknown key {key:?}")))?;
        seen.push(key.to_string());
    }
    p.validate()?;
    Ok(p)
}

/// Writes every key in canonical order; round-trips through [`parse_params`] exactly.
pub fn format_params(p: &ModelParams) -> String {
    ModelParams::KEYS
        .iter()
        .map(|k| format!("{k} = {}\n", p.get(k).expect("known key")))
        .collect()
}

pub fn read_params_file(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    parse_params(&text)
}

/// Provenance fields present in every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub params: ModelParams,
    pub toolkit_version: String,
}

impl Header {
    pub fn new(params: &ModelParams) -> Self {
        Header {
            format: FORMAT.to_string(),
            params: *params,
            toolkit_version: TOOLKIT_VERSION.to_string(),
        }
    }
}

/// JSON document = provenance header fields merged with the fields of `body`.
pub fn document<T: Serialize>(params: Option<&ModelParams>, body: &T) -> Value {
    let mut map = Map::new();
    map.insert("format".into(), Value::from(FORMAT));
    if let Some(p) = params {
        map.insert(
            "params".into(),
            serde_json::to_value(p).expect("params serialize"),
        );
    }
    map.insert("toolkit_version".into(), Value::from(TOOLKIT_VERSION));
    match serde_json::to_value(body).expect("report serializes") {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    Value::Object(map)
}

/// First line of a CSV file: `# ` followed by the compact JSON header.
pub fn csv_header_line(params: &ModelParams, extra: &[(&str, Value)]) -> String {
    let mut v = serde_json::to_value(Header::new(params)).expect("header serializes");
    if let Value::Object(map) = &mut v {
        for (k, x) in extra {
            map.insert((*k).to_string(), x.clone());
        }
    }
    format!("# {v}")
}

/// Parses a `# {json}` CSV header line.
pub fn parse_csv_header(line: &str) -> Result<Value> {
    let body = line.strip_prefix('#').ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `#` header line".into(),
    })?;
    let v: Value = serde_json::from_str(body.trim()).map_err(|e| Error::Parse {
        line: 1,
        message: format!("header is not JSON: {e}"),
    })?;
    if v.get("format").and_then(Value::as_str) != Some(FORMAT) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header format is not {FORMAT}"),
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments_and_defaults() {
        let p = parse_params("# regime\n t1 = 0.75 # diagonal\nga=0.5\n\ngb = 0.3\n").unwrap();
        assert_eq!(p.t, 1.0);
        assert_eq!(p.t1, 0.75);
        assert_eq!(p.ga, 0.5);
        assert_eq!(p.gb, 0.3);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_params("t1 = 1\nfoo = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(
            parse_params("t1 1").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_params("v = 1\nv = 2").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(parse_params("t = -1").is_err());
    }

    #[test]
    fn format_round_trips() {
        let p = ModelParams {
            t: 1.0,
            t1: 0.1 + 0.2,
            v: -3.259_4,
            gamma: std::f64::consts::FRAC_PI_2,
            gx: 1e-300,
            gy: -0.0,
            ga: 0.5,
            gb: 0.3,
            mu_a: 0.0,
            mu_b: 2.5,
        };
        assert_eq!(parse_params(&format_params(&p)).unwrap(), p);
    }

    #[test]
    fn documents_carry_provenance() {
        let p = ModelParams::default();
        let doc = document(Some(&p), &serde_json::json!({"holds": true}));
        assert_eq!(doc["format"], FORMAT);
        assert_eq!(doc["holds"], true);
        assert_eq!(doc["toolkit_version"], TOOLKIT_VERSION);
        let line = csv_header_line(&p, &[("nx", Value::from(3))]);
        let back = parse_csv_header(&line).unwrap();
        assert_eq!(back["nx"], 3);
        assert!(parse_csv_header("kx,ky").is_err());
    }
}
