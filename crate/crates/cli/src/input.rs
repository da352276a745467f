//! JSON input documents.
//!
//! A system file holds `Y' = G·Y`:
//!
//! ```json
//! { "p": 3, "center": "0", "region": { "kind": "disc", "radius": "0" },
//!   "G": [[ ["1"] ]] }
//! ```
//!
//! Matrix entries are constants, coefficient lists (exact expressions,
//! lowest degree first) or series objects as written by this tool. A module
//! file is what `deform` emits: the same fields plus `q`, `h` and `A`, and
//! optionally the source `system` (needed by the derivative method).

use std::path::Path;

use padic_confluence::matrix::SeriesMatrix;
use padic_confluence::strat::{DiffSystem, Region};
use padic_confluence::{DifferenceOperator, Error, PadicScalar, Result, Series};
use serde_json::Value;

use crate::expr::parse_scalar;

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column())))
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        other => Error::Parse(format!("{path}: {other}")),
    }
}

/// A scalar given as an expression string or a JSON integer.
pub fn scalar_field(v: &Value, path: &str, p: u64, prec: i64) -> Result<PadicScalar> {
    match v {
        Value::String(s) => parse_scalar(s, p, prec).map_err(|e| at(path, e)),
        Value::Number(n) if n.is_i64() => Ok(PadicScalar::exact_int(p, n.as_i64().unwrap(), prec)),
        Value::Object(_) => PadicScalar::from_json(v).map_err(|e| at(path, e)),
        _ => Err(Error::Parse(format!("{path}: expected an exact expression"))),
    }
}

fn entry(v: &Value, path: &str, center: &PadicScalar, prec: i64) -> Result<Series<PadicScalar>> {
    let p = center.p();
    match v {
        Value::Array(items) => {
            let coeffs = items
                .iter()
                .enumerate()
                .map(|(k, x)| scalar_field(x, &format!("{path}[{k}]"), p, prec))
                .collect::<Result<Vec<_>>>()?;
            Ok(Series::polynomial(center.clone(), coeffs))
        }
        Value::Object(_) => {
            let s = Series::from_json(v).map_err(|e| at(path, e))?;
            if s.prime() != p {
                return Err(Error::Parse(format!("{path}: series over p = {}, expected {p}", s.prime())));
            }
            Ok(s)
        }
        Value::String(_) | Value::Number(_) => Ok(Series::constant(center.clone(), scalar_field(v, path, p, prec)?)),
        _ => Err(Error::Parse(format!("{path}: expected a coefficient list or a series object"))),
    }
}

pub fn matrix_field(v: &Value, path: &str, center: &PadicScalar, prec: i64) -> Result<SeriesMatrix<PadicScalar>> {
    if v.get("entries").is_some() {
        return SeriesMatrix::from_json(v).map_err(|e| at(path, e));
    }
    let rows = v.as_array().ok_or_else(|| Error::Parse(format!("{path}: expected a square array of entries")))?;
    let rank = rows.len();
    if rank == 0 {
        return Err(Error::Parse(format!("{path}: empty matrix")));
    }
    let mut entries = Vec::with_capacity(rank * rank);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse(format!("{path}[{i}]: expected a row")))?;
        if row.len() != rank {
            return Err(Error::Parse(format!("{path}[{i}]: {} entries, expected {rank}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            entries.push(entry(e, &format!("{path}[{i}][{j}]"), center, prec)?);
        }
    }
    SeriesMatrix::new(rank, entries).map_err(|e| at(path, e))
}

/// Prime from the document, else the fallback.
pub fn doc_prime(doc: &Value, fallback: Option<u64>) -> Result<u64> {
    match doc.get("p") {
        Some(v) => v.as_u64().ok_or_else(|| Error::Parse("$.p: expected a prime".into())),
        None => fallback.ok_or_else(|| Error::Parse("$.p missing and no --p given".into())),
    }
}

fn center_of(doc: &Value, p: u64, prec: i64) -> Result<PadicScalar> {
    match doc.get("center") {
        None => Ok(PadicScalar::exact_int(p, 0, prec)),
        Some(v) => scalar_field(v, "$.center", p, prec),
    }
}

fn region_of(doc: &Value) -> Result<Region> {
    match doc.get("region") {
        None => Ok(Region::AffineLine),
        Some(Value::String(s)) if s == "line" => Ok(Region::AffineLine),
        Some(v) => Region::from_json(v).map_err(|e| at("$.region", e)),
    }
}

pub fn system_doc(doc: &Value, p: u64, prec: i64) -> Result<DiffSystem<PadicScalar>> {
    let center = center_of(doc, p, prec)?;
    let g = doc.get("G").ok_or_else(|| Error::Parse("$.G: missing connection matrix".into()))?;
    let g = matrix_field(g, "$.G", &center, prec)?;
    Ok(DiffSystem::new(g, region_of(doc)?))
}

pub struct ModuleDoc {
    pub a: SeriesMatrix<PadicScalar>,
    pub sigma: DifferenceOperator<PadicScalar>,
    pub region: Region,
    pub system: Option<DiffSystem<PadicScalar>>,
}

pub fn module_doc(doc: &Value, p: u64, prec: i64) -> Result<ModuleDoc> {
    let center = center_of(doc, p, prec)?;
    let q = scalar_field(doc.get("q").ok_or_else(|| Error::Parse("$.q: missing".into()))?, "$.q", p, prec)?;
    let h = scalar_field(doc.get("h").unwrap_or(&Value::from(0)), "$.h", p, prec)?;
    let sigma = DifferenceOperator::new(q, h).map_err(|e| at("$.q/$.h", e))?;
    let a = matrix_field(doc.get("A").ok_or_else(|| Error::Parse("$.A: missing".into()))?, "$.A", &center, prec)?;
    let system = match doc.get("system") {
        None | Some(Value::Null) => None,
        Some(s) => Some(system_doc(s, p, prec).map_err(|e| at("$.system", e))?),
    };
    Ok(ModuleDoc { a, sigma, region: region_of(doc)?, system })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn polynomial_entries() {
        let doc = json!({ "p": 3, "region": { "kind": "disc", "radius": "0" }, "G": [["1", 0], [[0, "1/2"], ["-1"]]] });
        let sys = system_doc(&doc, 3, 20).unwrap();
        assert_eq!(sys.rank(), 2);
        assert_eq!(sys.g.get(1, 0).max_index(), 1);
    }

    #[test]
    fn diagnostics_carry_the_path() {
        let doc = json!({ "p": 3, "G": [[["1", "x"]]] });
        let err = system_doc(&doc, 3, 20).unwrap_err().to_string();
        assert!(err.contains("$.G[0][0][1]"), "{err}");
        let doc = json!({ "p": 3, "G": [[["1"], ["2"]]] });
        assert!(system_doc(&doc, 3, 20).unwrap_err().to_string().contains("$.G[0]"));
    }
}
