//! JSON expression-tree format.
//!
//! Every node is an object with a `"tag"` field. Complex numbers are `[re, im]`
//! pairs and rationals are `"p/q"` strings. See `schema/psh-expr.schema.json`.

use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::error::Error as ExprError;
use crate::expr::{AffineMap, PshExpr, RadialProfile};
use crate::poly::Polynomial;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unknown node tag `{tag}`")]
    UnknownTag { path: String, tag: String },
    #[error("{path}: missing field `{field}`")]
    MissingField { path: String, field: String },
    #[error("{path}: {message}")]
    InvalidField { path: String, message: String },
    #[error("{path}: arity mismatch: {message}")]
    ArityMismatch { path: String, message: String },
    #[error("{path}: `{field}` must be positive")]
    NonPositive { path: String, field: String },
    #[error("{path}: `children` must be nonempty")]
    EmptyChildren { path: String },
}

impl ParseError {
    /// Stable machine-readable code for each error kind.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Io { .. } => "E_IO",
            ParseError::Malformed { .. } => "E_MALFORMED_JSON",
            ParseError::UnknownTag { .. } => "E_UNKNOWN_TAG",
            ParseError::MissingField { .. } => "E_MISSING_FIELD",
            ParseError::InvalidField { .. } => "E_INVALID_FIELD",
            ParseError::ArityMismatch { .. } => "E_ARITY",
            ParseError::NonPositive { .. } => "E_NONPOSITIVE",
            ParseError::EmptyChildren { .. } => "E_EMPTY_CHILDREN",
        }
    }
}

pub fn parse_expr_file(path: impl AsRef<Path>) -> Result<PshExpr, ParseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_expr_str(&text)
}

pub fn parse_expr_str(text: &str) -> Result<PshExpr, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    expr_from_value(&value)
}

pub fn expr_from_value(value: &Value) -> Result<PshExpr, ParseError> {
    node(value, "$")
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, name: &str) -> Result<&'a Value, ParseError> {
    obj.get(name).ok_or_else(|| ParseError::MissingField {
        path: path.to_string(),
        field: name.to_string(),
    })
}

fn invalid(path: &str, message: impl Into<String>) -> ParseError {
    ParseError::InvalidField {
        path: path.to_string(),
        message: message.into(),
    }
}

fn rational(v: &Value, path: &str) -> Result<Rational, ParseError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|m| invalid(path, m)),
        Value::Number(n) if n.is_i64() => Ok(crate::rational::int(n.as_i64().unwrap_or(0))),
        _ => Err(invalid(path, "expected a rational string \"p/q\"")),
    }
}

fn complex(v: &Value, path: &str) -> Result<Complex64, ParseError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| invalid(path, "expected a complex number [re, im]"))?;
    let re = arr[0].as_f64().ok_or_else(|| invalid(path, "real part must be a number"))?;
    let im = arr[1].as_f64().ok_or_else(|| invalid(path, "imaginary part must be a number"))?;
    Ok(Complex64::new(re, im))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array().ok_or_else(|| invalid(path, "expected an array"))
}

fn usize_field(obj: &Map<String, Value>, path: &str, name: &str) -> Result<usize, ParseError> {
    field(obj, path, name)?
        .as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| invalid(&format!("{path}.{name}"), "expected a nonnegative integer"))
}

fn lift(path: &str, e: ExprError) -> ParseError {
    match e {
        ExprError::Arity(message) => ParseError::ArityMismatch {
            path: path.to_string(),
            message,
        },
        other => invalid(path, other.to_string()),
    }
}

fn children(obj: &Map<String, Value>, path: &str) -> Result<Vec<PshExpr>, ParseError> {
    let arr = array(field(obj, path, "children")?, &format!("{path}.children"))?;
    if arr.is_empty() {
        return Err(ParseError::EmptyChildren {
            path: path.to_string(),
        });
    }
    let kids = arr
        .iter()
        .enumerate()
        .map(|(i, c)| node(c, &format!("{path}.children[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let n = kids[0].arity();
    if let Some((i, bad)) = kids.iter().enumerate().find(|(_, c)| c.arity() != n) {
        return Err(ParseError::ArityMismatch {
            path: format!("{path}.children[{i}]"),
            message: format!("arity {} differs from first child arity {n}", bad.arity()),
        });
    }
    Ok(kids)
}

fn child(obj: &Map<String, Value>, path: &str) -> Result<PshExpr, ParseError> {
    node(field(obj, path, "child")?, &format!("{path}.child"))
}

fn positive(r: Rational, path: &str, name: &str) -> Result<Rational, ParseError> {
    use num_traits::Signed;
    if r.is_positive() {
        Ok(r)
    } else {
        Err(ParseError::NonPositive {
            path: path.to_string(),
            field: name.to_string(),
        })
    }
}

fn node(v: &Value, path: &str) -> Result<PshExpr, ParseError> {
    let obj = v
        .as_object()
        .ok_or_else(|| invalid(path, "expected an expression object"))?;
    let tag = field(obj, path, "tag")?
        .as_str()
        .ok_or_else(|| invalid(&format!("{path}.tag"), "tag must be a string"))?;
    match tag {
        "monomial_log" => {
            let coeff = rational(field(obj, path, "coeff")?, &format!("{path}.coeff"))?;
            let coeff = positive(coeff, path, "coeff")?;
            let exps = array(field(obj, path, "exponents")?, &format!("{path}.exponents"))?
                .iter()
                .enumerate()
                .map(|(i, e)| rational(e, &format!("{path}.exponents[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            PshExpr::monomial_log(coeff, exps).map_err(|e| lift(path, e))
        }
        "log_abs_poly" => {
            let nvars = usize_field(obj, path, "nvars")?;
            let terms = array(field(obj, path, "terms")?, &format!("{path}.terms"))?;
            let mut parsed = Vec::with_capacity(terms.len());
            for (i, t) in terms.iter().enumerate() {
                let tp = format!("{path}.terms[{i}]");
                let to = t.as_object().ok_or_else(|| invalid(&tp, "expected a term object"))?;
                let exps = array(field(to, &tp, "exponents")?, &format!("{tp}.exponents"))?
                    .iter()
                    .map(|e| e.as_u64().map(|u| u as u32))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| invalid(&format!("{tp}.exponents"), "exponents must be nonnegative integers"))?;
                let c = complex(field(to, &tp, "coeff")?, &format!("{tp}.coeff"))?;
                parsed.push((exps, c));
            }
            let poly = Polynomial::from_terms(nvars, parsed).map_err(|e| lift(path, e))?;
            PshExpr::log_abs_poly(poly).map_err(|e| lift(path, e))
        }
        "radial" => {
            let arity = usize_field(obj, path, "arity")?;
            let slope = rational(
                field(obj, path, "limiting_slope")?,
                &format!("{path}.limiting_slope"),
            )?;
            let bps = match obj.get("breakpoints") {
                None => Vec::new(),
                Some(b) => array(b, &format!("{path}.breakpoints"))?
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let bp = format!("{path}.breakpoints[{i}]");
                        let a = p
                            .as_array()
                            .filter(|a| a.len() == 2)
                            .ok_or_else(|| invalid(&bp, "breakpoint must be [t, chi]"))?;
                        match (a[0].as_f64(), a[1].as_f64()) {
                            (Some(t), Some(c)) => Ok((t, c)),
                            _ => Err(invalid(&bp, "breakpoint entries must be numbers")),
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let profile = RadialProfile::new(arity, bps, slope).map_err(|e| lift(path, e))?;
            Ok(PshExpr::Radial(profile))
        }
        "max" => Ok(PshExpr::Max(children(obj, path)?)),
        "sum" => Ok(PshExpr::Sum(children(obj, path)?)),
        "scale" => {
            let factor = rational(field(obj, path, "factor")?, &format!("{path}.factor"))?;
            let factor = positive(factor, path, "factor")?;
            let c = child(obj, path)?;
            PshExpr::scaled(factor, c).map_err(|e| lift(path, e))
        }
        "linear_pullback" => {
            let rows_v = array(field(obj, path, "matrix")?, &format!("{path}.matrix"))?;
            let rows = rows_v.len();
            let mut cols = None;
            let mut matrix = Vec::new();
            for (r, row) in rows_v.iter().enumerate() {
                let rp = format!("{path}.matrix[{r}]");
                let entries = array(row, &rp)?;
                if *cols.get_or_insert(entries.len()) != entries.len() {
                    return Err(ParseError::ArityMismatch {
                        path: rp,
                        message: "matrix rows have different lengths".into(),
                    });
                }
                for (c, e) in entries.iter().enumerate() {
                    matrix.push(complex(e, &format!("{rp}[{c}]"))?);
                }
            }
            let cols = cols.unwrap_or(0);
            let offset = match obj.get("offset") {
                None => vec![Complex64::new(0.0, 0.0); rows],
                Some(o) => array(o, &format!("{path}.offset"))?
                    .iter()
                    .enumerate()
                    .map(|(i, z)| complex(z, &format!("{path}.offset[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            let map = AffineMap::new(rows, cols, matrix, offset).map_err(|e| lift(path, e))?;
            let c = child(obj, path)?;
            PshExpr::pullback(map, c).map_err(|e| lift(path, e))
        }
        "unitary_sup" => {
            let base = usize_field(obj, path, "base")?;
            let block = usize_field(obj, path, "block")?;
            let c = child(obj, path)?;
            PshExpr::unitary_sup(base, block, c).map_err(|e| lift(path, e))
        }
        other => Err(ParseError::UnknownTag {
            path: format!("{path}.tag"),
            tag: other.to_string(),
        }),
    }
}

fn complex_value(z: &Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn expr_to_value(e: &PshExpr) -> Value {
    match e {
        PshExpr::MonomialLog { coeff, exponents } => json!({
            "tag": "monomial_log",
            "coeff": format_rational(coeff),
            "exponents": exponents.iter().map(format_rational).collect::<Vec<_>>(),
        }),
        PshExpr::LogAbsPoly(p) => json!({
            "tag": "log_abs_poly",
            "nvars": p.nvars(),
            "terms": p.terms().map(|(e, c)| json!({"exponents": e, "coeff": complex_value(c)})).collect::<Vec<_>>(),
        }),
        PshExpr::Radial(r) => json!({
            "tag": "radial",
            "arity": r.arity,
            "breakpoints": r.breakpoints.iter().map(|(t, v)| json!([t, v])).collect::<Vec<_>>(),
            "limiting_slope": format_rational(&r.limiting_slope),
        }),
        PshExpr::Max(c) => json!({"tag": "max", "children": c.iter().map(expr_to_value).collect::<Vec<_>>()}),
        PshExpr::Sum(c) => json!({"tag": "sum", "children": c.iter().map(expr_to_value).collect::<Vec<_>>()}),
        PshExpr::Scale { factor, child } => json!({
            "tag": "scale",
            "factor": format_rational(factor),
            "child": expr_to_value(child),
        }),
        PshExpr::LinearPullback { map, child } => {
            let matrix: Vec<Value> = (0..map.rows)
                .map(|r| Value::Array((0..map.cols).map(|c| complex_value(&map.entry(r, c))).collect()))
                .collect();
            let mut obj = json!({"tag": "linear_pullback", "matrix": matrix});
            if !map.has_zero_offset() {
                obj["offset"] = Value::Array(map.offset.iter().map(complex_value).collect());
            }
            obj["child"] = expr_to_value(child);
            obj
        }
        PshExpr::UnitarySup { base, block, child } => json!({
            "tag": "unitary_sup",
            "base": base,
            "block": block,
            "child": expr_to_value(child),
        }),
    }
}

pub fn expr_to_string_pretty(e: &PshExpr) -> String {
    serde_json::to_string_pretty(&expr_to_value(e)).expect("expression values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::make_phi_k;
    use crate::rational::int;

    #[test]
    fn parses_monomial() {
        let e = parse_expr_str(r#"{"tag":"monomial_log","coeff":"1/1","exponents":["2/1","1/1"]}"#).unwrap();
        assert_eq!(e, PshExpr::monomial(&[2, 1]));
    }

    #[test]
    fn distinct_error_kinds() {
        let zero = parse_expr_str(
            r#"{"tag":"scale","factor":"0/1","child":{"tag":"monomial_log","coeff":"1","exponents":["1"]}}"#,
        )
        .unwrap_err();
        assert_eq!(zero.code(), "E_NONPOSITIVE");
        let empty = parse_expr_str(r#"{"tag":"max","children":[]}"#).unwrap_err();
        assert_eq!(empty.code(), "E_EMPTY_CHILDREN");
        let tag = parse_expr_str(r#"{"tag":"nope"}"#).unwrap_err();
        assert_eq!(tag.code(), "E_UNKNOWN_TAG");
        let bad = parse_expr_str("{\"tag\": ").unwrap_err();
        assert_eq!(bad.code(), "E_MALFORMED_JSON");
        let arity = parse_expr_str(
            r#"{"tag":"max","children":[
                {"tag":"monomial_log","coeff":"1","exponents":["1"]},
                {"tag":"monomial_log","coeff":"1","exponents":["1","1"]}]}"#,
        )
        .unwrap_err();
        assert_eq!(arity.code(), "E_ARITY");
        assert!(arity.to_string().contains("$.children[1]"));
        let missing = parse_expr_str(r#"{"tag":"monomial_log","coeff":"1"}"#).unwrap_err();
        assert_eq!(missing.code(), "E_MISSING_FIELD");
    }

    #[test]
    fn phi_k_round_trips() {
        let base = PshExpr::scaled(int(2), PshExpr::monomial(&[1])).unwrap();
        let e = make_phi_k(&base, 2).unwrap();
        let text = expr_to_string_pretty(&e);
        assert_eq!(parse_expr_str(&text).unwrap(), e);
    }
}
