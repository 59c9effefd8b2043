//! The shared JSON function format.
//!
//! One object with a `form` tag and the fields of that form; unknown
//! fields are rejected. Values round-trip exactly: emitted reals use the
//! shortest representation that parses back to the same double.
//!
//! ```json
//! {"form": "rational", "numer": [0.0, 1.0], "denom": [1.0], "declared_degree": 1}
//! {"form": "kernel-sum", "terms": [{"c": 4.0, "z": 1.0}], "declared_degree": 2}
//! {"form": "linear-plus-bumps", "slope": 1.0, "bumps": [{"a": 7.84, "gamma": 0.25}], "declared_degree": 3}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Bump, FnExpr, KernelSum, KernelTerm, LinearPlusBumps, RatcoreError, RationalFn};
use crate::poly::Poly;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSchema {
    pub c: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSchema {
    pub a: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSchema {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numer: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denom: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermSchema>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bumps: Option<Vec<BumpSchema>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_degree: Option<usize>,
}

#[derive(Debug, Error)]
pub enum JsonParseError {
    /// Syntactically invalid JSON, with the 1-based position.
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed JSON that does not describe a valid function.
    #[error(transparent)]
    Invalid(#[from] RatcoreError),
}

/// Converts an expression to the schema. Differences and opaque
/// evaluators have no serialized form.
pub fn to_schema(f: &FnExpr) -> Result<FunctionSchema, RatcoreError> {
    match f {
        FnExpr::Rational(r) => Ok(FunctionSchema {
            form: "rational".into(),
            numer: Some(r.numer().coeffs().to_vec()),
            denom: Some(r.denom().coeffs().to_vec()),
            terms: None,
            slope: None,
            bumps: None,
            declared_degree: Some(r.declared_degree()),
        }),
        FnExpr::Kernel(k) => Ok(FunctionSchema {
            form: "kernel-sum".into(),
            numer: None,
            denom: None,
            terms: Some(
                k.terms()
                    .iter()
                    .map(|t| TermSchema {
                        c: t.weight,
                        z: t.node,
                    })
                    .collect(),
            ),
            slope: None,
            bumps: None,
            declared_degree: f.degree_bound(),
        }),
        FnExpr::Bumps(b) => Ok(FunctionSchema {
            form: "linear-plus-bumps".into(),
            numer: None,
            denom: None,
            terms: None,
            slope: Some(b.slope()),
            bumps: Some(
                b.bumps()
                    .iter()
                    .map(|bb| BumpSchema {
                        a: bb.amplitude,
                        gamma: bb.scale,
                    })
                    .collect(),
            ),
            declared_degree: f.degree_bound(),
        }),
        FnExpr::Difference(..) | FnExpr::Custom(_) => Err(RatcoreError::Schema(
            "only rational, kernel-sum and linear-plus-bumps forms serialize".into(),
        )),
    }
}

/// Validates a schema object and builds the expression.
pub fn from_schema(s: &FunctionSchema) -> Result<FnExpr, RatcoreError> {
    let reject_fields = |allowed: &str, bad: &[(&str, bool)]| -> Result<(), RatcoreError> {
        for (name, present) in bad {
            if *present {
                return Err(RatcoreError::Schema(format!(
                    "field \"{name}\" does not belong to form \"{allowed}\""
                )));
            }
        }
        Ok(())
    };
    match s.form.as_str() {
        "rational" => {
            reject_fields(
                "rational",
                &[
                    ("terms", s.terms.is_some()),
                    ("slope", s.slope.is_some()),
                    ("bumps", s.bumps.is_some()),
                ],
            )?;
            let numer = s
                .numer
                .clone()
                .ok_or_else(|| RatcoreError::Schema("rational form requires \"numer\"".into()))?;
            let denom = s
                .denom
                .clone()
                .ok_or_else(|| RatcoreError::Schema("rational form requires \"denom\"".into()))?;
            let numer = Poly::new(numer);
            let denom = Poly::new(denom);
            let declared = s
                .declared_degree
                .unwrap_or_else(|| numer.degree().max(denom.degree()));
            Ok(FnExpr::Rational(RationalFn::new(numer, denom, declared)?))
        }
        "kernel-sum" => {
            reject_fields(
                "kernel-sum",
                &[
                    ("numer", s.numer.is_some()),
                    ("denom", s.denom.is_some()),
                    ("slope", s.slope.is_some()),
                    ("bumps", s.bumps.is_some()),
                ],
            )?;
            let terms = s
                .terms
                .clone()
                .ok_or_else(|| RatcoreError::Schema("kernel-sum form requires \"terms\"".into()))?;
            let k = KernelSum::new(
                terms
                    .into_iter()
                    .map(|t| KernelTerm {
                        weight: t.c,
                        node: t.z,
                    })
                    .collect(),
            )?;
            if let Some(d) = s.declared_degree {
                let natural = 2 * k.terms().len();
                if d < natural {
                    return Err(RatcoreError::DegreeExceeded {
                        actual: natural,
                        declared: d,
                    });
                }
            }
            Ok(FnExpr::Kernel(k))
        }
        "linear-plus-bumps" => {
            reject_fields(
                "linear-plus-bumps",
                &[
                    ("numer", s.numer.is_some()),
                    ("denom", s.denom.is_some()),
                    ("terms", s.terms.is_some()),
                ],
            )?;
            let slope = s.slope.ok_or_else(|| {
                RatcoreError::Schema("linear-plus-bumps form requires \"slope\"".into())
            })?;
            let bumps = s.bumps.clone().unwrap_or_default();
            let b = LinearPlusBumps::new(
                slope,
                bumps
                    .into_iter()
                    .map(|bb| Bump {
                        amplitude: bb.a,
                        scale: bb.gamma,
                    })
                    .collect(),
            )?;
            if let Some(d) = s.declared_degree {
                let natural = 2 * b.bumps().len() + 1;
                if d < natural {
                    return Err(RatcoreError::DegreeExceeded {
                        actual: natural,
                        declared: d,
                    });
                }
            }
            Ok(FnExpr::Bumps(b))
        }
        other => Err(RatcoreError::Schema(format!(
            "unknown form \"{other}\"; expected rational, kernel-sum or linear-plus-bumps"
        ))),
    }
}

/// Pretty JSON for an expression.
pub fn to_json_string(f: &FnExpr) -> Result<String, RatcoreError> {
    let schema = to_schema(f)?;
    serde_json::to_string_pretty(&schema)
        .map_err(|e| RatcoreError::Schema(format!("serialization failed: {e}")))
}

/// Parses function JSON, reporting the syntax position on malformed input.
pub fn from_json_str(text: &str) -> Result<FnExpr, JsonParseError> {
    let schema: FunctionSchema =
        serde_json::from_str(text).map_err(|e| JsonParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    Ok(from_schema(&schema)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_forms() {
        let texts = [
            r#"{"form":"rational","numer":[0.0,1.0],"denom":[1.0],"declared_degree":1}"#,
            r#"{"form":"kernel-sum","terms":[{"c":4.0,"z":1.0},{"c":36.0,"z":0.25}]}"#,
            r#"{"form":"linear-plus-bumps","slope":1.0,"bumps":[{"a":7.84,"gamma":0.001953125}]}"#,
        ];
        for text in texts {
            let f = from_json_str(text).unwrap();
            let emitted = to_json_string(&f).unwrap();
            let g = from_json_str(&emitted).unwrap();
            for i in 0..=100 {
                let x = -1.0 + 0.02 * i as f64;
                assert_eq!(f.eval(x).unwrap(), g.eval(x).unwrap());
            }
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"form":"rational","numer":[0.0,1.0],"denom":[1.0],"extra":1}"#;
        assert!(from_json_str(text).is_err());
    }

    #[test]
    fn mismatched_fields_rejected() {
        let text = r#"{"form":"rational","numer":[0.0,1.0],"denom":[1.0],"slope":2.0}"#;
        assert!(from_json_str(text).is_err());
    }

    #[test]
    fn syntax_error_carries_position() {
        let text = "{\n  \"form\": \"rational\",\n  bad\n}";
        match from_json_str(text) {
            Err(JsonParseError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn pole_in_domain_rejected() {
        let text = r#"{"form":"rational","numer":[1.0],"denom":[0.0,1.0],"declared_degree":1}"#;
        match from_json_str(text) {
            Err(JsonParseError::Invalid(RatcoreError::DenominatorVanishes { .. })) => {}
            other => panic!("expected pole rejection, got {other:?}"),
        }
    }

    #[test]
    fn undersized_declared_degree_rejected() {
        let text = r#"{"form":"kernel-sum","terms":[{"c":4.0,"z":1.0},{"c":36.0,"z":0.25}],"declared_degree":3}"#;
        match from_json_str(text) {
            Err(JsonParseError::Invalid(RatcoreError::DegreeExceeded { actual, declared })) => {
                assert_eq!(actual, 4);
                assert_eq!(declared, 3);
            }
            other => panic!("expected degree rejection, got {other:?}"),
        }
    }
}
