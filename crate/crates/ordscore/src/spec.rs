//! The JSON model-spec format: response, terms and factor level orders.
//!
//! ```json
//! {
//!   "family": "binomial",
//!   "response": { "successes": "ncases", "failures": "ncontrols" },
//!   "factors": {
//!     "agegp": ["25-34", "35-44", "45-54", "55-64", "65-74", "75+"]
//!   },
//!   "terms": [
//!     { "kind": "poly", "column": "agegp", "degrees": [1, 2] },
//!     { "kind": "score", "column": "alcgp", "family": "su", "params": "free" }
//!   ]
//! }
//! ```
//!
//! A gaussian response uses `{ "column": "price", "power": 0.5 }` instead;
//! fixed score parameters are written `"params": [-0.025, 0.395]`.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use ordscore_core::design::{Column, ModelFrame, ResponseSpec, ScoreParams, TermSpec};
use ordscore_core::score::FamilyKind;
use serde::Deserialize;

use crate::csvio::{ColumnKind, ColumnSchema};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `gaussian` or `binomial`.
    pub family: String,
    pub response: ResponseField,
    /// Level labels, in increasing order, for every factor used in terms.
    #[serde(default)]
    pub factors: BTreeMap<String, Vec<String>>,
    pub terms: Vec<TermField>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ResponseField {
    Gaussian {
        column: String,
        #[serde(default = "default_power")]
        power: f64,
    },
    Binomial {
        successes: String,
        failures: String,
    },
}

fn default_power() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermField {
    /// `numeric`, `poly` or `score`.
    pub kind: String,
    pub column: String,
    /// Polynomial degrees, for `poly` terms; omitted means all of `1..K`.
    pub degrees: Option<Vec<usize>>,
    /// Score family tag (`su`, `gh`, `sas`), for `score` terms.
    pub family: Option<String>,
    /// `[p1, p2]` for fixed parameters or the string `"free"`.
    pub params: Option<ParamsField>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamsField {
    Fixed([f64; 2]),
    Tag(String),
}

impl ModelSpec {
    pub fn parse(json: &str) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_str(json).context("model spec is not valid JSON for the schema")?;
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        match (self.family.as_str(), &self.response) {
            ("gaussian", ResponseField::Gaussian { .. }) => {}
            ("binomial", ResponseField::Binomial { .. }) => {}
            ("gaussian" | "binomial", _) => {
                bail!("response block does not match family '{}'", self.family)
            }
            (other, _) => bail!("unknown family '{other}' (expected gaussian or binomial)"),
        }
        for term in &self.terms {
            match term.kind.as_str() {
                "numeric" => {}
                "poly" | "score" => {
                    if !self.factors.contains_key(&term.column) {
                        bail!(
                            "term on '{}' needs its level order in the factors block",
                            term.column
                        );
                    }
                    if term.kind == "score" {
                        let tag = term
                            .family
                            .as_deref()
                            .with_context(|| format!("score term '{}' has no family", term.column))?;
                        FamilyKind::from_tag(tag)
                            .map_err(|e| anyhow::anyhow!("{e}"))?;
                        if term.params.is_none() {
                            bail!("score term '{}' has no params (use \"free\")", term.column);
                        }
                        if let Some(ParamsField::Tag(t)) = &term.params {
                            if t != "free" {
                                bail!("score params must be [p1, p2] or \"free\", got '{t}'");
                            }
                        }
                    }
                }
                other => bail!("unknown term kind '{other}'"),
            }
        }
        Ok(())
    }

    /// The CSV columns this model needs, typed.
    pub fn schema(&self) -> Vec<ColumnSchema> {
        let mut out: Vec<ColumnSchema> = Vec::new();
        let mut push = |schema: ColumnSchema| {
            if !out.iter().any(|c| c.name == schema.name) {
                out.push(schema);
            }
        };
        match &self.response {
            ResponseField::Gaussian { column, .. } => push(ColumnSchema::numeric(column.clone())),
            ResponseField::Binomial {
                successes,
                failures,
            } => {
                push(ColumnSchema::numeric(successes.clone()));
                push(ColumnSchema::numeric(failures.clone()));
            }
        }
        for term in &self.terms {
            match self.factors.get(&term.column) {
                Some(levels) if term.kind != "numeric" => push(ColumnSchema {
                    name: term.column.clone(),
                    kind: ColumnKind::Factor {
                        levels: levels.clone(),
                    },
                }),
                _ => push(ColumnSchema::numeric(term.column.clone())),
            }
        }
        out
    }

    /// Assemble the model frame from loaded columns.
    pub fn to_frame(&self, columns: Vec<Column>) -> Result<ModelFrame> {
        let response = match &self.response {
            ResponseField::Gaussian { column, power } => ResponseSpec::Gaussian {
                column: column.clone(),
                power: *power,
            },
            ResponseField::Binomial {
                successes,
                failures,
            } => ResponseSpec::BinomialGrouped {
                successes: successes.clone(),
                failures: failures.clone(),
            },
        };
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            terms.push(match term.kind.as_str() {
                "numeric" => TermSpec::Numeric {
                    column: term.column.clone(),
                },
                "poly" => {
                    let degrees = match &term.degrees {
                        Some(d) => d.clone(),
                        None => {
                            let k = self.factors[&term.column].len();
                            (1..k).collect()
                        }
                    };
                    TermSpec::FactorPoly {
                        column: term.column.clone(),
                        degrees,
                    }
                }
                "score" => TermSpec::FactorScore {
                    column: term.column.clone(),
                    family: FamilyKind::from_tag(term.family.as_deref().unwrap())
                        .map_err(|e| anyhow::anyhow!("{e}"))?,
                    params: match term.params.as_ref().unwrap() {
                        ParamsField::Fixed([p1, p2]) => ScoreParams::Fixed { p1: *p1, p2: *p2 },
                        ParamsField::Tag(_) => ScoreParams::Free,
                    },
                },
                _ => unreachable!("validated in parse"),
            });
        }
        ModelFrame::new(columns, response, terms).map_err(|e| anyhow::anyhow!("{e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csvio::load_csv_reader;

    const SPEC: &str = r#"{
        "family": "binomial",
        "response": { "successes": "s", "failures": "f" },
        "factors": { "g": ["a", "b", "c"] },
        "terms": [
            { "kind": "poly", "column": "g", "degrees": [1] },
            { "kind": "score", "column": "g", "family": "su", "params": "free" }
        ]
    }"#;

    #[test]
    fn parses_and_builds_a_frame() {
        let spec = ModelSpec::parse(SPEC).unwrap();
        let csv = "g,s,f\na,3,7\nb,5,5\nc,8,2\n";
        let cols = load_csv_reader(csv.as_bytes(), &spec.schema()).unwrap();
        let frame = spec.to_frame(cols).unwrap();
        assert_eq!(frame.n_rows(), 3);
        assert_eq!(frame.terms.len(), 2);
        assert_eq!(frame.free_score_terms().len(), 1);
    }

    #[test]
    fn fixed_params_and_default_power() {
        let json = r#"{
            "family": "gaussian",
            "response": { "column": "y" },
            "factors": { "g": ["a", "b"] },
            "terms": [
                { "kind": "score", "column": "g", "family": "gh", "params": [0.1, 0.2] }
            ]
        }"#;
        let spec = ModelSpec::parse(json).unwrap();
        let ResponseField::Gaussian { power, .. } = &spec.response else {
            panic!()
        };
        assert_eq!(*power, 1.0);
        assert!(matches!(
            spec.terms[0].params,
            Some(ParamsField::Fixed([0.1, 0.2]))
        ));
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(ModelSpec::parse("{").is_err());
        // family/response mismatch
        assert!(ModelSpec::parse(
            r#"{"family":"gaussian","response":{"successes":"s","failures":"f"},"terms":[]}"#
        )
        .is_err());
        // score term without level order
        assert!(ModelSpec::parse(
            r#"{"family":"gaussian","response":{"column":"y"},
                "terms":[{"kind":"score","column":"g","family":"su","params":"free"}]}"#
        )
        .is_err());
        // unknown family tag
        assert!(ModelSpec::parse(
            r#"{"family":"gaussian","response":{"column":"y"},
                "factors":{"g":["a","b"]},
                "terms":[{"kind":"score","column":"g","family":"nope","params":"free"}]}"#
        )
        .is_err());
    }
}
