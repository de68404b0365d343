//! Problem files: a JSON description of an algebra, a scalar mode, bundle
//! ranks, an operator term list, and run options.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::InputError;
use crate::exactlin::{Matrix, Scalar};
use crate::gla::{builtin, GradedLieAlgebra};
use crate::pbw::Uea;
use crate::weightedsym::{BundleSpec, OperatorSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemFile {
    pub algebra: AlgebraBlock,
    #[serde(default)]
    pub scalars: ScalarMode,
    pub bundle: BundleBlock,
    pub operator: Vec<TermBlock>,
    #[serde(default)]
    pub options: OptionsBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraBlock {
    Builtin {
        builtin: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<i64>,
    },
    Explicit {
        dim: usize,
        weights: Vec<u32>,
        brackets: Vec<BracketBlock>,
        #[serde(skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketBlock {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<BracketTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketTerm {
    pub m: usize,
    pub c: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[default]
    Rational,
    Gaussian,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BundleBlock {
    pub rank_e: usize,
    pub rank_f: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermBlock {
    pub word: Vec<usize>,
    pub coeff: Vec<Vec<String>>,
}

/// Per-problem options; command-line flags take precedence.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct OptionsBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ell: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text)
            .map_err(|e| InputError::Malformed(format!("problem file: {e}")))
    }

    /// Parses one scalar literal under the problem's scalar mode.
    fn parse_scalar(&self, literal: &str) -> Result<Scalar, InputError> {
        let s: Scalar = literal.parse()?;
        if self.scalars == ScalarMode::Rational && !s.is_rational() {
            return Err(InputError::GaussianInRationalMode {
                literal: literal.to_string(),
            });
        }
        Ok(s)
    }

    pub fn build_algebra(&self) -> Result<GradedLieAlgebra, InputError> {
        match &self.algebra {
            AlgebraBlock::Builtin { builtin: name, n } => builtin(name, *n),
            AlgebraBlock::Explicit {
                dim,
                weights,
                brackets,
                names,
            } => {
                if weights.len() != *dim {
                    return Err(InputError::Malformed(format!(
                        "algebra declares dim {dim} but lists {} weights",
                        weights.len()
                    )));
                }
                let names = match names {
                    Some(v) => v.clone(),
                    None => (1..=*dim).map(|i| format!("e{i}")).collect(),
                };
                let mut table = Vec::with_capacity(brackets.len());
                for b in brackets {
                    let mut terms = Vec::with_capacity(b.terms.len());
                    for t in &b.terms {
                        terms.push((t.m, self.parse_scalar(&t.c)?));
                    }
                    table.push((b.i, b.j, terms));
                }
                GradedLieAlgebra::new(weights.clone(), names, table)
            }
        }
    }

    pub fn build_operator(&self, uea: Arc<Uea>) -> Result<OperatorSpec, InputError> {
        let bundle = BundleSpec {
            rank_e: self.bundle.rank_e,
            rank_f: self.bundle.rank_f,
        };
        let mut terms = Vec::with_capacity(self.operator.len());
        for (idx, t) in self.operator.iter().enumerate() {
            if t.coeff.len() != bundle.rank_f
                || t.coeff.iter().any(|row| row.len() != bundle.rank_e)
            {
                return Err(InputError::BadCoefficientShape {
                    term: idx,
                    rank_f: bundle.rank_f,
                    rank_e: bundle.rank_e,
                });
            }
            let mut rows = Vec::with_capacity(bundle.rank_f);
            for row in &t.coeff {
                let mut parsed = Vec::with_capacity(bundle.rank_e);
                for lit in row {
                    parsed.push(self.parse_scalar(lit)?);
                }
                rows.push(parsed);
            }
            terms.push((t.word.clone(), Matrix::from_rows(rows)));
        }
        OperatorSpec::new(uea, bundle, terms)
    }
}
