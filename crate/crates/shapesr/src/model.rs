//! Model files: a kind tag, the expression, the output scaling and where the
//! model came from.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shapesr_core::constraints::{ConstraintOp, ShapeModel};
use shapesr_core::{
    Domain, Expr, Interval, ItExpression, ItTerm, Matrix, Model, ScaledModel, Scaling, Transform,
};

use crate::error::{io_err, Error, Result};

/// A fitted model of either representation.
#[derive(Clone, Debug, PartialEq)]
pub enum SavedModel {
    Tree(ScaledModel<Expr>),
    It(ItExpression),
}

impl Model for SavedModel {
    fn predict(&self, x: &Matrix) -> Vec<f64> {
        match self {
            SavedModel::Tree(m) => m.predict(x),
            SavedModel::It(m) => m.predict(x),
        }
    }
}

impl ShapeModel for SavedModel {
    fn bound(&self, op: ConstraintOp, domain: &Domain) -> Interval {
        match self {
            SavedModel::Tree(m) => m.bound(op, domain),
            SavedModel::It(m) => m.bound(op, domain),
        }
    }

    fn pointwise(&self, op: ConstraintOp) -> Box<dyn Fn(&[f64]) -> f64 + '_> {
        match self {
            SavedModel::Tree(m) => m.pointwise(op),
            SavedModel::It(m) => m.pointwise(op),
        }
    }
}

impl std::fmt::Display for SavedModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SavedModel::Tree(m) => write!(
                f,
                "{:?} + {:?} * {}",
                m.scaling.offset, m.scaling.scale, m.inner
            ),
            SavedModel::It(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub problem: String,
    pub algorithm: String,
    pub seed: u64,
    pub constraints: bool,
    pub variables: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    /// Offset.
    pub a: f64,
    /// Slope.
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub strengths: Vec<i32>,
    pub transform: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tree,
    It,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermRecord>,
    pub scaling: ScalingRecord,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(model: &SavedModel, provenance: Provenance) -> Self {
        match model {
            SavedModel::Tree(m) => ModelFile {
                kind: Kind::Tree,
                expression: Some(m.inner.to_string()),
                intercept: None,
                terms: Vec::new(),
                scaling: ScalingRecord {
                    a: m.scaling.offset,
                    b: m.scaling.scale,
                },
                provenance,
            },
            SavedModel::It(m) => ModelFile {
                kind: Kind::It,
                expression: Some(m.to_string()),
                intercept: Some(m.intercept),
                terms: m
                    .terms
                    .iter()
                    .zip(&m.weights)
                    .map(|(t, &w)| TermRecord {
                        strengths: t.strengths.clone(),
                        transform: t.transform.name().to_string(),
                        weight: w,
                    })
                    .collect(),
                scaling: ScalingRecord { a: 0.0, b: 1.0 },
                provenance,
            },
        }
    }

    pub fn model(&self) -> std::result::Result<SavedModel, String> {
        let scaling = Scaling {
            offset: self.scaling.a,
            scale: self.scaling.b,
        };
        match self.kind {
            Kind::Tree => {
                let text = self
                    .expression
                    .as_deref()
                    .ok_or("tree model without 'expression'")?;
                let e: Expr = text
                    .parse()
                    .map_err(|e: shapesr_core::Error| e.to_string())?;
                Ok(SavedModel::Tree(ScaledModel::new(e, scaling)))
            }
            Kind::It => {
                if scaling != Scaling::IDENTITY {
                    return Err(
                        "IT models carry their scale in the weights; scaling must be a = 0, b = 1"
                            .into(),
                    );
                }
                let mut terms = Vec::new();
                let mut weights = Vec::new();
                for t in &self.terms {
                    let tr = Transform::from_name(&t.transform)
                        .ok_or_else(|| format!("unknown transform '{}'", t.transform))?;
                    terms.push(ItTerm::new(t.strengths.clone(), tr).map_err(|e| e.to_string())?);
                    weights.push(t.weight);
                }
                let m = ItExpression::new(terms, weights, self.intercept.unwrap_or(0.0))
                    .map_err(|e| e.to_string())?;
                Ok(SavedModel::It(m))
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model files serialise")
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            message,
        })
    }
}
