//! Case configuration read by `certify` and `minimize`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thinobst_core::QuadConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemType {
    ThinObstacle,
    Signorini,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Geometry {
    HalfWidth { a: f64 },
    Polygon { polygon: Vec<[f64; 2]>, contact_edges: Vec<usize> },
}

/// `[i, j, c]` stands for `c x1^i x2^j`.
pub type Terms = Vec<(u32, u32, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub both: Option<Terms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<Terms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<Terms>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Registry(String),
    Polynomial { polynomial: PolySpec },
    Sum { sum: Vec<FieldSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    pub v: FieldSpec,
    /// Exact solution, when known; enables efficiency indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<FieldSpec>,
    #[serde(default = "psi_zero")]
    pub psi: FieldSpec,
    #[serde(default = "exact_u")]
    pub phi: FieldSpec,
}

fn psi_zero() -> FieldSpec {
    FieldSpec::Registry("psi_zero".into())
}

fn exact_u() -> FieldSpec {
    FieldSpec::Registry("exact_u".into())
}

/// Components `[q1, q2]` per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFluxSpec {
    pub plus: [Terms; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<[Terms; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FluxSpec {
    /// `gradient_of_v`, `gradient_of_u`, or `gradient_of:<registry name>`.
    Named(String),
    Polynomial { polynomial: PolyFluxSpec },
    /// `∇(field)` for any field spec.
    GradientOf { gradient_of: FieldSpec },
    Sum { sum: Vec<FluxSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    /// `clip_jump`, `exact_jump` or `zero`.
    Named(String),
    Table { table: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSpec {
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tunable {
    Value(f64),
    /// Only `"optimize"` is accepted.
    Keyword(Optimize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimize {
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default = "one")]
    pub beta1: Tunable,
    #[serde(default = "one")]
    pub beta2: Tunable,
    #[serde(default = "optimize")]
    pub alpha: Tunable,
}

fn one() -> Tunable {
    Tunable::Value(1.0)
}

fn optimize() -> Tunable {
    Tunable::Keyword(Optimize::Optimize)
}

impl Default for Parameters {
    fn default() -> Self {
        Self { beta1: one(), beta2: one(), alpha: optimize() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub problem_type: ProblemType,
    pub geometry: Geometry,
    /// Only used by the `v3eps` registry field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub fields: Fields,
    #[serde(default = "gradient_of_v")]
    pub flux: FluxSpec,
    #[serde(default = "clip_jump")]
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub constants: BTreeMap<String, ConstantSpec>,
    #[serde(default)]
    pub quadrature: QuadConfig,
    pub majorant_kinds: Vec<String>,
    #[serde(default)]
    pub parameters: Parameters,
}

fn gradient_of_v() -> FluxSpec {
    FluxSpec::Named("gradient_of_v".into())
}

fn clip_jump() -> LambdaSpec {
    LambdaSpec::Named("clip_jump".into())
}

impl CaseConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: CaseConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("`{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("`{key}`: {msg}")));
        match (&self.problem_type, &self.geometry) {
            (ProblemType::ThinObstacle, Geometry::HalfWidth { a }) if !(a.is_finite() && *a > 0.0) => {
                return bad("geometry.a", format!("must be positive and finite, got {a}"));
            }
            (ProblemType::ThinObstacle, Geometry::Polygon { .. }) => {
                return bad("geometry", "thin_obstacle takes {\"a\": half-width}".into());
            }
            (ProblemType::Signorini, Geometry::HalfWidth { .. }) => {
                return bad("geometry", "signorini takes {\"polygon\": [...], \"contact_edges\": [...]}".into());
            }
            _ => {}
        }
        for (name, c) in &self.constants {
            if !(c.value.is_finite() && c.value > 0.0) {
                return bad(&format!("constants.{name}.value"), format!("must be positive and finite, got {}", c.value));
            }
        }
        if self.majorant_kinds.is_empty() {
            return bad("majorant_kinds", "at least one kind is required".into());
        }
        for (key, t) in [("beta1", self.parameters.beta1), ("beta2", self.parameters.beta2)] {
            if let Tunable::Value(b) = t {
                if !(b.is_finite() && b > 0.0) {
                    return bad(&format!("parameters.{key}"), format!("must be positive, got {b}"));
                }
            }
        }
        if let Tunable::Value(a) = self.parameters.alpha {
            if !(0.0..=1.0).contains(&a) {
                return bad("parameters.alpha", format!("must lie in [0, 1], got {a}"));
            }
        }
        if let Some(e) = self.eps {
            if !(e.is_finite() && e > 0.0) {
                return bad("eps", format!("must be positive, got {e}"));
            }
        }
        self.quadrature.validate().map_err(|e| CliError::Config(format!("`quadrature`: {e}")))?;
        Ok(())
    }
}
