//! Named fields, fluxes and multipliers that configs can refer to.

use std::sync::Arc;

use thinobst_core::fields::{
    FluxSum, Poly2, PiecewisePolynomial, Polynomial, PolynomialFlux, Superposition, TableMultiplier, ZeroField,
    ZeroMultiplier,
};
use thinobst_core::paperbench::{build_example, ExactJump, ExactSolution, ExampleName};
use thinobst_core::signorini::{desk_bubble, desk_exact, ByAbscissa, ClippedNormalFlux, SharedContactMultiplier};
use thinobst_core::{flux_from_gradient, multiplier_from_jump, SharedField, SharedFlux, SharedMultiplier};

use crate::config::{FieldSpec, FluxSpec, LambdaSpec, PolyFluxSpec, PolySpec, ProblemType, Terms};
use crate::CliError;

pub const THIN_OBSTACLE_FIELDS: [&str; 5] = ["exact_u", "v1", "v2", "v3eps", "psi_zero"];
pub const SIGNORINI_FIELDS: [&str; 3] = ["exact_u", "desk_bubble", "psi_zero"];

/// Everything needed to resolve names for one case.
pub struct Registry {
    pub problem: ProblemType,
    pub a: f64,
    pub eps: Option<f64>,
}

fn poly(t: &Terms) -> Poly2 {
    Poly2::from_terms(t.iter().copied())
}

fn unknown(key: &str, name: &str, known: &[&str]) -> CliError {
    CliError::Config(format!("`{key}`: unknown name `{name}` (known: {})", known.join(", ")))
}

impl Registry {
    pub fn field(&self, spec: &FieldSpec, key: &str) -> Result<SharedField, CliError> {
        Ok(match spec {
            FieldSpec::Registry(name) => self.named_field(name, key)?,
            FieldSpec::Polynomial { polynomial } => poly_field(polynomial, key)?,
            FieldSpec::Sum { sum } => {
                let terms = sum
                    .iter()
                    .enumerate()
                    .map(|(i, s)| Ok((1.0, self.field(s, &format!("{key}.sum[{i}]"))?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Arc::new(Superposition::new(terms))
            }
        })
    }

    fn named_field(&self, name: &str, key: &str) -> Result<SharedField, CliError> {
        let example = |n: ExampleName, eps| -> Result<SharedField, CliError> {
            Ok(build_example(n, self.a, eps).map_err(|e| CliError::Config(format!("`{key}`: {e}")))?.field)
        };
        match (self.problem, name) {
            (_, "psi_zero") => Ok(Arc::new(ZeroField)),
            (ProblemType::ThinObstacle, "exact_u") => Ok(Arc::new(ExactSolution::default())),
            (ProblemType::ThinObstacle, "v1") => example(ExampleName::V1, None),
            (ProblemType::ThinObstacle, "v2") => example(ExampleName::V2, None),
            (ProblemType::ThinObstacle, "v3eps") => match self.eps {
                Some(e) => example(ExampleName::V3Eps, Some(e)),
                None => Err(CliError::Config(format!("`{key}`: v3eps needs a top-level `eps`"))),
            },
            (ProblemType::Signorini, "exact_u") => Ok(Arc::new(desk_exact())),
            (ProblemType::Signorini, "desk_bubble") => Ok(Arc::new(desk_bubble(0.5))),
            (ProblemType::ThinObstacle, other) => Err(unknown(key, other, &THIN_OBSTACLE_FIELDS)),
            (ProblemType::Signorini, other) => Err(unknown(key, other, &SIGNORINI_FIELDS)),
        }
    }

    pub fn flux(&self, spec: &FluxSpec, v: &SharedField, u: Option<&SharedField>, key: &str) -> Result<SharedFlux, CliError> {
        let grad = |f: &SharedField| flux_from_gradient(f.clone()).map_err(|e| CliError::Config(format!("`{key}`: {e}")));
        Ok(match spec {
            FluxSpec::Named(n) if n == "gradient_of_v" => grad(v)?,
            FluxSpec::Named(n) if n == "gradient_of_u" => match u {
                Some(u) => grad(u)?,
                None => return Err(CliError::Config(format!("`{key}`: gradient_of_u needs `fields.u`"))),
            },
            FluxSpec::Named(other) => {
                return Err(unknown(key, other, &["gradient_of_v", "gradient_of_u"]));
            }
            FluxSpec::Polynomial { polynomial } => Arc::new(poly_flux(polynomial)),
            FluxSpec::GradientOf { gradient_of } => grad(&self.field(gradient_of, &format!("{key}.gradient_of"))?)?,
            FluxSpec::Sum { sum } => {
                let terms = sum
                    .iter()
                    .enumerate()
                    .map(|(i, s)| Ok((1.0, self.flux(s, v, u, &format!("{key}.sum[{i}]"))?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Arc::new(FluxSum::new(terms))
            }
        })
    }

    pub fn multiplier(&self, spec: &LambdaSpec, q: &SharedFlux, key: &str) -> Result<SharedMultiplier, CliError> {
        match spec {
            LambdaSpec::Named(n) if n == "clip_jump" => Ok(multiplier_from_jump(q.clone())),
            LambdaSpec::Named(n) if n == "exact_jump" => Ok(Arc::new(ExactJump::default())),
            LambdaSpec::Named(n) if n == "zero" => Ok(Arc::new(ZeroMultiplier)),
            LambdaSpec::Named(other) => Err(unknown(key, other, &["clip_jump", "exact_jump", "zero"])),
            LambdaSpec::Table { table } => Ok(Arc::new(
                TableMultiplier::new(table.clone()).map_err(|e| CliError::Config(format!("`{key}.table`: {e}")))?,
            )),
        }
    }

    pub fn contact_multiplier(&self, spec: &LambdaSpec, q: &SharedFlux, key: &str) -> Result<SharedContactMultiplier, CliError> {
        match spec {
            LambdaSpec::Named(n) if n == "clip_jump" || n == "clip_normal_flux" => Ok(Arc::new(ClippedNormalFlux(q.clone()))),
            LambdaSpec::Named(n) if n == "zero" => Ok(Arc::new(ByAbscissa(Arc::new(ZeroMultiplier)))),
            LambdaSpec::Named(other) => Err(unknown(key, other, &["clip_normal_flux", "zero"])),
            LambdaSpec::Table { .. } => Ok(Arc::new(ByAbscissa(self.multiplier(spec, q, key)?))),
        }
    }
}

fn poly_field(p: &PolySpec, key: &str) -> Result<SharedField, CliError> {
    match (&p.both, &p.plus, &p.minus) {
        (Some(t), None, None) => Ok(Arc::new(Polynomial::new(poly(t)))),
        (None, Some(pl), mi) => Ok(Arc::new(PiecewisePolynomial::per_side(poly(pl), poly(mi.as_ref().unwrap_or(pl))))),
        _ => Err(CliError::Config(format!(
            "`{key}.polynomial`: give either `both` or `plus` (and optionally `minus`)"
        ))),
    }
}

fn poly_flux(p: &PolyFluxSpec) -> PolynomialFlux {
    let plus = [poly(&p.plus[0]), poly(&p.plus[1])];
    let minus = match &p.minus {
        Some(m) => [poly(&m[0]), poly(&m[1])],
        None => plus.clone(),
    };
    PolynomialFlux::new(plus, minus)
}
