//! The exact solution `u = Re((x1 + i|x2|)^{3/2})` and the three example
//! families built on it.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{assemble_constants, ConstantOverrides};
use crate::error::{invalid, Result};
use crate::fields::{
    flux_from_gradient, multiplier_from_jump, MultiplierField, PiecewisePolynomial, PolyPiece,
    Poly2, Polynomial, ScalarField, SharedField, SharedFlux, SharedMultiplier, Smoothness,
    Superposition, ZeroField,
};
use crate::geometry::{build_domain, Point, Side, Vector};
use crate::majorants::{Alpha, Estimator, M5Mode, MajorantReport, ThinObstacleProblem};
use crate::quadrature::{IntegrandFeatures, QuadConfig};

/// `Re((x1 - shift + i|x2|)^{3/2})`.
///
/// Evaluated through `√((r ± x)/2)` with the cancelling branch rewritten as
/// `x2² / (r ∓ x)`, so the trace on `x1 < shift` is exactly zero and the
/// jump is exactly `3√(shift - x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactSolution {
    pub shift: f64,
}

impl ExactSolution {
    /// `(√((r + x)/2), √((r - x)/2))`, the real and imaginary parts of `z^{1/2}`.
    fn half_roots(&self, p: &Point) -> (f64, f64) {
        let x = p.x - self.shift;
        let y2 = p.y * p.y;
        let r = x.hypot(p.y);
        if x >= 0.0 {
            let rp = r + x;
            let rm = if rp > 0.0 { y2 / rp } else { 0.0 };
            ((rp / 2.0).sqrt(), (rm / 2.0).sqrt())
        } else {
            let rm = r - x;
            let rp = y2 / rm;
            ((rp / 2.0).sqrt(), (rm / 2.0).sqrt())
        }
    }

    pub fn eval(&self, p: &Point) -> f64 {
        let (sp, _) = self.half_roots(p);
        let x = p.x - self.shift;
        let r = x.hypot(p.y);
        sp * (2.0 * x - r)
    }

    /// `[∂u/∂n]` on the line `x2 = 0`.
    pub fn jump(&self, x1: f64) -> f64 {
        let x = x1 - self.shift;
        if x < 0.0 {
            3.0 * (-x).sqrt()
        } else {
            0.0
        }
    }
}

impl ScalarField for ExactSolution {
    fn value(&self, p: &Point, _: Side) -> f64 {
        self.eval(p)
    }
    fn gradient(&self, p: &Point, side: Side) -> Vector {
        let (sp, sm) = self.half_roots(p);
        let gy = match side {
            Side::Plus => -1.5 * sm,
            Side::Minus => 1.5 * sm,
        };
        Vector::new(1.5 * sp, gy)
    }
    fn laplacian(&self, _: &Point, _: Side) -> Option<f64> {
        Some(0.0)
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::AnalyticSingular
    }
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures {
            x1_breaks: Vec::new(),
            singular_points: vec![Point::new(self.shift, 0.0)],
        }
    }
}

pub fn exact_solution(x1: f64, x2: f64) -> f64 {
    ExactSolution::default().eval(&Point::new(x1, x2))
}

pub fn exact_jump(x1: f64) -> f64 {
    ExactSolution::default().jump(x1)
}

/// `λ* = [∂u/∂n]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExactJump {
    pub shift: f64,
}

impl MultiplierField for ExactJump {
    fn value(&self, x1: f64) -> f64 {
        ExactSolution { shift: self.shift }.jump(x1)
    }
    fn features(&self) -> IntegrandFeatures {
        ExactSolution { shift: self.shift }.features()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    V1,
    V2,
    V3Eps,
}

impl std::str::FromStr for ExampleName {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v1" => Ok(ExampleName::V1),
            "v2" => Ok(ExampleName::V2),
            "v3eps" => Ok(ExampleName::V3Eps),
            other => Err(invalid(format!("unknown example `{other}` (expected v1, v2, v3eps)"))),
        }
    }
}

impl ExampleName {
    pub fn name(self) -> &'static str {
        match self {
            ExampleName::V1 => "v1",
            ExampleName::V2 => "v2",
            ExampleName::V3Eps => "v3eps",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleCase {
    pub name: ExampleName,
    pub a: f64,
    pub eps: Option<f64>,
    pub field: SharedField,
    /// The polynomial part `v - u`.
    pub correction: SharedField,
    pub oracle: SharedField,
    pub exact_error_closed_form: Option<f64>,
}

fn lin(c0: f64, c1: f64, c2: f64) -> Poly2 {
    Poly2::linear(c0, c1, c2)
}

/// `v1 - u`: `x2²(x2 - x1 - a)(x2 + x1 - a)` above `M`, `x2²(x2 - x1 + a)(x2 + x1 + a)` below.
pub fn v1_correction(a: f64) -> PiecewisePolynomial {
    let x2sq = Poly2::monomial(0, 2, 1.0);
    let plus = &(&x2sq * &lin(-a, -1.0, 1.0)) * &lin(-a, 1.0, 1.0);
    let minus = &(&x2sq * &lin(a, -1.0, 1.0)) * &lin(a, 1.0, 1.0);
    PiecewisePolynomial::per_side(plus, minus)
}

/// `v2 - u = (x1 + x2 - a)(x2 - x1 - a)(x1 + x2 + a)(x2 - x1 + a)`.
pub fn v2_correction(a: f64) -> Polynomial {
    Polynomial::new(lin(-a, 1.0, 1.0) * lin(-a, -1.0, 1.0) * lin(a, 1.0, 1.0) * lin(a, -1.0, 1.0))
}

/// `v3ε - u`, built from `β(x1) = (a - x1)(x1 + ε)²`.
pub fn v3_correction(a: f64, eps: f64) -> PiecewisePolynomial {
    let beta = lin(a, -1.0, 0.0) * lin(eps, 1.0, 0.0).pow(2);
    let e2 = eps * eps;
    let left = (&beta * &(lin(a, 1.0, 1.0) * lin(a, 1.0, -1.0))).scale(e2);
    let right = (&beta * &(lin(a, -1.0, -1.0) * lin(a, -1.0, 1.0))).scale(e2);
    PiecewisePolynomial::new(vec![
        PolyPiece { side: None, lo: f64::NEG_INFINITY, hi: -eps, poly: Polynomial::new(Poly2::zero()) },
        PolyPiece { side: None, lo: -eps, hi: 0.0, poly: Polynomial::new(left) },
        PolyPiece { side: None, lo: 0.0, hi: f64::INFINITY, poly: Polynomial::new(right) },
    ])
}

pub fn build_example(name: ExampleName, a: f64, eps: Option<f64>) -> Result<ExampleCase> {
    build_domain(a)?;
    if name != ExampleName::V3Eps && eps.is_some() {
        return Err(invalid(format!("eps is only meaningful for v3eps, not {}", name.name())));
    }
    let oracle: SharedField = Arc::new(ExactSolution::default());
    let (correction, closed, eps): (SharedField, _, _) = match name {
        ExampleName::V1 => (
            Arc::new(v1_correction(a)),
            Some(4.0 / (3.0 * 35f64.sqrt()) * a.powi(4)),
            None,
        ),
        ExampleName::V2 => (
            Arc::new(v2_correction(a)),
            Some(16.0 / (3.0 * 5f64.sqrt()) * a.powi(4)),
            None,
        ),
        ExampleName::V3Eps => {
            let e = eps.ok_or_else(|| invalid("v3eps needs eps"))?;
            if !(e > 0.0 && e < a) {
                return Err(invalid(format!("eps must lie in (0, a) = (0, {a}), got {e}")));
            }
            (Arc::new(v3_correction(a, e)), None, Some(e))
        }
    };
    let field: SharedField = Arc::new(Superposition::sum(oracle.clone(), correction.clone()));
    Ok(ExampleCase {
        name,
        a,
        eps,
        field,
        correction,
        oracle,
        exact_error_closed_form: closed,
    })
}

/// The example problem: `ψ = 0`, `φ` the trace of `u`.
pub fn thin_obstacle_problem(a: f64) -> Result<ThinObstacleProblem> {
    Ok(ThinObstacleProblem {
        domain: build_domain(a)?,
        psi: Arc::new(ZeroField),
        phi: Arc::new(ExactSolution::default()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxChoice {
    GradientOfV,
    GradientOfU,
}

impl std::str::FromStr for FluxChoice {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient_of_v" => Ok(FluxChoice::GradientOfV),
            "gradient_of_u" => Ok(FluxChoice::GradientOfU),
            other => Err(invalid(format!(
                "unknown flux choice `{other}` (expected gradient_of_v, gradient_of_u)"
            ))),
        }
    }
}

/// Flux and multiplier for a flux choice: `(∇v, max([∂v/∂n], 0))` or `(∇u, λ*)`.
pub fn select_flux(case: &ExampleCase, choice: FluxChoice) -> Result<(SharedFlux, SharedMultiplier)> {
    Ok(match choice {
        FluxChoice::GradientOfV => {
            let q = flux_from_gradient(case.field.clone())?;
            let lam = multiplier_from_jump(q.clone());
            (q, lam)
        }
        FluxChoice::GradientOfU => (
            flux_from_gradient(case.oracle.clone())?,
            Arc::new(ExactJump::default()),
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsTrend {
    pub eps: f64,
    pub eps_pow_three_quarters: f64,
    /// `efficiency - 1` of the first advanced majorant.
    pub excess: f64,
    pub excess_over_eps_pow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub example: ExampleName,
    pub a: f64,
    pub eps: Option<f64>,
    pub flux: FluxChoice,
    pub exact_error: f64,
    pub exact_error_closed_form: Option<f64>,
    pub reports: Vec<MajorantReport>,
    pub eps_trend: Option<EpsTrend>,
}

/// Exact error, `𝔐` and (when the manifold residual vanishes) the
/// partial-Poincaré variant, with efficiency indices.
pub fn reproduce(
    name: ExampleName,
    a: f64,
    eps: Option<f64>,
    quad: &QuadConfig,
    flux: FluxChoice,
) -> Result<Reproduction> {
    let case = build_example(name, a, eps)?;
    let problem = thin_obstacle_problem(a)?;
    let constants = assemble_constants(&problem.domain, &ConstantOverrides::new())?;
    let est = Estimator::new(problem, constants, *quad).with_oracle(case.oracle.clone());
    let (q, lam) = select_flux(&case, flux)?;
    let exact_error = est.energy_error(&case.field, &case.oracle)?;
    let mut reports = vec![est.majorant_m(&case.field, &q, &lam)?];
    let jump = reports[0].terms["jump_residual"];
    if jump <= crate::majorants::ZERO_RESIDUAL {
        reports.push(est.majorant_m5(&case.field, &q, &lam, Alpha::Optimal, M5Mode::Partial)?);
    }
    let eps_trend = case.eps.map(|e| {
        let excess = reports[0].efficiency_index.unwrap_or(f64::NAN) - 1.0;
        let ep = e.powf(0.75);
        EpsTrend {
            eps: e,
            eps_pow_three_quarters: ep,
            excess,
            excess_over_eps_pow: excess / ep,
        }
    });
    Ok(Reproduction {
        example: name,
        a,
        eps: case.eps,
        flux,
        exact_error,
        exact_error_closed_form: case.exact_error_closed_form,
        reports,
        eps_trend,
    })
}

/// `16/(3√5 π) a⁴`, the first advanced majorant of example 1 with `q = ∇v1`.
pub fn v1_majorant_closed_form(a: f64) -> f64 {
    16.0 / (3.0 * 5f64.sqrt() * PI) * a.powi(4)
}
