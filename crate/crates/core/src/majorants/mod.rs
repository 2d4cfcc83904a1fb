//! Error majorants for the interior thin obstacle problem.
//!
//! All majorants are computed from one set of [`Residuals`]: the flux misfit,
//! the per-side divergence norms and means, and samples of `v - ψ`, `[q·n]`
//! and `λ` at the nodes of a manifold rule. Parameter searches reuse the
//! residuals and never touch the quadrature again.

mod minimize;
mod optimize;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{Constant, ConstantId, ConstantSet, Provenance, TRACE_MANIFOLD};
use crate::error::{invalid, Error, Result};
use crate::fields::{
    check_admissible, AdmissibilityReport, MultiplierField, SharedField, SharedFlux,
    SharedMultiplier,
};
use crate::geometry::{Domain2D, Point, Side};
use crate::quadrature::{
    integrate_domain, integrate_subdomain, manifold_nodes, pairwise_sum, IntegrandFeatures,
    LineNode, QuadConfig,
};

pub use minimize::{IterationRecord, Minimization, MinimizeOptions};
pub use optimize::{golden_section, optimal_alpha, BetaObjective, LineSearch};

/// Residuals at or below this are treated as exactly zero, so the constant
/// multiplying them is not required.
pub const ZERO_RESIDUAL: f64 = 1e-12;
/// Membership tolerance for equilibrated fluxes in the basic majorant.
pub const EQUILIBRATION_TOL: f64 = 1e-10;
/// Tolerance on the zero-mean conditions of the Poincaré-type majorants.
pub const MEAN_TOL: f64 = 1e-10;
/// Absolute slack between a majorant and the quadrature-computed exact error.
pub const QUADRATURE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MajorantKind {
    #[serde(rename = "basic")]
    Basic,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "m12")]
    M12,
    #[serde(rename = "m4")]
    M4,
    #[serde(rename = "m5")]
    M5,
    #[serde(rename = "m5_partial")]
    M5Partial,
    #[serde(rename = "signorini")]
    Signorini,
    #[serde(rename = "signorini_poincare")]
    SignoriniPoincare,
}

impl MajorantKind {
    pub const ALL: [MajorantKind; 8] = [
        MajorantKind::Basic,
        MajorantKind::M,
        MajorantKind::M12,
        MajorantKind::M4,
        MajorantKind::M5,
        MajorantKind::M5Partial,
        MajorantKind::Signorini,
        MajorantKind::SignoriniPoincare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MajorantKind::Basic => "basic",
            MajorantKind::M => "m",
            MajorantKind::M12 => "m12",
            MajorantKind::M4 => "m4",
            MajorantKind::M5 => "m5",
            MajorantKind::M5Partial => "m5_partial",
            MajorantKind::Signorini => "signorini",
            MajorantKind::SignoriniPoincare => "signorini_poincare",
        }
    }

    /// The symbol used for this quantity in the literature.
    pub fn symbol(self) -> &'static str {
        match self {
            MajorantKind::Basic => "basic majorant (equilibrated flux)",
            MajorantKind::M => "𝔐 (first advanced form)",
            MajorantKind::M12 => "(𝔐1 + 𝔐2)^{1/2}",
            MajorantKind::M4 => "𝔐4 = (𝔐1 + 𝔐3)^{1/2}, multiplier eliminated",
            MajorantKind::M5 => "𝔐5 (Poincaré form)",
            MajorantKind::M5Partial => "𝔐'3 (Poincaré form, manifold mean condition only)",
            MajorantKind::Signorini => "𝔐^S",
            MajorantKind::SignoriniPoincare => "𝔐1^S",
        }
    }
}

impl fmt::Display for MajorantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MajorantKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MajorantKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown majorant kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Betas {
    pub beta1: f64,
    pub beta2: f64,
}

impl Betas {
    pub const ONE: Betas = Betas { beta1: 1.0, beta2: 1.0 };

    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        let b = Betas { beta1, beta2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `c_β = β1 β2 / ((1 + β1)(1 + β2))`.
    pub fn c_beta(&self) -> f64 {
        self.beta1 * self.beta2 / ((1.0 + self.beta1) * (1.0 + self.beta2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Fixed(f64),
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum M5Mode {
    /// Both zero-mean conditions, Poincaré constants in the divergence terms.
    Full,
    /// Only the manifold mean condition, Friedrichs constants in the divergence terms.
    Partial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl Parameters {
    fn betas(b: Betas) -> Self {
        Self {
            beta1: Some(b.beta1),
            beta2: Some(b.beta2),
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct QuadDiagnostics {
    pub elements: usize,
    pub max_grading_depth: u32,
    pub manifold_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantReport {
    pub kind: MajorantKind,
    pub symbol: String,
    pub value: f64,
    pub terms: BTreeMap<String, f64>,
    pub parameters: Parameters,
    pub constants_used: BTreeMap<String, Constant>,
    pub exact_error: Option<f64>,
    pub efficiency_index: Option<f64>,
    pub quadrature_slack: f64,
    pub diagnostics: QuadDiagnostics,
}

impl MajorantReport {
    pub fn term(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// Ingredients shared by every majorant.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// `‖∇v - q‖²_Ω`.
    pub flux_misfit_sq: f64,
    /// `‖div q‖²_{Ω±}`, plus first.
    pub div_sq: [f64; 2],
    /// `∫_{Ω±} div q`.
    pub div_mean: [f64; 2],
    pub samples: ManifoldSamples,
    pub diagnostics: QuadDiagnostics,
}

/// Values at the nodes of a rule on `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSamples {
    pub nodes: Vec<LineNode>,
    /// `v - ψ`.
    pub gap: Vec<f64>,
    /// `[q·n]`.
    pub jump: Vec<f64>,
    /// `λ`, when a multiplier was supplied.
    pub lambda: Option<Vec<f64>>,
}

impl ManifoldSamples {
    fn sum(&self, f: impl Fn(usize) -> f64) -> f64 {
        let v: Vec<f64> = (0..self.nodes.len()).map(|i| self.nodes[i].weight * f(i)).collect();
        pairwise_sum(&v)
    }

    fn lambda(&self) -> Result<&[f64]> {
        self.lambda
            .as_deref()
            .ok_or_else(|| Error::InternalDefect("residuals computed without a multiplier".into()))
    }

    /// `∫_M λ(v - ψ)`, clipped at zero against admissibility-level noise.
    pub fn pairing(&self) -> Result<f64> {
        let l = self.lambda()?;
        Ok(self.sum(|i| l[i] * self.gap[i]).max(0.0))
    }

    /// `‖λ - [q·n]‖²_M`.
    pub fn jump_residual_sq(&self) -> Result<f64> {
        let l = self.lambda()?;
        Ok(self.sum(|i| (l[i] - self.jump[i]).powi(2)))
    }

    /// `∫_M (λ - [q·n])`.
    pub fn jump_mean(&self) -> Result<f64> {
        let l = self.lambda()?;
        Ok(self.sum(|i| l[i] - self.jump[i]))
    }

    /// `∫_M ρ` for `k = c_β / C²_Tr`.
    pub fn rho_integral(&self, k: f64) -> f64 {
        self.sum(|i| rho(self.gap[i], self.jump[i], k))
    }
}

/// Pointwise integrand of the multiplier-free manifold term.
pub fn rho(gap: f64, jump: f64, k: f64) -> f64 {
    if jump >= k * gap {
        gap * (2.0 * jump - k * gap)
    } else {
        jump * jump / k
    }
}

#[derive(Debug, Clone)]
pub struct ThinObstacleProblem {
    pub domain: Domain2D,
    pub psi: SharedField,
    /// Dirichlet datum on `∂Ω`.
    pub phi: SharedField,
}

/// `λ̄ = max([q·n] - c_β C⁻²_Tr (v - ψ), 0)`.
#[derive(Debug, Clone)]
pub struct OptimalMultiplier {
    v: SharedField,
    q: SharedFlux,
    psi: SharedField,
    k: f64,
}

impl MultiplierField for OptimalMultiplier {
    fn value(&self, x1: f64) -> f64 {
        let p = Point::new(x1, 0.0);
        let gap = self.v.value(&p, Side::Plus) - self.psi.value(&p, Side::Plus);
        (self.q.normal_jump(x1) - self.k * gap).max(0.0)
    }
    fn features(&self) -> IntegrandFeatures {
        self.v
            .features()
            .merge(&self.q.features())
            .merge(&self.psi.features())
    }
}

/// Records which constants a majorant actually used.
#[derive(Default)]
struct ConstantLog(BTreeMap<String, Constant>);

impl ConstantLog {
    fn record(&mut self, name: &str, c: &Constant) {
        self.0.insert(name.to_string(), c.clone());
    }
}

#[derive(Debug, Clone)]
pub struct Estimator {
    pub problem: ThinObstacleProblem,
    pub constants: ConstantSet,
    pub quad: QuadConfig,
    pub admissibility_tol: f64,
    pub oracle: Option<SharedField>,
}

impl Estimator {
    pub fn new(problem: ThinObstacleProblem, constants: ConstantSet, quad: QuadConfig) -> Self {
        Self {
            problem,
            constants,
            quad,
            admissibility_tol: 1e-10,
            oracle: None,
        }
    }

    /// With an oracle every report carries the exact error and efficiency.
    pub fn with_oracle(mut self, u: SharedField) -> Self {
        self.oracle = Some(u);
        self
    }

    pub fn domain(&self) -> &Domain2D {
        &self.problem.domain
    }

    /// `‖∇(v - u)‖_Ω`.
    pub fn energy_error(&self, v: &SharedField, u: &SharedField) -> Result<f64> {
        let feats = v.features().merge(&u.features());
        let r = integrate_domain(
            |p, s| (v.gradient(p, s) - u.gradient(p, s)).norm_squared(),
            self.domain(),
            &feats,
            &self.quad,
        )?;
        Ok(r.value.max(0.0).sqrt())
    }

    pub fn check_admissible(&self, v: &SharedField) -> AdmissibilityReport {
        check_admissible(
            v.as_ref(),
            self.domain(),
            self.problem.psi.as_ref(),
            self.problem.phi.as_ref(),
            self.admissibility_tol,
        )
    }

    pub fn residuals(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: Option<&SharedMultiplier>,
    ) -> Result<Residuals> {
        self.check_admissible(v).into_result()?;
        let psi = &self.problem.psi;
        let mut feats = v.features().merge(&q.features()).merge(&psi.features());
        let misfit = integrate_domain(
            |p, s| (v.gradient(p, s) - q.value(p, s)).norm_squared(),
            self.domain(),
            &feats,
            &self.quad,
        )?;
        let mut div_sq = [0.0; 2];
        let mut div_mean = [0.0; 2];
        let mut max_depth = misfit.max_depth;
        for (k, side) in Side::BOTH.into_iter().enumerate() {
            let sq = integrate_subdomain(
                |p, s| q.divergence(p, s).powi(2),
                self.domain(),
                side,
                &feats,
                &self.quad,
            )?;
            let mean = integrate_subdomain(
                |p, s| q.divergence(p, s),
                self.domain(),
                side,
                &feats,
                &self.quad,
            )?;
            div_sq[k] = sq.value.max(0.0);
            div_mean[k] = mean.value;
            max_depth = max_depth.max(sq.max_depth).max(mean.max_depth);
        }
        if let Some(l) = lambda {
            feats = feats.merge(&l.features());
        }
        let nodes = manifold_nodes(self.domain(), &feats, &self.quad);
        let mut gap = Vec::with_capacity(nodes.len());
        let mut jump = Vec::with_capacity(nodes.len());
        let mut lam = lambda.map(|_| Vec::with_capacity(nodes.len()));
        for n in &nodes {
            let p = Point::new(n.x1, 0.0);
            let g = v.value(&p, Side::Plus) - psi.value(&p, Side::Plus);
            let j = q.normal_jump(n.x1);
            finite("v - ψ on M", &p, g)?;
            finite("[q·n]", &p, j)?;
            gap.push(g);
            jump.push(j);
            if let (Some(l), Some(out)) = (lambda, lam.as_mut()) {
                let val = l.value(n.x1);
                finite("λ", &p, val)?;
                if val < 0.0 {
                    return Err(Error::NegativeMultiplier { x1: n.x1, value: val });
                }
                out.push(val);
            }
        }
        let diagnostics = QuadDiagnostics {
            elements: misfit.elements,
            max_grading_depth: max_depth,
            manifold_nodes: nodes.len(),
        };
        Ok(Residuals {
            flux_misfit_sq: misfit.value.max(0.0),
            div_sq,
            div_mean,
            samples: ManifoldSamples {
                nodes,
                gap,
                jump,
                lambda: lam,
            },
            diagnostics,
        })
    }

    /// `C · r`, skipping (and not requiring) the constant when `r` vanishes.
    fn weighted(&self, id: ConstantId, r: f64, log: &mut ConstantLog) -> Result<f64> {
        if r <= ZERO_RESIDUAL {
            return Ok(0.0);
        }
        let [c] = self.constants.require([id])?;
        log.record(id.name(), self.constants.get(id).expect("required above"));
        Ok(c * r)
    }

    fn trace_manifold(&self, log: &mut ConstantLog) -> Result<f64> {
        let c = self.constants.require_trace_manifold()?;
        let source = [ConstantId::TracePlus, ConstantId::TraceMinus]
            .iter()
            .filter_map(|id| self.constants.get(*id))
            .find(|k| k.value == c)
            .map(|k| k.source.clone())
            .unwrap_or_default();
        log.record(
            TRACE_MANIFOLD,
            &Constant {
                value: c,
                provenance: Provenance::UserSupplied,
                source: format!("min of one-sided trace candidates; attained by: {source}"),
            },
        );
        Ok(c)
    }

    fn trace_weighted(&self, r: f64, log: &mut ConstantLog) -> Result<f64> {
        if r <= ZERO_RESIDUAL {
            return Ok(0.0);
        }
        Ok(self.trace_manifold(log)? * r)
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        kind: MajorantKind,
        value: f64,
        terms: BTreeMap<String, f64>,
        parameters: Parameters,
        log: ConstantLog,
        v: &SharedField,
        diagnostics: QuadDiagnostics,
    ) -> Result<MajorantReport> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InternalDefect(format!("{kind} evaluated to {value}")));
        }
        if let Some((name, t)) = terms.iter().find(|(_, t)| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InternalDefect(format!("{kind} term {name} = {t}")));
        }
        let exact_error = match &self.oracle {
            Some(u) => Some(self.energy_error(v, u)?),
            None => None,
        };
        let efficiency_index = exact_error.filter(|e| *e > 0.0).map(|e| value / e);
        Ok(MajorantReport {
            kind,
            symbol: kind.symbol().to_string(),
            value,
            terms,
            parameters,
            constants_used: log.0,
            exact_error,
            efficiency_index,
            quadrature_slack: QUADRATURE_SLACK,
            diagnostics,
        })
    }

    /// `(‖∇v - y‖² + 2∫_M λ(v - ψ))^{1/2}` for an equilibrated `y`.
    pub fn majorant_basic(
        &self,
        v: &SharedField,
        y: &SharedFlux,
        lambda: &SharedMultiplier,
    ) -> Result<MajorantReport> {
        let r = self.residuals(v, y, Some(lambda))?;
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let jr = r.samples.jump_residual_sq()?.sqrt();
        if dp > EQUILIBRATION_TOL || dm > EQUILIBRATION_TOL || jr > EQUILIBRATION_TOL {
            return Err(Error::NotEquilibrated {
                div_plus: dp,
                div_minus: dm,
                jump: jr,
            });
        }
        let pairing = r.samples.pairing()?;
        let value = (r.flux_misfit_sq + 2.0 * pairing).sqrt();
        let terms = terms([
            ("flux_misfit", r.flux_misfit_sq.sqrt()),
            ("manifold_pairing", pairing),
        ]);
        self.finish(MajorantKind::Basic, value, terms, Parameters::default(), ConstantLog::default(), v, r.diagnostics)
    }

    /// `‖∇v - q‖ + √2(∫λ(v - ψ))^{1/2} + C_F+‖div q‖+ + C_F-‖div q‖- + C_Tr‖λ - [q·n]‖_M`.
    pub fn majorant_m(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedMultiplier,
    ) -> Result<MajorantReport> {
        let r = self.residuals(v, q, Some(lambda))?;
        let mut log = ConstantLog::default();
        let f = r.flux_misfit_sq.sqrt();
        let pairing = r.samples.pairing()?;
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let jr = r.samples.jump_residual_sq()?.sqrt();
        let wp = self.weighted(ConstantId::FriedrichsPlus, dp, &mut log)?;
        let wm = self.weighted(ConstantId::FriedrichsMinus, dm, &mut log)?;
        let wj = self.trace_weighted(jr, &mut log)?;
        let value = f + (2.0 * pairing).sqrt() + wp + wm + wj;
        let terms = terms([
            ("flux_misfit", f),
            ("manifold_pairing", pairing),
            ("divergence_residual_plus", dp),
            ("divergence_residual_minus", dm),
            ("jump_residual", jr),
        ]);
        self.finish(MajorantKind::M, value, terms, Parameters::default(), log, v, r.diagnostics)
    }

    /// `𝔐1 = (1+β1)‖∇v - q‖² + (1+1/β1)(1+β2)[C_F+‖div q‖+ + C_F-‖div q‖-]²`.
    fn m1(&self, r: &Residuals, b: Betas, log: &mut ConstantLog) -> Result<f64> {
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let d = self.weighted(ConstantId::FriedrichsPlus, dp, log)?
            + self.weighted(ConstantId::FriedrichsMinus, dm, log)?;
        Ok((1.0 + b.beta1) * r.flux_misfit_sq
            + (1.0 + 1.0 / b.beta1) * (1.0 + b.beta2) * d * d)
    }

    fn m12_from(&self, r: &Residuals, b: Betas, log: &mut ConstantLog) -> Result<(f64, f64, f64)> {
        b.validate()?;
        let m1 = self.m1(r, b, log)?;
        let jr = r.samples.jump_residual_sq()?.sqrt();
        let wj = self.trace_weighted(jr, log)?;
        let m2 = wj * wj / b.c_beta() + 2.0 * r.samples.pairing()?;
        Ok(((m1 + m2).sqrt(), m1, m2))
    }

    fn m4_from(&self, r: &Residuals, b: Betas, log: &mut ConstantLog) -> Result<(f64, f64, f64)> {
        b.validate()?;
        let m1 = self.m1(r, b, log)?;
        let c = self.trace_manifold(log)?;
        let m3 = r.samples.rho_integral(b.c_beta() / (c * c));
        // ρ ≥ 0 pointwise up to admissibility noise in v - ψ
        let m3 = m3.max(0.0);
        Ok(((m1 + m3).sqrt(), m1, m3))
    }

    fn report_m12(&self, v: &SharedField, r: &Residuals, b: Betas) -> Result<MajorantReport> {
        let mut log = ConstantLog::default();
        let (value, m1, m2) = self.m12_from(r, b, &mut log)?;
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let terms = terms([
            ("flux_misfit", r.flux_misfit_sq.sqrt()),
            ("manifold_pairing", r.samples.pairing()?),
            ("divergence_residual_plus", dp),
            ("divergence_residual_minus", dm),
            ("jump_residual", r.samples.jump_residual_sq()?.sqrt()),
            ("m1", m1),
            ("m2", m2),
            ("c_beta", b.c_beta()),
        ]);
        self.finish(MajorantKind::M12, value, terms, Parameters::betas(b), log, v, r.diagnostics)
    }

    fn report_m4(&self, v: &SharedField, r: &Residuals, b: Betas) -> Result<MajorantReport> {
        let mut log = ConstantLog::default();
        let (value, m1, m3) = self.m4_from(r, b, &mut log)?;
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let terms = terms([
            ("flux_misfit", r.flux_misfit_sq.sqrt()),
            ("divergence_residual_plus", dp),
            ("divergence_residual_minus", dm),
            ("m1", m1),
            ("rho_integral", m3),
            ("c_beta", b.c_beta()),
        ]);
        self.finish(MajorantKind::M4, value, terms, Parameters::betas(b), log, v, r.diagnostics)
    }

    /// `(𝔐1 + 𝔐2)^{1/2}` with
    /// `𝔐2 = (1+1/β1)(1+1/β2) C²_Tr ‖λ - [q·n]‖² + 2∫λ(v - ψ)`.
    pub fn majorant_m12(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedMultiplier,
        betas: Betas,
    ) -> Result<MajorantReport> {
        betas.validate()?;
        let r = self.residuals(v, q, Some(lambda))?;
        self.report_m12(v, &r, betas)
    }

    /// The minimizer of `𝔐2` over nonnegative multipliers.
    pub fn optimal_lambda(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        betas: Betas,
    ) -> Result<SharedMultiplier> {
        betas.validate()?;
        let c = self.constants.require_trace_manifold()?;
        Ok(Arc::new(OptimalMultiplier {
            v: v.clone(),
            q: q.clone(),
            psi: self.problem.psi.clone(),
            k: betas.c_beta() / (c * c),
        }))
    }

    /// `(𝔐1 + ∫_M ρ)^{1/2}`: the multiplier is eliminated analytically.
    pub fn majorant_m4(&self, v: &SharedField, q: &SharedFlux, betas: Betas) -> Result<MajorantReport> {
        betas.validate()?;
        let r = self.residuals(v, q, None)?;
        self.report_m4(v, &r, betas)
    }

    /// `‖∇v - q‖ + √2(∫λ(v - ψ))^{1/2} + ((𝔇- + α𝔪-)² + (𝔇+ + (1-α)𝔪+)²)^{1/2}`.
    pub fn majorant_m5(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedMultiplier,
        alpha: Alpha,
        mode: M5Mode,
    ) -> Result<MajorantReport> {
        let r = self.residuals(v, q, Some(lambda))?;
        let mean_jump = r.samples.jump_mean()?;
        let means_ok = match mode {
            M5Mode::Full => r.div_mean.iter().all(|m| m.abs() <= MEAN_TOL),
            M5Mode::Partial => true,
        };
        if !means_ok || mean_jump.abs() > MEAN_TOL {
            return Err(Error::ConditionViolation {
                mean_div_plus: r.div_mean[0],
                mean_div_minus: r.div_mean[1],
                mean_jump,
            });
        }
        let mut log = ConstantLog::default();
        let [dp, dm] = r.div_sq.map(f64::sqrt);
        let jr = r.samples.jump_residual_sq()?.sqrt();
        let (cp, cm, kind) = match mode {
            M5Mode::Full => (ConstantId::PoincarePlus, ConstantId::PoincareMinus, MajorantKind::M5),
            M5Mode::Partial => (
                ConstantId::FriedrichsPlus,
                ConstantId::FriedrichsMinus,
                MajorantKind::M5Partial,
            ),
        };
        let d_plus = self.weighted(cp, dp, &mut log)?;
        let d_minus = self.weighted(cm, dm, &mut log)?;
        let m_plus = self.weighted(ConstantId::PoincareManifoldPlus, jr, &mut log)?;
        let m_minus = self.weighted(ConstantId::PoincareManifoldMinus, jr, &mut log)?;
        let a = match alpha {
            Alpha::Fixed(a) if (0.0..=1.0).contains(&a) => a,
            Alpha::Fixed(a) => return Err(invalid(format!("alpha must lie in [0, 1], got {a}"))),
            Alpha::Optimal => optimal_alpha(d_plus, d_minus, m_plus, m_minus),
        };
        let bracket = bracket(d_plus, d_minus, m_plus, m_minus, a);
        let f = r.flux_misfit_sq.sqrt();
        let pairing = r.samples.pairing()?;
        let value = f + (2.0 * pairing).sqrt() + bracket;
        let terms = terms([
            ("flux_misfit", f),
            ("manifold_pairing", pairing),
            ("divergence_residual_plus", dp),
            ("divergence_residual_minus", dm),
            ("jump_residual", jr),
            ("d_plus", d_plus),
            ("d_minus", d_minus),
            ("m_plus", m_plus),
            ("m_minus", m_minus),
            ("bracket", bracket),
        ]);
        let params = Parameters {
            alpha: Some(a),
            ..Default::default()
        };
        self.finish(kind, value, terms, params, log, v, r.diagnostics)
    }
}

/// `((𝔇- + α𝔪-)² + (𝔇+ + (1-α)𝔪+)²)^{1/2}`.
pub fn bracket(d_plus: f64, d_minus: f64, m_plus: f64, m_minus: f64, alpha: f64) -> f64 {
    (d_minus + alpha * m_minus).hypot(d_plus + (1.0 - alpha) * m_plus)
}

fn finite(what: &str, p: &Point, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Evaluation {
            what: what.into(),
            x1: p.x,
            x2: p.y,
            value: v,
        })
    }
}

fn terms<const N: usize>(items: [(&str, f64); N]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
