//! The three subcommands. Each returns the report and its CSV rows; writing
//! them is left to the caller.

use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use thinobst_core::constants::assemble_signorini_constants;
use thinobst_core::majorants::{BetaObjective, MinimizeOptions, QUADRATURE_SLACK};
use thinobst_core::paperbench::{reproduce, ExampleName, FluxChoice};
use thinobst_core::signorini::{SignoriniDomain, SignoriniEstimator, SignoriniProblem};
use thinobst_core::{
    assemble_constants, build_domain, Alpha, Betas, Constant, ConstantId, ConstantOverrides, Estimator, M5Mode,
    MajorantKind, MajorantReport, QuadConfig, SharedField, SharedFlux, ThinObstacleProblem,
};

use crate::config::{CaseConfig, Geometry, ProblemType, Tunable};
use crate::registry::Registry;
use crate::report::{ReportFile, Row, Timing, SCHEMA_VERSION};
use crate::CliError;

pub struct Outcome {
    pub report: ReportFile,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceArgs {
    pub example: String,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub flux: String,
    pub quadrature: QuadConfig,
}

fn finish(command: &str, config: Value, results: Value, rows: Vec<Row>, start: Option<Instant>) -> Outcome {
    let timing = start.map(|t| Timing { seconds: t.elapsed().as_secs_f64(), workers: rayon::current_num_threads() });
    Outcome {
        report: ReportFile { schema_version: SCHEMA_VERSION, command: command.into(), config, results, timing },
        rows,
    }
}

fn check_finite(r: &MajorantReport) -> Result<(), CliError> {
    let bad = std::iter::once(("value", r.value)).chain(r.terms.iter().map(|(k, v)| (k.as_str(), *v))).find(|(_, v)| !v.is_finite());
    match bad {
        Some((k, v)) => Err(CliError::Output(format!("{}: non-finite {k} = {v}", r.kind))),
        None => Ok(()),
    }
}

fn report_rows(r: &MajorantReport, rows: &mut Vec<Row>) {
    let s = r.kind.name();
    rows.push(Row::new(s, "value", r.value));
    for (k, v) in &r.terms {
        rows.push(Row::new(s, k.clone(), *v));
    }
    if let Some(e) = r.exact_error {
        rows.push(Row::new(s, "exact_error", e));
    }
    if let Some(e) = r.efficiency_index {
        rows.push(Row::new(s, "efficiency_index", e));
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Output(e.to_string()))
}

pub fn run_reproduce(args: &ReproduceArgs, timing: bool) -> Result<Outcome, CliError> {
    let start = timing.then(Instant::now);
    let name = ExampleName::from_str(&args.example).map_err(|e| CliError::Usage(e.to_string()))?;
    let flux = FluxChoice::from_str(&args.flux).map_err(|e| CliError::Usage(e.to_string()))?;
    args.quadrature.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let r = reproduce(name, args.a, args.eps, &args.quadrature, flux).map_err(|e| match e {
        thinobst_core::Error::InvalidParameter(m) => CliError::Usage(m),
        other => CliError::Core(other),
    })?;
    let mut rows = vec![Row::new("case", "exact_error", r.exact_error)];
    if let Some(c) = r.exact_error_closed_form {
        rows.push(Row::new("case", "exact_error_closed_form", c));
    }
    for rep in &r.reports {
        check_finite(rep)?;
        report_rows(rep, &mut rows);
    }
    if let Some(t) = &r.eps_trend {
        rows.push(Row::new("eps_trend", "eps", t.eps));
        rows.push(Row::new("eps_trend", "eps_pow_three_quarters", t.eps_pow_three_quarters));
        rows.push(Row::new("eps_trend", "excess", t.excess));
        rows.push(Row::new("eps_trend", "excess_over_eps_pow", t.excess_over_eps_pow));
    }
    Ok(finish("reproduce", to_value(args)?, to_value(&r)?, rows, start))
}

fn overrides(cfg: &CaseConfig) -> Result<ConstantOverrides, CliError> {
    cfg.constants
        .iter()
        .map(|(name, c)| {
            let id = ConstantId::from_str(name).map_err(|e| CliError::Config(format!("`constants.{name}`: {e}")))?;
            Ok((id, Constant::user(c.value, c.source.clone())))
        })
        .collect()
}

fn kinds(cfg: &CaseConfig) -> Result<Vec<MajorantKind>, CliError> {
    cfg.majorant_kinds
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let kind = MajorantKind::from_str(k).map_err(|e| CliError::Config(format!("`majorant_kinds[{i}]`: {e}")))?;
            let signorini = matches!(kind, MajorantKind::Signorini | MajorantKind::SignoriniPoincare);
            if signorini != (cfg.problem_type == ProblemType::Signorini) {
                return Err(CliError::Config(format!(
                    "`majorant_kinds[{i}]`: `{k}` does not apply to this problem_type"
                )));
            }
            Ok(kind)
        })
        .collect()
}

struct ThinCase {
    est: Estimator,
    v: SharedField,
    q: SharedFlux,
    registry: Registry,
}

fn thin_case(cfg: &CaseConfig) -> Result<ThinCase, CliError> {
    let Geometry::HalfWidth { a } = cfg.geometry else {
        return Err(CliError::Config("`geometry`: thin_obstacle takes {\"a\": half-width}".into()));
    };
    let registry = Registry { problem: ProblemType::ThinObstacle, a, eps: cfg.eps };
    let domain = build_domain(a).map_err(|e| CliError::Config(format!("`geometry.a`: {e}")))?;
    let psi = registry.field(&cfg.fields.psi, "fields.psi")?;
    let phi = registry.field(&cfg.fields.phi, "fields.phi")?;
    let v = registry.field(&cfg.fields.v, "fields.v")?;
    let u = cfg.fields.u.as_ref().map(|s| registry.field(s, "fields.u")).transpose()?;
    let q = registry.flux(&cfg.flux, &v, u.as_ref(), "flux")?;
    let constants = assemble_constants(&domain, &overrides(cfg)?)?;
    let mut est = Estimator::new(ThinObstacleProblem { domain, psi, phi }, constants, cfg.quadrature);
    if let Some(u) = u {
        est = est.with_oracle(u);
    }
    Ok(ThinCase { est, v, q, registry })
}

fn fixed_betas(cfg: &CaseConfig) -> Option<Betas> {
    match (cfg.parameters.beta1, cfg.parameters.beta2) {
        (Tunable::Value(b1), Tunable::Value(b2)) => Some(Betas { beta1: b1, beta2: b2 }),
        _ => None,
    }
}

fn bound_check(reports: &[MajorantReport]) -> Value {
    let rows: Vec<Value> = reports
        .iter()
        .filter_map(|r| {
            r.exact_error.map(|e| {
                json!({
                    "kind": r.kind.name(),
                    "value": r.value,
                    "exact_error": e,
                    "slack": QUADRATURE_SLACK,
                    "holds": r.value >= e - QUADRATURE_SLACK,
                })
            })
        })
        .collect();
    Value::Array(rows)
}

pub fn run_certify(cfg: &CaseConfig, timing: bool) -> Result<Outcome, CliError> {
    let start = timing.then(Instant::now);
    let kinds = kinds(cfg)?;
    let reports = match cfg.problem_type {
        ProblemType::ThinObstacle => certify_thin(cfg, &kinds)?,
        ProblemType::Signorini => certify_signorini(cfg, &kinds)?,
    };
    let mut rows = Vec::new();
    for r in &reports {
        check_finite(r)?;
        report_rows(r, &mut rows);
    }
    let results = json!({
        "majorants": to_value(&reports)?,
        "guaranteed_bound": bound_check(&reports),
    });
    Ok(finish("certify", to_value(cfg)?, results, rows, start))
}

fn certify_thin(cfg: &CaseConfig, kinds: &[MajorantKind]) -> Result<Vec<MajorantReport>, CliError> {
    let ThinCase { est, v, q, registry } = thin_case(cfg)?;
    let lam = registry.multiplier(&cfg.lambda, &q, "lambda")?;
    let alpha = match cfg.parameters.alpha {
        Tunable::Value(a) => Alpha::Fixed(a),
        Tunable::Keyword(_) => Alpha::Optimal,
    };
    let mut out = Vec::with_capacity(kinds.len());
    for &k in kinds {
        let r = match k {
            MajorantKind::Basic => est.majorant_basic(&v, &q, &lam)?,
            MajorantKind::M => est.majorant_m(&v, &q, &lam)?,
            MajorantKind::M12 => match fixed_betas(cfg) {
                Some(b) => est.majorant_m12(&v, &q, &lam, b)?,
                None => est.optimize_betas(&v, &q, &BetaObjective::M12(lam.clone()))?.1,
            },
            MajorantKind::M4 => match fixed_betas(cfg) {
                Some(b) => est.majorant_m4(&v, &q, b)?,
                None => est.optimize_betas(&v, &q, &BetaObjective::M4)?.1,
            },
            MajorantKind::M5 => est.majorant_m5(&v, &q, &lam, alpha, M5Mode::Full)?,
            MajorantKind::M5Partial => est.majorant_m5(&v, &q, &lam, alpha, M5Mode::Partial)?,
            MajorantKind::Signorini | MajorantKind::SignoriniPoincare => unreachable!("filtered by kinds()"),
        };
        out.push(r);
    }
    Ok(out)
}

fn certify_signorini(cfg: &CaseConfig, kinds: &[MajorantKind]) -> Result<Vec<MajorantReport>, CliError> {
    let Geometry::Polygon { polygon, contact_edges } = &cfg.geometry else {
        return Err(CliError::Config("`geometry`: signorini takes a polygon".into()));
    };
    let domain = SignoriniDomain::new(polygon.clone(), contact_edges.clone())
        .map_err(|e| CliError::Config(format!("`geometry`: {e}")))?;
    let registry = Registry { problem: ProblemType::Signorini, a: 1.0, eps: cfg.eps };
    let psi = registry.field(&cfg.fields.psi, "fields.psi")?;
    let phi = registry.field(&cfg.fields.phi, "fields.phi")?;
    let v = registry.field(&cfg.fields.v, "fields.v")?;
    let u = cfg.fields.u.as_ref().map(|s| registry.field(s, "fields.u")).transpose()?;
    let q = registry.flux(&cfg.flux, &v, u.as_ref(), "flux")?;
    let lam = registry.contact_multiplier(&cfg.lambda, &q, "lambda")?;
    let constants = assemble_signorini_constants(domain.diameter(), &overrides(cfg)?)?;
    let mut est = SignoriniEstimator::new(SignoriniProblem { domain, psi, phi }, constants, cfg.quadrature);
    if let Some(u) = u {
        est = est.with_oracle(u);
    }
    kinds
        .iter()
        .map(|k| match k {
            MajorantKind::Signorini => Ok(est.majorant_signorini(&v, &q, &lam)?),
            _ => Ok(est.majorant_signorini_poincare(&v, &q, &lam)?),
        })
        .collect()
}

pub fn run_minimize(cfg: &CaseConfig, opts: &MinimizeOptions, timing: bool) -> Result<Outcome, CliError> {
    let start = timing.then(Instant::now);
    if cfg.problem_type != ProblemType::ThinObstacle {
        return Err(CliError::Config("`problem_type`: minimize supports thin_obstacle only".into()));
    }
    if opts.iterations == 0 {
        return Err(CliError::Usage("--iterations must be at least 1".into()));
    }
    let ThinCase { est, v, q, .. } = thin_case(cfg)?;
    let m = est.minimize(&v, &q, opts)?;
    check_finite(&m.report)?;
    let mut rows: Vec<Row> = m.history.iter().map(|h| Row::new("iteration", h.iteration.to_string(), h.value)).collect();
    report_rows(&m.report, &mut rows);
    let results = json!({
        "history": to_value(&m.history)?,
        "final": to_value(&m.report)?,
        "betas": to_value(&m.betas)?,
        "options": to_value(opts)?,
    });
    Ok(finish("minimize", to_value(cfg)?, results, rows, start))
}
