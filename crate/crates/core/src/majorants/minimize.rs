//! Iterative reduction of `𝔐4` over `(λ, β, q)`.
//!
//! The flux step minimizes a quadratic surrogate that touches `𝔐4²` at the
//! current flux: the divergence square `(A + B)²` is bounded by
//! `(1+γ)A² + (1+1/γ)B²` with `γ = B/A`, and the multiplier-free manifold
//! term by its value at the current `λ̄`. Steps are accepted only if the
//! re-evaluated `𝔐4` does not grow.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::constants::ConstantId;
use crate::error::{invalid, Error, Result};
use crate::fields::{FluxSum, Poly2, PolynomialFlux, SharedField, SharedFlux, SharedMultiplier};
use crate::geometry::Side;
use crate::quadrature::{domain_nodes, manifold_nodes};

use super::{BetaObjective, Betas, ConstantLog, Estimator, MajorantReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizeOptions {
    pub iterations: usize,
    /// Total degree of the per-side polynomial flux correction.
    pub degree: u32,
    /// Fixed grading depth of the nodes used to assemble the surrogate.
    pub grading_depth: u32,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            iterations: 10,
            degree: 2,
            grading_depth: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub value: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub flux_step_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct Minimization {
    pub flux: SharedFlux,
    pub multiplier: SharedMultiplier,
    pub betas: Betas,
    pub report: MajorantReport,
    /// Entry 0 is the starting value (after the first `β` search).
    pub history: Vec<IterationRecord>,
}

/// Monomials `(x1/a)^i (x2/a)^j`, `i + j ≤ degree`, per side and component.
struct Basis {
    exps: Vec<(u32, u32)>,
    a: f64,
}

impl Basis {
    fn new(degree: u32, a: f64) -> Self {
        let mut exps = Vec::new();
        for n in 0..=degree {
            for j in 0..=n {
                exps.push((n - j, j));
            }
        }
        Self { exps, a }
    }

    /// Unknowns are ordered side, then component, then monomial.
    fn len(&self) -> usize {
        4 * self.exps.len()
    }

    fn index(&self, side: Side, comp: usize, k: usize) -> usize {
        let s = match side {
            Side::Plus => 0,
            Side::Minus => 1,
        };
        (2 * s + comp) * self.exps.len() + k
    }

    fn mono(&self, k: usize, x: f64, y: f64) -> f64 {
        let (i, j) = self.exps[k];
        (x / self.a).powi(i as i32) * (y / self.a).powi(j as i32)
    }

    fn d_mono(&self, k: usize, x: f64, y: f64, wrt: usize) -> f64 {
        let (i, j) = self.exps[k];
        let (s, t) = (x / self.a, y / self.a);
        match wrt {
            0 if i > 0 => i as f64 * s.powi(i as i32 - 1) * t.powi(j as i32) / self.a,
            1 if j > 0 => j as f64 * s.powi(i as i32) * t.powi(j as i32 - 1) / self.a,
            _ => 0.0,
        }
    }

    fn flux(&self, c: &DVector<f64>) -> PolynomialFlux {
        let comp = |side, comp| {
            Poly2::from_terms(self.exps.iter().enumerate().map(|(k, &(i, j))| {
                (i, j, c[self.index(side, comp, k)] / self.a.powi((i + j) as i32))
            }))
        };
        PolynomialFlux::new(
            [comp(Side::Plus, 0), comp(Side::Plus, 1)],
            [comp(Side::Minus, 0), comp(Side::Minus, 1)],
        )
    }
}

impl Estimator {
    /// Alternate `λ̄`, `β` and a least-squares flux update; the recorded
    /// `𝔐4` values never increase.
    pub fn minimize(
        &self,
        v: &SharedField,
        q0: &SharedFlux,
        opts: &MinimizeOptions,
    ) -> Result<Minimization> {
        if opts.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        let [cfp, cfm] = self
            .constants
            .require([ConstantId::FriedrichsPlus, ConstantId::FriedrichsMinus])?;
        let ctr = self.constants.require_trace_manifold()?;
        let basis = Basis::new(opts.degree, self.domain().half_width);
        let feats = v
            .features()
            .merge(&q0.features())
            .merge(&self.problem.psi.features());
        let area = domain_nodes(self.domain(), &feats, &self.quad, opts.grading_depth);
        let line = manifold_nodes(self.domain(), &feats, &self.quad);

        let m4_value = |q: &SharedFlux, b: Betas| -> Result<f64> {
            let r = self.residuals(v, q, None)?;
            let mut log = ConstantLog::default();
            Ok(self.m4_from(&r, b, &mut log)?.0)
        };

        let mut q: SharedFlux = q0.clone();
        let (mut betas, start) = self.optimize_betas(v, &q, &BetaObjective::M4)?;
        let mut value = start.value;
        let mut history = vec![IterationRecord {
            iteration: 0,
            value,
            beta1: betas.beta1,
            beta2: betas.beta2,
            flux_step_accepted: false,
        }];

        for it in 1..=opts.iterations {
            // (b) β for the current flux, never worse than the current β
            let (b, rep) = self.optimize_betas(v, &q, &BetaObjective::M4)?;
            if rep.value <= value {
                betas = b;
                value = rep.value;
            }
            // (a) multiplier for the current flux and β
            let lambda = self.optimal_lambda(v, &q, betas)?;

            // (c) flux step
            let r = self.residuals(v, &q, None)?;
            let a_plus = cfp * r.div_sq[0].sqrt();
            let a_minus = cfm * r.div_sq[1].sqrt();
            let gamma = if a_plus == 0.0 && a_minus == 0.0 {
                1.0
            } else if a_plus == 0.0 {
                1e6
            } else {
                (a_minus / a_plus).clamp(1e-6, 1e6)
            };
            let kappa = (1.0 + 1.0 / betas.beta1) * (1.0 + betas.beta2);
            let w_misfit = 1.0 + betas.beta1;
            let w_div = [kappa * (1.0 + gamma) * cfp * cfp, kappa * (1.0 + 1.0 / gamma) * cfm * cfm];
            let w_jump = ctr * ctr / betas.c_beta();

            let n = basis.len();
            let mut mat = DMatrix::<f64>::zeros(n, n);
            let mut rhs = DVector::<f64>::zeros(n);
            let nb = basis.exps.len();
            for node in &area {
                let p = node.point;
                let side = node.side;
                let target = v.gradient(&p, side) - q0.value(&p, side);
                let div0 = q0.divergence(&p, side);
                let mono: Vec<f64> = (0..nb).map(|k| basis.mono(k, p.x, p.y)).collect();
                let dx: Vec<f64> = (0..nb).map(|k| basis.d_mono(k, p.x, p.y, 0)).collect();
                let dy: Vec<f64> = (0..nb).map(|k| basis.d_mono(k, p.x, p.y, 1)).collect();
                let wm = w_misfit * node.weight;
                for comp in 0..2 {
                    for k in 0..nb {
                        let ik = basis.index(side, comp, k);
                        rhs[ik] += wm * mono[k] * target[comp];
                        for l in 0..nb {
                            let il = basis.index(side, comp, l);
                            mat[(ik, il)] += wm * mono[k] * mono[l];
                        }
                    }
                }
                let wd = w_div[if side == Side::Plus { 0 } else { 1 }] * node.weight;
                let dvec: Vec<(usize, f64)> = (0..nb)
                    .map(|k| (basis.index(side, 0, k), dx[k]))
                    .chain((0..nb).map(|k| (basis.index(side, 1, k), dy[k])))
                    .collect();
                for &(ik, dk) in &dvec {
                    rhs[ik] -= wd * dk * div0;
                    for &(il, dl) in &dvec {
                        mat[(ik, il)] += wd * dk * dl;
                    }
                }
            }
            for node in &line {
                let x = node.x1;
                let target = lambda.value(x) - q0.normal_jump(x);
                // [φ·n] = -φ⁺_y + φ⁻_y
                let jvec: Vec<(usize, f64)> = (0..nb)
                    .map(|k| (basis.index(Side::Plus, 1, k), -basis.mono(k, x, 0.0)))
                    .chain((0..nb).map(|k| (basis.index(Side::Minus, 1, k), basis.mono(k, x, 0.0))))
                    .collect();
                let wj = w_jump * node.weight;
                for &(ik, jk) in &jvec {
                    rhs[ik] += wj * jk * target;
                    for &(il, jl) in &jvec {
                        mat[(ik, il)] += wj * jk * jl;
                    }
                }
            }
            let ridge = 1e-13 * mat.trace() / n as f64 + f64::MIN_POSITIVE;
            for i in 0..n {
                mat[(i, i)] += ridge;
            }
            let mut accepted = false;
            if let Some(chol) = mat.cholesky() {
                let cand = chol.solve(&rhs);
                if cand.iter().all(|c| c.is_finite()) {
                    let q_new: SharedFlux = Arc::new(FluxSum::new(vec![
                        (1.0, q0.clone()),
                        (1.0, Arc::new(basis.flux(&cand))),
                    ]));
                    let new_value = m4_value(&q_new, betas)?;
                    if new_value <= value {
                        q = q_new;
                        value = new_value;
                        accepted = true;
                    }
                }
            }
            let prev = history.last().map(|h| h.value).unwrap_or(f64::INFINITY);
            if value > prev {
                return Err(Error::InternalDefect(format!(
                    "majorant increased from {prev} to {value} at iteration {it}"
                )));
            }
            history.push(IterationRecord {
                iteration: it,
                value,
                beta1: betas.beta1,
                beta2: betas.beta2,
                flux_step_accepted: accepted,
            });
        }
        let r = self.residuals(v, &q, None)?;
        let report = self.report_m4(v, &r, betas)?;
        let multiplier = self.optimal_lambda(v, &q, betas)?;
        Ok(Minimization {
            flux: q,
            multiplier,
            betas,
            report,
            history,
        })
    }
}
