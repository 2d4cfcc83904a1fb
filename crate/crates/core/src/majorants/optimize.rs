use crate::error::Result;
use crate::fields::{SharedField, SharedFlux, SharedMultiplier};

use super::{Betas, ConstantLog, Estimator, MajorantReport};

/// Minimizer over `[0, 1]` of the bracket
/// `(𝔇- + α𝔪-)² + (𝔇+ + (1-α)𝔪+)²`. Returns 0 when both `𝔪` vanish.
pub fn optimal_alpha(d_plus: f64, d_minus: f64, m_plus: f64, m_minus: f64) -> f64 {
    let den = m_plus * m_plus + m_minus * m_minus;
    if den == 0.0 {
        return 0.0;
    }
    ((m_plus * m_plus + d_plus * m_plus - d_minus * m_minus) / den).clamp(0.0, 1.0)
}

/// Objective for [`Estimator::optimize_betas`].
#[derive(Debug, Clone)]
pub enum BetaObjective {
    /// `(𝔐1 + 𝔐2)^{1/2}` with a fixed multiplier.
    M12(SharedMultiplier),
    M4,
}

/// Outcome of a bounded golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search on `[lo, hi]` with exactly `evaluations` calls
/// (at least 4), both end points included. Returns the best point seen.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, evaluations: usize) -> Result<LineSearch>
where
    F: FnMut(f64) -> Result<f64>,
{
    let evaluations = evaluations.max(4);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = LineSearch { x: lo, value: f(lo)?, evaluations: 1 };
    let consider = |x: f64, v: f64, best: &mut LineSearch| {
        best.evaluations += 1;
        if v < best.value {
            best.x = x;
            best.value = v;
        }
    };
    let vhi = f(hi)?;
    consider(hi, vhi, &mut best);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    consider(c, fc, &mut best);
    let mut fd = f(d)?;
    consider(d, fd, &mut best);
    while best.evaluations < evaluations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            consider(d, fd, &mut best);
        }
    }
    Ok(best)
}

const LOG_RANGE: (f64, f64) = (-4.0, 4.0);
const SWEEPS: usize = 3;
const LINE_EVALUATIONS: usize = 60;

impl Estimator {
    /// Alternating golden-section searches over `log10 β ∈ [-4, 4]`, starting
    /// from `β1 = β2 = 1`; the result is never worse than the start.
    pub fn optimize_betas(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        objective: &BetaObjective,
    ) -> Result<(Betas, MajorantReport)> {
        let lambda = match objective {
            BetaObjective::M12(l) => Some(l),
            BetaObjective::M4 => None,
        };
        let r = self.residuals(v, q, lambda)?;
        let eval = |b: Betas| -> Result<f64> {
            let mut log = ConstantLog::default();
            Ok(match objective {
                BetaObjective::M12(_) => self.m12_from(&r, b, &mut log)?.0,
                BetaObjective::M4 => self.m4_from(&r, b, &mut log)?.0,
            })
        };
        let best = self.search_betas(Betas::ONE, eval)?;
        let report = match objective {
            BetaObjective::M12(_) => self.report_m12(v, &r, best)?,
            BetaObjective::M4 => self.report_m4(v, &r, best)?,
        };
        Ok((best, report))
    }

    pub(crate) fn search_betas<F>(&self, start: Betas, eval: F) -> Result<Betas>
    where
        F: Fn(Betas) -> Result<f64>,
    {
        let mut best = start;
        let mut best_value = eval(start)?;
        for _ in 0..SWEEPS {
            for coord in 0..2 {
                let at = |t: f64| {
                    let b = 10f64.powf(t);
                    match coord {
                        0 => Betas { beta1: b, ..best },
                        _ => Betas { beta2: b, ..best },
                    }
                };
                let ls = golden_section(|t| eval(at(t)), LOG_RANGE.0, LOG_RANGE.1, LINE_EVALUATIONS)?;
                if ls.value < best_value {
                    best_value = ls.value;
                    best = at(ls.x);
                }
            }
        }
        Ok(best)
    }
}
