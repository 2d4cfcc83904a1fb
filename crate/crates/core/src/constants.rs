//! Friedrichs, trace, Poincaré and sloshing constants with provenance.
//!
//! Only two families have closed forms here: the Friedrichs constant of the
//! example triangles and the Payne–Weinberger bound for convex pieces. Every
//! other constant has to be supplied, together with a source string.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Domain2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    PayneWeinberger,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: Provenance,
    pub source: String,
}

impl Constant {
    pub fn user(value: f64, source: impl Into<String>) -> Self {
        Self {
            value,
            provenance: Provenance::UserSupplied,
            source: source.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantId {
    FriedrichsPlus,
    FriedrichsMinus,
    /// One-sided trace candidates; the manifold constant is their minimum.
    TracePlus,
    TraceMinus,
    PoincarePlus,
    PoincareMinus,
    PoincareManifoldPlus,
    PoincareManifoldMinus,
    /// Signorini: Friedrichs constant for functions vanishing off the contact part.
    Friedrichs,
    /// Signorini: trace constant on the contact boundary.
    TraceContact,
    Poincare,
    PoincareContact,
}

impl ConstantId {
    pub const ALL: [ConstantId; 12] = [
        ConstantId::FriedrichsPlus,
        ConstantId::FriedrichsMinus,
        ConstantId::TracePlus,
        ConstantId::TraceMinus,
        ConstantId::PoincarePlus,
        ConstantId::PoincareMinus,
        ConstantId::PoincareManifoldPlus,
        ConstantId::PoincareManifoldMinus,
        ConstantId::Friedrichs,
        ConstantId::TraceContact,
        ConstantId::Poincare,
        ConstantId::PoincareContact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstantId::FriedrichsPlus => "friedrichs_plus",
            ConstantId::FriedrichsMinus => "friedrichs_minus",
            ConstantId::TracePlus => "trace_plus",
            ConstantId::TraceMinus => "trace_minus",
            ConstantId::PoincarePlus => "poincare_plus",
            ConstantId::PoincareMinus => "poincare_minus",
            ConstantId::PoincareManifoldPlus => "poincare_manifold_plus",
            ConstantId::PoincareManifoldMinus => "poincare_manifold_minus",
            ConstantId::Friedrichs => "friedrichs",
            ConstantId::TraceContact => "trace_contact",
            ConstantId::Poincare => "poincare",
            ConstantId::PoincareContact => "poincare_contact",
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConstantId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| invalid(format!("unknown constant `{s}`")))
    }
}

pub type ConstantOverrides = BTreeMap<ConstantId, Constant>;

/// Name used for the derived manifold trace constant in reports.
pub const TRACE_MANIFOLD: &str = "trace_manifold";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstantSet {
    values: BTreeMap<ConstantId, Constant>,
}

impl ConstantSet {
    pub fn get(&self, id: ConstantId) -> Option<&Constant> {
        self.values.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ConstantId, &Constant)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn insert(&mut self, id: ConstantId, c: Constant) -> Result<()> {
        if !(c.value > 0.0 && c.value.is_finite()) {
            return Err(invalid(format!("constant {id} must be positive and finite, got {}", c.value)));
        }
        self.values.insert(id, c);
        Ok(())
    }

    /// Values of the requested constants, or the full list of missing names.
    pub fn require<const N: usize>(&self, ids: [ConstantId; N]) -> Result<[f64; N]> {
        let missing: Vec<String> = ids
            .iter()
            .filter(|id| !self.values.contains_key(id))
            .map(|id| id.name().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteConstants(missing));
        }
        Ok(ids.map(|id| self.values[&id].value))
    }

    /// `min` of the supplied one-sided trace candidates.
    pub fn trace_manifold(&self) -> Option<f64> {
        [ConstantId::TracePlus, ConstantId::TraceMinus]
            .iter()
            .filter_map(|id| self.values.get(id).map(|c| c.value))
            .reduce(f64::min)
    }

    pub fn require_trace_manifold(&self) -> Result<f64> {
        self.trace_manifold().ok_or_else(|| {
            Error::IncompleteConstants(vec![format!(
                "{TRACE_MANIFOLD} (supply trace_plus or trace_minus)"
            )])
        })
    }

    /// Scale every constant by `s` (all constants here have units of length).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|(k, c)| {
                    (*k, Constant { value: c.value * s, ..c.clone() })
                })
                .collect(),
        }
    }
}

/// `C_F = a/π` for the example triangles, from the eigenfunction
/// `sin(π x̃1 / (a√2)) sin(π x̃2 / (a√2))` in coordinates along the legs.
pub fn friedrichs_example_triangle(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("half width a must be positive, got {a}")));
    }
    Ok(a / PI)
}

/// Payne–Weinberger: `C_P ≤ diam/π` on a convex domain.
pub fn payne_weinberger(diameter: f64) -> Result<f64> {
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(invalid(format!("diameter must be positive, got {diameter}")));
    }
    Ok(diameter / PI)
}

/// Closed forms for the two example triangles, then overrides on top.
pub fn assemble_constants(domain: &Domain2D, overrides: &ConstantOverrides) -> Result<ConstantSet> {
    let a = domain.half_width;
    let mut set = ConstantSet::default();
    let cf = friedrichs_example_triangle(a)?;
    let cp = payne_weinberger(domain.subdomain_diameter())?;
    for id in [ConstantId::FriedrichsPlus, ConstantId::FriedrichsMinus] {
        set.insert(
            id,
            Constant {
                value: cf,
                provenance: Provenance::ClosedForm,
                source: "a/π, first Dirichlet eigenvalue of the right isosceles triangle".into(),
            },
        )?;
    }
    for id in [ConstantId::PoincarePlus, ConstantId::PoincareMinus] {
        set.insert(
            id,
            Constant {
                value: cp,
                provenance: Provenance::PayneWeinberger,
                source: "diam/π with diam = 2a (convex triangle)".into(),
            },
        )?;
    }
    for (id, c) in overrides {
        set.insert(*id, Constant { provenance: Provenance::UserSupplied, ..c.clone() })?;
    }
    Ok(set)
}

/// Signorini problems on a convex polygon: Payne–Weinberger for `C_P`,
/// everything else from overrides.
pub fn assemble_signorini_constants(diameter: f64, overrides: &ConstantOverrides) -> Result<ConstantSet> {
    let mut set = ConstantSet::default();
    set.insert(
        ConstantId::Poincare,
        Constant {
            value: payne_weinberger(diameter)?,
            provenance: Provenance::PayneWeinberger,
            source: "diam/π (convex polygon)".into(),
        },
    )?;
    for (id, c) in overrides {
        set.insert(*id, Constant { provenance: Provenance::UserSupplied, ..c.clone() })?;
    }
    Ok(set)
}

/// Upper bound `√a` for the trace constant of either example triangle, for
/// functions vanishing on its two legs: along each vertical fibre of height
/// `h ≤ a`, `w(x1, 0)² ≤ h ∫ |∂2 w|²`.
pub fn trace_fiber_bound(a: f64) -> Constant {
    Constant::user(
        a.sqrt(),
        "√a: Cauchy–Schwarz along vertical fibres of height ≤ a (functions vanishing on the legs)",
    )
}

/// Upper bound for the zero-mean-on-M Poincaré (sloshing) constant of either
/// example triangle. Integrating `div(w² (x - x0))` with `x0` the apex kills
/// the leg terms and leaves `a ∫_M w² ≤ 2‖w‖² + 2R‖w‖‖∇w‖` with `R = a√2`;
/// subtracting the volume mean and using Payne–Weinberger for it gives
/// `C ≤ √((2/a)(C_P² + R C_P))`.
pub fn sloshing_trace_identity_bound(a: f64) -> Constant {
    let cp = 2.0 * a / PI;
    let r = a * 2f64.sqrt();
    Constant::user(
        ((2.0 / a) * (cp * cp + r * cp)).sqrt(),
        "√((2/a)(C_P² + a√2 C_P)), trace identity about the apex with C_P = 2a/π",
    )
}
