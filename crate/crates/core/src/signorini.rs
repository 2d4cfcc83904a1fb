//! Majorants for the scalar Signorini problem, where the obstacle acts on a
//! part `M` of the boundary and the jump becomes the one-sided flux `q·n`.
//!
//! Fields reuse the interior traits with every point tagged [`Side::Plus`].

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{Constant, ConstantId, ConstantSet};
use crate::error::{invalid, Error, Result};
use crate::fields::{AdmissibilityReport, Poly2, Polynomial, SharedField, SharedFlux, SharedMultiplier, Superposition};
use crate::geometry::{Element, Point, Side, Triangle, Vector};
use crate::majorants::{MajorantKind, MajorantReport, Parameters, QuadDiagnostics, MEAN_TOL, QUADRATURE_SLACK, ZERO_RESIDUAL};
use crate::paperbench::ExactSolution;
use crate::quadrature::{element_nodes, integrate_elements, pairwise_sum, segment_nodes, GaussRule, IntegrandFeatures, QuadConfig};

/// Convex polygon with some edges marked as contact boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignoriniDomain {
    /// Counter-clockwise.
    pub vertices: Vec<[f64; 2]>,
    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub contact_edges: Vec<usize>,
}

impl SignoriniDomain {
    pub fn new(vertices: Vec<[f64; 2]>, contact_edges: Vec<usize>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(invalid("polygon needs at least three vertices"));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(invalid("polygon has non-finite coordinates"));
        }
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross <= 0.0 {
                return Err(invalid("polygon must be convex and counter-clockwise"));
            }
        }
        if contact_edges.is_empty() {
            return Err(invalid("contact boundary is empty"));
        }
        if let Some(e) = contact_edges.iter().find(|&&e| e >= n) {
            return Err(invalid(format!("contact edge {e} does not exist (polygon has {n} edges)")));
        }
        let mut contact_edges = contact_edges;
        contact_edges.sort_unstable();
        contact_edges.dedup();
        if contact_edges.len() == n {
            return Err(invalid("the whole boundary is contact; a Dirichlet part is required"));
        }
        Ok(Self { vertices, contact_edges })
    }

    pub fn unit_square_bottom_contact() -> Self {
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![0]).expect("valid square")
    }

    fn vertex(&self, i: usize) -> Point {
        let v = self.vertices[i % self.vertices.len()];
        Point::new(v[0], v[1])
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn outward_normal(&self, i: usize) -> Vector {
        let (a, b) = self.edge(i);
        let t = (b - a).normalize();
        Vector::new(t.y, -t.x)
    }

    pub fn is_contact(&self, i: usize) -> bool {
        self.contact_edges.contains(&i)
    }

    pub fn dirichlet_edges(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|i| !self.is_contact(*i)).collect()
    }

    pub fn contact_length(&self) -> f64 {
        self.contact_edges.iter().map(|&i| {
            let (a, b) = self.edge(i);
            (b - a).norm()
        }).sum()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.vertices.len();
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                d = d.max((self.vertex(i) - self.vertex(j)).norm());
            }
        }
        d
    }

    /// Fan triangulation from vertex 0, red-refined `level` times.
    pub fn mesh(&self, level: u32) -> Vec<Element> {
        let mut tris: Vec<Triangle> = (1..self.vertices.len() - 1)
            .map(|i| Triangle::new(self.vertex(0), self.vertex(i), self.vertex(i + 1)))
            .collect();
        for _ in 0..level {
            tris = tris.iter().flat_map(|t| t.red_refine()).collect();
        }
        tris.into_iter().map(|triangle| Element { triangle, side: Side::Plus }).collect()
    }
}

/// A nonnegative function on the contact boundary; receives the outward normal.
pub trait ContactMultiplier: Debug + Send + Sync {
    fn value(&self, p: &Point, normal: &Vector) -> f64;
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures::none()
    }
}

pub type SharedContactMultiplier = Arc<dyn ContactMultiplier>;

/// `λ = max(q·n, 0)`.
#[derive(Debug, Clone)]
pub struct ClippedNormalFlux(pub SharedFlux);

impl ContactMultiplier for ClippedNormalFlux {
    fn value(&self, p: &Point, n: &Vector) -> f64 {
        self.0.value(p, Side::Plus).dot(n).max(0.0)
    }
    fn features(&self) -> IntegrandFeatures {
        self.0.features()
    }
}

/// A multiplier given as a function of `x1`.
#[derive(Debug, Clone)]
pub struct ByAbscissa(pub SharedMultiplier);

impl ContactMultiplier for ByAbscissa {
    fn value(&self, p: &Point, _: &Vector) -> f64 {
        self.0.value(p.x)
    }
    fn features(&self) -> IntegrandFeatures {
        self.0.features()
    }
}

#[derive(Debug, Clone)]
pub struct SignoriniProblem {
    pub domain: SignoriniDomain,
    pub psi: SharedField,
    pub phi: SharedField,
}

#[derive(Debug, Clone)]
struct ContactNode {
    point: Point,
    normal: Vector,
    weight: f64,
}

#[derive(Debug, Clone)]
struct SResiduals {
    misfit_sq: f64,
    div_sq: f64,
    div_mean: f64,
    pairing: f64,
    flux_residual_sq: f64,
    flux_mean: f64,
    diagnostics: QuadDiagnostics,
}

#[derive(Debug, Clone)]
pub struct SignoriniEstimator {
    pub problem: SignoriniProblem,
    pub constants: ConstantSet,
    pub quad: QuadConfig,
    pub admissibility_tol: f64,
    pub oracle: Option<SharedField>,
}

const CONTACT_PROBES: usize = 2049;
const BOUNDARY_PROBES: usize = 1025;

impl SignoriniEstimator {
    pub fn new(problem: SignoriniProblem, constants: ConstantSet, quad: QuadConfig) -> Self {
        Self { problem, constants, quad, admissibility_tol: 1e-10, oracle: None }
    }

    pub fn with_oracle(mut self, u: SharedField) -> Self {
        self.oracle = Some(u);
        self
    }

    fn elements(&self) -> Vec<Element> {
        self.problem.domain.mesh(self.quad.level)
    }

    pub fn energy_error(&self, v: &SharedField, u: &SharedField) -> Result<f64> {
        let feats = v.features().merge(&u.features());
        let r = integrate_elements(
            |p, s| (v.gradient(p, s) - u.gradient(p, s)).norm_squared(),
            &self.elements(),
            &feats,
            &self.quad,
        )?;
        Ok(r.value.max(0.0).sqrt())
    }

    /// Dense-sampling check of `v ≥ ψ` on `M` and `v = φ` elsewhere on `∂Ω`.
    pub fn check_admissible(&self, v: &SharedField) -> AdmissibilityReport {
        let d = &self.problem.domain;
        let (psi, phi) = (&self.problem.psi, &self.problem.phi);
        let mut min_gap = f64::INFINITY;
        let mut mismatch: f64 = 0.0;
        for i in 0..d.vertices.len() {
            let (a, b) = d.edge(i);
            let probes = if d.is_contact(i) { CONTACT_PROBES } else { BOUNDARY_PROBES };
            for k in 0..probes {
                let p = a + (b - a) * (k as f64 / (probes - 1) as f64);
                if d.is_contact(i) {
                    let g = v.value(&p, Side::Plus) - psi.value(&p, Side::Plus);
                    min_gap = min_gap.min(if g.is_nan() { f64::NEG_INFINITY } else { g });
                } else {
                    let m = (v.value(&p, Side::Plus) - phi.value(&p, Side::Plus)).abs();
                    mismatch = mismatch.max(if m.is_nan() { f64::INFINITY } else { m });
                }
            }
        }
        let tol = self.admissibility_tol;
        AdmissibilityReport {
            min_gap_on_manifold: min_gap,
            max_boundary_mismatch: mismatch,
            admissible: min_gap >= -tol && mismatch <= tol,
            tol,
        }
    }

    fn contact_nodes(&self, feats: &IntegrandFeatures) -> Vec<ContactNode> {
        let d = &self.problem.domain;
        let g = GaussRule::new(self.quad.segment_nodes);
        let pieces = 1usize << self.quad.level;
        let cuts: Vec<f64> = (1..pieces).map(|k| k as f64 / pieces as f64).collect();
        let mut out = Vec::new();
        for &i in &d.contact_edges {
            let (a, b) = d.edge(i);
            let len2 = (b - a).norm_squared();
            let frac = |p: &Point| (p - a).dot(&(b - a)) / len2;
            let on_edge = |p: &Point| {
                let t = frac(p);
                let foot = a + (b - a) * t;
                (-1e-14..=1.0 + 1e-14).contains(&t) && (p - foot).norm() <= 1e-13 * len2.sqrt()
            };
            let singular: Vec<f64> = feats.singular_points.iter().filter(|p| on_edge(p)).map(|p| frac(p).clamp(0.0, 1.0)).collect();
            let mut edge_cuts = cuts.clone();
            if (b - a).x != 0.0 {
                edge_cuts.extend(feats.x1_breaks.iter().map(|x| (x - a.x) / (b - a).x));
            }
            let normal = d.outward_normal(i);
            for (p, w) in segment_nodes(a, b, &edge_cuts, &singular, g.len()) {
                out.push(ContactNode { point: p, normal, weight: w });
            }
        }
        out
    }

    fn residuals(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedContactMultiplier,
    ) -> Result<SResiduals> {
        self.check_admissible(v).into_result()?;
        let psi = &self.problem.psi;
        let feats = v.features().merge(&q.features()).merge(&psi.features()).merge(&lambda.features());
        let els = self.elements();
        let misfit = integrate_elements(
            |p, s| (v.gradient(p, s) - q.value(p, s)).norm_squared(),
            &els,
            &feats,
            &self.quad,
        )?;
        let div_sq = integrate_elements(|p, s| q.divergence(p, s).powi(2), &els, &feats, &self.quad)?;
        let div_mean = integrate_elements(|p, s| q.divergence(p, s), &els, &feats, &self.quad)?;
        let nodes = self.contact_nodes(&feats);
        let mut pairing = Vec::with_capacity(nodes.len());
        let mut res = Vec::with_capacity(nodes.len());
        let mut mean = Vec::with_capacity(nodes.len());
        for n in &nodes {
            let p = n.point;
            let l = lambda.value(&p, &n.normal);
            let qn = q.value(&p, Side::Plus).dot(&n.normal);
            let g = v.value(&p, Side::Plus) - psi.value(&p, Side::Plus);
            for (what, x) in [("λ", l), ("q·n", qn), ("v - ψ", g)] {
                if !x.is_finite() {
                    return Err(Error::Evaluation { what: what.into(), x1: p.x, x2: p.y, value: x });
                }
            }
            if l < 0.0 {
                return Err(Error::NegativeMultiplier { x1: p.x, value: l });
            }
            pairing.push(n.weight * l * g);
            res.push(n.weight * (l - qn).powi(2));
            mean.push(n.weight * (l - qn));
        }
        Ok(SResiduals {
            misfit_sq: misfit.value.max(0.0),
            div_sq: div_sq.value.max(0.0),
            div_mean: div_mean.value,
            pairing: pairwise_sum(&pairing).max(0.0),
            flux_residual_sq: pairwise_sum(&res).max(0.0),
            flux_mean: pairwise_sum(&mean),
            diagnostics: QuadDiagnostics {
                elements: els.len(),
                max_grading_depth: misfit.max_depth.max(div_sq.max_depth),
                manifold_nodes: nodes.len(),
            },
        })
    }

    fn weighted(&self, id: ConstantId, r: f64, used: &mut BTreeMap<String, Constant>) -> Result<f64> {
        if r <= ZERO_RESIDUAL {
            return Ok(0.0);
        }
        let [c] = self.constants.require([id])?;
        used.insert(id.name().into(), self.constants.get(id).expect("required above").clone());
        Ok(c * r)
    }

    fn build(
        &self,
        kind: MajorantKind,
        v: &SharedField,
        r: &SResiduals,
        ids: [ConstantId; 2],
    ) -> Result<MajorantReport> {
        let mut used = BTreeMap::new();
        let f = r.misfit_sq.sqrt();
        let d = r.div_sq.sqrt();
        let j = r.flux_residual_sq.sqrt();
        let wd = self.weighted(ids[0], d, &mut used)?;
        let wj = self.weighted(ids[1], j, &mut used)?;
        let value = f + (2.0 * r.pairing).sqrt() + wd + wj;
        let terms: BTreeMap<String, f64> = [
            ("flux_misfit", f),
            ("manifold_pairing", r.pairing),
            ("divergence_residual", d),
            ("normal_flux_residual", j),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let exact_error = match &self.oracle {
            Some(u) => Some(self.energy_error(v, u)?),
            None => None,
        };
        Ok(MajorantReport {
            kind,
            symbol: kind.symbol().into(),
            value,
            terms,
            parameters: Parameters::default(),
            constants_used: used,
            exact_error,
            efficiency_index: exact_error.filter(|e| *e > 0.0).map(|e| value / e),
            quadrature_slack: QUADRATURE_SLACK,
            diagnostics: r.diagnostics,
        })
    }

    /// `‖∇v - q‖ + √2(∫_M λ(v - ψ))^{1/2} + C_F‖div q‖ + C_Tr‖λ - q·n‖_M`.
    pub fn majorant_signorini(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedContactMultiplier,
    ) -> Result<MajorantReport> {
        let r = self.residuals(v, q, lambda)?;
        self.build(MajorantKind::Signorini, v, &r, [ConstantId::Friedrichs, ConstantId::TraceContact])
    }

    /// Same shape with Poincaré constants; needs `∫div q = 0` and `∫_M (λ - q·n) = 0`.
    pub fn majorant_signorini_poincare(
        &self,
        v: &SharedField,
        q: &SharedFlux,
        lambda: &SharedContactMultiplier,
    ) -> Result<MajorantReport> {
        let r = self.residuals(v, q, lambda)?;
        if r.div_mean.abs() > MEAN_TOL || r.flux_mean.abs() > MEAN_TOL {
            return Err(Error::ConditionViolation {
                mean_div_plus: r.div_mean,
                mean_div_minus: 0.0,
                mean_jump: r.flux_mean,
            });
        }
        self.build(
            MajorantKind::SignoriniPoincare,
            v,
            &r,
            [ConstantId::Poincare, ConstantId::PoincareContact],
        )
    }

    /// Quadrature nodes over the region, for callers assembling their own sums.
    pub fn area_nodes(&self, feats: &IntegrandFeatures, grading_depth: u32) -> Vec<(Point, f64)> {
        element_nodes(&self.elements(), feats, &self.quad, grading_depth)
            .into_iter()
            .map(|n| (n.point, n.weight))
            .collect()
    }
}

/// Position of the free-boundary point in the unit-square test case.
pub const DESK_CONTACT_POINT: f64 = 0.5;

/// `Re((x1 - 1/2 + i x2)^{3/2})`: harmonic, zero with `∂u/∂n ≥ 0` on the
/// left half of the bottom edge, positive with zero flux on the right half.
pub fn desk_exact() -> ExactSolution {
    ExactSolution { shift: DESK_CONTACT_POINT }
}

/// `u_S + t x1 (1 - x1)(1 - x2)`, admissible for `t ≥ 0`.
pub fn desk_bubble(t: f64) -> Superposition {
    let bubble = Poly2::from_terms([(1, 0, 1.0), (2, 0, -1.0)]) * Poly2::linear(1.0, 0.0, -1.0);
    Superposition::new(vec![
        (1.0, Arc::new(desk_exact())),
        (t, Arc::new(Polynomial::new(bubble))),
    ])
}

/// Sharp constants of the unit square with contact on the bottom edge:
/// `C_F = 2/(√5 π)` (mode `sin πx1 cos(πx2/2)`), trace `1/√(π coth π)`
/// (mode `sin πx1 sinh π(1-x2)`), sloshing `1/√(π tanh π)` (mode
/// `cos πx1 cosh π(1-x2)`).
pub fn desk_constants() -> Vec<(ConstantId, Constant)> {
    let pi = std::f64::consts::PI;
    vec![
        (ConstantId::Friedrichs, Constant::user(2.0 / (5f64.sqrt() * pi), "first mixed Dirichlet–Neumann eigenvalue 5π²/4 of the unit square")),
        (ConstantId::TraceContact, Constant::user(1.0 / (pi / pi.tanh()).sqrt(), "Steklov mode sin(πx1) sinh(π(1-x2)), ratio π coth π")),
        (ConstantId::PoincareContact, Constant::user(1.0 / (pi * pi.tanh()).sqrt(), "sloshing mode cos(πx1) cosh(π(1-x2)), ratio π tanh π")),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_validation() {
        assert!(SignoriniDomain::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![0]).is_err());
        // clockwise
        assert!(SignoriniDomain::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![0]).is_err());
        assert!(SignoriniDomain::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![]).is_err());
        assert!(SignoriniDomain::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![5]).is_err());
        assert!(SignoriniDomain::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![0, 1, 2]).is_err());
        let sq = SignoriniDomain::unit_square_bottom_contact();
        assert_eq!(sq.contact_length(), 1.0);
        assert_eq!(sq.outward_normal(0), Vector::new(0.0, -1.0));
        assert_eq!(sq.dirichlet_edges(), vec![1, 2, 3]);
        let area: f64 = sq.mesh(3).iter().map(|e| e.triangle.area()).sum();
        assert!((area - 1.0).abs() < 1e-14);
    }

    #[test]
    fn desk_solution_complementarity() {
        let u = desk_exact();
        for x in [0.0, 0.2, 0.49] {
            assert_eq!(u.eval(&Point::new(x, 0.0)), 0.0);
            assert!(u.jump(x) / 2.0 > 0.0);
        }
        for x in [0.51, 0.9] {
            assert!(u.eval(&Point::new(x, 0.0)) > 0.0);
            assert_eq!(u.jump(x), 0.0);
        }
    }
}
