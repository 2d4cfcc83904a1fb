//! Scalar approximations, fluxes and multipliers, with the trace, jump and
//! divergence accessors the majorants need.

mod poly;

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain2D, Point, Side, Vector};
use crate::quadrature::IntegrandFeatures;

pub use poly::Poly2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Polynomial,
    AnalyticSingular,
    Piecewise,
}

/// A function on `Ω`. `side` selects the one-sided limit on `M`; values must
/// agree there, gradients need not.
pub trait ScalarField: Debug + Send + Sync {
    fn value(&self, p: &Point, side: Side) -> f64;
    fn gradient(&self, p: &Point, side: Side) -> Vector;
    /// `None` when the field carries no second-derivative information.
    fn laplacian(&self, p: &Point, side: Side) -> Option<f64>;
    fn smoothness(&self) -> Smoothness;
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures::none()
    }
}

/// A vector field in `H(Ω±, div)`.
pub trait FluxField: Debug + Send + Sync {
    fn value(&self, p: &Point, side: Side) -> Vector;
    fn divergence(&self, p: &Point, side: Side) -> f64;
    /// `[q·n] = q⁺·n⁺ + q⁻·n⁻` at `(x1, 0)` with `n⁺ = (0, -1)`.
    fn normal_jump(&self, x1: f64) -> f64 {
        let p = Point::new(x1, 0.0);
        let plus = self.value(&p, Side::Plus).dot(&Side::Plus.manifold_normal());
        let minus = self.value(&p, Side::Minus).dot(&Side::Minus.manifold_normal());
        plus + minus
    }
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures::none()
    }
}

/// A function on `M`, expected to be nonnegative.
pub trait MultiplierField: Debug + Send + Sync {
    fn value(&self, x1: f64) -> f64;
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures::none()
    }
}

pub type SharedField = Arc<dyn ScalarField>;
pub type SharedFlux = Arc<dyn FluxField>;
pub type SharedMultiplier = Arc<dyn MultiplierField>;

/// A polynomial used on both subdomains.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    poly: Poly2,
    grad: [Poly2; 2],
    lap: Poly2,
}

impl Polynomial {
    pub fn new(poly: Poly2) -> Self {
        let grad = [poly.dx(), poly.dy()];
        let lap = poly.laplacian();
        Self { poly, grad, lap }
    }

    pub fn poly(&self) -> &Poly2 {
        &self.poly
    }
}

impl ScalarField for Polynomial {
    fn value(&self, p: &Point, _: Side) -> f64 {
        self.poly.eval(p)
    }
    fn gradient(&self, p: &Point, _: Side) -> Vector {
        Vector::new(self.grad[0].eval(p), self.grad[1].eval(p))
    }
    fn laplacian(&self, p: &Point, _: Side) -> Option<f64> {
        Some(self.lap.eval(p))
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Polynomial
    }
}

/// One piece of a [`PiecewisePolynomial`]: active on `side` (or both) for
/// `lo < x1 ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPiece {
    pub side: Option<Side>,
    pub lo: f64,
    pub hi: f64,
    pub poly: Polynomial,
}

/// Polynomials chosen per side and per `x1` interval. Points matching no
/// piece evaluate to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    pieces: Vec<PolyPiece>,
}

impl PiecewisePolynomial {
    pub fn new(pieces: Vec<PolyPiece>) -> Self {
        Self { pieces }
    }

    pub fn per_side(plus: Poly2, minus: Poly2) -> Self {
        let piece = |side, poly| PolyPiece {
            side: Some(side),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            poly: Polynomial::new(poly),
        };
        Self::new(vec![piece(Side::Plus, plus), piece(Side::Minus, minus)])
    }

    fn piece(&self, p: &Point, side: Side) -> Option<&Polynomial> {
        self.pieces
            .iter()
            .find(|pc| pc.side.is_none_or(|s| s == side) && p.x > pc.lo && p.x <= pc.hi)
            .or_else(|| {
                // closed at the far left so x1 = lo of the leftmost piece is covered
                self.pieces
                    .iter()
                    .find(|pc| pc.side.is_none_or(|s| s == side) && p.x == pc.lo)
            })
            .map(|pc| &pc.poly)
    }
}

impl ScalarField for PiecewisePolynomial {
    fn value(&self, p: &Point, side: Side) -> f64 {
        self.piece(p, side).map_or(0.0, |q| q.value(p, side))
    }
    fn gradient(&self, p: &Point, side: Side) -> Vector {
        self.piece(p, side).map_or(Vector::zeros(), |q| q.gradient(p, side))
    }
    fn laplacian(&self, p: &Point, side: Side) -> Option<f64> {
        Some(self.piece(p, side).map_or(0.0, |q| q.lap.eval(p)))
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Piecewise
    }
    fn features(&self) -> IntegrandFeatures {
        let mut breaks: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|pc| [pc.lo, pc.hi])
            .filter(|x| x.is_finite())
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        IntegrandFeatures {
            x1_breaks: breaks,
            singular_points: Vec::new(),
        }
    }
}

/// `Σ c_k f_k`.
#[derive(Debug, Clone)]
pub struct Superposition {
    terms: Vec<(f64, SharedField)>,
}

impl Superposition {
    pub fn new(terms: Vec<(f64, SharedField)>) -> Self {
        Self { terms }
    }

    pub fn sum(a: SharedField, b: SharedField) -> Self {
        Self::new(vec![(1.0, a), (1.0, b)])
    }
}

impl ScalarField for Superposition {
    fn value(&self, p: &Point, side: Side) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(p, side)).sum()
    }
    fn gradient(&self, p: &Point, side: Side) -> Vector {
        self.terms
            .iter()
            .fold(Vector::zeros(), |acc, (c, f)| acc + f.gradient(p, side) * *c)
    }
    fn laplacian(&self, p: &Point, side: Side) -> Option<f64> {
        self.terms
            .iter()
            .map(|(c, f)| f.laplacian(p, side).map(|l| c * l))
            .sum()
    }
    fn smoothness(&self) -> Smoothness {
        let tags: Vec<_> = self.terms.iter().map(|(_, f)| f.smoothness()).collect();
        if tags.iter().all(|&t| t == Smoothness::Polynomial) {
            Smoothness::Polynomial
        } else if tags.contains(&Smoothness::Piecewise) {
            Smoothness::Piecewise
        } else {
            Smoothness::AnalyticSingular
        }
    }
    fn features(&self) -> IntegrandFeatures {
        self.terms
            .iter()
            .fold(IntegrandFeatures::none(), |acc, (_, f)| acc.merge(&f.features()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroField;

impl ScalarField for ZeroField {
    fn value(&self, _: &Point, _: Side) -> f64 {
        0.0
    }
    fn gradient(&self, _: &Point, _: Side) -> Vector {
        Vector::zeros()
    }
    fn laplacian(&self, _: &Point, _: Side) -> Option<f64> {
        Some(0.0)
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Polynomial
    }
}

type ValueFn = dyn Fn(&Point, Side) -> f64 + Send + Sync;
type GradFn = dyn Fn(&Point, Side) -> Vector + Send + Sync;

/// A field given by closures, without second derivatives.
pub struct FnField {
    label: String,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
}

impl FnField {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(&Point, Side) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Point, Side) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }
}

impl Debug for FnField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FnField({})", self.label)
    }
}

impl ScalarField for FnField {
    fn value(&self, p: &Point, side: Side) -> f64 {
        (self.value)(p, side)
    }
    fn gradient(&self, p: &Point, side: Side) -> Vector {
        (self.gradient)(p, side)
    }
    fn laplacian(&self, _: &Point, _: Side) -> Option<f64> {
        None
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Piecewise
    }
}

/// `q = ∇v`, `div q = Δv`.
#[derive(Debug, Clone)]
pub struct GradientFlux {
    field: SharedField,
}

impl GradientFlux {
    pub fn field(&self) -> &SharedField {
        &self.field
    }
}

impl FluxField for GradientFlux {
    fn value(&self, p: &Point, side: Side) -> Vector {
        self.field.gradient(p, side)
    }
    fn divergence(&self, p: &Point, side: Side) -> f64 {
        self.field.laplacian(p, side).unwrap_or(f64::NAN)
    }
    fn features(&self) -> IntegrandFeatures {
        self.field.features()
    }
}

pub fn flux_from_gradient(v: SharedField) -> Result<SharedFlux> {
    let probe = Point::new(0.123, 0.217);
    for side in Side::BOTH {
        let p = match side {
            Side::Plus => probe,
            Side::Minus => Point::new(probe.x, -probe.y),
        };
        if v.laplacian(&p, side).is_none() {
            return Err(Error::UnsupportedRepresentation(format!(
                "{v:?} has no Laplacian, so ∇v has no computable divergence"
            )));
        }
    }
    Ok(Arc::new(GradientFlux { field: v }))
}

/// Polynomial vector field per subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFlux {
    plus: [Poly2; 2],
    minus: [Poly2; 2],
    div: [Poly2; 2],
}

impl PolynomialFlux {
    pub fn new(plus: [Poly2; 2], minus: [Poly2; 2]) -> Self {
        let div = [
            plus[0].dx() + plus[1].dy(),
            minus[0].dx() + minus[1].dy(),
        ];
        Self { plus, minus, div }
    }

    pub fn zero() -> Self {
        Self::new(Default::default(), Default::default())
    }

    pub fn components(&self, side: Side) -> &[Poly2; 2] {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

impl FluxField for PolynomialFlux {
    fn value(&self, p: &Point, side: Side) -> Vector {
        let c = self.components(side);
        Vector::new(c[0].eval(p), c[1].eval(p))
    }
    fn divergence(&self, p: &Point, side: Side) -> f64 {
        match side {
            Side::Plus => self.div[0].eval(p),
            Side::Minus => self.div[1].eval(p),
        }
    }
}

/// `Σ c_k q_k`.
#[derive(Debug, Clone)]
pub struct FluxSum {
    terms: Vec<(f64, SharedFlux)>,
}

impl FluxSum {
    pub fn new(terms: Vec<(f64, SharedFlux)>) -> Self {
        Self { terms }
    }
}

impl FluxField for FluxSum {
    fn value(&self, p: &Point, side: Side) -> Vector {
        self.terms
            .iter()
            .fold(Vector::zeros(), |acc, (c, q)| acc + q.value(p, side) * *c)
    }
    fn divergence(&self, p: &Point, side: Side) -> f64 {
        self.terms.iter().map(|(c, q)| c * q.divergence(p, side)).sum()
    }
    fn normal_jump(&self, x1: f64) -> f64 {
        self.terms.iter().map(|(c, q)| c * q.normal_jump(x1)).sum()
    }
    fn features(&self) -> IntegrandFeatures {
        self.terms
            .iter()
            .fold(IntegrandFeatures::none(), |acc, (_, q)| acc.merge(&q.features()))
    }
}

/// `λ = max([q·n], 0)`.
#[derive(Debug, Clone)]
pub struct ClippedJump {
    flux: SharedFlux,
}

impl MultiplierField for ClippedJump {
    fn value(&self, x1: f64) -> f64 {
        self.flux.normal_jump(x1).max(0.0)
    }
    fn features(&self) -> IntegrandFeatures {
        self.flux.features()
    }
}

pub fn multiplier_from_jump(q: SharedFlux) -> SharedMultiplier {
    Arc::new(ClippedJump { flux: q })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroMultiplier;

impl MultiplierField for ZeroMultiplier {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
}

/// `λ(x1) = Σ c_k x1^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialMultiplier {
    pub coefficients: Vec<f64>,
}

impl MultiplierField for PolynomialMultiplier {
    fn value(&self, x1: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x1 + c)
    }
}

/// Piecewise linear interpolation of `(x1, λ)` samples, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMultiplier {
    nodes: Vec<(f64, f64)>,
}

impl TableMultiplier {
    pub fn new(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("multiplier table is empty".into()));
        }
        if nodes.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter("multiplier table has non-finite entries".into()));
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("multiplier table repeats an x1 value".into()));
        }
        Ok(Self { nodes })
    }
}

impl MultiplierField for TableMultiplier {
    fn value(&self, x1: f64) -> f64 {
        let n = &self.nodes;
        if x1 <= n[0].0 {
            return n[0].1;
        }
        if x1 >= n[n.len() - 1].0 {
            return n[n.len() - 1].1;
        }
        let k = n.partition_point(|(x, _)| *x <= x1);
        let ((x0, y0), (x1n, y1)) = (n[k - 1], n[k]);
        y0 + (y1 - y0) * (x1 - x0) / (x1n - x0)
    }
    fn features(&self) -> IntegrandFeatures {
        IntegrandFeatures {
            x1_breaks: self.nodes.iter().map(|n| n.0).collect(),
            singular_points: Vec::new(),
        }
    }
}

/// `Σ c_k λ_k`.
#[derive(Debug, Clone)]
pub struct MultiplierSum {
    terms: Vec<(f64, SharedMultiplier)>,
}

impl MultiplierSum {
    pub fn new(terms: Vec<(f64, SharedMultiplier)>) -> Self {
        Self { terms }
    }
}

impl MultiplierField for MultiplierSum {
    fn value(&self, x1: f64) -> f64 {
        self.terms.iter().map(|(c, l)| c * l.value(x1)).sum()
    }
    fn features(&self) -> IntegrandFeatures {
        self.terms
            .iter()
            .fold(IntegrandFeatures::none(), |acc, (_, l)| acc.merge(&l.features()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub min_gap_on_manifold: f64,
    pub max_boundary_mismatch: f64,
    pub admissible: bool,
    pub tol: f64,
}

impl AdmissibilityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.admissible {
            Ok(self)
        } else {
            Err(Error::Inadmissible {
                min_gap: self.min_gap_on_manifold,
                boundary_mismatch: self.max_boundary_mismatch,
            })
        }
    }
}

const MANIFOLD_PROBES: usize = 2049;
const BOUNDARY_PROBES: usize = 1025;

/// Dense sampling check of `v ≥ ψ` on `M` and `v = φ` on `∂Ω`.
pub fn check_admissible(
    v: &dyn ScalarField,
    domain: &Domain2D,
    psi: &dyn ScalarField,
    phi: &dyn ScalarField,
    tol: f64,
) -> AdmissibilityReport {
    let a = domain.half_width;
    let mut min_gap = f64::INFINITY;
    for k in 0..MANIFOLD_PROBES {
        let x = -a + 2.0 * a * k as f64 / (MANIFOLD_PROBES - 1) as f64;
        let p = Point::new(x, 0.0);
        for side in Side::BOTH {
            let g = v.value(&p, side) - psi.value(&p, side);
            min_gap = min_gap.min(if g.is_nan() { f64::NEG_INFINITY } else { g });
        }
    }
    let mut mismatch: f64 = 0.0;
    for side in Side::BOTH {
        for piece in domain.boundary_of(side) {
            for k in 0..BOUNDARY_PROBES {
                let p = piece.point_at(k as f64 / (BOUNDARY_PROBES - 1) as f64);
                let d = (v.value(&p, side) - phi.value(&p, side)).abs();
                mismatch = mismatch.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    AdmissibilityReport {
        min_gap_on_manifold: min_gap,
        max_boundary_mismatch: mismatch,
        admissible: min_gap >= -tol && mismatch <= tol,
        tol,
    }
}
