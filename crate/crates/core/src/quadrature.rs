//! Triangle and segment quadrature, plus whole-domain integration that clips
//! elements at kink lines and grades toward point singularities.
//!
//! Element contributions are computed in parallel but always summed in mesh
//! order with a pairwise tree, so results do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{triangulate, Domain2D, Element, ManifoldEdge, Point, Side, Triangle};

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] to [0, 1]
            points[i] = 0.5 * (1.0 - x);
            points[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.len() - 1
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)` built as a collapsed
/// Gauss product. Points are `(ξ, η)`; weights sum to 1/2 and are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub polynomial_exactness: usize,
    /// Gauss points per direction.
    pub order: usize,
}

impl TriangleRule {
    pub fn with_degree(degree: usize) -> Self {
        // the collapse Jacobian (1 - s) adds one degree in s
        let n = (degree + 2).div_ceil(2).max(1);
        let g = GaussRule::new(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (s, ws) in g.points.iter().zip(&g.weights) {
            for (t, wt) in g.points.iter().zip(&g.weights) {
                points.push([*s, t * (1.0 - s)]);
                weights.push(ws * wt * (1.0 - s));
            }
        }
        Self {
            points,
            weights,
            polynomial_exactness: degree,
            order: n,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentWeight {
    None,
    /// The integrand carries a `√(-x1)` factor; the segment must lie in `x1 ≤ 0`.
    SqrtNegativeX1,
}

/// Where an integrand loses smoothness. Kinks across vertical lines are
/// handled by clipping; point singularities by splitting and grading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntegrandFeatures {
    pub x1_breaks: Vec<f64>,
    pub singular_points: Vec<Point>,
}

impl IntegrandFeatures {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn singular_at_origin() -> Self {
        Self {
            x1_breaks: Vec::new(),
            singular_points: vec![Point::origin()],
        }
    }

    pub fn merge(mut self, other: &IntegrandFeatures) -> Self {
        for &b in &other.x1_breaks {
            if !self.x1_breaks.contains(&b) {
                self.x1_breaks.push(b);
            }
        }
        for p in &other.singular_points {
            if !self.singular_points.iter().any(|q| q == p) {
                self.singular_points.push(*p);
            }
        }
        self.x1_breaks.sort_by(f64::total_cmp);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadConfig {
    pub triangle_degree: usize,
    pub segment_nodes: usize,
    pub level: u32,
    pub graded: bool,
    pub grading_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            triangle_degree: 12,
            segment_nodes: 16,
            level: 2,
            graded: true,
            grading_tol: 1e-12,
            max_depth: 40,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_nodes == 0 {
            return Err(invalid("segment_nodes must be at least 1"));
        }
        if self.level > 10 {
            return Err(invalid(format!("refinement level {} is too large", self.level)));
        }
        if self.grading_tol.is_nan() || self.grading_tol < 0.0 {
            return Err(invalid("grading_tol must be nonnegative"));
        }
        Ok(())
    }
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

fn check(v: f64, p: &Point) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            what: "integrand".into(),
            x1: p.x,
            x2: p.y,
            value: v,
        })
    }
}

pub fn integrate_triangle<F>(f: F, tri: &Triangle, rule: &TriangleRule) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let jac = 2.0 * tri.area();
    let mut acc = 0.0;
    for (q, w) in rule.points.iter().zip(&rule.weights) {
        let p = tri.map(q[0], q[1]);
        acc += w * check(f(&p), &p)?;
    }
    Ok(acc * jac)
}

/// `∫ f dx1` over a piece of `M`. With [`SegmentWeight::SqrtNegativeX1`] the
/// substitution `x1 = -t²` is used, so `f` (which includes the weight) is
/// integrated as a smooth function of `t`.
pub fn integrate_segment<F>(
    f: F,
    segment: &ManifoldEdge,
    domain: &Domain2D,
    rule: &GaussRule,
    weight: SegmentWeight,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let a = domain.half_width;
    let tol = 1e-14 * a;
    let (x0, x1) = (segment.x_start, segment.x_end);
    if !(x0 >= -a - tol && x1 <= a + tol && x0 <= x1) {
        return Err(invalid(format!("segment [{x0}, {x1}] is not inside M = [-{a}, {a}]")));
    }
    let mut acc = 0.0;
    match weight {
        SegmentWeight::None => {
            for (s, w) in rule.points.iter().zip(&rule.weights) {
                let x = x0 + (x1 - x0) * s;
                acc += w * check(f(x), &Point::new(x, 0.0))?;
            }
            Ok(acc * (x1 - x0))
        }
        SegmentWeight::SqrtNegativeX1 => {
            if x1 > tol {
                return Err(invalid(format!(
                    "sqrt_negative_x1 weight needs x1 ≤ 0, segment ends at {x1}"
                )));
            }
            let t0 = (-x1).max(0.0).sqrt();
            let t1 = (-x0).sqrt();
            for (s, w) in rule.points.iter().zip(&rule.weights) {
                let t = t0 + (t1 - t0) * s;
                let x = -t * t;
                acc += w * check(f(x), &Point::new(x, 0.0))? * 2.0 * t;
            }
            Ok(acc * (t1 - t0))
        }
    }
}

/// One node of a precomputed rule on `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineNode {
    pub x1: f64,
    pub weight: f64,
}

/// Quadrature nodes covering `M`: mesh edges are split at breaks and at
/// singular points; pieces ending at a singular point use the clustering map
/// `x = q - (q - p) s²`, which turns `√|x - q|` and `|x - q|^{3/2}` behaviour
/// into polynomials in `s`.
pub fn manifold_nodes(
    domain: &Domain2D,
    features: &IntegrandFeatures,
    config: &QuadConfig,
) -> Vec<LineNode> {
    let a = domain.half_width;
    let mesh_edges = 1usize << config.level;
    let h = 2.0 * a / mesh_edges as f64;
    let mut cuts: Vec<f64> = (0..=mesh_edges).map(|i| -a + h * i as f64).collect();
    cuts[mesh_edges] = a;
    let singular: Vec<f64> = features
        .singular_points
        .iter()
        .filter(|p| p.y == 0.0 && p.x.abs() <= a)
        .map(|p| p.x)
        .collect();
    cuts.extend(features.x1_breaks.iter().copied().filter(|x| x.abs() < a));
    cuts.extend(singular.iter().copied());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * a);

    let g = GaussRule::new(config.segment_nodes);
    let is_sing = |x: f64| singular.iter().any(|s| (s - x).abs() <= 1e-14 * a);
    let mut nodes = Vec::new();
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mut pieces = vec![(p, q)];
        if is_sing(p) && is_sing(q) {
            let m = 0.5 * (p + q);
            pieces = vec![(p, m), (m, q)];
        }
        for (p, q) in pieces {
            let len = q - p;
            for (s, ws) in g.points.iter().zip(&g.weights) {
                let (x, wt) = if is_sing(q) {
                    (q - len * s * s, 2.0 * len * s)
                } else if is_sing(p) {
                    (p + len * s * s, 2.0 * len * s)
                } else {
                    (p + len * s, len)
                };
                nodes.push(LineNode {
                    x1: x,
                    weight: ws * wt,
                });
            }
        }
    }
    nodes
}

/// Integrate over `M` with [`manifold_nodes`].
pub fn integrate_manifold<F>(
    f: F,
    domain: &Domain2D,
    features: &IntegrandFeatures,
    config: &QuadConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let nodes = manifold_nodes(domain, features, config);
    let vals = nodes
        .iter()
        .map(|n| Ok(n.weight * check(f(n.x1), &Point::new(n.x1, 0.0))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainIntegral {
    pub value: f64,
    /// Number of mesh elements visited.
    pub elements: usize,
    /// Deepest grading level reached near a singular point.
    pub max_depth: u32,
}

fn clip_polygon(poly: &[Point], b: f64, keep_left: bool) -> Vec<Point> {
    let inside = |p: &Point| if keep_left { p.x <= b } else { p.x >= b };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let t = (b - prev.x) / (cur.x - prev.x);
            out.push(Point::new(b, prev.y + t * (cur.y - prev.y)));
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

fn polygon_area(poly: &[Point]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s.abs()
}

/// Split a triangle along vertical break lines into triangles lying on one
/// side of every break.
fn clip_at_breaks(tri: &Triangle, breaks: &[f64]) -> Vec<Triangle> {
    let scale = tri.diameter();
    let min_area = 1e-28 * scale * scale;
    let mut polys = vec![tri.vertices.to_vec()];
    for &b in breaks {
        let mut next = Vec::with_capacity(polys.len() + 1);
        for poly in polys {
            let lo = poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let hi = poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let eps = 1e-14 * scale;
            if b <= lo + eps || b >= hi - eps {
                next.push(poly);
                continue;
            }
            for keep_left in [true, false] {
                let part = clip_polygon(&poly, b, keep_left);
                if part.len() >= 3 && polygon_area(&part) > min_area {
                    next.push(part);
                }
            }
        }
        polys = next;
    }
    let mut out = Vec::new();
    for poly in polys {
        for i in 1..poly.len() - 1 {
            let t = Triangle::new(poly[0], poly[i], poly[i + 1]);
            if t.area() > min_area {
                out.push(t);
            }
        }
    }
    out
}

/// A triangle ready for integration; `singular` means vertex 0 is singular.
#[derive(Debug, Clone, Copy)]
struct Piece {
    tri: Triangle,
    singular: bool,
}

fn barycentric(tri: &Triangle, p: &Point) -> [f64; 3] {
    let [a, b, c] = tri.vertices;
    let det = (b - a).x * (c - a).y - (b - a).y * (c - a).x;
    let l1 = ((p - a).x * (c - a).y - (p - a).y * (c - a).x) / det;
    let l2 = ((b - a).x * (p - a).y - (b - a).y * (p - a).x) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn split_at_singular(tri: Triangle, singular: &[Point], out: &mut Vec<Piece>, guard: u32) {
    let tol = 1e-12;
    let scale = tri.diameter();
    let mut vertex_hits = Vec::new();
    for p in singular {
        if let Some(k) = tri.vertices.iter().position(|v| (v - p).norm() <= 1e-14 * scale) {
            vertex_hits.push(k);
            continue;
        }
        let l = barycentric(&tri, p);
        if l.iter().any(|&x| x < -tol) {
            continue;
        }
        // edge or interior point: split so that p becomes a vertex
        let [a, b, c] = tri.vertices;
        let children: Vec<Triangle> = match l.iter().position(|&x| x.abs() <= tol) {
            Some(0) => vec![Triangle::new(a, b, *p), Triangle::new(a, *p, c)],
            Some(1) => vec![Triangle::new(b, c, *p), Triangle::new(b, *p, a)],
            Some(_) => vec![Triangle::new(c, a, *p), Triangle::new(c, *p, b)],
            None => vec![
                Triangle::new(a, b, *p),
                Triangle::new(b, c, *p),
                Triangle::new(c, a, *p),
            ],
        };
        for ch in children {
            split_at_singular(ch, singular, out, guard + 1);
        }
        return;
    }
    match vertex_hits.len() {
        0 => out.push(Piece { tri, singular: false }),
        1 => {
            let k = vertex_hits[0];
            let v = tri.vertices;
            out.push(Piece {
                tri: Triangle::new(v[k], v[(k + 1) % 3], v[(k + 2) % 3]),
                singular: true,
            });
        }
        _ if guard < 8 => {
            for ch in tri.red_refine() {
                split_at_singular(ch, singular, out, guard + 1);
            }
        }
        _ => out.push(Piece { tri, singular: false }),
    }
}

fn element_pieces(tri: &Triangle, features: &IntegrandFeatures) -> Vec<Piece> {
    let mut out = Vec::new();
    for t in clip_at_breaks(tri, &features.x1_breaks) {
        split_at_singular(t, &features.singular_points, &mut out, 0);
    }
    if features.singular_points.is_empty() {
        return out;
    }
    let mut done = Vec::with_capacity(out.len());
    for p in out {
        if p.singular {
            done.push(p);
        } else {
            refine_near(p.tri, &features.singular_points, &mut done, 0);
        }
    }
    done
}

const NEAR_RATIO: f64 = 2.0;
const NEAR_DEPTH: u32 = 16;

/// Red-refine pieces that sit closer to a singular point than `NEAR_RATIO`
/// times their diameter, so the plain rule sees a smooth integrand.
fn refine_near(tri: Triangle, singular: &[Point], out: &mut Vec<Piece>, depth: u32) {
    let dist = singular
        .iter()
        .map(|p| triangle_distance(&tri, p))
        .fold(f64::INFINITY, f64::min);
    if depth >= NEAR_DEPTH || dist >= NEAR_RATIO * tri.diameter() {
        out.push(Piece { tri, singular: false });
        return;
    }
    for c in tri.red_refine() {
        refine_near(c, singular, out, depth + 1);
    }
}

fn triangle_distance(tri: &Triangle, p: &Point) -> f64 {
    let v = tri.vertices;
    (0..3)
        .map(|k| {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            (a + (b - a) * t - p).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Nodes of the band `s ∈ [s0, s1]` in collapsed coordinates centred at
/// vertex 0: `x = v0 + s((v1 - v0) + t(v2 - v1))`, Jacobian `2|T| s`.
const ANGULAR_RATIO: f64 = 4.0;

fn band_nodes(tri: &Triangle, s0: f64, s1: f64, g: &GaussRule) -> Vec<(Point, f64)> {
    let [a, b, c] = tri.vertices;
    // the integrand is analytic in t only within about dist(a, bc) of the
    // segment, so the opposite edge is cut into short angular sectors
    let len = (c - b).norm();
    let dist = 2.0 * tri.area() / len;
    let sectors = (ANGULAR_RATIO * len / dist).ceil().max(1.0) as usize;
    let jac = 2.0 * tri.area() * (s1 - s0) / sectors as f64;
    let mut out = Vec::with_capacity(sectors * g.len() * g.len());
    for k in 0..sectors {
        for (sr, ws) in g.points.iter().zip(&g.weights) {
            let s = s0 + (s1 - s0) * sr;
            for (t, wt) in g.points.iter().zip(&g.weights) {
                let t = (k as f64 + t) / sectors as f64;
                out.push((a + ((b - a) + (c - b) * t) * s, jac * s * ws * wt));
            }
        }
    }
    out
}

fn band<F>(f: &F, tri: &Triangle, s0: f64, s1: f64, g: &GaussRule) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let mut acc = Vec::with_capacity(g.len() * g.len());
    for (p, w) in band_nodes(tri, s0, s1, g) {
        let v = f(&p);
        if !v.is_finite() {
            return Err(Error::Evaluation { what: "integrand".into(), x1: p.x, x2: p.y, value: v });
        }
        acc.push(w * v);
    }
    Ok(pairwise_sum(&acc))
}

/// Geometric bands `[2^-(k+1), 2^-k]` toward vertex 0, added until a band
/// falls below `grading_tol` relative to the running total.
fn graded<F>(f: &F, tri: &Triangle, rule: &TriangleRule, cfg: &QuadConfig) -> Result<(f64, u32)>
where
    F: Fn(&Point) -> f64,
{
    let g = GaussRule::new(rule.order);
    let mut parts = Vec::new();
    let mut total: f64 = 0.0;
    let mut depth = 0;
    let mut hi = 1.0;
    loop {
        let lo = 0.5 * hi;
        let v = band(f, tri, lo, hi, &g)?;
        parts.push(v);
        total += v;
        depth += 1;
        hi = lo;
        if (depth >= 3 && v.abs() <= cfg.grading_tol * total.abs()) || depth >= cfg.max_depth {
            break;
        }
    }
    parts.push(band(f, tri, 0.0, hi, &g)?);
    // innermost contributions are the smallest; add them first
    parts.reverse();
    Ok((parts.iter().sum(), depth))
}

fn graded_fixed<F>(f: &F, tri: &Triangle, rule: &TriangleRule, depth: u32) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    let g = GaussRule::new(rule.order);
    let mut parts = Vec::new();
    for (lo, hi) in band_edges(depth) {
        parts.push(band(f, tri, lo, hi, &g)?);
    }
    parts.reverse();
    Ok(parts.iter().sum())
}

fn band_edges(depth: u32) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = (0..depth).map(|k| (0.5f64.powi(k as i32 + 1), 0.5f64.powi(k as i32))).collect();
    out.push((0.0, 0.5f64.powi(depth as i32)));
    out
}

fn integrate_element<F>(
    f: &F,
    tri: &Triangle,
    side: Side,
    features: &IntegrandFeatures,
    rule: &TriangleRule,
    cfg: &QuadConfig,
) -> Result<(f64, u32)>
where
    F: Fn(&Point, Side) -> f64 + Sync,
{
    let g = |p: &Point| f(p, side);
    let mut acc = 0.0;
    let mut depth = 0;
    for piece in element_pieces(tri, features) {
        if piece.singular && cfg.graded {
            let (v, d) = graded(&g, &piece.tri, rule, cfg)?;
            acc += v;
            depth = depth.max(d);
        } else {
            acc += integrate_triangle(g, &piece.tri, rule)?;
        }
    }
    Ok((acc, depth))
}

/// Integrate over an explicit element list, in list order.
pub fn integrate_elements<F>(
    f: F,
    elements: &[Element],
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
) -> Result<DomainIntegral>
where
    F: Fn(&Point, Side) -> f64 + Sync,
{
    cfg.validate()?;
    let rule = TriangleRule::with_degree(cfg.triangle_degree);
    let parts = elements
        .par_iter()
        .map(|e| integrate_element(&f, &e.triangle, e.side, features, &rule, cfg))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = parts.iter().map(|p| p.0).collect();
    Ok(DomainIntegral {
        value: pairwise_sum(&values),
        elements: elements.len(),
        max_depth: parts.iter().map(|p| p.1).max().unwrap_or(0),
    })
}

fn integrate_sides<F>(
    f: F,
    domain: &Domain2D,
    sides: &[Side],
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
) -> Result<DomainIntegral>
where
    F: Fn(&Point, Side) -> f64 + Sync,
{
    cfg.validate()?;
    let mesh = triangulate(domain, cfg.level);
    let elements: Vec<Element> = mesh
        .elements
        .into_iter()
        .filter(|e| sides.contains(&e.side))
        .collect();
    integrate_elements(f, &elements, features, cfg)
}

/// `∫_Ω f` over both subdomains; `f` receives the side tag of the element.
pub fn integrate_domain<F>(
    f: F,
    domain: &Domain2D,
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
) -> Result<DomainIntegral>
where
    F: Fn(&Point, Side) -> f64 + Sync,
{
    integrate_sides(f, domain, &Side::BOTH, features, cfg)
}

pub fn integrate_subdomain<F>(
    f: F,
    domain: &Domain2D,
    side: Side,
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
) -> Result<DomainIntegral>
where
    F: Fn(&Point, Side) -> f64 + Sync,
{
    integrate_sides(f, domain, &[side], features, cfg)
}

/// One node of a precomputed rule on `Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaNode {
    pub point: Point,
    pub side: Side,
    pub weight: f64,
}

/// Fixed nodes over `Ω` with non-adaptive grading of the given depth. Used to
/// assemble least-squares systems, where the same nodes must serve many
/// integrands at once.
pub fn domain_nodes(
    domain: &Domain2D,
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
    grading_depth: u32,
) -> Vec<AreaNode> {
    element_nodes(&triangulate(domain, cfg.level).elements, features, cfg, grading_depth)
}

pub fn element_nodes(
    elements: &[Element],
    features: &IntegrandFeatures,
    cfg: &QuadConfig,
    grading_depth: u32,
) -> Vec<AreaNode> {
    let rule = TriangleRule::with_degree(cfg.triangle_degree);
    let mut nodes = Vec::new();
    let push_tri = |t: &Triangle, side: Side, nodes: &mut Vec<AreaNode>| {
        let jac = 2.0 * t.area();
        for (q, w) in rule.points.iter().zip(&rule.weights) {
            nodes.push(AreaNode {
                point: t.map(q[0], q[1]),
                side,
                weight: w * jac,
            });
        }
    };
    for e in elements {
        for piece in element_pieces(&e.triangle, features) {
            if piece.singular && cfg.graded {
                let g = GaussRule::new(rule.order);
                for (lo, hi) in band_edges(grading_depth) {
                    for (point, weight) in band_nodes(&piece.tri, lo, hi, &g) {
                        nodes.push(AreaNode { point, side: e.side, weight });
                    }
                }
            } else {
                push_tri(&piece.tri, e.side, &mut nodes);
            }
        }
    }
    nodes
}

/// Nodes on the straight segment `start → end`, split at `cuts` (given as
/// arc-length fractions in `(0, 1)`) and clustered toward the fractions in
/// `singular`. Weights are in arc length.
pub fn segment_nodes(start: Point, end: Point, cuts: &[f64], singular: &[f64], n: usize) -> Vec<(Point, f64)> {
    let len = (end - start).norm();
    let mut ts: Vec<f64> = vec![0.0, 1.0];
    ts.extend(cuts.iter().chain(singular).copied().filter(|t| *t > 0.0 && *t < 1.0));
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14);
    let g = GaussRule::new(n);
    let is_sing = |t: f64| singular.iter().any(|s| (s - t).abs() <= 1e-14);
    let mut out = Vec::new();
    for w in ts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mut pieces = vec![(p, q)];
        if is_sing(p) && is_sing(q) {
            let m = 0.5 * (p + q);
            pieces = vec![(p, m), (m, q)];
        }
        for (p, q) in pieces {
            let h = q - p;
            for (s, ws) in g.points.iter().zip(&g.weights) {
                let (t, wt) = if is_sing(q) {
                    (q - h * s * s, 2.0 * h * s)
                } else if is_sing(p) {
                    (p + h * s * s, 2.0 * h * s)
                } else {
                    (p + h * s, h)
                };
                out.push((start + (end - start) * t, ws * wt * len));
            }
        }
    }
    out
}

/// Integrate over one triangle with fixed grading at its vertex 0.
pub fn integrate_triangle_graded<F>(
    f: F,
    tri: &Triangle,
    rule: &TriangleRule,
    depth: u32,
) -> Result<f64>
where
    F: Fn(&Point) -> f64,
{
    graded_fixed(&f, tri, rule, depth)
}
