//! The square `|x1| + |x2| ≤ a` split by the flat manifold `M = [-a, a] × {0}`.

use serde::Serialize;

use crate::error::{invalid, Result};

pub type Point = nalgebra::Point2<f64>;
pub type Vector = nalgebra::Vector2<f64>;

/// Which subdomain a point or element belongs to. On `M` itself the tag picks
/// the one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    /// Side of a point strictly off the manifold; points on `M` go to `Plus`.
    pub fn of(p: &Point) -> Side {
        if p.y < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    /// Outward unit normal of this subdomain on `M`.
    pub fn manifold_normal(self) -> Vector {
        match self {
            Side::Plus => Vector::new(0.0, -1.0),
            Side::Minus => Vector::new(0.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Point; 3],
}

impl Triangle {
    pub fn new(a: Point, b: Point, c: Point) -> Self {
        Self {
            vertices: [a, b, c],
        }
    }

    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.vertices;
        Point::from((a.coords + b.coords + c.coords) / 3.0)
    }

    pub fn map(&self, xi: f64, eta: f64) -> Point {
        let [a, b, c] = self.vertices;
        a + (b - a) * xi + (c - a) * eta
    }

    /// Red refinement into four congruent children. Corner children keep
    /// vertex `k` in slot 0, the middle child comes last.
    pub fn red_refine(&self) -> [Triangle; 4] {
        let [a, b, c] = self.vertices;
        let ab = nalgebra::center(&a, &b);
        let bc = nalgebra::center(&b, &c);
        let ca = nalgebra::center(&c, &a);
        [
            Triangle::new(a, ab, ca),
            Triangle::new(b, bc, ab),
            Triangle::new(c, ca, bc),
            Triangle::new(ab, bc, ca),
        ]
    }

    pub fn diameter(&self) -> f64 {
        let [a, b, c] = self.vertices;
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }
}

/// A straight piece of the Dirichlet boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPiece {
    pub start: [f64; 2],
    pub end: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Coefficients `(c1, c2, c0)` of the line `c1 x1 + c2 x2 + c0 = 0`.
    pub equation: [f64; 3],
}

impl BoundaryPiece {
    pub fn point_at(&self, t: f64) -> Point {
        Point::new(
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        )
    }

    pub fn length(&self) -> f64 {
        (self.end[0] - self.start[0]).hypot(self.end[1] - self.start[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain2D {
    pub half_width: f64,
    pub subdomain_plus: [[f64; 2]; 3],
    pub subdomain_minus: [[f64; 2]; 3],
    /// End points of `M`.
    pub manifold: [[f64; 2]; 2],
    /// Pieces (i)-(iv): `x1+x2=a`, `-x1+x2=a`, `-x1-x2=a`, `x1-x2=a`.
    pub boundary_pieces: [BoundaryPiece; 4],
}

impl Domain2D {
    pub fn a(&self) -> f64 {
        self.half_width
    }

    pub fn manifold_length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn subdomain(&self, side: Side) -> Triangle {
        let v = match side {
            Side::Plus => self.subdomain_plus,
            Side::Minus => self.subdomain_minus,
        };
        Triangle::new(
            Point::new(v[0][0], v[0][1]),
            Point::new(v[1][0], v[1][1]),
            Point::new(v[2][0], v[2][1]),
        )
    }

    pub fn subdomain_diameter(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Pieces bounding one subdomain.
    pub fn boundary_of(&self, side: Side) -> [BoundaryPiece; 2] {
        match side {
            Side::Plus => [self.boundary_pieces[0], self.boundary_pieces[1]],
            Side::Minus => [self.boundary_pieces[2], self.boundary_pieces[3]],
        }
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        p.x.abs() + p.y.abs() <= self.half_width + tol
    }
}

pub fn build_domain(a: f64) -> Result<Domain2D> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("half width a must be positive, got {a}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let piece = |start: [f64; 2], end: [f64; 2], n: [f64; 2]| BoundaryPiece {
        start,
        end,
        normal: [n[0] * s, n[1] * s],
        equation: [n[0], n[1], -a],
    };
    Ok(Domain2D {
        half_width: a,
        subdomain_plus: [[-a, 0.0], [a, 0.0], [0.0, a]],
        subdomain_minus: [[-a, 0.0], [0.0, -a], [a, 0.0]],
        manifold: [[-a, 0.0], [a, 0.0]],
        boundary_pieces: [
            piece([a, 0.0], [0.0, a], [1.0, 1.0]),
            piece([0.0, a], [-a, 0.0], [-1.0, 1.0]),
            piece([-a, 0.0], [0.0, -a], [-1.0, -1.0]),
            piece([0.0, -a], [a, 0.0], [1.0, -1.0]),
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub triangle: Triangle,
    pub side: Side,
}

/// A piece `[x_start, x_end] × {0}` of the manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldEdge {
    pub x_start: f64,
    pub x_end: f64,
}

impl ManifoldEdge {
    pub fn length(&self) -> f64 {
        self.x_end - self.x_start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Plus-side elements first, then minus-side, each in refinement order.
    pub elements: Vec<Element>,
    /// Ordered left to right.
    pub manifold_edges: Vec<ManifoldEdge>,
    pub refinement_level: u32,
    pub half_width: f64,
}

impl Mesh {
    pub fn elements_on(&self, side: Side) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(move |e| e.side == side)
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.triangle.area()).sum()
    }
}

/// Uniform red refinement of the one-triangle-per-side base mesh.
pub fn triangulate(domain: &Domain2D, level: u32) -> Mesh {
    let mut elements = Vec::with_capacity(2 << (2 * level as usize));
    for side in Side::BOTH {
        let mut tris = vec![domain.subdomain(side)];
        for _ in 0..level {
            tris = tris.iter().flat_map(|t| t.red_refine()).collect();
        }
        elements.extend(tris.into_iter().map(|triangle| Element { triangle, side }));
    }
    let a = domain.half_width;
    let n = 1usize << level;
    let h = 2.0 * a / n as f64;
    let manifold_edges = (0..n)
        .map(|i| ManifoldEdge {
            x_start: -a + h * i as f64,
            x_end: if i + 1 == n { a } else { -a + h * (i + 1) as f64 },
        })
        .collect();
    Mesh {
        elements,
        manifold_edges,
        refinement_level: level,
        half_width: a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_domain() {
        let d = build_domain(1.0).unwrap();
        assert_eq!(d.manifold_length(), 2.0);
        assert_eq!(d.subdomain(Side::Plus).area(), 1.0);
        let d2 = build_domain(2.0).unwrap();
        assert_eq!(d2.manifold_length(), 4.0);
        assert_eq!(d2.subdomain(Side::Minus).area(), 4.0);
        assert!(build_domain(0.0).is_err());
        assert!(build_domain(-1.0).is_err());
        assert!(build_domain(f64::NAN).is_err());
    }

    #[test]
    fn boundary_pieces_lie_on_their_lines() {
        let d = build_domain(1.5).unwrap();
        for p in d.boundary_pieces {
            for t in [0.0, 0.3, 1.0] {
                let x = p.point_at(t);
                let [c1, c2, c0] = p.equation;
                assert!((c1 * x.x + c2 * x.y + c0).abs() < 1e-14);
            }
            let n = p.normal;
            assert!(((n[0] * n[0] + n[1] * n[1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn both_subdomains_counter_clockwise() {
        let d = build_domain(1.0).unwrap();
        assert!(d.subdomain(Side::Plus).signed_area() > 0.0);
        assert!(d.subdomain(Side::Minus).signed_area() > 0.0);
    }

    #[test]
    fn mesh_counts() {
        let d = build_domain(1.0).unwrap();
        let m0 = triangulate(&d, 0);
        assert_eq!((m0.elements.len(), m0.manifold_edges.len()), (2, 1));
        let m2 = triangulate(&d, 2);
        assert_eq!((m2.elements.len(), m2.manifold_edges.len()), (32, 4));
    }

    #[test]
    fn mesh_area_and_sides() {
        for a in [0.5, 1.0, 3.0] {
            let d = build_domain(a).unwrap();
            for level in 0..6 {
                let m = triangulate(&d, level);
                assert!((m.total_area() - 2.0 * a * a).abs() <= 1e-12 * 2.0 * a * a);
                let len: f64 = m.manifold_edges.iter().map(|e| e.length()).sum();
                assert!((len - 2.0 * a).abs() <= 1e-12 * 2.0 * a);
                for e in &m.elements {
                    for v in e.triangle.vertices {
                        match e.side {
                            Side::Plus => assert!(v.y >= 0.0),
                            Side::Minus => assert!(v.y <= 0.0),
                        }
                    }
                }
            }
        }
    }
}
