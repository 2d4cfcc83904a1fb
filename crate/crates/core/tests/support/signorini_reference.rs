//! P1 finite elements on a uniform `n × n` grid of the unit square, contact
//! on the bottom edge, solved by projected SOR. Test-only oracle.

use std::collections::BTreeMap;

use thinobst_core::geometry::{Element, Point, Side, Triangle, Vector};

pub struct Reference {
    pub n: usize,
    /// Nodal values, index `j (n + 1) + i` for node `(i h, j h)`.
    pub values: Vec<f64>,
    pub sweeps: usize,
    pub last_update: f64,
}

impl Reference {
    /// `phi` gives the Dirichlet data on the left, right and top edges;
    /// `psi` the obstacle on the bottom edge.
    pub fn solve(n: usize, phi: impl Fn(f64, f64) -> f64, psi: impl Fn(f64) -> f64, tol: f64) -> Self {
        let h = 1.0 / n as f64;
        let m = n + 1;
        let idx = |i: usize, j: usize| j * m + i;
        let mut k: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); m * m];
        for (tri, nodes) in triangles(n) {
            let g = local_gradients(&tri);
            let area = tri.area();
            for a in 0..3 {
                for b in 0..3 {
                    *k[nodes[a]].entry(nodes[b]).or_insert(0.0) += area * g[a].dot(&g[b]);
                }
            }
        }
        let dirichlet = |i: usize, j: usize| i == 0 || i == n || j == n;
        let mut u = vec![0.0; m * m];
        for j in 0..m {
            for i in 0..m {
                let (x, y) = (i as f64 * h, j as f64 * h);
                u[idx(i, j)] = if dirichlet(i, j) { phi(x, y) } else if j == 0 { psi(x).max(0.0) } else { 0.0 };
            }
        }
        let omega = 2.0 / (1.0 + (std::f64::consts::PI * h).sin());
        let mut sweeps = 0;
        let mut last_update;
        loop {
            last_update = 0.0f64;
            for j in 0..m {
                for i in 0..m {
                    if dirichlet(i, j) {
                        continue;
                    }
                    let r = idx(i, j);
                    let mut s = 0.0;
                    let mut diag = 0.0;
                    for (&c, &kv) in &k[r] {
                        if c == r {
                            diag = kv;
                        } else {
                            s += kv * u[c];
                        }
                    }
                    let mut new = u[r] + omega * (-s / diag - u[r]);
                    if j == 0 {
                        new = new.max(psi(i as f64 * h));
                    }
                    last_update = last_update.max((new - u[r]).abs());
                    u[r] = new;
                }
            }
            sweeps += 1;
            if last_update < tol || sweeps > 200_000 {
                break;
            }
        }
        Self { n, values: u, sweeps, last_update }
    }

    pub fn elements(&self) -> Vec<Element> {
        triangles(self.n).into_iter().map(|(triangle, _)| Element { triangle, side: Side::Plus }).collect()
    }

    /// Piecewise-constant gradient; `p` must lie inside an element.
    pub fn gradient(&self, p: &Point) -> Vector {
        let n = self.n;
        let h = 1.0 / n as f64;
        let i = ((p.x / h).floor() as usize).min(n - 1);
        let j = ((p.y / h).floor() as usize).min(n - 1);
        let (xi, eta) = (p.x / h - i as f64, p.y / h - j as f64);
        let m = n + 1;
        let u = |i: usize, j: usize| self.values[j * m + i];
        if xi >= eta {
            Vector::new(u(i + 1, j) - u(i, j), u(i + 1, j + 1) - u(i + 1, j)) / h
        } else {
            Vector::new(u(i + 1, j + 1) - u(i, j + 1), u(i, j + 1) - u(i, j)) / h
        }
    }

    pub fn value_on_bottom(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Each cell split along its rising diagonal.
fn triangles(n: usize) -> Vec<(Triangle, [usize; 3])> {
    let h = 1.0 / n as f64;
    let m = n + 1;
    let p = |i: usize, j: usize| Point::new(i as f64 * h, j as f64 * h);
    let mut out = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (j * m + i, j * m + i + 1, (j + 1) * m + i + 1, (j + 1) * m + i);
            out.push((Triangle::new(p(i, j), p(i + 1, j), p(i + 1, j + 1)), [a, b, c]));
            out.push((Triangle::new(p(i, j), p(i + 1, j + 1), p(i, j + 1)), [a, c, d]));
        }
    }
    out
}

fn local_gradients(t: &Triangle) -> [Vector; 3] {
    let [a, b, c] = t.vertices;
    let two_area = (b - a).perp(&(c - a));
    let rot = |e: Vector| Vector::new(-e.y, e.x) / two_area;
    [rot(c - b), rot(a - c), rot(b - a)]
}
