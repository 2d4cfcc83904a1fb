use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Sparse bivariate polynomial `Σ c_ij x1^i x2^j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([(0, 0, c)])
    }

    pub fn x1() -> Self {
        Self::from_terms([(1, 0, 1.0)])
    }

    pub fn x2() -> Self {
        Self::from_terms([(0, 1, 1.0)])
    }

    /// `c0 + c1 x1 + c2 x2`.
    pub fn linear(c0: f64, c1: f64, c2: f64) -> Self {
        Self::from_terms([(0, 0, c0), (1, 0, c1), (0, 1, c2)])
    }

    pub fn monomial(i: u32, j: u32, c: f64) -> Self {
        Self::from_terms([(i, j, c)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, f64)>) -> Self {
        let mut p = Self::zero();
        for (i, j, c) in terms {
            *p.terms.entry((i, j)).or_insert(0.0) += c;
        }
        p.prune();
        p
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.eval_xy(p.x, p.y)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|t| t.0 > 0)
                .map(|(i, j, c)| (i - 1, j, c * i as f64)),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|t| t.1 > 0)
                .map(|(i, j, c)| (i, j - 1, c * j as f64)),
        )
    }

    pub fn laplacian(&self) -> Self {
        self.dx().dx() + self.dy().dy()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms().map(|(i, j, c)| (i, j, c * s)))
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        Poly2::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Add for Poly2 {
    type Output = Poly2;
    fn add(self, rhs: Poly2) -> Poly2 {
        &self + &rhs
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        Poly2::from_terms(self.terms().chain(rhs.terms().map(|(i, j, c)| (i, j, -c))))
    }
}

impl Sub for Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: Poly2) -> Poly2 {
        &self - &rhs
    }
}

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (i, j, c) in self.terms() {
            for (k, l, d) in rhs.terms() {
                terms.push((i + k, j + l, c * d));
            }
        }
        Poly2::from_terms(terms)
    }
}

impl Mul for Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: Poly2) -> Poly2 {
        &self * &rhs
    }
}
