#![allow(dead_code)]

use std::sync::Arc;

use thinobst_core::constants::{sloshing_trace_identity_bound, trace_fiber_bound};
use thinobst_core::fields::{Poly2, PiecewisePolynomial, Superposition};
use thinobst_core::paperbench::{thin_obstacle_problem, ExactSolution};
use thinobst_core::*;

/// Every constant available, trace and sloshing ones from the helper bounds.
pub fn full_overrides(a: f64) -> ConstantOverrides {
    let mut o = ConstantOverrides::new();
    for id in [ConstantId::TracePlus, ConstantId::TraceMinus] {
        o.insert(id, trace_fiber_bound(a));
    }
    for id in [ConstantId::PoincareManifoldPlus, ConstantId::PoincareManifoldMinus] {
        o.insert(id, sloshing_trace_identity_bound(a));
    }
    o
}

pub fn estimator(a: f64) -> Estimator {
    estimator_with(a, QuadConfig::default())
}

pub fn estimator_with(a: f64, quad: QuadConfig) -> Estimator {
    let p = thin_obstacle_problem(a).unwrap();
    let c = assemble_constants(&p.domain, &full_overrides(a)).unwrap();
    Estimator::new(p, c, quad).with_oracle(exact())
}

pub fn exact() -> SharedField {
    Arc::new(ExactSolution::default())
}

/// `u + p` with `p` vanishing on `∂Ω` and `p ≥ 0` on `M`:
/// `p± = B±(x) (c0 + c1 x1 + x2 h±)`, `B±` the product of the two leg equations.
pub fn perturbed_solution(a: f64, c0: f64, c1: f64, h_plus: [f64; 3], h_minus: [f64; 3]) -> SharedField {
    let b_plus = Poly2::linear(a, -1.0, -1.0) * Poly2::linear(a, 1.0, -1.0);
    let b_minus = Poly2::linear(a, -1.0, 1.0) * Poly2::linear(a, 1.0, 1.0);
    let g = |h: [f64; 3]| Poly2::linear(c0, c1, 0.0) + Poly2::x2() * Poly2::linear(h[0], h[1], h[2]);
    let p = PiecewisePolynomial::per_side(b_plus * g(h_plus), b_minus * g(h_minus));
    Arc::new(Superposition::sum(exact(), Arc::new(p)))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
