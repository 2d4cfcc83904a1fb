mod common;

use std::sync::{Arc, OnceLock};

use common::{estimator, estimator_with, exact, perturbed_solution};
use proptest::prelude::*;
use thinobst_core::fields::{FluxSum, Poly2, PolynomialFlux, TableMultiplier, ZeroMultiplier};
use thinobst_core::majorants::{bracket, MinimizeOptions};
use thinobst_core::paperbench::ExactJump;
use thinobst_core::*;

fn est() -> &'static Estimator {
    static E: OnceLock<Estimator> = OnceLock::new();
    E.get_or_init(|| estimator(1.0))
}

fn random_field() -> impl Strategy<Value = SharedField> {
    (0.0..1.0f64, -1.0..1.0f64, prop::array::uniform3(-1.0..1.0f64), prop::array::uniform3(-1.0..1.0f64), prop::bool::ANY)
        .prop_map(|(c0, t, hp, hm, touch)| {
            // c0 = 0 keeps a contact region; |c1| ≤ c0 keeps p ≥ 0 on M
            let c0 = if touch { 0.0 } else { c0 };
            perturbed_solution(1.0, c0, t * c0, hp, hm)
        })
}

fn linear_flux(c: [f64; 6], d: [f64; 6]) -> SharedFlux {
    Arc::new(PolynomialFlux::new(
        [Poly2::linear(c[0], c[1], c[2]), Poly2::linear(c[3], c[4], c[5])],
        [Poly2::linear(d[0], d[1], d[2]), Poly2::linear(d[3], d[4], d[5])],
    ))
}

#[derive(Debug, Clone, Copy)]
enum FluxKind {
    GradV,
    GradU,
    GradVPlus,
    GradUPlus,
}

#[derive(Debug, Clone, Copy)]
enum LambdaKind {
    Clip,
    Zero,
    Exact,
    Table,
}

fn combo() -> impl Strategy<Value = (SharedField, SharedFlux, SharedMultiplier, Betas, f64)> {
    (
        random_field(),
        prop_oneof![Just(FluxKind::GradV), Just(FluxKind::GradU), Just(FluxKind::GradVPlus), Just(FluxKind::GradUPlus)],
        prop_oneof![Just(LambdaKind::Clip), Just(LambdaKind::Zero), Just(LambdaKind::Exact), Just(LambdaKind::Table)],
        prop::array::uniform6(-0.5..0.5f64),
        prop::array::uniform6(-0.5..0.5f64),
        prop::array::uniform5(0.0..3.0f64),
        (-2.0..2.0f64, -2.0..2.0f64, 0.0..1.0f64),
    )
        .prop_map(|(v, fk, lk, c, d, tab, (l1, l2, alpha))| {
            let gv = flux_from_gradient(v.clone()).unwrap();
            let gu = flux_from_gradient(exact()).unwrap();
            let q: SharedFlux = match fk {
                FluxKind::GradV => gv,
                FluxKind::GradU => gu,
                FluxKind::GradVPlus => Arc::new(FluxSum::new(vec![(1.0, gv), (1.0, linear_flux(c, d))])),
                FluxKind::GradUPlus => Arc::new(FluxSum::new(vec![(1.0, gu), (1.0, linear_flux(c, d))])),
            };
            let lam: SharedMultiplier = match lk {
                LambdaKind::Clip => multiplier_from_jump(q.clone()),
                LambdaKind::Zero => Arc::new(ZeroMultiplier),
                LambdaKind::Exact => Arc::new(ExactJump::default()),
                LambdaKind::Table => {
                    let pts = tab.iter().enumerate().map(|(k, y)| (-1.0 + 0.5 * k as f64, *y)).collect();
                    Arc::new(TableMultiplier::new(pts).unwrap())
                }
            };
            (v, q, lam, Betas::new(10f64.powf(l1), 10f64.powf(l2)).unwrap(), alpha)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_majorant_bounds_the_error((v, q, lam, betas, alpha) in combo()) {
        let e = est();
        let err = e.energy_error(&v, &exact()).unwrap();
        let mut reports = vec![
            e.majorant_m(&v, &q, &lam).unwrap(),
            e.majorant_m12(&v, &q, &lam, betas).unwrap(),
            e.majorant_m4(&v, &q, betas).unwrap(),
        ];
        for r in [
            e.majorant_basic(&v, &q, &lam),
            e.majorant_m5(&v, &q, &lam, Alpha::Fixed(alpha), M5Mode::Full),
            e.majorant_m5(&v, &q, &lam, Alpha::Optimal, M5Mode::Partial),
        ] {
            match r {
                Ok(r) => reports.push(r),
                Err(Error::NotEquilibrated { .. } | Error::ConditionViolation { .. }) => {}
                Err(other) => panic!("{other}"),
            }
        }
        for r in &reports {
            prop_assert!(r.value >= err - 1e-8, "{}: {} < {}", r.kind, r.value, err);
            prop_assert!(r.value >= 0.0);
            for (k, t) in &r.terms {
                prop_assert!(*t >= 0.0 || k == "c_beta", "{}: {k} = {t}", r.kind);
            }
            prop_assert!((r.efficiency_index.unwrap() - r.value / err).abs() <= 1e-12 * r.value / err || err == 0.0);
        }
    }

    #[test]
    fn m4_is_m12_at_the_optimal_multiplier((v, q, _lam, betas, _a) in combo()) {
        let e = est();
        let m4 = e.majorant_m4(&v, &q, betas).unwrap().value;
        let lbar = e.optimal_lambda(&v, &q, betas).unwrap();
        let m12 = e.majorant_m12(&v, &q, &lbar, betas).unwrap().value;
        prop_assert!((m4 - m12).abs() <= 1e-10 * m4.max(1e-300), "{m4} vs {m12}");
    }

    #[test]
    fn optimal_multiplier_minimises_m12((v, q, lam, betas, _a) in combo()) {
        let e = est();
        let lbar = e.optimal_lambda(&v, &q, betas).unwrap();
        let best = e.majorant_m12(&v, &q, &lbar, betas).unwrap().value;
        let other = e.majorant_m12(&v, &q, &lam, betas).unwrap().value;
        prop_assert!(best <= other * (1.0 + 1e-12), "{best} > {other}");
    }

    #[test]
    fn optimal_alpha_beats_grid(
        dp in 0.0..2.0f64, dm in 0.0..2.0f64, mp in 0.0..2.0f64, mm in 0.0..2.0f64
    ) {
        let a = optimal_alpha(dp, dm, mp, mm);
        prop_assert!((0.0..=1.0).contains(&a));
        let best = bracket(dp, dm, mp, mm, a);
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            prop_assert!(best <= bracket(dp, dm, mp, mm, t) * (1.0 + 1e-14));
        }
    }
}

#[test]
fn alpha_grid_oracle_on_100_tuples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let t: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..3.0));
        let a = optimal_alpha(t[0], t[1], t[2], t[3]);
        let best = bracket(t[0], t[1], t[2], t[3], a);
        let grid = (0..=1000).map(|k| bracket(t[0], t[1], t[2], t[3], k as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
        assert!(best <= grid * (1.0 + 1e-14), "{t:?}");
    }
}

#[test]
fn everything_vanishes_at_the_solution() {
    let e = est();
    let u = exact();
    let q = flux_from_gradient(u.clone()).unwrap();
    let lam: SharedMultiplier = Arc::new(ExactJump::default());
    let mut values = vec![
        e.majorant_basic(&u, &q, &lam).unwrap().value,
        e.majorant_m(&u, &q, &lam).unwrap().value,
        e.majorant_m5(&u, &q, &lam, Alpha::Optimal, M5Mode::Full).unwrap().value,
        e.majorant_m5(&u, &q, &lam, Alpha::Fixed(0.3), M5Mode::Partial).unwrap().value,
    ];
    for b1 in [0.1, 1.0, 10.0] {
        for b2 in [0.1, 1.0, 10.0] {
            let b = Betas::new(b1, b2).unwrap();
            values.push(e.majorant_m4(&u, &q, b).unwrap().value);
            values.push(e.majorant_m12(&u, &q, &lam, b).unwrap().value);
        }
    }
    for v in values {
        assert!(v.abs() <= 1e-12, "{v}");
    }
}

#[test]
fn perturbing_one_input_makes_it_positive() {
    let e = est();
    let u = exact();
    let q = flux_from_gradient(u.clone()).unwrap();
    let lam: SharedMultiplier = Arc::new(ExactJump::default());
    let d = 1e-3;
    let v_pert = perturbed_solution(1.0, d, 0.0, [0.0; 3], [0.0; 3]);
    let q_pert: SharedFlux = Arc::new(FluxSum::new(vec![(1.0, q.clone()), (d, linear_flux([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0; 6]))]));
    let lam_pert: SharedMultiplier =
        Arc::new(thinobst_core::fields::MultiplierSum::new(vec![(1.0, lam.clone()), (d, Arc::new(thinobst_core::fields::PolynomialMultiplier { coefficients: vec![1.0] }))]));
    let b = Betas::ONE;
    for (v, q, l) in [(&v_pert, &q, &lam), (&u, &q_pert, &lam), (&u, &q, &lam_pert)] {
        assert!(e.majorant_m(v, q, l).unwrap().value > 0.0);
        assert!(e.majorant_m12(v, q, l, b).unwrap().value > 0.0);
    }
    // 𝔐4 has no multiplier argument
    assert!(e.majorant_m4(&v_pert, &q, b).unwrap().value > 0.0);
    assert!(e.majorant_m4(&u, &q_pert, b).unwrap().value > 0.0);
}

#[test]
fn quadrature_result_is_independent_of_worker_count() {
    let v = perturbed_solution(1.0, 0.3, 0.1, [0.2, -0.1, 0.4], [0.0, 0.3, -0.2]);
    let q = flux_from_gradient(v.clone()).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let e = estimator(1.0);
            let lam = multiplier_from_jump(q.clone());
            (e.majorant_m(&v, &q, &lam).unwrap().value.to_bits(), e.energy_error(&v, &exact()).unwrap().to_bits())
        })
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn gradients_and_divergence_match_finite_differences() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let v = perturbed_solution(1.0, 0.4, -0.2, [0.3, 0.1, -0.5], [-0.2, 0.6, 0.1]);
    let q = flux_from_gradient(v.clone()).unwrap();
    let h = 1e-4;
    for _ in 0..100 {
        let side = if rng.gen_bool(0.5) { Side::Plus } else { Side::Minus };
        let x = rng.gen_range(-0.8..0.8);
        let y = rng.gen_range(0.05..(0.95 - f64::abs(x)).max(0.06));
        let y = if side == Side::Plus { y } else { -y };
        let p = Point::new(x, y);
        let f = |dx: f64, dy: f64| v.value(&Point::new(x + dx, y + dy), side);
        let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
        let div = q.divergence(&p, side);
        assert!((div - lap).abs() <= 1e-5 * div.abs().max(1.0), "{p}: {div} vs {lap}");
        let g = v.gradient(&p, side);
        let fd = Vector::new((f(h, 0.0) - f(-h, 0.0)) / (2.0 * h), (f(0.0, h) - f(0.0, -h)) / (2.0 * h));
        assert!((g - fd).norm() <= 1e-6 * g.norm().max(1.0));
    }
}

#[test]
fn polynomial_flux_divergence_is_exact() {
    let poly = Poly2::from_terms([(2, 1, 1.5), (0, 3, 0.5), (1, 0, 2.0)]);
    let v: SharedField = Arc::new(thinobst_core::fields::Polynomial::new(poly.clone()));
    let q = flux_from_gradient(v).unwrap();
    for (x, y) in [(0.1, 0.2), (-0.3, -0.4), (0.5, 0.0)] {
        let p = Point::new(x, y);
        let want = 6.0 * y;
        assert!((q.divergence(&p, Side::of(&p)) - want).abs() < 1e-12);
    }
}

#[test]
fn minimization_is_monotone_and_beats_the_baseline() {
    let e = estimator(1.0);
    let c = thinobst_core::paperbench::build_example(thinobst_core::paperbench::ExampleName::V1, 1.0, None).unwrap();
    let q0 = flux_from_gradient(c.field.clone()).unwrap();
    let m = e.minimize(&c.field, &q0, &MinimizeOptions::default()).unwrap();
    assert_eq!(m.history.len(), 11);
    for w in m.history.windows(2) {
        assert!(w[1].value <= w[0].value);
    }
    let err = c.exact_error_closed_form.unwrap();
    assert!(m.history.iter().all(|h| h.value >= err - 1e-8));
    assert!(m.report.value <= 0.7592);
    assert_eq!(m.report.value, m.history.last().unwrap().value);
}

#[test]
fn minimization_from_exact_flux_stays_at_the_error() {
    let e = estimator_with(1.0, QuadConfig::default());
    let c = thinobst_core::paperbench::build_example(thinobst_core::paperbench::ExampleName::V1, 1.0, None).unwrap();
    let q0 = flux_from_gradient(exact()).unwrap();
    let m = e.minimize(&c.field, &q0, &MinimizeOptions { iterations: 2, ..Default::default() }).unwrap();
    let err = c.exact_error_closed_form.unwrap();
    // β1 ≥ 1e-4 leaves a factor √(1 + β1) on the misfit
    assert!(m.report.value >= err && m.report.value <= err * (1.0f64 + 1e-4).sqrt() * (1.0 + 1e-9), "{}", m.report.value);
}

#[test]
fn zero_iterations_is_rejected() {
    let e = est();
    let q0 = flux_from_gradient(exact()).unwrap();
    let r = e.minimize(&exact(), &q0, &MinimizeOptions { iterations: 0, ..Default::default() });
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}
