//! One line per acceptance criterion; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;
#[allow(dead_code)]
#[path = "../../core/tests/support/signorini_reference.rs"]
mod reference;

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;

use common::{estimator, exact, full_overrides, perturbed_solution, rel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinobst_core::constants::assemble_signorini_constants;
use thinobst_core::fields::{FluxSum, MultiplierSum, Poly2, PolynomialFlux, PolynomialMultiplier, TableMultiplier, ZeroMultiplier};
use thinobst_core::majorants::{bracket, MinimizeOptions};
use thinobst_core::paperbench::*;
use thinobst_core::quadrature::{integrate_elements, IntegrandFeatures};
use thinobst_core::signorini::*;
use thinobst_core::*;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn reproduce_at(name: ExampleName, a: f64, eps: Option<f64>, flux: FluxChoice) -> Reproduction {
    reproduce(name, a, eps, &QuadConfig::default(), flux).expect("reproduction runs")
}

fn kind(r: &Reproduction, k: MajorantKind) -> &MajorantReport {
    r.reports.iter().find(|m| m.kind == k).expect("kind reported")
}

fn c1() -> Outcome {
    let r = reproduce_at(ExampleName::V1, 1.0, None, FluxChoice::GradientOfV);
    let want = 4.0 / 3.0 * (2.0f64 / 35.0).sqrt();
    let e = rel(r.exact_error, want);
    (e < 1e-8, format!("energy_error(v1) = {:.10}, target (4/3)√(2/35) = {want:.10}, rel {e:.2e}", r.exact_error))
}

fn c2() -> Outcome {
    let r = reproduce_at(ExampleName::V1, 1.0, None, FluxChoice::GradientOfV);
    let m = kind(&r, MajorantKind::M);
    let want = 16.0 / (3.0 * 5f64.sqrt() * PI);
    let eff_want = 4.0 / PI * 3.5f64.sqrt();
    let eff = m.efficiency_index.unwrap();
    let ok_value = rel(m.value, want) < 1e-8;
    let ok_eff = (eff - eff_want).abs() < 1e-4;
    (
        ok_value && ok_eff,
        format!(
            "𝔐 = {:.10} vs 16/(3√5π) = {want:.10} [{}]; efficiency {eff:.6} vs (4/π)√(7/2) = {eff_want:.6} [{}]",
            m.value,
            ok(ok_value),
            ok(ok_eff)
        ),
    )
}

fn c3() -> Outcome {
    let r = reproduce_at(ExampleName::V1, 1.0, None, FluxChoice::GradientOfV);
    let m = kind(&r, MajorantKind::M5Partial);
    let want = 8.0 * 2f64.sqrt() / (3.0 * 5f64.sqrt() * PI);
    let eff_want = 2.0 * 7f64.sqrt() / PI;
    let eff = m.efficiency_index.unwrap();
    let ok_value = rel(m.value, want) < 1e-8;
    let ok_eff = (eff - eff_want).abs() < 1e-4;
    (
        ok_value && ok_eff,
        format!(
            "𝔐′3 = {:.10} vs 8√2/(3√5π) = {want:.10} [{}]; efficiency {eff:.6} vs 2√7/π = {eff_want:.6} [{}]",
            m.value,
            ok(ok_value),
            ok(ok_eff)
        ),
    )
}

fn c4() -> Outcome {
    let r = reproduce_at(ExampleName::V1, 1.0, None, FluxChoice::GradientOfU);
    let m = kind(&r, MajorantKind::M);
    let ratio = m.value / r.exact_error;
    ((ratio - 1.0).abs() < 1e-6, format!("𝔐(v1, ∇u, λ*)/error = {ratio:.12} (slack {:.0e})", m.quadrature_slack))
}

fn c5() -> Outcome {
    let r = reproduce_at(ExampleName::V2, 1.0, None, FluxChoice::GradientOfV);
    let want = 16.0 / (3.0 * 5f64.sqrt());
    let eff = kind(&r, MajorantKind::M5Partial).efficiency_index.unwrap();
    let bound = 22f64.sqrt() / PI + (45.0f64 / 154.0).sqrt() + 1e-3;
    let ok_err = rel(r.exact_error, want) < 1e-8;
    let ok_eff = eff <= bound;
    (
        ok_err && ok_eff,
        format!(
            "energy_error(v2) = {:.10} vs 16/(3√5) = {want:.10} [{}]; efficiency {eff:.6} ≤ {bound:.6} [{}]",
            r.exact_error,
            ok(ok_err),
            ok(ok_eff)
        ),
    )
}

fn c6() -> Outcome {
    let eps = [0.2, 0.1, 0.05];
    let effs: Vec<f64> = eps
        .iter()
        .map(|&e| kind(&reproduce_at(ExampleName::V3Eps, 1.0, Some(e), FluxChoice::GradientOfU), MajorantKind::M).efficiency_index.unwrap())
        .collect();
    let decreasing = effs.windows(2).all(|w| w[1] < w[0]);
    // least-squares slope of ln(eff - 1) against ln ε
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = effs.iter().map(|e| (e - 1.0).ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let own = kind(&reproduce_at(ExampleName::V3Eps, 1.0, Some(0.05), FluxChoice::GradientOfV), MajorantKind::M5Partial)
        .efficiency_index
        .unwrap();
    let ok_slope = (0.6..=0.9).contains(&slope);
    let ok_own = own <= 3.54 + 0.2;
    (
        decreasing && ok_slope && ok_own,
        format!(
            "efficiency(∇u) at ε=0.2,0.1,0.05: {:.5}, {:.5}, {:.5} decreasing [{}]; fit exponent {slope:.3} in [0.6, 0.9] [{}]; ∇v3 efficiency at 0.05 {own:.5} ≤ 3.74 [{}]",
            effs[0],
            effs[1],
            effs[2],
            ok(decreasing),
            ok(ok_slope),
            ok(ok_own)
        ),
    )
}

fn c7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for a in [0.5, 2.0] {
        let r = reproduce_at(ExampleName::V1, a, None, FluxChoice::GradientOfV);
        let e_want = 4.0 / 3.0 * (2.0f64 / 35.0).sqrt() * a.powi(4);
        let m_want = 16.0 / (3.0 * 5f64.sqrt() * PI) * a.powi(4);
        let ok_e = rel(r.exact_error, e_want) < 1e-8;
        let ok_m = rel(kind(&r, MajorantKind::M).value, m_want) < 1e-8;
        pass &= ok_e && ok_m;
        parts.push(format!(
            "a={a}: error {:.8} vs {e_want:.8} [{}], 𝔐 {:.8} vs {m_want:.8} [{}]",
            r.exact_error,
            ok(ok_e),
            kind(&r, MajorantKind::M).value,
            ok(ok_m)
        ));
    }
    (pass, parts.join("; "))
}

fn linear_flux(rng: &mut ChaCha8Rng) -> SharedFlux {
    let mut l = || Poly2::linear(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    Arc::new(PolynomialFlux::new([l(), l()], [l(), l()]))
}

fn random_triple(rng: &mut ChaCha8Rng) -> (SharedField, SharedFlux, SharedMultiplier, Betas) {
    let c0 = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
    let c1 = c0 * rng.gen_range(-1.0..1.0);
    let hp: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let hm: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let v = perturbed_solution(1.0, c0, c1, hp, hm);
    let base = if rng.gen_bool(0.5) { flux_from_gradient(v.clone()).unwrap() } else { flux_from_gradient(exact()).unwrap() };
    let q: SharedFlux = if rng.gen_bool(0.5) { base } else { Arc::new(FluxSum::new(vec![(1.0, base), (1.0, linear_flux(rng))])) };
    let lam: SharedMultiplier = match rng.gen_range(0..4) {
        0 => multiplier_from_jump(q.clone()),
        1 => Arc::new(ZeroMultiplier),
        2 => Arc::new(ExactJump::default()),
        _ => Arc::new(TableMultiplier::new((0..5).map(|k| (-1.0 + 0.5 * k as f64, rng.gen_range(0.0..3.0))).collect()).unwrap()),
    };
    let betas = Betas::new(10f64.powf(rng.gen_range(-2.0..2.0)), 10f64.powf(rng.gen_range(-2.0..2.0))).unwrap();
    (v, q, lam, betas)
}

fn c8() -> Outcome {
    let est = estimator(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut evaluated, mut violations, mut worst) = (0, 0, f64::INFINITY);
    for _ in 0..60 {
        let (v, q, lam, betas) = random_triple(&mut rng);
        let alpha = rng.gen_range(0.0..1.0);
        let err = est.energy_error(&v, &exact()).unwrap();
        let results = [
            est.majorant_basic(&v, &q, &lam),
            est.majorant_m(&v, &q, &lam),
            est.majorant_m12(&v, &q, &lam, betas),
            est.majorant_m4(&v, &q, betas),
            est.majorant_m5(&v, &q, &lam, Alpha::Fixed(alpha), M5Mode::Full),
            est.majorant_m5(&v, &q, &lam, Alpha::Optimal, M5Mode::Partial),
        ];
        for r in results {
            match r {
                Ok(r) => {
                    evaluated += 1;
                    worst = worst.min(r.value - err);
                    if r.value < err - 1e-8 {
                        violations += 1;
                    }
                }
                Err(Error::NotEquilibrated { .. } | Error::ConditionViolation { .. }) => {}
                Err(e) => return (false, format!("unexpected error {e}")),
            }
        }
    }
    (
        violations == 0,
        format!("60 random triples, {evaluated} majorant evaluations, {violations} violations, min(value - error) = {worst:.3e}"),
    )
}

fn c9() -> Outcome {
    let est = estimator(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (v, q, _, betas) = random_triple(&mut rng);
        let m4 = est.majorant_m4(&v, &q, betas).unwrap().value;
        let lbar = est.optimal_lambda(&v, &q, betas).unwrap();
        let m12 = est.majorant_m12(&v, &q, &lbar, betas).unwrap().value;
        worst = worst.max((m4 - m12).abs() / m4.max(1e-300));
    }
    let mut grid_fail = 0;
    for _ in 0..100 {
        let t: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..3.0));
        let best = bracket(t[0], t[1], t[2], t[3], optimal_alpha(t[0], t[1], t[2], t[3]));
        let grid = (0..=1000).map(|k| bracket(t[0], t[1], t[2], t[3], k as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
        if best > grid * (1.0 + 1e-14) {
            grid_fail += 1;
        }
    }
    (
        worst <= 1e-10 && grid_fail == 0,
        format!("max rel |𝔐4 - 𝔐12∘λ̄| over 20 probes = {worst:.2e}; α* lost to the 1001-point grid on {grid_fail}/100 tuples"),
    )
}

fn c10() -> Outcome {
    let est = estimator(1.0);
    let u = exact();
    let q = flux_from_gradient(u.clone()).unwrap();
    let lam: SharedMultiplier = Arc::new(ExactJump::default());
    let b = Betas::ONE;
    let all = |v: &SharedField, q: &SharedFlux, l: &SharedMultiplier| -> Vec<f64> {
        let mut out = vec![
            est.majorant_m(v, q, l).unwrap().value,
            est.majorant_m12(v, q, l, b).unwrap().value,
            est.majorant_m4(v, q, b).unwrap().value,
        ];
        // the remaining kinds refuse inputs that break their side conditions
        for r in [
            est.majorant_basic(v, q, l),
            est.majorant_m5(v, q, l, Alpha::Optimal, M5Mode::Partial),
            est.majorant_m5(v, q, l, Alpha::Optimal, M5Mode::Full),
        ] {
            match r {
                Ok(r) => out.push(r.value),
                Err(Error::NotEquilibrated { .. } | Error::ConditionViolation { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
        out
    };
    let at_solution = all(&u, &q, &lam);
    let max0 = at_solution.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let d = 1e-3;
    let v_pert = perturbed_solution(1.0, d, 0.0, [0.0; 3], [0.0; 3]);
    let q_pert: SharedFlux = Arc::new(FluxSum::new(vec![
        (1.0, q.clone()),
        (d, Arc::new(PolynomialFlux::new([Poly2::linear(1.0, 0.0, 0.0), Poly2::zero()], [Poly2::zero(), Poly2::zero()]))),
    ]));
    let lam_pert: SharedMultiplier =
        Arc::new(MultiplierSum::new(vec![(1.0, lam.clone()), (d, Arc::new(PolynomialMultiplier { coefficients: vec![1.0] }))]));
    let mut min_pert = f64::INFINITY;
    for (v, qq, l, skip_m4) in [(&v_pert, &q, &lam, false), (&u, &q_pert, &lam, false), (&u, &q, &lam_pert, true)] {
        let vals = all(v, qq, l);
        // 𝔐4 takes no multiplier, so a multiplier perturbation cannot move it
        for (i, val) in vals.iter().enumerate() {
            if !(skip_m4 && i == 2) {
                min_pert = min_pert.min(*val);
            }
        }
    }
    (
        max0 <= 1e-12 && min_pert > 0.0,
        format!("max |majorant| at (u, ∇u, λ*) = {max0:.2e}; min over 1e-3 perturbations = {min_pert:.3e}"),
    )
}

fn c11() -> Outcome {
    let p = thin_obstacle_problem(1.0).unwrap();
    let c = assemble_constants(&p.domain, &full_overrides(1.0)).unwrap();
    let est = Estimator::new(p, c, QuadConfig::default()).with_oracle(exact());
    let case = build_example(ExampleName::V1, 1.0, None).unwrap();
    let q = flux_from_gradient(case.field.clone()).unwrap();
    let m = est.minimize(&case.field, &q, &MinimizeOptions::default()).unwrap();
    let values: Vec<f64> = m.history.iter().map(|h| h.value).collect();
    let err = est.energy_error(&case.field, &exact()).unwrap();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let last = *values.last().unwrap();
    let floor = values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let pass = values.len() == 11 && monotone && last <= 0.7592 && floor >= err - 1e-8;
    (
        pass,
        format!("10 iterations {:.5} → {last:.5}, non-increasing [{}], final ≤ 0.7592 [{}], min iterate {floor:.5} ≥ error {err:.5}", values[0], ok(monotone), ok(last <= 0.7592)),
    )
}

fn c12() -> Outcome {
    let problem = SignoriniProblem {
        domain: SignoriniDomain::unit_square_bottom_contact(),
        psi: Arc::new(thinobst_core::fields::ZeroField),
        phi: Arc::new(desk_exact()),
    };
    let overrides = desk_constants().into_iter().collect();
    let consts = assemble_signorini_constants(problem.domain.diameter(), &overrides).unwrap();
    let est = SignoriniEstimator::new(problem, consts, QuadConfig::default());
    let u_s = desk_exact();
    let reference = reference::Reference::solve(64, |x, y| u_s.eval(&Point::new(x, y)), |_| 0.0, 1e-13);
    let feats = IntegrandFeatures { x1_breaks: vec![], singular_points: vec![Point::new(DESK_CONTACT_POINT, 0.0)] };
    let quad = QuadConfig { level: 0, ..Default::default() };
    let dist = |w: &SharedField| {
        integrate_elements(|p, s| (reference.gradient(p) - w.gradient(p, s)).norm_squared(), &reference.elements(), &feats, &quad)
            .unwrap()
            .value
            .sqrt()
    };
    let u: SharedField = Arc::new(desk_exact());
    let slack = dist(&u);
    let qu = flux_from_gradient(u.clone()).unwrap();
    let at_solution = est.majorant_signorini(&u, &qu, &(Arc::new(ClippedNormalFlux(qu.clone())) as SharedContactMultiplier)).unwrap().value;
    let v: SharedField = Arc::new(desk_bubble(0.5));
    let qv = flux_from_gradient(v.clone()).unwrap();
    let m = est.majorant_signorini(&v, &qv, &(Arc::new(ClippedNormalFlux(qv.clone())) as SharedContactMultiplier)).unwrap().value;
    let ref_err = dist(&v);
    let pass = m >= ref_err - slack && at_solution <= 1e-3;
    (
        pass,
        format!("bubble t=0.5: majorant {m:.5} ≥ reference error {ref_err:.5} - slack {slack:.2e}; at solution {at_solution:.2e} ≤ 1e-3"),
    )
}

fn c13() -> Outcome {
    let cfg = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases: Vec<Vec<String>> = vec![
        vec!["reproduce".into(), "--example".into(), "v1".into()],
        vec!["reproduce".into(), "--example".into(), "v3eps".into(), "--eps".into(), "0.1".into()],
        vec!["certify".into(), cfg.join("v1_certify.json").to_string_lossy().into()],
        vec!["certify".into(), cfg.join("signorini_desk.json").to_string_lossy().into()],
        vec!["minimize".into(), cfg.join("v1_minimize.json").to_string_lossy().into(), "--iterations".into(), "3".into()],
    ];
    let mut mismatched = Vec::new();
    for args in &cases {
        let outs: Vec<Vec<u8>> = [1, 3, 8]
            .iter()
            .map(|w| {
                let o = Command::new(env!("CARGO_BIN_EXE_thinobst")).args(args).env("THINOBST_WORKERS", w.to_string()).output().unwrap();
                if o.status.success() { o.stdout } else { Vec::new() }
            })
            .collect();
        if outs[0].is_empty() || outs.iter().any(|o| *o != outs[0]) {
            mismatched.push(args[0].clone());
        }
    }
    (mismatched.is_empty(), format!("{} commands × workers {{1, 3, 8}}, differing: {mismatched:?}", cases.len()))
}

fn ok(b: bool) -> &'static str {
    if b { "ok" } else { "MISS" }
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("C1 example 1 exact error", c1),
        ("C2 example 1 majorant and efficiency", c2),
        ("C3 example 1 remark variant", c3),
        ("C4 sharpness with the exact flux", c4),
        ("C5 example 2 error and efficiency bound", c5),
        ("C6 example 3 trend", c6),
        ("C7 a^4 scaling", c7),
        ("C8 guaranteed bound on random triples", c8),
        ("C9 optimality identities", c9),
        ("C10 vanish at the solution", c10),
        ("C11 minimization", c11),
        ("C12 signorini desk case", c12),
        ("C13 determinism across worker counts", c13),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (pass, detail) = f();
        if !pass {
            failed += 1;
        }
        println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
