use proptest::prelude::*;

use sublab::bernstein::{BernsteinFunction, Family};
use sublab::experiments::{overall, Check, ExperimentConfig, ExperimentKind, Verdict};
use sublab::exterior::{boundary_mean, ExteriorFunction, ExteriorKind};
use sublab::geometry::{ApproachRegion, Domain, RegionKind};
use sublab::kernels::{KernelSuite, PoissonEnvelope};
use sublab::montecarlo::{estimate_u_f, McParams, StepControl, SubordinatorStepper, DEFAULT_EPS};
use sublab::{LabError, Point};

/// Maps three numbers in (0, 1) onto the admissible parameter box of a family.
fn family_from_unit(idx: usize, u: [f64; 3]) -> BernsteinFunction {
    let f = Family::ALL[idx % Family::ALL.len()];
    let span = |lo: f64, hi: f64, t: f64| lo + (hi - lo) * t;
    let alpha = match f {
        Family::MixedPower => span(0.0, 1.0, u[0]),
        Family::Geometric => span(0.0, 2.0, u[0]).max(0.05),
        _ => span(0.0, 2.0, u[0]),
    };
    let kappa = match f {
        Family::MixedPower => span(0.0, 1.0, u[1]),
        Family::StableSum => span(0.0, alpha, u[1]),
        Family::StableLog => span(-alpha / 2.0, 1.0 - alpha / 2.0, u[1]),
        _ => 0.0,
    };
    let m = span(0.1, 5.0, u[2]);
    BernsteinFunction::new(f, alpha, kappa, m).unwrap()
}

fn unit() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn any_family() -> impl Strategy<Value = BernsteinFunction> {
    (0usize..7, unit(), unit(), unit()).prop_map(|(i, a, b, c)| family_from_unit(i, [a, b, c]))
}

fn rotate2(p: &Point, theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    Point::from_slice(&[c * p[0] - s * p[1], s * p[0] + c * p[1]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bernstein_shape(phi in any_family(), le in -3.0f64..3.0, t in 1.0f64..1e3) {
        let l = 10f64.powf(le);
        let (v, d1, d2) = (phi.phi(l).unwrap(), phi.phi_prime(l).unwrap(), phi.phi_second(l).unwrap());
        prop_assert!(v > 0.0 && d1 > 0.0, "{}: phi={v} phi'={d1}", phi.describe());
        prop_assert!(d2 <= 0.0, "{}: phi''={d2} at {l}", phi.describe());
        prop_assert!(phi.phi(t * l).unwrap() <= t * v * (1.0 + 1e-12));
        prop_assert!(l * d1 <= v * (1.0 + 1e-12));
        prop_assert!(phi.phi(t * l).unwrap() / (t * l) <= v / l * (1.0 + 1e-12));
        let fd = phi.phi_prime_numeric(l);
        prop_assert!((fd - d1).abs() <= 1e-6 * d1, "{}: fd {fd} vs {d1} at {l}", phi.describe());
    }

    #[test]
    fn kernels_positive_and_finite(phi in any_family(), d in 2usize..=3, r in 1e-3f64..2.0) {
        prop_assume!(phi.dimension_ok(d));
        let k = KernelSuite::new(phi, d).unwrap();
        let mut vals = vec![k.jump_surrogate(r).unwrap(), k.green_surrogate(r).unwrap()];
        // tempered families decay like exp(-m^{1/alpha} r); past ~700 that underflows f64
        let spec = k.phi.spec();
        let tempered = matches!(spec.family, Family::Relativistic) && spec.m.powf(1.0 / spec.alpha) * r > 500.0;
        if k.phi.has_levy_density() && !tempered {
            vals.push(k.jump_density(r).unwrap());
        }
        for v in vals {
            prop_assert!(v.is_finite() && v > 0.0, "{v} at r={r}");
        }
    }

    #[test]
    fn region_profile_nondecreasing(phi in any_family(), d in 2usize..=4, r in 1e-4f64..1.0, s in 1.0f64..10.0) {
        let prof = |r: f64| r.powi(d as i32) * phi.phi(r.powi(-2)).unwrap().sqrt();
        prop_assert!(prof(r) <= prof(r * s) * (1.0 + 1e-12));
    }

    #[test]
    fn project_lands_on_the_boundary(d in 2usize..=4, c in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let dom = Domain::unit_ball(d);
        let x = Point::from_slice(&c[..d]);
        prop_assume!(x.norm() > 1e-3);
        let y = dom.project(&x);
        prop_assert!(dom.signed_distance(&y).abs() < 1e-12);
        let h = Domain::half_space(d);
        prop_assert!(h.signed_distance(&h.project(&x)).abs() < 1e-12);
    }

    #[test]
    fn exterior_rejects_beta_at_or_below_one_over_p(p in 1.01f64..10.0, t in 0.0f64..1.0) {
        let center = Point::from_slice(&[1.0, 0.0]);
        let kind = ExteriorKind::Power { center, cap: 1.0 };
        let beta = t / p;
        prop_assert!(matches!(ExteriorFunction::new(kind, p, beta), Err(_)));
        prop_assert!(ExteriorFunction::new(kind, p, 1.0 / p + 0.01).is_ok());
    }

    #[test]
    fn overall_verdict_rule(vs in proptest::collection::vec((0u8..3, any::<bool>()), 0..8)) {
        let v = |k: u8| [Verdict::Consistent, Verdict::Violated, Verdict::Inconclusive][k as usize];
        let checks: Vec<Check> = vs.iter().map(|&(k, e)| Check::new("c", "op", "t", v(k), "").expecting_violation(e)).collect();
        // a check's effective outcome: a flagged violation counts as a pass, a flagged pass as inconclusive
        let eff: Vec<Verdict> = vs.iter().map(|&(k, e)| match (v(k), e) {
            (Verdict::Violated, true) => Verdict::Consistent,
            (Verdict::Consistent, true) => Verdict::Inconclusive,
            (x, _) => x,
        }).collect();
        let want = if eff.is_empty() {
            Verdict::Inconclusive
        } else if eff.contains(&Verdict::Violated) {
            Verdict::Violated
        } else if eff.contains(&Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Consistent
        };
        prop_assert_eq!(overall(&checks), want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn envelope_is_rotation_invariant_at_the_centre(alpha in 0.1f64..1.9, rho in 1.01f64..1.95, a in 0.0f64..6.3, b in 0.0f64..6.3) {
        let dom = Domain::unit_ball(2);
        let env = PoissonEnvelope::new(KernelSuite::new(BernsteinFunction::stable(alpha).unwrap(), 2).unwrap(), dom).unwrap();
        let x = Point::zeros(2);
        let z = rotate2(&Point::from_slice(&[rho, 0.0]), a);
        let v1 = env.eval(&x, &z).unwrap().value;
        let v2 = env.eval(&x, &rotate2(&z, b)).unwrap().value;
        prop_assert!((v1 - v2).abs() <= 1e-10 * v1.abs(), "{v1} vs {v2}");
    }

    #[test]
    fn region_chain_on_random_points(phi in any_family(), d in 2usize..=3, lr in -4.0f64..0.0, dir in proptest::collection::vec(-1.0f64..1.0, 3)) {
        let dom = Domain::unit_ball(d);
        let mut xi = Point::zeros(d);
        xi[0] = 1.0;
        let reg = ApproachRegion::new(dom.clone(), phi, xi, 0.3, 1.0, 2.0).unwrap();
        let (r_max, _) = dom.lipschitz();
        let mut u = Point::from_slice(&dir[..d]);
        u[0] = -u[0].abs();
        prop_assume!(u.norm() > 0.1);
        let x = xi + u * (r_max * 10f64.powf(lr) / u.norm());
        prop_assume!(dom.contains(&x));
        if reg.in_region(&x, RegionKind::Stolz) {
            prop_assert!(reg.in_region(&x, RegionKind::TPrime));
        }
        if reg.in_region(&x, RegionKind::TPrime) {
            prop_assert!(reg.in_region(&x, RegionKind::T));
        }
    }

    #[test]
    fn boundary_mean_bounded_and_exact_for_constants(c in -5.0f64..5.0, beta in 0.1f64..1.0, r in 0.01f64..0.2, th in 0.0f64..6.3) {
        let dom = Domain::unit_ball(2);
        let xi = Point::from_slice(&[th.cos(), th.sin()]);
        let k = boundary_mean(&dom, &ExteriorFunction::constant(c), &xi, r, 500).unwrap();
        prop_assert!((k.value - c).abs() <= 1e-12 * c.abs().max(1.0));
        let f = ExteriorFunction::power(xi, beta, 1.0).unwrap();
        let m = boundary_mean(&dom, &f, &xi, r, 500).unwrap();
        prop_assert!(m.value.abs() <= f.sup_bound().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn hypotheses_hold_iff_the_stated_inequalities(alpha in 0.2f64..1.9, p_inv in 0.0f64..0.9, beta in 0.05f64..1.0, gamma in 0.01f64..0.9) {
        // the low end of the range stands for p = inf
        let p_inv = if p_inv < 0.05 { 0.0 } else { p_inv };
        let p = if p_inv == 0.0 { f64::INFINITY } else { 1.0 / p_inv };
        // (A-3) exponent of lambda^{alpha/2}
        let delta = 1.0 - alpha / 2.0;
        // stay clear of the edges, where the fitted delta differs from 1 - alpha/2 by rounding
        let margin = 2e-3;
        prop_assume!((beta - p_inv).abs() > margin && (gamma - (beta - p_inv)).abs() > margin && (delta - p_inv).abs() > margin);
        let ps = if p.is_infinite() { "\"inf\"".to_string() } else { format!("{p:?}") };
        let text = format!(
            "experiment = \"tangential-limit\"\n[family]\nfamily = \"stable\"\nalpha = {alpha:?}\n[exterior]\nkind = \"power\"\np = {ps}\nbeta = {beta:?}\n[region]\ngamma = {gamma:?}\ngeneric = 1\n"
        );
        let want = beta > p_inv && gamma < beta - p_inv && delta > p_inv;
        match ExperimentConfig::parse(&text) {
            Ok(_) => prop_assert!(want, "accepted: {text}"),
            Err(e) => {
                prop_assert!(!want, "rejected {text}: {e}");
                prop_assert!(matches!(e, LabError::Hypothesis(_)), "{e:?}");
            }
        }
    }

    #[test]
    fn config_roundtrips_through_toml(alpha in 0.2f64..1.9, seed in 0..=i64::MAX as u64, n in 1000usize..100_000, gamma in 0.05f64..0.4, lv in 5i32..10) {
        let mut cfg = ExperimentConfig::new(ExperimentKind::TangentialLimit);
        cfg.family.alpha = Some(alpha);
        cfg.mc.seed = seed;
        cfg.mc.n = n;
        cfg.region.gamma = gamma;
        cfg.tangential.levels = vec![lv, lv + 2, lv + 5];
        let text = toml::to_string(&cfg).unwrap();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn constant_data_is_harmonic_exactly(c in -3.0f64..3.0, seed in any::<u64>(), x0 in -0.8f64..0.8) {
        let dom = Domain::unit_ball(2);
        let stepper = SubordinatorStepper::new(BernsteinFunction::stable(1.0).unwrap(), DEFAULT_EPS).unwrap();
        let x = Point::from_slice(&[x0, 0.1]);
        let est = estimate_u_f(&dom, &ExteriorFunction::constant(c), &x, &stepper, &StepControl::default(), &McParams::new(1000, seed, "const")).unwrap();
        prop_assert_eq!(est.value, c);
        prop_assert_eq!(est.se, 0.0);
    }

    #[test]
    fn estimates_do_not_depend_on_workers(seed in any::<u64>(), alpha in 0.5f64..1.8) {
        let dom = Domain::unit_ball(2);
        let stepper = SubordinatorStepper::new(BernsteinFunction::stable(alpha).unwrap(), DEFAULT_EPS).unwrap();
        let f = ExteriorFunction::power(Point::from_slice(&[1.0, 0.0]), 0.8, 1.0).unwrap();
        let x = Point::from_slice(&[0.5, 0.2]);
        let params = McParams::new(1000, seed, "workers");
        let one = estimate_u_f(&dom, &f, &x, &stepper, &StepControl::default(), &params.with_workers(1)).unwrap();
        let three = estimate_u_f(&dom, &f, &x, &stepper, &StepControl::default(), &params.with_workers(3)).unwrap();
        prop_assert_eq!(one.value, three.value);
        prop_assert_eq!(one.se, three.se);
        prop_assert_eq!(one.censored, three.censored);
    }
}
