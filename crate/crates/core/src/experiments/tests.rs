use std::fs;

use super::*;
use crate::bernstein::Family;
use crate::LabError;

fn write(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn parse_defaults_and_inf() {
    let cfg = ExperimentConfig::parse(
        r#"
        experiment = "tangential-limit"
        [exterior]
        kind = "power"
        beta = 0.8
        p = inf
        "#,
    )
    .unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::TangentialLimit);
    assert!(cfg.exterior.p.is_infinite());
    assert_eq!(cfg.family.spec().alpha, 1.0);
    assert_eq!(cfg.tangential.levels, vec![5, 10, 15, 20, 25, 30]);
    let json = serde_json::to_string(&cfg).unwrap();
    assert!(json.contains("\"p\":\"inf\""));
    assert!(!json.contains("workers"));
}

#[test]
fn unknown_keys_are_config_errors() {
    let e = ExperimentConfig::parse("experiment = \"lemma-suite\"\nbogus = 1\n").unwrap_err();
    assert!(matches!(e, LabError::Config(_)), "{e:?}");
    let e = ExperimentConfig::parse("experiment = \"nope\"\n").unwrap_err();
    assert!(matches!(e, LabError::Config(_)));
}

#[test]
fn includes_merge_deeply_and_the_includer_wins() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("shared")).unwrap();
    write(&dir.path().join("shared"), "family.toml", "[family]\nfamily = \"stable\"\nalpha = 1.5\n[mc]\nn = 5000\nseed = 9\n");
    write(&dir.path().join("shared"), "domain.toml", "include = \"family.toml\"\n[domain]\nshape = \"ball\"\ndim = 3\n");
    let top = write(
        dir.path(),
        "run.toml",
        "include = [\"shared/domain.toml\"]\nexperiment = \"assumptions-report\"\n[mc]\nseed = 11\n",
    );
    let cfg = ExperimentConfig::load(&top).unwrap();
    assert_eq!(cfg.family.spec().alpha, 1.5);
    assert_eq!(cfg.domain.dim(), 3);
    assert_eq!(cfg.mc.n, 5000);
    assert_eq!(cfg.mc.seed, 11);
}

#[test]
fn include_cycles_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.toml", "include = \"b.toml\"\nexperiment = \"lemma-suite\"\n");
    let b = write(dir.path(), "b.toml", "include = \"a.toml\"\n");
    assert!(matches!(ExperimentConfig::load(&b), Err(LabError::Config(_))));
    assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.toml")), Err(LabError::Config(_))));
}

#[test]
fn hypothesis_set_is_enforced_at_load() {
    let base = "experiment = \"tangential-limit\"\n[exterior]\nkind = \"power\"\n";
    // gamma >= beta - 1/p
    let e = ExperimentConfig::parse(&format!("{base}beta = 0.8\n[region]\ngamma = 0.9\n")).unwrap_err();
    assert!(matches!(e, LabError::Hypothesis(_)), "{e:?}");
    // beta <= 1/p
    let e = ExperimentConfig::parse(&format!("{base}beta = 0.4\np = 2.0\n")).unwrap_err();
    assert!(matches!(e, LabError::Hypothesis(_)), "{e:?}");
    // p <= 1
    let e = ExperimentConfig::parse(&format!("{base}beta = 0.8\np = 1.0\n")).unwrap_err();
    assert!(matches!(e, LabError::Hypothesis(_)), "{e:?}");
    // delta = 1/2 for stable alpha = 1, so p = 1.5 breaks delta > 1/p even though beta - 1/p > gamma
    let e = ExperimentConfig::parse(&format!("{base}beta = 0.99\np = 1.5\n[region]\ngamma = 0.2\n")).unwrap_err();
    assert!(e.to_string().contains("delta"), "{e}");
    // the same config runs in counterexample mode, with the violation recorded
    let cfg = ExperimentConfig::parse(&format!("counterexample = true\n{base}beta = 0.8\n[region]\ngamma = 0.9\n")).unwrap();
    let status = cfg.validate().unwrap();
    assert_eq!(status.violations.len(), 1);
}

#[test]
fn q_at_or_above_the_limit_is_rejected() {
    // stable alpha = 1: delta = 1/2, so q must lie in [1, 2)
    let text = |q: f64| format!("experiment = \"lemma-suite\"\n[[families]]\nfamily = \"stable\"\nalpha = 1.0\n[lemma]\nq = [{q}]\ndecay = false\n");
    assert!(ExperimentConfig::parse(&text(1.5)).is_ok());
    let e = ExperimentConfig::parse(&text(2.0)).unwrap_err();
    assert!(matches!(e, LabError::Hypothesis(_)), "{e:?}");
    assert!(ExperimentConfig::parse(&text(0.5)).is_err());
}

#[test]
fn structural_validation() {
    let e = ExperimentConfig::parse("experiment = \"stable-oracle\"\n[family]\nfamily = \"geometric\"\n").unwrap_err();
    assert!(matches!(e, LabError::Config(_)));
    let e = ExperimentConfig::parse("experiment = \"kernel-bounds\"\n[mc]\nn = 10\n").unwrap_err();
    assert!(matches!(e, LabError::Config(_)));
    let e = ExperimentConfig::parse("experiment = \"kernel-bounds\"\n[kernel]\npoints = [[2.0, 0.0]]\n").unwrap_err();
    assert!(e.to_string().contains("not in D"));
    let e = ExperimentConfig::parse("experiment = \"tangential-limit\"\n[region]\nxi = [[0.5, 0.0]]\n").unwrap_err();
    assert!(e.to_string().contains("boundary"));
    let e = ExperimentConfig::parse("experiment = \"tangential-limit\"\n[tangential]\nlevels = [2, 5]\n").unwrap_err();
    assert!(matches!(e, LabError::Config(_)));
}

#[test]
fn generic_point_is_on_the_boundary() {
    let cfg = ExperimentConfig::new(ExperimentKind::TangentialLimit);
    let dom = cfg.domain.build().unwrap();
    let xi = cfg.boundary_points(&dom).unwrap()[0];
    assert!(dom.signed_distance(&xi).abs() < 1e-15);
    assert!((xi[0] - 0.7f64.cos()).abs() < 1e-12);
    let g = crate::geometry::Domain::half_space(3);
    assert!(generic_boundary_point(&g).last().abs() < 1e-15);
    for d in [2, 3] {
        let dom = crate::geometry::Domain::unit_ball(d);
        let pts = generic_boundary_points(&dom, 5).unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert!(dom.signed_distance(p).abs() < 1e-15);
            assert!(p.as_slice().iter().all(|c| c.abs() > 0.1), "{p:?} too close to a coordinate plane");
            for q in &pts[..i] {
                assert!(p.dist(q) > 0.3);
            }
        }
    }
    assert!(generic_boundary_points(&dom, 6).is_err());
}

#[test]
fn overall_verdict_rules() {
    let c = |v: Verdict, e: bool| Check::new("c", "op", "t", v, "").expecting_violation(e);
    assert_eq!(overall(&[]), Verdict::Inconclusive);
    assert_eq!(overall(&[c(Verdict::Consistent, false)]), Verdict::Consistent);
    assert_eq!(overall(&[c(Verdict::Consistent, false), c(Verdict::Violated, false)]), Verdict::Violated);
    assert_eq!(overall(&[c(Verdict::Violated, true)]), Verdict::Consistent);
    assert_eq!(overall(&[c(Verdict::Consistent, true)]), Verdict::Inconclusive);
    assert_eq!(overall(&[c(Verdict::Inconclusive, false), c(Verdict::Violated, true)]), Verdict::Inconclusive);
    assert_eq!(exit_code(Verdict::Consistent), 0);
    assert_eq!(exit_code(Verdict::Violated), 2);
    assert_eq!(exit_code(Verdict::Inconclusive), 3);
}

#[test]
fn tables_format_reproducibly() {
    let mut t = Table::new("a.csv", "demo", &["x", "y"]);
    t.push_nums(&[0.1, f64::INFINITY]);
    let mut buf = Vec::new();
    t.write(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n1e-1,inf\n");
    let mut d = Table::new("a.dat", "demo", &["x", "y"]);
    d.push_nums(&[1.0, 2.5]);
    let mut buf = Vec::new();
    d.write(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "# x y\n1e0 2.5e0\n");
    assert_eq!(num(0.1 + 0.2).parse::<f64>().unwrap(), 0.1 + 0.2);
}

#[test]
fn assumptions_report_small() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::AssumptionsReport);
    cfg.families = vec![FamilyConfig::stable(1.0), FamilyConfig { family: Family::Relativistic, alpha: None, kappa: None, m: None }];
    cfg.assumptions.per_decade = 20;
    let out = run(&cfg).unwrap();
    let r = &out.report;
    assert_eq!(r.overall, Verdict::Consistent, "{:#?}", r.checks);
    assert!((r.constants["stable(alpha=1).d2.delta"] - 0.5).abs() < 1e-3, "{:?}", r.constants.keys().collect::<Vec<_>>());
    // relativistic in d = 2 fails (A-6), as its listed constraint d > 2 predicts
    assert!(out.tables[0].rows.iter().any(|row| row[0] == "relativistic" && row[4] == "2" && row[16] == "fails"));
}

#[test]
fn tangential_with_constant_data_has_zero_gap() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::TangentialLimit);
    cfg.exterior = ExteriorConfig { kind: ExteriorTag::Constant, value: 0.25, ..ExteriorConfig::default() };
    cfg.mc.n = 1000;
    cfg.tangential.levels = vec![5, 7];
    cfg.tangential.boundary_k_max = 10;
    cfg.tangential.boundary_nodes = 2000;
    cfg.tangential.diag_angles = 32;
    cfg.tangential.diag_panels = 30;
    cfg.region.generic = 1;
    let out = run(&cfg).unwrap();
    let c = out.report.find("xi0: gap along the tangential curve").unwrap();
    assert_eq!(c.verdict, Verdict::Consistent, "{c:?}");
    let near = out.report.find("xi0: near sum").unwrap();
    assert!(near.detail.contains("0e0"), "{near:?}");
    let curve = &out.tables[0];
    assert_eq!(curve.rows.len(), 2);
    assert!(curve.rows.iter().all(|r| r[5] == "0e0"));
}

#[test]
fn lemma_suite_counterexample_grows() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::LemmaSuite);
    cfg.counterexample = true;
    cfg.families = vec![FamilyConfig::stable(1.0)];
    cfg.region.gamma = 1.2;
    cfg.lemma.decay = false;
    cfg.lemma.levels = vec![4, 6];
    cfg.lemma.osc_pairs = 20_000;
    cfg.lemma.boundary_k_max = 10;
    cfg.lemma.boundary_nodes = 5000;
    let out = run(&cfg).unwrap();
    let osc = out.report.find("stable(alpha=1): plain oscillation").unwrap();
    assert!(osc.expected_violation);
    assert_eq!(osc.verdict, Verdict::Violated, "{osc:?}");
    assert_ne!(out.report.overall, Verdict::Violated);
}
