use super::config::{q_limit, ExperimentConfig, HypothesisStatus};
use super::report::{num, Check, ExperimentReport, Table, Verdict};
use crate::bernstein::{fit_a3, ScalingGrid};
use crate::error::Result;
use crate::exterior::{boundary_limit, corollary32, lemma31_check, oscillation_functionals, trend, SlabIntegral, Trend};
use crate::montecarlo::{boundary_decay_check, McParams, SubordinatorStepper};

/// Second default exponent when q is not configured, kept moderate because 1/(1−δ) is
/// unbounded as δ → 1.
const Q_DEFAULT_MAX: f64 = 2.0;

fn spread(rows: &[SlabIntegral]) -> f64 {
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    hi / lo
}

fn bounded_check(name: String, op: &str, factor: f64, rows: &[SlabIntegral]) -> Check {
    let s = spread(rows);
    Check::new(
        name,
        op,
        &format!("max/min of the normalised ratio over the dyadic scales below {factor}"),
        Verdict::from_bool(s.is_finite() && s < factor),
        format!("ratios in [{:.4}, {:.4}], variation {s:.4}", rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min), rows.iter().map(|r| r.ratio).fold(0.0, f64::max)),
    )
}

/// Slab integrals, ball integrals, oscillation functionals, the boundary mean and the decay
/// of u₂ for each configured family.
pub fn run_lemma_suite(cfg: &ExperimentConfig, hyp: &HypothesisStatus) -> Result<(ExperimentReport, Vec<Table>)> {
    let l = &cfg.lemma;
    let domain = cfg.domain.build()?;
    let xi = cfg.boundary_points(&domain)?[0];
    let f = cfg.exterior.build(&xi)?;
    let gamma = cfg.region.gamma;
    let (r_lip, _) = domain.lipschitz();
    let s = l.s.unwrap_or(r_lip / 2.0);
    let families = cfg.family_list();
    let base = McParams::new(cfg.mc.n, cfg.mc.seed, "lemma-suite").with_workers(cfg.mc.workers);
    let mut rep = ExperimentReport::new(cfg);
    let mut tables = Vec::new();
    let expected = !hyp.holds();
    for v in &hyp.violations {
        rep.notes.push(format!("counterexample mode: {v}"));
    }

    let bl = boundary_limit(&domain, &f, &xi, gamma, l.boundary_k_max, l.boundary_nodes)?;
    rep.constant("A", bl.limit);
    rep.constant("boundary_mean_diagnostic", bl.diagnostic);
    rep.check(Check::new(
        "boundary mean",
        "exterior::boundary_limit",
        "successive dyadic differences shrink and the limit is finite",
        if bl.converged && bl.limit.is_finite() { Verdict::Consistent } else { Verdict::Inconclusive },
        format!("A = {:.6e}, sup r^-gamma |A(2r) - A(r)| = {:.4e}", bl.limit, bl.diagnostic),
    ));
    let mut means = Table::new("boundary_means.dat", "r against A(xi, r)", &["r", "mean"]);
    for (r, m) in bl.radii.iter().zip(&bl.means) {
        means.push_nums(&[*r, *m]);
    }
    tables.push(means);

    for (fi, fc) in families.iter().enumerate() {
        let phi = fc.build()?;
        let name = phi.describe();
        let tag = format!("f{fi}");
        let delta = fit_a3(&phi, l.lambda0, &ScalingGrid::default())?.delta;
        let q_max = q_limit(delta);
        let qs = if l.q.is_empty() {
            let mid = (0.5 * (1.0 + q_max)).min(Q_DEFAULT_MAX);
            vec![1.0, mid]
        } else {
            l.q.clone()
        };
        rep.constant(format!("{tag}.delta"), delta);
        let mut slab = Table::new(format!("{tag}_slab.csv"), format!("{name}: slab and ball integrals"), &["kind", "q", "r", "lhs", "ratio"]);
        for &q in &qs {
            let mut rows = Vec::new();
            for &k in &l.levels {
                let r = 2f64.powi(-k);
                let row = lemma31_check(&domain, &phi, &xi, s, r, q, l.m, l.lambda0, delta)?;
                slab.push(vec!["slab".into(), num(q), num(r), num(row.lhs), num(row.ratio)]);
                rows.push(row);
            }
            rep.check(bounded_check(format!("{name}: slab integral, q = {q:.4}"), "exterior::lemma31_check", l.bounded_factor, &rows));
        }
        let mut rows = Vec::new();
        for &k in &l.levels {
            let r = 2f64.powi(-k);
            let row = corollary32(&domain, &phi, &xi, r)?;
            slab.push(vec!["ball".into(), num(1.0), num(r), num(row.lhs), num(row.ratio)]);
            rows.push(row);
        }
        rep.check(bounded_check(format!("{name}: ball integral"), "exterior::corollary32", l.bounded_factor, &rows));
        tables.push(slab);

        let mut osc = Table::new(format!("{tag}_oscillation.csv"), format!("{name}: oscillation functionals"), &["r", "e_val", "f_val"]);
        let (mut es, mut fs) = (Vec::new(), Vec::new());
        for &k in &l.osc_levels {
            let o = oscillation_functionals(&domain, &f, &phi, &xi, 2f64.powi(-k), gamma, l.osc_pairs)?;
            osc.push_nums(&[o.r, o.e_val, o.f_val]);
            es.push(o.e_val);
            fs.push(o.f_val);
        }
        tables.push(osc);
        for (label, vals) in [("weighted oscillation", &es), ("plain oscillation", &fs)] {
            let (v, detail) = if f.is_constant() {
                (Verdict::Consistent, "f is constant; the functional vanishes".to_string())
            } else {
                let t = trend(vals);
                let v = match t {
                    Trend::Decreasing => Verdict::Consistent,
                    Trend::Increasing => Verdict::Violated,
                    Trend::Mixed => Verdict::Inconclusive,
                };
                (v, format!("trend {t:?} over {} levels, first {:.4e}, last {:.4e}", vals.len(), vals[0], vals[vals.len() - 1]))
            };
            rep.check(
                Check::new(
                    format!("{name}: {label}"),
                    "exterior::oscillation_functionals",
                    "strictly decreasing across the dyadic levels",
                    v,
                    detail,
                )
                .expecting_violation(expected),
            );
        }

        if l.decay {
            let stepper = SubordinatorStepper::new(phi.clone(), cfg.mc.eps)?;
            let n = domain.inward_normal(&xi)?;
            let pts: Vec<_> = l.decay_levels.iter().map(|&k| xi + n * 2f64.powi(-k)).collect();
            let t = boundary_decay_check(&domain, &xi, l.decay_r0, &pts, &stepper, &cfg.mc.control(), &base.child("decay", fi as u64))?;
            let mut dt = Table::new(format!("{tag}_decay.csv"), format!("{name}: u_2 along the inward normal"), &["dist_xi", "u2", "se"]);
            for r in &t.rows {
                rep.samples += cfg.mc.n as u64;
                dt.push_nums(&[r.dist_xi, r.u2, r.se]);
            }
            tables.push(dt);
            rep.check(Check::new(
                format!("{name}: u2 vanishes at the boundary"),
                "montecarlo::boundary_decay_check",
                "u_2 decreases along the normal (3 SE noise allowance per step)",
                match t.trend {
                    Trend::Decreasing => Verdict::Consistent,
                    Trend::Increasing => Verdict::Violated,
                    Trend::Mixed => Verdict::Inconclusive,
                },
                format!("u2 from {:.4e} to {:.4e}", t.rows[0].u2, t.rows[t.rows.len() - 1].u2),
            ));
        }
    }
    Ok((rep, tables))
}
