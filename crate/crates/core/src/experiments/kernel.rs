use super::config::ExperimentConfig;
use super::report::{num, Check, ExperimentReport, Table, Verdict};
use crate::bernstein::{BernsteinFunction, Family, LogGrid};
use crate::error::{LabError, Result};
use crate::geometry::Domain;
use crate::kernels::{verify_comparability, KernelKind, KernelSuite, PoissonEnvelope};
use crate::montecarlo::{
    compare_stable_ball, estimate_exit_histogram, fit_sandwich, isotropy_test, ExitHistogram, ExteriorBins, McParams,
    SpoolWriter, SubordinatorStepper,
};
use crate::point::Point;

/// Relative spread of exact/surrogate accepted as "constant in r".
pub const RATIO_FLATNESS: f64 = 1e-10;
/// Relative error accepted between quadrature and closed-form j.
pub const QUADRATURE_AGREEMENT: f64 = 1e-6;

struct Setup {
    domain: Domain,
    phi: BernsteinFunction,
    stepper: SubordinatorStepper,
    bins: ExteriorBins,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let domain = cfg.domain.build()?;
    let phi = cfg.family.build()?;
    let stepper = SubordinatorStepper::new(phi.clone(), cfg.mc.eps)?;
    let bins = ExteriorBins::around_ball(&domain, cfg.mc.shells, cfg.mc.sectors)?;
    Ok(Setup { domain, phi, stepper, bins })
}

fn histogram(cfg: &ExperimentConfig, s: &Setup, x: &Point, params: &McParams) -> Result<ExitHistogram> {
    estimate_exit_histogram(&s.domain, x, &s.bins, &s.stepper, &cfg.mc.control(), params)
}

fn histogram_table(file: String, h: &ExitHistogram) -> Table {
    let mut t = Table::new(
        file,
        "exit histogram: k_hat = hits/(N·volume) with batch SE",
        &["bin", "shell", "sector", "r_lo", "r_hi", "delta", "volume", "hits", "prob", "k_hat", "se"],
    );
    for r in &h.rows {
        t.push(vec![
            r.bin.to_string(),
            r.shell.to_string(),
            r.sector.to_string(),
            num(r.r_lo),
            num(r.r_hi),
            num(r.delta),
            num(r.volume),
            r.hits.to_string(),
            num(r.prob),
            num(r.k_hat),
            num(r.se),
        ]);
    }
    t
}

/// Sandwich fit at N and, optionally, at 2N from an independent stream; returns the checks.
#[allow(clippy::too_many_arguments)]
fn sandwich_checks(
    cfg: &ExperimentConfig,
    s: &Setup,
    rep: &mut ExperimentReport,
    tables: &mut Vec<Table>,
    tag: &str,
    x: &Point,
    h: &ExitHistogram,
    window: [f64; 2],
    doubling: Option<(McParams, f64)>,
) -> Result<()> {
    let env = PoissonEnvelope::new(KernelSuite::new(s.phi.clone(), s.domain.dim())?, s.domain.clone())?;
    let op = "montecarlo::fit_sandwich";
    let fit = match fit_sandwich(h, &env, (window[0], window[1])) {
        Ok(f) => f,
        Err(e) => {
            rep.check(Check::failed(format!("{tag}: sandwich constant"), op, "finite c", &e));
            return Ok(());
        }
    };
    rep.constant(format!("{tag}.sandwich.c"), fit.c);
    rep.constant(format!("{tag}.sandwich.ratio_min"), fit.ratio_min);
    rep.constant(format!("{tag}.sandwich.ratio_max"), fit.ratio_max);
    let c_max = cfg.kernel.c_max;
    rep.check(Check::new(
        format!("{tag}: sandwich constant"),
        op,
        &format!("c = max(sup K/E, sup E/K) over bins with delta in [{}, {}] lies in [1, {c_max}]", window[0], window[1]),
        Verdict::from_bool(fit.c >= 1.0 && fit.c <= c_max && fit.bins_used > 0),
        format!("c = {:.4} over {} bins{}", fit.c, fit.bins_used, if fit.surrogate { " (surrogate j)" } else { "" }),
    ));
    let mut ratios = Table::new(format!("{tag}_sandwich.dat"), "bin index and K_hat/E at the bin centroid", &["bin", "ratio"]);
    for (b, r) in &fit.ratios {
        ratios.push(vec![b.to_string(), num(*r)]);
    }
    tables.push(ratios);
    if let Some((p2, tol)) = doubling {
        let h2 = histogram(cfg, s, x, &p2)?;
        rep.samples += h2.n;
        match fit_sandwich(&h2, &env, (window[0], window[1])) {
            Ok(f2) => {
                let change = (f2.c / fit.c - 1.0).abs();
                rep.constant(format!("{tag}.sandwich.c_doubled"), f2.c);
                rep.check(Check::new(
                    format!("{tag}: sandwich stable under doubling N"),
                    op,
                    &format!("|c(2N)/c(N) - 1| < {tol}"),
                    Verdict::from_bool(change < tol),
                    format!("c(N) = {:.4}, c(2N) = {:.4}, change {:.4}", fit.c, f2.c, change),
                ));
            }
            Err(e) => rep.check(Check::failed(format!("{tag}: sandwich stable under doubling N"), op, "refit", &e)),
        }
    }
    Ok(())
}

fn comparability_checks(s: &Setup, cfg: &ExperimentConfig, rep: &mut ExperimentReport, tables: &mut Vec<Table>) -> Result<()> {
    let k = &cfg.kernel;
    let suite = KernelSuite::new(s.phi.clone(), s.domain.dim())?;
    let radii = LogGrid::new(k.r_min, k.r_max, k.per_decade)?.points();
    let stable = s.phi.family() == Family::Stable;
    for (which, label) in [(KernelKind::Jump, "j"), (KernelKind::Green, "g")] {
        let rows = suite.curve(which, &radii)?;
        let mut t = Table::new(format!("{label}_ratio.csv"), format!("{label}: exact, surrogate and their ratio"), &["r", "exact", "surrogate", "ratio"]);
        let mut dat = Table::new(format!("{label}_ratio.dat"), format!("{label}: exact/surrogate against r"), &["r", "ratio"]);
        for r in &rows {
            t.push(vec![num(r.r), r.exact.map(num).unwrap_or_default(), num(r.surrogate), r.ratio.map(num).unwrap_or_default()]);
            if let Some(q) = r.ratio {
                dat.push_nums(&[r.r, q]);
            }
        }
        tables.push(t);
        tables.push(dat);
        let op = "kernels::verify_comparability";
        let exact = |r: f64| match which {
            KernelKind::Jump => suite.jump_density(r),
            KernelKind::Green => suite.green_exact(r),
        };
        let surrogate = |r: f64| match which {
            KernelKind::Jump => suite.jump_surrogate(r),
            KernelKind::Green => suite.green_surrogate(r),
        };
        match verify_comparability(exact, surrogate, &radii) {
            Ok(c) => {
                rep.constant(format!("{label}.comparability.c"), c.c);
                let spread = c.c_high / c.c_low - 1.0;
                if stable {
                    rep.check(Check::new(
                        format!("{label}: exact/surrogate ratio constant"),
                        op,
                        &format!("relative spread of the ratio over r in [{}, {}] below {RATIO_FLATNESS:e}", k.r_min, k.r_max),
                        Verdict::from_bool(spread < RATIO_FLATNESS),
                        format!("ratio in [{:.15e}, {:.15e}], spread {spread:e}", c.c_low, c.c_high),
                    ));
                } else {
                    rep.check(Check::new(
                        format!("{label}: comparability"),
                        op,
                        "exact/surrogate bounded above and below on the grid",
                        Verdict::Consistent,
                        format!("c = {:.4}", c.c),
                    ));
                }
            }
            // exact kernels without a closed form are not an error of the estimate
            Err(e @ LabError::SurrogateOnly(_)) => rep.notes.push(format!("{label}: {e}")),
            Err(e @ LabError::Comparability { .. }) => rep.check(Check::new(
                format!("{label}: comparability"),
                op,
                "exact/surrogate bounded above and below on the grid",
                Verdict::Violated,
                e.to_string(),
            )),
            Err(e) => rep.check(Check::failed(format!("{label}: comparability"), op, "ratio grid", &e)),
        }
    }
    if stable {
        let mut worst = 0.0f64;
        for r in [0.1, 1.0, 10.0] {
            let q = suite.jump_density_quadrature(r)?;
            let c = suite.jump_density(r)?;
            worst = worst.max((q / c - 1.0).abs());
        }
        rep.constant("j.quadrature_rel_err", worst);
        rep.check(Check::new(
            "j: subordination quadrature matches closed form",
            "kernels::KernelSuite::jump_density_quadrature",
            &format!("relative error at r in {{0.1, 1, 10}} below {QUADRATURE_AGREEMENT:e}"),
            Verdict::from_bool(worst < QUADRATURE_AGREEMENT),
            format!("max relative error {worst:e}"),
        ));
    }
    Ok(())
}

/// Configured start points, or the centre of the ball.
fn start_points(domain: &Domain, list: &[Vec<f64>]) -> Vec<Point> {
    if list.is_empty() {
        vec![centre(domain)]
    } else {
        list.iter().map(|c| Point::from_slice(c)).collect()
    }
}

fn centre(domain: &Domain) -> Point {
    let (lo, hi) = domain.bounding_box();
    (lo + hi) * 0.5
}

/// Exit histograms at the configured points, sandwich fits against the Poisson envelope,
/// tail masses and the j/g comparability curves.
pub fn run_kernel_bounds(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<Table>)> {
    let s = setup(cfg)?;
    let mut rep = ExperimentReport::new(cfg);
    let mut tables = Vec::new();
    let k = &cfg.kernel;
    let base = McParams::new(cfg.mc.n, cfg.mc.seed, "kernel-bounds").with_workers(cfg.mc.workers);
    for (i, x) in start_points(&s.domain, &k.points).iter().enumerate() {
        let tag = format!("x{i}");
        let params = base.child("histogram", i as u64);
        let h = histogram(cfg, &s, x, &params)?;
        rep.samples += h.n;
        tables.push(histogram_table(format!("{tag}_histogram.csv"), &h));
        let delta = s.domain.dist_to_boundary(x);
        rep.constant(format!("{tag}.delta"), delta);
        rep.constant(format!("{tag}.tail_mass"), h.tail_mass);
        rep.constant(format!("{tag}.censored_fraction"), h.censored_fraction());
        if delta <= k.near_delta {
            rep.check(Check::new(
                format!("{tag}: tail mass"),
                "montecarlo::estimate_exit_histogram",
                &format!("mass beyond the outer shell below {} for delta(x) <= {}", k.tail_max, k.near_delta),
                Verdict::from_bool(h.tail_mass < k.tail_max),
                format!("tail mass {:.4} at delta(x) = {delta:.4}", h.tail_mass),
            ));
        }
        let doubling = k.doubling.then(|| (base.child("doubled", i as u64).with_n(2 * cfg.mc.n), cfg.oracle.doubling_tol));
        sandwich_checks(cfg, &s, &mut rep, &mut tables, &tag, x, &h, k.delta_window, doubling)?;
    }
    comparability_checks(&s, cfg, &mut rep, &mut tables)?;
    Ok((rep, tables))
}

/// Binned exit law of the stable process from a ball against the closed-form Poisson kernel.
pub fn run_stable_oracle(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<Table>, Vec<(String, Vec<u8>)>)> {
    let s = setup(cfg)?;
    let o = &cfg.oracle;
    let alpha = s.phi.alpha();
    let mut rep = ExperimentReport::new(cfg);
    let mut tables = Vec::new();
    let mut blobs = Vec::new();
    let x = start_points(&s.domain, &o.x.clone().into_iter().collect::<Vec<_>>())[0];
    let params = McParams::new(cfg.mc.n, cfg.mc.seed, "stable-oracle").with_workers(cfg.mc.workers);
    let h = histogram(cfg, &s, &x, &params)?;
    rep.samples += h.n;
    let censored = h.censored_fraction();
    rep.constant("censored_fraction", censored);
    rep.constant("tail_mass", h.tail_mass);
    rep.check(Check::new(
        "censored fraction",
        "montecarlo::estimate_exit_histogram",
        &format!("censored/N < {:e}", o.max_censored),
        Verdict::from_bool(censored < o.max_censored),
        format!("{} of {} censored", h.censored, h.n),
    ));
    let op = "montecarlo::compare_stable_ball";
    match compare_stable_ball(&h, alpha) {
        Ok(or) => {
            rep.constant("oracle.max_abs_z", or.max_abs_z);
            rep.constant("oracle.chi2", or.chi2);
            rep.constant("oracle.p_value", or.p_value);
            rep.check(Check::new(
                "per-bin agreement",
                op,
                "|k_hat - K| <= 3 SE in every bin",
                Verdict::from_bool(or.per_bin_ok),
                format!("max |z| = {:.3} over {} bins", or.max_abs_z, or.rows.len()),
            ));
            rep.check(Check::new(
                "joint chi-square",
                op,
                "Pearson chi-square over bins with >= 200 hits (rest lumped), p > 0.05",
                Verdict::from_bool(or.chi2_ok),
                format!("chi2 = {:.3}, dof = {}, p = {:.4}", or.chi2, or.dof, or.p_value),
            ));
            let mut t = Table::new(
                "oracle.csv",
                "empirical and closed-form kernel per bin",
                &["bin", "shell", "sector", "r_lo", "r_hi", "delta", "hits", "prob", "expected_prob", "k_hat", "expected_k", "se", "z"],
            );
            let mut dat = Table::new("oracle_radial.dat", "shell mid-radius against k_hat/K averaged over sectors", &["r_mid", "ratio"]);
            let mut shell_acc: Vec<(f64, f64, usize)> = vec![(0.0, 0.0, 0); cfg.mc.shells];
            for (row, b) in or.rows.iter().zip(&h.rows) {
                t.push(vec![
                    b.bin.to_string(),
                    b.shell.to_string(),
                    b.sector.to_string(),
                    num(b.r_lo),
                    num(b.r_hi),
                    num(b.delta),
                    row.hits.to_string(),
                    num(b.prob),
                    num(row.expected_prob),
                    num(b.k_hat),
                    num(row.expected_k),
                    num(b.se),
                    num(row.z),
                ]);
                let acc = &mut shell_acc[b.shell];
                acc.0 = 0.5 * (b.r_lo + b.r_hi);
                acc.1 += b.k_hat / row.expected_k;
                acc.2 += 1;
            }
            for (r, sum, n) in shell_acc {
                if n > 0 {
                    dat.push_nums(&[r, sum / n as f64]);
                }
            }
            tables.push(t);
            tables.push(dat);
        }
        Err(e) => rep.check(Check::failed("per-bin agreement", op, "closed-form bin masses", &e)),
    }
    if x.dist(&centre(&s.domain)) < 1e-12 {
        match isotropy_test(&h) {
            Ok((chi2, dof, p)) => rep.check(Check::new(
                "isotropy",
                "montecarlo::isotropy_test",
                "chi-square of sector counts against uniform, p > 0.01",
                Verdict::from_bool(p > 0.01),
                format!("chi2 = {chi2:.3}, dof = {dof}, p = {p:.4}"),
            )),
            Err(e) => rep.check(Check::failed("isotropy", "montecarlo::isotropy_test", "sector counts", &e)),
        }
    }
    tables.push(histogram_table("histogram.csv".into(), &h));
    let doubling = o.doubling.then(|| (params.child("doubled", 0).with_n(2 * cfg.mc.n), o.doubling_tol));
    sandwich_checks(cfg, &s, &mut rep, &mut tables, "x0", &x, &h, o.delta_window, doubling)?;
    if cfg.mc.spool {
        let mut w = SpoolWriter::new(Vec::new(), s.domain.dim())?;
        crate::montecarlo::for_each_exit(&s.domain, &x, &s.stepper, &cfg.mc.control(), &params, |_, e| w.push(&e))?;
        blobs.push(("exits.spool".to_string(), w.finish()?));
    }
    Ok((rep, tables, blobs))
}
