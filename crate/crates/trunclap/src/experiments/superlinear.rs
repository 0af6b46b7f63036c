use trunclap_core::solver::{boundary_exponent_fit, normalized_fixed_point, FixedPointOptions};

use super::{artifact, discretization, domain_from, fit_window, min_of, par_map, Context, ExperimentError, Result};
use crate::config::Config;
use crate::output::{write_history, write_solution, write_table};
use crate::report::{Check, ExperimentReport, Source};

/// Positive solutions of `P₁⁺(D²u) + u^p = 0` for `p > 1` by the normalized fixed point.
pub fn superlinear_pplus(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let p_list = match cfg.raw("p") {
        Some(_) => vec![cfg.require_number("p")?],
        None => cfg.list_or("p_list", &[2.0, 3.0])?,
    };
    if let Some(&bad) = p_list.iter().find(|&&p| !(p > 1.0)) {
        return Err(ExperimentError::Rejected(format!(
            "superlinear-pplus needs p > 1, got {bad}; use critical-exponent or solve for 0 < p < 1"
        )));
    }
    if cfg.get_or("k", 1usize)? != 1 {
        return Err(cfg.invalid("k", "the superlinear problem is posed for k = 1 only").into());
    }
    let d = FixedPointOptions::default();
    let opts =
        FixedPointOptions { tol: cfg.number_or("tol", d.tol)?, max_iter: cfg.get_or("max_iter", d.max_iter)?, ..d };
    let hopf_tol = cfg.number_or("hopf_tol", 0.15)?;
    let rays: usize = cfg.get_or("rays", 8)?;
    let window = fit_window(cfg)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, 1, 1.0 / 32.0)?;

    let runs = par_map(ctx.jobs, &p_list, |&p| normalized_fixed_point(&disc, p, &opts));
    let mut sups = Vec::new();
    for (&p, run) in p_list.iter().zip(runs) {
        let fp = match run {
            Ok(fp) => fp,
            Err(e) => {
                report.push(Check::failed(format!("p={p} fixed point"), Source::Oracle, e));
                continue;
            }
        };
        let s = &fp.state;
        report.push(
            Check::at_most(format!("p={p} relative residual"), fp.relative_residual, 0.0, opts.tol, Source::Oracle)
                .note(format!("{} iterations", s.iterations)),
        );
        report.push(Check::positive(format!("p={p} interior minimum"), s.min(), Source::Formula));
        report.value(&format!("sup u* p={p}"), s.sup());
        report.value(&format!("mu p={p}"), fp.mu);
        sups.push(s.sup());
        match boundary_exponent_fit(&disc, &s.values, &domain, window, rays).map(|f| f.slope) {
            Ok(Some(q)) => {
                report.push(Check::within(format!("p={p} boundary exponent"), q, 1.0, hopf_tol, Source::Formula))
            }
            Ok(None) => report.notice(format!("p={p}: boundary fit had no usable rays")),
            Err(e) => report.notice(format!("p={p}: boundary fit skipped: {e}")),
        }
        let mu_rows: Vec<Vec<f64>> = fp.mu_history.iter().enumerate().map(|(i, &m)| vec![i as f64, m]).collect();
        artifact(ctx, report, &format!("mu_history_p{p}.csv"), |path| write_table(path, &["iter", "mu"], &mu_rows))?;
        artifact(ctx, report, &format!("history_p{p}.csv"), |path| write_history(path, &s.history))?;
        artifact(ctx, report, &format!("solution_p{p}.csv"), |path| write_solution(path, &disc, &[("u", &s.values)]))?;
    }
    if sups.len() >= 2 {
        let spread = min_of(sups.windows(2).map(|w| (w[0] - w[1]).abs() / w[0].max(w[1])));
        report
            .push(Check::positive("sup u* depends on p", spread, Source::Oracle).note(format!("sup u* = {sups:.5?}")));
    }
    Ok(())
}
