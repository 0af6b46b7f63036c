use trunclap_core::solver::{
    apriori_check, linear_dirichlet_solve, monotone_run, principal_eigenvalue_estimate, squeeze_solve, Coefficient,
    EigenOptions, LinearOptions, OperatorSign, ProblemSpec, RunDirection,
};

use super::sublinear::quadratic_cap;
use super::{artifact, discretization, domain_from, is_ball, max_of, min_of, perron_options, Context, Result};
use crate::config::Config;
use crate::output::{write_history, write_solution, write_table};
use crate::report::{Check, ExperimentReport, Source};

fn sign(cfg: &Config) -> Result<OperatorSign> {
    let s: String = cfg.get_or("sign", "minus".to_string())?;
    Ok(match s.as_str() {
        "minus" | "-" => OperatorSign::Minus,
        "plus" | "+" => OperatorSign::Plus,
        "mean" => OperatorSign::Mean,
        _ => return Err(cfg.invalid("sign", "expected minus, plus or mean").into()),
    })
}

/// A single solve chosen by `problem = sublinear | torsion | eigen`.
pub fn solve(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let problem: String = cfg.get_or("problem", "sublinear".to_string())?;
    let sign = sign(cfg)?;
    let k: usize = cfg.get_or("k", 1)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, k, 1.0 / 32.0)?;
    report.param("nodes", disc.len());

    let state = match problem.as_str() {
        "sublinear" => {
            let p = cfg.require_number("p")?;
            let a = if cfg.contains("a_amp") || cfg.contains("a_mean") {
                Coefficient::Sine {
                    mean: cfg.number_or("a_mean", 1.0)?,
                    amplitude: cfg.number_or("a_amp", 0.0)?,
                    frequency: cfg.number_or("a_freq", 3.0)?,
                }
            } else {
                Coefficient::Constant(1.0)
            };
            let spec = ProblemSpec::new(sign, k, p).with_coefficient(a);
            let opts = perron_options(cfg)?;
            if p < 1.0 {
                let sq = match squeeze_solve(&domain, &disc, &spec, &opts) {
                    Ok(sq) => sq,
                    Err(e) => {
                        report.push(Check::failed("squeeze", Source::Oracle, e));
                        return Ok(());
                    }
                };
                report.push(Check::at_most("squeeze gap", sq.gap, 0.0, opts.gap_tol, Source::Oracle));
                report.push(Check::positive("interior minimum", sq.upper.min(), Source::Formula));
                if sign == OperatorSign::Minus && a == Coefficient::Constant(1.0) {
                    let c = apriori_check(sq.solution(), p, k, &domain)?;
                    report.push(Check::at_most("a priori bound", c.sup, c.bound, 1e-8, Source::Formula));
                }
                sq.upper
            } else {
                let init = quadratic_cap(&domain, &disc, 0.5 / k as f64);
                let s = match monotone_run(&disc, &spec, &init, RunDirection::Descending, &opts) {
                    Ok(s) => s,
                    Err(e) => {
                        report.push(Check::failed("descending run", Source::Oracle, e));
                        return Ok(());
                    }
                };
                if sign == OperatorSign::Minus {
                    report.push(Check::at_most("collapse sup", s.sup(), 0.0, 1e-6, Source::Formula));
                } else {
                    report.notice("no collapse check: p >= 1 only forces zero for the minus operator");
                }
                s
            }
        }
        "torsion" => {
            let f = vec![-1.0; disc.len()];
            let s = match linear_dirichlet_solve(&disc, sign, &f, None, &LinearOptions::default()) {
                Ok(s) => s,
                Err(e) => {
                    report.push(Check::failed("linear solve", Source::Oracle, e));
                    return Ok(());
                }
            };
            report.push(Check::at_most("linear residual", s.residual, 0.0, 1e-8, Source::Oracle));
            if is_ball(&domain) {
                // (R² − |x−c|²)/(2k) solves P_k^±(D²u) = −1 in the ball
                let c = domain.centers()[0];
                let r2 = domain.radius().powi(2);
                let dim = domain.dim();
                let exact =
                    disc.sample(|x| (r2 - (0..dim).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>()) / (2.0 * k as f64));
                let err = max_of(s.values.iter().zip(&exact).map(|(a, b)| (a - b).abs())) / (r2 / (2.0 * k as f64));
                report.push(Check::at_most(
                    "relative error vs torsion function",
                    err,
                    0.0,
                    cfg.number_or("torsion_tol", 0.02)?,
                    Source::Formula,
                ));
            }
            s
        }
        "eigen" => {
            let e = match principal_eigenvalue_estimate(&disc, sign, &EigenOptions::default()) {
                Ok(e) => e,
                Err(e) => {
                    report.push(Check::failed("eigenvalue", Source::Oracle, e));
                    return Ok(());
                }
            };
            report.value("mu", e.mu);
            report.push(Check::positive("eigenvalue positive", e.mu, Source::Formula).note(if e.converged {
                "converged"
            } else {
                "iteration budget exhausted"
            }));
            report.push(Check::positive("mode positive", min_of(e.mode.iter().copied()), Source::Formula));
            if let Some(target) = cfg.get::<f64>("target_mu")? {
                let tol = cfg.number_or("mu_rel_tol", 0.02)?;
                report.push(Check::within("eigenvalue vs target", e.mu, target, tol * target, Source::Oracle));
            }
            let rows: Vec<Vec<f64>> = e.history.iter().enumerate().map(|(i, &m)| vec![(i + 1) as f64, m]).collect();
            artifact(ctx, report, "history.csv", |path| write_table(path, &["iter", "mu"], &rows))?;
            artifact(ctx, report, "solution.csv", |path| write_solution(path, &disc, &[("mode", &e.mode)]))?;
            return Ok(());
        }
        _ => return Err(cfg.invalid("problem", "expected sublinear, torsion or eigen").into()),
    };
    report.value("sup", state.sup());
    artifact(ctx, report, "solution.csv", |path| write_solution(path, &disc, &[("u", &state.values)]))?;
    artifact(ctx, report, "history.csv", |path| write_history(path, &state.history))?;
    Ok(())
}
