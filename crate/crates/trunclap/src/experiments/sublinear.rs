//! Experiments on `F(D²u) + a(x)u^p = 0` with `0 < p < 1` and the collapse for `p ≥ 1`.

use trunclap_core::domain::CRDomain;
use trunclap_core::oracles::{
    apriori_bound, gaussian_limit_profile, pplus_supersolution, rescaled_ball_profile, subsolution_envelope,
    RadialProfile,
};
use trunclap_core::solver::{
    apriori_check, boundary_exponent_fit, monotone_run, squeeze_solve, Coefficient, DiscreteState, Discretization,
    OperatorSign, PerronOptions, ProblemSpec, RunDirection,
};

use super::{
    artifact, discretization, domain_from, fit_window, is_ball, max_of, min_of, par_map, perron_options, Context,
    ExperimentError, Result,
};
use crate::config::Config;
use crate::output::{write_history, write_solution, write_table};
use crate::report::{Check, ExperimentReport, Source};

/// Absolute slack in the a priori bound.
const APRIORI_SLACK: f64 = 1e-8;

fn sublinear_p(cfg: &Config, key: &str, default: f64) -> Result<f64> {
    let p = cfg.number_or(key, default)?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(cfg.invalid(key, "needs 0 < p < 1").into())
    }
}

fn sign_from(cfg: &Config, default: OperatorSign) -> Result<OperatorSign> {
    let s: String = cfg.get_or("sign", String::new())?;
    Ok(match s.as_str() {
        "" => default,
        "minus" | "-" => OperatorSign::Minus,
        "plus" | "+" => OperatorSign::Plus,
        "mean" => OperatorSign::Mean,
        _ => return Err(cfg.invalid("sign", "expected minus, plus or mean").into()),
    })
}

/// `c · inf_y (R² − |x−y|²)`: positive on `Ω`, zero on its boundary.
pub(super) fn quadratic_cap(domain: &CRDomain, disc: &Discretization, c: f64) -> Vec<f64> {
    let r2 = domain.radius() * domain.radius();
    let dim = domain.dim();
    disc.sample(|x| {
        let d = domain
            .centers()
            .iter()
            .map(|y| r2 - (0..dim).map(|a| (x[a] - y[a]).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        c * d.max(0.0)
    })
}

/// Nodes at distance at least `gap` from the boundary.
fn deep_nodes(domain: &CRDomain, disc: &Discretization, gap: f64) -> Vec<usize> {
    (0..disc.len()).filter(|&i| domain.membership(&disc.grid().position(i)).margin >= gap).collect()
}

fn store_state(
    ctx: &Context,
    report: &mut ExperimentReport,
    tag: &str,
    disc: &Discretization,
    s: &DiscreteState,
) -> Result<()> {
    artifact(ctx, report, &format!("solution_{tag}.csv"), |p| write_solution(p, disc, &[("u", &s.values)]))?;
    artifact(ctx, report, &format!("history_{tag}.csv"), |p| write_history(p, &s.history))
}

enum Outcome {
    Squeeze { state: DiscreteState, gap: f64, converged: bool },
    Collapse(DiscreteState),
    Failed(String),
}

/// Positive solutions for `p < 1`, collapse to zero for `p ≥ 1`.
pub fn critical_exponent(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let k: usize = cfg.get_or("k", 1)?;
    if sign_from(cfg, OperatorSign::Minus)? != OperatorSign::Minus {
        return Err(cfg.invalid("sign", "the critical exponent is stated for the minus operator").into());
    }
    let p_list = cfg.list_or("p_list", &[0.5, 0.9, 1.0, 1.2])?;
    if p_list.iter().any(|&p| !(p > 0.0)) {
        return Err(cfg.invalid("p_list", "exponents must be positive").into());
    }
    let max_check_up_to = cfg.number_or("max_check_up_to", 0.5)?;
    let max_rel_tol = cfg.number_or("max_rel_tol", 0.05)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, k, 1.0 / 64.0)?;
    let opts = perron_options(cfg)?;

    let outcomes = par_map(ctx.jobs, &p_list, |&p| {
        let spec = ProblemSpec::new(OperatorSign::Minus, k, p);
        if p < 1.0 {
            match squeeze_solve(&domain, &disc, &spec, &opts) {
                Ok(sq) => Outcome::Squeeze { gap: sq.gap, converged: sq.converged, state: sq.upper },
                Err(e) => Outcome::Failed(e.to_string()),
            }
        } else {
            let init = quadratic_cap(&domain, &disc, 0.5 / k as f64);
            match monotone_run(&disc, &spec, &init, RunDirection::Descending, &opts) {
                Ok(s) => Outcome::Collapse(s),
                Err(e) => Outcome::Failed(e.to_string()),
            }
        }
    });

    for (&p, outcome) in p_list.iter().zip(outcomes) {
        let tag = format!("p{p}");
        match outcome {
            Outcome::Failed(why) => report.push(Check::failed(format!("p={p} solve"), Source::Formula, why)),
            Outcome::Collapse(s) => {
                report.push(
                    Check::at_most(format!("p={p} collapse sup"), s.sup(), 0.0, 1e-6, Source::Formula)
                        .note(format!("{} iterations", s.iterations)),
                );
                store_state(ctx, report, &tag, &disc, &s)?;
            }
            Outcome::Squeeze { state, gap, converged } => {
                report.push(
                    Check::at_most(format!("p={p} squeeze gap"), gap, 0.0, opts.gap_tol, Source::Oracle)
                        .note(if converged { "converged" } else { "gap above tolerance" }),
                );
                report.push(Check::positive(format!("p={p} interior minimum"), state.min(), Source::Formula));
                let a = apriori_check(&state.values, p, k, &domain)?;
                report.push(
                    Check::at_most(format!("p={p} a priori bound"), a.sup, a.bound, APRIORI_SLACK, Source::Formula)
                        .note(format!("sup/bound = {:.4}", a.sup / a.bound)),
                );
                if is_ball(&domain) && p <= max_check_up_to {
                    let m = apriori_bound(p, k, domain.radius());
                    report.push(Check::within(
                        format!("p={p} maximum"),
                        state.sup(),
                        m,
                        max_rel_tol * m,
                        Source::Formula,
                    ));
                }
                store_state(ctx, report, &tag, &disc, &state)?;
            }
        }
    }
    Ok(())
}

/// Boundary exponent of the sublinear solution along inward normals.
pub fn anti_hopf(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let p = sublinear_p(cfg, "p", 0.5)?;
    let k: usize = cfg.get_or("k", 1)?;
    let sign = sign_from(cfg, OperatorSign::Minus)?;
    let rays: usize = cfg.get_or("rays", 8)?;
    let rel_tol = cfg.number_or("fit_rel_tol", 0.1)?;
    let window = fit_window(cfg)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, k, 1.0 / 64.0)?;
    let spec = ProblemSpec::new(sign, k, p);
    let sq = match squeeze_solve(&domain, &disc, &spec, &perron_options(cfg)?) {
        Ok(sq) => sq,
        Err(e) => {
            report.push(Check::failed("solve", Source::Oracle, e));
            return Ok(());
        }
    };
    report.push(Check::at_most("squeeze gap", sq.gap, 0.0, perron_options(cfg)?.gap_tol, Source::Oracle));
    store_state(ctx, report, "u", &disc, &sq.upper)?;
    let rate = 1.0 / (1.0 - p);
    match boundary_exponent_fit(&disc, sq.solution(), &domain, window, rays) {
        Err(e) => report.notice(format!("boundary fit skipped: {e}")),
        Ok(fit) => {
            let rows: Vec<Vec<f64>> = fit.per_ray.iter().enumerate().map(|(i, &q)| vec![i as f64, q]).collect();
            artifact(ctx, report, "rays.csv", |path| write_table(path, &["ray", "exponent"], &rows))?;
            let Some(q) = fit.slope else {
                report.notice("boundary fit skipped: no ray had enough positive samples");
                return Ok(());
            };
            report.value("fitted exponent", q);
            // any exponent below 1/(1−p) gives a vanishing quotient; halfway to it from the Hopf rate 1
            let floor = 1.0 + 0.5 * (rate - 1.0);
            report.push(
                Check::at_least("exponent above Hopf rate", q, floor, 0.0, Source::Formula)
                    .note(format!("{} samples", fit.samples_used)),
            );
            if is_ball(&domain) && sign == OperatorSign::Minus {
                report.push(Check::within("exponent on the ball", q, rate, rel_tol * rate, Source::Oracle));
            }
        }
    }
    Ok(())
}

/// `sup_{|x| ≤ r_max} |Ũ(x) − G(|x|)|` for the closed-form rescaled ball solution.
fn ball_rescaling_error(p: f64, k: usize, r_max: f64) -> Result<f64> {
    let g = gaussian_limit_profile(k)?;
    let n = 4000;
    Ok(max_of((0..=n).map(|i| {
        let r = r_max * i as f64 / n as f64;
        (rescaled_ball_profile(p, k, r) - g.eval(r).u).abs()
    })))
}

/// Lens `B_R((−ε,0)) ∩ B_R((ε,0))`, `ε = (1−p)²/2`, `R = 1 + ε`: shrinks to the
/// unit disk faster than `√(1−p)`.
pub fn rescaling_lens(p: f64) -> Result<CRDomain> {
    let eps = 0.5 * (1.0 - p) * (1.0 - p);
    Ok(CRDomain::new(1.0 + eps, &[vec![eps, 0.0], vec![-eps, 0.0]])?)
}

/// Rescales the discrete solution by its maximum `M` and compares with the
/// Gaussian on a polar sample of `|x| ≤ r_max`.
fn lens_rescaling_error(disc: &Discretization, u: &[f64], p: f64, k: usize, r_max: f64) -> Result<(f64, f64)> {
    let g = gaussian_limit_profile(k)?;
    let m = u.iter().copied().fold(0.0, f64::max);
    let s = m.powf(0.5 * (1.0 - p));
    let (nr, nt) = (60, 64);
    let mut err = 0.0f64;
    for i in 0..=nr {
        let r = r_max * i as f64 / nr as f64;
        for j in 0..nt {
            let th = std::f64::consts::TAU * j as f64 / nt as f64;
            let x = [s * r * th.cos(), s * r * th.sin()];
            let v = disc.grid().interpolate(u, &x) / m;
            err = err.max((v - g.eval(r).u).abs());
        }
    }
    Ok((err, m))
}

fn strictly_decreasing(v: &[f64]) -> f64 {
    // largest ratio of consecutive entries; below 1 iff strictly decreasing
    max_of(v.windows(2).map(|w| w[1] / w[0]))
}

/// Convergence of rescaled solutions to `exp(−|x|²/(2k))` as `p → 1`.
pub fn rescaling(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let k: usize = cfg.get_or("k", 1)?;
    let p_list = cfg.list_or("p_list", &[0.5, 0.75, 0.9])?;
    if p_list.iter().any(|&p| !(p > 0.0 && p < 1.0)) || p_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(cfg.invalid("p_list", "needs increasing exponents in (0, 1)").into());
    }
    let mode: String = cfg.get_or("mode", "both".to_string())?;
    let (ball, lens) = match mode.as_str() {
        "ball" => (true, false),
        "lens" => (false, true),
        "both" => (true, true),
        _ => return Err(cfg.invalid("mode", "expected ball, lens or both").into()),
    };
    let r_max = cfg.number_or("r_max", 2.0)?;
    let near_one = cfg.number_or("ball_p_near_one", 0.99)?;
    let near_one_tol = cfg.number_or("ball_tol_near_one", 0.01)?;
    let lens_factor = cfg.number_or("lens_factor", 2.0)?;
    let h = cfg.number_or("h", 1.0 / 64.0)?;

    let ball_err: Vec<f64> = p_list.iter().map(|&p| ball_rescaling_error(p, k, r_max)).collect::<Result<_>>()?;
    let mut rows: Vec<Vec<f64>> = p_list.iter().zip(&ball_err).map(|(&p, &e)| vec![p, 0.0, e, f64::NAN]).collect();
    if ball {
        report.push(
            Check::at_most("ball errors decreasing", strictly_decreasing(&ball_err), 1.0, 0.0, Source::Oracle)
                .note(format!("errors {ball_err:.4?}")),
        );
        let e = ball_rescaling_error(near_one, k, r_max)?;
        rows.push(vec![near_one, 0.0, e, f64::NAN]);
        report.push(Check::at_most(format!("ball error at p={near_one}"), e, near_one_tol, 0.0, Source::Oracle));
    }

    if lens {
        let opts = perron_options(cfg)?;
        let runs = par_map(ctx.jobs, &p_list, |&p| -> Result<_> {
            let domain = rescaling_lens(p)?;
            let disc = match discretization(cfg, &domain, k, h) {
                Ok(d) => d,
                Err(ExperimentError::Solver(trunclap_core::Error::ResourceLimit { nodes, budget })) => {
                    return Ok(Err(format!("p={p}: grid of {nodes} nodes exceeds the budget {budget}")));
                }
                Err(e) => return Err(e),
            };
            let spec = ProblemSpec::new(OperatorSign::Minus, k, p);
            Ok(match squeeze_solve(&domain, &disc, &spec, &opts) {
                Ok(sq) => Ok((disc, sq)),
                Err(e) => Err(format!("p={p}: {e}")),
            })
        });
        let mut lens_err = Vec::new();
        for ((&p, run), &be) in p_list.iter().zip(runs).zip(&ball_err) {
            let (disc, sq) = match run? {
                Ok(v) => v,
                Err(why) => {
                    report.notice(format!("sweep truncated: {why}"));
                    break;
                }
            };
            let (e, m) = lens_rescaling_error(&disc, sq.solution(), p, k, r_max)?;
            report.value(&format!("lens maximum p={p}"), m);
            report.push(
                Check::at_most(
                    format!("p={p} lens within {lens_factor}x of ball"),
                    e,
                    lens_factor * be,
                    0.0,
                    Source::Oracle,
                )
                .note(format!("gap {:.1e}", sq.gap)),
            );
            rows.push(vec![p, 1.0, e, m]);
            lens_err.push(e);
            store_state(ctx, report, &format!("lens_p{p}"), &disc, &sq.upper)?;
        }
        if lens_err.len() >= 2 {
            report.push(
                Check::at_most("lens errors decreasing", strictly_decreasing(&lens_err), 1.0, 0.0, Source::Oracle)
                    .note(format!("errors {lens_err:.4?}")),
            );
        }
    }
    artifact(ctx, report, "rescaling.csv", |path| write_table(path, &["p", "lens", "error", "maximum"], &rows))?;
    Ok(())
}

/// `V > U` for the plus and minus solutions, with envelope brackets.
pub fn ordering(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let p = sublinear_p(cfg, "p", 0.5)?;
    let k: usize = cfg.get_or("k", 1)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, k, 1.0 / 32.0)?;
    let opts = perron_options(cfg)?;
    let signs = [OperatorSign::Minus, OperatorSign::Plus];
    let runs = par_map(ctx.jobs, &signs, |&s| squeeze_solve(&domain, &disc, &ProblemSpec::new(s, k, p), &opts));
    let mut runs = runs.into_iter();
    let (u, v) = match (runs.next().expect("two runs"), runs.next().expect("two runs")) {
        (Ok(u), Ok(v)) => (u, v),
        (u, v) => {
            for (name, r) in [("minus solve", u.err()), ("plus solve", v.err())] {
                if let Some(e) = r {
                    report.push(Check::failed(name, Source::Oracle, e));
                }
            }
            return Ok(());
        }
    };
    let h = disc.grid().h();
    let deep = deep_nodes(&domain, &disc, 2.0 * h);
    let (uu, vv) = (u.solution(), v.solution());
    let gap = min_of(deep.iter().map(|&i| vv[i] - uu[i]));
    report.push(
        Check::positive("min V-U away from the boundary", gap, Source::Formula)
            .note(format!("{} nodes at distance >= 2h", deep.len())),
    );
    let upper = pplus_supersolution(&domain, p, k)?;
    let over = max_of((0..disc.len()).map(|i| vv[i] - upper.value(&disc.grid().position(i))));
    let vmax = max_of(vv.iter().copied());
    report.push(Check::at_most("V below plus envelope", over, 0.0, 1e-6 * vmax, Source::Oracle));
    let samples: Vec<[f64; 3]> = (0..disc.len()).step_by(4).map(|i| disc.grid().position(i)).collect();
    let lower = subsolution_envelope(&domain, p, k, &samples)?;
    let under = max_of((0..disc.len()).map(|i| lower.value(&disc.grid().position(i)) - uu[i]));
    let slack = cfg.number_or("envelope_slack", 0.05)? * max_of(uu.iter().copied());
    report.push(
        Check::at_most("U above subsolution envelope", under, 0.0, slack, Source::Oracle)
            .note("slack covers the discretization error"),
    );
    report.value("gap U", u.gap);
    report.value("gap V", v.gap);
    artifact(ctx, report, "solution.csv", |path| write_solution(path, &disc, &[("U", uu), ("V", vv)]))?;
    Ok(())
}

/// `a̲^{1/(1−p)} U ≤ u ≤ ā^{1/(1−p)} V` for the mean operator with variable `a(x)`.
pub fn sandwich(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let p = sublinear_p(cfg, "p", 0.5)?;
    let k: usize = cfg.get_or("k", 1)?;
    let a = Coefficient::Sine {
        mean: cfg.number_or("a_mean", 1.0)?,
        amplitude: cfg.number_or("a_amp", 0.5)?,
        frequency: cfg.number_or("a_freq", 3.0)?,
    };
    let (lo, hi) = a.bounds();
    if !(lo > 0.0) {
        return Err(ExperimentError::Rejected(format!("a(x) must stay positive; its infimum is {lo}")));
    }
    let slack = cfg.number_or("slack", 1e-6)?;
    let doubling: bool = cfg.get_or("doubling", true)?;
    let domain = domain_from(cfg)?;
    let disc = discretization(cfg, &domain, k, 1.0 / 32.0)?;
    let opts: PerronOptions = perron_options(cfg)?;

    let mut specs = vec![
        ProblemSpec::new(OperatorSign::Mean, k, p).with_coefficient(a),
        ProblemSpec::new(OperatorSign::Minus, k, p),
        ProblemSpec::new(OperatorSign::Plus, k, p),
    ];
    if doubling {
        specs.push(ProblemSpec::new(OperatorSign::Mean, k, p).with_coefficient(a.scaled(2.0)));
    }
    let runs = par_map(ctx.jobs, &specs, |s| squeeze_solve(&domain, &disc, s, &opts));
    let mut sols = Vec::new();
    for (name, r) in ["mean", "minus", "plus", "doubled"].iter().zip(runs) {
        match r {
            Ok(sq) => {
                report.push(Check::at_most(format!("{name} squeeze gap"), sq.gap, 0.0, opts.gap_tol, Source::Oracle));
                sols.push(sq.upper.values);
            }
            Err(e) => {
                report.push(Check::failed(format!("{name} solve"), Source::Oracle, e));
                return Ok(());
            }
        }
    }
    let (cl, ch) = (lo.powf(1.0 / (1.0 - p)), hi.powf(1.0 / (1.0 - p)));
    report.value("lower scale", cl);
    report.value("upper scale", ch);
    let (u, big_u, big_v) = (&sols[0], &sols[1], &sols[2]);
    let below = max_of((0..disc.len()).map(|i| cl * big_u[i] - u[i]));
    let above = max_of((0..disc.len()).map(|i| u[i] - ch * big_v[i]));
    report.push(Check::at_most("scaled U below u", below, 0.0, slack, Source::Formula));
    report.push(Check::at_most("u below scaled V", above, 0.0, slack, Source::Formula));
    if doubling {
        let rise = min_of((0..disc.len()).map(|i| sols[3][i] - u[i]));
        report.push(Check::positive("doubling a raises u", rise, Source::Oracle));
    }
    artifact(ctx, report, "solution.csv", |path| write_solution(path, &disc, &[("u", u), ("U", big_u), ("V", big_v)]))?;
    Ok(())
}
