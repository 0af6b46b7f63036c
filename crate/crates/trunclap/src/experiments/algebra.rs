//! Matrix-level property battery and analytic oracle residuals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trunclap_core::domain::CRDomain;
use trunclap_core::oracles::{
    ball_solution, bump_solution, gaussian_limit_profile, pplus_supersolution, subsolution_envelope,
    supersolution_envelope, RadialFunction, RadialProfile,
};
use trunclap_core::spectral::{SpectralOperator, SymMat};

use super::{artifact, max_of, min_of, Context, Result};
use crate::config::Config;
use crate::output::write_table;
use crate::report::{Check, ExperimentReport, Source};

/// Allowed violation, relative to `1 + ‖X‖`.
const MATRIX_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

/// Running record of one inequality: margins are normalized slack, negative
/// when the inequality is violated.
struct Tally {
    name: &'static str,
    evaluations: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, evaluations: 0, violations: 0, worst: f64::INFINITY }
    }

    /// Records `lhs ≤ rhs` at scale `scale`.
    fn le(&mut self, lhs: f64, rhs: f64, scale: f64) {
        let m = (rhs - lhs) / scale;
        self.evaluations += 1;
        self.worst = self.worst.min(m);
        if !(m >= -MATRIX_TOL) {
            self.violations += 1;
        }
    }

    fn eq(&mut self, a: f64, b: f64, scale: f64) {
        let m = -(a - b).abs() / scale;
        self.evaluations += 1;
        self.worst = self.worst.min(m);
        if !(m >= -MATRIX_TOL) {
            self.violations += 1;
        }
    }
}

/// Operators of order `k` lying between `P_k^-` and `P_k^+`.
fn intermediate(n: usize, k: usize) -> Vec<SpectralOperator> {
    use SpectralOperator::*;
    let low: Vec<usize> = (1..=k).collect();
    let high: Vec<usize> = (n - k + 1..=n).collect();
    let mut mixed: Vec<usize> = (1..k).collect();
    mixed.push(n);
    let family = vec![PartialSum(low), PartialSum(high), PartialSum(mixed)];
    let mut ops = vec![MaxOf(family.clone()), MinOf(family.clone()), Mean(family)];
    if k == 1 {
        let total = (n * (n + 1) / 2) as f64;
        ops.push(WeightedSum((1..=n).map(|i| i as f64 / total).collect()));
    }
    ops
}

fn eval(op: &SpectralOperator, x: &SymMat) -> f64 {
    op.apply(x).expect("operators are built for the matrix order")
}

/// Structural battery on `trials` seeded random matrices of order `2..=max_dim`.
pub fn matrix_check(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let trials: usize = cfg.get_or("trials", 1000)?;
    let max_dim: usize = cfg.get_or("max_dim", 5)?;
    if !(2..=6).contains(&max_dim) {
        return Err(cfg.invalid("max_dim", "must lie in 2..=6").into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut duality = Tally::new("duality");
    let mut monotone = Tally::new("monotonicity");
    let mut homogeneous = Tally::new("homogeneity");
    let mut difference = Tally::new("difference inequalities");
    let mut lipschitz = Tally::new("lipschitz");
    let mut concavity = Tally::new("concavity and convexity");
    let mut bracket = Tally::new("extremal bracketing");

    for _ in 0..trials {
        let n = rng.random_range(2..=max_dim);
        let k = rng.random_range(1..n);
        let x = SymMat::random(n, &mut rng)?;
        let y = SymMat::random(n, &mut rng)?;
        let psd = SymMat::random_psd(n, &mut rng)?;
        let (nx, ny) = (x.norm()?, y.norm()?);
        let sx = 1.0 + nx;
        let sxy = 1.0 + nx + ny;
        let minus = SpectralOperator::MinusK(k);
        let plus = SpectralOperator::PlusK(k);
        let extremes = [&minus, &plus];

        duality.eq(eval(&plus, &x), -eval(&minus, &x.scaled(-1.0)), sx);

        let upper = x.add(&psd)?;
        let mut family = intermediate(n, k);
        family.push(minus.clone());
        family.push(plus.clone());
        for op in &family {
            monotone.le(eval(op, &x), eval(op, &upper), 1.0 + upper.norm()?);
        }

        for op in &family {
            let base = eval(op, &x);
            for t in [0.5, 2.0, 10.0] {
                homogeneous.eq(eval(op, &x.scaled(t)), t * base, 1.0 + t * nx);
            }
        }

        let diff = x.sub(&y)?;
        let (lo, hi) = (eval(&minus, &diff), eval(&plus, &diff));
        for op in extremes {
            let d = eval(op, &x) - eval(op, &y);
            difference.le(lo, d, sxy);
            difference.le(d, hi, sxy);
            lipschitz.le(d.abs(), k as f64 * diff.norm()?, sxy);
        }

        let mid = x.add(&y)?.scaled(0.5);
        concavity.le(0.5 * (eval(&minus, &x) + eval(&minus, &y)), eval(&minus, &mid), sxy);
        concavity.le(eval(&plus, &mid), 0.5 * (eval(&plus, &x) + eval(&plus, &y)), sxy);

        let (pm, pp) = (eval(&minus, &x), eval(&plus, &x));
        for op in intermediate(n, k) {
            let v = eval(&op, &x);
            bracket.le(pm, v, sx);
            bracket.le(v, pp, sx);
        }
    }

    let tallies = [duality, monotone, homogeneous, difference, lipschitz, concavity, bracket];
    report.push(Check::within(
        "duality evaluations",
        tallies[0].evaluations as f64,
        trials as f64,
        0.0,
        Source::Plumbing,
    ));
    for t in &tallies {
        let source = if t.name == "extremal bracketing" { Source::Oracle } else { Source::Formula };
        report.push(Check::at_most(format!("{} violations", t.name), t.violations as f64, 0.0, 0.0, source).note(
            format!(
                "worst margin {:.3e} of 1+|X| over {} evaluations (allowed -{MATRIX_TOL:e})",
                t.worst, t.evaluations
            ),
        ));
    }
    let rows: Vec<Vec<f64>> = tallies
        .iter()
        .enumerate()
        .map(|(i, t)| vec![i as f64, t.evaluations as f64, t.violations as f64, t.worst])
        .collect();
    artifact(ctx, report, "matrix_check.csv", |p| {
        write_table(p, &["property", "evaluations", "violations", "worst_margin"], &rows)
    })?;
    for (i, t) in tallies.iter().enumerate() {
        report.param(&format!("property_{i}"), t.name);
    }
    Ok(())
}

/// Uniform points in `B_r(c)` by rejection.
fn ball_points(rng: &mut ChaCha8Rng, c: &[f64], r: f64, count: usize) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if y.iter().map(|v| v * v).sum::<f64>() < 1.0 {
            out.push(y.iter().zip(c).map(|(v, o)| o + r * v).collect());
        }
    }
    out
}

/// `F(D²u) + u^q` with the Hessian assembled from the radial derivatives.
fn residual<P: RadialProfile>(f: &RadialFunction<P>, op: &SpectralOperator, q: f64, x: &[f64]) -> Result<f64> {
    let h = f.hessian(x)?;
    Ok(op.apply(&h)? + f.value(x).max(0.0).powf(q))
}

/// Every analytic oracle against its equation at seeded random points.
pub fn oracle_check(cfg: &Config, ctx: &Context, report: &mut ExperimentReport) -> Result<()> {
    let count: usize = cfg.get_or("points", 1000)?;
    let p_list = cfg.list_or("p_list", &[0.3, 0.5, 0.75])?;
    if let Some(&bad) = p_list.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(cfg.invalid("p_list", format!("p = {bad} outside (0, 1)")).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let cases = [(2usize, 1usize), (3, 1), (3, 2)];
    let (mut ball_res, mut bump_res, mut gauss_res) = (0.0f64, 0.0f64, 0.0f64);
    let mut ball_rows = Vec::new();
    for &p in &p_list {
        for &(n, k) in &cases {
            let op = SpectralOperator::MinusK(k);
            let c = vec![0.2; n];
            let u = ball_solution(p, k, 1.3, &c)?;
            // stay off the sphere where the Hessian of the cap degenerates
            for x in ball_points(&mut rng, &c, 0.98 * 1.3, count) {
                let r = residual(&u, &op, p, &x)?;
                ball_res = ball_res.max(r.abs());
                if n == 2 && p == p_list[0] {
                    ball_rows.push(vec![x[0], x[1], u.value(&x), r]);
                }
            }
            let x0 = vec![-0.1; n];
            let b = bump_solution(p, k, 0.4, &x0)?;
            for x in ball_points(&mut rng, &x0, 0.98 * 0.4, count) {
                bump_res = bump_res.max(residual(&b, &op, p, &x)?.abs());
            }
        }
    }
    let mut gauss_rows = Vec::new();
    for k in 1..=2 {
        let n = k + 1;
        let g = RadialFunction::new(gaussian_limit_profile(k)?, &vec![0.0; n])?;
        let op = SpectralOperator::MinusK(k);
        for x in ball_points(&mut rng, &vec![0.0; n], 4.0, count) {
            let r = residual(&g, &op, 1.0, &x)?;
            gauss_res = gauss_res.max(r.abs());
            if k == 1 {
                gauss_rows.push(vec![x[0], x[1], g.value(&x), r]);
            }
        }
    }

    // τ-quadratics are strict supersolutions: the residual is one-sided
    let lens = CRDomain::new(1.0, &[vec![0.3, 0.0], vec![-0.3, 0.0]])?;
    let mut pplus_res = f64::NEG_INFINITY;
    let mut order_margin = f64::INFINITY;
    let mut pplus_rows = Vec::new();
    for &p in &p_list {
        for k in 1..=2 {
            let w = pplus_supersolution(&lens, p, k)?;
            let op = SpectralOperator::PlusK(k);
            let pts: Vec<Vec<f64>> = ball_points(&mut rng, &[0.0, 0.0], 1.0, 4 * count)
                .into_iter()
                .filter(|x| lens.contains(x).map(|m| m.interior).unwrap_or(false))
                .take(count)
                .collect();
            for x in &pts {
                let active =
                    w.members.iter().min_by(|a, b| a.value(x).total_cmp(&b.value(x))).expect("envelope has members");
                let r = residual(active, &op, p, x)?;
                pplus_res = pplus_res.max(r);
                if p == p_list[0] && k == 1 {
                    pplus_rows.push(vec![x[0], x[1], w.value(x), r]);
                }
            }
            let samples: Vec<[f64; 3]> = pts.iter().step_by(10).map(|x| [x[0], x[1], 0.0]).collect();
            let sub = subsolution_envelope(&lens, p, k, &samples)?;
            let sup = supersolution_envelope(&lens, p, k)?;
            order_margin = order_margin.min(min_of(pts.iter().map(|x| sup.value(x) - sub.value(x))));
        }
    }

    report.push(Check::at_most("ball_solution residual", ball_res, 0.0, RESIDUAL_TOL, Source::Formula));
    report.push(Check::at_most("bump_solution residual", bump_res, 0.0, RESIDUAL_TOL, Source::Formula));
    report.push(Check::at_most("gaussian_limit_profile residual", gauss_res, 0.0, RESIDUAL_TOL, Source::Formula));
    report.push(
        Check::at_most("pplus_supersolution residual", pplus_res, 0.0, RESIDUAL_TOL, Source::Formula)
            .note("supersolution: F(D²w) + w^p ≤ 0"),
    );
    report.push(Check::at_least("envelope ordering margin", order_margin, 0.0, 1e-10, Source::Oracle));
    let header = ["x", "y", "value", "residual"];
    artifact(ctx, report, "oracle_ball.csv", |p| write_table(p, &header, &ball_rows))?;
    artifact(ctx, report, "oracle_gaussian.csv", |p| write_table(p, &header, &gauss_rows))?;
    artifact(ctx, report, "oracle_pplus.csv", |p| write_table(p, &header, &pplus_rows))?;
    report.value("largest residual", max_of([ball_res, bump_res, gauss_res]));
    Ok(())
}
