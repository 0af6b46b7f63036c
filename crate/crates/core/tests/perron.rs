use trunclap_core::domain::CRDomain;
use trunclap_core::oracles::{apriori_bound, ball_solution, supersolution_envelope};
use trunclap_core::solver::{
    apriori_check, linear_dirichlet_solve, monotone_run, pseudo_time_solve, squeeze_solve, Coefficient, Discretization,
    Monotonicity, OperatorSign, PerronOptions, ProblemSpec, PseudoTimeOptions, RunDirection, StencilScheme,
};

fn build(domain: &CRDomain, h: f64) -> Discretization {
    Discretization::build(domain, h, StencilScheme::default_for(2, 1).unwrap()).unwrap()
}

fn lens() -> CRDomain {
    CRDomain::new(1.0, &[vec![0.3, 0.0], vec![-0.3, 0.0]]).unwrap()
}

#[test]
fn squeeze_on_the_disk() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 64.0);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 0.5);
    let sq = squeeze_solve(&dom, &d, &spec, &PerronOptions::default()).unwrap();
    assert!(sq.converged && sq.gap <= 1e-4);
    let max = sq.upper.sup();
    assert!((max - 0.0625).abs() <= 0.05 * 0.0625, "max {max}");
    assert!(sq.upper.min() > 0.0);
    for (lo, hi) in sq.lower.values.iter().zip(&sq.upper.values) {
        assert!(lo <= &(hi + 1e-12));
    }
    assert_eq!(sq.upper.monotonicity, Monotonicity::Nonincreasing);
    assert_eq!(sq.lower.monotonicity, Monotonicity::Nondecreasing);
}

#[test]
fn lens_limits_bracket_ball_oracles() {
    let dom = lens();
    let d = build(&dom, 1.0 / 32.0);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 0.5);
    let sq = squeeze_solve(&dom, &d, &spec, &PerronOptions::default()).unwrap();
    assert!(sq.converged);
    // inscribed ball B_0.7(0) and the circumscribing balls B_1(±0.3, 0)
    let inner = ball_solution(0.5, 1, 0.7, &[0.0, 0.0]).unwrap();
    let outer = supersolution_envelope(&dom, 0.5, 1).unwrap();
    // discretization error of the scheme at this resolution, relative to the maximum
    let slack = 0.1 * sq.upper.sup();
    for i in 0..d.len() {
        let x = d.grid().position(i);
        assert!(sq.lower.values[i] >= inner.value(&x[..2]) - slack);
        assert!(sq.upper.values[i] <= outer.value(&x[..2]) + slack);
    }
    let check = apriori_check(&sq.upper.values, 0.5, 1, &dom).unwrap();
    assert!(check.pass && check.sup < check.bound);
}

#[test]
fn descending_runs_are_monotone_per_node() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 16.0);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 0.5);
    let env = supersolution_envelope(&dom, 0.5, 1).unwrap();
    let init = d.sample(|x| env.value(x));
    let mut prev: Option<Vec<f64>> = None;
    for n in 1..=6 {
        let opts = PerronOptions { max_iter: n, tol: 0.0, ..Default::default() };
        let s = monotone_run(&d, &spec, &init, RunDirection::Descending, &opts).unwrap();
        if let Some(p) = &prev {
            assert!(s.values.iter().zip(p).all(|(a, b)| a <= b));
        }
        prev = Some(s.values);
    }
}

#[test]
fn pseudo_time_matches_the_squeeze_limit() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 32.0);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 0.5);
    let sq = squeeze_solve(&dom, &d, &spec, &PerronOptions::default()).unwrap();
    // the discrete torsion function T (S(T) = −1, sup T ≤ 1/2) is a discrete
    // supersolution: S(T) + T^{1/2} ≤ −1 + 2^{−1/2} < 0
    let torsion = linear_dirichlet_solve(&d, OperatorSign::Minus, &vec![-1.0; d.len()], None, &Default::default())
        .unwrap()
        .values;
    let opts = PseudoTimeOptions { tol: 1e-9, ..Default::default() };
    let s = pseudo_time_solve(&d, &spec, &torsion, &opts).unwrap();
    assert!(s.converged);
    assert_eq!(s.monotonicity, Monotonicity::Nonincreasing);
    let diff = s.values.iter().zip(sq.solution()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6 * sq.upper.sup(), "{diff}");
}

#[test]
fn superlinear_powers_collapse() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 32.0);
    let cap = d.sample(|x| 0.5 * (1.0 - x[0] * x[0] - x[1] * x[1]));
    for p in [1.0, 1.2] {
        let spec = ProblemSpec::new(OperatorSign::Minus, 1, p);
        let s = monotone_run(&d, &spec, &cap, RunDirection::Descending, &PerronOptions::default()).unwrap();
        assert!(s.sup() <= 1e-6, "p = {p}: sup {}", s.sup());
        assert!(s.converged);
    }
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 1.2);
    assert!(squeeze_solve(&dom, &d, &spec, &PerronOptions::default()).is_err());
}

#[test]
fn apriori_examples() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 16.0);
    let u = ball_solution(0.5, 1, 1.0, &[0.0, 0.0]).unwrap();
    let sampled = d.sample(|x| u.value(x));
    let c = apriori_check(&sampled, 0.5, 1, &dom).unwrap();
    assert!(c.pass);
    assert_eq!(c.sup, 0.0625);
    assert_eq!(c.bound, 0.0625);
    assert!(apriori_check(&sampled, 1.0, 1, &dom).is_err());

    // as p → 1 both the bound and the computed maxima collapse
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for p in [0.9, 0.95, 0.99] {
        let spec = ProblemSpec::new(OperatorSign::Minus, 1, p);
        let env = supersolution_envelope(&dom, p, 1).unwrap();
        let init = d.sample(|x| env.value(x));
        let opts = PerronOptions { max_iter: 60, ..Default::default() };
        let s = monotone_run(&d, &spec, &init, RunDirection::Descending, &opts).unwrap();
        let c = apriori_check(&s.values, p, 1, &dom).unwrap();
        assert!(c.pass);
        assert!(c.bound < prev.0 && s.sup() < prev.1);
        prev = (c.bound, s.sup());
    }
    assert!(prev.0 < 1e-200);
    assert_eq!(apriori_bound(0.5, 1, 2.0), 1.0);
}

#[test]
fn plus_solution_lies_above_minus_solution() {
    for dom in [CRDomain::unit_disk(), lens()] {
        let d = build(&dom, 1.0 / 32.0);
        let opts = PerronOptions::default();
        let u = squeeze_solve(&dom, &d, &ProblemSpec::new(OperatorSign::Minus, 1, 0.5), &opts).unwrap();
        let v = squeeze_solve(&dom, &d, &ProblemSpec::new(OperatorSign::Plus, 1, 0.5), &opts).unwrap();
        assert!(u.converged && v.converged);
        for i in 0..d.len() {
            assert!(v.solution()[i] > u.solution()[i]);
        }
    }
}

#[test]
fn larger_coefficient_raises_the_solution() {
    let dom = CRDomain::unit_disk();
    let d = build(&dom, 1.0 / 32.0);
    let a = Coefficient::Sine { mean: 1.0, amplitude: 0.5, frequency: 3.0 };
    let opts = PerronOptions::default();
    let spec = ProblemSpec::new(OperatorSign::Mean, 1, 0.5).with_coefficient(a);
    let one = squeeze_solve(&dom, &d, &spec, &opts).unwrap();
    let two = squeeze_solve(&dom, &d, &spec.with_coefficient(a.scaled(2.0)), &opts).unwrap();
    assert!(one.converged && two.converged);
    for (x, y) in one.solution().iter().zip(two.solution()) {
        assert!(y > x);
    }
}
