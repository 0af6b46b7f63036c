use trunclap_core::domain::CRDomain;
use trunclap_core::oracles::ball_solution;
use trunclap_core::solver::{
    linear_dirichlet_solve, phi_map, pseudo_time_linear, pseudo_time_solve, Discretization, LinearOptions,
    Monotonicity, OperatorSign, ProblemSpec, PseudoTimeOptions, StencilScheme, TimeStep,
};
use trunclap_core::Error;

fn disk(h: f64, order: usize, k: usize) -> Discretization {
    Discretization::build(&CRDomain::unit_disk(), h, StencilScheme::new(2, order, k).unwrap()).unwrap()
}

fn torsion_error(d: &Discretization, u: &[f64], k: usize) -> f64 {
    let exact = d.sample(|x| (1.0 - x[0] * x[0] - x[1] * x[1]) / (2.0 * k as f64));
    u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / (0.5 / k as f64)
}

#[test]
fn zero_forcing_gives_zero() {
    let d = disk(1.0 / 16.0, 2, 1);
    let s =
        linear_dirichlet_solve(&d, OperatorSign::Minus, &vec![0.0; d.len()], None, &LinearOptions::default()).unwrap();
    assert!(s.values.iter().all(|&v| v == 0.0));
}

#[test]
fn unit_forcing_reproduces_the_torsion_function() {
    for k in 1..=2 {
        let d = Discretization::build(&CRDomain::unit_disk(), 1.0 / 64.0, StencilScheme::default_for(2, k).unwrap())
            .unwrap();
        for sign in [OperatorSign::Minus, OperatorSign::Plus, OperatorSign::Mean] {
            let s = linear_dirichlet_solve(&d, sign, &vec![-1.0; d.len()], None, &LinearOptions::default()).unwrap();
            assert!(s.converged);
            assert!(torsion_error(&d, &s.values, k) <= 0.02, "k={k} {sign:?}");
        }
    }
}

#[test]
fn policy_and_pseudo_time_agree_on_frozen_forcing() {
    let d = disk(1.0 / 32.0, 2, 1);
    let v = ball_solution(0.5, 1, 1.0, &[0.0, 0.0]).unwrap();
    let f: Vec<f64> = d.sample(|x| -v.value(x).sqrt());
    let opts = PseudoTimeOptions { tol: 1e-10, ..Default::default() };
    for sign in [OperatorSign::Minus, OperatorSign::Plus, OperatorSign::Mean] {
        let a = linear_dirichlet_solve(&d, sign, &f, None, &LinearOptions::default()).unwrap();
        let b = pseudo_time_linear(&d, sign, &f, None, &opts).unwrap();
        assert!(b.converged);
        let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-6, "{sign:?}: {diff}");
    }
}

#[test]
fn pseudo_time_torsion_from_zero() {
    // the scheme is exact on quadratics, so only the stopping tolerance limits the error
    let d = disk(1.0 / 32.0, 2, 1);
    let opts = PseudoTimeOptions { tol: 1e-7, ..Default::default() };
    let s = pseudo_time_linear(&d, OperatorSign::Minus, &vec![-1.0; d.len()], None, &opts).unwrap();
    assert!(s.converged);
    assert_eq!(s.monotonicity, Monotonicity::Nondecreasing);
    assert!(torsion_error(&d, &s.values, 1) <= 0.02);
}

#[test]
fn global_steps_respect_the_monotonicity_limit() {
    let d = disk(1.0 / 8.0, 2, 1);
    let limit = d.cfl_limit();
    // the axis frame alone has diagonal weight 2/h² at full-arm nodes
    assert!(limit <= d.grid().h().powi(2) / 2.0);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 0.5);
    let init = vec![0.1; d.len()];
    let too_big = PseudoTimeOptions { step: TimeStep::Global(1.5 * limit), ..Default::default() };
    assert!(matches!(pseudo_time_solve(&d, &spec, &init, &too_big), Err(Error::CflViolated { .. })));
    let ok = PseudoTimeOptions {
        step: TimeStep::Global(0.9 * limit),
        max_iter: 50,
        history_every: 10,
        ..Default::default()
    };
    let s = pseudo_time_solve(&d, &spec, &init, &ok).unwrap();
    assert!(!s.converged);
    assert_eq!(s.iterations, 50);
    // every tenth step plus the final state
    assert_eq!(s.history.len(), 6);
    assert_eq!(s.history.last().unwrap().iter, 50);
}

#[test]
fn pseudo_time_collapses_for_superlinear_power() {
    let d = disk(1.0 / 8.0, 2, 1);
    let spec = ProblemSpec::new(OperatorSign::Minus, 1, 1.2);
    let cap = d.sample(|x| 0.5 * (1.0 - x[0] * x[0] - x[1] * x[1]));
    let opts = PseudoTimeOptions { tol: 1e-9, ..Default::default() };
    let s = pseudo_time_solve(&d, &spec, &cap, &opts).unwrap();
    assert!(s.sup() <= 1e-6, "sup {}", s.sup());
    assert_eq!(s.monotonicity, Monotonicity::Nonincreasing);
}

#[test]
fn phi_map_examples() {
    let d = disk(1.0 / 32.0, 6, 1);
    let lin = LinearOptions::default();
    let zero = vec![0.0; d.len()];
    assert!(phi_map(&d, 2.0, 0.0, &zero, &lin).unwrap().values.iter().all(|&v| v == 0.0));

    let one = phi_map(&d, 2.0, 1.0, &zero, &lin).unwrap();
    assert!(torsion_error(&d, &one.values, 1) <= 1e-8);

    let v = d.sample(|x| (1.0 - x[0] * x[0] - x[1] * x[1]) * (1.0 + 0.3 * x[0]));
    let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
    for p in [0.5, 2.0] {
        let a = phi_map(&d, p, 0.0, &v, &lin).unwrap();
        let b = phi_map(&d, p, 0.0, &v2, &lin).unwrap();
        let c = 2f64.powf(p);
        let err = a.values.iter().zip(&b.values).map(|(x, y)| (c * x - y).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8 * b.sup().max(1.0), "p={p}: {err}");
    }

    assert!(phi_map(&disk(0.25, 2, 2), 2.0, 0.0, &[0.0; 1], &lin).is_err());
    let mut neg = v.clone();
    neg[0] = -1.0;
    assert!(phi_map(&d, 2.0, 0.0, &neg, &lin).is_err());
}

#[test]
fn plus_solution_dominates_minus_solution() {
    let d = disk(1.0 / 32.0, 6, 1);
    let f: Vec<f64> = d.sample(|x| -(1.0 + x[0] * x[0] + 0.5 * x[1]));
    let lin = LinearOptions::default();
    let u = linear_dirichlet_solve(&d, OperatorSign::Minus, &f, None, &lin).unwrap();
    let m = linear_dirichlet_solve(&d, OperatorSign::Mean, &f, None, &lin).unwrap();
    let v = linear_dirichlet_solve(&d, OperatorSign::Plus, &f, None, &lin).unwrap();
    for i in 0..d.len() {
        assert!(v.values[i] >= m.values[i] - 1e-12);
        assert!(m.values[i] >= u.values[i] - 1e-12);
    }
}

#[test]
fn mismatched_lengths_are_rejected() {
    let d = disk(0.25, 2, 1);
    let lin = LinearOptions::default();
    assert!(matches!(
        linear_dirichlet_solve(&d, OperatorSign::Minus, &[1.0], None, &lin),
        Err(Error::DimensionMismatch { .. })
    ));
}
