use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trunclap_core::domain::{CRDomain, ARM_FLOOR};
use trunclap_core::solver::{Discretization, OperatorSign, StencilScheme};
use trunclap_core::spectral::{SpectralOperator, SymMat};

fn disc(order: usize, k: usize, h: f64) -> Discretization {
    Discretization::build(&CRDomain::unit_disk(), h, StencilScheme::new(2, order, k).unwrap()).unwrap()
}

/// Nodes whose arms in every direction reach interior neighbors at full length.
fn full_arm_nodes(d: &Discretization) -> Vec<usize> {
    let nd = d.scheme().directions().len();
    (0..d.len())
        .filter(|&i| {
            (0..nd).all(|j| d.grid().arm(i, j, 0).neighbor.is_some() && d.grid().arm(i, j, 1).neighbor.is_some())
        })
        .collect()
}

fn unit(e: &[i64; 3]) -> [f64; 2] {
    let n = ((e[0] * e[0] + e[1] * e[1]) as f64).sqrt();
    [e[0] as f64 / n, e[1] as f64 / n]
}

fn random_sym2(rng: &mut ChaCha8Rng) -> SymMat {
    let mut a = SymMat::zeros(2).unwrap();
    a.set(0, 0, rng.random_range(-3.0..3.0));
    a.set(0, 1, rng.random_range(-3.0..3.0));
    a.set(1, 1, rng.random_range(-3.0..3.0));
    a
}

fn quadratic(d: &Discretization, a: &SymMat) -> Vec<f64> {
    d.sample(|x| 0.5 * a.quad_form(x))
}

#[test]
fn quadratics_are_differenced_exactly() {
    let d = disc(3, 1, 1.0 / 8.0);
    let nodes = full_arm_nodes(&d);
    assert!(!nodes.is_empty());
    let half_square = d.sample(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_sym2(&mut rng);
    let u = quadratic(&d, &a);
    for &i in &nodes {
        for (j, e) in d.scheme().directions().iter().enumerate() {
            assert!((d.second_difference(&half_square, i, j) - 1.0).abs() < 1e-12);
            let ehat = unit(e);
            assert!((d.second_difference(&u, i, j) - a.quad_form(&ehat)).abs() < 1e-12);
        }
    }
}

#[test]
fn weights_annihilate_affine_data_on_unequal_arms() {
    let d = disc(2, 1, 0.1);
    let nd = d.scheme().directions().len();
    let mut unequal = 0;
    for i in 0..d.len() {
        for j in 0..nd {
            let (a, b) = (d.grid().arm(i, j, 0).length, d.grid().arm(i, j, 1).length);
            if (a - b).abs() > 1e-9 {
                unequal += 1;
            }
            let s = d.stencil(i, j);
            // u = c + m t along the line through the node, sampled at the arm ends
            let (c, m) = (0.7, -1.3);
            let affine = s.cp * (c + m * a) + s.cm * (c - m * b) - s.c0 * c;
            assert!(affine.abs() < 1e-9 * s.c0);
            // u = t²/2 has second derivative 1 on any arms
            let curv = s.cp * a * a / 2.0 + s.cm * b * b / 2.0;
            assert!((curv - 1.0).abs() < 1e-12);
        }
    }
    assert!(unequal > 0);
}

#[test]
fn discrete_minus_on_half_square_is_k() {
    for k in 1..=2 {
        let d = disc(2, k, 1.0 / 8.0);
        let u = d.sample(|x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
        for i in full_arm_nodes(&d) {
            assert!((d.operator_at(OperatorSign::Minus, &u, i) - k as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn frame_extremes_bracket_and_tighten() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1.0 / 32.0;
    let schemes: Vec<Discretization> = (1..=4).map(|s| disc(s, 1, h)).collect();
    for _ in 0..20 {
        let a = random_sym2(&mut rng);
        let lo = SpectralOperator::MinusK(1).apply(&a).unwrap();
        let hi = SpectralOperator::PlusK(1).apply(&a).unwrap();
        let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
        // the origin has full arms for every order used here
        for d in &schemes {
            let u = quadratic(d, &a);
            let i = d.grid().node_index(&[0, 0, 0]).unwrap();
            let m = d.operator_at(OperatorSign::Minus, &u, i);
            let p = d.operator_at(OperatorSign::Plus, &u, i);
            assert!(m >= lo - 1e-12 && p <= hi + 1e-12);
            assert!(m <= prev.0 + 1e-12 && p >= prev.1 - 1e-12);
            prev = (m, p);
        }
    }
}

#[test]
fn order_three_resolves_lowest_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = disc(3, 1, 1.0 / 16.0);
    let i = d.grid().node_index(&[0, 0, 0]).unwrap();
    for _ in 0..100 {
        let a = random_sym2(&mut rng);
        let gap = d.operator_at(OperatorSign::Minus, &quadratic(&d, &a), i) - a.eigenvalues().unwrap()[0];
        assert!(gap >= -1e-12 && gap <= 0.1 * a.norm().unwrap());
    }
}

#[test]
fn missing_frames_are_configuration_errors() {
    assert!(StencilScheme::new(2, 3, 3).is_err());
    assert!(StencilScheme::new(3, 1, 3).is_ok());
}

#[test]
fn tiny_arms_are_floored_and_counted() {
    let h = 0.25;
    let dom = CRDomain::ball(0.5 + 1e-7, &[0.0, 0.0]).unwrap();
    let d = Discretization::build(&dom, h, StencilScheme::new(2, 1, 1).unwrap()).unwrap();
    assert!(d.grid().floored_arms() > 0);
    let nd = d.scheme().directions().len();
    for i in 0..d.len() {
        for j in 0..nd {
            for side in 0..2 {
                assert!(d.grid().arm(i, j, side).length >= ARM_FLOOR * h);
            }
        }
    }
}

#[test]
fn homogeneity_is_exact_for_dyadic_factors() {
    let d = disc(2, 1, 1.0 / 16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u: Vec<f64> = (0..d.len()).map(|_| rng.random_range(0.0..1.0)).collect();
    for sign in [OperatorSign::Minus, OperatorSign::Plus, OperatorSign::Mean] {
        let base = d.apply(sign, &u);
        for t in [0.5, 2.0, 8.0] {
            let scaled: Vec<f64> = u.iter().map(|v| t * v).collect();
            let got = d.apply(sign, &scaled);
            assert!(got.iter().zip(&base).all(|(g, b)| *g == t * b));
        }
        let scaled: Vec<f64> = u.iter().map(|v| 3.0 * v).collect();
        for (g, b) in d.apply(sign, &scaled).iter().zip(&base) {
            assert!((g - 3.0 * b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nondecreasing_in_neighbor_values(seed in any::<u64>(), eps in 1e-6f64..1.0) {
        let d = disc(2, 1, 0.125);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nd = d.scheme().directions().len();
        for i in (0..d.len()).step_by(3) {
            let neighbors: Vec<u32> = (0..nd)
                .flat_map(|j| [d.stencil(i, j).plus, d.stencil(i, j).minus])
                .filter(|&n| n != u32::MAX)
                .collect();
            for sign in [OperatorSign::Minus, OperatorSign::Plus, OperatorSign::Mean] {
                let base = d.operator_at(sign, &u, i);
                for &n in &neighbors {
                    let mut w = u.clone();
                    w[n as usize] += eps;
                    prop_assert!(d.operator_at(sign, &w, i) >= base - 1e-12);
                }
                // raising the center value lowers the operator
                let mut w = u.clone();
                w[i] += eps;
                prop_assert!(d.operator_at(sign, &w, i) <= base + 1e-12);
            }
        }
    }

    #[test]
    fn minus_never_exceeds_plus(seed in any::<u64>()) {
        let d = disc(2, 1, 0.125);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for i in 0..d.len() {
            let m = d.operator_at(OperatorSign::Minus, &u, i);
            let a = d.operator_at(OperatorSign::Mean, &u, i);
            let p = d.operator_at(OperatorSign::Plus, &u, i);
            prop_assert!(m <= a + 1e-14 && a <= p + 1e-14);
        }
    }
}
