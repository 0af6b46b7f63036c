use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trunclap_core::spectral::{eigenvalues_sorted, frame_sum, sample_inf_sup, Frame, SpectralOperator, SymMat};

/// Number of eigenvalues of `x` below `lambda`, from the inertia of `x − λI`
/// (Sylvester's law: count of negative pivots of a symmetric elimination).
fn count_below(x: &SymMat, lambda: f64) -> usize {
    let n = x.dim();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| x.get(i, j)).collect()).collect();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let mut neg = 0;
    for c in 0..n {
        let mut piv = a[c][c];
        if piv == 0.0 {
            piv = -1e-300;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for r in c + 1..n {
            let f = a[r][c] / piv;
            let pivot_row = a[c].clone();
            for (x, y) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                *x -= f * y;
            }
        }
    }
    neg
}

/// Eigenvalues by bisection on the inertia count, bracketed by Gershgorin discs.
fn bisection_eigenvalues(x: &SymMat) -> Vec<f64> {
    let n = x.dim();
    let g = (0..n).map(|i| (0..n).map(|j| x.get(i, j).abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    (0..n)
        .map(|m| {
            let (mut lo, mut hi) = (-g, g);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(x, mid) > m {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn sym(n: usize, v: &[f64]) -> SymMat {
    let mut m = SymMat::zeros(n).unwrap();
    let mut it = v.iter();
    for i in 0..n {
        for j in i..n {
            m.set(i, j, *it.next().unwrap());
        }
    }
    m
}

fn matrix() -> impl Strategy<Value = SymMat> {
    (2usize..=5).prop_flat_map(|n| prop::collection::vec(-10.0f64..10.0, n * (n + 1) / 2).prop_map(move |v| sym(n, &v)))
}

fn pair() -> impl Strategy<Value = (SymMat, SymMat, usize)> {
    (2usize..=5).prop_flat_map(|n| {
        let len = n * (n + 1) / 2;
        (prop::collection::vec(-10.0f64..10.0, len), prop::collection::vec(-10.0f64..10.0, len), 1..n)
            .prop_map(move |(a, b, k)| (sym(n, &a), sym(n, &b), k))
    })
}

fn tol(x: &SymMat) -> f64 {
    1e-10 * (1.0 + x.norm().unwrap())
}

/// Every operator family the crate evaluates, with `k = 2` where one is needed.
fn zoo(n: usize) -> Vec<SpectralOperator> {
    use SpectralOperator::*;
    let mut w = vec![0.0; n];
    w[0] = 0.25;
    w[n - 1] = 0.75;
    let mut ops = vec![MinusK(1), PlusK(1), WeightedSum(w), PartialSum(vec![1, n])];
    if n >= 4 {
        ops.push(MaxOf(vec![PartialSum(vec![1, 4]), PartialSum(vec![2, 3])]));
        ops.push(MinOf(vec![PartialSum(vec![1, 4]), PartialSum(vec![2, 3])]));
    }
    ops.push(Mean(vec![MinusK(2), PlusK(2)]));
    ops
}

#[test]
fn eigenvalues_match_inertia_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = SymMat::random(4, &mut rng).unwrap();
        let fast = eigenvalues_sorted(&x).unwrap();
        let slow = bisection_eigenvalues(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-8, "{fast:?} vs {slow:?}");
        }
    }
}

#[test]
fn rank_one_top_eigenvalue() {
    let e = eigenvalues_sorted(&SymMat::outer(&[3.0, 4.0]).unwrap()).unwrap();
    assert!(e[0].abs() < 1e-12);
    assert!((e[1] - 25.0).abs() < 1e-12);
}

#[test]
fn random_frames_bracket_by_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = SymMat::random(3, &mut rng).unwrap();
    let lo = SpectralOperator::MinusK(2).apply(&x).unwrap();
    let hi = SpectralOperator::PlusK(2).apply(&x).unwrap();
    for _ in 0..10_000 {
        let f = Frame::random(3, 2, &mut rng).unwrap();
        let s = frame_sum(&x, &f).unwrap();
        assert!(s >= lo - 1e-12 && s <= hi + 1e-12);
    }
}

#[test]
fn sampled_inf_approaches_lowest_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = SymMat::random(3, &mut rng).unwrap();
    let (lo, hi) = sample_inf_sup(&x, 1, 100_000, &mut rng).unwrap();
    let e = eigenvalues_sorted(&x).unwrap();
    let nrm = x.norm().unwrap();
    assert!(lo >= e[0] && lo - e[0] <= 0.05 * nrm);
    assert!(hi <= e[2] && e[2] - hi <= 0.05 * nrm);
}

#[test]
fn sampled_inf_of_rank_one_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = SymMat::outer(&[1.0, -2.0, 0.5]).unwrap();
    let (lo, _) = sample_inf_sup(&x, 1, 1000, &mut rng).unwrap();
    assert!(lo >= 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn trace_is_eigenvalue_sum(x in matrix()) {
        let s: f64 = eigenvalues_sorted(&x).unwrap().iter().sum();
        prop_assert!((s - x.trace()).abs() <= tol(&x));
    }

    #[test]
    fn duality((x, _, k) in pair()) {
        let plus = SpectralOperator::PlusK(k).apply(&x).unwrap();
        let minus = SpectralOperator::MinusK(k).apply(&x.scaled(-1.0)).unwrap();
        prop_assert!((plus + minus).abs() <= 1e-12 * (1.0 + x.norm().unwrap()));
    }

    #[test]
    fn monotone_under_psd_increments(x in matrix(), seed in any::<u64>()) {
        let n = x.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = x.add(&SymMat::random_psd(n, &mut rng).unwrap()).unwrap();
        for op in zoo(n) {
            prop_assert!(op.apply(&x).unwrap() <= op.apply(&y).unwrap() + 1e-10 * (1.0 + y.norm().unwrap()));
        }
    }

    #[test]
    fn positively_homogeneous(x in matrix()) {
        for op in zoo(x.dim()) {
            let base = op.apply(&x).unwrap();
            for t in [0.5, 2.0, 10.0] {
                let v = op.apply(&x.scaled(t)).unwrap();
                prop_assert!((v - t * base).abs() <= 1e-10 * (1.0 + (t * base).abs()) * (1.0 + x.norm().unwrap()));
            }
        }
    }

    #[test]
    fn difference_inequalities((x, y, k) in pair()) {
        let lo = SpectralOperator::MinusK(k).apply(&x.sub(&y).unwrap()).unwrap();
        let hi = SpectralOperator::PlusK(k).apply(&x.sub(&y).unwrap()).unwrap();
        let t = 1e-10 * (1.0 + x.norm().unwrap() + y.norm().unwrap());
        for op in [SpectralOperator::MinusK(k), SpectralOperator::PlusK(k)] {
            let d = op.apply(&x).unwrap() - op.apply(&y).unwrap();
            prop_assert!(lo <= d + t && d <= hi + t);
        }
    }

    #[test]
    fn lipschitz((x, y, k) in pair()) {
        let gap = x.sub(&y).unwrap().norm().unwrap();
        let t = 1e-10 * (1.0 + x.norm().unwrap() + y.norm().unwrap());
        for op in [SpectralOperator::MinusK(k), SpectralOperator::PlusK(k)] {
            let d = (op.apply(&x).unwrap() - op.apply(&y).unwrap()).abs();
            prop_assert!(d <= k as f64 * gap + t);
        }
    }

    #[test]
    fn concave_and_convex((x, y, k) in pair()) {
        let mid = x.add(&y).unwrap().scaled(0.5);
        let t = 1e-10 * (1.0 + x.norm().unwrap() + y.norm().unwrap());
        let m = SpectralOperator::MinusK(k);
        let p = SpectralOperator::PlusK(k);
        prop_assert!(m.apply(&mid).unwrap() >= 0.5 * (m.apply(&x).unwrap() + m.apply(&y).unwrap()) - t);
        prop_assert!(p.apply(&mid).unwrap() <= 0.5 * (p.apply(&x).unwrap() + p.apply(&y).unwrap()) + t);
    }

    #[test]
    fn intermediate_operators_are_bracketed(x in matrix()) {
        use SpectralOperator::*;
        let n = x.dim();
        let t = tol(&x);
        // k = 1: convex combinations of eigenvalues
        let w: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
        let total: f64 = w.iter().sum();
        let ops1 = [WeightedSum(w.iter().map(|v| v / total).collect()), PartialSum(vec![n / 2 + 1])];
        for op in ops1 {
            let v = op.apply(&x).unwrap();
            prop_assert!(MinusK(1).apply(&x).unwrap() <= v + t && v <= PlusK(1).apply(&x).unwrap() + t);
        }
        // k = 2: pair sums and their max, min and mean
        let pairs = vec![PartialSum(vec![1, n]), PartialSum(vec![1, 2]), PartialSum(vec![n - 1, n])];
        let ops2 = [MaxOf(pairs.clone()), MinOf(pairs.clone()), Mean(pairs)];
        for op in ops2 {
            let v = op.apply(&x).unwrap();
            prop_assert!(MinusK(2).apply(&x).unwrap() <= v + t && v <= PlusK(2).apply(&x).unwrap() + t);
        }
    }

    #[test]
    fn frame_sum_bracketed(x in matrix(), seed in any::<u64>()) {
        let n = x.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 1..=n {
            let s = frame_sum(&x, &Frame::random(n, k, &mut rng).unwrap()).unwrap();
            let t = tol(&x);
            prop_assert!(SpectralOperator::MinusK(k).apply(&x).unwrap() <= s + t);
            prop_assert!(s <= SpectralOperator::PlusK(k).apply(&x).unwrap() + t);
        }
    }
}
