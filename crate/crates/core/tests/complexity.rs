use alrisk::complexity::{
    rademacher, rademacher_exact_finite, rademacher_finite, HypothesisClass, InnerKind, InnerMethod, SignDraws,
};
use alrisk::data::Pool;
use alrisk::hypotheses::{loss, Domain, Hypothesis, Params, SettingId};
use alrisk::rng::rng;
use proptest::prelude::*;

/// Independent enumeration: nested sign loops written out directly.
fn brute_force(values: &[Vec<f64>]) -> f64 {
    let m = values[0].len();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut sigma = vec![-1.0; m];
    loop {
        let best = values
            .iter()
            .map(|k| k.iter().zip(&sigma).map(|(v, s)| v * s).sum::<f64>() / m as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        total += best;
        count += 1;
        // increment sigma as a binary counter
        let mut i = 0;
        while i < m && sigma[i] == 1.0 {
            sigma[i] = -1.0;
            i += 1;
        }
        if i == m {
            break;
        }
        sigma[i] = 1.0;
    }
    total / count as f64
}

fn matrix(k: usize, m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, m), k)
}

#[test]
fn finite_examples() {
    assert_eq!(rademacher_exact_finite(&[vec![0.0; 4]]).unwrap(), 0.0);
    assert_eq!(rademacher_exact_finite(&[vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap(), 0.5);
    assert!(rademacher_exact_finite(&[vec![1.0; 21]]).is_err());
}

fn linear(w: f64, b: f64) -> Hypothesis {
    Hypothesis::new(SettingId::LinL1, Params::Linear { w: vec![w], b }).unwrap()
}

fn pool(points: &[(f64, f64)]) -> Pool {
    let mut p = Pool::new(1, 1.0, 1.0).unwrap();
    for &(x, y) in points {
        p.push(vec![x], Some(y)).unwrap();
    }
    p
}

#[test]
fn three_hypotheses_agree_with_the_exact_routine() {
    let data = pool(&[(0.2, 0.5), (-0.7, -0.1), (0.9, 0.3)]);
    let hs = vec![linear(0.3, 0.1), linear(-0.8, 0.0), linear(0.5, -0.4)];
    let values: Vec<Vec<f64>> = hs
        .iter()
        .map(|h| {
            data.labeled()
                .map(|(x, y)| loss(h.setting().loss(), y, h.predict(x).unwrap()).unwrap())
                .collect()
        })
        .collect();
    let e = rademacher(
        &HypothesisClass::Finite(hs),
        &data,
        SignDraws::Exhaustive,
        &InnerMethod::Enumeration,
        0,
    )
    .unwrap();
    assert_eq!(e.value, rademacher_exact_finite(&values).unwrap());
    assert_eq!(e.inner_method, InnerKind::Enumeration);
    assert!((e.value - brute_force(&values)).abs() < 1e-15);
}

#[test]
fn empty_data_is_an_error() {
    let empty = Pool::new(1, 1.0, 1.0).unwrap();
    let class = HypothesisClass::Finite(vec![linear(0.0, 0.0)]);
    assert!(rademacher(&class, &empty, SignDraws::Random(10), &InnerMethod::Enumeration, 0).is_err());
    let data = pool(&[(0.1, 0.1)]);
    assert!(rademacher(&class, &data, SignDraws::Random(0), &InnerMethod::Enumeration, 0).is_err());
}

#[test]
fn ascent_and_random_search_agree_on_two_points() {
    let data = pool(&[(0.35, 0.2), (-0.6, -0.45)]);
    let class = HypothesisClass::constrained(linear(0.0, 0.0), &Domain::new(1.0, 1.0)).unwrap();
    let ascent = rademacher(
        &class,
        &data,
        SignDraws::Random(10_000),
        &InnerMethod::ProjectedAscent {
            restarts: 3,
            steps: 60,
            probes: 32,
            step_scale: 0.5,
        },
        1,
    )
    .unwrap();
    let search = rademacher(
        &class,
        &data,
        SignDraws::Random(10_000),
        &InnerMethod::RandomSearch { probes: 4000 },
        2,
    )
    .unwrap();
    let se = (ascent.std_error.powi(2) + search.std_error.powi(2)).sqrt();
    assert!(
        (ascent.value - search.value).abs() <= 3.0 * se,
        "{ascent:?} vs {search:?}"
    );
    assert_eq!(ascent.inner_method, InnerKind::ProjectedAscent);
    assert_eq!(search.inner_method, InnerKind::RandomSearch);
}

#[test]
fn constrained_estimate_is_deterministic() {
    let data = pool(&[(0.35, 0.2), (-0.6, -0.45), (0.1, 0.9)]);
    let class = HypothesisClass::constrained(linear(0.0, 0.0), &Domain::new(1.0, 1.0)).unwrap();
    let a = rademacher(&class, &data, SignDraws::Random(64), &InnerMethod::default(), 5).unwrap();
    let b = rademacher(&class, &data, SignDraws::Random(64), &InnerMethod::default(), 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.num_sigma, 64);
    assert_eq!(a.m, 3);
}

#[test]
fn monte_carlo_converges_on_a_small_class() {
    let mut r = rng(44);
    let values: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..6).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let exact = rademacher_exact_finite(&values).unwrap();
    let mc = rademacher_finite(&values, SignDraws::Random(10_000), 3).unwrap();
    assert!((mc.value - exact).abs() <= 4.0 * mc.std_error, "{mc:?} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_matches_brute_force(v in (1usize..5, 1usize..9).prop_flat_map(|(k, m)| matrix(k, m))) {
        let e = rademacher_exact_finite(&v).unwrap();
        prop_assert!((e - brute_force(&v)).abs() < 1e-12);
    }

    #[test]
    fn adding_a_hypothesis_never_decreases(
        (v, extra) in (1usize..5, 1usize..9).prop_flat_map(|(k, m)| (matrix(k, m), prop::collection::vec(-2.0f64..2.0, m)))
    ) {
        let before = rademacher_exact_finite(&v).unwrap();
        let mut bigger = v.clone();
        bigger.push(extra);
        prop_assert!(rademacher_exact_finite(&bigger).unwrap() >= before - 1e-15);
    }

    #[test]
    fn bounded_by_the_largest_value(v in (1usize..5, 1usize..9).prop_flat_map(|(k, m)| matrix(k, m))) {
        let b = v.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assert!(rademacher_exact_finite(&v).unwrap() <= b + 1e-15);
    }

    #[test]
    fn singletons_vanish(row in prop::collection::vec(-3.0f64..3.0, 1..12)) {
        prop_assert_eq!(rademacher_exact_finite(&[row.clone()]).unwrap(), 0.0);
        let e = rademacher_finite(&[row], SignDraws::Exhaustive, 0).unwrap();
        prop_assert_eq!(e.value, 0.0);
    }
}
