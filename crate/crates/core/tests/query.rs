use alrisk::config::ExperimentConfig;
use alrisk::data::Pool;
use alrisk::hypotheses::{Hypothesis, Params, SettingId};
use alrisk::ipm::{empirical_ipm, Generator, IpmSpec};
use alrisk::query::{
    al_loop, informativeness, select_hybrid, select_random, select_representative, select_representative_traced,
    select_uncertainty, write_curve_csv, QueryStrategy, Representativeness,
};
use alrisk::rng::rng;
use alrisk::task::{make_builtin_task, sample_unlabeled};
use proptest::prelude::*;
use rand::Rng;

fn pool_1d(xs: &[f64]) -> Pool {
    let mut p = Pool::new(1, 2.0, 1.0).unwrap();
    for &x in xs {
        p.push(vec![x], None).unwrap();
    }
    p
}

fn svm(w: f64, b: f64) -> Hypothesis {
    Hypothesis::new(SettingId::SvmHinge, Params::Linear { w: vec![w], b }).unwrap()
}

fn kantorovich() -> IpmSpec {
    IpmSpec::new(Generator::Kantorovich)
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[test]
fn uncertainty_examples() {
    let p = pool_1d(&[0.9, 0.1, 0.5]);
    assert_eq!(select_uncertainty(&p, 1, &svm(1.0, 0.0)).unwrap(), vec![1]);
    assert_eq!(sorted(select_uncertainty(&p, 3, &svm(1.0, 0.0)).unwrap()), vec![0, 1, 2]);
    let tied = pool_1d(&[0.4, -0.2, 0.2]);
    assert_eq!(select_uncertainty(&tied, 1, &svm(1.0, 0.0)).unwrap(), vec![1]);
    assert!(select_uncertainty(&p, 4, &svm(1.0, 0.0)).is_err());
}

#[test]
fn representative_examples() {
    let p = pool_1d(&[-1.0, -1.0, 1.0, 1.0]);
    let picks = select_representative(&p, 2, &kantorovich()).unwrap();
    let xs: Vec<f64> = picks.iter().map(|&i| p.point(i)[0]).collect();
    assert!(xs.contains(&-1.0) && xs.contains(&1.0), "{xs:?}");
    // oracle: over all 2-subsets, the cross-cluster ones are the unique minimizers
    let all = [-1.0, -1.0, 1.0, 1.0];
    for i in 0..4 {
        for j in i + 1..4 {
            let d = empirical_ipm(&[vec![all[i]], vec![all[j]]], &all.map(|x| vec![x]), &kantorovich()).unwrap().value;
            assert_eq!(d == 0.0, all[i] != all[j]);
        }
    }

    let p = pool_1d(&[-0.8, -0.3, 0.1, 0.6, 0.9]);
    let trace = select_representative_traced(&p, 5, &kantorovich()).unwrap();
    assert_eq!(trace.last().unwrap().1, 0.0);
    assert!(select_representative(&p, 6, &kantorovich()).is_err());

    let p = pool_1d(&[0.3, 0.3, 0.3]);
    assert_eq!(select_representative(&p, 1, &kantorovich()).unwrap(), vec![0]);
}

#[test]
fn greedy_steps_are_argmins() {
    let mut r = rng(8);
    for generator in [Generator::Kantorovich, Generator::TotalVariation] {
        let mut p = Pool::new(2, 1.5, 1.0).unwrap();
        for _ in 0..14 {
            p.push(vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)], None).unwrap();
        }
        p.set_label(3, 0.0).unwrap();
        let spec = IpmSpec::new(generator).with_bins(3);
        let objective = Representativeness::new(&p, &spec).unwrap();
        let trace = select_representative_traced(&p, 5, &spec).unwrap();
        let mut chosen = vec![3];
        for &(pick, value) in &trace {
            let mut with_pick = chosen.clone();
            with_pick.push(pick);
            assert_eq!(objective.ipm(&with_pick).unwrap(), value);
            for c in p.unlabeled_indices() {
                if chosen.contains(&c) {
                    continue;
                }
                let mut s = chosen.clone();
                s.push(c);
                let v = objective.ipm(&s).unwrap();
                assert!(v > value || (v == value && c >= pick), "{generator:?}: {c} beats {pick}");
            }
            chosen.push(pick);
        }
    }
}

/// Independent restatement of the hybrid rule for one step.
fn hybrid_oracle(pool: &Pool, k: usize, h: &Hypothesis, lambda: f64, spec: &IpmSpec) -> Vec<usize> {
    let mut inf = informativeness(pool, h).unwrap();
    inf.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let n = inf.len();
    let rank: Vec<(usize, f64)> = inf
        .iter()
        .enumerate()
        .map(|(r, &(i, _))| (i, if n > 1 { 1.0 - r as f64 / (n - 1) as f64 } else { 1.0 }))
        .collect();
    let objective = Representativeness::new(pool, spec).unwrap();
    let mut chosen = pool.labeled_indices();
    let mut picks = Vec::new();
    for _ in 0..k {
        let cands: Vec<(usize, f64, f64)> = rank
            .iter()
            .filter(|(i, _)| !picks.contains(i))
            .map(|&(i, s)| {
                let mut c = chosen.clone();
                c.push(i);
                (i, s, objective.ipm(&c).unwrap())
            })
            .collect();
        let norm = |vals: Vec<f64>, up: bool| -> Vec<f64> {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            vals.iter()
                .map(|&v| if hi > lo { if up { (v - lo) / (hi - lo) } else { (hi - v) / (hi - lo) } } else { 1.0 })
                .collect()
        };
        let a = norm(cands.iter().map(|c| c.1).collect(), true);
        let b = norm(cands.iter().map(|c| c.2).collect(), false);
        let mut best = 0;
        for j in 1..cands.len() {
            let (sj, sb) = (lambda * a[j] + (1.0 - lambda) * b[j], lambda * a[best] + (1.0 - lambda) * b[best]);
            let better = sj > sb
                || (sj == sb && (cands[j].2 < cands[best].2 || (cands[j].2 == cands[best].2 && cands[j].0 < cands[best].0)));
            if better {
                best = j;
            }
        }
        picks.push(cands[best].0);
        chosen.push(cands[best].0);
    }
    picks
}

#[test]
fn mixed_weight_differs_from_both_extremes() {
    // two clusters with the boundary of h between them; search small pools exhaustively
    let h = svm(1.0, -0.05);
    let spec = kantorovich();
    let mut found = None;
    for s in 0..200 {
        let mut r = rng(s);
        let xs: Vec<f64> = (0..8)
            .map(|i| if i % 2 == 0 { -1.0 } else { 1.0 } + r.random_range(-0.3..0.3) * if i < 6 { 1.0 } else { 3.0 })
            .collect();
        let p = pool_1d(&xs);
        let mid = sorted(select_hybrid(&p, 3, &h, 0.5, &spec).unwrap());
        let unc = sorted(select_uncertainty(&p, 3, &h).unwrap());
        let rep = sorted(select_representative(&p, 3, &spec).unwrap());
        if mid != unc && mid != rep {
            assert_eq!(
                select_hybrid(&p, 3, &h, 0.5, &spec).unwrap(),
                hybrid_oracle(&p, 3, &h, 0.5, &spec)
            );
            found = Some(s);
            break;
        }
    }
    assert!(found.is_some(), "no instance separates lambda = 0.5 from both extremes");
}

#[test]
fn hybrid_rejects_bad_lambda() {
    let p = pool_1d(&[0.1, 0.2]);
    assert!(select_hybrid(&p, 1, &svm(1.0, 0.0), 1.5, &kantorovich()).is_err());
    assert!(select_hybrid(&p, 1, &svm(1.0, 0.0), -0.1, &kantorovich()).is_err());
    assert!(QueryStrategy::Hybrid { lambda: f64::NAN, generator: None }.validate().is_err());
}

#[test]
fn random_selection_is_a_subset_and_deterministic() {
    let mut p = pool_1d(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
    p.set_label(2, 0.0).unwrap();
    let a = select_random(&p, 3, 9).unwrap();
    assert_eq!(a, select_random(&p, 3, 9).unwrap());
    assert!(!a.contains(&2) && a.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(select_random(&p, 5, 1).unwrap(), vec![0, 1, 3, 4, 5]);
    assert!(select_random(&p, 6, 1).is_err());
}

fn loop_config(strategy: QueryStrategy, budget: Vec<usize>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("lin1d", SettingId::LinL1);
    cfg.pool_size = 30;
    cfg.budget = budget;
    cfg.strategy = strategy;
    cfg.mc.num_sigma = 8;
    cfg.mc.true_risk_n = 1000;
    cfg.optimizer.steps = 40;
    cfg
}

#[test]
fn full_budget_reproduces_the_pool() {
    let recs = al_loop(&loop_config(QueryStrategy::Random, vec![30])).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].m, 30);
    assert_eq!(recs[0].ipm, 0.0);
}

#[test]
fn loop_grows_the_labeled_set_and_is_deterministic() {
    for strategy in [
        QueryStrategy::Random,
        QueryStrategy::Uncertainty,
        QueryStrategy::Representative { generator: None },
        QueryStrategy::Hybrid { lambda: 0.5, generator: Some(Generator::TotalVariation) },
    ] {
        let cfg = loop_config(strategy.clone(), vec![3, 3, 6, 10]);
        let recs = al_loop(&cfg).unwrap();
        assert_eq!(recs.iter().map(|r| r.m).collect::<Vec<_>>(), vec![3, 6, 10]);
        assert!(recs.iter().all(|r| r.strategy == strategy.name() && r.rhs >= r.emp_risk));
        assert_eq!(recs, al_loop(&cfg).unwrap());
        let mut buf = Vec::new();
        write_curve_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "round,m,strategy,emp_risk,true_risk,ipm,rhs");
    }
    assert!(al_loop(&loop_config(QueryStrategy::Random, vec![31])).is_err());
    assert!(al_loop(&loop_config(QueryStrategy::Random, vec![5, 4])).is_err());
}

#[test]
fn representative_beats_random_on_the_mixture_pool() {
    let task = make_builtin_task("mix2d").unwrap();
    let spec = kantorovich();
    let (mut rep, mut rnd) = (0.0, 0.0);
    for s in 0..50 {
        let pool = sample_unlabeled(&task, 200, s).unwrap();
        let ipm = |idx: Vec<usize>| {
            let pts: Vec<Vec<f64>> = idx.iter().map(|&i| pool.point(i).to_vec()).collect();
            empirical_ipm(pool.points(), &pts, &spec).unwrap().value
        };
        rep += ipm(select_representative(&pool, 4, &spec).unwrap());
        rnd += ipm(select_random(&pool, 4, 1000 + s).unwrap());
    }
    assert!(rep <= rnd, "{} vs {}", rep / 50.0, rnd / 50.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hybrid_degenerates_to_the_pure_strategies(
        xs in prop::collection::vec(-1.0f64..1.0, 2..10),
        w in -1.0f64..1.0,
        b in -0.5f64..0.5,
        k_frac in 0.0f64..1.0,
        tv in any::<bool>(),
    ) {
        let p = pool_1d(&xs);
        let k = 1 + (k_frac * (xs.len() - 1) as f64) as usize;
        let h = svm(w, b);
        let spec = IpmSpec::new(if tv { Generator::TotalVariation } else { Generator::Kantorovich }).with_bins(4);
        prop_assert_eq!(select_hybrid(&p, k, &h, 1.0, &spec).unwrap(), select_uncertainty(&p, k, &h).unwrap());
        prop_assert_eq!(select_hybrid(&p, k, &h, 0.0, &spec).unwrap(), select_representative(&p, k, &spec).unwrap());
    }

    #[test]
    fn strategies_are_pure(xs in prop::collection::vec(-1.0f64..1.0, 3..9), seed in any::<u64>()) {
        let p = pool_1d(&xs);
        let h = svm(0.7, 0.1);
        prop_assert_eq!(select_random(&p, 2, seed).unwrap(), select_random(&p, 2, seed).unwrap());
        prop_assert_eq!(
            select_hybrid(&p, 2, &h, 0.3, &kantorovich()).unwrap(),
            select_hybrid(&p, 2, &h, 0.3, &kantorovich()).unwrap()
        );
    }
}
