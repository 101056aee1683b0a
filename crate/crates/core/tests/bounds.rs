use alrisk::bounds::{
    assemble_bound, coverage_experiment, deviation_term, empirical_risk, run_bound, true_risk_mc, BoundReport,
};
use alrisk::complexity::RadEstimate;
use alrisk::config::ExperimentConfig;
use alrisk::data::Pool;
use alrisk::hypotheses::{Hypothesis, Params, SettingId};
use alrisk::ipm::{empirical_ipm, Generator, IpmEstimate, IpmSpec};
use alrisk::task::{make_builtin_task, sample_iid, sample_unlabeled, QueryDistribution};
use proptest::prelude::*;

fn lin(w: f64, b: f64) -> Hypothesis {
    Hypothesis::new(SettingId::LinL1, Params::Linear { w: vec![w], b }).unwrap()
}

fn constant_pool(m: usize, y: f64) -> Pool {
    let mut p = Pool::new(1, 1.0, 1.0).unwrap();
    for i in 0..m {
        p.push(vec![i as f64 / m as f64], Some(y)).unwrap();
    }
    p
}

fn rad(value: f64, m: usize) -> RadEstimate {
    RadEstimate {
        value,
        ..RadEstimate::zero(m)
    }
}

fn ipm(value: f64, m: usize) -> IpmEstimate {
    IpmEstimate {
        value,
        ..IpmEstimate::zero(Generator::Kantorovich, m)
    }
}

fn small_config(task: &str, setting: SettingId) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(task, setting);
    cfg.pool_size = 60;
    cfg.sample_size = 20;
    cfg.mc.num_sigma = 16;
    cfg.mc.true_risk_n = 2000;
    cfg.optimizer.steps = 50;
    cfg
}

#[test]
fn empirical_risk_examples() {
    let mut p = Pool::new(1, 1.0, 1.0).unwrap();
    p.push(vec![0.5], Some(0.25)).unwrap();
    assert_eq!(empirical_risk(&lin(0.5, 0.0), &p).unwrap(), 0.0);

    let mut p = Pool::new(1, 1.0, 1.0).unwrap();
    p.push(vec![0.2], Some(1.0)).unwrap();
    p.push(vec![0.2], Some(-1.0)).unwrap();
    assert_eq!(empirical_risk(&lin(0.0, 0.0), &p).unwrap(), 1.0);

    let p = sample_iid(&make_builtin_task("lin1d").unwrap(), 3, 5).unwrap();
    let h = lin(-0.3, 0.2);
    let hand: f64 = (0..3)
        .map(|i| (p.label(i).unwrap() - (-0.3 * p.point(i)[0] + 0.2)).abs())
        .sum::<f64>()
        / 3.0;
    assert!((empirical_risk(&h, &p).unwrap() - hand).abs() < 1e-15);
    assert!(empirical_risk(&h, &Pool::new(1, 1.0, 1.0).unwrap()).is_err());
}

#[test]
fn true_risk_examples() {
    let task = make_builtin_task("lin1d").unwrap();
    let exact = true_risk_mc(&lin(0.5, 0.0), &task, 1000, 1).unwrap();
    assert_eq!((exact.estimate, exact.ci_half_width), (0.0, 0.0));
    let zero = true_risk_mc(&lin(0.0, 0.0), &task, 100_000, 2).unwrap();
    // closed form: E|0.5 x| = 0.25 under U[-1, 1]
    assert!((zero.estimate - 0.25).abs() <= zero.ci_half_width, "{zero:?}");
}

#[test]
fn assembled_examples() {
    let delta = 4.0 * (-2.0f64).exp();
    let r = assemble_bound(&lin(0.0, 0.0), &constant_pool(4, 0.0), &ipm(0.0, 4), &rad(0.0, 4), delta, 1.0).unwrap();
    assert!((r.rhs_total - 1.0).abs() < 1e-12);

    let p = constant_pool(100, 0.2);
    let r = assemble_bound(&lin(0.0, 0.0), &p, &ipm(0.1, 100), &rad(0.05, 100), 0.1, 1.0).unwrap();
    let expected = 0.2 + 0.1 + 2.0 * 0.05 + (2.0 * 40f64.ln() / 100.0).sqrt();
    assert!((r.rhs_total - expected).abs() < 1e-12);
    assert!((r.deviation_term - (2.0 * 40f64.ln() / 100.0).sqrt()).abs() < 1e-12);
    assert!(r.note.contains("lower estimate"));

    let empty = Pool::new(1, 1.0, 1.0).unwrap();
    assert!(assemble_bound(&lin(0.0, 0.0), &empty, &ipm(0.0, 0), &rad(0.0, 0), 0.1, 1.0).is_err());
    assert!(assemble_bound(&lin(0.0, 0.0), &p, &ipm(0.0, 100), &rad(0.0, 100), 1.5, 1.0).is_err());
    assert!(assemble_bound(&lin(0.0, 0.0), &p, &ipm(0.0, 100), &rad(0.0, 100), 0.1, 0.0).is_err());
    // components from a different sample are refused
    assert!(assemble_bound(&lin(0.0, 0.0), &p, &ipm(0.0, 99), &rad(0.0, 100), 0.1, 1.0).is_err());
}

#[test]
fn queried_equal_to_pool_gives_the_passive_form() {
    let task = make_builtin_task("lin2d").unwrap();
    let pool = sample_iid(&task, 30, 3).unwrap();
    let h = Hypothesis::new(
        SettingId::LinL1,
        Params::Linear {
            w: vec![0.3, -0.2],
            b: 0.0,
        },
    )
    .unwrap();
    let e = empirical_ipm(pool.points(), pool.points(), &IpmSpec::new(Generator::Kantorovich)).unwrap();
    assert_eq!(e.value, 0.0);
    let r = assemble_bound(&h, &pool, &e, &rad(0.07, 30), 0.05, 2.0).unwrap();
    assert_eq!(r.rhs_total, r.passive_rhs());
}

#[test]
fn biased_queries_have_larger_ipm() {
    let task = make_builtin_task("lin1d").unwrap();
    let spec = IpmSpec::new(Generator::Kantorovich);
    let biased = QueryDistribution::Subregion { axis: 0, lo: 0.0, hi: 1.0 };
    let (mut unbiased_sum, mut biased_sum) = (0.0, 0.0);
    for s in 0..20 {
        let pool = sample_unlabeled(&task, 200, 1000 + s).unwrap();
        let q0 = QueryDistribution::Marginal.sample(&task, 30, s).unwrap();
        let q1 = biased.sample(&task, 30, s).unwrap();
        unbiased_sum += empirical_ipm(pool.points(), q0.points(), &spec).unwrap().value;
        biased_sum += empirical_ipm(pool.points(), q1.points(), &spec).unwrap().value;
    }
    assert!(biased_sum > unbiased_sum, "{biased_sum} vs {unbiased_sum}");
}

#[test]
fn coverage_is_a_fraction_and_csv_has_the_columns() {
    let cfg = small_config("lin1d", SettingId::LinL1);
    let res = coverage_experiment(&cfg, 10).unwrap();
    assert!((0.0..=1.0).contains(&res.coverage));
    assert_eq!(res.rows.len(), 10);
    assert_eq!(res.failures.len(), res.rows.iter().filter(|r| !r.holds).count());
    let mut buf = Vec::new();
    res.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "rep,emp_risk,ipm,rad,dev,rhs,true_risk,holds");
    assert_eq!(text.lines().count(), 11);
    assert!(coverage_experiment(&cfg, 0).is_err());
    assert_eq!(res.summary_line(), format!("coverage={} delta=0.1", res.coverage));
}

#[test]
fn run_bound_report_is_consistent_and_serializes() {
    for (task, setting) in [
        ("lin1d", SettingId::LinL1),
        ("lin2d", SettingId::LinL2),
        ("lin2d", SettingId::GaussL1),
        ("mix2d01", SettingId::LogisticLog),
        ("mix2d", SettingId::SvmHinge),
        ("mix2d", SettingId::NnHinge),
    ] {
        let run = run_bound(&small_config(task, setting), 3).unwrap();
        let r = &run.report;
        assert_eq!(r.rhs_total, r.recompose());
        assert_eq!(r.ipm_term.generator, setting.generator());
        assert!(r.holds.is_some() && r.true_risk_mc.is_some());
        let text = serde_json::to_string(r).unwrap();
        assert_eq!(&serde_json::from_str::<BoundReport>(&text).unwrap(), r);
    }
}

proptest! {
    #[test]
    fn composition_and_monotonicity(
        emp in 0.0f64..2.0,
        iv in 0.0f64..2.0,
        rv in 0.0f64..1.0,
        m in 1usize..40,
        delta in 0.001f64..0.999,
        c in 0.01f64..5.0,
    ) {
        let p = constant_pool(m, emp.min(1.0));
        let r = assemble_bound(&lin(0.0, 0.0), &p, &ipm(iv, m), &rad(rv, m), delta, c).unwrap();
        let recomposed = r.empirical_risk + r.ipm_term.value + 2.0 * r.rad_term.value + r.deviation_term;
        prop_assert!((r.rhs_total - recomposed).abs() <= 1e-12);
        prop_assert!((r.deviation_term - c * (2.0 * (4.0 / delta).ln() / m as f64).sqrt()).abs() <= 1e-12);
        let bigger_c = assemble_bound(&lin(0.0, 0.0), &p, &ipm(iv, m), &rad(rv, m), delta, c * 1.5).unwrap();
        prop_assert!(bigger_c.rhs_total >= r.rhs_total);
        let bigger_delta = assemble_bound(&lin(0.0, 0.0), &p, &ipm(iv, m), &rad(rv, m), (delta + 1.0) / 2.0, c).unwrap();
        prop_assert!(bigger_delta.rhs_total <= r.rhs_total);
        prop_assert!(deviation_term(c, delta, m + 1).unwrap() <= deviation_term(c, delta, m).unwrap());
    }
}
