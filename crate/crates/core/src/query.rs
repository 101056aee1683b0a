//! Query strategies and the active-learning loop.
//!
//! Batches are built greedily. Informativeness is the classification margin
//! `|score(x)|` (the logit for the logistic class), or for regression the
//! negated distance to the nearest labeled point, a stand-in because residuals
//! of unlabeled points are unknown. Smaller scores are more informative.
//! Representativeness is the IPM between the labeled-plus-selected points and
//! the whole pool.

use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{assemble_bound, empirical_risk, true_risk_mc};
use crate::complexity::{rademacher, HypothesisClass, SignDraws};
use crate::config::ExperimentConfig;
use crate::data::{dist2, Pool};
use crate::error::{invalid, Error, Result};
use crate::hypotheses::train::{initial_hypothesis, training_domain};
use crate::hypotheses::{train, Hypothesis, SettingId};
use crate::ipm::{empirical_ipm, Generator, GridSpec, IpmSpec};
use crate::rng::{child, derive_seed, rng};
use crate::task::sample_unlabeled;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryStrategy {
    #[default]
    Random,
    Uncertainty,
    /// `generator` defaults to the setting's generator.
    Representative {
        #[serde(default)]
        generator: Option<Generator>,
    },
    Hybrid {
        lambda: f64,
        #[serde(default)]
        generator: Option<Generator>,
    },
}

impl QueryStrategy {
    pub fn validate(&self) -> Result<()> {
        if let QueryStrategy::Hybrid { lambda, .. } = self {
            if !(0.0..=1.0).contains(lambda) {
                return invalid(format!("lambda must lie in [0, 1], got {lambda}"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            QueryStrategy::Random => "random",
            QueryStrategy::Uncertainty => "uncertainty",
            QueryStrategy::Representative { .. } => "representative",
            QueryStrategy::Hybrid { .. } => "hybrid",
        }
    }
}

fn check_k(pool: &Pool, k: usize) -> Result<Vec<usize>> {
    let unlabeled = pool.unlabeled_indices();
    if k > unlabeled.len() {
        return Err(Error::TooLarge {
            what: "query size",
            got: k,
            limit: unlabeled.len(),
        });
    }
    Ok(unlabeled)
}

/// `k` unlabeled indices uniformly without replacement, in increasing order.
pub fn select_random(pool: &Pool, k: usize, seed: u64) -> Result<Vec<usize>> {
    let unlabeled = check_k(pool, k)?;
    let mut picked: Vec<usize> = sample(&mut rng(seed), unlabeled.len(), k)
        .into_iter()
        .map(|i| unlabeled[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Informativeness score of every unlabeled point (smaller is more informative).
pub fn informativeness(pool: &Pool, h: &Hypothesis) -> Result<Vec<(usize, f64)>> {
    let unlabeled = pool.unlabeled_indices();
    if h.setting().is_classification() {
        unlabeled
            .into_iter()
            .map(|i| Ok((i, h.score(pool.point(i))?.abs())))
            .collect()
    } else {
        let labeled = pool.labeled_indices();
        Ok(unlabeled
            .into_iter()
            .map(|i| {
                let d = labeled
                    .iter()
                    .map(|&j| dist2(pool.point(i), pool.point(j)))
                    .fold(f64::INFINITY, f64::min);
                (i, -d)
            })
            .collect())
    }
}

/// Unlabeled indices ordered from most to least informative, ties by index.
fn ranked(pool: &Pool, h: &Hypothesis) -> Result<Vec<usize>> {
    let mut scores = informativeness(pool, h)?;
    scores.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(scores.into_iter().map(|(i, _)| i).collect())
}

/// The `k` most informative unlabeled points, most informative first.
pub fn select_uncertainty(pool: &Pool, k: usize, h: &Hypothesis) -> Result<Vec<usize>> {
    check_k(pool, k)?;
    let mut r = ranked(pool, h)?;
    r.truncate(k);
    Ok(r)
}

/// IPM objective of greedy representative selection: distance between the
/// empirical measure on `chosen` and the empirical pool measure.
pub struct Representativeness<'a> {
    pool: &'a Pool,
    spec: IpmSpec,
}

impl<'a> Representativeness<'a> {
    pub fn new(pool: &'a Pool, spec: &IpmSpec) -> Result<Self> {
        let mut spec = spec.clone();
        if spec.generator == Generator::TotalVariation && spec.grid.is_none() {
            spec.grid = Some(GridSpec::covering(pool.points(), pool.points(), spec.bins)?);
        }
        Ok(Self { pool, spec })
    }

    pub fn ipm(&self, chosen: &[usize]) -> Result<f64> {
        let pts: Vec<Vec<f64>> = chosen.iter().map(|&i| self.pool.point(i).to_vec()).collect();
        Ok(empirical_ipm(&pts, self.pool.points(), &self.spec)?.value)
    }

    /// IPM after adding each candidate to `chosen`, in candidate order.
    fn with_each(&self, chosen: &[usize], candidates: &[usize]) -> Result<Vec<f64>> {
        candidates
            .par_iter()
            .map(|&c| {
                let mut s = chosen.to_vec();
                s.push(c);
                self.ipm(&s)
            })
            .collect()
    }
}

/// Greedy representative selection with the IPM reached after each pick.
pub fn select_representative_traced(pool: &Pool, k: usize, spec: &IpmSpec) -> Result<Vec<(usize, f64)>> {
    let mut remaining = check_k(pool, k)?;
    let objective = Representativeness::new(pool, spec)?;
    let mut chosen = pool.labeled_indices();
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let values = objective.with_each(&chosen, &remaining)?;
        let (pos, v) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(remaining[a.0].cmp(&remaining[b.0])))
            .map(|(p, v)| (p, *v))
            .expect("k <= #unlabeled");
        let pick = remaining.remove(pos);
        chosen.push(pick);
        trace.push((pick, v));
    }
    Ok(trace)
}

/// Greedy forward selection minimizing the IPM between the labeled-plus-selected
/// points and the pool; ties go to the lower index. Picks in selection order.
pub fn select_representative(pool: &Pool, k: usize, spec: &IpmSpec) -> Result<Vec<usize>> {
    Ok(select_representative_traced(pool, k, spec)?
        .into_iter()
        .map(|(i, _)| i)
        .collect())
}

fn min_max(values: &[f64], larger_is_better: bool) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![1.0; values.len()];
    }
    values
        .iter()
        .map(|&v| if larger_is_better { (v - lo) / (hi - lo) } else { (hi - v) / (hi - lo) })
        .collect()
}

/// Greedy selection maximizing `λ · informativeness + (1 - λ) · representativeness`.
///
/// Informativeness is the candidate's rank score `1 - r / (N - 1)` (`r` its
/// position in the uncertainty order); representativeness is the IPM after
/// adding the candidate. Both are min-max normalized over the candidates of
/// each step. Ties go to the lower IPM, then the lower index, so `λ = 1` picks
/// the uncertainty order and `λ = 0` the representative order exactly.
pub fn select_hybrid(pool: &Pool, k: usize, h: &Hypothesis, lambda: f64, spec: &IpmSpec) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("lambda must lie in [0, 1], got {lambda}"));
    }
    check_k(pool, k)?;
    let order = ranked(pool, h)?;
    let n = order.len();
    let mut rank_score = vec![0.0; pool.len()];
    for (r, &i) in order.iter().enumerate() {
        rank_score[i] = if n > 1 { 1.0 - r as f64 / (n - 1) as f64 } else { 1.0 };
    }
    let objective = Representativeness::new(pool, spec)?;
    let mut remaining = pool.unlabeled_indices();
    let mut chosen = pool.labeled_indices();
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let ipm = objective.with_each(&chosen, &remaining)?;
        let rep = min_max(&ipm, false);
        let inf = min_max(
            &remaining.iter().map(|&i| rank_score[i]).collect::<Vec<_>>(),
            true,
        );
        let score: Vec<f64> = inf
            .iter()
            .zip(&rep)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let pos = (0..remaining.len())
            .max_by(|&a, &b| {
                score[a]
                    .total_cmp(&score[b])
                    .then(ipm[b].total_cmp(&ipm[a]))
                    .then(remaining[b].cmp(&remaining[a]))
            })
            .expect("k <= #unlabeled");
        let pick = remaining.remove(pos);
        chosen.push(pick);
        picks.push(pick);
    }
    Ok(picks)
}

fn resolve_spec(generator: Option<Generator>, setting: SettingId, bins: usize) -> IpmSpec {
    IpmSpec::new(generator.unwrap_or(setting.generator())).with_bins(bins)
}

/// Picks `k` unlabeled points with `strategy`.
pub fn select(
    strategy: &QueryStrategy,
    pool: &Pool,
    k: usize,
    h: &Hypothesis,
    bins: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    match *strategy {
        QueryStrategy::Random => select_random(pool, k, seed),
        QueryStrategy::Uncertainty => select_uncertainty(pool, k, h),
        QueryStrategy::Representative { generator } => {
            select_representative(pool, k, &resolve_spec(generator, h.setting(), bins))
        }
        QueryStrategy::Hybrid { lambda, generator } => {
            select_hybrid(pool, k, h, lambda, &resolve_spec(generator, h.setting(), bins))
        }
    }
}

/// One round of the active-learning loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub round: usize,
    pub m: usize,
    pub strategy: String,
    pub emp_risk: f64,
    pub true_risk: f64,
    /// IPM between the pool and the labeled points.
    pub ipm: f64,
    pub rhs: f64,
}

/// Records as CSV: `round,m,strategy,emp_risk,true_risk,ipm,rhs`.
pub fn write_curve_csv<W: Write>(records: &[CurveRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the loop: for each distinct budget entry, query up to that many labels,
/// reveal them from the task, retrain, and evaluate the bound on the labeled set.
///
/// Round 0 of the uncertainty and hybrid strategies scores with the projected
/// initial hypothesis, since nothing has been trained yet.
pub fn al_loop(cfg: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    cfg.validate()?;
    let task = cfg.task()?;
    let domain = cfg.domain(&task);
    let seed = cfg.seed;
    let mut pool = sample_unlabeled(&task, cfg.pool_size, derive_seed(seed, 0))?;
    let label_root = derive_seed(seed, 1);
    let mut h = initial_hypothesis(
        cfg.setting,
        &pool,
        &cfg.model,
        &training_domain(cfg.setting, &domain)?,
        &mut child(seed, 2),
    )?;
    let ipm_spec = IpmSpec::new(cfg.setting.generator()).with_bins(cfg.ipm_bins);

    let mut schedule = cfg.budget.clone();
    schedule.dedup();
    let mut records = Vec::with_capacity(schedule.len());
    for (round, &target) in schedule.iter().enumerate() {
        let r = round as u64;
        let k = target - pool.labeled_indices().len();
        let picks = select(&cfg.strategy, &pool, k, &h, cfg.ipm_bins, derive_seed(seed, 100 + r))?;
        for i in picks {
            let x = pool.point(i).to_vec();
            let y = task.sample_y(&x, &mut child(label_root, i as u64));
            pool.set_label(i, y)?;
        }
        let labeled = pool.labeled_subset();
        h = train(
            cfg.setting,
            &labeled,
            &domain,
            &cfg.model,
            &cfg.optimizer,
            derive_seed(seed, 200 + r),
        )?
        .hypothesis;
        let ipm = empirical_ipm(pool.points(), labeled.points(), &ipm_spec)?;
        let rad = rademacher(
            &HypothesisClass::constrained(h.clone(), &domain)?,
            &labeled,
            SignDraws::Random(cfg.mc.num_sigma),
            &cfg.inner,
            derive_seed(seed, 300 + r),
        )?;
        let report = assemble_bound(&h, &labeled, &ipm, &rad, cfg.delta, cfg.c)?;
        let tr = true_risk_mc(&h, &task, cfg.mc.true_risk_n, derive_seed(seed, 400 + r))?;
        records.push(CurveRecord {
            round,
            m: labeled.len(),
            strategy: cfg.strategy.name().to_string(),
            emp_risk: empirical_risk(&h, &labeled)?,
            true_risk: tr.estimate,
            ipm: ipm.value,
            rhs: report.rhs_total,
        });
    }
    Ok(records)
}
