//! The four-term active-learning bound
//!
//! `R(h) <= R̂_queried(h) + d_F(P_X, P_Q) + 2 Rad(ℓ∘H∘D̂_m) + c √(2 ln(4/δ) / m)`,
//!
//! a Monte-Carlo true-risk estimate, and coverage experiments that check how
//! often the assembled right-hand side exceeds the true risk. The IPM term is
//! the plug-in estimate between the empirical pool marginal (for `P_X`) and the
//! empirical queried marginal (for `P_Q`).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{rademacher, HypothesisClass, RadEstimate, SignDraws};
use crate::config::ExperimentConfig;
use crate::data::Pool;
use crate::error::{invalid, Error, Result};
use crate::hypotheses::{train, Hypothesis};
use crate::ipm::{empirical_ipm, IpmEstimate, IpmSpec};
use crate::rng::{derive_seed, rng};
use crate::task::{sample_unlabeled, SyntheticTask};

/// Caveat attached to every report.
pub const RAD_NOTE: &str = "rad_term is a Monte-Carlo lower estimate of the supremum; \
     coverage failures should be read against rad_term.std_error";

/// Mean loss of `h` on the labeled sample.
pub fn empirical_risk(h: &Hypothesis, data: &Pool) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("data".into()));
    }
    if !data.is_fully_labeled() {
        return invalid("data must be fully labeled");
    }
    let loss = h.setting().loss();
    let mut sum = 0.0;
    for (x, y) in data.labeled() {
        loss.check_label(y)?;
        sum += loss.eval(y, h.predict(x)?);
    }
    Ok(sum / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueRisk {
    pub estimate: f64,
    /// `1.96 · sd / √n`
    pub ci_half_width: f64,
    pub n: usize,
}

/// Mean loss over `n` fresh draws from the task.
pub fn true_risk_mc(h: &Hypothesis, task: &SyntheticTask, n: usize, seed: u64) -> Result<TrueRisk> {
    if n < 2 {
        return invalid("true-risk Monte Carlo needs n >= 2");
    }
    if h.input_dim() != task.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.input_dim(),
            got: task.dim(),
        });
    }
    let loss = h.setting().loss();
    let mut rng = rng(seed);
    // Welford
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 1..=n {
        let (x, y) = task.sample_z(&mut rng);
        let v = loss.eval(y, h.eval(&x));
        let d = v - mean;
        mean += d / i as f64;
        m2 += d * (v - mean);
    }
    let sd = (m2 / (n - 1) as f64).sqrt();
    Ok(TrueRisk {
        estimate: mean,
        ci_half_width: 1.96 * sd / (n as f64).sqrt(),
        n,
    })
}

/// `c · √(2 ln(4/δ) / m)`
pub fn deviation_term(c: f64, delta: f64, m: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    if !(c > 0.0) {
        return invalid(format!("c must be positive, got {c}"));
    }
    if m == 0 {
        return invalid("m must be at least 1");
    }
    Ok(c * (2.0 * (4.0 / delta).ln() / m as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub empirical_risk: f64,
    pub ipm_term: IpmEstimate,
    pub rad_term: RadEstimate,
    pub deviation_term: f64,
    pub rhs_total: f64,
    pub true_risk_mc: Option<TrueRisk>,
    pub m: usize,
    pub delta: f64,
    pub c: f64,
    /// `rhs_total >= true_risk_mc.estimate`, once a true risk is attached.
    pub holds: Option<bool>,
    pub note: String,
}

impl BoundReport {
    /// The right-hand side recomputed from the stored parts.
    pub fn recompose(&self) -> f64 {
        self.empirical_risk + self.ipm_term.value + 2.0 * self.rad_term.value + self.deviation_term
    }

    /// The passive-learning form, without the distribution-shift term.
    pub fn passive_rhs(&self) -> f64 {
        self.empirical_risk + 2.0 * self.rad_term.value + self.deviation_term
    }

    pub fn with_true_risk(mut self, tr: TrueRisk) -> Self {
        self.holds = Some(self.rhs_total >= tr.estimate);
        self.true_risk_mc = Some(tr);
        self
    }
}

/// Composes the bound for `h` on the queried sample. `ipm` and `rad` must have
/// been computed on this same sample.
pub fn assemble_bound(
    h: &Hypothesis,
    queried: &Pool,
    ipm: &IpmEstimate,
    rad: &RadEstimate,
    delta: f64,
    c: f64,
) -> Result<BoundReport> {
    let m = queried.len();
    let deviation = deviation_term(c, delta, m)?;
    if ipm.n_b != m {
        return invalid(format!(
            "ipm term was computed on {} queried points, sample has {m}",
            ipm.n_b
        ));
    }
    if rad.m != m {
        return invalid(format!(
            "rademacher term was computed on {} points, sample has {m}",
            rad.m
        ));
    }
    let empirical_risk = empirical_risk(h, queried)?;
    let mut report = BoundReport {
        empirical_risk,
        ipm_term: ipm.clone(),
        rad_term: rad.clone(),
        deviation_term: deviation,
        rhs_total: 0.0,
        true_risk_mc: None,
        m,
        delta,
        c,
        holds: None,
        note: RAD_NOTE.to_string(),
    };
    report.rhs_total = report.recompose();
    Ok(report)
}

/// Everything one bound evaluation produces.
#[derive(Debug, Clone)]
pub struct BoundRun {
    pub report: BoundReport,
    pub hypothesis: Hypothesis,
    pub pool: Pool,
    pub queried: Pool,
}

/// Draws a pool from `P_X` and a queried sample from `P_Q`, trains on the
/// queried sample, and assembles the bound with a true-risk estimate attached.
pub fn run_bound(cfg: &ExperimentConfig, seed: u64) -> Result<BoundRun> {
    cfg.validate()?;
    let task = cfg.task()?;
    let domain = cfg.domain(&task);
    let pool = sample_unlabeled(&task, cfg.pool_size, derive_seed(seed, 0))?;
    let queried = cfg
        .query_distribution
        .sample(&task, cfg.sample_size, derive_seed(seed, 1))?;
    let trained = train(
        cfg.setting,
        &queried,
        &domain,
        &cfg.model,
        &cfg.optimizer,
        derive_seed(seed, 2),
    )?;
    let h = trained.hypothesis;
    let spec = IpmSpec::new(cfg.setting.generator()).with_bins(cfg.ipm_bins);
    let ipm = empirical_ipm(pool.points(), queried.points(), &spec)?;
    let rad = rademacher(
        &HypothesisClass::constrained(h.clone(), &domain)?,
        &queried,
        SignDraws::Random(cfg.mc.num_sigma),
        &cfg.inner,
        derive_seed(seed, 3),
    )?;
    let tr = true_risk_mc(&h, &task, cfg.mc.true_risk_n, derive_seed(seed, 4))?;
    let report = assemble_bound(&h, &queried, &ipm, &rad, cfg.delta, cfg.c)?.with_true_risk(tr);
    Ok(BoundRun {
        report,
        hypothesis: h,
        pool,
        queried,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub rep: usize,
    pub emp_risk: f64,
    pub ipm: f64,
    pub rad: f64,
    pub dev: f64,
    pub rhs: f64,
    pub true_risk: f64,
    pub holds: bool,
}

/// A repetition whose right-hand side fell below the true risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageFailure {
    pub rep: usize,
    pub rhs: f64,
    pub true_risk: f64,
    pub rad: f64,
    pub rad_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub coverage: f64,
    pub reps: usize,
    pub delta: f64,
    pub mean_emp_risk: f64,
    pub mean_ipm: f64,
    pub mean_rad: f64,
    pub mean_dev: f64,
    pub mean_rhs: f64,
    pub mean_true_risk: f64,
    pub rows: Vec<CoverageRow>,
    pub failures: Vec<CoverageFailure>,
}

impl CoverageResult {
    /// Rows as CSV: `rep,emp_risk,ipm,rad,dev,rhs,true_risk,holds`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_line(&self) -> String {
        format!("coverage={} delta={}", self.coverage, self.delta)
    }
}

/// Repeats [`run_bound`] with counter-derived seeds and reports how often the
/// bound held.
pub fn coverage_experiment(cfg: &ExperimentConfig, reps: usize) -> Result<CoverageResult> {
    if reps == 0 {
        return invalid("repetitions must be at least 1");
    }
    cfg.validate()?;
    let runs: Vec<Result<BoundReport>> = (0..reps)
        .into_par_iter()
        .map(|r| run_bound(cfg, derive_seed(cfg.seed, r as u64)).map(|b| b.report))
        .collect();
    let mut rows = Vec::with_capacity(reps);
    let mut failures = Vec::new();
    for (rep, run) in runs.into_iter().enumerate() {
        let b = run?;
        let tr = b.true_risk_mc.expect("run_bound attaches a true risk");
        let holds = b.holds.unwrap_or(false);
        if !holds {
            failures.push(CoverageFailure {
                rep,
                rhs: b.rhs_total,
                true_risk: tr.estimate,
                rad: b.rad_term.value,
                rad_std_error: b.rad_term.std_error,
            });
        }
        rows.push(CoverageRow {
            rep,
            emp_risk: b.empirical_risk,
            ipm: b.ipm_term.value,
            rad: b.rad_term.value,
            dev: b.deviation_term,
            rhs: b.rhs_total,
            true_risk: tr.estimate,
            holds,
        });
    }
    let n = reps as f64;
    let mean = |f: fn(&CoverageRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    Ok(CoverageResult {
        coverage: rows.iter().filter(|r| r.holds).count() as f64 / n,
        reps,
        delta: cfg.delta,
        mean_emp_risk: mean(|r| r.emp_risk),
        mean_ipm: mean(|r| r.ipm),
        mean_rad: mean(|r| r.rad),
        mean_dev: mean(|r| r.dev),
        mean_rhs: mean(|r| r.rhs),
        mean_true_risk: mean(|r| r.true_risk),
        rows,
        failures,
    })
}
