//! Monte-Carlo empirical Rademacher complexity of a loss class on a sample,
//! `E_σ sup_h (1/m) Σ σ_i ℓ(y_i, h(x_i))`.
//!
//! For continuous classes the inner supremum is searched (random feasible
//! probes, optionally refined by projected gradient ascent), so the result is a
//! lower estimate of the true value. Finite classes are enumerated exactly.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Pool;
use crate::error::{invalid, Error, Result};
use crate::hypotheses::train::training_domain;
use crate::hypotheses::{project, random_feasible, Domain, Hypothesis};
use crate::rng::{child, derive_seed, splitmix64};

/// Largest `m` for which all `2^m` sign vectors are enumerated.
pub const MAX_EXHAUSTIVE_M: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignDraws {
    /// This many uniform sign vectors.
    Random(usize),
    /// Every sign vector once (`m <= 20`); the result is exact in σ.
    Exhaustive,
}

/// How the supremum over the class is approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerMethod {
    /// Exact maximum over a finite class.
    Enumeration,
    /// Best of `probes` random feasible hypotheses, shared across sign draws.
    RandomSearch { probes: usize },
    /// The random probes plus `restarts` runs of projected gradient ascent of
    /// `steps` steps each, per sign vector.
    ProjectedAscent {
        restarts: usize,
        steps: usize,
        probes: usize,
        #[serde(default = "default_ascent_scale")]
        step_scale: f64,
    },
}

fn default_ascent_scale() -> f64 {
    0.5
}

impl Default for InnerMethod {
    fn default() -> Self {
        InnerMethod::ProjectedAscent {
            restarts: 2,
            steps: 30,
            probes: 64,
            step_scale: default_ascent_scale(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerKind {
    Enumeration,
    RandomSearch,
    ProjectedAscent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadEstimate {
    pub value: f64,
    pub num_sigma: usize,
    pub inner_method: InnerKind,
    /// Monte-Carlo standard error over the sign draws (0 when enumerated).
    pub std_error: f64,
    /// Sample size the estimate was computed on.
    pub m: usize,
}

impl RadEstimate {
    pub fn zero(m: usize) -> Self {
        Self {
            value: 0.0,
            num_sigma: 0,
            inner_method: InnerKind::Enumeration,
            std_error: 0.0,
            m,
        }
    }
}

/// The loss class whose complexity is estimated.
#[derive(Debug, Clone)]
pub enum HypothesisClass {
    /// An explicit list of hypotheses.
    Finite(Vec<Hypothesis>),
    /// Every feasible hypothesis with the setting and architecture of `template`.
    Constrained { template: Hypothesis, domain: Domain },
}

impl HypothesisClass {
    /// The constrained class searched by training for `template`'s setting.
    pub fn constrained(template: Hypothesis, domain: &Domain) -> Result<Self> {
        let domain = training_domain(template.setting(), domain)?;
        Ok(HypothesisClass::Constrained { template, domain })
    }
}

fn loss_row(h: &Hypothesis, data: &Pool) -> Vec<f64> {
    let loss = h.setting().loss();
    data.labeled().map(|(x, y)| loss.eval(y, h.eval(x))).collect()
}

fn correlation(sigma: &[f64], row: &[f64]) -> f64 {
    sigma.iter().zip(row).map(|(s, v)| s * v).sum::<f64>() / row.len() as f64
}

fn best_row(sigma: &[f64], rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|r| correlation(sigma, r))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn sign_vector(bits: u64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 })
        .collect()
}

fn check_values(values: &[Vec<f64>]) -> Result<usize> {
    let m = values.first().map_or(0, Vec::len);
    if values.is_empty() || m == 0 {
        return Err(Error::Empty("loss matrix".into()));
    }
    if let Some(r) = values.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r.len(),
        });
    }
    Ok(m)
}

/// Exact Rademacher complexity of a finite class given its loss matrix
/// (`values[k][i]` = loss of hypothesis `k` on point `i`).
pub fn rademacher_exact_finite(values: &[Vec<f64>]) -> Result<f64> {
    let m = check_values(values)?;
    if m > MAX_EXHAUSTIVE_M {
        return Err(Error::TooLarge {
            what: "sample size for sign enumeration",
            got: m,
            limit: MAX_EXHAUSTIVE_M,
        });
    }
    let per_draw: Vec<f64> = (0..1u64 << m)
        .map(|bits| best_row(&sign_vector(bits, m), values))
        .collect();
    Ok(antithetic_mean(&per_draw))
}

/// Mean over all sign vectors in enumeration order, summing each vector with its
/// negation (index `i` with `n - 1 - i`) so a singleton class cancels exactly.
fn antithetic_mean(per_draw: &[f64]) -> f64 {
    let n = per_draw.len();
    let total: f64 = (0..n / 2).map(|i| per_draw[i] + per_draw[n - 1 - i]).sum();
    total / n as f64
}

fn summarize(per_draw: &[f64], inner: InnerKind, exhaustive: bool, m: usize) -> RadEstimate {
    let n = per_draw.len() as f64;
    let mean = if exhaustive {
        antithetic_mean(per_draw)
    } else {
        per_draw.iter().sum::<f64>() / n
    };
    let std_error = if exhaustive || per_draw.len() < 2 {
        0.0
    } else {
        let var = per_draw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    RadEstimate {
        value: mean,
        num_sigma: per_draw.len(),
        inner_method: inner,
        std_error,
        m,
    }
}

fn draw_signs(draws: SignDraws, m: usize, seed: u64) -> Result<(Vec<Vec<f64>>, bool)> {
    match draws {
        SignDraws::Exhaustive => {
            if m > MAX_EXHAUSTIVE_M {
                return Err(Error::TooLarge {
                    what: "sample size for sign enumeration",
                    got: m,
                    limit: MAX_EXHAUSTIVE_M,
                });
            }
            Ok(((0..1u64 << m).map(|b| sign_vector(b, m)).collect(), true))
        }
        SignDraws::Random(0) => invalid("need at least one sign draw"),
        SignDraws::Random(n) => Ok((
            (0..n as u64)
                .map(|i| {
                    let mut r = child(seed, i);
                    (0..m)
                        .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
                        .collect()
                })
                .collect(),
            false,
        )),
    }
}

/// Monte-Carlo Rademacher estimate for a finite class given as a loss matrix.
pub fn rademacher_finite(values: &[Vec<f64>], draws: SignDraws, seed: u64) -> Result<RadEstimate> {
    let m = check_values(values)?;
    let (signs, exhaustive) = draw_signs(draws, m, seed)?;
    let per_draw: Vec<f64> = signs.par_iter().map(|s| best_row(s, values)).collect();
    Ok(summarize(&per_draw, InnerKind::Enumeration, exhaustive, m))
}

/// Empirical Rademacher complexity of `class` composed with its loss on `data`.
///
/// Finite classes are always maximized exactly. For constrained classes the
/// probes are drawn once from a stream derived from `seed` and shared by every
/// sign vector; ascent restarts are seeded by the sign pattern itself, so equal
/// patterns give equal inner values regardless of the parallel schedule.
pub fn rademacher(
    class: &HypothesisClass,
    data: &Pool,
    draws: SignDraws,
    inner: &InnerMethod,
    seed: u64,
) -> Result<RadEstimate> {
    if data.is_empty() {
        return Err(Error::Empty("data".into()));
    }
    if !data.is_fully_labeled() {
        return invalid("data must be fully labeled");
    }
    let (template, domain) = match class {
        HypothesisClass::Finite(hs) => {
            if hs.is_empty() {
                return Err(Error::Empty("hypothesis list".into()));
            }
            let values: Vec<Vec<f64>> = hs.iter().map(|h| loss_row(h, data)).collect();
            return rademacher_finite(&values, draws, seed);
        }
        HypothesisClass::Constrained { template, domain } => (template, domain),
    };
    if template.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: template.input_dim(),
            got: data.dim(),
        });
    }
    let (probes, kind) = match *inner {
        InnerMethod::Enumeration => {
            return invalid("enumeration needs a finite class");
        }
        InnerMethod::RandomSearch { probes } => (probes, InnerKind::RandomSearch),
        InnerMethod::ProjectedAscent { probes, .. } => (probes, InnerKind::ProjectedAscent),
    };
    let m = data.len();
    let (signs, exhaustive) = draw_signs(draws, m, seed)?;

    let probe_seed = derive_seed(seed, u64::MAX);
    let mut prng = crate::rng::rng(probe_seed);
    let mut rows = Vec::with_capacity(probes + 1);
    rows.push(loss_row(&project(template, domain)?, data));
    for _ in 0..probes {
        rows.push(loss_row(&random_feasible(template, domain, &mut prng)?, data));
    }

    // one inner search per distinct sign pattern
    let mut patterns: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let keys: Vec<Vec<bool>> = signs
        .iter()
        .map(|s| s.iter().map(|v| *v > 0.0).collect())
        .collect();
    for k in &keys {
        let next = patterns.len();
        patterns.entry(k.clone()).or_insert(next);
    }
    let mut unique: Vec<(&Vec<bool>, usize)> = patterns.iter().map(|(k, &i)| (k, i)).collect();
    unique.sort_by_key(|&(_, i)| i);
    let inner_values: Vec<Result<f64>> = unique
        .par_iter()
        .map(|(key, _)| {
            let sigma: Vec<f64> = key.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
            let mut best = best_row(&sigma, &rows);
            if let InnerMethod::ProjectedAscent {
                restarts,
                steps,
                step_scale,
                ..
            } = *inner
            {
                let pseed = key
                    .iter()
                    .fold(splitmix64(seed), |h, &b| splitmix64(h ^ b as u64).rotate_left(1));
                for r in 0..restarts as u64 {
                    let mut rng = child(pseed, r);
                    let start = random_feasible(template, domain, &mut rng)?;
                    best = best.max(ascend(start, domain, data, &sigma, steps, step_scale)?);
                }
            }
            Ok(best)
        })
        .collect();
    let inner_values: Vec<f64> = inner_values.into_iter().collect::<Result<_>>()?;
    let per_draw: Vec<f64> = keys.iter().map(|k| inner_values[patterns[k]]).collect();
    Ok(summarize(&per_draw, kind, exhaustive, m))
}

/// Projected gradient ascent on `(1/m) Σ σ_i ℓ(y_i, h(x_i))`; returns the best
/// objective among the iterates.
fn ascend(
    mut h: Hypothesis,
    domain: &Domain,
    data: &Pool,
    sigma: &[f64],
    steps: usize,
    step_scale: f64,
) -> Result<f64> {
    let loss = h.setting().loss();
    let m = data.len() as f64;
    let objective = |h: &Hypothesis| correlation(sigma, &loss_row(h, data));
    let mut best = objective(&h);
    for t in 1..=steps {
        let mut g = vec![0.0; h.num_params()];
        for ((x, y), s) in data.labeled().zip(sigma) {
            let (pred, dp) = h.eval_with_grad(x);
            let dl = s * loss.derivative(y, pred) / m;
            if dl != 0.0 {
                g.iter_mut().zip(&dp).for_each(|(a, b)| *a += dl * b);
            }
        }
        if g.iter().all(|v| *v == 0.0) {
            break;
        }
        let eta = step_scale / (t as f64).sqrt();
        let theta: Vec<f64> = h
            .flat_params()
            .iter()
            .zip(&g)
            .map(|(p, gi)| p + eta * gi)
            .collect();
        h.set_flat_params(&theta)?;
        h = project(&h, domain)?;
        best = best.max(objective(&h));
    }
    Ok(best)
}
