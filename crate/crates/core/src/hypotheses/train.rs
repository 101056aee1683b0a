//! Constrained empirical risk minimization.
//!
//! Full-batch projected subgradient descent with step `c / √t`, projecting
//! after every step and returning the best iterate seen.

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{Dense, Hypothesis, Params};
use super::project::project;
use super::setting::{Domain, SettingId};
use crate::data::Pool;
use crate::error::{invalid, Error, Result};
use crate::rng::{rng, Rng};

/// Architecture choices that the setting leaves open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    /// Output widths of the network layers; ReLU between consecutive layers.
    pub hidden: Vec<usize>,
    /// Number of gaussian centers, taken from the training points.
    pub centers: usize,
    /// Gaussian width.
    pub sigma: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            hidden: vec![8, 8],
            centers: 5,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub steps: usize,
    /// `c` in the step size `c / √t`.
    pub step_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            steps: 300,
            step_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub hypothesis: Hypothesis,
    /// Empirical risk of every iterate, starting with the initialization.
    pub trace: Vec<f64>,
    /// Running minimum of `trace`.
    pub best_trace: Vec<f64>,
}

impl TrainReport {
    pub fn final_risk(&self) -> f64 {
        *self.best_trace.last().expect("trace is never empty")
    }
}

/// Domain used while training. For the linear-ℓ₂ row the bias is kept within
/// half of the slack `1 - M_Y`, so the weight radius never collapses.
pub fn training_domain(setting: SettingId, domain: &Domain) -> Result<Domain> {
    if setting == SettingId::LinL2 {
        if domain.my >= 1.0 {
            return Err(Error::Infeasible(format!(
                "M_Y = {} leaves no feasible linear-l2 hypothesis",
                domain.my
            )));
        }
        return Ok(domain.with_bias_bound(domain.bias_bound.min((1.0 - domain.my) / 2.0)));
    }
    Ok(*domain)
}

/// Starting point: zeros for the linear, logistic and gaussian classes (centers
/// drawn from `data`), scaled Gaussian weights for networks; projected.
pub fn initial_hypothesis(
    setting: SettingId,
    data: &Pool,
    spec: &ModelSpec,
    domain: &Domain,
    rng: &mut Rng,
) -> Result<Hypothesis> {
    let dim = data.dim();
    let params = match setting {
        SettingId::LinL1 | SettingId::LinL2 | SettingId::SvmHinge => Params::Linear {
            w: vec![0.0; dim],
            b: 0.0,
        },
        SettingId::LogisticLog => Params::Logistic { w: vec![0.0; dim] },
        SettingId::GaussL1 => {
            if data.is_empty() {
                return Err(Error::Empty("no points to place centers on".into()));
            }
            let k = spec.centers.clamp(1, data.len());
            let mut idx = sample(rng, data.len(), k).into_vec();
            idx.sort_unstable();
            Params::Gaussian {
                w: vec![0.0; k],
                centers: idx.iter().map(|&i| data.point(i).to_vec()).collect(),
                sigma: spec.sigma,
            }
        }
        SettingId::NnHinge => {
            if spec.hidden.is_empty() || spec.hidden.contains(&0) {
                return invalid("network needs nonzero layer widths");
            }
            let mut layers = Vec::with_capacity(spec.hidden.len());
            let mut inputs = dim;
            for &width in &spec.hidden {
                let scale = 1.0 / (inputs as f64).sqrt();
                let mut layer = Dense::zeros(inputs, width);
                for row in layer.weights.iter_mut() {
                    for v in row.iter_mut() {
                        let z: f64 = StandardNormal.sample(rng);
                        *v = z * scale;
                    }
                }
                layers.push(layer);
                inputs = width;
            }
            let scale = 1.0 / (inputs as f64).sqrt();
            let output = (0..inputs)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * scale
                })
                .collect();
            Params::Network {
                layers,
                output,
                output_bias: 0.0,
            }
        }
    };
    project(&Hypothesis::new(setting, params)?, domain)
}

fn risk(h: &Hypothesis, data: &Pool) -> f64 {
    let loss = h.setting().loss();
    let (sum, n) = data
        .labeled()
        .fold((0.0, 0usize), |(s, n), (x, y)| (s + loss.eval(y, h.eval(x)), n + 1));
    sum / n as f64
}

fn risk_subgradient(h: &Hypothesis, data: &Pool) -> Vec<f64> {
    let loss = h.setting().loss();
    let mut g = vec![0.0; h.num_params()];
    let mut n = 0usize;
    for (x, y) in data.labeled() {
        let (pred, dp) = h.eval_with_grad(x);
        let dl = loss.derivative(y, pred);
        if dl != 0.0 {
            g.iter_mut().zip(&dp).for_each(|(a, b)| *a += dl * b);
        }
        n += 1;
    }
    g.iter_mut().for_each(|a| *a /= n as f64);
    g
}

/// Trains a hypothesis of `setting` on the labeled pool `data`.
pub fn train(
    setting: SettingId,
    data: &Pool,
    domain: &Domain,
    spec: &ModelSpec,
    opt: &OptimizerConfig,
    seed: u64,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::Empty("training data".into()));
    }
    if !data.is_fully_labeled() {
        return invalid("training data must be fully labeled");
    }
    let loss = setting.loss();
    for (_, y) in data.labeled() {
        loss.check_label(y)?;
    }
    let domain = training_domain(setting, domain)?;
    let mut rng = rng(seed);
    let mut h = initial_hypothesis(setting, data, spec, &domain, &mut rng)?;

    let mut best = h.clone();
    let mut best_risk = risk(&h, data);
    let mut trace = vec![best_risk];
    let mut best_trace = vec![best_risk];
    for t in 1..=opt.steps {
        let g = risk_subgradient(&h, data);
        if g.iter().all(|v| *v == 0.0) {
            break;
        }
        let eta = opt.step_scale / (t as f64).sqrt();
        let theta: Vec<f64> = h
            .flat_params()
            .iter()
            .zip(&g)
            .map(|(p, gi)| p - eta * gi)
            .collect();
        h.set_flat_params(&theta)?;
        h = project(&h, &domain)?;
        let r = risk(&h, data);
        trace.push(r);
        if r < best_risk {
            best_risk = r;
            best = h.clone();
        }
        best_trace.push(best_risk);
    }
    Ok(TrainReport {
        hypothesis: best,
        trace,
        best_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::certify::certify;

    fn pool(points: &[(f64, f64)], mx: f64, my: f64) -> Pool {
        let mut p = Pool::new(1, mx, my).unwrap();
        for &(x, y) in points {
            p.push(vec![x], Some(y)).unwrap();
        }
        p
    }

    #[test]
    fn fits_a_feasible_line() {
        let data = pool(&[(-1.0, -0.5), (1.0, 0.5)], 1.0, 0.5);
        let rep = train(
            SettingId::LinL1,
            &data,
            &Domain::new(1.0, 0.5),
            &ModelSpec::default(),
            &OptimizerConfig {
                steps: 2000,
                step_scale: 0.5,
            },
            1,
        )
        .unwrap();
        assert!(rep.final_risk() <= 1e-3, "risk {}", rep.final_risk());
        // independent check by direct substitution
        let direct: f64 = data
            .labeled()
            .map(|(x, y)| (y - rep.hypothesis.predict(x).unwrap()).abs())
            .sum::<f64>()
            / 2.0;
        assert!((direct - rep.final_risk()).abs() < 1e-15);
    }

    #[test]
    fn separable_pair_reaches_zero_hinge_risk() {
        let mut data = Pool::new(2, 2.0, 1.0).unwrap();
        data.push(vec![2.0, 0.0], Some(1.0)).unwrap();
        data.push(vec![-2.0, 0.0], Some(-1.0)).unwrap();
        let rep = train(
            SettingId::SvmHinge,
            &data,
            &Domain::new(2.0, 1.0),
            &ModelSpec::default(),
            &OptimizerConfig::default(),
            2,
        )
        .unwrap();
        assert_eq!(rep.final_risk(), 0.0);
        assert!(certify(&rep.hypothesis, &Domain::new(2.0, 1.0)).passes);
    }

    #[test]
    fn best_trace_never_increases() {
        let data = pool(&[(0.3, 1.0), (-0.7, -1.0), (0.1, -1.0)], 1.0, 1.0);
        for setting in [SettingId::SvmHinge, SettingId::NnHinge] {
            let rep = train(
                setting,
                &data,
                &Domain::new(1.0, 1.0),
                &ModelSpec::default(),
                &OptimizerConfig::default(),
                5,
            )
            .unwrap();
            assert!(rep.best_trace.windows(2).all(|w| w[1] <= w[0]));
            assert!(rep.final_risk() <= rep.trace[0]);
        }
    }

    #[test]
    fn rejects_empty_or_unlabeled_data() {
        let d = Domain::new(1.0, 1.0);
        let empty = Pool::new(1, 1.0, 1.0).unwrap();
        assert!(train(SettingId::LinL1, &empty, &d, &ModelSpec::default(), &OptimizerConfig::default(), 0).is_err());
        let mut p = Pool::new(1, 1.0, 1.0).unwrap();
        p.push(vec![0.5], None).unwrap();
        assert!(train(SettingId::LinL1, &p, &d, &ModelSpec::default(), &OptimizerConfig::default(), 0).is_err());
        let bad = pool(&[(0.5, 0.5)], 1.0, 1.0);
        assert!(train(SettingId::SvmHinge, &bad, &d, &ModelSpec::default(), &OptimizerConfig::default(), 0).is_err());
        let lin2 = pool(&[(0.5, 0.5)], 1.0, 1.0);
        assert!(matches!(
            train(SettingId::LinL2, &lin2, &d, &ModelSpec::default(), &OptimizerConfig::default(), 0),
            Err(Error::Infeasible(_))
        ));
    }
}
