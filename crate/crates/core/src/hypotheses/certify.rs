//! Generator-membership certificates and empirical probes.
//!
//! A certificate evaluates the analytic quantity that bounds the induced loss
//! `ℓ^y(x) = ℓ(y, h(x))`: its Lipschitz constant for Kantorovich rows, its sup
//! norm over the domain for total-variation rows. The probe measures the same
//! quantity empirically and is never allowed to exceed a passing certificate.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{Hypothesis, Params};
use super::project::network_lipschitz;
use super::setting::{Domain, SettingId};
use crate::data::{clip_to_ball, dist2, norm1, norm2};
use crate::ipm::Generator;
use crate::rng::rng;
use crate::task::SyntheticTask;

pub const CERTIFICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    LipschitzBound,
    SupBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub setting: SettingId,
    pub kind: CertificateKind,
    pub value: f64,
    pub passes: bool,
}

fn linear_parts(h: &Hypothesis) -> (f64, f64) {
    match h.params() {
        Params::Linear { w, b } => (norm2(w), *b),
        Params::Logistic { w } => (norm2(w), 0.0),
        _ => (0.0, 0.0),
    }
}

pub fn certify(h: &Hypothesis, domain: &Domain) -> Certificate {
    let setting = h.setting();
    let (kind, value, passes) = match setting {
        SettingId::LinL1 | SettingId::SvmHinge => {
            let v = linear_parts(h).0;
            (CertificateKind::LipschitzBound, v, v <= 1.0 + CERTIFICATE_TOL)
        }
        SettingId::GaussL1 => {
            let v = match h.params() {
                Params::Gaussian { w, sigma, .. } => 2.0 * domain.mx / (sigma * sigma) * norm1(w),
                _ => 0.0,
            };
            (CertificateKind::LipschitzBound, v, v <= 1.0 + CERTIFICATE_TOL)
        }
        SettingId::NnHinge => {
            let v = network_lipschitz(h.params());
            (CertificateKind::LipschitzBound, v, v <= 1.0 + CERTIFICATE_TOL)
        }
        SettingId::LinL2 => {
            // |y - w·x - b| <= M_Y + ‖w‖ M_X + |b|
            let (wn, b) = linear_parts(h);
            let residual = domain.my + wn * domain.mx + b.abs();
            (
                CertificateKind::SupBound,
                residual * residual,
                residual <= 1.0 + CERTIFICATE_TOL,
            )
        }
        SettingId::LogisticLog => {
            let z = linear_parts(h).0 * domain.mx;
            let v = z.exp().ln_1p();
            (CertificateKind::SupBound, v, v <= 1.0 + CERTIFICATE_TOL)
        }
    };
    Certificate {
        setting,
        kind,
        value,
        passes,
    }
}

/// Worst empirical violation statistic of `ℓ^y` over random draws.
///
/// Kantorovich rows: the largest `|ℓ^y(x₁) - ℓ^y(x₂)| / ‖x₁ - x₂‖₂`, where
/// `x₁` comes from the task marginal and `x₂` alternates between an independent
/// draw and a small perturbation of `x₁` (clipped to the domain). Total-variation
/// rows: the largest `|ℓ^y(x)|`. Labels are drawn uniformly from the loss's label
/// space (an interval `[-M_Y, M_Y]` for regression losses).
pub fn probe_membership(h: &Hypothesis, task: &SyntheticTask, trials: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let loss = h.setting().loss();
    let generator = h.setting().generator();
    let local_scale = 1e-3 * task.domain_bound.max(1e-12);
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let y = match loss.label_space().pair() {
            Some((lo, hi)) => {
                if rng.random::<bool>() {
                    hi
                } else {
                    lo
                }
            }
            None => rng.random_range(-task.label_bound..=task.label_bound),
        };
        let x1 = task.sample_x(&mut rng);
        let l1 = loss.eval(y, h.eval(&x1));
        match generator {
            Generator::TotalVariation => worst = worst.max(l1.abs()),
            Generator::Kantorovich => {
                let x2 = if t % 2 == 0 {
                    task.sample_x(&mut rng)
                } else {
                    let mut x: Vec<f64> = x1
                        .iter()
                        .map(|v| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            v + local_scale * z
                        })
                        .collect();
                    clip_to_ball(&mut x, task.domain_bound);
                    x
                };
                let d = dist2(&x1, &x2);
                if d > 0.0 {
                    let l2 = loss.eval(y, h.eval(&x2));
                    worst = worst.max((l1 - l2).abs() / d);
                }
            }
        }
    }
    worst
}
