//! Constraint projections.
//!
//! Each setting's condition is enforced by radially rescaling the constrained
//! norm (`‖w‖₂`, or `‖w‖₁` for the gaussian class) onto its radius. Biases are
//! clipped to `±bias_bound` first, since the linear-ℓ₂ radius depends on `|b|`.
//! Networks are rescaled layer by layer with a common factor so that the
//! product `‖o‖₂ Π_i ‖W_i‖₂` lands on one. Parameters that are already feasible
//! (within a relative `1e-12`) come back unchanged, which makes the projection
//! idempotent.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::model::{Hypothesis, Params};
use super::setting::{Domain, SettingId};
use super::spectral::spectral_norm;
use crate::data::{norm1, norm2};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const FEASIBILITY_TOL: f64 = 1e-12;

/// `log(e - 1)`, the logistic sup-norm budget.
pub fn log_e_minus_one() -> f64 {
    (std::f64::consts::E - 1.0).ln()
}

/// Radius of the weight constraint for the given bias, or `None` when the
/// setting leaves the weights unconstrained (`M_X = 0` for the domain-scaled rows,
/// and the network, whose constraint is a product).
pub fn weight_radius(setting: SettingId, domain: &Domain, b: f64) -> Result<Option<f64>> {
    let Domain { mx, my, .. } = *domain;
    match setting {
        SettingId::LinL1 | SettingId::SvmHinge => Ok(Some(1.0)),
        SettingId::LinL2 => {
            let slack = 1.0 - my - b.abs();
            if slack <= 0.0 {
                return Err(Error::Infeasible(format!(
                    "1 - M_Y - |b| = {slack} leaves no room for the weights"
                )));
            }
            if !(mx > 0.0) {
                return Err(Error::Infeasible("LIN_L2 needs M_X > 0".into()));
            }
            Ok(Some(slack / mx))
        }
        SettingId::GaussL1 | SettingId::LogisticLog if !(mx > 0.0) => Ok(None),
        SettingId::GaussL1 => Err(Error::InvalidArgument(
            "gaussian radius depends on sigma; use gaussian_radius".into(),
        )),
        SettingId::LogisticLog => Ok(Some(log_e_minus_one() / mx)),
        SettingId::NnHinge => Ok(None),
    }
}

/// `σ² / (2 M_X)`, the `‖w‖₁` radius of the gaussian class.
pub fn gaussian_radius(sigma: f64, mx: f64) -> Option<f64> {
    (mx > 0.0).then(|| sigma * sigma / (2.0 * mx))
}

fn rescale(w: &mut [f64], norm: f64, radius: f64) {
    if norm > radius * (1.0 + FEASIBILITY_TOL) {
        let s = radius / norm;
        w.iter_mut().for_each(|v| *v *= s);
    }
}

fn clip_bias(b: &mut f64, bound: f64) {
    *b = b.clamp(-bound, bound);
}

/// `‖o‖₂ Π_i ‖W_i‖₂`
pub fn network_lipschitz(params: &Params) -> f64 {
    match params {
        Params::Network { layers, output, .. } => {
            layers
                .iter()
                .map(|l| spectral_norm(&l.weights))
                .product::<f64>()
                * norm2(output)
        }
        _ => 0.0,
    }
}

/// Maps `h` onto the feasible set of its setting.
pub fn project(h: &Hypothesis, domain: &Domain) -> Result<Hypothesis> {
    if !(domain.bias_bound >= 0.0) {
        return Err(Error::InvalidArgument("bias bound must be nonnegative".into()));
    }
    let setting = h.setting();
    let mut params = h.params().clone();
    match &mut params {
        Params::Linear { w, b } => {
            clip_bias(b, domain.bias_bound);
            if let Some(r) = weight_radius(setting, domain, *b)? {
                let n = norm2(w);
                rescale(w, n, r);
            }
        }
        Params::Logistic { w } => {
            if let Some(r) = weight_radius(setting, domain, 0.0)? {
                let n = norm2(w);
                rescale(w, n, r);
            }
        }
        Params::Gaussian { w, sigma, .. } => {
            if let Some(r) = gaussian_radius(*sigma, domain.mx) {
                let n = norm1(w);
                rescale(w, n, r);
            }
        }
        Params::Network {
            layers,
            output,
            output_bias,
        } => {
            clip_bias(output_bias, domain.bias_bound);
            for l in layers.iter_mut() {
                l.bias.iter_mut().for_each(|b| clip_bias(b, domain.bias_bound));
            }
            let norms: Vec<f64> = layers.iter().map(|l| spectral_norm(&l.weights)).collect();
            let product = norms.iter().product::<f64>() * norm2(output);
            if product > 1.0 + FEASIBILITY_TOL {
                let gamma = product.powf(-1.0 / (layers.len() as f64 + 1.0));
                for l in layers.iter_mut() {
                    l.weights
                        .iter_mut()
                        .for_each(|r| r.iter_mut().for_each(|v| *v *= gamma));
                }
                output.iter_mut().for_each(|v| *v *= gamma);
            }
        }
    }
    Hypothesis::new(setting, params)
}

fn random_direction(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let s = norm2(&v);
        if s > 1e-12 {
            return v.into_iter().map(|a| a / s).collect();
        }
    }
}

/// Radius fraction: half the draws on the boundary, half uniform in the ball.
fn radial_fraction(dim: usize, rng: &mut Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        rng.random::<f64>().powf(1.0 / dim as f64)
    }
}

/// A random feasible member of the class of `template` (same setting, shape,
/// frozen centers and width).
pub fn random_feasible(template: &Hypothesis, domain: &Domain, rng: &mut Rng) -> Result<Hypothesis> {
    let setting = template.setting();
    let mut params = template.params().clone();
    match &mut params {
        Params::Linear { w, b } => {
            let mut bound = domain.bias_bound;
            if setting == SettingId::LinL2 {
                bound = bound.min((1.0 - domain.my) * (1.0 - 1e-9)).max(0.0);
            }
            *b = if bound > 0.0 {
                rng.random_range(-bound..=bound)
            } else {
                0.0
            };
            let r = weight_radius(setting, domain, *b)?.unwrap_or(1.0);
            let dir = random_direction(w.len(), rng);
            let s = r * radial_fraction(w.len(), rng);
            w.iter_mut().zip(dir).for_each(|(v, d)| *v = d * s);
        }
        Params::Logistic { w } => {
            let r = weight_radius(setting, domain, 0.0)?.unwrap_or(1.0);
            let dir = random_direction(w.len(), rng);
            let s = r * radial_fraction(w.len(), rng);
            w.iter_mut().zip(dir).for_each(|(v, d)| *v = d * s);
        }
        Params::Gaussian { w, sigma, .. } => {
            let r = gaussian_radius(*sigma, domain.mx).unwrap_or(1.0);
            let raw: Vec<f64> = (0..w.len()).map(|_| StandardNormal.sample(rng)).collect();
            let n = norm1(&raw).max(1e-300);
            let s = r * radial_fraction(w.len(), rng);
            w.iter_mut().zip(raw).for_each(|(v, d)| *v = d / n * s);
        }
        Params::Network {
            layers,
            output,
            output_bias,
        } => {
            let bound = domain.bias_bound;
            let draw_bias = |rng: &mut Rng| {
                if bound > 0.0 {
                    rng.random_range(-bound..=bound)
                } else {
                    0.0
                }
            };
            for l in layers.iter_mut() {
                let scale = 1.0 / (l.inputs() as f64).sqrt();
                for r in l.weights.iter_mut() {
                    for v in r.iter_mut() {
                        let z: f64 = StandardNormal.sample(rng);
                        *v = z * scale;
                    }
                }
                for b in l.bias.iter_mut() {
                    *b = draw_bias(rng);
                }
            }
            let scale = 1.0 / (output.len() as f64).sqrt();
            for v in output.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *v = z * scale;
            }
            *output_bias = draw_bias(rng);
            let product = network_lipschitz(&params);
            if product > 0.0 {
                let target = radial_fraction(1, rng);
                let factors = match &params {
                    Params::Network { layers, .. } => layers.len() as f64 + 1.0,
                    _ => unreachable!(),
                };
                let gamma = (target / product).powf(1.0 / factors);
                if let Params::Network { layers, output, .. } = &mut params {
                    for l in layers.iter_mut() {
                        l.weights
                            .iter_mut()
                            .for_each(|r| r.iter_mut().for_each(|v| *v *= gamma));
                    }
                    output.iter_mut().for_each(|v| *v *= gamma);
                }
            }
        }
    }
    project(&Hypothesis::new(setting, params)?, domain)
}
