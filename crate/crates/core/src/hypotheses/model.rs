use serde::{Deserialize, Serialize};

use super::setting::{ClassKind, SettingId};
use crate::data::dot;
use crate::error::{invalid, Error, Result};

/// A fully connected layer `z = W a + b`; `weights` is row-major, one row per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: vec![vec![0.0; inputs]; outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.weights.len()
    }

    fn apply(&self, a: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| dot(row, a) + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    /// `w·x + b`
    Linear { w: Vec<f64>, b: f64 },
    /// `Σ_i w_i exp(-‖x - t_i‖² / (2σ²))` with frozen centers `t_i`
    Gaussian {
        w: Vec<f64>,
        centers: Vec<Vec<f64>>,
        sigma: f64,
    },
    /// `sigmoid(w·x)`
    Logistic { w: Vec<f64> },
    /// `o·f(x) + b`, `f` a ReLU network whose last layer is affine
    Network {
        layers: Vec<Dense>,
        output: Vec<f64>,
        output_bias: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawHypothesis {
    setting: SettingId,
    params: Params,
}

/// A parameterized predictor tagged with its setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHypothesis", into = "RawHypothesis")]
pub struct Hypothesis {
    setting: SettingId,
    params: Params,
    input_dim: usize,
}

impl TryFrom<RawHypothesis> for Hypothesis {
    type Error = Error;
    fn try_from(raw: RawHypothesis) -> Result<Self> {
        Hypothesis::new(raw.setting, raw.params)
    }
}

impl From<Hypothesis> for RawHypothesis {
    fn from(h: Hypothesis) -> Self {
        RawHypothesis {
            setting: h.setting,
            params: h.params,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Hypothesis {
    /// Validates that `params` belongs to the setting's class and is dimensionally consistent.
    pub fn new(setting: SettingId, params: Params) -> Result<Self> {
        let class = setting.row().class;
        let input_dim = match (&params, class) {
            (Params::Linear { w, b }, ClassKind::Linear | ClassKind::Svm) => {
                if !b.is_finite() {
                    return invalid("non-finite bias");
                }
                w.len()
            }
            (Params::Logistic { w }, ClassKind::Logistic) => w.len(),
            (Params::Gaussian { w, centers, sigma }, ClassKind::Gaussian) => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return invalid("gaussian width must be positive");
                }
                if w.len() != centers.len() || centers.is_empty() {
                    return invalid("gaussian class needs one weight per center");
                }
                let d = centers[0].len();
                if centers.iter().any(|c| c.len() != d) {
                    return invalid("centers of unequal dimension");
                }
                d
            }
            (
                Params::Network {
                    layers,
                    output,
                    output_bias,
                },
                ClassKind::Network,
            ) => {
                if layers.is_empty() {
                    return invalid("network needs at least one layer");
                }
                if !output_bias.is_finite() {
                    return invalid("non-finite output bias");
                }
                for l in layers {
                    if l.outputs() == 0
                        || l.bias.len() != l.outputs()
                        || l.weights.iter().any(|r| r.len() != l.inputs())
                    {
                        return invalid("inconsistent layer shape");
                    }
                }
                for pair in layers.windows(2) {
                    if pair[1].inputs() != pair[0].outputs() {
                        return invalid("layer dimensions do not chain");
                    }
                }
                if output.len() != layers[layers.len() - 1].outputs() {
                    return invalid("output weight does not match the last layer");
                }
                layers[0].inputs()
            }
            _ => {
                return invalid(format!(
                    "parameters do not belong to the {setting:?} hypothesis class"
                ))
            }
        };
        if input_dim == 0 {
            return invalid("zero input dimension");
        }
        let h = Self {
            setting,
            params,
            input_dim,
        };
        if h.flat_params().iter().any(|v| !v.is_finite()) {
            return invalid("non-finite parameter");
        }
        Ok(h)
    }

    pub fn setting(&self) -> SettingId {
        self.setting
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// Evaluates the class formula. Hinge settings return the pre-sign score and the
    /// logistic setting returns a probability.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.eval(x))
    }

    /// Signed decision score: the logit for the logistic class, `predict` otherwise.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match &self.params {
            Params::Logistic { w } => {
                self.predict(x)?;
                Ok(dot(w, x))
            }
            _ => self.predict(x),
        }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match &self.params {
            Params::Linear { w, b } => dot(w, x) + b,
            Params::Logistic { w } => sigmoid(dot(w, x)),
            Params::Gaussian { w, centers, sigma } => w
                .iter()
                .zip(centers)
                .map(|(wi, t)| wi * gaussian(x, t, *sigma))
                .sum(),
            Params::Network {
                layers,
                output,
                output_bias,
            } => {
                let mut a = x.to_vec();
                for (l, layer) in layers.iter().enumerate() {
                    a = layer.apply(&a);
                    if l + 1 < layers.len() {
                        a.iter_mut().for_each(|v| *v = v.max(0.0));
                    }
                }
                dot(output, &a) + output_bias
            }
        }
    }

    /// Trainable parameters flattened: linear `w, b`; logistic and gaussian `w`
    /// (centers and width are frozen); network layer by layer (`W` row-major, then
    /// `b`), then `o`, then the output bias.
    pub fn flat_params(&self) -> Vec<f64> {
        match &self.params {
            Params::Linear { w, b } => w.iter().copied().chain([*b]).collect(),
            Params::Logistic { w } | Params::Gaussian { w, .. } => w.clone(),
            Params::Network {
                layers,
                output,
                output_bias,
            } => {
                let mut v = Vec::new();
                for l in layers {
                    l.weights.iter().for_each(|r| v.extend_from_slice(r));
                    v.extend_from_slice(&l.bias);
                }
                v.extend_from_slice(output);
                v.push(*output_bias);
                v
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.flat_params().len()
    }

    /// Inverse of [`Hypothesis::flat_params`].
    pub fn set_flat_params(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: theta.len(),
            });
        }
        let mut it = theta.iter().copied();
        let mut next = || it.next().expect("length checked");
        match &mut self.params {
            Params::Linear { w, b } => {
                w.iter_mut().for_each(|v| *v = next());
                *b = next();
            }
            Params::Logistic { w } | Params::Gaussian { w, .. } => {
                w.iter_mut().for_each(|v| *v = next());
            }
            Params::Network {
                layers,
                output,
                output_bias,
            } => {
                for l in layers.iter_mut() {
                    l.weights
                        .iter_mut()
                        .for_each(|r| r.iter_mut().for_each(|v| *v = next()));
                    l.bias.iter_mut().for_each(|v| *v = next());
                }
                output.iter_mut().for_each(|v| *v = next());
                *output_bias = next();
            }
        }
        Ok(())
    }

    /// Prediction and its gradient with respect to [`Hypothesis::flat_params`].
    pub(crate) fn eval_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match &self.params {
            Params::Linear { w, b } => {
                let mut g = x.to_vec();
                g.push(1.0);
                (dot(w, x) + b, g)
            }
            Params::Logistic { w } => {
                let p = sigmoid(dot(w, x));
                let s = p * (1.0 - p);
                (p, x.iter().map(|v| v * s).collect())
            }
            Params::Gaussian { w, centers, sigma } => {
                let g: Vec<f64> = centers.iter().map(|t| gaussian(x, t, *sigma)).collect();
                (dot(w, &g), g)
            }
            Params::Network {
                layers,
                output,
                output_bias,
            } => network_grad(layers, output, *output_bias, x),
        }
    }
}

/// `exp(-‖x - t‖² / (2σ²))`
pub fn gaussian(x: &[f64], t: &[f64], sigma: f64) -> f64 {
    let d2: f64 = x.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

fn network_grad(layers: &[Dense], output: &[f64], output_bias: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let depth = layers.len();
    // activations[l] is the input of layer l; pre[l] its affine output
    let mut activations = vec![x.to_vec()];
    let mut pre = Vec::with_capacity(depth);
    for (l, layer) in layers.iter().enumerate() {
        let z = layer.apply(&activations[l]);
        let a = if l + 1 < depth {
            z.iter().map(|v| v.max(0.0)).collect()
        } else {
            z.clone()
        };
        pre.push(z);
        activations.push(a);
    }
    let f = &activations[depth];
    let score = dot(output, f) + output_bias;

    let mut layer_grads: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(depth);
    let mut delta = output.to_vec();
    for l in (0..depth).rev() {
        let input = &activations[l];
        let dw: Vec<f64> = delta
            .iter()
            .flat_map(|d| input.iter().map(move |a| d * a))
            .collect();
        layer_grads.push((dw, delta.clone()));
        if l > 0 {
            let layer = &layers[l];
            let mut back = vec![0.0; layer.inputs()];
            for (row, d) in layer.weights.iter().zip(&delta) {
                for (b, w) in back.iter_mut().zip(row) {
                    *b += w * d;
                }
            }
            for (b, z) in back.iter_mut().zip(&pre[l - 1]) {
                if *z <= 0.0 {
                    *b = 0.0;
                }
            }
            delta = back;
        }
    }
    let mut grad = Vec::new();
    for (dw, db) in layer_grads.into_iter().rev() {
        grad.extend(dw);
        grad.extend(db);
    }
    grad.extend_from_slice(f);
    grad.push(1.0);
    (score, grad)
}
