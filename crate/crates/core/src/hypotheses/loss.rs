use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::LabelSpace;

/// Predictions are clamped into `[LOG_CLAMP, 1 - LOG_CLAMP]` before the log loss.
pub const LOG_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LossKind {
    /// `|y - ŷ|`
    L1,
    /// `(y - ŷ)²`
    L2,
    /// `-(y log ŷ + (1 - y) log(1 - ŷ))`, `y ∈ {0, 1}`
    Log,
    /// `max(0, 1 - y s)` on the score `s`, `y ∈ {-1, 1}`
    Hinge,
}

impl LossKind {
    pub fn label_space(self) -> LabelSpace {
        match self {
            LossKind::L1 | LossKind::L2 => LabelSpace::Real,
            LossKind::Log => LabelSpace::ZeroOne,
            LossKind::Hinge => LabelSpace::PlusMinusOne,
        }
    }

    pub fn check_label(self, y: f64) -> Result<()> {
        let ok = match self.label_space().pair() {
            None => y.is_finite(),
            Some((lo, hi)) => y == lo || y == hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InadmissibleLabel {
                label: y,
                reason: format!("{self:?} loss expects {:?} labels", self.label_space()),
            })
        }
    }

    /// Loss value without label validation.
    pub(crate) fn eval(self, y: f64, pred: f64) -> f64 {
        match self {
            LossKind::L1 => (y - pred).abs(),
            LossKind::L2 => (y - pred) * (y - pred),
            LossKind::Log => {
                let p = pred.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            }
            LossKind::Hinge => (1.0 - y * pred).max(0.0),
        }
    }

    /// A subgradient of the loss with respect to the prediction.
    pub(crate) fn derivative(self, y: f64, pred: f64) -> f64 {
        match self {
            LossKind::L1 => {
                if pred > y {
                    1.0
                } else if pred < y {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::L2 => 2.0 * (pred - y),
            LossKind::Log => {
                let p = pred.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
                -y / p + (1.0 - y) / (1.0 - p)
            }
            LossKind::Hinge => {
                if 1.0 - y * pred > 0.0 {
                    -y
                } else {
                    0.0
                }
            }
        }
    }
}

/// `ℓ(y, pred)`, rejecting labels outside the loss's label space.
pub fn loss(kind: LossKind, y: f64, pred: f64) -> Result<f64> {
    kind.check_label(y)?;
    Ok(kind.eval(y, pred))
}
