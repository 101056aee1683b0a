use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use crate::error::{invalid, Result};
use crate::ipm::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SettingId {
    LinL1,
    LinL2,
    GaussL1,
    LogisticLog,
    SvmHinge,
    NnHinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Linear,
    Gaussian,
    Logistic,
    Svm,
    Network,
}

/// One learning setting: hypothesis class, loss, parameter condition and the
/// IPM generator that the induced loss functions belong to under that condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SettingRow {
    pub id: SettingId,
    pub class: ClassKind,
    pub loss: LossKind,
    pub generator: Generator,
    /// The parameter condition in human-readable form.
    pub condition: &'static str,
}

pub const SETTINGS: [SettingRow; 6] = [
    SettingRow {
        id: SettingId::LinL1,
        class: ClassKind::Linear,
        loss: LossKind::L1,
        generator: Generator::Kantorovich,
        condition: "||w||_2 <= 1",
    },
    SettingRow {
        id: SettingId::LinL2,
        class: ClassKind::Linear,
        loss: LossKind::L2,
        generator: Generator::TotalVariation,
        condition: "||w||_2 <= (1 - M_Y - |b|) / M_X",
    },
    SettingRow {
        id: SettingId::GaussL1,
        class: ClassKind::Gaussian,
        loss: LossKind::L1,
        generator: Generator::Kantorovich,
        condition: "(2 M_X / sigma^2) ||w||_1 <= 1",
    },
    SettingRow {
        id: SettingId::LogisticLog,
        class: ClassKind::Logistic,
        loss: LossKind::Log,
        generator: Generator::TotalVariation,
        condition: "||w||_2 <= log(e - 1) / M_X",
    },
    SettingRow {
        id: SettingId::SvmHinge,
        class: ClassKind::Svm,
        loss: LossKind::Hinge,
        generator: Generator::Kantorovich,
        condition: "||w||_2 <= 1",
    },
    SettingRow {
        id: SettingId::NnHinge,
        class: ClassKind::Network,
        loss: LossKind::Hinge,
        generator: Generator::Kantorovich,
        condition: "||o||_2 prod_i ||W_i||_2 <= 1",
    },
];

impl SettingId {
    pub const ALL: [SettingId; 6] = [
        SettingId::LinL1,
        SettingId::LinL2,
        SettingId::GaussL1,
        SettingId::LogisticLog,
        SettingId::SvmHinge,
        SettingId::NnHinge,
    ];

    pub fn row(self) -> &'static SettingRow {
        SETTINGS
            .iter()
            .find(|r| r.id == self)
            .expect("every id has a row")
    }

    pub fn loss(self) -> LossKind {
        self.row().loss
    }

    pub fn generator(self) -> Generator {
        self.row().generator
    }

    /// Classification settings (labels in a two-point set).
    pub fn is_classification(self) -> bool {
        matches!(
            self,
            SettingId::LogisticLog | SettingId::SvmHinge | SettingId::NnHinge
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            SettingId::LinL1 => "LIN_L1",
            SettingId::LinL2 => "LIN_L2",
            SettingId::GaussL1 => "GAUSS_L1",
            SettingId::LogisticLog => "LOGISTIC_LOG",
            SettingId::SvmHinge => "SVM_HINGE",
            SettingId::NnHinge => "NN_HINGE",
        }
    }
}

impl std::str::FromStr for SettingId {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        SettingId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .map_or_else(|| invalid(format!("unknown setting `{s}`")), Ok)
    }
}

/// Bounds of the compact domain the conditions refer to.
///
/// `bias_bound` caps every bias (linear offset, hidden and output biases of a
/// network). Without it the loss class is unbounded and its Rademacher
/// complexity infinite; it defaults to `M_X + M_Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    /// M_X
    pub mx: f64,
    /// M_Y
    pub my: f64,
    pub bias_bound: f64,
}

impl Domain {
    pub fn new(mx: f64, my: f64) -> Self {
        Self {
            mx,
            my,
            bias_bound: mx + my,
        }
    }

    pub fn with_bias_bound(mut self, bias_bound: f64) -> Self {
        self.bias_bound = bias_bound;
        self
    }
}
