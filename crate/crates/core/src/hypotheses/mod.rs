//! Hypothesis classes, losses, parameter conditions and training.

pub mod certify;
mod loss;
mod model;
pub mod project;
mod setting;
mod spectral;
pub mod train;

pub use certify::{certify, probe_membership, Certificate, CertificateKind, CERTIFICATE_TOL};
pub use loss::{loss, LossKind, LOG_CLAMP};
pub use model::{gaussian, Dense, Hypothesis, Params};
pub use project::{project, random_feasible};
pub use setting::{ClassKind, Domain, SettingId, SettingRow, SETTINGS};
pub use spectral::spectral_norm;
pub use train::{train, ModelSpec, OptimizerConfig, TrainReport};
