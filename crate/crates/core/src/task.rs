//! Synthetic tasks with known ground truth.
//!
//! A task is a marginal sampler for `P_X` plus a labeling rule for `P_{Y|X}`.
//! Query distributions (`P_Q`) reuse the same labeling rule and only change
//! the marginal, see [`QueryDistribution`].
//!
//! Builtin registry:
//!
//! | name        | marginal                                        | label                 | M_X | M_Y    |
//! |-------------|-------------------------------------------------|-----------------------|-----|--------|
//! | `lin1d`     | uniform on [-1, 1]                              | y = 0.5 x             | 1   | 0.5    |
//! | `lin2d`     | uniform on the unit disk                        | y = 0.3 x1 - 0.2 x2   | 1   | √0.13  |
//! | `sign1d`    | uniform on [-1, 1]                              | y = sign(x) in {-1,1} | 1   | 1      |
//! | `mix2d`     | N((±1.5, 0), 0.5² I), clipped to radius 3       | nearest center, ±1    | 3   | 1      |
//! | `mix2d01`   | as `mix2d`                                      | nearest center, {0,1} | 3   | 1      |
//! | `bimodal1d` | N(±1, 0.15²), clipped to [-1.5, 1.5]            | y = sign(x) in {-1,1} | 1.5 | 1      |
//!
//! `sign(0)` is taken as `+1`. All builtin tasks are noise-free.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{clip_to_ball, dot, norm2, Pool};
use crate::error::{invalid, Error, Result};
use crate::rng::{rng, Rng};

/// Names accepted by [`make_builtin_task`].
pub const BUILTIN_TASKS: &[&str] = &["lin1d", "lin2d", "sign1d", "mix2d", "mix2d01", "bimodal1d"];

/// Attempts allowed per point when rejection sampling a query subregion.
const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Independent uniform coordinates on `[lo, hi]`.
    UniformBox { dim: usize, lo: f64, hi: f64 },
    /// Uniform on the ball of the given radius.
    UniformBall { dim: usize, radius: f64 },
    /// Equal-weight isotropic Gaussian mixture.
    GaussianMixture { centers: Vec<Vec<f64>>, std: f64 },
}

impl Marginal {
    pub fn dim(&self) -> usize {
        match self {
            Marginal::UniformBox { dim, .. } | Marginal::UniformBall { dim, .. } => *dim,
            Marginal::GaussianMixture { centers, .. } => centers[0].len(),
        }
    }

    fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            Marginal::UniformBox { dim, lo, hi } => {
                (0..*dim).map(|_| rng.random_range(*lo..=*hi)).collect()
            }
            Marginal::UniformBall { dim, radius } => loop {
                let x: Vec<f64> = (0..*dim)
                    .map(|_| rng.random_range(-*radius..=*radius))
                    .collect();
                if norm2(&x) <= *radius {
                    break x;
                }
            },
            Marginal::GaussianMixture { centers, std } => {
                let c = &centers[rng.random_range(0..centers.len())];
                c.iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(rng);
                        m + std * z
                    })
                    .collect()
            }
        }
    }
}

/// Deterministic part of `P_{Y|X}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    /// `y = w·x + b`.
    Linear { w: Vec<f64>, b: f64 },
    /// `y = positive` if `x[axis] >= 0`, else `negative`.
    Threshold {
        axis: usize,
        negative: f64,
        positive: f64,
    },
}

impl Conditional {
    pub fn label(&self, x: &[f64]) -> f64 {
        match self {
            Conditional::Linear { w, b } => dot(w, x) + b,
            Conditional::Threshold {
                axis,
                negative,
                positive,
            } => {
                if x[*axis] >= 0.0 {
                    *positive
                } else {
                    *negative
                }
            }
        }
    }
}

/// Optional randomness on top of the deterministic labeling rule.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelNoise {
    #[default]
    None,
    /// Swap between the two class labels with probability `p`.
    Flip { p: f64 },
    /// Add uniform noise on `[-half_width, half_width]`, then clip to `[-M_Y, M_Y]`.
    Uniform { half_width: f64 },
}

/// Admissible label values of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSpace {
    Real,
    PlusMinusOne,
    ZeroOne,
}

impl LabelSpace {
    pub fn pair(self) -> Option<(f64, f64)> {
        match self {
            LabelSpace::Real => None,
            LabelSpace::PlusMinusOne => Some((-1.0, 1.0)),
            LabelSpace::ZeroOne => Some((0.0, 1.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub name: String,
    pub marginal: Marginal,
    pub conditional: Conditional,
    pub noise: LabelNoise,
    pub label_space: LabelSpace,
    /// M_X; samplers clip onto this ball.
    pub domain_bound: f64,
    /// M_Y.
    pub label_bound: f64,
    pub seed: u64,
}

impl SyntheticTask {
    pub fn dim(&self) -> usize {
        self.marginal.dim()
    }

    pub fn empty_pool(&self) -> Pool {
        Pool::new(self.dim(), self.domain_bound, self.label_bound)
            .expect("builtin bounds are valid")
    }

    /// One draw from `P_X`, clipped to the domain ball.
    pub fn sample_x(&self, rng: &mut Rng) -> Vec<f64> {
        let mut x = self.marginal.sample(rng);
        clip_to_ball(&mut x, self.domain_bound);
        x
    }

    /// One draw from `P_{Y|X=x}`.
    pub fn sample_y(&self, x: &[f64], rng: &mut Rng) -> f64 {
        let y = self.conditional.label(x);
        match self.noise {
            LabelNoise::None => y,
            LabelNoise::Flip { p } => match self.label_space.pair() {
                Some((lo, hi)) if rng.random::<f64>() < p => {
                    if y == lo {
                        hi
                    } else {
                        lo
                    }
                }
                _ => y,
            },
            LabelNoise::Uniform { half_width } => {
                let e = rng.random_range(-half_width..=half_width);
                (y + e).clamp(-self.label_bound, self.label_bound)
            }
        }
    }

    /// One draw from `P_Z`.
    pub fn sample_z(&self, rng: &mut Rng) -> (Vec<f64>, f64) {
        let x = self.sample_x(rng);
        let y = self.sample_y(&x, rng);
        (x, y)
    }

    /// A random admissible label (uniform over the label space).
    pub fn random_label(&self, rng: &mut Rng) -> f64 {
        match self.label_space.pair() {
            Some((lo, hi)) => {
                if rng.random::<bool>() {
                    hi
                } else {
                    lo
                }
            }
            None => rng.random_range(-self.label_bound..=self.label_bound),
        }
    }
}

/// The builtin task called `name`.
pub fn make_builtin_task(name: &str) -> Result<SyntheticTask> {
    let sign_labels = |negative, positive| Conditional::Threshold {
        axis: 0,
        negative,
        positive,
    };
    let mixture = Marginal::GaussianMixture {
        centers: vec![vec![-1.5, 0.0], vec![1.5, 0.0]],
        std: 0.5,
    };
    let task = match name {
        "lin1d" => SyntheticTask {
            name: name.into(),
            marginal: Marginal::UniformBox {
                dim: 1,
                lo: -1.0,
                hi: 1.0,
            },
            conditional: Conditional::Linear {
                w: vec![0.5],
                b: 0.0,
            },
            noise: LabelNoise::None,
            label_space: LabelSpace::Real,
            domain_bound: 1.0,
            label_bound: 0.5,
            seed: 0,
        },
        "lin2d" => SyntheticTask {
            name: name.into(),
            marginal: Marginal::UniformBall {
                dim: 2,
                radius: 1.0,
            },
            conditional: Conditional::Linear {
                w: vec![0.3, -0.2],
                b: 0.0,
            },
            noise: LabelNoise::None,
            label_space: LabelSpace::Real,
            domain_bound: 1.0,
            label_bound: 0.13f64.sqrt(),
            seed: 0,
        },
        "sign1d" => SyntheticTask {
            name: name.into(),
            marginal: Marginal::UniformBox {
                dim: 1,
                lo: -1.0,
                hi: 1.0,
            },
            conditional: sign_labels(-1.0, 1.0),
            noise: LabelNoise::None,
            label_space: LabelSpace::PlusMinusOne,
            domain_bound: 1.0,
            label_bound: 1.0,
            seed: 0,
        },
        "mix2d" | "mix2d01" => SyntheticTask {
            name: name.into(),
            marginal: mixture,
            conditional: if name == "mix2d" {
                sign_labels(-1.0, 1.0)
            } else {
                sign_labels(0.0, 1.0)
            },
            noise: LabelNoise::None,
            label_space: if name == "mix2d" {
                LabelSpace::PlusMinusOne
            } else {
                LabelSpace::ZeroOne
            },
            domain_bound: 3.0,
            label_bound: 1.0,
            seed: 0,
        },
        "bimodal1d" => SyntheticTask {
            name: name.into(),
            marginal: Marginal::GaussianMixture {
                centers: vec![vec![-1.0], vec![1.0]],
                std: 0.15,
            },
            conditional: sign_labels(-1.0, 1.0),
            noise: LabelNoise::None,
            label_space: LabelSpace::PlusMinusOne,
            domain_bound: 1.5,
            label_bound: 1.0,
            seed: 0,
        },
        other => return Err(Error::UnknownTask(other.into())),
    };
    Ok(task)
}

/// `m` labeled draws from `P_Z`.
pub fn sample_iid(task: &SyntheticTask, m: usize, seed: u64) -> Result<Pool> {
    QueryDistribution::Marginal.sample(task, m, seed)
}

/// `m` unlabeled draws from `P_X`.
pub fn sample_unlabeled(task: &SyntheticTask, m: usize, seed: u64) -> Result<Pool> {
    if m == 0 {
        return invalid("sample size must be at least 1");
    }
    let mut rng = rng(seed);
    let mut pool = task.empty_pool();
    for _ in 0..m {
        pool.push(task.sample_x(&mut rng), None)?;
    }
    Ok(pool)
}

/// Marginal `P_Q` used to draw queried samples; labels always come from the task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryDistribution {
    /// `P_Q = P_X`.
    #[default]
    Marginal,
    /// `P_X` conditioned on `lo <= x[axis] <= hi` (rejection sampling).
    Subregion {
        #[serde(default)]
        axis: usize,
        lo: f64,
        hi: f64,
    },
}

impl QueryDistribution {
    /// `m` labeled draws from `P_Q · P_{Y|X}`.
    pub fn sample(&self, task: &SyntheticTask, m: usize, seed: u64) -> Result<Pool> {
        if m == 0 {
            return invalid("sample size must be at least 1");
        }
        let mut rng = rng(seed);
        let mut pool = task.empty_pool();
        for _ in 0..m {
            let x = self.sample_x(task, &mut rng)?;
            let y = task.sample_y(&x, &mut rng);
            pool.push(x, Some(y))?;
        }
        Ok(pool)
    }

    fn sample_x(&self, task: &SyntheticTask, rng: &mut Rng) -> Result<Vec<f64>> {
        match *self {
            QueryDistribution::Marginal => Ok(task.sample_x(rng)),
            QueryDistribution::Subregion { axis, lo, hi } => {
                if axis >= task.dim() || !(lo <= hi) {
                    return invalid("bad subregion");
                }
                for _ in 0..MAX_REJECTIONS {
                    let x = task.sample_x(rng);
                    if x[axis] >= lo && x[axis] <= hi {
                        return Ok(x);
                    }
                }
                Err(Error::Solver(format!(
                    "subregion [{lo}, {hi}] on axis {axis} has negligible mass"
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_in_seed() {
        let t = make_builtin_task("lin1d").unwrap();
        let a = sample_iid(&t, 3, 7).unwrap();
        let b = sample_iid(&t, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.is_fully_labeled());
        assert_ne!(a, sample_iid(&t, 3, 8).unwrap());
    }

    #[test]
    fn zero_size_is_rejected() {
        let t = make_builtin_task("lin1d").unwrap();
        assert!(sample_iid(&t, 0, 1).is_err());
    }

    #[test]
    fn sign_task_labels_follow_the_rule() {
        let t = make_builtin_task("sign1d").unwrap();
        let p = sample_iid(&t, 1000, 11).unwrap();
        for (x, y) in p.labeled() {
            let expected = if x[0] >= 0.0 { 1.0 } else { -1.0 };
            assert_eq!(y, expected);
        }
    }

    #[test]
    fn registry_constants() {
        let t = make_builtin_task("lin1d").unwrap();
        assert_eq!(t.domain_bound, 1.0);
        assert_eq!(t.label_bound, 0.5);
        assert_eq!(t.conditional.label(&[0.8]), 0.4);
        let m = make_builtin_task("mix2d").unwrap();
        assert_eq!(m.conditional.label(&[-1.5, 0.0]), -1.0);
        assert_eq!(m.conditional.label(&[1.5, 0.0]), 1.0);
        assert!(matches!(
            make_builtin_task("nosuch"),
            Err(Error::UnknownTask(_))
        ));
        for name in BUILTIN_TASKS {
            let t = make_builtin_task(name).unwrap();
            let p = sample_iid(&t, 200, 3).unwrap();
            assert!(p.points().iter().all(|x| norm2(x) <= t.domain_bound + 1e-12));
        }
    }

    #[test]
    fn subregion_restricts_the_marginal() {
        let t = make_builtin_task("lin1d").unwrap();
        let q = QueryDistribution::Subregion {
            axis: 0,
            lo: 0.0,
            hi: 1.0,
        };
        let p = q.sample(&t, 100, 5).unwrap();
        assert!(p.points().iter().all(|x| x[0] >= 0.0));
        for (x, y) in p.labeled() {
            assert_eq!(y, 0.5 * x[0]);
        }
    }
}
