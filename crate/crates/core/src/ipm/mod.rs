//! Empirical integral probability metrics.
//!
//! Two generator classes are supported: the Kantorovich class (functions with
//! Lipschitz semi-norm at most one under the Euclidean metric), whose IPM is the
//! Wasserstein-1 distance, and the total-variation class (sup-norm at most one),
//! whose IPM on discrete measures is `Σ |p_i - q_i|`.
//!
//! All estimators are plug-in estimators on empirical measures. Continuous
//! samples are compared under total variation only after binning on a
//! caller-supplied grid, recorded in the estimate.

pub mod transport;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::dist2;
use crate::error::{invalid, Error, Result};

/// Largest combined support accepted by [`kantorovich_exact`] by default.
pub const DEFAULT_EXACT_CAP: usize = 512;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Kantorovich,
    TotalVariation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IpmMethod {
    ClosedForm1d,
    ExactTransport,
    HistogramTv,
    DiscreteTv,
}

impl IpmMethod {
    pub fn generator(self) -> Generator {
        match self {
            IpmMethod::ClosedForm1d | IpmMethod::ExactTransport => Generator::Kantorovich,
            IpmMethod::HistogramTv | IpmMethod::DiscreteTv => Generator::TotalVariation,
        }
    }
}

/// Axis-aligned histogram grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, bins: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || lo.len() != bins.len() || lo.is_empty() {
            return invalid("grid lo/hi/bins must have one equal, nonzero length");
        }
        if bins.iter().any(|&b| b == 0) {
            return invalid("grid needs at least one bin per axis");
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
            return invalid("degenerate grid box");
        }
        Ok(Self { lo, hi, bins })
    }

    /// Bounding box of both samples with `bins` bins per axis. Axes on which every
    /// point coincides are widened by 0.5 on each side.
    pub fn covering(a: &[Vec<f64>], b: &[Vec<f64>], bins: usize) -> Result<Self> {
        let first = a
            .first()
            .or_else(|| b.first())
            .ok_or_else(|| Error::Empty("samples".into()))?;
        let dim = first.len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for x in a.iter().chain(b) {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            for d in 0..dim {
                lo[d] = lo[d].min(x[d]);
                hi[d] = hi[d].max(x[d]);
            }
        }
        for d in 0..dim {
            if hi[d] <= lo[d] {
                lo[d] -= 0.5;
                hi[d] += 0.5;
            }
        }
        GridSpec::new(lo, hi, vec![bins; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Flattened cell index; the upper face of the box belongs to the last bin.
    fn cell(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut idx = 0usize;
        for d in 0..self.dim() {
            let (lo, hi, nb) = (self.lo[d], self.hi[d], self.bins[d]);
            if !(x[d] >= lo && x[d] <= hi) {
                return invalid(format!("point {:?} outside the grid box", x));
            }
            let b = (((x[d] - lo) / (hi - lo)) * nb as f64).floor() as usize;
            idx = idx * nb + b.min(nb - 1);
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpmEstimate {
    pub generator: Generator,
    pub method: IpmMethod,
    pub value: f64,
    pub n_a: usize,
    pub n_b: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl IpmEstimate {
    fn new(method: IpmMethod, value: f64, n_a: usize, n_b: usize) -> Self {
        Self {
            generator: method.generator(),
            method,
            value: value.max(0.0),
            n_a,
            n_b,
            grid: None,
        }
    }

    /// A zero estimate; used when the two measures are known to coincide.
    pub fn zero(generator: Generator, n: usize) -> Self {
        let method = match generator {
            Generator::Kantorovich => IpmMethod::ExactTransport,
            Generator::TotalVariation => IpmMethod::DiscreteTv,
        };
        Self::new(method, 0.0, n, n)
    }
}

/// A probability vector over a finite support of points.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return invalid("points and weights differ in length");
        }
        if points.is_empty() {
            return Err(Error::Empty("weighted point set".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return invalid("weights must be nonnegative");
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::NotNormalized(s));
        }
        Ok(Self { points, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("weighted point set".into()));
        }
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        Ok(Self {
            points,
            weights: vec![w; n],
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Wasserstein-1 between two equal-size, equal-weight samples on the line:
/// `(1/m) Σ |a_(i) - b_(i)|` over the sorted orders.
pub fn kantorovich_1d(a: &[f64], b: &[f64]) -> Result<IpmEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("kantorovich_1d input".into()));
    }
    if a.len() != b.len() {
        return invalid(format!(
            "kantorovich_1d needs equal sizes, got {} and {}",
            a.len(),
            b.len()
        ));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let v = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;
    Ok(IpmEstimate::new(IpmMethod::ClosedForm1d, v, a.len(), b.len()))
}

/// Wasserstein-1 between arbitrary weighted measures on the line, as
/// `∫ |F_a(t) - F_b(t)| dt` over the merged support.
pub fn kantorovich_1d_weighted(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> Result<IpmEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("kantorovich_1d_weighted input".into()));
    }
    if a.len() != wa.len() || b.len() != wb.len() {
        return invalid("points and weights differ in length");
    }
    for w in [wa, wb] {
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::NotNormalized(s));
        }
    }
    // (position, signed mass): +w for a, -w for b
    let mut events: Vec<(f64, f64)> = a
        .iter()
        .zip(wa)
        .map(|(&x, &w)| (x, w))
        .chain(b.iter().zip(wb).map(|(&x, &w)| (x, -w)))
        .collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cdf_gap = 0.0;
    let mut total = 0.0;
    for w in events.windows(2) {
        cdf_gap += w[0].1;
        total += cdf_gap.abs() * (w[1].0 - w[0].0);
    }
    Ok(IpmEstimate::new(IpmMethod::ClosedForm1d, total, a.len(), b.len()))
}

/// Exact Wasserstein-1 under the Euclidean ground metric via min-cost flow.
pub fn kantorovich_exact(a: &WeightedPoints, b: &WeightedPoints) -> Result<IpmEstimate> {
    kantorovich_exact_with_cap(a, b, DEFAULT_EXACT_CAP)
}

pub fn kantorovich_exact_with_cap(
    a: &WeightedPoints,
    b: &WeightedPoints,
    cap: usize,
) -> Result<IpmEstimate> {
    let total = a.len() + b.len();
    if total > cap {
        return Err(Error::TooLarge {
            what: "transport support",
            got: total,
            limit: cap,
        });
    }
    let dim = a.points[0].len();
    for x in a.points.iter().chain(&b.points) {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
    }
    let value = if a.len() == 1 || b.len() == 1 {
        // a single atom on one side admits exactly one plan
        let (atom, other) = if a.len() == 1 { (a, b) } else { (b, a) };
        other
            .points
            .iter()
            .zip(&other.weights)
            .map(|(x, w)| w * dist2(x, &atom.points[0]))
            .sum()
    } else {
        // fewer sources keeps the Dijkstra frontier small
        let (src, dst) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let cost: Vec<Vec<f64>> = src
            .points
            .iter()
            .map(|x| dst.points.iter().map(|y| dist2(x, y)).collect())
            .collect();
        transport::solve(&src.weights, &dst.weights, &cost)?.cost
    };
    Ok(IpmEstimate::new(IpmMethod::ExactTransport, value, a.len(), b.len()))
}

/// Total variation `Σ |p_i - q_i|` between two probability vectors.
pub fn tv_discrete(p: &[f64], q: &[f64]) -> Result<IpmEstimate> {
    if p.len() != q.len() {
        return invalid(format!("length mismatch: {} vs {}", p.len(), q.len()));
    }
    if p.is_empty() {
        return Err(Error::Empty("probability vector".into()));
    }
    for v in [p, q] {
        if v.iter().any(|x| !(*x >= 0.0)) {
            return invalid("probabilities must be nonnegative");
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::NotNormalized(s));
        }
    }
    let v: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    Ok(IpmEstimate::new(IpmMethod::DiscreteTv, v.min(2.0), p.len(), q.len()))
}

/// Total variation between the histograms of two samples on a shared grid.
pub fn tv_histogram(a: &[Vec<f64>], b: &[Vec<f64>], grid: &GridSpec) -> Result<IpmEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("tv_histogram sample".into()));
    }
    let mut cells: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for x in a {
        cells.entry(grid.cell(x)?).or_default().0 += 1;
    }
    for x in b {
        cells.entry(grid.cell(x)?).or_default().1 += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let p: Vec<f64> = cells.values().map(|c| c.0 as f64 / na).collect();
    let q: Vec<f64> = cells.values().map(|c| c.1 as f64 / nb).collect();
    let tv = tv_discrete(&p, &q)?;
    let mut est = IpmEstimate::new(IpmMethod::HistogramTv, tv.value, a.len(), b.len());
    est.grid = Some(grid.clone());
    Ok(est)
}

/// How to compare two empirical samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpmSpec {
    pub generator: Generator,
    /// Bins per axis for total variation when no explicit grid is given.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn default_bins() -> usize {
    10
}

impl IpmSpec {
    pub fn new(generator: Generator) -> Self {
        Self {
            generator,
            bins: default_bins(),
            grid: None,
        }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }
}

/// Plug-in IPM between the empirical measures of two samples.
///
/// Kantorovich uses the closed form on the line (sorted pairs for equal sizes,
/// CDF integral otherwise) and exact transport in higher dimension. Total
/// variation bins both samples on `spec.grid`, or on the covering grid.
pub fn empirical_ipm(a: &[Vec<f64>], b: &[Vec<f64>], spec: &IpmSpec) -> Result<IpmEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("empirical_ipm sample".into()));
    }
    let dim = a[0].len();
    match spec.generator {
        Generator::Kantorovich => {
            if dim == 1 {
                let xa: Vec<f64> = a.iter().map(|x| x[0]).collect();
                let xb: Vec<f64> = b.iter().map(|x| x[0]).collect();
                if xa.len() == xb.len() {
                    kantorovich_1d(&xa, &xb)
                } else {
                    let wa = vec![1.0 / xa.len() as f64; xa.len()];
                    let wb = vec![1.0 / xb.len() as f64; xb.len()];
                    kantorovich_1d_weighted(&xa, &wa, &xb, &wb)
                }
            } else {
                kantorovich_exact(
                    &WeightedPoints::uniform(a.to_vec())?,
                    &WeightedPoints::uniform(b.to_vec())?,
                )
            }
        }
        Generator::TotalVariation => {
            let grid = match &spec.grid {
                Some(g) => g.clone(),
                None => GridSpec::covering(a, b, spec.bins)?,
            };
            tv_histogram(a, b, &grid)
        }
    }
}
