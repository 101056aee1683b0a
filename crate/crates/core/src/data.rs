//! Labeled samples, pools and their CSV form.
//!
//! A pool stores points of a fixed dimension inside the ball of radius
//! `domain_bound` (M_X). Labels are optional per point: queried points carry a
//! label, the rest are unlabeled. The CSV layout is `x1,...,xn,y` with an empty
//! `y` cell for unlabeled rows.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative slack accepted on the domain and label bounds (rounding after clipping).
const BOUND_SLACK: f64 = 1e-12;

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|a| a.abs()).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Radially shrink `x` onto the ball of radius `radius` if it lies outside.
pub fn clip_to_ball(x: &mut [f64], radius: f64) {
    let n = norm2(x);
    if n > radius && n > 0.0 {
        let s = radius / n;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// A single observation `z = (x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    dim: usize,
    points: Vec<Vec<f64>>,
    labels: Vec<Option<f64>>,
    domain_bound: f64,
    label_bound: f64,
}

impl Pool {
    pub fn new(dim: usize, domain_bound: f64, label_bound: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("pool dimension must be positive");
        }
        if !(domain_bound >= 0.0 && label_bound >= 0.0) {
            return invalid("domain and label bounds must be nonnegative");
        }
        Ok(Self {
            dim,
            points: Vec::new(),
            labels: Vec::new(),
            domain_bound,
            label_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// M_X.
    pub fn domain_bound(&self) -> f64 {
        self.domain_bound
    }

    /// M_Y.
    pub fn label_bound(&self) -> f64 {
        self.label_bound
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn label(&self, i: usize) -> Option<f64> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<f64>] {
        &self.labels
    }

    /// Appends a point, rejecting wrong dimensions and anything outside the bounds.
    pub fn push(&mut self, x: Vec<f64>, y: Option<f64>) -> Result<()> {
        self.check_point(&x)?;
        if let Some(y) = y {
            self.check_label(y)?;
        }
        self.points.push(x);
        self.labels.push(y);
        Ok(())
    }

    pub fn set_label(&mut self, i: usize, y: f64) -> Result<()> {
        if i >= self.len() {
            return invalid(format!("index {i} out of range for pool of {}", self.len()));
        }
        self.check_label(y)?;
        self.labels[i] = Some(y);
        Ok(())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite coordinate");
        }
        let n = norm2(x);
        if n > self.domain_bound * (1.0 + BOUND_SLACK) {
            return Err(Error::OutOfDomain {
                norm: n,
                bound: self.domain_bound,
            });
        }
        Ok(())
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if !y.is_finite() || y.abs() > self.label_bound * (1.0 + BOUND_SLACK) {
            return Err(Error::InadmissibleLabel {
                label: y,
                reason: format!("outside [-{0}, {0}]", self.label_bound),
            });
        }
        Ok(())
    }

    pub fn labeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i].is_none()).collect()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    /// Iterates over the labeled points as `(x, y)`.
    pub fn labeled(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .iter()
            .zip(&self.labels)
            .filter_map(|(x, y)| y.map(|y| (x.as_slice(), y)))
    }

    pub fn samples(&self) -> Vec<LabeledSample> {
        self.labeled()
            .map(|(x, y)| LabeledSample { x: x.to_vec(), y })
            .collect()
    }

    /// The labeled part as a new pool with the same bounds.
    pub fn labeled_subset(&self) -> Pool {
        let mut out = Pool {
            dim: self.dim,
            points: Vec::new(),
            labels: Vec::new(),
            domain_bound: self.domain_bound,
            label_bound: self.label_bound,
        };
        for (x, y) in self.labeled() {
            out.points.push(x.to_vec());
            out.labels.push(Some(y));
        }
        out
    }

    /// Points at `indices`, as a new pool.
    pub fn subset(&self, indices: &[usize]) -> Pool {
        Pool {
            dim: self.dim,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            domain_bound: self.domain_bound,
            label_bound: self.label_bound,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        header.push("y".into());
        w.write_record(&header)?;
        for (x, y) in self.points.iter().zip(&self.labels) {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            row.push(y.map(|v| v.to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a pool; bounds default to the tightest values covering the data.
    pub fn read_csv<R: Read>(
        reader: R,
        domain_bound: Option<f64>,
        label_bound: Option<f64>,
    ) -> Result<Pool> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.len() < 2 || header.get(header.len() - 1) != Some("y") {
            return invalid("CSV header must be x1,...,xn,y");
        }
        let dim = header.len() - 1;
        for (i, name) in header.iter().take(dim).enumerate() {
            if name != format!("x{}", i + 1) {
                return invalid(format!("unexpected column `{name}`"));
            }
        }
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad number `{s}`: {e}")))
            };
            let x = rec
                .iter()
                .take(dim)
                .map(parse)
                .collect::<Result<Vec<f64>>>()?;
            let cell = rec.get(dim).unwrap_or("").trim();
            let y = if cell.is_empty() { None } else { Some(parse(cell)?) };
            points.push(x);
            labels.push(y);
        }
        let mx = domain_bound.unwrap_or_else(|| points.iter().map(|p| norm2(p)).fold(0.0, f64::max));
        let my = label_bound
            .unwrap_or_else(|| labels.iter().flatten().map(|y| y.abs()).fold(0.0, f64::max));
        let mut pool = Pool::new(dim, mx, my)?;
        for (x, y) in points.into_iter().zip(labels) {
            pool.push(x, y)?;
        }
        Ok(pool)
    }
}
