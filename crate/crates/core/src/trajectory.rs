//! Time-ordered sequences of fields.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::spectral::TensorField;

/// Per-step bookkeeping emitted by the solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub omega: f64,
    pub lp_norm: Option<f64>,
    pub energy: f64,
    pub dissipation: f64,
    pub divergence: f64,
    pub spectral_radius: f64,
    pub sweeps: usize,
    pub halvings: usize,
    pub converged: bool,
}

/// Samples `(t_i, u(t_i))` with strictly increasing times on one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Arc<Grid>,
    times: Vec<f64>,
    fields: Vec<SpectralField>,
    steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn new(t0: f64, u0: SpectralField) -> Trajectory {
        Trajectory {
            grid: u0.grid().clone(),
            times: vec![t0],
            fields: vec![u0],
            steps: Vec::new(),
        }
    }

    pub fn from_samples(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Trajectory> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidTime("trajectory needs matching, non-empty times and fields".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTime("trajectory times must increase strictly".into()));
        }
        let grid = fields[0].grid().clone();
        for f in &fields {
            grid.same_as(f.grid())?;
        }
        Ok(Trajectory {
            grid,
            times,
            fields,
            steps: Vec::new(),
        })
    }

    pub fn push(&mut self, t: f64, field: SpectralField) -> Result<()> {
        self.grid.same_as(field.grid())?;
        let last = *self.times.last().expect("non-empty");
        if !(t > last) {
            return Err(Error::InvalidTime(format!("time {t} does not follow {last}")));
        }
        self.times.push(t);
        self.fields.push(field);
        Ok(())
    }

    pub fn record(&mut self, step: StepRecord) {
        self.steps.push(step);
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn last(&self) -> &SpectralField {
        self.fields.last().expect("non-empty")
    }

    /// Keeps every `stride`-th sample plus the final one.
    pub fn thinned(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let n = self.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % stride == 0 || *i == n - 1).collect();
        Trajectory {
            grid: self.grid.clone(),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            fields: keep.iter().map(|&i| self.fields[i].clone()).collect(),
            steps: self.steps.clone(),
        }
    }

    /// Linear interpolation in time between stored samples.
    pub fn at(&self, t: f64) -> Result<SpectralField> {
        let (i, theta) = locate(&self.times, t)?;
        if theta == 0.0 {
            return Ok(self.fields[i].clone());
        }
        let mut out = self.fields[i].scaled(1.0 - theta);
        out.axpy(theta, &self.fields[i + 1])?;
        Ok(out)
    }
}

/// Time-ordered matrix fields, used as forcing in the perturbed problem.
#[derive(Debug, Clone)]
pub struct TensorTrajectory {
    times: Vec<f64>,
    fields: Vec<TensorField>,
}

impl TensorTrajectory {
    pub fn from_samples(times: Vec<f64>, fields: Vec<TensorField>) -> Result<TensorTrajectory> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::InvalidTime("forcing needs matching, non-empty times and fields".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTime("forcing times must increase strictly".into()));
        }
        Ok(TensorTrajectory { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[TensorField] {
        &self.fields
    }

    pub fn at(&self, t: f64) -> Result<TensorField> {
        let (i, theta) = locate(&self.times, t)?;
        let mut out = self.fields[i].clone();
        if theta > 0.0 {
            out.scale(1.0 - theta);
            out.axpy(theta, &self.fields[i + 1])?;
        }
        Ok(out)
    }
}

fn locate(times: &[f64], t: f64) -> Result<(usize, f64)> {
    let first = times[0];
    let last = *times.last().expect("non-empty");
    let slack = 1e-12 * (1.0 + last.abs());
    if !(t >= first - slack && t <= last + slack) {
        return Err(Error::InvalidTime(format!("time {t} outside [{first}, {last}]")));
    }
    if times.len() == 1 || t >= last {
        return Ok((times.len() - 1, 0.0));
    }
    if t <= first {
        return Ok((0, 0.0));
    }
    let i = times.partition_point(|&s| s <= t) - 1;
    let theta = (t - times[i]) / (times[i + 1] - times[i]);
    Ok((i, theta))
}
