use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Per-class priors and independent normal likelihoods per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub variance_floor: f64,
}

pub fn fit_nb(data: &LabeledDataset) -> Result<NbModel> {
    let (m, d, n) = (data.classes(), data.dim(), data.len());
    let counts = data.class_counts();
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(data.class_names()[c].clone()));
    }

    let mut means = vec![vec![0.0; d]; m];
    for (x, &y) in data.features().iter().zip(data.labels()) {
        for (acc, v) in means[y].iter_mut().zip(x) {
            *acc += v;
        }
    }
    for (row, &c) in means.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|v| *v /= c as f64);
    }
    let mut variances = vec![vec![0.0; d]; m];
    for (x, &y) in data.features().iter().zip(data.labels()) {
        for ((acc, v), mu) in variances[y].iter_mut().zip(x).zip(&means[y]) {
            *acc += (v - mu) * (v - mu);
        }
    }
    for (row, &c) in variances.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|v| *v /= c as f64);
    }

    let max_global_var = (0..d)
        .map(|j| {
            let mean = data.features().iter().map(|x| x[j]).sum::<f64>() / n as f64;
            data.features().iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n as f64
        })
        .fold(0.0, f64::max);
    let variance_floor = if max_global_var > 0.0 { 1e-9 * max_global_var } else { 1e-9 };
    for v in variances.iter_mut().flatten() {
        *v = v.max(variance_floor);
    }

    Ok(NbModel {
        priors: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        means,
        variances,
        variance_floor,
    })
}

impl NbModel {
    pub fn classes(&self) -> usize {
        self.priors.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// log P(y) + sum_j log N(x_j; mu_yj, var_yj) for every class y.
    pub fn log_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self
            .priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&prior, (mu, var))| {
                let ll: f64 = x
                    .iter()
                    .zip(mu.iter().zip(var))
                    .map(|(xi, (m, v))| -0.5 * (2.0 * PI * v).ln() - (xi - m) * (xi - m) / (2.0 * v))
                    .sum();
                prior.ln() + ll
            })
            .collect())
    }

    pub fn posterior(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(posterior_from_log_scores(&self.log_scores(x)?))
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax_first(&self.posterior(x)?))
    }
}

/// Normalizes log scores with log-sum-exp.
pub fn posterior_from_log_scores(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // every class impossible or undefined: fall back to uniform
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn predict_from_log_scores(scores: &[f64]) -> usize {
    argmax_first(&posterior_from_log_scores(scores))
}

/// Index of the maximum; exact ties go to the smallest index.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
