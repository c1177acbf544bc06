//! Dataset-level PCA used to shrink raw color-layout vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training mean plus an orthonormal projection basis (one component per row,
/// eigenvalues non-increasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub requested_components: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn components(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .basis
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(b, (xi, mi))| b * (xi - mi))
                    .sum()
            })
            .collect())
    }

    pub fn reconstruct(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                got: y.len(),
            });
        }
        let mut out = self.mean.clone();
        for (row, &coef) in self.basis.iter().zip(y) {
            for (o, b) in out.iter_mut().zip(row) {
                *o += coef * b;
            }
        }
        Ok(out)
    }
}

/// Fits PCA on `samples`, keeping the top `k` components. `k` is silently
/// lowered to `min(dim, n - 1)` when the data cannot support it; the model
/// records the request and a warning.
pub fn fit_pca(samples: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!("PCA needs at least 2 samples, got {n}")));
    }
    let dim = samples[0].len();
    if dim == 0 {
        return Err(Error::DegenerateInput("PCA samples are empty vectors".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DegenerateInput(format!(
            "PCA samples have mismatched lengths {dim} and {}",
            bad.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("PCA needs at least one component".into()));
    }
    let feasible = dim.min(n - 1);
    let kept = k.min(feasible);
    let warning = (kept < k).then(|| {
        format!("requested {k} components but {n} samples of dimension {dim} support only {kept}")
    });

    let mut mean = vec![0.0; dim];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |i, j| samples[i][j] - mean[j]);
    let mut cov = centered.transpose() * &centered;
    cov /= (n - 1) as f64;
    // enforce exact symmetry before the symmetric solver
    let cov = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)]));

    let eig = SymmetricEigen::new(cov);
    let mut components: Vec<(f64, usize, Vec<f64>)> = (0..dim)
        .map(|c| {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lead = largest_magnitude_index(&v);
            if v[lead] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[c], lead, v)
        })
        .collect();
    components.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let (eigenvalues, basis) = components
        .into_iter()
        .take(kept)
        .map(|(lambda, _, v)| (if lambda < 0.0 { 0.0 } else { lambda }, v))
        .unzip();
    Ok(PcaModel {
        mean,
        basis,
        eigenvalues,
        requested_components: k,
        warning,
    })
}

fn largest_magnitude_index(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}
