//! Gaussian naive Bayes and C4.5 decision trees over real-valued features.

mod c45;
mod nb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use c45::{
    entropy, fit_c45, gain, gain_ratio, root_split, split_info, tree_predict, C45Params, RootSplit,
    TreeNode, MIN_GAIN,
};
pub use nb::{fit_nb, posterior_from_log_scores, predict_from_log_scores, NbModel};

/// Row-major feature matrix with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                got: labels.len(),
            });
        }
        let d = features[0].len();
        if let Some(row) = features.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidArgument(format!(
                "label {l} out of range for {} classes",
                class_names.len()
            )));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite features".into()));
        }
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

/// A trained classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    NaiveBayes(NbModel),
    C45 { tree: TreeNode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    C45,
}

impl ClassifierKind {
    pub const fn name(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::C45 => "c45",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(ClassifierKind::Nb),
            "c45" => Ok(ClassifierKind::C45),
            other => Err(Error::InvalidArgument(format!("unknown classifier {other:?}"))),
        }
    }
}

/// A prediction with the classifier's confidence in [0, 1]: max posterior for
/// naive Bayes, leaf purity for the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub confidence: f64,
}

impl Classifier {
    pub fn fit(kind: ClassifierKind, data: &LabeledDataset, tree_params: &C45Params) -> Result<Self> {
        match kind {
            ClassifierKind::Nb => Ok(Classifier::NaiveBayes(fit_nb(data)?)),
            ClassifierKind::C45 => Ok(Classifier::C45 {
                tree: fit_c45(data, tree_params)?,
            }),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::NaiveBayes(_) => ClassifierKind::Nb,
            Classifier::C45 { .. } => ClassifierKind::C45,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Classifier::NaiveBayes(m) => {
                let post = m.posterior(x)?;
                let label = nb::argmax_first(&post);
                Ok(Prediction {
                    label,
                    confidence: post[label],
                })
            }
            Classifier::C45 { tree } => tree.predict_with_purity(x),
        }
    }
}
