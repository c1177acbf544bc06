//! Trained model bundles: the classifier together with everything needed to
//! turn a query image into its input vector.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{C45Params, Classifier, ClassifierKind, LabeledDataset, Prediction};
use crate::corpus::{assign_splits, CorpusIndex, FeatureRow, FeatureTable, SkippedFile, SplitRole, SplitSpec};
use crate::descriptors::{extract, DescriptorKind, EhdParams};
use crate::error::{Error, Result};
use crate::raster::{decode_file, RasterImage};
use crate::reduction::{fit_pca, PcaModel};

/// Components kept when reducing raw color-layout vectors.
pub const CLD_COMPONENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub split: SplitSpec,
    pub phase: usize,
    pub seed: u64,
    pub train_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    /// Kind of the vectors the classifier consumes.
    pub descriptor: DescriptorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaModel>,
    pub classifier: Classifier,
    pub class_names: Vec<String>,
    pub extraction: EhdParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingInfo>,
}

impl ModelBundle {
    pub fn validate(&self) -> Result<()> {
        if self.class_names.is_empty() {
            return Err(Error::InvalidArgument("model bundle has no class names".into()));
        }
        if self.descriptor == DescriptorKind::CldReduced && self.pca.is_none() {
            return Err(Error::InvalidArgument(
                "CLD_REDUCED bundle is missing its PCA model".into(),
            ));
        }
        if let Some(pca) = &self.pca {
            if pca.input_dim() != DescriptorKind::CldRaw.dim() {
                return Err(Error::DimensionMismatch {
                    expected: DescriptorKind::CldRaw.dim(),
                    got: pca.input_dim(),
                });
            }
        }
        Ok(())
    }

    /// Descriptor that has to be extracted from an image for this bundle.
    pub fn source_kind(&self) -> DescriptorKind {
        match self.descriptor {
            DescriptorKind::CldReduced => DescriptorKind::CldRaw,
            k => k,
        }
    }

    /// Length of the vector the classifier reads.
    pub fn input_dim(&self) -> usize {
        self.pca.as_ref().map_or(self.descriptor.dim(), PcaModel::components)
    }

    /// Maps a raw descriptor vector (CLD_RAW for reduced bundles) to the
    /// classifier's input space.
    pub fn prepare(&self, raw: &[f64]) -> Result<Vec<f64>> {
        match &self.pca {
            Some(pca) => pca.project(raw),
            None if raw.len() == self.descriptor.dim() => Ok(raw.to_vec()),
            None => Err(Error::DimensionMismatch {
                expected: self.descriptor.dim(),
                got: raw.len(),
            }),
        }
    }

    pub fn predict_features(&self, raw: &[f64]) -> Result<Prediction> {
        self.classifier.predict(&self.prepare(raw)?)
    }

    pub fn predict_image(&self, img: &RasterImage) -> Result<Prediction> {
        let raw = extract(img, self.source_kind(), &self.extraction)?;
        self.predict_features(raw.values())
    }

    pub fn class_name(&self, label: usize) -> &str {
        self.class_names.get(label).map_or("?", String::as_str)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: ModelBundle = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

/// Trains on `rows` (raw descriptor vectors). Raw color-layout vectors are
/// first reduced by a PCA fitted on these rows only.
pub fn train_on_rows(
    kind: DescriptorKind,
    rows: &[&[f64]],
    labels: &[usize],
    class_names: &[String],
    classifier: ClassifierKind,
    tree: &C45Params,
) -> Result<(Option<PcaModel>, Classifier)> {
    if class_names.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "training needs at least 2 classes, got {}",
            class_names.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (pca, features) = if kind == DescriptorKind::CldRaw {
        let samples: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        let pca = fit_pca(&samples, CLD_COMPONENTS)?;
        let projected = samples.iter().map(|s| pca.project(s)).collect::<Result<Vec<_>>>()?;
        (Some(pca), projected)
    } else {
        (None, rows.iter().map(|r| r.to_vec()).collect())
    };
    let data = LabeledDataset::new(features, labels.to_vec(), class_names.to_vec())?;
    if let Some(c) = data.class_counts().iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(class_names[c].clone()));
    }
    Ok((pca, Classifier::fit(classifier, &data, tree)?))
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub classifier: ClassifierKind,
    pub split: SplitSpec,
    pub phase: usize,
    pub seed: u64,
    pub tree: C45Params,
    pub extraction: EhdParams,
}

/// Trains a bundle on the TRAIN rows of one phase of a feature table.
pub fn train_bundle(table: &FeatureTable, opts: &TrainOptions) -> Result<ModelBundle> {
    if table.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let class_names = table.class_names();
    let labels = table.labels();
    if class_names.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "training needs at least 2 classes, table has {}",
            class_names.len()
        )));
    }
    let phases = assign_splits(&labels, &class_names, &opts.split, opts.phase + 1, opts.seed)?;
    let roles = &phases[opts.phase];
    let (rows, train_labels): (Vec<&[f64]>, Vec<usize>) = table
        .rows
        .iter()
        .zip(roles)
        .filter(|(_, &r)| r == SplitRole::Train)
        .map(|(row, _)| (row.values.as_slice(), row.label))
        .unzip();
    let (pca, classifier) = train_on_rows(table.kind, &rows, &train_labels, &class_names, opts.classifier, &opts.tree)?;
    let descriptor = if pca.is_some() { DescriptorKind::CldReduced } else { table.kind };
    Ok(ModelBundle {
        descriptor,
        pca,
        classifier,
        class_names,
        extraction: opts.extraction.clone(),
        training: Some(TrainingInfo {
            split: opts.split.clone(),
            phase: opts.phase,
            seed: opts.seed,
            train_rows: rows.len(),
        }),
    })
}

/// Concatenates tables of one kind.
pub fn merge_tables(tables: Vec<FeatureTable>) -> Result<FeatureTable> {
    let mut iter = tables.into_iter();
    let mut merged = iter.next().ok_or(Error::EmptyDataset)?;
    for t in iter {
        if t.kind != merged.kind {
            return Err(Error::KindMismatch {
                expected: merged.kind,
                got: t.kind,
            });
        }
        merged.rows.extend(t.rows);
    }
    Ok(merged)
}

/// Extracts one descriptor for every corpus entry. Entries that fail to
/// decode or extract are returned as skipped files.
pub fn extract_table(index: &CorpusIndex, kind: DescriptorKind, params: &EhdParams) -> (FeatureTable, Vec<SkippedFile>) {
    let results: Vec<Result<Vec<f64>>> = index
        .entries
        .par_iter()
        .map(|entry| {
            let img = decode_file(&index.full_path(entry))?;
            Ok(extract(&img, kind, params)?.into_values())
        })
        .collect();
    let mut table = FeatureTable::new(kind);
    let mut skipped = Vec::new();
    for (entry, result) in index.entries.iter().zip(results) {
        match result {
            Ok(values) => table.rows.push(FeatureRow {
                path: entry.path.clone(),
                label: entry.label,
                values,
            }),
            Err(e) => skipped.push(SkippedFile {
                path: entry.path.clone(),
                reason: e.to_string(),
            }),
        }
    }
    (table, skipped)
}
