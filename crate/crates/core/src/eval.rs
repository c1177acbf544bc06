//! The multi-phase evaluation behind `annotate evaluate`: accuracy and
//! annotation time for every (descriptor, classifier) pair.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::train_on_rows;
use crate::classifiers::{C45Params, ClassifierKind};
use crate::corpus::{assign_splits, scan_corpus, SkippedFile, SplitRole, SplitSpec};
use crate::descriptors::{extract, DescriptorKind, EhdParams};
use crate::error::{Error, Result};
use crate::raster::decode_file;

/// A first-class assignment rate at or above this marks a collapsed model.
pub const COLLAPSE_RATE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub descriptors: Vec<DescriptorKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub phases: usize,
    pub seed: u64,
    pub split: SplitSpec,
    pub extraction: EhdParams,
    pub tree: C45Params,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            descriptors: vec![DescriptorKind::Ehd, DescriptorKind::Scd, DescriptorKind::CldRaw],
            classifiers: vec![ClassifierKind::Nb, ClassifierKind::C45],
            phases: 10,
            seed: 0,
            split: SplitSpec::Fraction(0.9),
            extraction: EhdParams::default(),
            tree: C45Params::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub corpus: String,
    #[serde(flatten)]
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairReport {
    pub descriptor: String,
    pub classifier: String,
    pub accuracy_per_phase: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub correct_per_phase: Vec<usize>,
    pub test_items_per_phase: Vec<usize>,
    /// Prediction only, whole test set, single-threaded.
    pub predict_seconds_per_phase: Vec<f64>,
    /// Prediction plus decoding and descriptor extraction of the test images.
    pub total_seconds_per_phase: Vec<f64>,
    /// Model construction (including PCA where used).
    pub train_seconds_per_phase: Vec<f64>,
    pub train_and_predict_seconds_per_phase: Vec<f64>,
    pub mean_predict_seconds: f64,
    pub std_predict_seconds: f64,
    pub mean_total_seconds: f64,
    pub std_total_seconds: f64,
    pub mean_train_seconds: f64,
    pub mean_train_and_predict_seconds: f64,
    pub first_class_fraction_per_phase: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub classes: Vec<String>,
    pub pairs: BTreeMap<String, PairReport>,
    pub skipped_files: Vec<SkippedFile>,
    pub phases_completed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

pub fn pair_key(descriptor: DescriptorKind, classifier: ClassifierKind) -> String {
    format!("{}/{}", descriptor.cli_name(), classifier.name())
}

/// Fraction of correctly annotated items.
pub fn accuracy(correct: usize, total: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    if correct > total {
        return Err(Error::InvalidArgument(format!("{correct} correct out of {total}")));
    }
    Ok(correct as f64 / total as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

struct Extracted {
    label: usize,
    /// Per selected descriptor: values and decode+extract seconds.
    features: Vec<(Vec<f64>, f64)>,
}

fn normalize_descriptors(kinds: &[DescriptorKind]) -> Result<Vec<DescriptorKind>> {
    let mut out = Vec::new();
    for &k in kinds {
        let k = match k {
            DescriptorKind::CldReduced => DescriptorKind::CldRaw,
            k => k,
        };
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no descriptors selected".into()));
    }
    Ok(out)
}

/// Runs the whole protocol on a corpus. Corpus-level problems are errors;
/// a failure inside a phase yields a partial report with `failure` set.
pub fn evaluate(root: &Path, config: &EvalConfig) -> Result<RunReport> {
    let descriptors = normalize_descriptors(&config.descriptors)?;
    let mut classifiers = config.classifiers.clone();
    classifiers.dedup();
    if classifiers.is_empty() {
        return Err(Error::InvalidArgument("no classifiers selected".into()));
    }
    if config.phases == 0 {
        return Err(Error::InvalidArgument("at least one phase is required".into()));
    }
    let index = scan_corpus(root)?;
    let mut skipped = index.skipped.clone();

    let extracted: Vec<Result<Extracted, SkippedFile>> = index
        .entries
        .par_iter()
        .map(|entry| {
            let fail = |e: Error| SkippedFile {
                path: entry.path.clone(),
                reason: e.to_string(),
            };
            let start = Instant::now();
            let img = decode_file(&index.full_path(entry)).map_err(fail)?;
            let decode_secs = start.elapsed().as_secs_f64();
            let features = descriptors
                .iter()
                .map(|&kind| {
                    let start = Instant::now();
                    let v = extract(&img, kind, &config.extraction)?.into_values();
                    Ok((v, decode_secs + start.elapsed().as_secs_f64()))
                })
                .collect::<Result<Vec<_>>>()
                .map_err(fail)?;
            Ok(Extracted {
                label: entry.label,
                features,
            })
        })
        .collect();
    let mut items = Vec::new();
    for r in extracted {
        match r {
            Ok(item) => items.push(item),
            Err(s) => skipped.push(s),
        }
    }
    skipped.sort_by(|a, b| a.path.cmp(&b.path));

    let mut report = RunReport {
        config: ConfigEcho {
            corpus: root.display().to_string(),
            eval: EvalConfig {
                descriptors: descriptors.clone(),
                classifiers: classifiers.clone(),
                ..config.clone()
            },
        },
        classes: index.classes.clone(),
        pairs: BTreeMap::new(),
        skipped_files: skipped,
        phases_completed: 0,
        failure: None,
    };
    for &d in &descriptors {
        for &c in &classifiers {
            report.pairs.insert(
                pair_key(d, c),
                PairReport {
                    descriptor: d.cli_name().to_string(),
                    classifier: c.name().to_string(),
                    ..PairReport::default()
                },
            );
        }
    }

    let labels: Vec<usize> = items.iter().map(|i| i.label).collect();
    let phases = match assign_splits(&labels, &index.classes, &config.split, config.phases, config.seed) {
        Ok(p) => p,
        Err(e) => {
            report.failure = Some(format!("split: {e}"));
            return Ok(report);
        }
    };

    for (p, roles) in phases.iter().enumerate() {
        if let Err(e) = run_phase(&mut report, &items, roles, &descriptors, &classifiers, config) {
            report.failure = Some(format!("phase {p}: {e}"));
            break;
        }
        report.phases_completed += 1;
    }
    finish(&mut report, &index.classes);
    Ok(report)
}

fn run_phase(
    report: &mut RunReport,
    items: &[Extracted],
    roles: &[SplitRole],
    descriptors: &[DescriptorKind],
    classifiers: &[ClassifierKind],
    config: &EvalConfig,
) -> Result<()> {
    let train: Vec<&Extracted> = items.iter().zip(roles).filter(|(_, &r)| r == SplitRole::Train).map(|(i, _)| i).collect();
    let test: Vec<&Extracted> = items.iter().zip(roles).filter(|(_, &r)| r == SplitRole::Test).map(|(i, _)| i).collect();
    if test.is_empty() {
        return Err(Error::InvalidArgument("split leaves no test images".into()));
    }
    let train_labels: Vec<usize> = train.iter().map(|i| i.label).collect();
    let class_names = &report.classes.clone();

    for (slot, &kind) in descriptors.iter().enumerate() {
        let rows: Vec<&[f64]> = train.iter().map(|i| i.features[slot].0.as_slice()).collect();
        let extract_secs: f64 = test.iter().map(|i| i.features[slot].1).sum();
        for &ck in classifiers {
            let start = Instant::now();
            let (pca, model) = train_on_rows(kind, &rows, &train_labels, class_names, ck, &config.tree)?;
            let train_secs = start.elapsed().as_secs_f64();

            let start = Instant::now();
            let mut predicted = Vec::with_capacity(test.len());
            for item in &test {
                let raw = item.features[slot].0.as_slice();
                let x = match &pca {
                    Some(pca) => pca.project(raw)?,
                    None => raw.to_vec(),
                };
                predicted.push(model.predict(&x)?.label);
            }
            let predict_secs = start.elapsed().as_secs_f64();

            let correct = test.iter().zip(&predicted).filter(|(i, &p)| i.label == p).count();
            let first = predicted.iter().filter(|&&p| p == 0).count();
            let pair = report
                .pairs
                .get_mut(&pair_key(kind, ck))
                .expect("pair slots are created up front");
            pair.accuracy_per_phase.push(accuracy(correct, test.len())?);
            pair.correct_per_phase.push(correct);
            pair.test_items_per_phase.push(test.len());
            pair.predict_seconds_per_phase.push(predict_secs);
            pair.total_seconds_per_phase.push(predict_secs + extract_secs);
            pair.train_seconds_per_phase.push(train_secs);
            pair.train_and_predict_seconds_per_phase.push(train_secs + predict_secs);
            pair.first_class_fraction_per_phase.push(first as f64 / test.len() as f64);
        }
    }
    Ok(())
}

fn finish(report: &mut RunReport, classes: &[String]) {
    let first_class = classes.first().map_or("?", String::as_str);
    for pair in report.pairs.values_mut() {
        pair.mean_accuracy = mean(&pair.accuracy_per_phase);
        pair.std_accuracy = sample_std(&pair.accuracy_per_phase);
        pair.mean_predict_seconds = mean(&pair.predict_seconds_per_phase);
        pair.std_predict_seconds = sample_std(&pair.predict_seconds_per_phase);
        pair.mean_total_seconds = mean(&pair.total_seconds_per_phase);
        pair.std_total_seconds = sample_std(&pair.total_seconds_per_phase);
        pair.mean_train_seconds = mean(&pair.train_seconds_per_phase);
        pair.mean_train_and_predict_seconds = mean(&pair.train_and_predict_seconds_per_phase);

        let rate = mean(&pair.first_class_fraction_per_phase);
        let collapsed = rate >= COLLAPSE_RATE;
        let scd_nb = pair.descriptor == "scd" && pair.classifier == "nb";
        if scd_nb || (collapsed && pair.classifier == "nb") {
            pair.diagnostic = Some(format!(
                "degeneracy check: {:.1}% of test images assigned to the first class ({first_class}){}",
                100.0 * rate,
                if collapsed { ", model collapsed" } else { ", no collapse" }
            ));
        }
    }
}

/// Text tables laid out like the accuracy and timing comparison: one row per
/// descriptor, one column group per classifier. Numbers come straight from
/// the report.
pub fn render_tables(report: &RunReport) -> String {
    let descriptors = &report.config.eval.descriptors;
    let classifiers = &report.config.eval.classifiers;
    let title = |c: &ClassifierKind| match c {
        ClassifierKind::Nb => "Naive Bayes",
        ClassifierKind::C45 => "Decision Tree",
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Accuracy (%), mean +/- std over {} phase(s)",
        report.phases_completed
    );
    let _ = write!(out, "{:<12}", "Descriptor");
    for c in classifiers {
        let _ = write!(out, "{:>22}", title(c));
    }
    out.push('\n');
    for &d in descriptors {
        let _ = write!(out, "{:<12}", d.cli_name().to_uppercase());
        for &c in classifiers {
            let cell = report.pairs.get(&pair_key(d, c)).map_or("-".to_string(), |p| {
                format!("{:.1} +/- {:.1}", 100.0 * p.mean_accuracy, 100.0 * p.std_accuracy)
            });
            let _ = write!(out, "{cell:>22}");
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\nAnnotation time (s) per test set, mean over phases");
    let _ = write!(out, "{:<12}", "Descriptor");
    for c in classifiers {
        for col in ["predict", "+train", "+extract"] {
            let _ = write!(out, "{:>14}", format!("{} {col}", c.name().to_uppercase()));
        }
    }
    out.push('\n');
    for &d in descriptors {
        let _ = write!(out, "{:<12}", d.cli_name().to_uppercase());
        for &c in classifiers {
            match report.pairs.get(&pair_key(d, c)) {
                Some(p) => {
                    for v in [p.mean_predict_seconds, p.mean_train_and_predict_seconds, p.mean_total_seconds] {
                        let _ = write!(out, "{v:>14.6}");
                    }
                }
                None => {
                    let _ = write!(out, "{:>14}{:>14}{:>14}", "-", "-", "-");
                }
            }
        }
        out.push('\n');
    }

    let notes: Vec<String> = report
        .pairs
        .iter()
        .filter_map(|(k, p)| p.diagnostic.as_ref().map(|d| format!("{k}: {d}")))
        .collect();
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            let _ = writeln!(out, "{n}");
        }
    }
    if !report.skipped_files.is_empty() {
        let _ = writeln!(out, "\n{} file(s) skipped", report.skipped_files.len());
    }
    if let Some(f) = &report.failure {
        let _ = writeln!(out, "\nFAILED: {f}");
    }
    out
}
