//! Directory-per-class corpora, seeded train/test splits and the CSV feature
//! tables extracted descriptors are stored in.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descriptors::DescriptorKind;
use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// Path relative to the corpus root, `/`-separated.
    pub path: String,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SplitRole {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSpec {
    /// Fraction of each class used for training, rounded to the nearest count.
    Fraction(f64),
    /// Exact training count per class, in class order.
    Counts(Vec<usize>),
}

impl SplitSpec {
    fn train_count(&self, class: usize, available: usize, name: &str) -> Result<usize> {
        match self {
            SplitSpec::Fraction(f) => {
                if !(*f > 0.0 && *f < 1.0) {
                    return Err(Error::InvalidArgument(format!("train fraction {f} is not in (0, 1)")));
                }
                Ok(((f * available as f64).round() as usize).clamp(1.min(available), available))
            }
            SplitSpec::Counts(counts) => {
                let requested = counts[class];
                if requested > available {
                    return Err(Error::SplitTooLarge {
                        class: name.to_string(),
                        requested,
                        available,
                    });
                }
                Ok(requested)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusIndex {
    pub root: PathBuf,
    pub classes: Vec<String>,
    pub entries: Vec<CorpusEntry>,
    pub skipped: Vec<SkippedFile>,
    /// `phases[p][i]` is the role of `entries[i]` in phase `p`.
    pub phases: Vec<Vec<SplitRole>>,
}

impl CorpusIndex {
    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn full_path(&self, entry: &CorpusEntry) -> PathBuf {
        self.root.join(entry.path.split('/').collect::<PathBuf>())
    }
}

fn is_image_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Lists `root/<class>/<image>` files. Classes are the subdirectories that
/// hold at least one image, in lexicographic order; entries are sorted by
/// (class, file name). Files whose header cannot be read are skipped and
/// reported rather than failing the scan.
pub fn scan_corpus(root: &Path) -> Result<CorpusIndex> {
    let read_dir = |dir: &Path| fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e));
    let mut class_dirs = Vec::new();
    for entry in read_dir(root)? {
        let entry = entry.map_err(|e| Error::io(format!("reading {}", root.display()), e))?;
        if entry.path().is_dir() {
            if let Some(name) = entry.file_name().to_str() {
                class_dirs.push(name.to_string());
            }
        }
    }
    class_dirs.sort();

    let mut classes = Vec::new();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for name in class_dirs {
        let mut files = Vec::new();
        for entry in read_dir(&root.join(&name))? {
            let entry = entry.map_err(|e| Error::io(format!("reading {name}"), e))?;
            let path = entry.path();
            let Some(file_name) = entry.file_name().to_str().map(str::to_string) else {
                continue;
            };
            if !path.is_file() {
                continue;
            }
            let rel = format!("{name}/{file_name}");
            if !is_image_path(&path) {
                skipped.push(SkippedFile {
                    path: rel,
                    reason: "not a PNG or JPEG file".into(),
                });
                continue;
            }
            match image::ImageReader::open(&path).and_then(|r| r.with_guessed_format()) {
                Ok(reader) => match reader.into_dimensions() {
                    Ok(_) => files.push(file_name),
                    Err(e) => skipped.push(SkippedFile {
                        path: rel,
                        reason: e.to_string(),
                    }),
                },
                Err(e) => skipped.push(SkippedFile {
                    path: rel,
                    reason: e.to_string(),
                }),
            }
        }
        if files.is_empty() {
            continue;
        }
        files.sort();
        let label = classes.len();
        entries.extend(files.into_iter().map(|f| CorpusEntry {
            path: format!("{name}/{f}"),
            label,
        }));
        classes.push(name);
    }
    skipped.sort_by(|a, b| a.path.cmp(&b.path));

    if entries.is_empty() {
        return Err(Error::EmptyCorpus(root.to_path_buf()));
    }
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    Ok(CorpusIndex {
        root: root.to_path_buf(),
        classes,
        entries,
        skipped,
        phases: Vec::new(),
    })
}

fn phase_rng(seed: u64, phase: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(phase as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Train/test roles for every row in each of `phases` phases. Within a phase
/// each class's rows are shuffled by a generator keyed on `(seed, phase)`
/// and the first train-count rows become training rows.
pub fn assign_splits(
    labels: &[usize],
    class_names: &[String],
    spec: &SplitSpec,
    phases: usize,
    seed: u64,
) -> Result<Vec<Vec<SplitRole>>> {
    let m = class_names.len();
    if let SplitSpec::Counts(c) = spec {
        if c.len() != m {
            return Err(Error::InvalidArgument(format!(
                "{} train counts given for {m} classes",
                c.len()
            )));
        }
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, &l) in labels.iter().enumerate() {
        if l >= m {
            return Err(Error::InvalidArgument(format!("label {l} out of range for {m} classes")));
        }
        by_class[l].push(i);
    }
    let train_counts = by_class
        .iter()
        .enumerate()
        .map(|(c, rows)| spec.train_count(c, rows.len(), &class_names[c]))
        .collect::<Result<Vec<_>>>()?;

    Ok((0..phases)
        .map(|p| {
            let mut rng = phase_rng(seed, p);
            let mut roles = vec![SplitRole::Test; labels.len()];
            for (rows, &k) in by_class.iter().zip(&train_counts) {
                let mut shuffled = rows.clone();
                shuffled.shuffle(&mut rng);
                for &i in &shuffled[..k] {
                    roles[i] = SplitRole::Train;
                }
            }
            roles
        })
        .collect())
}

pub fn make_splits(index: &CorpusIndex, spec: &SplitSpec, phases: usize, seed: u64) -> Result<CorpusIndex> {
    let phases = assign_splits(&index.labels(), &index.classes, spec, phases, seed)?;
    Ok(CorpusIndex {
        phases,
        ..index.clone()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub path: String,
    pub label: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub kind: DescriptorKind,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(kind: DescriptorKind) -> Self {
        Self { kind, rows: Vec::new() }
    }

    pub fn push(&mut self, row: FeatureRow) -> Result<()> {
        if row.values.len() != self.kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kind.dim(),
                got: row.values.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Class names recovered from the first path component of each label's
    /// rows (the corpus class directory), `class<i>` when that is ambiguous.
    pub fn class_names(&self) -> Vec<String> {
        let m = self.rows.iter().map(|r| r.label + 1).max().unwrap_or(0);
        (0..m)
            .map(|c| {
                let mut dirs = self
                    .rows
                    .iter()
                    .filter(|r| r.label == c)
                    .filter_map(|r| r.path.split_once('/').map(|(d, _)| d));
                match dirs.next() {
                    Some(first) if dirs.all(|d| d == first) => first.to_string(),
                    _ => format!("class{c}"),
                }
            })
            .collect()
    }
}

/// Writes `#kind=<KIND>,dim=<d>`, then a `path,label,f0..` header, then one
/// row per sample. Floats use the shortest representation that parses back
/// to the same value.
pub fn write_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let io_err = |e: std::io::Error| Error::io(format!("writing {}", path.display()), e);
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let dim = table.kind.dim();
    writeln!(out, "#kind={},dim={dim}", table.kind.tag()).map_err(io_err)?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["path".to_string(), "label".to_string()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    let csv_err = |e: csv::Error| Error::io(format!("writing {}", path.display()), e.into());
    writer.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        if row.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.values.len(),
            });
        }
        let mut record = Vec::with_capacity(dim + 2);
        record.push(row.path.clone());
        record.push(row.label.to_string());
        record.extend(row.values.iter().map(|v| format!("{v:?}")));
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<FeatureTable> {
    let name = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(format!("reading {name}"), e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::io(format!("reading {name}"), e))?;
    let kind = parse_kind_line(first.trim_end_matches(['\n', '\r']))
        .ok_or_else(|| Error::format(&name, format!("bad kind line {:?}", first.trim_end())))?;
    let dim = kind.dim();

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::format(&name, e.to_string()))?
        .clone();
    let expected: Vec<String> = ["path".to_string(), "label".to_string()]
        .into_iter()
        .chain((0..dim).map(|i| format!("f{i}")))
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::format(&name, format!("header does not match {} columns", dim + 2)));
    }

    let mut table = FeatureTable::new(kind);
    for (line, record) in csv.records().enumerate() {
        let line = line + 3;
        let record = record.map_err(|e| Error::format(&name, format!("line {line}: {e}")))?;
        if record.len() != dim + 2 {
            return Err(Error::format(
                &name,
                format!("line {line}: expected {} columns, got {}", dim + 2, record.len()),
            ));
        }
        let label = record[1]
            .parse::<usize>()
            .map_err(|_| Error::format(&name, format!("line {line}: bad label {:?}", &record[1])))?;
        let values = record
            .iter()
            .skip(2)
            .map(|cell| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::format(&name, format!("line {line}: bad value {cell:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(FeatureRow {
            path: record[0].to_string(),
            label,
            values,
        });
    }
    Ok(table)
}

fn parse_kind_line(line: &str) -> Option<DescriptorKind> {
    let rest = line.strip_prefix("#kind=")?;
    let (kind, dim) = rest.split_once(",dim=")?;
    let kind = match kind {
        "EHD" => DescriptorKind::Ehd,
        "SCD" => DescriptorKind::Scd,
        "CLD_RAW" => DescriptorKind::CldRaw,
        "CLD_REDUCED" => DescriptorKind::CldReduced,
        _ => return None,
    };
    (dim.parse::<usize>().ok()? == kind.dim()).then_some(kind)
}
