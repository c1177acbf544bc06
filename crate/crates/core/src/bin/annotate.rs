use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpeg7_annotate::bundle::{extract_table, merge_tables, train_bundle, ModelBundle, TrainOptions};
use mpeg7_annotate::classifiers::{C45Params, ClassifierKind};
use mpeg7_annotate::corpus::{read_table, scan_corpus, write_table, SplitSpec};
use mpeg7_annotate::descriptors::{DescriptorKind, EhdParams};
use mpeg7_annotate::eval::{evaluate, render_tables, EvalConfig};
use mpeg7_annotate::raster::decode_file;
use mpeg7_annotate::Error;

#[derive(Parser)]
#[command(name = "annotate", version, about = "Image annotation with MPEG-7 descriptors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one descriptor for every image of a corpus into a CSV table.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = ["ehd", "scd", "cld"])]
        descriptor: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        edge: EdgeArgs,
    },
    /// Train a classifier on one phase's training rows.
    Train {
        #[arg(long, value_delimiter = ',', required = true)]
        table: Vec<PathBuf>,
        #[arg(long)]
        classifier: ClassifierKind,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 0)]
        phase: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        edge: EdgeArgs,
    },
    /// Annotate images or table rows with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, num_args = 1.., conflicts_with = "table", required_unless_present = "table")]
        image: Vec<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Run the multi-phase accuracy and timing comparison.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ehd,scd,cld")]
        descriptors: Vec<DescriptorKind>,
        #[arg(long, value_delimiter = ',', default_value = "nb,c45")]
        classifiers: Vec<ClassifierKind>,
        #[arg(long, default_value_t = 10)]
        phases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[command(flatten)]
        edge: EdgeArgs,
    },
}

#[derive(Args)]
struct EdgeArgs {
    /// Minimum edge strength for a block to count in the edge histogram.
    #[arg(long, default_value_t = 11.0)]
    edge_threshold: f64,
    /// Approximate number of edge blocks per image.
    #[arg(long, default_value_t = 1024)]
    blocks: usize,
}

impl EdgeArgs {
    fn params(&self) -> EhdParams {
        EhdParams {
            edge_threshold: self.edge_threshold,
            target_blocks: self.blocks,
            ..EhdParams::default()
        }
    }
}

#[derive(Args)]
#[group(multiple = false)]
struct SplitArgs {
    /// Training images per class, in class order.
    #[arg(long, value_delimiter = ',')]
    train_counts: Option<Vec<usize>>,
    /// Fraction of each class used for training (default 0.9).
    #[arg(long)]
    train_fraction: Option<f64>,
}

impl SplitArgs {
    fn spec(&self) -> SplitSpec {
        match (&self.train_counts, self.train_fraction) {
            (Some(c), _) => SplitSpec::Counts(c.clone()),
            (None, Some(f)) => SplitSpec::Fraction(f),
            (None, None) => SplitSpec::Fraction(0.9),
        }
    }
}

#[derive(Args)]
struct TreeArgs {
    #[arg(long, default_value_t = 2)]
    min_samples: usize,
    #[arg(long)]
    max_depth: Option<usize>,
}

impl TreeArgs {
    fn params(&self) -> C45Params {
        C45Params {
            min_samples: self.min_samples,
            max_depth: self.max_depth,
        }
    }
}

/// An error with the exit status it maps to.
struct Failure(u8, Error);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.exit_code() as u8, e)
    }
}

/// Problems reading the corpus itself are input errors, whatever their cause.
fn corpus_failure(e: Error) -> Failure {
    Failure(1, e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract {
            corpus,
            descriptor,
            out,
            edge,
        } => cmd_extract(&corpus, &descriptor, &out, &edge.params()),
        Command::Train {
            table,
            classifier,
            split,
            phase,
            seed,
            out,
            tree,
            edge,
        } => cmd_train(
            &table,
            &out,
            &TrainOptions {
                classifier,
                split: split.spec(),
                phase,
                seed,
                tree: tree.params(),
                extraction: edge.params(),
            },
        ),
        Command::Predict { model, image, table } => cmd_predict(&model, &image, table.as_deref()),
        Command::Evaluate {
            corpus,
            descriptors,
            classifiers,
            phases,
            seed,
            report,
            split,
            tree,
            edge,
        } => cmd_evaluate(
            &corpus,
            &report,
            &EvalConfig {
                descriptors,
                classifiers,
                phases,
                seed,
                split: split.spec(),
                extraction: edge.params(),
                tree: tree.params(),
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

fn cmd_extract(corpus: &Path, descriptor: &str, out: &Path, params: &EhdParams) -> Result<(), Failure> {
    let kind: DescriptorKind = descriptor.parse()?;
    let index = scan_corpus(corpus).map_err(corpus_failure)?;
    eprintln!(
        "extracting {kind} from {} images in {} classes",
        index.entries.len(),
        index.classes.len()
    );
    let (table, mut skipped) = extract_table(&index, kind, params);
    skipped.extend(index.skipped.iter().cloned());
    for s in &skipped {
        eprintln!("skipped {}: {}", s.path, s.reason);
    }
    if table.rows.is_empty() {
        return Err(Failure(1, Error::EmptyCorpus(corpus.to_path_buf())));
    }
    if let Err(e) = write_table(&table, out) {
        let _ = std::fs::remove_file(out);
        return Err(e.into());
    }
    eprintln!("wrote {} rows, skipped {}", table.rows.len(), skipped.len());
    Ok(())
}

fn cmd_train(tables: &[PathBuf], out: &Path, opts: &TrainOptions) -> Result<(), Failure> {
    let tables = tables.iter().map(|p| read_table(p)).collect::<Result<Vec<_>, _>>()?;
    let table = merge_tables(tables)?;
    let bundle = train_bundle(&table, opts)?;
    bundle.save(out)?;
    eprintln!(
        "trained {} on {} {} rows ({} classes)",
        opts.classifier.name(),
        bundle.training.as_ref().map_or(0, |t| t.train_rows),
        table.kind,
        bundle.class_names.len()
    );
    Ok(())
}

fn print_annotation(name: &str, bundle: &ModelBundle, label: usize, confidence: f64) {
    let pct = 100.0 * confidence;
    println!("{name}\t{}\t{pct:.2}%\t{:.2}%", bundle.class_name(label), 100.0 - pct);
}

fn cmd_predict(model: &Path, images: &[PathBuf], table: Option<&Path>) -> Result<(), Failure> {
    let bundle = ModelBundle::load(model)?;
    let mut annotated = 0usize;
    if let Some(path) = table {
        let table = read_table(path)?;
        if table.kind != bundle.source_kind() && table.kind != bundle.descriptor {
            return Err(Error::KindMismatch {
                expected: bundle.source_kind(),
                got: table.kind,
            }
            .into());
        }
        let mut correct = 0usize;
        for row in &table.rows {
            let prediction = if table.kind == bundle.descriptor {
                bundle.classifier.predict(&row.values)
            } else {
                bundle.predict_features(&row.values)
            };
            match prediction {
                Ok(p) => {
                    print_annotation(&row.path, &bundle, p.label, p.confidence);
                    annotated += 1;
                    correct += usize::from(p.label == row.label);
                }
                Err(e) => eprintln!("skipped {}: {e}", row.path),
            }
        }
        if annotated > 0 {
            eprintln!(
                "accuracy {correct}/{annotated} = {:.4}",
                correct as f64 / annotated as f64
            );
        }
    } else {
        for path in images {
            match decode_file(path).and_then(|img| bundle.predict_image(&img)) {
                Ok(p) => {
                    print_annotation(&path.display().to_string(), &bundle, p.label, p.confidence);
                    annotated += 1;
                }
                Err(e) => eprintln!("skipped {}: {e}", path.display()),
            }
        }
    }
    if annotated == 0 {
        return Err(Failure(1, Error::InvalidArgument("no input could be annotated".into())));
    }
    Ok(())
}

fn cmd_evaluate(corpus: &Path, report_path: &Path, config: &EvalConfig) -> Result<(), Failure> {
    let report = evaluate(corpus, config).map_err(|e| match e {
        Error::InvalidArgument(_) => Failure::from(e),
        e => corpus_failure(e),
    })?;
    let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    std::fs::write(report_path, text + "\n")
        .map_err(|e| Failure(2, Error::Io {
            context: format!("writing {}", report_path.display()),
            source: e,
        }))?;
    print!("{}", render_tables(&report));
    match report.failure {
        Some(f) => Err(Failure(1, Error::InvalidArgument(f))),
        None => Ok(()),
    }
}
