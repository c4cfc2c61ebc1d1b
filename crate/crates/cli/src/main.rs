use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use radaug::config::RunConfig;
use radaug::error::Error;
use radaug::manifest::Manifest;
use radaug::model::ModelFile;
use radaug::pipeline::{
    cmd_augment, cmd_featurize, read_results, results_to_csv, run_all, write_results, ResultRow,
};
use radaug::report::cmd_report;
use radaug::{feature_file, manifest::Split};
use radaug_core::metrics::ConfusionMatrix;
use radaug_core::trainer::{predict, train, FeatureVector};

#[derive(Parser)]
#[command(
    name = "radaug",
    version,
    about = "Contrast-enhanced augmentation and linear classification for chest radiographs",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON run configuration; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for augmentation and training
    #[arg(long)]
    seed: Option<u64>,
    /// Skip synthetic augmentation (originals pass through)
    #[arg(long)]
    no_augment: bool,
    /// Histogram clip limit as a fraction of tile area
    #[arg(long)]
    clip_limit: Option<f64>,
    /// Equalization tile grid: N for NxN or X,Y
    #[arg(long)]
    tiles: Option<String>,
    /// Per-class target count after balancing
    #[arg(long)]
    target_count: Option<usize>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if self.no_augment {
            cfg.augment_enabled = false;
        }
        if let Some(clip) = self.clip_limit {
            cfg.augment.clahe.clip_fraction = clip;
        }
        if let Some(tiles) = &self.tiles {
            let (x, y) = parse_tiles(tiles)?;
            cfg.augment.clahe.tiles_x = x;
            cfg.augment.clahe.tiles_y = y;
        }
        if let Some(target) = self.target_count {
            cfg.augment.target_count = Some(target);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_tiles(text: &str) -> Result<(u32, u32), Error> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| Error::Usage(format!("--tiles expects N or X,Y, got `{text}`")))
    };
    match text.split_once(',') {
        Some((x, y)) => Ok((parse_one(x)?, parse_one(y)?)),
        None => {
            let n = parse_one(text)?;
            Ok((n, n))
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureFormat {
    Csv,
    Fvec,
}

#[derive(Subcommand)]
enum Command {
    /// Balance the train split by writing augmented variants and an updated manifest
    Augment {
        /// Dataset manifest CSV (path,label,split)
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Extract feature tables from every manifest entry
    Featurize {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Feature table encoding
        #[arg(long, value_enum, default_value = "csv")]
        format: FeatureFormat,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Fit a classifier on a training feature table
    Train {
        /// Training feature table (CSV or FVEC)
        #[arg(long)]
        features: PathBuf,
        /// Where to write the model JSON
        #[arg(long)]
        model: PathBuf,
        /// Epoch budget
        #[arg(long, default_value_t = 25)]
        epochs: usize,
        #[command(flatten)]
        common: ConfigArgs,
    },
    /// Score a feature table with a trained model
    Evaluate {
        /// Evaluation feature table (CSV or FVEC)
        #[arg(long)]
        features: PathBuf,
        /// Model JSON produced by `train`
        #[arg(long)]
        model: PathBuf,
        /// Optional result CSV to write (one row)
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Render the summary table and metric charts from a result CSV
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: augment, featurize, sweep epochs, report
    RunAll {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Epoch budgets to sweep, e.g. 5,10,15,20,25
        #[arg(long, value_delimiter = ',')]
        epochs: Option<Vec<usize>>,
        #[command(flatten)]
        common: ConfigArgs,
    },
}

fn required_manifest(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.manifest.clone())
        .ok_or_else(|| Error::Usage("a manifest is required (--manifest or config)".into()))
}

fn required_out(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, Error> {
    flag.or_else(|| cfg.out.clone())
        .ok_or_else(|| Error::Usage("an output directory is required (--out or config)".into()))
}

fn print_result_row(row: &ResultRow) {
    let rate = |v: Option<f64>| match v {
        Some(v) => format!("{v:.4}"),
        None => "nan".into(),
    };
    println!(
        "epochs={} tp={} fn={} fp={} tn={} sensitivity={} specificity={} accuracy={} mcc={:.4}{}",
        row.epochs,
        row.true_positives,
        row.false_negatives,
        row.false_positives,
        row.true_negatives,
        rate(row.sensitivity),
        rate(row.specificity),
        rate(row.accuracy),
        row.mcc,
        if row.mcc_degenerate { " (degenerate)" } else { "" }
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Augment {
            manifest,
            out,
            common,
        } => {
            let cfg = common.build()?;
            let manifest_path = required_manifest(manifest, &cfg)?;
            let out_dir = required_out(out, &cfg)?;
            let (out_manifest, balanced) = cmd_augment(&manifest_path, &out_dir, &cfg)?;
            let (covid, normal) = balanced.class_counts(Split::Train);
            println!(
                "wrote {} (train: {covid} covid / {normal} normal)",
                out_manifest.display()
            );
        }
        Command::Featurize {
            manifest,
            out,
            format,
            common,
        } => {
            let cfg = common.build()?;
            let manifest_path = required_manifest(manifest, &cfg)?;
            let out_dir = required_out(out, &cfg)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let parsed = Manifest::load(&manifest_path)?;
            let (train_rows, test_rows) = cmd_featurize(&parsed, &manifest_path)?;
            let (write, ext): (fn(&Path, &[FeatureVector]) -> Result<(), Error>, &str) =
                match format {
                    FeatureFormat::Csv => (feature_file::write_csv, "csv"),
                    FeatureFormat::Fvec => (feature_file::write_fvec, "fvec"),
                };
            let train_path = out_dir.join(format!("features_train.{ext}"));
            let test_path = out_dir.join(format!("features_test.{ext}"));
            write(&train_path, &train_rows)?;
            write(&test_path, &test_rows)?;
            println!(
                "wrote {} ({} rows) and {} ({} rows)",
                train_path.display(),
                train_rows.len(),
                test_path.display(),
                test_rows.len()
            );
        }
        Command::Train {
            features,
            model,
            epochs,
            common,
        } => {
            let cfg = common.build()?;
            let rows = feature_file::read(&features)?;
            let train_cfg = cfg.train.to_core(epochs, cfg.seed);
            let (head, log) = train(&rows, &train_cfg)?;
            let file = ModelFile::from_head(&head, &train_cfg, &log);
            file.save(&model)?;
            let final_loss = log.last().map(|e| e.mean_loss).unwrap_or(f64::NAN);
            println!(
                "wrote {} (dim={}, epochs={epochs}, final mean loss {final_loss:.6})",
                model.display(),
                head.dim()
            );
        }
        Command::Evaluate {
            features,
            model,
            results,
        } => {
            let rows = feature_file::read(&features)?;
            let file = ModelFile::load(&model)?;
            let head = file.to_head()?;
            let mut predictions = Vec::with_capacity(rows.len());
            let mut truths = Vec::with_capacity(rows.len());
            for row in &rows {
                let (label, _) = predict(&head, row)?;
                predictions.push(label);
                truths.push(row.label);
            }
            let cm = ConfusionMatrix::from_predictions(&predictions, &truths)?;
            let row = ResultRow::from_confusion(file.train_settings.epochs, &cm);
            print_result_row(&row);
            if let Some(path) = results {
                write_results(&path, &[row])?;
                println!("wrote {}", path.display());
            }
        }
        Command::Report { results, out } => {
            let rows = read_results(&results)?;
            cmd_report(&rows, &out)?;
            println!("wrote report under {}", out.display());
        }
        Command::RunAll {
            manifest,
            out,
            epochs,
            common,
        } => {
            let mut cfg = common.build()?;
            if let Some(sweep) = epochs {
                cfg.epochs_sweep = sweep;
                cfg.validate()?;
            }
            let manifest_path = required_manifest(manifest, &cfg)?;
            let out_dir = required_out(out, &cfg)?;
            run_all(&cfg, &manifest_path, &out_dir)?;
            let rows = read_results(&out_dir.join("results.csv"))?;
            print!("{}", results_to_csv(&rows));
            println!("artifacts under {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code: u8 = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
