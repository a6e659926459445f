//! Command-line front end for the knowledge-discovery pipeline.
//!
//! Exit codes: 0 success, 2 validation error, 3 no feature passed the
//! selection thresholds, 4 I/O error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ucog::baselines::SomEncoding;
use ucog::dataset::{synthesize, SynthSpec};
use ucog::pipeline::{
    experiment_baseline_comparison, experiment_pattern_validity, run_pipeline, BaselineSpec,
    PipelineConfig, PipelineStatus,
};
use ucog::selection::select_features_ensemble;
use ucog::{
    patterns, stats, Dataset, Error, FeatureSet, Metric, Result, SelectionThresholds, TargetKind,
    UcConfig, UcModel, SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(name = "ucog", version, about = "Knowledge discovery over Unsupervised Cognition models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Numeric,
    Categorical,
}

impl From<KindArg> for TargetKind {
    fn from(k: KindArg) -> TargetKind {
        match k {
            KindArg::Numeric => TargetKind::Numeric,
            KindArg::Categorical => TargetKind::Categorical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cosine,
    Euclidean,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Cosine => Metric::Cosine,
            MetricArg::Euclidean => Metric::InverseEuclidean,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct DataArgs {
    /// Input dataset (CSV with a header row)
    #[arg(long)]
    input: PathBuf,
    /// Name of the target column
    #[arg(long)]
    target: String,
    /// Whether the target holds numbers or class labels
    #[arg(long, value_enum)]
    target_kind: KindArg,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        Dataset::from_csv(&self.input, &self.target, self.target_kind.into())
    }
}

#[derive(Args)]
struct UcArgs {
    /// Similarity measure
    #[arg(long, value_enum, default_value = "cosine")]
    metric: MetricArg,
    /// Depth-0 merge threshold
    #[arg(long, default_value_t = 0.9)]
    theta0: f64,
    /// Per-depth threshold tightening factor
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Exact-duplicate tolerance
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Maximum representation depth
    #[arg(long)]
    max_depth: Option<u32>,
}

impl UcArgs {
    fn config(&self) -> UcConfig {
        UcConfig {
            metric: self.metric.into(),
            theta0: self.theta0,
            gamma: self.gamma,
            epsilon_identity: self.epsilon,
            max_depth: self.max_depth,
            audit: false,
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    /// Minimum absolute correlation (must exceed 0.5)
    #[arg(long, default_value_t = 0.6)]
    r_min: f64,
    /// Maximum p-value
    #[arg(long, default_value_t = 0.01)]
    p_max: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<SelectionThresholds> {
        SelectionThresholds::new(self.r_min, self.p_max)
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Test dataset; omitted, the input is split by --split-fraction
    #[arg(long)]
    test: Option<PathBuf>,
    #[command(flatten)]
    uc: UcArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Ensemble size (input orders trained for selection)
    #[arg(long, default_value_t = 100)]
    models: usize,
    /// Minimum ensemble confidence for a feature to survive
    #[arg(long, default_value_t = 1.0)]
    confidence_min: f64,
    /// Retrainings used to average accuracies
    #[arg(long, default_value_t = 100)]
    repeats: usize,
    /// Base seed; member i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train fraction for the automatic split when --test is absent
    #[arg(long, default_value_t = 0.8)]
    split_fraction: f64,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            uc: self.uc.config(),
            thresholds: self.thresholds.thresholds()?,
            ensemble_size: self.models,
            confidence_min: self.confidence_min,
            base_seed: self.seed,
            eval_repeats: self.repeats,
            split_fraction: self.split_fraction,
        })
    }

    fn load_pair(&self) -> Result<(Dataset, Dataset)> {
        let data = self.data.load()?;
        match &self.test {
            Some(path) => {
                let test = Dataset::from_csv(path, &self.data.target, self.data.target_kind.into())?;
                Ok((data, test))
            }
            None => data.split(self.split_fraction, self.seed),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with planted informative features
    Synth {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        informative: usize,
        #[arg(long, default_value_t = 95)]
        noise: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = 4.0)]
        separation: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the planted feature indices as JSON
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Stratified train/test split
    Split {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_train: PathBuf,
        #[arg(long)]
        out_test: PathBuf,
    },
    /// Train a model on the dataset in file order
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        uc: UcArgs,
        /// Where to write the model JSON (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classification accuracy of a saved model over a dataset
    Eval {
        /// Model JSON produced by `train`
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract patterns from a saved model
    Mine {
        #[arg(long)]
        model: PathBuf,
        /// Keep only the most generic single-class representations
        #[arg(long)]
        class_constrained: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlate a saved model's patterns with its target
    Correlate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ensemble feature selection over many input orders
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        uc: UcArgs,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        /// Ensemble size
        #[arg(long, default_value_t = 100)]
        models: usize,
        /// Minimum ensemble confidence for a feature to survive
        #[arg(long, default_value_t = 1.0)]
        confidence_min: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop every feature not listed in a feature-set JSON
    Reduce {
        #[command(flatten)]
        data: DataArgs,
        /// Feature indices to keep (JSON array, as written by `select`)
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full knowledge-discovery pipeline
    Pipeline {
        #[command(flatten)]
        args: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluation experiments
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Pattern validity: per-order reduction, before/after accuracy
    Patterns {
        #[command(flatten)]
        args: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare reduction methods by downstream accuracy
    Baselines {
        #[command(flatten)]
        args: PipelineArgs,
        /// Comma-separated methods: proposal, pca:<dims>, som:2 (BMU
        /// coordinates), som:<n*n> (unit distances on an n-by-n grid)
        #[arg(long, default_value = "proposal,pca:2,som:2")]
        methods: String,
        /// Grid side for som:2
        #[arg(long, default_value_t = 8)]
        som_grid: usize,
        /// Training epochs for every SOM
        #[arg(long, default_value_t = 20)]
        som_epochs: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature-selection validity: one ensemble selection, averaged
    /// retrainings on the fixed reduced set (the full pipeline's report)
    Selection {
        #[command(flatten)]
        args: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(out, text.as_bytes())
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    samples: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct MineReport {
    schema_version: u32,
    class_constrained: bool,
    feature_names: Vec<String>,
    patterns: Vec<ucog::Pattern>,
}

#[derive(Serialize)]
struct CorrelateReport {
    schema_version: u32,
    feature_names: Vec<String>,
    report: ucog::FeatureCorrelationReport,
}

#[derive(Serialize)]
struct SelectReport {
    schema_version: u32,
    ensemble_size: usize,
    confidence_min: f64,
    base_seed: u64,
    feature_names: Vec<String>,
    selected: FeatureSet,
    selected_names: Vec<String>,
    confidences: Vec<f64>,
}

fn mine_for(model: &UcModel, class_constrained: bool) -> Result<Vec<ucog::Pattern>> {
    if class_constrained {
        patterns::mine_class_constrained(model)
    } else {
        patterns::mine_unconstrained(model)
    }
}

fn parse_methods(spec: &str, som_grid: usize, som_epochs: usize) -> Result<Vec<BaselineSpec>> {
    let mut out = Vec::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token == "proposal" {
            out.push(BaselineSpec::Proposal);
        } else if let Some(dims) = token.strip_prefix("pca:") {
            let dims: usize = dims
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad PCA dims in {token:?}")))?;
            out.push(BaselineSpec::Pca { dims });
        } else if let Some(dims) = token.strip_prefix("som:") {
            let dims: usize = dims
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad SOM dims in {token:?}")))?;
            if dims == 2 {
                out.push(BaselineSpec::Som {
                    grid_side: som_grid,
                    epochs: som_epochs,
                    encoding: SomEncoding::BmuCoords,
                });
            } else {
                let side = (dims as f64).sqrt().round() as usize;
                if side * side != dims {
                    return Err(Error::InvalidConfig(format!(
                        "som:{dims} needs a square dimension count (distances to an n-by-n grid)"
                    )));
                }
                out.push(BaselineSpec::Som {
                    grid_side: side,
                    epochs: som_epochs,
                    encoding: SomEncoding::UnitDistances,
                });
            }
        } else {
            return Err(Error::InvalidConfig(format!("unknown method {token:?}")));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("no baseline methods listed".into()));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Synth {
            samples,
            informative,
            noise,
            classes,
            separation,
            seed,
            out,
            truth,
        } => {
            let (data, planted) = synthesize(&SynthSpec {
                samples,
                informative,
                noise,
                classes,
                separation,
                seed,
            })?;
            let mut bytes = Vec::new();
            data.write_csv(&mut bytes)?;
            write_output(&out, &bytes)?;
            if let Some(path) = truth {
                planted.save(path)?;
            }
            Ok(0)
        }
        Command::Split {
            data,
            fraction,
            seed,
            out_train,
            out_test,
        } => {
            let (train, test) = data.load()?.split(fraction, seed)?;
            train.to_csv(out_train)?;
            test.to_csv(out_test)?;
            Ok(0)
        }
        Command::Train { data, uc, out } => {
            let model = UcModel::train(&data.load()?, uc.config())?;
            match &out {
                Some(path) => model.save(path)?,
                None => write_json(&None, &model)?,
            }
            Ok(0)
        }
        Command::Eval { model, data, out } => {
            let model = UcModel::load(model)?;
            let dataset = data.load()?;
            let accuracy = model.accuracy(&dataset)?;
            write_json(
                &out,
                &EvalReport {
                    schema_version: SCHEMA_VERSION,
                    samples: dataset.n_samples(),
                    accuracy,
                },
            )?;
            Ok(0)
        }
        Command::Mine {
            model,
            class_constrained,
            format,
            out,
        } => {
            let model = UcModel::load(model)?;
            let mined = mine_for(&model, class_constrained)?;
            match format {
                FormatArg::Json => write_json(
                    &out,
                    &MineReport {
                        schema_version: SCHEMA_VERSION,
                        class_constrained,
                        feature_names: model.feature_names().to_vec(),
                        patterns: mined,
                    },
                )?,
                FormatArg::Csv => {
                    let mut bytes = Vec::new();
                    patterns::write_csv(&mined, model.feature_names(), &mut bytes)?;
                    write_output(&out, &bytes)?;
                }
            }
            Ok(0)
        }
        Command::Correlate { model, format, out } => {
            let model = UcModel::load(model)?;
            let mined = mine_for(&model, model.target_kind() == TargetKind::Categorical)?;
            let report = stats::correlate_patterns(&mined, model.target_kind())?;
            match format {
                FormatArg::Json => write_json(
                    &out,
                    &CorrelateReport {
                        schema_version: SCHEMA_VERSION,
                        feature_names: model.feature_names().to_vec(),
                        report,
                    },
                )?,
                FormatArg::Csv => {
                    let mut bytes = Vec::new();
                    report.write_csv(model.feature_names(), &mut bytes)?;
                    write_output(&out, &bytes)?;
                }
            }
            Ok(0)
        }
        Command::Select {
            data,
            uc,
            thresholds,
            models,
            confidence_min,
            seed,
            format,
            out,
        } => {
            let dataset = data.load()?;
            let (selected, confidence) = select_features_ensemble(
                &dataset,
                uc.config(),
                &thresholds.thresholds()?,
                models,
                confidence_min,
                seed,
            )?;
            match format {
                FormatArg::Json => {
                    let selected_names = selected
                        .indices()
                        .iter()
                        .map(|&j| dataset.feature_names()[j].clone())
                        .collect();
                    write_json(
                        &out,
                        &SelectReport {
                            schema_version: SCHEMA_VERSION,
                            ensemble_size: confidence.ensemble_size(),
                            confidence_min,
                            base_seed: seed,
                            feature_names: dataset.feature_names().to_vec(),
                            selected,
                            selected_names,
                            confidences: confidence.confidences().to_vec(),
                        },
                    )?;
                }
                FormatArg::Csv => {
                    let mut bytes = Vec::new();
                    confidence.write_csv(dataset.feature_names(), &selected, &mut bytes)?;
                    write_output(&out, &bytes)?;
                }
            }
            Ok(0)
        }
        Command::Reduce { data, features, out } => {
            let keep = FeatureSet::load(features)?;
            let reduced = data.load()?.reduce(&keep)?;
            let mut bytes = Vec::new();
            reduced.write_csv(&mut bytes)?;
            write_output(&out, &bytes)?;
            Ok(0)
        }
        Command::Pipeline { args, out } => {
            let cfg = args.config()?;
            let (train, test) = args.load_pair()?;
            let report = run_pipeline(&train, &test, &cfg)?;
            write_json(&out, &report)?;
            if report.status == PipelineStatus::NoRelevantFeatures {
                eprintln!("error: {}", Error::NoRelevantFeatures);
                return Ok(3);
            }
            Ok(0)
        }
        Command::Experiment(cmd) => match cmd {
            ExperimentCommand::Patterns { args, out } => {
                let cfg = args.config()?;
                let (train, test) = args.load_pair()?;
                let report = experiment_pattern_validity(&train, &test, &cfg)?;
                write_json(&out, &report)?;
                Ok(0)
            }
            ExperimentCommand::Baselines {
                args,
                methods,
                som_grid,
                som_epochs,
                format,
                out,
            } => {
                let cfg = args.config()?;
                let specs = parse_methods(&methods, som_grid, som_epochs)?;
                let (train, test) = args.load_pair()?;
                let table = experiment_baseline_comparison(&train, &test, &cfg, &specs)?;
                match format {
                    FormatArg::Json => write_json(&out, &table)?,
                    FormatArg::Csv => {
                        let mut bytes = Vec::new();
                        table.write_csv(&mut bytes)?;
                        write_output(&out, &bytes)?;
                    }
                }
                Ok(0)
            }
            ExperimentCommand::Selection { args, out } => {
                let cfg = args.config()?;
                let (train, test) = args.load_pair()?;
                let report = run_pipeline(&train, &test, &cfg)?;
                write_json(&out, &report)?;
                if report.status == PipelineStatus::NoRelevantFeatures {
                    eprintln!("error: {}", Error::NoRelevantFeatures);
                    return Ok(3);
                }
                Ok(0)
            }
        },
    }
}

fn exit_code(err: &Error) -> i32 {
    if matches!(err, Error::NoRelevantFeatures) {
        3
    } else if err.is_io() {
        4
    } else {
        2
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
