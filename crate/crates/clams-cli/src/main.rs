//! `clams` — scatterplot cluster-ambiguity scoring and its applications.
//!
//! Exit codes: 0 ok, 1 usage, 2 input parse error, 3 compute error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clams::ambiguity::clams_score;
use clams::bench::{default_techniques, rank_stability, BenchReport, MetricKind};
use clams::datagen::{
    generate_scene, generate_training_set, ingest_clustme, sample_pair, PairRanges, SceneSpec,
};
use clams::error::ClamsError;
use clams::evm::{ground_truth_ambiguity_with, EvmKind, NoiseHandling};
use clams::features::FeatureMask;
use clams::gmm::GmmFitConfig;
use clams::reducer::{optimize, HighDimDataset, NeighborhoodF1, ReducerConfig, ToyEmbedder};
use clams::separability::{
    ablate, load_model, model_format_version, save_model, train, TrainConfig, TrainingSet,
};
use clams::svg::render_report_svg;
use clams::types::{Clustering, Scatterplot};
use clams::util::round_json_floats;

const REPORT_FORMAT_VERSION: u32 = 1;
/// Significant digits for floats in JSON reports; keeps outputs byte-stable.
const REPORT_DIGITS: u32 = 12;

#[derive(Parser)]
#[command(
    name = "clams",
    about = "Cluster ambiguity scoring for 2-D scatterplots",
    version,
    long_version = concat!(env!("CARGO_PKG_VERSION"), " (report format 1, model format 1)")
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score scatterplots: GMM decomposition, pairwise separability,
    /// entropy, aggregate.
    Score(ScoreArgs),
    /// Train a separability model from an external export or surrogate-
    /// labeled synthetic pairs.
    Train(TrainArgs),
    /// Feature-ablation table: all features, each single removal, each pair
    /// removal.
    Ablate(AblateArgs),
    /// Generate synthetic stimuli (scenes, pairs, or a labeled training
    /// CSV).
    Generate(GenerateArgs),
    /// Disagreement-based ground-truth ambiguity from directories of
    /// clusterings.
    GroundTruth(GroundTruthArgs),
    /// Rank-stability benchmark of clustering techniques over dataset sets.
    Bench(BenchArgs),
    /// Two-phase accuracy-constrained ambiguity reduction of an embedding.
    Reduce(ReduceArgs),
}

#[derive(Args)]
struct GmmFlags {
    /// Maximum component count considered.
    #[arg(long, default_value_t = 20)]
    k_max: usize,
    /// EM restarts per component count.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// EM iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Convergence tolerance on mean log-likelihood change.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Minimum covariance eigenvalue.
    #[arg(long, default_value_t = 1e-6)]
    floor: f64,
    /// Kneedle sensitivity on the BIC curve.
    #[arg(long, default_value_t = 1.0)]
    sensitivity: f64,
}

impl GmmFlags {
    fn to_config(&self, seed: u64) -> GmmFitConfig {
        GmmFitConfig {
            k_max: self.k_max,
            restarts: self.restarts,
            max_iters: self.max_iters,
            loglik_tol: self.tol,
            covariance_floor: self.floor,
            kneedle_sensitivity: self.sensitivity,
            seed,
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Point files (.csv with x,y header or .json) or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Trained separability model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    gmm: GmmFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file for a single input (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report directory for batch inputs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write an SVG rendering next to each report.
    #[arg(long)]
    svg: bool,
    /// Indent JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct TrainDataFlags {
    /// Pair-parameter CSV and separability-score CSV of a judgment export.
    #[arg(long, num_args = 2, value_names = ["PARAMS", "SCORES"])]
    clustme: Option<Vec<PathBuf>>,
    /// Generate this many surrogate-labeled synthetic pairs instead.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Labeled feature CSV (dc,dsr,dd,sd,ed,ac,label).
    #[arg(long)]
    training_csv: Option<PathBuf>,
    /// Monte-Carlo samples per surrogate label.
    #[arg(long, default_value_t = 2000)]
    mc_samples: usize,
}

impl TrainDataFlags {
    fn load(&self, seed: u64) -> Result<TrainingSet, CliError> {
        let sources = self.clustme.is_some() as u8
            + self.synthetic.is_some() as u8
            + self.training_csv.is_some() as u8;
        if sources != 1 {
            return Err(CliError::Usage(
                "choose exactly one of --clustme, --synthetic, --training-csv".into(),
            ));
        }
        if let Some(paths) = &self.clustme {
            return Ok(ingest_clustme(&paths[0], &paths[1])?);
        }
        if let Some(path) = &self.training_csv {
            return Ok(TrainingSet::from_csv_path(path)?);
        }
        let n = self.synthetic.unwrap();
        let (set, _) = generate_training_set(n, &PairRanges::default(), self.mc_samples, seed)?;
        Ok(set)
    }
}

#[derive(Args)]
struct TrainConfigFlags {
    #[arg(long, default_value_t = 300)]
    trees: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.8)]
    subsample: f64,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
}

impl TrainConfigFlags {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            n_trees: self.trees,
            max_depth: self.depth,
            learning_rate: self.learning_rate,
            subsample: self.subsample,
            min_leaf: self.min_leaf,
            cv_folds: self.folds,
            seed,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: TrainDataFlags,
    #[command(flatten)]
    cfg: TrainConfigFlags,
    /// Feature mask as a comma list, e.g. `dc,dsr,sd,ed,ac`.
    #[arg(long, default_value = "dc,dsr,sd,ed,ac")]
    mask: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    data: TrainDataFlags,
    #[command(flatten)]
    cfg: TrainConfigFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Multi-component scenes with ground-truth label files.
    Scene {
        /// Components per scene.
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Number of scenes.
        #[arg(long, default_value_t = 1)]
        n_scenes: usize,
        /// Centers are drawn uniformly in [0, box_size]².
        #[arg(long, default_value_t = 20.0)]
        box_size: f64,
        /// Minor-axis sd range LO,HI.
        #[arg(long, default_value = "0.5,1.5", value_parser = parse_range)]
        sd: (f64, f64),
        /// Major/minor ratio range LO,HI.
        #[arg(long, default_value = "1.0,2.5", value_parser = parse_range)]
        ellipticity: (f64, f64),
        /// Per-component count range LO,HI.
        #[arg(long, default_value = "50,200", value_parser = parse_usize_range)]
        count: (usize, usize),
    },
    /// Two-Gaussian pair stimuli.
    Pairs {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value = "0,8", value_parser = parse_range)]
        center_distance: (f64, f64),
        #[arg(long, default_value = "0.4,2.0", value_parser = parse_range)]
        sd: (f64, f64),
        #[arg(long, default_value = "1.0,3.0", value_parser = parse_range)]
        ellipticity: (f64, f64),
        #[arg(long, default_value = "50,200", value_parser = parse_usize_range)]
        count: (usize, usize),
    },
    /// Surrogate-labeled training CSV.
    Training {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        mc_samples: usize,
        #[arg(long, default_value = "0,8", value_parser = parse_range)]
        center_distance: (f64, f64),
        #[arg(long, default_value = "0.4,2.0", value_parser = parse_range)]
        sd: (f64, f64),
        #[arg(long, default_value = "1.0,3.0", value_parser = parse_range)]
        ellipticity: (f64, f64),
        #[arg(long, default_value = "50,200", value_parser = parse_usize_range)]
        count: (usize, usize),
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (scene, pairs) or file (training).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GroundTruthArgs {
    /// Directory containing one subdirectory of clustering CSVs per
    /// scatterplot id.
    dir: PathBuf,
    /// Measures to compute (`all` or a comma list of ami,arand,vm,homo,comp).
    #[arg(long, default_value = "all")]
    evm: String,
    /// Give unassigned points singleton clusters instead of excluding them.
    #[arg(long)]
    noise_singletons: bool,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ranking CSV path.
    #[arg(long)]
    ranking_csv: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest JSON: [{"path": "plot.csv", "group": "low"}, ...].
    #[arg(long)]
    manifest: PathBuf,
    /// Internal metric: silhouette | ch.
    #[arg(long, default_value = "silhouette")]
    metric: String,
    /// Hyperparameter draws per technique and dataset.
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ranking CSV path.
    #[arg(long)]
    ranking_csv: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct ReduceArgs {
    /// High-dimensional dataset CSV (one row per point, d columns).
    input: PathBuf,
    /// Trained separability model file.
    #[arg(long)]
    model: PathBuf,
    /// Accuracy-drift budget τ.
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    /// Phase-1 (accuracy) search budget.
    #[arg(long, default_value_t = 40)]
    budget1: usize,
    /// Phase-2 (ambiguity) search budget.
    #[arg(long, default_value_t = 80)]
    budget2: usize,
    /// Neighborhood size of the accuracy metric.
    #[arg(long, default_value_t = 10)]
    knn: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for the report and both embeddings.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    pretty: bool,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected LO,HI".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| "bad LO")?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| "bad HI")?;
    Ok((lo, hi))
}

fn parse_usize_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = parse_range(s)?;
    Ok((lo as usize, hi as usize))
}

enum CliError {
    Usage(String),
    Parse(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Compute(m) => m,
        }
    }
}

impl From<ClamsError> for CliError {
    fn from(e: ClamsError) -> Self {
        match e {
            ClamsError::Io { .. }
            | ClamsError::ParseError { .. }
            | ClamsError::RangeError { .. }
            | ClamsError::FormatVersionMismatch(_)
            | ClamsError::ChecksumMismatch { .. }
            | ClamsError::EmptyInput(_)
            | ClamsError::NonFinite(_) => CliError::Parse(e.to_string()),
            ClamsError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Train(args) => cmd_train(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Generate(args) => cmd_generate(args),
        Command::GroundTruth(args) => cmd_ground_truth(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Reduce(args) => cmd_reduce(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// Serializes a report with floats rounded to 12 significant digits.
fn report_to_string(value: &serde_json::Value, pretty: bool) -> String {
    let mut value = value.clone();
    round_json_floats(&mut value, REPORT_DIGITS);
    let mut text = if pretty {
        serde_json::to_string_pretty(&value).expect("report serializes")
    } else {
        serde_json::to_string(&value).expect("report serializes")
    };
    text.push('\n');
    text
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Compute(format!("creating {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Compute(format!("writing {}: {e}", path.display())))
}

fn emit(value: &serde_json::Value, out: Option<&Path>, pretty: bool) -> Result<(), CliError> {
    let text = report_to_string(value, pretty);
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Expands files and directories into a sorted list of point files.
fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input)
                .map_err(|e| CliError::Parse(format!("reading {}: {e}", input.display())))?;
            for entry in entries {
                let path = entry
                    .map_err(|e| CliError::Parse(format!("reading {}: {e}", input.display())))?
                    .path();
                match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") | Some("json") => files.push(path),
                    _ => {}
                }
            }
        } else {
            files.push(input.clone());
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Usage("no input files found".into()));
    }
    Ok(files)
}

fn cmd_score(args: ScoreArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let files = collect_inputs(&args.inputs)?;
    if files.len() > 1 && args.out_dir.is_none() {
        return Err(CliError::Usage(
            "batch scoring needs --out-dir for per-file reports".into(),
        ));
    }
    let cfg = args.gmm.to_config(args.seed);
    for file in &files {
        let plot = Scatterplot::from_path(file)?;
        let report = clams_score(&plot, &model, &cfg)?;
        let value = serde_json::json!({
            "format_version": REPORT_FORMAT_VERSION,
            "id": plot.id(),
            "score": report.score(),
            "pairs": report.pairs(),
            "decomposition": report.decomposition(),
            "model": model.training_meta(),
            "config": cfg,
        });
        let svg = args.svg.then(|| render_report_svg(&plot, &report, 640));
        if let Some(dir) = &args.out_dir {
            let stem = file.file_stem().unwrap_or_default().to_string_lossy();
            emit(&value, Some(&dir.join(format!("{stem}.report.json"))), args.pretty)?;
            if let Some(svg) = svg {
                write_text(&dir.join(format!("{stem}.svg")), &svg)?;
            }
        } else {
            emit(&value, args.out.as_deref(), args.pretty)?;
            if let Some(svg) = svg {
                let path = args
                    .out
                    .as_ref()
                    .map(|p| p.with_extension("svg"))
                    .unwrap_or_else(|| PathBuf::from(format!("{}.svg", plot.id())));
                write_text(&path, &svg)?;
            }
        }
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let mask = FeatureMask::parse(&args.mask)?;
    let data = args.data.load(args.seed)?;
    let cfg = args.cfg.to_config(args.seed);
    let model = train(&data, &cfg, mask)?;
    save_model(&model, &args.out)?;
    let value = serde_json::json!({
        "format_version": REPORT_FORMAT_VERSION,
        "model_format_version": model_format_version(),
        "model_path": args.out.display().to_string(),
        "rows": data.len(),
        "provenance": data.provenance(),
        "mask": mask.to_string(),
        "cv_r2": model.training_meta().cv_r2,
        "trees": model.n_trees(),
        "config": cfg,
    });
    emit(&value, None, args.pretty)
}

fn cmd_ablate(args: AblateArgs) -> Result<(), CliError> {
    let data = args.data.load(args.seed)?;
    let cfg = args.cfg.to_config(args.seed);
    let report = ablate(&data, &cfg)?;
    print!("{}", report.to_pretty_string());
    if let Some(path) = &args.out {
        let mut csv = String::from("kind,removed,r2,pct_change\n");
        csv.push_str(&format!("baseline,,{:.6},0\n", report.full_r2));
        for row in report.singles.iter().chain(report.pairs.iter()) {
            let names: Vec<&str> = row.removed.iter().map(|f| f.name()).collect();
            csv.push_str(&format!(
                "{},{},{:.6},{:.4}\n",
                if row.removed.len() == 1 { "single" } else { "pair" },
                names.join("+"),
                row.r2,
                row.pct_change
            ));
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    match args.kind {
        GenerateKind::Scene {
            k,
            n_scenes,
            box_size,
            sd,
            ellipticity,
            count,
        } => {
            std::fs::create_dir_all(&args.out)
                .map_err(|e| CliError::Compute(format!("creating {}: {e}", args.out.display())))?;
            for i in 0..n_scenes {
                let spec = SceneSpec {
                    k,
                    center_box: ([0.0, 0.0], [box_size, box_size]),
                    sd,
                    ellipticity,
                    count,
                    seed: args.seed.wrapping_add(i as u64),
                };
                let (plot, labels) = generate_scene(&spec)?;
                write_text(&args.out.join(format!("scene_{i:03}.csv")), &plot.to_csv_string())?;
                write_text(
                    &args.out.join(format!("scene_{i:03}_labels.csv")),
                    &labels.to_csv_string(),
                )?;
            }
            eprintln!("wrote {n_scenes} scene(s) to {}", args.out.display());
        }
        GenerateKind::Pairs {
            n,
            center_distance,
            sd,
            ellipticity,
            count,
        } => {
            std::fs::create_dir_all(&args.out)
                .map_err(|e| CliError::Compute(format!("creating {}: {e}", args.out.display())))?;
            let ranges = PairRanges {
                center_distance,
                sd,
                ellipticity,
                count,
            };
            ranges.validate()?;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            for i in 0..n {
                let spec = ranges.draw_pair(&mut rng);
                let plot = sample_pair(&spec, args.seed.wrapping_add(i as u64))?;
                write_text(&args.out.join(format!("pair_{i:03}.csv")), &plot.to_csv_string())?;
            }
            eprintln!("wrote {n} pair stimulus file(s) to {}", args.out.display());
        }
        GenerateKind::Training {
            n,
            mc_samples,
            center_distance,
            sd,
            ellipticity,
            count,
        } => {
            let ranges = PairRanges {
                center_distance,
                sd,
                ellipticity,
                count,
            };
            let (set, _) = generate_training_set(n, &ranges, mc_samples, args.seed)?;
            write_text(&args.out, &set.to_csv_string())?;
            eprintln!("wrote {} training rows to {}", set.len(), args.out.display());
        }
    }
    Ok(())
}

fn cmd_ground_truth(args: GroundTruthArgs) -> Result<(), CliError> {
    let evms: Vec<EvmKind> = if args.evm.trim() == "all" {
        EvmKind::ALL.to_vec()
    } else {
        args.evm
            .split(',')
            .map(|s| EvmKind::parse(s.trim()))
            .collect::<Result<_, _>>()?
    };
    let noise = if args.noise_singletons {
        NoiseHandling::TreatAsSingletons
    } else {
        NoiseHandling::ExcludePairwise
    };
    let mut plot_dirs: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .map_err(|e| CliError::Parse(format!("reading {}: {e}", args.dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    plot_dirs.sort();
    if plot_dirs.is_empty() {
        return Err(CliError::Usage(format!(
            "no per-scatterplot subdirectories in {}",
            args.dir.display()
        )));
    }
    let mut results = serde_json::Map::new();
    let mut rankings: Vec<(String, String, f64)> = Vec::new();
    for dir in &plot_dirs {
        let id = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::Parse(format!("reading {}: {e}", dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
            .collect();
        files.sort();
        let clusterings: Vec<Clustering> = files
            .iter()
            .map(Clustering::from_csv_path)
            .collect::<Result<_, _>>()?;
        let mut per_evm = serde_json::Map::new();
        for &evm in &evms {
            let ambiguity = ground_truth_ambiguity_with(&clusterings, evm, noise)?;
            per_evm.insert(evm.name().to_string(), serde_json::json!(ambiguity));
            rankings.push((evm.name().to_string(), id.clone(), ambiguity));
        }
        results.insert(id, serde_json::Value::Object(per_evm));
    }
    let value = serde_json::json!({
        "format_version": REPORT_FORMAT_VERSION,
        "noise_handling": if args.noise_singletons { "singletons" } else { "exclude" },
        "ambiguity": results,
    });
    emit(&value, args.out.as_deref(), args.pretty)?;
    if let Some(path) = &args.ranking_csv {
        let mut csv = String::from("evm,id,ambiguity,rank\n");
        for &evm in &evms {
            let mut rows: Vec<&(String, String, f64)> =
                rankings.iter().filter(|r| r.0 == evm.name()).collect();
            rows.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.1.cmp(&b.1)));
            for (rank, row) in rows.iter().enumerate() {
                csv.push_str(&format!("{},{},{:.12},{}\n", row.0, row.1, row.2, rank + 1));
            }
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct ManifestEntry {
    path: String,
    group: String,
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let metric = MetricKind::parse(&args.metric)?;
    let text = std::fs::read_to_string(&args.manifest)
        .map_err(|e| CliError::Parse(format!("reading {}: {e}", args.manifest.display())))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", args.manifest.display())))?;
    if entries.is_empty() {
        return Err(CliError::Usage("manifest lists no datasets".into()));
    }
    let base = args.manifest.parent().unwrap_or_else(|| Path::new("."));
    let mut groups: std::collections::BTreeMap<String, Vec<Scatterplot>> = Default::default();
    for entry in &entries {
        let path = base.join(&entry.path);
        groups
            .entry(entry.group.clone())
            .or_default()
            .push(Scatterplot::from_path(&path)?);
    }
    let techniques = default_techniques();
    let mut reports: std::collections::BTreeMap<String, BenchReport> = Default::default();
    for (group, plots) in &groups {
        let report = rank_stability(plots, &techniques, metric, args.budget, args.seed)?;
        reports.insert(group.clone(), report);
    }
    let value = serde_json::json!({
        "format_version": REPORT_FORMAT_VERSION,
        "metric": metric.name(),
        "budget": args.budget,
        "seed": args.seed,
        "groups": reports,
    });
    emit(&value, args.out.as_deref(), args.pretty)?;
    if let Some(path) = &args.ranking_csv {
        let mut csv = String::from("group,dataset,technique,score,rank\n");
        for (group, report) in &reports {
            for d in &report.per_dataset {
                for (ti, name) in report.technique_names.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{:.12},{}\n",
                        group, d.dataset_id, name, d.scores[ti], d.ranks[ti]
                    ));
                }
            }
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let data = HighDimDataset::from_csv_path(&args.input)?;
    let cfg = ReducerConfig {
        tau: args.tau,
        budget_phase1: args.budget1,
        budget_phase2: args.budget2,
        seed: args.seed,
        ..Default::default()
    };
    let metric = NeighborhoodF1 { k: args.knn };
    let run = optimize(&data, &ToyEmbedder, &metric, &model, &cfg)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Compute(format!("creating {}: {e}", args.out_dir.display())))?;
    write_text(
        &args.out_dir.join("intermediate.csv"),
        &run.intermediate.to_csv_string(),
    )?;
    write_text(
        &args.out_dir.join("final.csv"),
        &run.final_embedding.to_csv_string(),
    )?;
    let value = serde_json::json!({
        "format_version": REPORT_FORMAT_VERSION,
        "input": args.input.display().to_string(),
        "points": data.len(),
        "dim": data.dim(),
        "knn": args.knn,
        "budgets": [args.budget1, args.budget2],
        "seed": args.seed,
        "report": run.report,
    });
    emit(&value, Some(&args.out_dir.join("report.json")), args.pretty)
}
