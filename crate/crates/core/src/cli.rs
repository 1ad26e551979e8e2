//! Command-line front end: `embed`, `cull`, `bench` and `ortho`.
//!
//! Every flag can also come from a flat `key = value` config file (keys are
//! the flag names without dashes). Precedence is flag, then config file,
//! then built-in default. Unknown config keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchSpec, Method};
use crate::dataset::{self, CullSpec, LabeledDataset};
use crate::error::Error;
use crate::layout::{self, Embedding2D};
use crate::metric::MetricKind;
use crate::ortho::{self, OrthoRunSpec};
use crate::pipeline::{EmbedConfig, WeightKernel, DEFAULT_EPSILON};
use crate::render::{self, fmt_sig, RenderStyle};

pub const DEFAULT_SEED: u64 = 42;
pub const THREADS_ENV: &str = "SPREV_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sprev", version, about = "Polygon embeddings of labeled high-dimensional data")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker thread cap (falls back to SPREV_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a labeled dataset into its class polygon.
    Embed(EmbedArgs),
    /// Write a seeded culled variant of a dataset. About 180 samples:
    /// `--classes 3 --fraction 0.03` on the 60,000-image MNIST training set,
    /// or `--fraction 0.12` on a 5,000-image extract.
    Cull(CullArgs),
    /// kNN cross-validation accuracy in the embedding spaces.
    Bench(BenchArgs),
    /// Near-orthogonality Monte Carlo study.
    Ortho(OrthoArgs),
}

#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// CSV with a header row and one label column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Name of the label column in --input.
    #[arg(long)]
    pub label_column: Option<String>,
    /// IDX image file (uncompressed).
    #[arg(long)]
    pub idx_images: Option<PathBuf>,
    /// IDX label file (uncompressed).
    #[arg(long)]
    pub idx_labels: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct EmbedFlags {
    /// euclidean | manhattan | cosine
    #[arg(long)]
    pub metric: Option<String>,
    /// inverse | softmax
    #[arg(long)]
    pub kernel: Option<String>,
    /// Softmax temperature.
    #[arg(long)]
    pub temperature: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub embed: EmbedFlags,
    /// `x,y,label` rows; printed to stdout when no output is given.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    /// SVG width and height in pixels.
    #[arg(long)]
    pub canvas_px: Option<String>,
}

#[derive(Debug, Args)]
pub struct CullArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of classes to keep (at least 2).
    #[arg(long)]
    pub classes: Option<String>,
    /// Fraction of each kept class to sample, in (0, 1].
    #[arg(long)]
    pub fraction: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub embed: EmbedFlags,
    /// Comma-separated neighbour counts, e.g. 3,5,15,30,60.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    /// Comma-separated subset of sprev,pca.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub out_folds: Option<PathBuf>,
    #[arg(long)]
    pub out_summary: Option<PathBuf>,
    /// Fill the embed_seconds column (makes the summary run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct OrthoArgs {
    /// Comma-separated dimensions.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub pairs: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parsed `key = value` config file.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::usage(format!("config line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(CliError::usage(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Resolves one setting: flag value, else config value, else `None`.
struct Resolver<'a> {
    config: &'a ConfigFile,
}

impl Resolver<'_> {
    fn raw(&self, flag: Option<&str>, key: &str) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.config.get(key).map(str::to_string))
    }

    fn parse<T: FromStr>(&self, flag: Option<&str>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(flag, key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::usage(format!("invalid value for --{key}: `{v}` ({e})"))),
        }
    }

    fn path(&self, flag: &Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.clone().or_else(|| self.config.get(key).map(PathBuf::from))
    }

    fn list<T: FromStr>(&self, flag: Option<&str>, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(flag, key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|e| CliError::usage(format!("invalid value in --{key}: `{s}` ({e})")))
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> CliResult<bool> {
        if flag {
            return Ok(true);
        }
        Ok(self.parse::<bool>(None, key)?.unwrap_or(false))
    }
}

const INPUT_KEYS: [&str; 4] = ["input", "label-column", "idx-images", "idx-labels"];
const EMBED_KEYS: [&str; 5] = ["metric", "kernel", "temperature", "epsilon", "seed"];

fn allowed(groups: &[&[&'static str]]) -> Vec<&'static str> {
    let mut keys = vec!["threads"];
    for g in groups {
        keys.extend_from_slice(g);
    }
    keys
}

fn load_input(args: &InputArgs, r: &Resolver) -> CliResult<(LabeledDataset, String)> {
    let input = r.path(&args.input, "input");
    let images = r.path(&args.idx_images, "idx-images");
    let labels = r.path(&args.idx_labels, "idx-labels");
    match (input, images, labels) {
        (Some(path), None, None) => {
            let label = r
                .raw(args.label_column.as_deref(), "label-column")
                .ok_or_else(|| CliError::usage("--label-column is required with --input"))?;
            Ok((dataset::load_csv(&path, &label)?, label))
        }
        (None, Some(img), Some(lab)) => Ok((dataset::load_idx(img, lab)?, "label".to_string())),
        (None, Some(_), None) | (None, None, Some(_)) => {
            Err(CliError::usage("--idx-images and --idx-labels must be given together"))
        }
        (None, None, None) => Err(CliError::usage("no input: pass --input or --idx-images/--idx-labels")),
        _ => Err(CliError::usage("--input cannot be combined with --idx-images/--idx-labels")),
    }
}

fn embed_config(flags: &EmbedFlags, r: &Resolver) -> CliResult<EmbedConfig> {
    let metric = r
        .raw(flags.metric.as_deref(), "metric")
        .map(|m| m.parse::<MetricKind>())
        .transpose()?
        .unwrap_or_default();
    let mut kernel = r
        .raw(flags.kernel.as_deref(), "kernel")
        .map(|k| k.parse::<WeightKernel>())
        .transpose()?
        .unwrap_or_default();
    let temperature = r.parse::<f64>(flags.temperature.as_deref(), "temperature")?;
    match (&mut kernel, temperature) {
        (WeightKernel::SoftmaxNegDistance { temperature: t }, Some(v)) => *t = v,
        (WeightKernel::InverseDistance, Some(_)) => {
            return Err(CliError::usage("--temperature only applies to --kernel softmax"))
        }
        _ => {}
    }
    let cfg = EmbedConfig {
        metric,
        kernel,
        epsilon: r.parse(flags.epsilon.as_deref(), "epsilon")?.unwrap_or(DEFAULT_EPSILON),
        seed: r.parse(flags.seed.as_deref(), "seed")?.unwrap_or(DEFAULT_SEED),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}

/// `x,y,label` rows with 6 significant digits.
pub fn embedding_csv(emb: &Embedding2D) -> Vec<u8> {
    let mut out = Vec::new();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["x", "y", "label"]).expect("in-memory write");
    for i in 0..emb.points.nrows() {
        let [x, y] = emb.point(i);
        w.write_record([fmt_sig(x), fmt_sig(y), emb.class_names[emb.labels[i]].clone()])
            .expect("in-memory write");
    }
    drop(w);
    out
}

fn cmd_embed(args: &EmbedArgs, config: &ConfigFile) -> CliResult<()> {
    config.check_keys(&allowed(&[&INPUT_KEYS, &EMBED_KEYS, &["out-csv", "out-svg", "canvas-px"]]))?;
    let r = Resolver { config };
    let (ds, _) = load_input(&args.input, &r)?;
    let cfg = embed_config(&args.embed, &r)?;
    let mut style = RenderStyle::default();
    if let Some(px) = r.parse(args.canvas_px.as_deref(), "canvas-px")? {
        style.canvas_px = px;
    }
    style.validate()?;
    let out_csv = r.path(&args.out_csv, "out-csv");
    let out_svg = r.path(&args.out_svg, "out-svg");

    let start = Instant::now();
    let emb = layout::embed(&ds, &cfg)?;
    let svg = out_svg.as_ref().map(|_| render::render_embedding(&emb, &style));
    eprintln!(
        "embedded {} samples x {} features into {} classes in {:.3}s",
        ds.num_samples(),
        ds.num_features(),
        ds.num_classes(),
        start.elapsed().as_secs_f64()
    );

    if let (Some(path), Some(svg)) = (&out_svg, &svg) {
        write_file(path, svg)?;
    }
    match &out_csv {
        Some(path) => write_file(path, &embedding_csv(&emb))?,
        None if out_svg.is_none() => stdout(&embedding_csv(&emb))?,
        None => {}
    }
    Ok(())
}

fn cmd_cull(args: &CullArgs, config: &ConfigFile) -> CliResult<()> {
    config.check_keys(&allowed(&[&INPUT_KEYS, &["classes", "fraction", "seed", "out"]]))?;
    let r = Resolver { config };
    let num_classes = r
        .parse(args.classes.as_deref(), "classes")?
        .ok_or_else(|| CliError::usage("--classes is required"))?;
    let subsample_fraction = r.parse(args.fraction.as_deref(), "fraction")?.unwrap_or(1.0);
    let seed = r.parse(args.seed.as_deref(), "seed")?.unwrap_or(DEFAULT_SEED);
    let spec = CullSpec { num_classes, subsample_fraction, seed };
    spec.validate()?;
    let (ds, label_column) = load_input(&args.input, &r)?;
    let culled = dataset::cull(&ds, &spec)?;
    let mut bytes = Vec::new();
    dataset::write_csv_to(&culled, &mut bytes, &label_column)?;
    match r.path(&args.out, "out") {
        Some(path) => write_file(&path, &bytes),
        None => stdout(&bytes),
    }
}

fn cmd_bench(args: &BenchArgs, config: &ConfigFile) -> CliResult<()> {
    config.check_keys(&allowed(&[
        &INPUT_KEYS,
        &EMBED_KEYS,
        &["k", "folds", "methods", "out-folds", "out-summary", "timing"],
    ]))?;
    let r = Resolver { config };
    let defaults = BenchSpec::default();
    let embed = embed_config(&args.embed, &r)?;
    let spec = BenchSpec {
        k_values: r.list(args.k.as_deref(), "k")?.unwrap_or(defaults.k_values),
        folds: r.parse(args.folds.as_deref(), "folds")?.unwrap_or(defaults.folds),
        seed: embed.seed,
        methods: r.list::<Method>(args.methods.as_deref(), "methods")?.unwrap_or(defaults.methods),
    };
    if spec.folds < 2 {
        return Err(CliError::usage(format!("--folds must be at least 2, got {}", spec.folds)));
    }
    let timing = r.flag(args.timing, "timing")?;
    let (ds, _) = load_input(&args.input, &r)?;
    let result = bench::run_bench(&ds, &embed, &spec)?;

    let mut summary = Vec::new();
    bench::write_summary_csv(&result, timing, &mut summary).expect("in-memory write");
    let out_folds = r.path(&args.out_folds, "out-folds");
    if let Some(path) = &out_folds {
        let mut folds = Vec::new();
        bench::write_fold_csv(&result, &mut folds).expect("in-memory write");
        write_file(path, &folds)?;
    }
    match r.path(&args.out_summary, "out-summary") {
        Some(path) => write_file(&path, &summary),
        None => stdout(&summary),
    }
}

/// `n,mean_abs_cos,max_abs_cos,frac_exceeding_eps`.
pub fn ortho_csv(stats: &[ortho::OrthoStats]) -> Vec<u8> {
    let mut out = String::from("n,mean_abs_cos,max_abs_cos,frac_exceeding_eps\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.n,
            fmt_sig(s.mean_abs_cos),
            fmt_sig(s.max_abs_cos),
            fmt_sig(s.frac_exceeding_eps)
        ));
    }
    out.into_bytes()
}

fn cmd_ortho(args: &OrthoArgs, config: &ConfigFile) -> CliResult<()> {
    config.check_keys(&allowed(&[&["dims", "pairs", "seed", "out-csv", "out-svg"]]))?;
    let r = Resolver { config };
    let spec = OrthoRunSpec {
        dims: r.list(args.dims.as_deref(), "dims")?.unwrap_or_else(ortho::default_dims),
        num_pairs: r.parse(args.pairs.as_deref(), "pairs")?.unwrap_or(ortho::DEFAULT_PAIRS),
        seed: r.parse(args.seed.as_deref(), "seed")?.unwrap_or(DEFAULT_SEED),
    };
    spec.validate()?;
    let stats = ortho::run_ortho_sim(&spec)?;
    let csv = ortho_csv(&stats);
    let out_svg = r.path(&args.out_svg, "out-svg");
    if let Some(path) = &out_svg {
        let series: Vec<(f64, f64)> = stats.iter().map(|s| (s.n as f64, s.mean_abs_cos)).collect();
        let svg = render::render_curve(&series, "mean |cos| between random unit vectors vs dimension", &RenderStyle::default())?;
        write_file(path, &svg)?;
    }
    match r.path(&args.out_csv, "out-csv") {
        Some(path) => write_file(&path, &csv),
        None if out_svg.is_none() => stdout(&csv),
        None => Ok(()),
    }
}

fn stdout(bytes: &[u8]) -> CliResult<()> {
    std::io::stdout()
        .write_all(bytes)
        .map_err(|e| CliError::internal(format!("cannot write to stdout: {e}")))
}

fn thread_count(cli: &Cli, config: &ConfigFile) -> CliResult<Option<usize>> {
    let raw = cli
        .threads
        .clone()
        .or_else(|| config.get("threads").map(str::to_string))
        .or_else(|| std::env::var(THREADS_ENV).ok());
    match raw {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("invalid thread count `{v}`"))),
        },
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = thread_count(cli, &config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::internal(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Embed(a) => cmd_embed(a, &config),
        Command::Cull(a) => cmd_cull(a, &config),
        Command::Bench(a) => cmd_bench(a, &config),
        Command::Ortho(a) => cmd_ortho(a, &config),
    })
}
