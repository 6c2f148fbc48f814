use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use favor::backend::BackendSpec;
use favor::eval::{evaluate, EvalRecord, GroupKey};
use favor::output::{fixed_vec, Fixed};
use favor::pipeline::{
    read_manifest, score_batch, score_files, to_json, Metric, ScoreConfig, BACKEND_ENV,
};
use favor::quality::{SimilarityWeights, DEFAULT_TAU};
use favor::subjective::{mos_from_ratings, RatingsMatrix};
use favor::temporal::{MemoryParams, PoolStrategy, Pooling};

/// Full-reference quality scoring for compressed face videos.
///
/// Videos are `.y4m` files (8-bit 4:2:0 or 4:4:4; BT.601 limited range
/// unless the header says XCOLORRANGE=FULL) or directories of 000001.png,
/// 000002.png, ...
#[derive(Parser)]
#[command(name = "favor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one distorted video against its reference.
    Score(ScoreArgs),
    /// Score every pair in a `video_id,ref_path,dist_path` manifest.
    Batch(BatchArgs),
    /// Turn `subject_id,video_id,score` ratings into `video_id,mos,std,n`.
    Mos(MosArgs),
    /// Correlate predictions with MOS from `video_id,codec,level,pred,mos`.
    Eval(EvalArgs),
    /// Re-pool a per-frame score series (score JSON or one number per line).
    Pool(PoolArgs),
}

#[derive(Args, Clone)]
struct PoolingArgs {
    /// `memory` (default) or one of average, percentile, recency, primacy,
    /// variation, hysteresis, vqpooling.
    #[arg(long, default_value = "memory")]
    pool: String,
    /// Strategy parameter as key=value; repeatable.
    #[arg(long = "pool-arg", value_name = "K=V")]
    pool_args: Vec<String>,
    /// Memory window length in frames.
    #[arg(long, default_value_t = 4)]
    l: usize,
    /// Direct/indirect memory mix.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Rank-weight Gaussian width; defaults to max(1, successors / 2).
    #[arg(long)]
    sigma_w: Option<f64>,
}

impl PoolingArgs {
    fn pooling(&self) -> Result<Pooling> {
        if self.pool == "memory" {
            if !self.pool_args.is_empty() {
                bail!("memory pooling takes --l/--gamma/--sigma-w, not --pool-arg");
            }
            let params = MemoryParams {
                window: self.l,
                gamma: self.gamma,
                sigma_w: self.sigma_w,
            };
            params.validate()?;
            return Ok(Pooling::Memory(params));
        }
        let args = self
            .pool_args
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
                    .with_context(|| format!("--pool-arg `{kv}` is not key=value"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Pooling::Strategy(PoolStrategy::from_name(&self.pool, &args)?))
    }
}

#[derive(Args, Clone)]
struct ScoringArgs {
    /// `analytic`, `analytic:<seed>`, or a backbone JSON sidecar. The
    /// analytic backbone is a seeded stand-in for testing.
    #[arg(long, env = BACKEND_ENV, default_value = "analytic")]
    backend: String,
    /// favor, psnr, ssim or msssim.
    #[arg(long, default_value = "favor")]
    metric: String,
    /// Texture/structure weight file overriding the uniform default.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Stabilizing constant in the similarity terms.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Worker threads for per-frame scoring.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    pooling: PoolingArgs,
}

impl ScoringArgs {
    fn config(&self) -> Result<ScoreConfig> {
        if self.jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        let metric: Metric = self.metric.parse()?;
        let backend = BackendSpec::parse(&self.backend)
            .with_context(|| format!("loading backend `{}`", self.backend))?;
        if metric == Metric::Favor && matches!(backend, BackendSpec::Analytic { .. }) {
            log::warn!(
                "using the analytic test backbone; pass --backend or set {BACKEND_ENV} to a \
                 backbone sidecar for meaningful scores"
            );
        }
        let weights = match &self.weights {
            Some(path) => Some(SimilarityWeights::from_json_file(path, self.tau)?),
            None if self.tau != DEFAULT_TAU => {
                let counts = backend.open()?.channel_counts();
                Some(SimilarityWeights::uniform(&counts).with_tau(self.tau)?)
            }
            None => None,
        };
        Ok(ScoreConfig {
            metric,
            backend,
            weights,
            pooling: self.pooling.pooling()?,
            jobs: self.jobs,
        })
    }
}

#[derive(Args)]
struct ScoreArgs {
    /// Reference video: .y4m file or PNG frame directory.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Distorted video, same frame count and size as the reference.
    #[arg(long)]
    dist: PathBuf,
    /// Defaults to the distorted file's stem.
    #[arg(long)]
    video_id: Option<String>,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// CSV of video_id,ref_path,dist_path; relative paths resolve
    /// against the manifest's directory.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MosArgs {
    /// CSV of subject_id,video_id,score on a 1-5 scale.
    #[arg(long)]
    ratings: PathBuf,
    /// File listing retained subject ids, one per line.
    #[arg(long)]
    subjects: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV of video_id,codec,level,pred,mos.
    #[arg(long)]
    records: PathBuf,
    /// Comma-separated subset tags: codec, level.
    #[arg(long, default_value = "")]
    group_by: String,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoolArgs {
    /// Output of `favor score`, or whitespace-separated numbers.
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    pooling: PoolingArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        if let Some(list) = value.get("per_frame_scores").and_then(|v| v.as_array()) {
            return list
                .iter()
                .map(|v| match v {
                    serde_json::Value::Number(n) => n.as_f64().context("bad number"),
                    serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
                    other => bail!("unexpected score {other}"),
                })
                .collect();
        }
    }
    text.split_whitespace()
        .map(|t| match t {
            "inf" => Ok(f64::INFINITY),
            t => t.parse::<f64>().with_context(|| format!("`{t}` is not a number")),
        })
        .collect()
}

#[derive(Serialize)]
struct PoolOutput {
    pooling: String,
    frames: usize,
    refined_scores: Option<Vec<Fixed>>,
    video_score: Fixed,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score(args) => {
            let config = args.scoring.config()?;
            let id = args.video_id.clone().unwrap_or_else(|| {
                args.dist
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            let record = score_files(&id, &args.reference, &args.dist, &config)?;
            emit(args.out.as_deref(), &to_json(&record)?)
        }
        Command::Batch(args) => {
            let config = args.scoring.config()?;
            let file = File::open(&args.manifest)
                .with_context(|| format!("opening {}", args.manifest.display()))?;
            let entries = read_manifest(file, args.manifest.parent())?;
            let records = score_batch(&entries, &config)?;
            emit(args.out.as_deref(), &to_json(&records)?)
        }
        Command::Mos(args) => {
            let keep = match &args.subjects {
                Some(path) => Some(
                    fs::read_to_string(path)?
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(String::from)
                        .collect::<HashSet<_>>(),
                ),
                None => None,
            };
            let file = File::open(&args.ratings)
                .with_context(|| format!("opening {}", args.ratings.display()))?;
            let ratings = RatingsMatrix::from_csv(file, keep.as_ref())?;
            let result = mos_from_ratings(&ratings)?;
            let mut buf = Vec::new();
            result.write_csv(&mut buf)?;
            emit(args.out.as_deref(), &String::from_utf8(buf)?)
        }
        Command::Eval(args) => {
            let file = File::open(&args.records)
                .with_context(|| format!("opening {}", args.records.display()))?;
            let records = EvalRecord::read_csv(file)?;
            let report = evaluate(&records, &GroupKey::parse_list(&args.group_by)?)?;
            emit(args.out.as_deref(), &to_json(&report)?)
        }
        Command::Pool(args) => {
            let scores = read_scores(&args.scores)?;
            let pooling = args.pooling.pooling()?;
            let aggregate = pooling.aggregate(&scores)?;
            let output = PoolOutput {
                pooling: pooling.name().to_owned(),
                frames: scores.len(),
                refined_scores: aggregate.refined.as_deref().map(fixed_vec),
                video_score: Fixed(aggregate.score),
            };
            emit(args.out.as_deref(), &to_json(&output)?)
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
