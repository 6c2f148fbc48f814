//! End-to-end scoring of reference/distorted video pairs.
//!
//! Frame scores fan out over a rayon pool of `jobs` threads; each worker
//! opens its own backend handle. Temporal aggregation then runs
//! sequentially over the ordered series, so results do not depend on the
//! degree of parallelism.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::{BackendSpec, FeatureBackend};
use crate::baseline::{msssim_frame, psnr_frame, ssim_frame, SsimParams};
use crate::error::{Error, Result};
use crate::media::{load_video, preprocess_indexed, FrameSequence, VideoFormat};
use crate::output::{fixed_vec, Fixed};
use crate::quality::{frame_quality, SimilarityWeights};
use crate::temporal::Pooling;

/// Environment variable naming the default backend (`analytic[:seed]` or a
/// JSON sidecar path).
pub const BACKEND_ENV: &str = "FAVOR_BACKEND";

/// Per-frame quality measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Favor,
    Psnr,
    Ssim,
    MsSsim,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "favor" => Ok(Metric::Favor),
            "psnr" => Ok(Metric::Psnr),
            "ssim" => Ok(Metric::Ssim),
            "msssim" | "ms-ssim" => Ok(Metric::MsSsim),
            other => Err(Error::DegenerateInput(format!(
                "unknown metric `{other}` (expected favor, psnr, ssim or msssim)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Metric::Favor => "favor",
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::MsSsim => "msssim",
        })
    }
}

/// Everything needed to score a pair besides the videos themselves.
#[derive(Debug, Clone)]
pub struct ScoreConfig {
    pub metric: Metric,
    pub backend: BackendSpec,
    /// `None` means uniform weights for the backend's channel counts.
    pub weights: Option<SimilarityWeights>,
    pub pooling: Pooling,
    pub jobs: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Favor,
            backend: BackendSpec::Analytic { seed: 0 },
            weights: None,
            pooling: Pooling::default(),
            jobs: 1,
        }
    }
}

/// Output of scoring one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub video_id: String,
    pub metric: Metric,
    pub pooling: String,
    pub per_frame_scores: Vec<f64>,
    pub refined_scores: Option<Vec<f64>>,
    pub video_score: f64,
}

impl Serialize for ScoreRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json<'a> {
            video_id: &'a str,
            metric: String,
            pooling: &'a str,
            per_frame_scores: Vec<Fixed>,
            refined_scores: Option<Vec<Fixed>>,
            video_score: Fixed,
        }
        Json {
            video_id: &self.video_id,
            metric: self.metric.to_string(),
            pooling: &self.pooling,
            per_frame_scores: fixed_vec(&self.per_frame_scores),
            refined_scores: self.refined_scores.as_deref().map(fixed_vec),
            video_score: Fixed(self.video_score),
        }
        .serialize(s)
    }
}

fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InferenceFailure(format!("thread pool: {e}")))
}

fn favor_frame(
    backend: &dyn FeatureBackend,
    weights: &SimilarityWeights,
    index: usize,
    reference: &RgbImage,
    distorted: &RgbImage,
) -> Result<f64> {
    let norm = backend.normalization();
    let r = backend.extract(&preprocess_indexed(reference, &norm, index)?)?;
    let d = backend.extract(&preprocess_indexed(distorted, &norm, index)?)?;
    frame_quality(&r, &d, weights)
}

/// Per-frame scores of `distorted` against `reference`, in frame order.
pub fn frame_scores(
    reference: &FrameSequence,
    distorted: &FrameSequence,
    config: &ScoreConfig,
) -> Result<Vec<f64>> {
    if reference.len() != distorted.len() {
        return Err(Error::FrameCountMismatch {
            reference: reference.len(),
            distorted: distorted.len(),
        });
    }
    if (reference.width(), reference.height()) != (distorted.width(), distorted.height()) {
        return Err(Error::ShapeMismatch(format!(
            "reference is {}x{}, distorted is {}x{}",
            reference.width(),
            reference.height(),
            distorted.width(),
            distorted.height()
        )));
    }
    let pairs: Vec<(usize, (&RgbImage, &RgbImage))> = reference
        .frames()
        .iter()
        .zip(distorted.frames())
        .enumerate()
        .collect();
    let pool = build_pool(config.jobs)?;

    match config.metric {
        Metric::Favor => {
            let weights = match &config.weights {
                Some(w) => w.clone(),
                None => SimilarityWeights::uniform(&config.backend.open()?.channel_counts()),
            };
            pool.install(|| {
                pairs
                    .par_iter()
                    .map_init(
                        || config.backend.open(),
                        |backend, &(i, (r, d))| match backend {
                            Ok(b) => favor_frame(b.as_ref(), &weights, i, r, d),
                            Err(e) => Err(Error::GraphLoad(e.to_string())),
                        },
                    )
                    .collect()
            })
        }
        metric => {
            let params = SsimParams::default();
            pool.install(|| {
                pairs
                    .par_iter()
                    .map(|&(_, (r, d))| match metric {
                        Metric::Psnr => psnr_frame(r, d),
                        Metric::Ssim => ssim_frame(r, d, &params),
                        _ => msssim_frame(r, d, &params),
                    })
                    .collect()
            })
        }
    }
}

/// Scores one pair of decoded videos.
pub fn score_pair(
    video_id: &str,
    reference: &FrameSequence,
    distorted: &FrameSequence,
    config: &ScoreConfig,
) -> Result<ScoreRecord> {
    let per_frame = frame_scores(reference, distorted, config)?;
    let aggregate = config.pooling.aggregate(&per_frame)?;
    Ok(ScoreRecord {
        video_id: video_id.to_owned(),
        metric: config.metric,
        pooling: config.pooling.name().to_owned(),
        per_frame_scores: per_frame,
        refined_scores: aggregate.refined,
        video_score: aggregate.score,
    })
}

/// Loads both videos (format detected from the path) and scores them.
pub fn score_files(
    video_id: &str,
    reference: &Path,
    distorted: &Path,
    config: &ScoreConfig,
) -> Result<ScoreRecord> {
    let r = load_video(reference, VideoFormat::detect(reference))?;
    let d = load_video(distorted, VideoFormat::detect(distorted))?;
    score_pair(video_id, &r, &d, config)
}

/// One row of a batch manifest.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ManifestEntry {
    pub video_id: String,
    pub ref_path: PathBuf,
    pub dist_path: PathBuf,
}

/// Reads `video_id,ref_path,dist_path` rows; relative paths resolve
/// against `base`.
pub fn read_manifest<R: Read>(reader: R, base: Option<&Path>) -> Result<Vec<ManifestEntry>> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in csv.deserialize::<ManifestEntry>().enumerate() {
        let mut entry = row.map_err(|e| Error::Schema {
            file: "manifest".into(),
            row: i + 2,
            reason: e.to_string(),
        })?;
        if let Some(base) = base {
            if entry.ref_path.is_relative() {
                entry.ref_path = base.join(&entry.ref_path);
            }
            if entry.dist_path.is_relative() {
                entry.dist_path = base.join(&entry.dist_path);
            }
        }
        out.push(entry);
    }
    Ok(out)
}

/// Scores every manifest entry; records come back in manifest order.
pub fn score_batch(entries: &[ManifestEntry], config: &ScoreConfig) -> Result<Vec<ScoreRecord>> {
    entries
        .iter()
        .map(|e| score_files(&e.video_id, &e.ref_path, &e.dist_path, config))
        .collect()
}

/// Pretty JSON with fixed key order and six-decimal floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
