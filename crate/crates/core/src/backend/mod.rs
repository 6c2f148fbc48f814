//! Multi-stage feature extraction.
//!
//! A backend turns one [`InputTensor`] into a five-stage [`FeaturePyramid`].
//! Two implementations exist: [`AnalyticBackend`], a seeded strided
//! convolution stack that needs no files, and (with the `onnx` feature)
//! [`OnnxBackend`], which runs an exported backbone graph and reads five
//! named output taps.

mod analytic;
#[cfg(feature = "onnx")]
mod onnx;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{InputTensor, Normalization};

pub use analytic::AnalyticBackend;
#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;

/// Number of pyramid stages every backend produces.
pub const STAGE_COUNT: usize = 5;

/// Channel counts of the face-recognition backbone taps.
pub const BACKBONE_CHANNELS: [usize; STAGE_COUNT] = [64, 128, 256, 512, 512];

/// One stage of a pyramid: `channels` maps of `height x width`, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl StageTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::ShapeMismatch(format!(
                "stage shape {channels}x{height}x{width} has an empty axis"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "stage {channels}x{height}x{width} given {} values",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Spatial map of one channel, row-major.
    pub fn channel(&self, index: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[index * n..(index + 1) * n]
    }

    pub fn same_shape(&self, other: &StageTensor) -> bool {
        (self.channels, self.height, self.width) == (other.channels, other.height, other.width)
    }
}

/// Five stages of feature maps for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    stages: Vec<StageTensor>,
}

impl FeaturePyramid {
    /// Rejects anything but exactly five stages of finite values.
    pub fn new(stages: Vec<StageTensor>) -> Result<Self> {
        if stages.len() != STAGE_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "pyramid has {} stages, expected {STAGE_COUNT}",
                stages.len()
            )));
        }
        for (i, stage) in stages.iter().enumerate() {
            if stage.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::InferenceFailure(format!(
                    "stage {} contains non-finite activations",
                    i + 1
                )));
            }
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[StageTensor] {
        &self.stages
    }

    pub fn channel_counts(&self) -> Vec<usize> {
        self.stages.iter().map(StageTensor::channels).collect()
    }
}

/// A loaded feature extractor. Handles are not shared between threads;
/// each worker opens its own from a [`BackendSpec`].
pub trait FeatureBackend: Send {
    fn channel_counts(&self) -> [usize; STAGE_COUNT];

    /// Input standardization the backbone was trained with.
    fn normalization(&self) -> Normalization;

    fn extract(&self, input: &InputTensor) -> Result<FeaturePyramid>;
}

fn default_input_name() -> String {
    "input".to_owned()
}

/// JSON sidecar describing an exported backbone graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Graph file; relative paths resolve against the sidecar's directory.
    pub graph_path: PathBuf,
    #[serde(default = "default_input_name")]
    pub input_name: String,
    pub tap_names: [String; STAGE_COUNT],
    pub channel_counts: [usize; STAGE_COUNT],
    pub input_mean: [f64; 3],
    pub input_std: [f64; 3],
    /// Free-form provenance such as which layers were tapped and whether
    /// activations are pre- or post-nonlinearity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl BackendConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut config: BackendConfig = serde_json::from_str(&text)
            .map_err(|e| Error::BadBackendConfig(format!("{}: {e}", path.display())))?;
        if config.graph_path.is_relative() {
            if let Some(dir) = path.parent() {
                config.graph_path = dir.join(&config.graph_path);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, name) in self.tap_names.iter().enumerate() {
            if self.tap_names[..i].contains(name) {
                return Err(Error::BadBackendConfig(format!("tap `{name}` listed twice")));
            }
        }
        if self.channel_counts.contains(&0) {
            return Err(Error::BadBackendConfig("channel counts must be positive".into()));
        }
        self.normalization().validate()
    }

    pub fn normalization(&self) -> Normalization {
        Normalization {
            mean: self.input_mean,
            std: self.input_std,
        }
    }
}

/// Recipe for opening backend handles; cheap to clone and share.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendSpec {
    Analytic { seed: u64 },
    Graph(BackendConfig),
}

impl BackendSpec {
    /// Accepts `analytic`, `analytic:<seed>`, or a path to a JSON sidecar.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "analytic" {
            return Ok(BackendSpec::Analytic { seed: 0 });
        }
        if let Some(seed) = text.strip_prefix("analytic:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::BadBackendConfig(format!("bad analytic seed `{seed}`")))?;
            return Ok(BackendSpec::Analytic { seed });
        }
        BackendConfig::from_json_file(Path::new(text)).map(BackendSpec::Graph)
    }

    pub fn open(&self) -> Result<Box<dyn FeatureBackend>> {
        match self {
            BackendSpec::Analytic { seed } => Ok(Box::new(AnalyticBackend::new(*seed))),
            BackendSpec::Graph(config) => load_backend(config),
        }
    }
}

/// Loads an exported graph and checks every tap against the config.
#[cfg(feature = "onnx")]
pub fn load_backend(config: &BackendConfig) -> Result<Box<dyn FeatureBackend>> {
    Ok(Box::new(OnnxBackend::load(config)?))
}

#[cfg(not(feature = "onnx"))]
pub fn load_backend(_config: &BackendConfig) -> Result<Box<dyn FeatureBackend>> {
    Err(Error::GraphLoad(
        "built without the `onnx` feature; only the analytic backend is available".into(),
    ))
}

/// Seeded analytic backend handle.
pub fn analytic_backend(seed: u64) -> AnalyticBackend {
    AnalyticBackend::new(seed)
}
