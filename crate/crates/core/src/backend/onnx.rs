use std::sync::Arc;

use tract_onnx::prelude::*;

use super::{
    BackendConfig, FeatureBackend, FeaturePyramid, StageTensor, STAGE_COUNT,
};
use crate::error::{Error, Result};
use crate::media::{InputTensor, Normalization, INPUT_SIZE};

type Plan = Arc<TypedRunnableModel>;

/// Backbone graph executed with tract, exposing five named taps.
pub struct OnnxBackend {
    plan: Plan,
    channel_counts: [usize; STAGE_COUNT],
    normalization: Normalization,
}

impl std::fmt::Debug for OnnxBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxBackend")
            .field("channel_counts", &self.channel_counts)
            .field("normalization", &self.normalization)
            .finish_non_exhaustive()
    }
}

fn graph_err(e: impl std::fmt::Display) -> Error {
    Error::GraphLoad(format!("{e:#}"))
}

impl OnnxBackend {
    pub fn load(config: &BackendConfig) -> Result<Self> {
        config.validate()?;
        if !config.graph_path.is_file() {
            return Err(Error::GraphLoad(format!(
                "graph file {} does not exist",
                config.graph_path.display()
            )));
        }
        let mut model = tract_onnx::onnx()
            .model_for_path(&config.graph_path)
            .map_err(graph_err)?;

        let input_fact = InferenceFact::dt_shape(f32::datum_type(), tvec!(1, 3, INPUT_SIZE, INPUT_SIZE));
        let input_index = model
            .input_outlets()
            .map_err(graph_err)?
            .iter()
            .position(|o| model.node(o.node).name == config.input_name)
            .ok_or_else(|| {
                Error::GraphLoad(format!("graph has no input named `{}`", config.input_name))
            })?;
        model.set_input_fact(input_index, input_fact).map_err(graph_err)?;

        let mut outlets = Vec::with_capacity(STAGE_COUNT);
        for name in &config.tap_names {
            let outlet = model
                .find_outlet_label(name)
                .or_else(|| model.node_by_name(name).ok().map(|n| OutletId::new(n.id, 0)))
                .ok_or_else(|| Error::MissingTap(name.clone()))?;
            outlets.push(outlet);
        }
        model.select_output_outlets(&outlets).map_err(graph_err)?;

        let typed = model.into_typed().map_err(graph_err)?;
        for (stage, expected) in config.channel_counts.iter().enumerate() {
            let fact = typed.output_fact(stage).map_err(graph_err)?;
            let found = fact
                .shape
                .as_concrete()
                .and_then(|dims| dims.get(1).copied())
                .ok_or_else(|| {
                    Error::GraphLoad(format!(
                        "tap `{}` has no concrete NCHW shape: {:?}",
                        config.tap_names[stage], fact.shape
                    ))
                })?;
            if found != *expected {
                return Err(Error::ChannelMismatch {
                    stage: stage + 1,
                    expected: *expected,
                    found,
                });
            }
        }
        let plan = typed
            .into_optimized()
            .map_err(graph_err)?
            .into_runnable()
            .map_err(graph_err)?;

        Ok(Self {
            plan,
            channel_counts: config.channel_counts,
            normalization: config.normalization(),
        })
    }
}

/// Flattens an `N x C x H x W` (or `N x C` embedding) output of batch 1.
fn to_stage(value: &Tensor, expected_channels: usize) -> Result<StageTensor> {
    let shape = value.shape().to_vec();
    let (c, h, w) = match shape.as_slice() {
        [1, c, h, w] => (*c, *h, *w),
        [1, c] => (*c, 1, 1),
        other => {
            return Err(Error::InferenceFailure(format!(
                "unexpected tap shape {other:?}"
            )))
        }
    };
    if c != expected_channels {
        return Err(Error::InferenceFailure(format!(
            "tap produced {c} channels, expected {expected_channels}"
        )));
    }
    let data: Vec<f32> = value
        .try_as_plain_ram()
        .and_then(|v| v.to_array_view::<f32>().map(|a| a.iter().copied().collect()))
        .map_err(|e| Error::InferenceFailure(format!("{e:#}")))?;
    StageTensor::new(c, h, w, data)
}

impl FeatureBackend for OnnxBackend {
    fn channel_counts(&self) -> [usize; STAGE_COUNT] {
        self.channel_counts
    }

    fn normalization(&self) -> Normalization {
        self.normalization
    }

    fn extract(&self, input: &InputTensor) -> Result<FeaturePyramid> {
        let tensor = Tensor::from_shape(&[1, 3, INPUT_SIZE, INPUT_SIZE], input.data())
            .map_err(|e| Error::InferenceFailure(format!("{e:#}")))?;
        let outputs = self
            .plan
            .run(tvec!(tensor.into()))
            .map_err(|e| Error::InferenceFailure(format!("{e:#}")))?;
        let stages = outputs
            .iter()
            .zip(self.channel_counts)
            .map(|(value, channels)| to_stage(value, channels))
            .collect::<Result<Vec<_>>>()?;
        FeaturePyramid::new(stages)
    }
}
