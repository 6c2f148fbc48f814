use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FeatureBackend, FeaturePyramid, StageTensor, BACKBONE_CHANNELS, STAGE_COUNT};
use crate::error::Result;
use crate::media::{InputTensor, Normalization, INPUT_SIZE};

/// Input channels each output channel reads from, after the first stage.
const FAN_IN: usize = 8;
const KERNEL: usize = 2;

/// One 2x2 stride-2 convolution with a sparse channel connection pattern.
#[derive(Debug, Clone)]
struct SparseConv {
    in_channels: usize,
    out_channels: usize,
    /// Per output channel: `(input channel, 2x2 kernel)` pairs.
    taps: Vec<Vec<(usize, [f32; KERNEL * KERNEL])>>,
    bias: Vec<f32>,
}

impl SparseConv {
    fn random(rng: &mut ChaCha8Rng, in_channels: usize, out_channels: usize) -> Self {
        let fan_in = in_channels.min(FAN_IN);
        let scale = 1.0 / ((fan_in * KERNEL * KERNEL) as f32).sqrt();
        let weight = Normal::new(0.0f32, 1.5 * scale).expect("finite std");
        let bias_dist = Normal::new(0.0f32, 0.1).expect("finite std");
        let mut taps = Vec::with_capacity(out_channels);
        let mut bias = Vec::with_capacity(out_channels);
        for _ in 0..out_channels {
            let mut inputs = sample(rng, in_channels, fan_in).into_vec();
            inputs.sort_unstable();
            let channel_taps = inputs
                .into_iter()
                .map(|c| {
                    let mut k = [0f32; KERNEL * KERNEL];
                    for w in &mut k {
                        *w = weight.sample(rng);
                    }
                    (c, k)
                })
                .collect();
            taps.push(channel_taps);
            bias.push(bias_dist.sample(rng));
        }
        Self {
            in_channels,
            out_channels,
            taps,
            bias,
        }
    }

    /// Valid convolution followed by `tanh`; `input` is `in_channels x h x w`.
    fn forward(&self, input: &[f32], h: usize, w: usize) -> (Vec<f32>, usize, usize) {
        debug_assert_eq!(input.len(), self.in_channels * h * w);
        let (oh, ow) = (h / KERNEL, w / KERNEL);
        let plane = h * w;
        let mut out = vec![0f32; self.out_channels * oh * ow];
        for (o, out_map) in out.chunks_exact_mut(oh * ow).enumerate() {
            out_map.fill(self.bias[o]);
            for &(c, k) in &self.taps[o] {
                let src = &input[c * plane..(c + 1) * plane];
                for oy in 0..oh {
                    let r0 = &src[(2 * oy) * w..(2 * oy + 1) * w];
                    let r1 = &src[(2 * oy + 1) * w..(2 * oy + 2) * w];
                    let dst = &mut out_map[oy * ow..(oy + 1) * ow];
                    for (ox, d) in dst.iter_mut().enumerate() {
                        let x = 2 * ox;
                        *d += k[0] * r0[x] + k[1] * r0[x + 1] + k[2] * r1[x] + k[3] * r1[x + 1];
                    }
                }
            }
            for v in out_map.iter_mut() {
                *v = v.tanh();
            }
        }
        (out, oh, ow)
    }
}

/// Deterministic five-stage test backbone.
///
/// Each stage halves the spatial grid (224 -> 112 -> 56 -> 28 -> 14 -> 7)
/// with a 2x2 stride-2 convolution and `tanh`; the fifth stage is then
/// averaged to a 1x1 grid, mimicking a pooled embedding. Channel counts
/// match the face backbone taps. Weights come from a ChaCha stream seeded
/// by `seed`, so equal seeds give identical handles on every platform.
#[derive(Debug, Clone)]
pub struct AnalyticBackend {
    seed: u64,
    layers: Vec<SparseConv>,
}

impl AnalyticBackend {
    pub const NORMALIZATION: Normalization = Normalization {
        mean: [0.5; 3],
        std: [0.5; 3],
    };

    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_channels = 3;
        let layers = BACKBONE_CHANNELS
            .iter()
            .map(|&out| {
                let layer = SparseConv::random(&mut rng, in_channels, out);
                in_channels = out;
                layer
            })
            .collect();
        Self { seed, layers }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Runs the stack on a raw `3 x size x size` tensor. `size` must be
    /// divisible by 32.
    pub fn forward(&self, input: &[f32], size: usize) -> Result<FeaturePyramid> {
        let mut stages = Vec::with_capacity(STAGE_COUNT);
        let mut current = input.to_vec();
        let (mut h, mut w) = (size, size);
        for (i, layer) in self.layers.iter().enumerate() {
            let (out, oh, ow) = layer.forward(&current, h, w);
            if i + 1 == STAGE_COUNT {
                let n = (oh * ow) as f32;
                let pooled = out
                    .chunks_exact(oh * ow)
                    .map(|m| m.iter().sum::<f32>() / n)
                    .collect();
                stages.push(StageTensor::new(layer.out_channels, 1, 1, pooled)?);
            } else {
                stages.push(StageTensor::new(layer.out_channels, oh, ow, out.clone())?);
            }
            current = out;
            h = oh;
            w = ow;
        }
        FeaturePyramid::new(stages)
    }
}

impl FeatureBackend for AnalyticBackend {
    fn channel_counts(&self) -> [usize; STAGE_COUNT] {
        BACKBONE_CHANNELS
    }

    fn normalization(&self) -> Normalization {
        Self::NORMALIZATION
    }

    fn extract(&self, input: &InputTensor) -> Result<FeaturePyramid> {
        self.forward(input.data(), INPUT_SIZE)
    }
}
