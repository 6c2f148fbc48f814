//! Frame-level quality from reference/distorted feature pyramids.
//!
//! Every channel map is summarised by its spatial mean and (population)
//! standard deviation. A reference/distorted pair of maps is compared with
//! a texture term on the means and a structure term on the
//! variances/covariance:
//!
//! ```text
//! t = (2 mu_r mu_d + tau) / (mu_r^2 + mu_d^2 + tau)
//! s = (2 cov_rd    + tau) / (var_r + var_d + tau)
//! ```
//!
//! and the frame score is `sum_ij alpha_ij t_ij + beta_ij s_ij`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::backend::{FeaturePyramid, StageTensor};
use crate::error::{Error, Result};

/// Default stabilising offset for the similarity ratios.
pub const DEFAULT_TAU: f64 = 1e-6;

/// Mean and population variance of one channel map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStats {
    pub mean: f64,
    pub variance: f64,
}

impl MapStats {
    pub fn of(map: &[f32]) -> Self {
        let n = map.len() as f64;
        let mean = map.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
        let variance = map
            .iter()
            .map(|&v| {
                let d = f64::from(v) - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        Self { mean, variance }
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Per-(stage, channel) statistics of a pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    stages: Vec<Vec<MapStats>>,
}

impl ChannelStats {
    pub fn get(&self, stage: usize, channel: usize) -> MapStats {
        self.stages[stage][channel]
    }

    pub fn stages(&self) -> &[Vec<MapStats>] {
        &self.stages
    }
}

pub fn channel_stats(pyramid: &FeaturePyramid) -> ChannelStats {
    let stages = pyramid
        .stages()
        .iter()
        .map(|stage| (0..stage.channels()).map(|c| MapStats::of(stage.channel(c))).collect())
        .collect();
    ChannelStats { stages }
}

/// Population covariance of two equally shaped maps.
pub fn channel_covariance(reference: &[f32], distorted: &[f32]) -> Result<f64> {
    if reference.len() != distorted.len() || reference.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "covariance of maps with {} and {} values",
            reference.len(),
            distorted.len()
        )));
    }
    let n = reference.len() as f64;
    let mr = reference.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let md = distorted.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let sum = reference
        .iter()
        .zip(distorted)
        .map(|(&r, &d)| (f64::from(r) - mr) * (f64::from(d) - md))
        .sum::<f64>();
    Ok(sum / n)
}

#[inline]
pub fn texture_similarity(mu_r: f64, mu_d: f64, tau: f64) -> f64 {
    (2.0 * mu_r * mu_d + tau) / (mu_r * mu_r + mu_d * mu_d + tau)
}

/// Structure term from the two standard deviations and the covariance.
#[inline]
pub fn structure_similarity(sigma_r: f64, sigma_d: f64, cov: f64, tau: f64) -> f64 {
    structure_from_variances(sigma_r * sigma_r, sigma_d * sigma_d, cov, tau)
}

#[inline]
fn structure_from_variances(var_r: f64, var_d: f64, cov: f64, tau: f64) -> f64 {
    (2.0 * cov + tau) / (var_r + var_d + tau)
}

/// Texture (`alpha`) and structure (`beta`) weights per stage and channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityWeights {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    tau: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightFile {
    Split { alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>> },
    Shared(Vec<Vec<f64>>),
}

impl SimilarityWeights {
    /// Checks shapes, non-negativity, unit total mass and `tau > 0`.
    pub fn new(alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::BadWeights(format!("tau must be positive, got {tau}")));
        }
        let shape = |w: &[Vec<f64>]| w.iter().map(Vec::len).collect::<Vec<_>>();
        if shape(&alpha) != shape(&beta) {
            return Err(Error::BadWeights("alpha and beta shapes differ".into()));
        }
        let all = alpha.iter().chain(&beta).flatten();
        if all.clone().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::BadWeights("weights must be finite and non-negative".into()));
        }
        let total: f64 = all.sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { alpha, beta, tau })
    }

    /// `alpha_ij = beta_ij = 1 / (2 sum_i N_i)`.
    pub fn uniform(channel_counts: &[usize]) -> Self {
        let total: usize = channel_counts.iter().sum();
        let w = 1.0 / (2 * total) as f64;
        let grid: Vec<Vec<f64>> = channel_counts.iter().map(|&n| vec![w; n]).collect();
        Self {
            alpha: grid.clone(),
            beta: grid,
            tau: DEFAULT_TAU,
        }
    }

    /// Reads `{"alpha": [[..]..], "beta": [[..]..]}` or a bare
    /// array-of-arrays used for both terms (each then halved).
    pub fn from_json_file(path: &Path, tau: f64) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        match serde_json::from_str::<WeightFile>(&text)
            .map_err(|e| Error::BadWeights(format!("{}: {e}", path.display())))?
        {
            WeightFile::Split { alpha, beta } => Self::new(alpha, beta, tau),
            WeightFile::Shared(grid) => {
                let half: Vec<Vec<f64>> = grid
                    .iter()
                    .map(|row| row.iter().map(|w| w / 2.0).collect())
                    .collect();
                Self::new(half.clone(), half, tau)
            }
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::BadWeights(format!("tau must be positive, got {tau}")));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn zeros(channel_counts: &[usize]) -> Self {
        let grid: Vec<Vec<f64>> = channel_counts.iter().map(|&n| vec![0.0; n]).collect();
        Self {
            alpha: grid.clone(),
            beta: grid,
            tau: DEFAULT_TAU,
        }
    }

    pub fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Vec<f64>] {
        &self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn channel_counts(&self) -> Vec<usize> {
        self.alpha.iter().map(Vec::len).collect()
    }
}

fn check_stage(i: usize, r: &StageTensor, d: &StageTensor, n_weights: usize) -> Result<()> {
    if !r.same_shape(d) {
        return Err(Error::PyramidMismatch(format!(
            "stage {}: {}x{}x{} vs {}x{}x{}",
            i + 1,
            r.channels(),
            r.height(),
            r.width(),
            d.channels(),
            d.height(),
            d.width()
        )));
    }
    if r.channels() != n_weights {
        return Err(Error::PyramidMismatch(format!(
            "stage {} has {} channels but {} weights",
            i + 1,
            r.channels(),
            n_weights
        )));
    }
    Ok(())
}

/// Weighted texture/structure similarity of two pyramids, `Q` of one frame.
pub fn frame_quality(
    reference: &FeaturePyramid,
    distorted: &FeaturePyramid,
    weights: &SimilarityWeights,
) -> Result<f64> {
    let tau = weights.tau;
    let mut q = 0.0;
    for (i, (r, d)) in reference.stages().iter().zip(distorted.stages()).enumerate() {
        check_stage(i, r, d, weights.alpha[i].len())?;
        for c in 0..r.channels() {
            let (rm, dm) = (r.channel(c), d.channel(c));
            let (rs, ds) = (MapStats::of(rm), MapStats::of(dm));
            let cov = channel_covariance(rm, dm)?;
            let t = texture_similarity(rs.mean, ds.mean, tau);
            let s = structure_from_variances(rs.variance, ds.variance, cov, tau);
            q += weights.alpha[i][c] * t + weights.beta[i][c] * s;
        }
    }
    Ok(q)
}
