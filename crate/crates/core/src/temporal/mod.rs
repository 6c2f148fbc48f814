//! Temporal aggregation of per-frame scores.
//!
//! The default aggregator refines every frame score with a memory effect
//! before averaging. For frame `k` (1-based) with `k >= l`, the window is
//! the last `l` frames ending at `k`:
//!
//! * the *direct* term is the window minimum (earliest frame on ties);
//! * the *indirect* term is a weighted sum over the frames that follow the
//!   worst one inside the window, weighted by a descending half-Gaussian of
//!   their quality rank among those successors (worst gets rank 1);
//! * the refined score is `gamma * direct + (1 - gamma) * indirect`.
//!
//! Frames with `k < l` keep their raw score. If the worst frame is the last
//! in its window there are no successors and the indirect term falls back
//! to the direct one. The video score is the mean refined score.
//!
//! [`pool`] provides the alternative single-shot poolers.

mod pool;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pool::{pool, replace_infinite, PoolStrategy};

/// Memory-effect parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryParams {
    /// Window length `l` in frames.
    pub window: usize,
    /// Mix between the direct (worst-frame) and indirect terms.
    pub gamma: f64,
    /// Width of the rank-weight Gaussian. `None` uses `max(1, count / 2)`
    /// for a successor set of `count` frames.
    pub sigma_w: Option<f64>,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            window: 4,
            gamma: 0.1,
            sigma_w: None,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::BadMemoryParams("window must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::BadMemoryParams(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if let Some(s) = self.sigma_w {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::BadMemoryParams(format!(
                    "sigma_w must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Raw per-frame scores and their memory-refined counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScoreSeries {
    raw: Vec<f64>,
    refined: Vec<f64>,
}

impl FrameScoreSeries {
    /// A series whose refined scores equal the raw ones.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        check_series(&raw)?;
        Ok(Self {
            refined: raw.clone(),
            raw,
        })
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn refined(&self) -> &[f64] {
        &self.refined
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

fn check_series(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    match scores.iter().position(|q| !q.is_finite()) {
        Some(i) => Err(Error::NonFiniteScore(i)),
        None => Ok(()),
    }
}

/// Default Gaussian width for a successor set of `count` frames.
pub fn default_sigma_w(count: usize) -> f64 {
    (count as f64 / 2.0).max(1.0)
}

/// Normalized weights for quality ranks `1..=count`:
/// `w_r ∝ exp(-(r - 1)^2 / (2 sigma_w^2))`.
pub fn gaussian_rank_weights(count: usize, sigma_w: Option<f64>) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let sigma = sigma_w.unwrap_or_else(|| default_sigma_w(count));
    let raw: Vec<f64> = (0..count)
        .map(|r| {
            let d = r as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Position of the worst (lowest, earliest on ties) score.
fn worst_position(window: &[f64]) -> usize {
    let mut worst = 0;
    for (i, &q) in window.iter().enumerate().skip(1) {
        if q < window[worst] {
            worst = i;
        }
    }
    worst
}

/// Rank-weighted mean of `successors` (worst first, earlier frame first on ties).
fn indirect_term(successors: &[f64], sigma_w: Option<f64>) -> f64 {
    let weights = gaussian_rank_weights(successors.len(), sigma_w);
    let mut order: Vec<usize> = (0..successors.len()).collect();
    order.sort_by(|&a, &b| successors[a].total_cmp(&successors[b]).then(a.cmp(&b)));
    order
        .iter()
        .zip(&weights)
        .map(|(&frame, &w)| w * successors[frame])
        .sum()
}

/// Applies the memory effect to every frame score.
pub fn memory_refine(raw: &[f64], params: &MemoryParams) -> Result<FrameScoreSeries> {
    check_series(raw)?;
    params.validate()?;
    let l = params.window;
    let refined = (0..raw.len())
        .map(|idx| {
            // 1-based frame number idx + 1 < l keeps its raw score
            if idx + 1 < l {
                return raw[idx];
            }
            let window = &raw[idx + 1 - l..=idx];
            let p = worst_position(window);
            let direct = window[p];
            let successors = &window[p + 1..];
            let indirect = if successors.is_empty() {
                direct
            } else {
                indirect_term(successors, params.sigma_w)
            };
            params.gamma * direct + (1.0 - params.gamma) * indirect
        })
        .collect();
    Ok(FrameScoreSeries {
        raw: raw.to_vec(),
        refined,
    })
}

/// Mean of the refined scores.
pub fn video_quality(series: &FrameScoreSeries) -> Result<f64> {
    if series.refined.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.refined.iter().sum::<f64>() / series.refined.len() as f64)
}

/// How a frame-score series becomes one video score.
#[derive(Debug, Clone, PartialEq)]
pub enum Pooling {
    Memory(MemoryParams),
    Strategy(PoolStrategy),
}

impl Default for Pooling {
    fn default() -> Self {
        Pooling::Memory(MemoryParams::default())
    }
}

/// Result of aggregating one series.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// Present only for memory pooling.
    pub refined: Option<Vec<f64>>,
    pub score: f64,
}

impl Pooling {
    /// Aggregates raw frame scores. `+inf` entries (identical-frame PSNR)
    /// are first replaced by the largest finite score in the series.
    pub fn aggregate(&self, raw: &[f64]) -> Result<Aggregate> {
        let scores = replace_infinite(raw);
        match self {
            Pooling::Memory(params) => {
                if scores.iter().all(|q| *q == f64::INFINITY) {
                    return Ok(Aggregate {
                        refined: Some(scores),
                        score: f64::INFINITY,
                    });
                }
                let series = memory_refine(&scores, params)?;
                let score = video_quality(&series)?;
                Ok(Aggregate {
                    refined: Some(series.refined),
                    score,
                })
            }
            Pooling::Strategy(strategy) => Ok(Aggregate {
                refined: None,
                score: pool(&scores, strategy)?,
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pooling::Memory(_) => "memory",
            Pooling::Strategy(s) => s.name(),
        }
    }
}
