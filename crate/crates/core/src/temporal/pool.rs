//! Alternative poolers used for ablation.
//!
//! These are reimplementations from the descriptions in their original
//! sources; each exposes the parameters that those sources leave open.

use crate::error::{Error, Result};

/// Single-shot pooling strategies.
#[derive(Debug, Clone, PartialEq)]
pub enum PoolStrategy {
    /// Arithmetic mean.
    Average,
    /// Mean of the lowest `percent` % of scores (at least one).
    Percentile { percent: f64 },
    /// Exponentially weighted mean favouring late frames, `w_k = e^{k/lambda}`.
    /// `lambda = None` means `L / 5`.
    Recency { lambda: Option<f64> },
    /// Same as recency with `w_k = e^{-k/lambda}`, favouring early frames.
    Primacy { lambda: Option<f64> },
    /// `mean - penalty * std` (population std).
    Variation { penalty: f64 },
    /// Memory and retention components over a `seconds`-long window:
    /// memory is the minimum over the preceding window, retention a
    /// descending half-Gaussian weighted mean of the upcoming window sorted
    /// worst-first; the per-frame score `alpha * memory + (1 - alpha) *
    /// retention` is averaged.
    Hysteresis { fps: f64, seconds: f64, alpha: f64 },
    /// Two clusters split at the series mean; the low cluster counts
    /// `low_weight` times.
    VqPooling { low_weight: f64 },
}

impl PoolStrategy {
    pub const NAMES: [&'static str; 7] = [
        "average",
        "percentile",
        "recency",
        "primacy",
        "variation",
        "hysteresis",
        "vqpooling",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PoolStrategy::Average => "average",
            PoolStrategy::Percentile { .. } => "percentile",
            PoolStrategy::Recency { .. } => "recency",
            PoolStrategy::Primacy { .. } => "primacy",
            PoolStrategy::Variation { .. } => "variation",
            PoolStrategy::Hysteresis { .. } => "hysteresis",
            PoolStrategy::VqPooling { .. } => "vqpooling",
        }
    }

    /// Builds a strategy from its name and `key=value` overrides.
    pub fn from_name(name: &str, args: &[(String, String)]) -> Result<Self> {
        let mut strategy = match name {
            "average" | "mean" => PoolStrategy::Average,
            "percentile" => PoolStrategy::Percentile { percent: 10.0 },
            "recency" => PoolStrategy::Recency { lambda: None },
            "primacy" => PoolStrategy::Primacy { lambda: None },
            "variation" => PoolStrategy::Variation { penalty: 0.5 },
            "hysteresis" => PoolStrategy::Hysteresis {
                fps: 25.0,
                seconds: 2.0,
                alpha: 0.8,
            },
            "vqpooling" => PoolStrategy::VqPooling { low_weight: 2.0 },
            other => return Err(Error::UnknownStrategy(other.to_owned())),
        };
        for (key, value) in args {
            let v: f64 = value
                .parse()
                .map_err(|_| Error::BadStrategyParam(format!("{key}={value}: not a number")))?;
            let slot = match (&mut strategy, key.as_str()) {
                (PoolStrategy::Percentile { percent }, "q" | "percent") => percent,
                (PoolStrategy::Recency { lambda }, "lambda")
                | (PoolStrategy::Primacy { lambda }, "lambda") => lambda.insert(v),
                (PoolStrategy::Variation { penalty }, "penalty") => penalty,
                (PoolStrategy::Hysteresis { fps, .. }, "fps") => fps,
                (PoolStrategy::Hysteresis { seconds, .. }, "seconds") => seconds,
                (PoolStrategy::Hysteresis { alpha, .. }, "alpha") => alpha,
                (PoolStrategy::VqPooling { low_weight }, "low_weight") => low_weight,
                _ => {
                    return Err(Error::BadStrategyParam(format!(
                        "`{key}` is not a parameter of {name}"
                    )))
                }
            };
            *slot = v;
        }
        strategy.validate()?;
        Ok(strategy)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadStrategyParam(msg));
        match *self {
            PoolStrategy::Average => Ok(()),
            PoolStrategy::Percentile { percent } if !(percent > 0.0 && percent <= 100.0) => {
                bad(format!("percent must be in (0, 100], got {percent}"))
            }
            PoolStrategy::Recency { lambda: Some(l) } | PoolStrategy::Primacy { lambda: Some(l) }
                if !(l > 0.0 && l.is_finite()) =>
            {
                bad(format!("lambda must be positive, got {l}"))
            }
            PoolStrategy::Variation { penalty } if !penalty.is_finite() => {
                bad(format!("penalty must be finite, got {penalty}"))
            }
            PoolStrategy::Hysteresis { fps, seconds, alpha }
                if !(fps > 0.0 && seconds > 0.0 && (0.0..=1.0).contains(&alpha)) =>
            {
                bad(format!(
                    "hysteresis needs fps > 0, seconds > 0, alpha in [0, 1]; got {fps}, {seconds}, {alpha}"
                ))
            }
            PoolStrategy::VqPooling { low_weight } if !(low_weight > 0.0 && low_weight.is_finite()) => {
                bad(format!("low_weight must be positive, got {low_weight}"))
            }
            _ => Ok(()),
        }
    }
}

/// Replaces `+inf` with the largest finite value in the series. A series
/// with no finite values is returned unchanged.
pub fn replace_infinite(scores: &[f64]) -> Vec<f64> {
    let max_finite = scores
        .iter()
        .copied()
        .filter(|q| q.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if max_finite == f64::NEG_INFINITY {
        return scores.to_vec();
    }
    scores
        .iter()
        .map(|&q| if q == f64::INFINITY { max_finite } else { q })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn weighted_mean(xs: &[f64], weights: impl Iterator<Item = f64>) -> f64 {
    let (num, den) = xs
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(n, d), (&x, w)| (n + w * x, d + w));
    num / den
}

fn half_gaussian(len: usize) -> impl Iterator<Item = f64> {
    let sigma = (len as f64 / 3.0).max(1.0);
    (0..len).map(move |i| {
        let d = i as f64;
        (-d * d / (2.0 * sigma * sigma)).exp()
    })
}

/// Pools a series with one of the ablation strategies.
pub fn pool(scores: &[f64], strategy: &PoolStrategy) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptySeries);
    }
    if let Some(i) = scores.iter().position(|q| q.is_nan()) {
        return Err(Error::NonFiniteScore(i));
    }
    strategy.validate()?;
    let scores = replace_infinite(scores);
    if scores.iter().any(|q| q.is_infinite()) {
        // only possible when nothing is finite
        return Ok(scores[0]);
    }
    let n = scores.len();
    let score = match *strategy {
        PoolStrategy::Average => mean(&scores),
        PoolStrategy::Percentile { percent } => {
            let mut sorted = scores.clone();
            sorted.sort_by(f64::total_cmp);
            let count = ((n as f64 * percent / 100.0).ceil() as usize).clamp(1, n);
            mean(&sorted[..count])
        }
        PoolStrategy::Recency { lambda } | PoolStrategy::Primacy { lambda } => {
            let lambda = lambda.unwrap_or(n as f64 / 5.0);
            let sign = if matches!(strategy, PoolStrategy::Recency { .. }) {
                1.0
            } else {
                -1.0
            };
            // shift the exponent so the largest weight is 1
            let last = (n - 1) as f64;
            weighted_mean(
                &scores,
                (0..n).map(|k| {
                    let k = k as f64;
                    let e = if sign > 0.0 { k - last } else { -k };
                    (e / lambda).exp()
                }),
            )
        }
        PoolStrategy::Variation { penalty } => {
            let m = mean(&scores);
            let var = scores.iter().map(|q| (q - m) * (q - m)).sum::<f64>() / n as f64;
            m - penalty * var.sqrt()
        }
        PoolStrategy::Hysteresis { fps, seconds, alpha } => {
            let span = ((fps * seconds).round() as usize).max(1);
            let per_frame: Vec<f64> = (0..n)
                .map(|t| {
                    let memory = if t == 0 {
                        scores[0]
                    } else {
                        scores[t.saturating_sub(span)..t]
                            .iter()
                            .copied()
                            .fold(f64::INFINITY, f64::min)
                    };
                    let mut upcoming = scores[t..(t + span).min(n)].to_vec();
                    upcoming.sort_by(f64::total_cmp);
                    let retention = weighted_mean(&upcoming, half_gaussian(upcoming.len()));
                    alpha * memory + (1.0 - alpha) * retention
                })
                .collect();
            mean(&per_frame)
        }
        PoolStrategy::VqPooling { low_weight } => {
            let m = mean(&scores);
            let (low, high): (Vec<f64>, Vec<f64>) = scores.iter().partition(|&&q| q < m);
            let num = low_weight * low.iter().sum::<f64>() + high.iter().sum::<f64>();
            let den = low_weight * low.len() as f64 + high.len() as f64;
            num / den
        }
    };
    Ok(score)
}
