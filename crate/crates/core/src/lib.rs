//! Full-reference quality assessment for compressed face videos.
//!
//! The FAVOR index scores each distorted frame against its reference by
//! comparing channel statistics of deep feature pyramids, then aggregates
//! the per-frame scores with a memory-effect model of how viewers carry the
//! worst recent quality forward. Around that core the crate provides
//! alternative temporal poolers, PSNR/SSIM/MS-SSIM baselines, MOS
//! computation from raw ratings, and a correlation benchmark harness.
//!
//! ```no_run
//! use std::path::Path;
//! use favor::pipeline::{score_files, ScoreConfig};
//!
//! let record = score_files(
//!     "clip01",
//!     Path::new("ref.y4m"),
//!     Path::new("dist.y4m"),
//!     &ScoreConfig::default(),
//! )?;
//! println!("{:.4}", record.video_score);
//! # Ok::<(), favor::Error>(())
//! ```

pub mod backend;
pub mod baseline;
pub mod error;
pub mod eval;
pub mod media;
pub mod output;
pub mod pipeline;
pub mod quality;
pub mod subjective;
pub mod temporal;

pub use error::{Error, Result};
