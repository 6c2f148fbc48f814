//! Scores a distorted video against its reference.
//!
//! ```text
//! cargo run --example score_pair -- ref.y4m dist.y4m [analytic|analytic:<seed>|sidecar.json]
//! ```
//!
//! Without arguments a short synthetic clip and a blockier copy are used.

use std::env;
use std::path::Path;

use favor::backend::BackendSpec;
use favor::media::FrameSequence;
use favor::pipeline::{score_files, score_pair, ScoreConfig};
use image::{Rgb, RgbImage};

fn synthetic(block: u32) -> FrameSequence {
    let frames = (0..12)
        .map(|k| {
            RgbImage::from_fn(160, 160, |x, y| {
                let (x, y) = (x / block * block, y / block * block);
                let v = 128.0 + 100.0 * ((x as f64 + 3.0 * k as f64) / 17.0).sin() * (y as f64 / 23.0).cos();
                Rgb([v as u8, (v * 0.8) as u8, 90])
            })
        })
        .collect();
    FrameSequence::new(format!("block{block}"), frames).unwrap()
}

fn main() -> favor::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let mut config = ScoreConfig { jobs: 4, ..ScoreConfig::default() };
    if let Some(spec) = args.get(2) {
        config.backend = BackendSpec::parse(spec)?;
    }
    let record = match args.as_slice() {
        [r, d, ..] => score_files("cli", Path::new(r), Path::new(d), &config)?,
        _ => score_pair("synthetic", &synthetic(1), &synthetic(4), &config)?,
    };
    for (k, (raw, refined)) in record
        .per_frame_scores
        .iter()
        .zip(record.refined_scores.as_deref().unwrap_or_default())
        .enumerate()
    {
        println!("frame {:3}  Q={raw:.6}  refined={refined:.6}", k + 1);
    }
    println!("video score {:.6}", record.video_score);
    Ok(())
}
