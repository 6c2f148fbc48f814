//! PSNR, SSIM and MS-SSIM on a frame pair, then pooled over a clip.

use favor::baseline::{msssim_frame, psnr_frame, ssim_frame, SsimParams};
use favor::media::FrameSequence;
use favor::pipeline::{score_pair, Metric, ScoreConfig};
use favor::temporal::{PoolStrategy, Pooling};
use image::{Rgb, RgbImage};

fn frame(k: u32, shift: u8) -> RgbImage {
    RgbImage::from_fn(192, 192, |x, y| {
        let v = ((x * 3 + y * 5 + k * 2) % 200) as u8;
        Rgb([v.saturating_add(shift), v, 255 - v])
    })
}

fn main() -> favor::Result<()> {
    let params = SsimParams::default();
    let (a, b) = (frame(0, 0), frame(0, 12));
    println!("PSNR    {:.4} dB", psnr_frame(&a, &b)?);
    println!("SSIM    {:.6}", ssim_frame(&a, &b, &params)?);
    println!("MS-SSIM {:.6}", msssim_frame(&a, &b, &params)?);

    let reference = FrameSequence::new("ref", (0..6).map(|k| frame(k, 0)).collect())?;
    let distorted = FrameSequence::new("dist", (0..6).map(|k| frame(k, [0, 25, 3, 6, 2, 4][k as usize])).collect())?;
    for metric in [Metric::Psnr, Metric::Ssim, Metric::MsSsim] {
        for pooling in [Pooling::default(), Pooling::Strategy(PoolStrategy::Average)] {
            let config = ScoreConfig { metric, pooling: pooling.clone(), ..ScoreConfig::default() };
            let rec = score_pair("clip", &reference, &distorted, &config)?;
            println!("{metric:<7} {:<8} {:.4}", pooling.name(), rec.video_score);
        }
    }
    Ok(())
}
