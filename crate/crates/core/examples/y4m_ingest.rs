//! Decodes a Y4M file (or frame directory) and shows what the backbone
//! input looks like.
//!
//! ```text
//! cargo run --example y4m_ingest -- clip.y4m [frames_out_dir]
//! ```
//!
//! 8-bit 4:2:0 and 4:4:4 are supported; YCbCr is read as BT.601 limited
//! range unless the header carries `XCOLORRANGE=FULL`.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use favor::media::{load_video, preprocess, write_frame_dir, Normalization, VideoFormat};

fn demo_file(dir: &Path) -> std::io::Result<PathBuf> {
    let (w, h) = (96usize, 64usize);
    let mut bytes = format!("YUV4MPEG2 W{w} H{h} F25:1 Ip A1:1 C420jpeg\n").into_bytes();
    for k in 0..5 {
        bytes.extend_from_slice(b"FRAME\n");
        bytes.extend((0..w * h).map(|i| (16 + (i % w + 4 * k) % 200) as u8));
        bytes.extend(std::iter::repeat(128u8).take(w * h / 4));
        bytes.extend(std::iter::repeat(160u8).take(w * h / 4));
    }
    let path = dir.join("demo.y4m");
    fs::write(&path, bytes)?;
    Ok(path)
}

fn main() -> favor::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = match args.first() {
        Some(p) => PathBuf::from(p),
        None => demo_file(&env::temp_dir())?,
    };
    let video = load_video(&path, VideoFormat::detect(&path))?;
    println!("{}: {} frames of {}x{}", video.source_id(), video.len(), video.width(), video.height());

    let first = &video.frames()[0];
    println!("first pixel RGB {:?}", first.get_pixel(0, 0).0);
    let tensor = preprocess(first, &Normalization::IDENTITY)?;
    println!("input tensor 3x224x224, centre value {:.4}", tensor.at(0, 112, 112));

    if let Some(out) = args.get(1) {
        write_frame_dir(video.frames(), Path::new(out))?;
        println!("wrote {} PNG frames to {out}", video.len());
    }
    Ok(())
}
