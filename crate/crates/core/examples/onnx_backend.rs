//! Loads an exported backbone graph from its JSON sidecar and prints the
//! tap geometry.
//!
//! ```text
//! cargo run --example onnx_backend -- backbone.json
//! ```
//!
//! Defaults to the small test graph shipped with the crate's fixtures.

use std::env;
use std::path::PathBuf;

use favor::backend::{load_backend, BackendConfig};
use favor::media::preprocess;
use image::{Rgb, RgbImage};

fn main() -> favor::Result<()> {
    let sidecar = env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/onnx/tiny.json")
    });
    let config = BackendConfig::from_json_file(&sidecar)?;
    let backend = load_backend(&config)?;
    println!("graph    {}", config.graph_path.display());
    println!("channels {:?}", backend.channel_counts());

    let frame = RgbImage::from_fn(256, 256, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, 128]));
    let pyramid = backend.extract(&preprocess(&frame, &backend.normalization())?)?;
    for (name, stage) in config.tap_names.iter().zip(pyramid.stages()) {
        let mean = stage.data().iter().map(|&v| f64::from(v)).sum::<f64>() / stage.data().len() as f64;
        println!(
            "{name:<10} {:>4} x {:>3} x {:<3} mean {mean:+.4}",
            stage.channels(),
            stage.height(),
            stage.width()
        );
    }
    Ok(())
}
