//! Video ingestion and backbone input preparation.
//!
//! Two container kinds are understood: YUV4MPEG2 (`.y4m`, 8-bit 4:2:0 or
//! 4:4:4) and directories of numbered PNG frames (`000001.png`, ...).
//! Both decode to a [`FrameSequence`] of 8-bit RGB rasters.
//!
//! Y4M chroma is upsampled to 4:4:4 by sample replication and converted to
//! RGB with the BT.601 matrix. Limited ("TV") range is assumed unless the
//! stream carries `XCOLORRANGE=FULL`.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the square tensor fed to the feature backbone.
pub const INPUT_SIZE: usize = 224;

/// Smallest frame side `preprocess` accepts.
pub const MIN_FRAME_SIDE: u32 = 32;

/// Decoded frames of one video, all of identical dimensions.
#[derive(Debug, Clone)]
pub struct FrameSequence {
    frames: Vec<RgbImage>,
    width: u32,
    height: u32,
    source_id: String,
}

impl FrameSequence {
    pub fn new(source_id: impl Into<String>, frames: Vec<RgbImage>) -> Result<Self> {
        let source_id = source_id.into();
        let first = frames
            .first()
            .ok_or_else(|| Error::EmptySequence(source_id.clone()))?;
        let (width, height) = first.dimensions();
        for (index, frame) in frames.iter().enumerate() {
            if frame.dimensions() != (width, height) {
                return Err(Error::InconsistentFrameSize {
                    index,
                    expected: (width, height),
                    found: frame.dimensions(),
                });
            }
        }
        Ok(Self {
            frames,
            width,
            height,
            source_id,
        })
    }

    pub fn frames(&self) -> &[RgbImage] {
        &self.frames
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of frames, `L`.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }
}

/// Container format accepted by [`load_video`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VideoFormat {
    Y4m,
    FrameDir,
}

impl VideoFormat {
    /// Directories are frame dirs, everything else is treated as Y4M.
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            VideoFormat::FrameDir
        } else {
            VideoFormat::Y4m
        }
    }
}

fn unreadable(path: &Path, reason: impl ToString) -> Error {
    Error::UnreadableFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Decodes a whole video into memory, frames in presentation order.
pub fn load_video(path: &Path, format: VideoFormat) -> Result<FrameSequence> {
    match format {
        VideoFormat::Y4m => load_y4m(path),
        VideoFormat::FrameDir => load_frame_dir(path),
    }
}

fn source_id_of(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// YCbCr quantization range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorRange {
    /// Y in [16, 235], Cb/Cr in [16, 240].
    Limited,
    /// All components in [0, 255].
    Full,
}

fn header_color_range(raw_params: &[u8]) -> ColorRange {
    let params = String::from_utf8_lossy(raw_params);
    for token in params.split_ascii_whitespace() {
        if let Some(value) = token.strip_prefix("XCOLORRANGE=") {
            if value.eq_ignore_ascii_case("FULL") {
                return ColorRange::Full;
            }
        }
    }
    ColorRange::Limited
}

fn load_y4m(path: &Path) -> Result<FrameSequence> {
    let file = File::open(path).map_err(|e| unreadable(path, e))?;
    let mut decoder = y4m::decode(BufReader::new(file)).map_err(|e| match e {
        y4m::Error::UnknownColorspace => {
            Error::UnsupportedColorFormat("unknown Y4M colorspace tag".into())
        }
        other => unreadable(path, format!("{other:?}")),
    })?;

    // (horizontal, vertical) chroma subsampling shifts
    let shift = match decoder.get_colorspace() {
        y4m::Colorspace::C420
        | y4m::Colorspace::C420jpeg
        | y4m::Colorspace::C420paldv
        | y4m::Colorspace::C420mpeg2 => (1, 1),
        y4m::Colorspace::C444 => (0, 0),
        other => return Err(Error::UnsupportedColorFormat(format!("{other:?}"))),
    };
    let range = header_color_range(decoder.get_raw_params());
    let width = decoder.get_width();
    let height = decoder.get_height();

    let mut frames = Vec::new();
    loop {
        match decoder.read_frame() {
            Ok(frame) => frames.push(yuv_to_rgb(
                width,
                height,
                shift,
                [frame.get_y_plane(), frame.get_u_plane(), frame.get_v_plane()],
                range,
            )?),
            Err(y4m::Error::EOF) => break,
            Err(e) => return Err(unreadable(path, format!("frame {}: {e:?}", frames.len()))),
        }
    }
    FrameSequence::new(source_id_of(path), frames)
}

/// Converts one planar YCbCr picture to RGB. Chroma planes are
/// `ceil(width >> sx) x ceil(height >> sy)` and upsampled by replication.
pub fn yuv_to_rgb(
    width: usize,
    height: usize,
    (sx, sy): (u32, u32),
    [y, u, v]: [&[u8]; 3],
    range: ColorRange,
) -> Result<RgbImage> {
    let cw = (width + (1 << sx) - 1) >> sx;
    let ch = (height + (1 << sy) - 1) >> sy;
    if y.len() < width * height || u.len() < cw * ch || v.len() < cw * ch {
        return Err(Error::UnsupportedColorFormat(
            "plane sizes do not match frame geometry".into(),
        ));
    }
    let mut out = RgbImage::new(width as u32, height as u32);
    for row in 0..height {
        for col in 0..width {
            let c = (row >> sy) * cw + (col >> sx);
            let rgb = ycbcr_to_rgb(y[row * width + col], u[c], v[c], range);
            out.put_pixel(col as u32, row as u32, image::Rgb(rgb));
        }
    }
    Ok(out)
}

const KR: f64 = 0.299;
const KB: f64 = 0.114;
const KG: f64 = 1.0 - KR - KB;

/// BT.601 YCbCr to 8-bit RGB, rounded and clamped.
pub fn ycbcr_to_rgb(y: u8, cb: u8, cr: u8, range: ColorRange) -> [u8; 3] {
    let (luma, pb, pr) = match range {
        ColorRange::Limited => (
            (f64::from(y) - 16.0) * 255.0 / 219.0,
            (f64::from(cb) - 128.0) * 255.0 / 224.0,
            (f64::from(cr) - 128.0) * 255.0 / 224.0,
        ),
        ColorRange::Full => (
            f64::from(y),
            f64::from(cb) - 128.0,
            f64::from(cr) - 128.0,
        ),
    };
    let r = luma + 2.0 * (1.0 - KR) * pr;
    let b = luma + 2.0 * (1.0 - KB) * pb;
    let g = luma - (2.0 * KB * (1.0 - KB) * pb + 2.0 * KR * (1.0 - KR) * pr) / KG;
    let q = |x: f64| x.round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

fn load_frame_dir(dir: &Path) -> Result<FrameSequence> {
    let entries = fs::read_dir(dir).map_err(|e| unreadable(dir, e))?;
    let mut numbered: Vec<(u64, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| unreadable(dir, e))?.path();
        let is_png = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("png"));
        if !is_png {
            continue;
        }
        let index = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok());
        if let Some(index) = index {
            numbered.push((index, path));
        }
    }
    if numbered.is_empty() {
        return Err(Error::EmptySequence(dir.display().to_string()));
    }
    numbered.sort();

    let frames = numbered
        .iter()
        .map(|(_, path)| {
            image::open(path)
                .map(|img| img.into_rgb8())
                .map_err(|e| unreadable(path, e))
        })
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(source_id_of(dir), frames)
}

/// Writes frames as `000001.png`, `000002.png`, ... into `dir`.
pub fn write_frame_dir(frames: &[RgbImage], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.join(format!("{:06}.png", i + 1));
        frame.save(&path).map_err(|e| unreadable(&path, e))?;
    }
    Ok(())
}

/// Per-channel input standardization: `(v / 255 - mean) / std`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl Normalization {
    /// Leaves pixels in [0, 1].
    pub const IDENTITY: Normalization = Normalization {
        mean: [0.0; 3],
        std: [1.0; 3],
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::BadBackendConfig(format!(
                "normalization must have finite means and positive stds, got {self:?}"
            )))
        }
    }

    #[inline]
    pub fn apply(&self, channel: usize, unit_value: f64) -> f64 {
        (unit_value - self.mean[channel]) / self.std[channel]
    }
}

/// A `3 x 224 x 224` channel-major float tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    data: Vec<f32>,
    pub origin_frame_index: usize,
}

impl InputTensor {
    pub const SHAPE: [usize; 3] = [3, INPUT_SIZE, INPUT_SIZE];

    pub fn from_vec(data: Vec<f32>, origin_frame_index: usize) -> Result<Self> {
        let expected = 3 * INPUT_SIZE * INPUT_SIZE;
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "input tensor has {} values, expected {expected}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch(format!(
                "input tensor value {i} is not finite"
            )));
        }
        Ok(Self {
            data,
            origin_frame_index,
        })
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, channel: usize, row: usize, col: usize) -> f32 {
        self.data[(channel * INPUT_SIZE + row) * INPUT_SIZE + col]
    }
}

/// Center-crops to the short side, bilinearly resamples to 224x224, maps
/// to [0, 1] and standardizes per channel.
pub fn preprocess(frame: &RgbImage, norm: &Normalization) -> Result<InputTensor> {
    preprocess_indexed(frame, norm, 0)
}

pub fn preprocess_indexed(
    frame: &RgbImage,
    norm: &Normalization,
    origin_frame_index: usize,
) -> Result<InputTensor> {
    let (width, height) = frame.dimensions();
    if width < MIN_FRAME_SIDE || height < MIN_FRAME_SIDE {
        return Err(Error::DegenerateFrame {
            width,
            height,
            min: MIN_FRAME_SIDE,
        });
    }
    let side = width.min(height);
    let x0 = (width - side) / 2;
    let y0 = (height - side) / 2;

    let taps = bilinear_taps(side as usize, INPUT_SIZE);
    let mut data = vec![0f32; 3 * INPUT_SIZE * INPUT_SIZE];
    for (row, &(r0, r1, fy)) in taps.iter().enumerate() {
        for (col, &(c0, c1, fx)) in taps.iter().enumerate() {
            let px = |r: usize, c: usize| frame.get_pixel(x0 + c as u32, y0 + r as u32).0;
            let (p00, p01, p10, p11) = (px(r0, c0), px(r0, c1), px(r1, c0), px(r1, c1));
            for ch in 0..3 {
                let top = f64::from(p00[ch]) * (1.0 - fx) + f64::from(p01[ch]) * fx;
                let bottom = f64::from(p10[ch]) * (1.0 - fx) + f64::from(p11[ch]) * fx;
                let value = (top * (1.0 - fy) + bottom * fy) / 255.0;
                data[(ch * INPUT_SIZE + row) * INPUT_SIZE + col] = norm.apply(ch, value) as f32;
            }
        }
    }
    InputTensor::from_vec(data, origin_frame_index)
}

/// Half-pixel-centred bilinear source taps `(lo, hi, frac)` for resampling
/// `src` samples onto `dst` samples. Edges clamp.
fn bilinear_taps(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(src - 1);
            (lo, hi, pos - lo as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_frame_stays_constant() {
        let frame = RgbImage::from_pixel(300, 300, image::Rgb([128, 128, 128]));
        let t = preprocess(&frame, &Normalization::IDENTITY).unwrap();
        let expected = 128.0 / 255.0;
        assert!(t.data().iter().all(|v| (f64::from(*v) - expected).abs() < 1e-6));
    }

    #[test]
    fn standardization_uses_config_stats() {
        let frame = RgbImage::from_pixel(64, 64, image::Rgb([255, 0, 51]));
        let norm = Normalization {
            mean: [0.5, 0.5, 0.5],
            std: [0.25, 0.5, 1.0],
        };
        let t = preprocess(&frame, &norm).unwrap();
        assert!((t.at(0, 10, 10) - 2.0).abs() < 1e-6);
        assert!((t.at(1, 10, 10) + 1.0).abs() < 1e-6);
        assert!((t.at(2, 10, 10) + 0.3).abs() < 1e-6);
    }

    #[test]
    fn rejects_tiny_frames() {
        let frame = RgbImage::new(31, 100);
        assert!(matches!(
            preprocess(&frame, &Normalization::IDENTITY),
            Err(Error::DegenerateFrame { width: 31, .. })
        ));
    }

    #[test]
    fn non_square_frames_are_center_cropped() {
        // left and right thirds differ; only the middle third survives the crop
        let mut frame = RgbImage::from_pixel(300, 100, image::Rgb([0, 0, 0]));
        for y in 0..100 {
            for x in 100..200 {
                frame.put_pixel(x, y, image::Rgb([255, 255, 255]));
            }
        }
        let t = preprocess(&frame, &Normalization::IDENTITY).unwrap();
        assert!(t.data().iter().all(|v| (*v - 1.0).abs() < 1e-6));
    }

    #[test]
    fn identity_resample_at_native_size() {
        let mut frame = RgbImage::new(224, 224);
        for (x, y, p) in frame.enumerate_pixels_mut() {
            *p = image::Rgb([(x % 256) as u8, (y % 256) as u8, ((x * y) % 256) as u8]);
        }
        let t = preprocess(&frame, &Normalization::IDENTITY).unwrap();
        for &(r, c) in &[(0usize, 0usize), (17, 200), (223, 223)] {
            let p = frame.get_pixel(c as u32, r as u32).0;
            for ch in 0..3 {
                assert_eq!(t.at(ch, r, c), (f64::from(p[ch]) / 255.0) as f32);
            }
        }
    }

    #[test]
    fn bt601_primaries() {
        // limited-range white, black and red
        assert_eq!(ycbcr_to_rgb(235, 128, 128, ColorRange::Limited), [255, 255, 255]);
        assert_eq!(ycbcr_to_rgb(16, 128, 128, ColorRange::Limited), [0, 0, 0]);
        let red = ycbcr_to_rgb(81, 90, 240, ColorRange::Limited);
        assert!(red[0] >= 254 && red[1] <= 1 && red[2] <= 1, "{red:?}");
        assert_eq!(ycbcr_to_rgb(255, 128, 128, ColorRange::Full), [255, 255, 255]);
    }

    #[test]
    fn color_range_from_header() {
        assert_eq!(header_color_range(b"W4 H4 F25:1 XCOLORRANGE=FULL"), ColorRange::Full);
        assert_eq!(header_color_range(b"W4 H4 F25:1"), ColorRange::Limited);
    }

    #[test]
    fn sequence_rejects_mixed_sizes() {
        let frames = vec![RgbImage::new(40, 40), RgbImage::new(40, 41)];
        assert!(matches!(
            FrameSequence::new("x", frames),
            Err(Error::InconsistentFrameSize { index: 1, .. })
        ));
        assert!(matches!(FrameSequence::new("x", vec![]), Err(Error::EmptySequence(_))));
    }
}
