//! PSNR, SSIM and MS-SSIM frame metrics.
//!
//! PSNR is taken over all three RGB channels. SSIM and MS-SSIM run on
//! BT.601 luma with the usual 11x11 Gaussian window (sigma 1.5), `K1 =
//! 0.01`, `K2 = 0.03` and a dynamic range of 255, using only windows that
//! fit entirely inside the image.

use image::RgbImage;

use crate::error::{Error, Result};

/// Constants of the structural-similarity family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub window: usize,
    pub sigma: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            k1: 0.01,
            k2: 0.03,
            window: 11,
            sigma: 1.5,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn kernel(&self) -> Vec<f64> {
        let half = (self.window as f64 - 1.0) / 2.0;
        let taps: Vec<f64> = (0..self.window)
            .map(|i| {
                let d = i as f64 - half;
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect();
        let total: f64 = taps.iter().sum();
        taps.into_iter().map(|t| t / total).collect()
    }
}

/// MS-SSIM per-scale exponents, finest scale first.
pub const MSSSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

fn same_dims(a: &RgbImage, b: &RgbImage) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dimensions(),
            b.dimensions()
        )));
    }
    Ok(())
}

/// PSNR in dB over all RGB samples; `+inf` for identical frames.
pub fn psnr_frame(reference: &RgbImage, distorted: &RgbImage) -> Result<f64> {
    same_dims(reference, distorted)?;
    let n = reference.as_raw().len() as f64;
    let sse: f64 = reference
        .as_raw()
        .iter()
        .zip(distorted.as_raw())
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum();
    Ok(psnr_from_mse(sse / n))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

/// A single-channel float image.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    /// BT.601 luma, unrounded.
    pub fn luma(img: &RgbImage) -> Self {
        let data = img
            .pixels()
            .map(|p| 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]))
            .collect();
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            data,
        }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Separable correlation with `taps`, keeping only full windows.
    fn filter_valid(&self, taps: &[f64]) -> Self {
        let k = taps.len();
        let ow = self.width + 1 - k;
        let oh = self.height + 1 - k;
        let mut horizontal = vec![0.0; ow * self.height];
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            for x in 0..ow {
                horizontal[y * ow + x] = taps.iter().zip(&row[x..x + k]).map(|(t, v)| t * v).sum();
            }
        }
        let mut out = vec![0.0; ow * oh];
        for y in 0..oh {
            for x in 0..ow {
                out[y * ow + x] = taps
                    .iter()
                    .enumerate()
                    .map(|(i, t)| t * horizontal[(y + i) * ow + x])
                    .sum();
            }
        }
        Self {
            width: ow,
            height: oh,
            data: out,
        }
    }

    /// 2x2 box average with stride 2; odd trailing rows/columns are dropped.
    fn downsample(&self) -> Self {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let at = |dy: usize, dx: usize| self.data[(2 * y + dy) * self.width + 2 * x + dx];
                data.push(0.25 * (at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1)));
            }
        }
        Self {
            width: w,
            height: h,
            data,
        }
    }
}

/// Mean SSIM and mean contrast-structure over all full windows.
fn ssim_components(x: &Plane, y: &Plane, params: &SsimParams) -> (f64, f64) {
    let taps = params.kernel();
    let (c1, c2) = (params.c1(), params.c2());
    let mu_x = x.filter_valid(&taps);
    let mu_y = y.filter_valid(&taps);
    let xx = x.map(|v| v * v).filter_valid(&taps);
    let yy = y.map(|v| v * v).filter_valid(&taps);
    let xy = x.zip(y, |a, b| a * b).filter_valid(&taps);

    let n = mu_x.data.len() as f64;
    let (mut ssim_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..mu_x.data.len() {
        let (mx, my) = (mu_x.data[i], mu_y.data[i]);
        let var_x = xx.data[i] - mx * mx;
        let var_y = yy.data[i] - my * my;
        let cov = xy.data[i] - mx * my;
        let luminance = (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
        let cs = (2.0 * cov + c2) / (var_x + var_y + c2);
        ssim_sum += luminance * cs;
        cs_sum += cs;
    }
    (ssim_sum / n, cs_sum / n)
}

/// Mean SSIM between two luma planes.
pub fn ssim_plane(x: &Plane, y: &Plane, params: &SsimParams) -> Result<f64> {
    if (x.width, x.height) != (y.width, y.height) {
        return Err(Error::ShapeMismatch("plane sizes differ".into()));
    }
    if x.width < params.window || x.height < params.window {
        return Err(Error::TooSmall {
            width: x.width as u32,
            height: x.height as u32,
            min: params.window as u32,
        });
    }
    Ok(ssim_components(x, y, params).0)
}

/// Mean SSIM on luma.
pub fn ssim_frame(reference: &RgbImage, distorted: &RgbImage, params: &SsimParams) -> Result<f64> {
    same_dims(reference, distorted)?;
    ssim_plane(&Plane::luma(reference), &Plane::luma(distorted), params)
}

/// Five-scale MS-SSIM on luma. Negative per-scale terms are clamped to 0
/// before exponentiation.
pub fn msssim_frame(
    reference: &RgbImage,
    distorted: &RgbImage,
    params: &SsimParams,
) -> Result<f64> {
    same_dims(reference, distorted)?;
    let min = (params.window << (MSSSIM_WEIGHTS.len() - 1)) as u32;
    let (w, h) = reference.dimensions();
    if w < min || h < min {
        return Err(Error::TooSmall {
            width: w,
            height: h,
            min,
        });
    }
    let mut x = Plane::luma(reference);
    let mut y = Plane::luma(distorted);
    let mut score = 1.0;
    for (scale, weight) in MSSSIM_WEIGHTS.iter().enumerate() {
        let (ssim, cs) = ssim_components(&x, &y, params);
        let term = if scale + 1 == MSSSIM_WEIGHTS.len() { ssim } else { cs };
        score *= term.max(0.0).powf(*weight);
        if scale + 1 < MSSSIM_WEIGHTS.len() {
            x = x.downsample();
            y = y.downsample();
        }
    }
    Ok(score)
}
