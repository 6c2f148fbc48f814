#![allow(dead_code)]

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use favor::backend::{FeaturePyramid, StageTensor, BACKBONE_CHANNELS};
use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Smooth synthetic face-sized frame that drifts with `k`.
pub fn scene(width: u32, height: u32, k: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64 / width as f64, y as f64 / height as f64);
        let t = k as f64 * 0.07;
        let r = 128.0 + 90.0 * (6.0 * fx + t).sin() * (4.0 * fy).cos();
        let g = 110.0 + 70.0 * (5.0 * fy - t).sin();
        let b = 100.0 + 60.0 * ((fx - 0.5).powi(2) + (fy - 0.5).powi(2)).sqrt() * 3.0;
        Rgb([r as u8, g as u8, b.min(255.0) as u8])
    })
}

pub fn random_frame(rng: &mut ChaCha8Rng, width: u32, height: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |_, _| Rgb([rng.random(), rng.random(), rng.random()]))
}

/// Adds zero-mean Gaussian noise with std `sigma` (fraction of 255).
pub fn add_noise(frame: &RgbImage, sigma: f64, rng: &mut ChaCha8Rng) -> RgbImage {
    let normal = rand_distr::Normal::new(0.0, sigma * 255.0).unwrap();
    let mut out = frame.clone();
    for v in out.iter_mut() {
        let n: f64 = rng.sample(normal);
        *v = (f64::from(*v) + n).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Random pyramid with the backbone's channel counts and small maps.
pub fn random_pyramid(rng: &mut ChaCha8Rng, side: usize) -> FeaturePyramid {
    let stages = BACKBONE_CHANNELS
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let s = (side >> i).max(1);
            let data = (0..c * s * s).map(|_| rng.random_range(-2.0f32..2.0)).collect();
            StageTensor::new(c, s, s, data).unwrap()
        })
        .collect();
    FeaturePyramid::new(stages).unwrap()
}

/// Pyramid `a` perturbed elementwise by uniform noise of amplitude `amp`.
pub fn perturbed(a: &FeaturePyramid, amp: f32, rng: &mut ChaCha8Rng) -> FeaturePyramid {
    let stages = a
        .stages()
        .iter()
        .map(|s| {
            let data = s.data().iter().map(|v| v + rng.random_range(-amp..=amp)).collect();
            StageTensor::new(s.channels(), s.height(), s.width(), data).unwrap()
        })
        .collect();
    FeaturePyramid::new(stages).unwrap()
}

/// Minimal planar Y4M writer.
pub fn write_y4m(
    path: &Path,
    width: usize,
    height: usize,
    colorspace: &str,
    extra: &str,
    frames: &[[Vec<u8>; 3]],
) {
    let mut out = BufWriter::new(File::create(path).unwrap());
    write!(out, "YUV4MPEG2 W{width} H{height} F25:1 Ip A1:1 C{colorspace}{extra}\n").unwrap();
    for planes in frames {
        out.write_all(b"FRAME\n").unwrap();
        for p in planes {
            out.write_all(p).unwrap();
        }
    }
}

/// 4:2:0 planes for an RGB frame, BT.601 limited range, 2x2 chroma average.
pub fn rgb_to_yuv420(frame: &RgbImage) -> [Vec<u8>; 3] {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let ycc = |p: &Rgb<u8>| {
        let [r, g, b] = p.0.map(f64::from);
        let y = 16.0 + 65.481 * r / 255.0 + 128.553 * g / 255.0 + 24.966 * b / 255.0;
        let cb = 128.0 - 37.797 * r / 255.0 - 74.203 * g / 255.0 + 112.0 * b / 255.0;
        let cr = 128.0 + 112.0 * r / 255.0 - 93.786 * g / 255.0 - 18.214 * b / 255.0;
        (y, cb, cr)
    };
    let y: Vec<u8> = frame.pixels().map(|p| ycc(p).0.round() as u8).collect();
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut u = vec![0u8; cw * ch];
    let mut v = vec![0u8; cw * ch];
    for cy in 0..ch {
        for cx in 0..cw {
            let (mut su, mut sv, mut n) = (0.0, 0.0, 0.0);
            for dy in 0..2 {
                for dx in 0..2 {
                    let (x, yy) = (2 * cx + dx, 2 * cy + dy);
                    if x < w && yy < h {
                        let (_, cb, cr) = ycc(frame.get_pixel(x as u32, yy as u32));
                        su += cb;
                        sv += cr;
                        n += 1.0;
                    }
                }
            }
            u[cy * cw + cx] = (su / n).round() as u8;
            v[cy * cw + cx] = (sv / n).round() as u8;
        }
    }
    [y, u, v]
}

/// Independent Y4M reader for 4:2:0/4:4:4, limited range unless the header
/// carries XCOLORRANGE=FULL. Uses the textbook BT.601 matrix.
pub fn oracle_decode_y4m(path: &Path) -> Vec<RgbImage> {
    let mut bytes = Vec::new();
    File::open(path).unwrap().read_to_end(&mut bytes).unwrap();
    let eol = bytes.iter().position(|&b| b == b'\n').unwrap();
    let header = std::str::from_utf8(&bytes[..eol]).unwrap();
    let (mut w, mut h, mut sub, mut full) = (0usize, 0usize, 2usize, false);
    for tok in header.split(' ').skip(1) {
        match tok.as_bytes()[0] {
            b'W' => w = tok[1..].parse().unwrap(),
            b'H' => h = tok[1..].parse().unwrap(),
            b'C' => sub = if tok.starts_with("C444") { 1 } else { 2 },
            b'X' => full |= tok == "XCOLORRANGE=FULL",
            _ => {}
        }
    }
    let (cw, ch) = (w.div_ceil(sub), h.div_ceil(sub));
    let mut pos = eol + 1;
    let mut frames = Vec::new();
    while pos < bytes.len() {
        let eol = pos + bytes[pos..].iter().position(|&b| b == b'\n').unwrap();
        assert!(bytes[pos..eol].starts_with(b"FRAME"));
        pos = eol + 1;
        let y = &bytes[pos..pos + w * h];
        let u = &bytes[pos + w * h..pos + w * h + cw * ch];
        let v = &bytes[pos + w * h + cw * ch..pos + w * h + 2 * cw * ch];
        pos += w * h + 2 * cw * ch;
        frames.push(RgbImage::from_fn(w as u32, h as u32, |x, yy| {
            let (x, yy) = (x as usize, yy as usize);
            let c = (yy / sub) * cw + x / sub;
            let (yv, cb, cr) = (f64::from(y[yy * w + x]), f64::from(u[c]) - 128.0, f64::from(v[c]) - 128.0);
            let (r, g, b) = if full {
                (yv + 1.402 * cr, yv - 0.344136 * cb - 0.714136 * cr, yv + 1.772 * cb)
            } else {
                let l = 1.164383 * (yv - 16.0);
                (l + 1.596027 * cr, l - 0.391762 * cb - 0.812968 * cr, l + 2.017232 * cb)
            };
            let q = |t: f64| t.round().clamp(0.0, 255.0) as u8;
            Rgb([q(r), q(g), q(b)])
        }));
    }
    frames
}

pub fn max_abs_diff(a: &RgbImage, b: &RgbImage) -> u8 {
    a.as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

/// Straight channel loop: uniform weights, population moments, no shortcuts.
pub fn oracle_frame_quality(r: &FeaturePyramid, d: &FeaturePyramid, tau: f64) -> f64 {
    let total: usize = r.stages().iter().map(|s| s.channels()).sum();
    let w = 1.0 / (2.0 * total as f64);
    let mut q = 0.0;
    for (sr, sd) in r.stages().iter().zip(d.stages()) {
        let n = (sr.height() * sr.width()) as f64;
        for c in 0..sr.channels() {
            let (a, b) = (sr.channel(c), sd.channel(c));
            let mut ma = 0.0;
            let mut mb = 0.0;
            for i in 0..a.len() {
                ma += f64::from(a[i]);
                mb += f64::from(b[i]);
            }
            ma /= n;
            mb /= n;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for i in 0..a.len() {
                let (x, y) = (f64::from(a[i]) - ma, f64::from(b[i]) - mb);
                va += x * x;
                vb += y * y;
                cov += x * y;
            }
            let (sa, sb) = ((va / n).sqrt(), (vb / n).sqrt());
            let t = (2.0 * ma * mb + tau) / (ma * ma + mb * mb + tau);
            let s = (2.0 * cov / n + tau) / (sa * sa + sb * sb + tau);
            q += w * t + w * s;
        }
    }
    q
}

/// Literal per-frame memory refinement with 1-based frame numbers.
pub fn oracle_memory(raw: &[f64], l: usize, gamma: f64, sigma_w: Option<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..=raw.len() {
        if k < l {
            out.push(raw[k - 1]);
            continue;
        }
        let first = k - l + 1;
        let mut p = first;
        for j in first..=k {
            if raw[j - 1] < raw[p - 1] {
                p = j;
            }
        }
        let q_dr = raw[p - 1];
        let mut succ: Vec<(f64, usize)> = ((p + 1)..=k).map(|j| (raw[j - 1], j)).collect();
        let q_idr = if succ.is_empty() {
            q_dr
        } else {
            succ.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let sigma = sigma_w.unwrap_or((succ.len() as f64 / 2.0).max(1.0));
            let w: Vec<f64> = (1..=succ.len())
                .map(|r| (-((r - 1) as f64).powi(2) / (2.0 * sigma * sigma)).exp())
                .collect();
            let total: f64 = w.iter().sum();
            succ.iter().zip(&w).map(|((q, _), w)| q * w / total).sum()
        };
        out.push(gamma * q_dr + (1.0 - gamma) * q_idr);
    }
    out
}

/// Every series of length `len` over `values`.
pub fn all_series(values: &[f64], len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                values.iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Rank by counting: 1 + (# smaller) + (# equal others) / 2.
pub fn oracle_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&a| {
            let less = x.iter().filter(|&&b| b < a).count() as f64;
            let equal = x.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

/// Kendall tau-b from sign products and tie-group sizes.
pub fn oracle_kendall(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let sign = |d: f64| if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..i {
            s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
        }
    }
    let ties = |v: &[f64]| {
        let mut seen: Vec<f64> = Vec::new();
        let mut t = 0.0;
        for &a in v {
            if !seen.contains(&a) {
                seen.push(a);
                let c = v.iter().filter(|&&b| b == a).count() as f64;
                t += c * (c - 1.0) / 2.0;
            }
        }
        t
    };
    let n0 = (n * (n - 1) / 2) as f64;
    let d = (n0 - ties(x)) * (n0 - ties(y));
    (d > 0.0).then(|| s / d.sqrt())
}

/// SSIM by visiting every 11x11 window and taking central moments directly.
pub fn oracle_ssim(a: &RgbImage, b: &RgbImage) -> f64 {
    let luma = |img: &RgbImage| -> Vec<Vec<f64>> {
        (0..img.height())
            .map(|y| {
                (0..img.width())
                    .map(|x| {
                        let p = img.get_pixel(x, y).0;
                        0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2])
                    })
                    .collect()
            })
            .collect()
    };
    let (x, y) = (luma(a), luma(b));
    let g: Vec<f64> = (0..11).map(|i| (-((i as f64 - 5.0).powi(2)) / 4.5).exp()).collect();
    let gs: f64 = g.iter().sum();
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let (h, w) = (x.len(), x[0].len());
    let mut total = 0.0;
    let mut count = 0.0;
    for top in 0..=h - 11 {
        for left in 0..=w - 11 {
            let wt = |i: usize, j: usize| g[i] * g[j] / (gs * gs);
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    mx += wt(i, j) * x[top + i][left + j];
                    my += wt(i, j) * y[top + i][left + j];
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for i in 0..11 {
                for j in 0..11 {
                    let (dx, dy) = (x[top + i][left + j] - mx, y[top + i][left + j] - my);
                    vx += wt(i, j) * dx * dx;
                    vy += wt(i, j) * dy * dy;
                    cxy += wt(i, j) * dx * dy;
                }
            }
            total += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1.0;
        }
    }
    total / count
}
