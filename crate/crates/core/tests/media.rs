mod common;

use std::fs;

use favor::media::{
    load_video, preprocess, write_frame_dir, ycbcr_to_rgb, ColorRange, Normalization,
    VideoFormat, INPUT_SIZE,
};
use favor::Error;
use image::{Rgb, RgbImage};
use proptest::prelude::*;

use common::*;

#[test]
fn y4m_matches_independent_decoder() {
    let dir = tempfile::tempdir().unwrap();
    for (name, w, h) in [("even.y4m", 64, 48), ("odd.y4m", 45, 37)] {
        let path = dir.path().join(name);
        let frames: Vec<_> = (0..3).map(|k| rgb_to_yuv420(&scene(w, h, k))).collect();
        write_y4m(&path, w as usize, h as usize, "420jpeg", "", &frames);
        let ours = load_video(&path, VideoFormat::Y4m).unwrap();
        let oracle = oracle_decode_y4m(&path);
        assert_eq!(ours.len(), oracle.len());
        for (a, b) in ours.frames().iter().zip(&oracle) {
            assert!(max_abs_diff(a, b) <= 1, "{name}");
        }
    }
}

#[test]
fn y4m_round_trip_is_close_to_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip.y4m");
    let src = scene(64, 64, 0);
    write_y4m(&path, 64, 64, "420", "", &[rgb_to_yuv420(&src)]);
    let decoded = load_video(&path, VideoFormat::Y4m).unwrap();
    // chroma subsampling of a smooth scene costs only a few code values
    assert!(max_abs_diff(&decoded.frames()[0], &src) <= 12);
}

#[test]
fn full_range_header_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("full.y4m");
    let planes = [vec![255u8; 16 * 16], vec![128u8; 64], vec![128u8; 64]];
    write_y4m(&path, 16, 16, "420", " XCOLORRANGE=FULL", &[planes.clone()]);
    let seq = load_video(&path, VideoFormat::Y4m).unwrap();
    assert_eq!(seq.frames()[0].get_pixel(3, 3).0, [255, 255, 255]);
    assert_eq!(oracle_decode_y4m(&path)[0], seq.frames()[0]);

    let limited = dir.path().join("limited.y4m");
    write_y4m(&limited, 16, 16, "420", "", &[planes]);
    let seq = load_video(&limited, VideoFormat::Y4m).unwrap();
    assert_eq!(seq.frames()[0].get_pixel(3, 3).0, [255, 255, 255]);
}

#[test]
fn yuv444_is_accepted_and_422_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c444.y4m");
    let planes = [vec![100u8; 64], vec![90u8; 64], vec![200u8; 64]];
    write_y4m(&path, 8, 8, "444", "", &[planes]);
    let seq = load_video(&path, VideoFormat::Y4m).unwrap();
    assert_eq!(seq.frames()[0], oracle_decode_y4m(&path)[0]);

    let path = dir.path().join("c422.y4m");
    write_y4m(&path, 8, 8, "422", "", &[[vec![0; 64], vec![0; 32], vec![0; 32]]]);
    assert!(matches!(
        load_video(&path, VideoFormat::Y4m),
        Err(Error::UnsupportedColorFormat(_))
    ));
}

#[test]
fn ycbcr_ramp_within_one_code_value() {
    let textbook = |y: f64, cb: f64, cr: f64| {
        let l = 1.164383 * (y - 16.0);
        let (cb, cr) = (cb - 128.0, cr - 128.0);
        [l + 1.596027 * cr, l - 0.391762 * cb - 0.812968 * cr, l + 2.017232 * cb]
    };
    for y in (16..=235).step_by(3) {
        for cb in (16..=240).step_by(7) {
            for cr in (16..=240).step_by(11) {
                let ours = ycbcr_to_rgb(y, cb, cr, ColorRange::Limited);
                let want = textbook(y.into(), cb.into(), cr.into());
                for c in 0..3 {
                    let w = want[c].round().clamp(0.0, 255.0);
                    assert!((f64::from(ours[c]) - w).abs() <= 1.0, "{y} {cb} {cr}");
                }
            }
        }
    }
}

#[test]
fn frame_dir_matches_y4m_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip.y4m");
    let frames: Vec<_> = (0..5).map(|k| rgb_to_yuv420(&scene(40, 40, k))).collect();
    write_y4m(&path, 40, 40, "420", "", &frames);
    let from_y4m = load_video(&path, VideoFormat::Y4m).unwrap();

    let frames_dir = dir.path().join("frames");
    write_frame_dir(from_y4m.frames(), &frames_dir).unwrap();
    assert_eq!(VideoFormat::detect(&frames_dir), VideoFormat::FrameDir);
    let from_dir = load_video(&frames_dir, VideoFormat::FrameDir).unwrap();
    assert_eq!(from_dir.frames(), from_y4m.frames());
}

#[test]
fn frame_dir_order_is_numeric() {
    let dir = tempfile::tempdir().unwrap();
    // written out of order, with a stray file and an unnumbered png
    for k in [12u8, 3, 1, 7, 2, 10] {
        let img = RgbImage::from_pixel(33, 33, Rgb([k, 0, 0]));
        img.save(dir.path().join(format!("{:06}.png", k))).unwrap();
    }
    fs::write(dir.path().join("notes.txt"), "x").unwrap();
    RgbImage::new(33, 33).save(dir.path().join("cover.png")).unwrap();
    let seq = load_video(dir.path(), VideoFormat::FrameDir).unwrap();
    let order: Vec<u8> = seq.frames().iter().map(|f| f.get_pixel(0, 0)[0]).collect();
    assert_eq!(order, vec![1, 2, 3, 7, 10, 12]);
}

#[test]
fn single_png_is_one_frame() {
    let dir = tempfile::tempdir().unwrap();
    write_frame_dir(&[scene(64, 64, 0)], dir.path()).unwrap();
    assert_eq!(load_video(dir.path(), VideoFormat::FrameDir).unwrap().len(), 1);
}

#[test]
fn missing_and_empty_inputs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_video(&dir.path().join("nope.y4m"), VideoFormat::Y4m),
        Err(Error::UnreadableFile { .. })
    ));
    assert!(matches!(
        load_video(dir.path(), VideoFormat::FrameDir),
        Err(Error::EmptySequence(_))
    ));
    let junk = dir.path().join("junk.y4m");
    fs::write(&junk, b"not a y4m file").unwrap();
    assert!(load_video(&junk, VideoFormat::Y4m).is_err());
}

#[test]
fn checkerboard_halving_averages_to_grey() {
    let board = RgbImage::from_fn(448, 448, |x, y| {
        if (x + y) % 2 == 0 { Rgb([255; 3]) } else { Rgb([0; 3]) }
    });
    let t = preprocess(&board, &Normalization::IDENTITY).unwrap();
    assert!(t.data().iter().all(|v| (f64::from(*v) - 0.5).abs() < 1e-6));
}

/// Direct bilinear sample at continuous source position (u, v).
fn bilinear_oracle(img: &RgbImage, x0: u32, y0: u32, side: u32, row: usize, col: usize, c: usize) -> f64 {
    let s = f64::from(side) / INPUT_SIZE as f64;
    let max = f64::from(side - 1);
    let u = ((col as f64 + 0.5) * s - 0.5).max(0.0).min(max);
    let v = ((row as f64 + 0.5) * s - 0.5).max(0.0).min(max);
    let (ui, vi) = (u.floor(), v.floor());
    let (du, dv) = (u - ui, v - vi);
    let at = |x: f64, y: f64| {
        let x = x.min(max) as u32;
        let y = y.min(max) as u32;
        f64::from(img.get_pixel(x0 + x, y0 + y)[c]) / 255.0
    };
    at(ui, vi) * (1.0 - du) * (1.0 - dv)
        + at(ui + 1.0, vi) * du * (1.0 - dv)
        + at(ui, vi + 1.0) * (1.0 - du) * dv
        + at(ui + 1.0, vi + 1.0) * du * dv
}

#[test]
fn resampling_matches_bilinear_oracle() {
    let mut r = rng(5);
    for (w, h) in [(300, 300), (97, 61), (512, 640), (224, 224), (150, 400)] {
        let img = random_frame(&mut r, w, h);
        let side = w.min(h);
        let (x0, y0) = ((w - side) / 2, (h - side) / 2);
        let t = preprocess(&img, &Normalization::IDENTITY).unwrap();
        for (row, col) in [(0, 0), (1, 223), (100, 57), (223, 223), (17, 200), (111, 112)] {
            for c in 0..3 {
                let want = bilinear_oracle(&img, x0, y0, side, row, col, c);
                assert!((f64::from(t.at(c, row, col)) - want).abs() < 1e-6, "{w}x{h} {row},{col}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_frames_stay_constant(w in 32u32..90, h in 32u32..90, v in any::<[u8; 3]>()) {
        let norm = Normalization { mean: [0.485, 0.456, 0.406], std: [0.229, 0.224, 0.225] };
        let t = preprocess(&RgbImage::from_pixel(w, h, Rgb(v)), &norm).unwrap();
        for c in 0..3 {
            let want = (f64::from(v[c]) / 255.0 - norm.mean[c]) / norm.std[c];
            for &(row, col) in &[(0, 0), (223, 0), (57, 190)] {
                prop_assert!((f64::from(t.at(c, row, col)) - want).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn resampled_values_stay_in_range(seed in any::<u64>(), w in 32u32..80, h in 32u32..80) {
        let img = random_frame(&mut rng(seed), w, h);
        let t = preprocess(&img, &Normalization::IDENTITY).unwrap();
        prop_assert!(t.data().iter().all(|v| (-1e-6..=1.0 + 1e-6).contains(&f64::from(*v))));
    }
}
