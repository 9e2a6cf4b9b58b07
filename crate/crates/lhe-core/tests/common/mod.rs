//! Deterministic test imagery.

use lhe_core::{pgm, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 128x128 downscale of a public-domain (CC0) photograph: sky, coat and
/// tripod give homogeneous regions, grass and camera give texture — the mix
/// that makes local equalization over-enhance.
pub fn camera_photo() -> GrayImage {
    pgm::read_pgm(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/testdata/camera128.pgm"
    ))
    .expect("bundled test image decodes")
}

/// A reproducible "natural-looking" scene: smooth illumination, a couple of
/// soft blobs, one hard-edged disk, a homogeneous block, a textured patch
/// and faint sensor noise. Homogeneous regions are where plain LHE
/// over-enhances, so they matter for these tests.
pub fn natural_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fw = width as f64;
    let fh = height as f64;
    GrayImage::from_fn(width, height, 256, |m, n| {
        let y = m as f64;
        let x = n as f64;

        let mut v = 58.0
            + 52.0 * (0.5 + 0.5 * (std::f64::consts::TAU * (0.8 * x + 0.35 * y) / fw).sin())
            + 26.0 * (std::f64::consts::TAU * y / (1.37 * fh)).cos();

        let blob = |cy: f64, cx: f64, s: f64| {
            let d2 = (y - cy * fh).powi(2) + (x - cx * fw).powi(2);
            (-d2 / (2.0 * (s * fw).powi(2))).exp()
        };
        v += 58.0 * blob(0.28, 0.64, 0.11);
        v -= 40.0 * blob(0.74, 0.22, 0.16);

        // Hard-edged bright disk.
        let disk = (y - 0.36 * fh).powi(2) + (x - 0.24 * fw).powi(2);
        if disk < (0.105 * fw).powi(2) {
            v = 206.0;
        }

        // Homogeneous dark block.
        if y >= 0.62 * fh && y < 0.88 * fh && x >= 0.55 * fw && x < 0.93 * fw {
            v = 38.0;
        }

        // Fine texture patch.
        if y >= 0.06 * fh && y < 0.30 * fh && x >= 0.04 * fw && x < 0.34 * fw {
            v += 24.0 * (0.55 * y).sin() * (0.62 * x).sin();
        }

        let noise: f64 = rng.gen_range(-2.0..2.0);
        (v + noise).clamp(0.0, 255.0).round() as u16
    })
    .unwrap()
}

pub fn random_image(width: usize, height: usize, levels: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, levels, |_, _| {
        rng.gen_range(0..levels) as u16
    })
    .unwrap()
}
