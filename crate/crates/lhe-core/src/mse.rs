//! Closed-form best- and worst-PSNR members of a solution space.
//!
//! MSE separates over pixels, so the optimum inside per-pixel boxes is a
//! per-pixel choice: clamp toward the input for the minimum, pick the far
//! interval endpoint for the maximum.

use crate::{BoundsField, Error, GrayImage};

/// The solution closest to `image` in the MSE sense: each pixel clamped into
/// its interval.
pub fn min_mse_solution(image: &GrayImage, bounds: &BoundsField) -> GrayImage {
    bounds
        .matches_image(image)
        .expect("bounds must match image");
    let pixels = image
        .pixels()
        .iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
        .collect();
    GrayImage::new(image.width(), image.height(), image.levels(), pixels)
        .expect("clamped pixels are valid")
}

/// The solution farthest from `image` in the MSE sense: the interval endpoint
/// with the larger distance, upper endpoint on ties.
pub fn max_mse_solution(image: &GrayImage, bounds: &BoundsField) -> GrayImage {
    bounds
        .matches_image(image)
        .expect("bounds must match image");
    let pixels = image
        .pixels()
        .iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(&v, (&lo, &hi))| {
            let v = i32::from(v);
            let d_hi = (i32::from(hi) - v).abs();
            let d_lo = (i32::from(lo) - v).abs();
            if d_hi >= d_lo {
                hi
            } else {
                lo
            }
        })
        .collect();
    GrayImage::new(image.width(), image.height(), image.levels(), pixels)
        .expect("endpoint pixels are valid")
}

/// Mean squared error between two images of identical shape.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64, Error> {
    a.same_shape(b)?;
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.pixels().len() as f64)
}

/// Peak signal-to-noise ratio in dB, `10 log10((L-1)^2 / MSE)`.
///
/// Identical images have zero MSE; the result is then `f64::INFINITY`, the
/// documented "perfect match" sentinel.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64, Error> {
    let err = mse(a, b)?;
    let peak = f64::from(a.levels() - 1);
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / err).log10())
}
