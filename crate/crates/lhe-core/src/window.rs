//! Windowed statistics over clipped sliding windows.
//!
//! Sums come from integer summed-area tables, so every window sum is exact
//! and the results do not depend on evaluation order.

use crate::{GrayImage, RealField, WindowSpec};

/// Summed-area tables of pixel values and squared values, with an inclusive
/// `(hi)` / exclusive-style lookup handled by `rect_*`.
struct Integral {
    width: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl Integral {
    fn build(image: &GrayImage) -> Self {
        let (w, h) = (image.width(), image.height());
        // One extra row/column of zeros keeps the lookup branch-free.
        let stride = w + 1;
        let mut sum = vec![0u64; stride * (h + 1)];
        let mut sum_sq = vec![0u64; stride * (h + 1)];
        for m in 0..h {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            for n in 0..w {
                let v = u64::from(image.get(m, n));
                row += v;
                row_sq += v * v;
                sum[(m + 1) * stride + n + 1] = sum[m * stride + n + 1] + row;
                sum_sq[(m + 1) * stride + n + 1] = sum_sq[m * stride + n + 1] + row_sq;
            }
        }
        Self {
            width: w,
            sum,
            sum_sq,
        }
    }

    /// Sum over rows `[m0, m1]`, columns `[n0, n1]`, all inclusive.
    #[inline]
    fn rect(table: &[u64], stride: usize, m0: usize, m1: usize, n0: usize, n1: usize) -> u64 {
        table[(m1 + 1) * stride + n1 + 1] + table[m0 * stride + n0]
            - table[m0 * stride + n1 + 1]
            - table[(m1 + 1) * stride + n0]
    }

    #[inline]
    fn window(&self, m0: usize, m1: usize, n0: usize, n1: usize) -> (u64, u64, u64) {
        let stride = self.width + 1;
        let count = ((m1 - m0 + 1) * (n1 - n0 + 1)) as u64;
        (
            Self::rect(&self.sum, stride, m0, m1, n0, n1),
            Self::rect(&self.sum_sq, stride, m0, m1, n0, n1),
            count,
        )
    }
}

/// Arithmetic mean of the clipped window centered at each pixel.
pub fn local_mean(image: &GrayImage, win: WindowSpec) -> RealField {
    win.check_fits(image.width(), image.height())
        .expect("window must fit image");
    let integral = Integral::build(image);
    RealField::from_fn(image.width(), image.height(), |m, n| {
        let (m0, m1) = win.clip(m, image.height());
        let (n0, n1) = win.clip(n, image.width());
        let (s, _, count) = integral.window(m0, m1, n0, n1);
        s as f64 / count as f64
    })
}

/// Population variance of the clipped window centered at each pixel.
pub fn local_variance(image: &GrayImage, win: WindowSpec) -> RealField {
    win.check_fits(image.width(), image.height())
        .expect("window must fit image");
    let integral = Integral::build(image);
    RealField::from_fn(image.width(), image.height(), |m, n| {
        let (m0, m1) = win.clip(m, image.height());
        let (n0, n1) = win.clip(n, image.width());
        let (s, sq, count) = integral.window(m0, m1, n0, n1);
        let mean = s as f64 / count as f64;
        // E[x^2] - E[x]^2; both sums are exact integers, so cancellation
        // stays at rounding level.
        (sq as f64 / count as f64 - mean * mean).max(0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_stats(image: &GrayImage, win: WindowSpec, m: usize, n: usize) -> (f64, f64) {
        let (m0, m1) = win.clip(m, image.height());
        let (n0, n1) = win.clip(n, image.width());
        let mut values = Vec::new();
        for mm in m0..=m1 {
            for nn in n0..=n1 {
                values.push(f64::from(image.get(mm, nn)));
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / values.len() as f64;
        (mean, var)
    }

    #[test]
    fn constant_image_mean_and_variance() {
        let img = GrayImage::constant(6, 5, 256, 42).unwrap();
        let win = WindowSpec::new(2).unwrap();
        assert!(local_mean(&img, win).values().iter().all(|&v| v == 42.0));
        assert!(local_variance(&img, win).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mean_of_known_3x3_block() {
        // 10 12 25 / 25 36 47 / 47 65 77 sums to 344.
        let img = GrayImage::new(3, 3, 256, vec![10, 12, 25, 25, 36, 47, 47, 65, 77]).unwrap();
        let win = WindowSpec::new(1).unwrap();
        let mean = local_mean(&img, win);
        assert!((mean.get(1, 1) - 344.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn corner_window_is_clipped_to_four_pixels() {
        let img = GrayImage::new(3, 3, 256, vec![8, 2, 0, 4, 6, 0, 0, 0, 0]).unwrap();
        let win = WindowSpec::new(1).unwrap();
        let mean = local_mean(&img, win);
        assert_eq!(mean.get(0, 0), (8.0 + 2.0 + 4.0 + 6.0) / 4.0);
    }

    #[test]
    fn variance_of_two_level_window() {
        // A clipped corner window holding {0, 255, 255, 0} has population
        // variance 16256.25.
        let host =
            GrayImage::new(3, 3, 256, vec![0, 255, 0, 255, 0, 255, 0, 255, 0]).unwrap();
        let var = local_variance(&host, WindowSpec::new(1).unwrap());
        assert_eq!(var.get(0, 0), 16256.25);
    }

    #[test]
    fn matches_naive_double_loop_on_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..10 {
            let img =
                GrayImage::from_fn(16, 16, 256, |_, _| rng.gen_range(0..256) as u16).unwrap();
            let win = WindowSpec::new(1 + trial % 3).unwrap();
            let mean = local_mean(&img, win);
            let var = local_variance(&img, win);
            for m in 0..16 {
                for n in 0..16 {
                    let (nm, nv) = naive_stats(&img, win, m, n);
                    assert!((mean.get(m, n) - nm).abs() < 1e-9, "mean at ({m},{n})");
                    assert!((var.get(m, n) - nv).abs() < 1e-9, "variance at ({m},{n})");
                }
            }
        }
    }

    #[test]
    fn variance_nonnegative_on_random_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = GrayImage::from_fn(12, 9, 256, |_, _| rng.gen_range(0..256) as u16).unwrap();
        let var = local_variance(&img, WindowSpec::new(2).unwrap());
        assert!(var.values().iter().all(|&v| v >= 0.0));
    }
}
