//! Structural similarity: map, index and analytic gradient.
//!
//! Local statistics are kernel correlations evaluated only where the kernel
//! support lies fully inside the image (the "valid" region), and the index
//! is the mean of the map over that region. With this convention the
//! gradient is the exact adjoint of the forward pass: a zero-padded full
//! correlation scattering the map derivatives back onto image pixels, which
//! finite differences confirm to near machine precision.
//!
//! All arithmetic is in `f64`; integer images are promoted on entry. The
//! separable passes run in a fixed order, so results are bit-reproducible.

use crate::{Error, GrayImage, RealField};

/// Smoothing kernel for the local statistics.
///
/// The box kernel reproduces plain sliding-window statistics and is the
/// natural choice when the similarity scale should match an enhancement
/// window; the 11x11 Gaussian (sigma 1.5) is the customary reporting kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsimKernel {
    Box { w: usize },
    Gaussian,
}

impl SsimKernel {
    fn taps(&self) -> Vec<f64> {
        match *self {
            SsimKernel::Box { w } => {
                let side = 2 * w + 1;
                vec![1.0 / side as f64; side]
            }
            SsimKernel::Gaussian => {
                let sigma = 1.5_f64;
                let raw: Vec<f64> = (-5..=5)
                    .map(|i| (-(i as f64 * i as f64) / (2.0 * sigma * sigma)).exp())
                    .collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            }
        }
    }
}

/// SSIM parameters: kernel, stabilizing constants and dynamic range.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimConfig {
    pub kernel: SsimKernel,
    pub c1: f64,
    pub c2: f64,
    pub dynamic_range: f64,
}

impl SsimConfig {
    /// Box kernel of half-width `w` with the conventional constants
    /// `C1 = (0.01 (L-1))^2`, `C2 = (0.03 (L-1))^2`.
    pub fn box_kernel(w: usize, levels: u32) -> Self {
        Self::with_kernel(SsimKernel::Box { w }, levels)
    }

    /// 11x11 Gaussian kernel, sigma 1.5, same constants as above.
    pub fn gaussian(levels: u32) -> Self {
        Self::with_kernel(SsimKernel::Gaussian, levels)
    }

    pub fn with_kernel(kernel: SsimKernel, levels: u32) -> Self {
        let range = f64::from(levels - 1);
        Self {
            kernel,
            c1: (0.01 * range) * (0.01 * range),
            c2: (0.03 * range) * (0.03 * range),
            dynamic_range: range,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let SsimKernel::Box { w: 0 } = self.kernel {
            return Err(Error::InvalidConfig("box kernel needs w >= 1".into()));
        }
        if !(self.c1 > 0.0) || !(self.c2 > 0.0) {
            return Err(Error::InvalidConfig(
                "stabilizing constants must be positive".into(),
            ));
        }
        if !(self.dynamic_range > 0.0) {
            return Err(Error::InvalidConfig("dynamic range must be positive".into()));
        }
        Ok(())
    }
}

/// Correlation of `src` (h x w) with separable taps, evaluated at the
/// positions where the support fits; output is (h-K+1) x (w-K+1).
fn corr_valid(src: &[f64], width: usize, height: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let vw = width - k + 1;
    let vh = height - k + 1;
    let mut tmp = vec![0.0; height * vw];
    for m in 0..height {
        for n in 0..vw {
            let mut s = 0.0;
            for (j, &t) in taps.iter().enumerate() {
                s += t * src[m * width + n + j];
            }
            tmp[m * vw + n] = s;
        }
    }
    let mut out = vec![0.0; vh * vw];
    for m in 0..vh {
        for n in 0..vw {
            let mut s = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                s += t * tmp[(m + i) * vw + n];
            }
            out[m * vw + n] = s;
        }
    }
    out
}

/// Adjoint of `corr_valid`: scatters a valid-region field back onto image
/// coordinates (zero padding outside). `src` is vh x vw, output h x w.
fn corr_adjoint(
    src: &[f64],
    vw: usize,
    vh: usize,
    taps: &[f64],
    width: usize,
    height: usize,
) -> Vec<f64> {
    // Vertical adjoint: (vh x vw) -> (h x vw).
    let mut tmp = vec![0.0; height * vw];
    for m in 0..height {
        for n in 0..vw {
            let mut s = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                if m >= i && m - i < vh {
                    s += t * src[(m - i) * vw + n];
                }
            }
            tmp[m * vw + n] = s;
        }
    }
    // Horizontal adjoint: (h x vw) -> (h x w).
    let mut out = vec![0.0; height * width];
    for m in 0..height {
        for n in 0..width {
            let mut s = 0.0;
            for (j, &t) in taps.iter().enumerate() {
                if n >= j && n - j < vw {
                    s += t * tmp[m * vw + n - j];
                }
            }
            out[m * width + n] = s;
        }
    }
    out
}

struct MapFields {
    map: Vec<f64>,
    /// d map / d sigma_xy
    d_sxy: Vec<f64>,
    /// d map / d sigma_y^2
    d_sy2: Vec<f64>,
    /// combined mean-derivative numerator (the term convolved on its own)
    f_term: Vec<f64>,
}

/// Precomputed reference-side state, reusable across many comparisons with
/// the same reference image (the optimizer evaluates hundreds).
pub struct SsimEngine {
    width: usize,
    height: usize,
    levels: u32,
    taps: Vec<f64>,
    c1: f64,
    c2: f64,
    x: Vec<f64>,
    mu_x: Vec<f64>,
    x2_corr: Vec<f64>,
    vw: usize,
    vh: usize,
}

impl SsimEngine {
    pub fn new(reference: &GrayImage, cfg: &SsimConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let taps = cfg.kernel.taps();
        let (width, height) = (reference.width(), reference.height());
        if taps.len() > width || taps.len() > height {
            return Err(Error::WindowTooLarge {
                side: taps.len(),
                width,
                height,
            });
        }
        let x: Vec<f64> = reference.pixels().iter().map(|&v| f64::from(v)).collect();
        let x2: Vec<f64> = x.iter().map(|&v| v * v).collect();
        let mu_x = corr_valid(&x, width, height, &taps);
        let x2_corr = corr_valid(&x2, width, height, &taps);
        Ok(Self {
            width,
            height,
            levels: reference.levels(),
            vw: width - taps.len() + 1,
            vh: height - taps.len() + 1,
            taps,
            c1: cfg.c1,
            c2: cfg.c2,
            x,
            mu_x,
            x2_corr,
        })
    }

    pub fn valid_width(&self) -> usize {
        self.vw
    }

    pub fn valid_height(&self) -> usize {
        self.vh
    }

    fn check_shape(&self, width: usize, height: usize) -> Result<(), Error> {
        if width != self.width || height != self.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                width,
                height,
            ));
        }
        Ok(())
    }

    fn check_image(&self, y: &GrayImage) -> Result<(), Error> {
        self.check_shape(y.width(), y.height())?;
        if y.levels() != self.levels {
            return Err(Error::LevelsMismatch(self.levels, y.levels()));
        }
        Ok(())
    }

    /// Builds the map and its partial derivatives at every valid position.
    ///
    /// The per-position algebra is grouped around `r = a / (c * d2)` so that
    /// the X- and Y-weighted gradient terms cancel bit-exactly when Y equals
    /// the reference.
    fn map_fields(&self, y: &[f64], with_derivatives: bool) -> MapFields {
        let y2: Vec<f64> = y.iter().map(|&v| v * v).collect();
        let xy: Vec<f64> = self.x.iter().zip(y).map(|(&a, &b)| a * b).collect();
        let mu_y = corr_valid(y, self.width, self.height, &self.taps);
        let y2_corr = corr_valid(&y2, self.width, self.height, &self.taps);
        let xy_corr = corr_valid(&xy, self.width, self.height, &self.taps);

        let n = self.vw * self.vh;
        let mut map = vec![0.0; n];
        let (mut d_sxy, mut d_sy2, mut f_term) = if with_derivatives {
            (vec![0.0; n], vec![0.0; n], vec![0.0; n])
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };

        for i in 0..n {
            let mux = self.mu_x[i];
            let muy = mu_y[i];
            let sx2 = self.x2_corr[i] - mux * mux;
            let sy2 = y2_corr[i] - muy * muy;
            let sxy = xy_corr[i] - mux * muy;

            let a = 2.0 * mux * muy + self.c1;
            let b = 2.0 * sxy + self.c2;
            let c = mux * mux + muy * muy + self.c1;
            let d2 = sx2 + sy2 + self.c2;
            let den = c * d2;
            let value = (a * b) / den;
            map[i] = value;

            if with_derivatives {
                let r = a / den;
                d_sxy[i] = 2.0 * r;
                d_sy2[i] = -r * (b / d2);
                f_term[i] = (2.0 * mux * (b - a) + 2.0 * muy * (c - d2) * value) / den;
            }
        }

        MapFields {
            map,
            d_sxy,
            d_sy2,
            f_term,
        }
    }

    pub fn map_real(&self, y: &RealField) -> Result<RealField, Error> {
        self.check_shape(y.width(), y.height())?;
        let fields = self.map_fields(y.values(), false);
        RealField::new(self.vw, self.vh, fields.map)
    }

    pub fn ssim_real(&self, y: &RealField) -> Result<f64, Error> {
        self.check_shape(y.width(), y.height())?;
        let fields = self.map_fields(y.values(), false);
        let n = fields.map.len() as f64;
        Ok(fields.map.iter().sum::<f64>() / n)
    }

    /// Gradient of the index with respect to every pixel of `y`; the result
    /// has image dimensions.
    pub fn gradient_real(&self, y: &RealField) -> Result<RealField, Error> {
        self.check_shape(y.width(), y.height())?;
        let fields = self.map_fields(y.values(), true);

        let back_f = corr_adjoint(
            &fields.f_term,
            self.vw,
            self.vh,
            &self.taps,
            self.width,
            self.height,
        );
        let back_sxy = corr_adjoint(
            &fields.d_sxy,
            self.vw,
            self.vh,
            &self.taps,
            self.width,
            self.height,
        );
        let back_sy2 = corr_adjoint(
            &fields.d_sy2,
            self.vw,
            self.vh,
            &self.taps,
            self.width,
            self.height,
        );

        let n = (self.vw * self.vh) as f64;
        let values = (0..self.width * self.height)
            .map(|i| (back_f[i] + back_sxy[i] * self.x[i] + 2.0 * back_sy2[i] * y.values()[i]) / n)
            .collect();
        RealField::new(self.width, self.height, values)
    }

    pub fn map_of(&self, y: &GrayImage) -> Result<RealField, Error> {
        self.check_image(y)?;
        self.map_real(&y.to_real())
    }

    pub fn ssim_of(&self, y: &GrayImage) -> Result<f64, Error> {
        self.check_image(y)?;
        self.ssim_real(&y.to_real())
    }

    pub fn gradient_of(&self, y: &GrayImage) -> Result<RealField, Error> {
        self.check_image(y)?;
        self.gradient_real(&y.to_real())
    }
}

/// Similarity map over the valid region; entry `(0, 0)` corresponds to the
/// window whose top-left corner sits at image position `(0, 0)`.
pub fn ssim_map(x: &GrayImage, y: &GrayImage, cfg: &SsimConfig) -> Result<RealField, Error> {
    SsimEngine::new(x, cfg)?.map_of(y)
}

/// Mean of the similarity map; 1 exactly iff the images are identical.
pub fn ssim(x: &GrayImage, y: &GrayImage, cfg: &SsimConfig) -> Result<f64, Error> {
    SsimEngine::new(x, cfg)?.ssim_of(y)
}

/// Gradient of `ssim(x, .)` at `y`, with image dimensions.
pub fn ssim_gradient(x: &GrayImage, y: &GrayImage, cfg: &SsimConfig) -> Result<RealField, Error> {
    SsimEngine::new(x, cfg)?.gradient_of(y)
}

/// SSIM between real-valued rasters (used by gradient checks, which probe
/// the index at off-integer points).
pub fn ssim_real(x: &RealField, y: &RealField, cfg: &SsimConfig) -> Result<f64, Error> {
    cfg.validate()?;
    let taps = cfg.kernel.taps();
    if taps.len() > x.width() || taps.len() > x.height() {
        return Err(Error::WindowTooLarge {
            side: taps.len(),
            width: x.width(),
            height: x.height(),
        });
    }
    if x.width() != y.width() || x.height() != y.height() {
        return Err(Error::DimensionMismatch(
            x.width(),
            x.height(),
            y.width(),
            y.height(),
        ));
    }
    // Build a one-off engine around the real-valued reference.
    let engine = SsimEngine {
        width: x.width(),
        height: x.height(),
        levels: 0,
        vw: x.width() - taps.len() + 1,
        vh: x.height() - taps.len() + 1,
        c1: cfg.c1,
        c2: cfg.c2,
        x: x.values().to_vec(),
        mu_x: corr_valid(x.values(), x.width(), x.height(), &taps),
        x2_corr: corr_valid(
            &x.values().iter().map(|&v| v * v).collect::<Vec<_>>(),
            x.width(),
            x.height(),
            &taps,
        ),
        taps,
    };
    engine.ssim_real(y)
}
