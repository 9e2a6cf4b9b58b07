use crate::Error;

/// A 2-D raster of integer gray levels in `[0, levels - 1]`, stored row-major.
///
/// Coordinates follow matrix convention throughout the crate: `(m, n)` is
/// (row, column). `levels` is the number of representable gray levels; 256
/// for ordinary 8-bit data, but settable to tiny values so that exhaustive
/// oracles stay cheap in tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    levels: u32,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub const DEFAULT_LEVELS: u32 = 256;

    pub fn new(width: usize, height: usize, levels: u32, pixels: Vec<u16>) -> Result<Self, Error> {
        if width == 0 || height == 0 || levels < 2 {
            return Err(Error::EmptyImage);
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(Error::PixelCountMismatch {
                got: pixels.len(),
                expected,
            });
        }
        let max = (levels - 1) as u16;
        if let Some(&value) = pixels.iter().find(|&&v| v > max) {
            return Err(Error::PixelOutOfRange { value, max });
        }
        Ok(Self {
            width,
            height,
            levels,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, levels: u32, value: u16) -> Result<Self, Error> {
        Self::new(width, height, levels, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(m, n)` at every (row, column).
    pub fn from_fn(
        width: usize,
        height: usize,
        levels: u32,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self, Error> {
        let mut pixels = Vec::with_capacity(width * height);
        for m in 0..height {
            for n in 0..width {
                pixels.push(f(m, n));
            }
        }
        Self::new(width, height, levels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Largest representable gray level, `levels - 1`.
    pub fn max_level(&self) -> u16 {
        (self.levels - 1) as u16
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> u16 {
        debug_assert!(m < self.height && n < self.width);
        self.pixels[m * self.width + n]
    }

    pub fn same_shape(&self, other: &GrayImage) -> Result<(), Error> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        if self.levels != other.levels {
            return Err(Error::LevelsMismatch(self.levels, other.levels));
        }
        Ok(())
    }

    /// Promotes the pixel grid to a real-valued field.
    pub fn to_real(&self) -> RealField {
        RealField {
            width: self.width,
            height: self.height,
            values: self.pixels.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

/// A 2-D raster of real values (means, variances, SSIM maps, gradients, ...),
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, Error> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width * height;
        if values.len() != expected {
            return Err(Error::PixelCountMismatch {
                got: values.len(),
                expected,
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for m in 0..height {
            for n in 0..width {
                values.push(f(m, n));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        debug_assert!(m < self.height && n < self.width);
        self.values[m * self.width + n]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, value: f64) {
        debug_assert!(m < self.height && n < self.width);
        self.values[m * self.width + n] = value;
    }
}

/// Sliding-window geometry: the window is `(2w + 1) x (2w + 1)` around the
/// center pixel and is clipped to the image at the borders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    w: usize,
}

impl WindowSpec {
    pub fn new(w: usize) -> Result<Self, Error> {
        if w == 0 {
            return Err(Error::WindowTooSmall);
        }
        Ok(Self { w })
    }

    pub fn half_width(&self) -> usize {
        self.w
    }

    pub fn side(&self) -> usize {
        2 * self.w + 1
    }

    pub fn check_fits(&self, width: usize, height: usize) -> Result<(), Error> {
        let side = self.side();
        if side > width || side > height {
            return Err(Error::WindowTooLarge {
                side,
                width,
                height,
            });
        }
        Ok(())
    }

    /// Row range `[lo, hi]` of the window centered at row `m`, clipped to
    /// `height` rows. Column ranges use the same helper.
    #[inline]
    pub(crate) fn clip(&self, center: usize, extent: usize) -> (usize, usize) {
        let lo = center.saturating_sub(self.w);
        let hi = (center + self.w).min(extent - 1);
        (lo, hi)
    }
}
