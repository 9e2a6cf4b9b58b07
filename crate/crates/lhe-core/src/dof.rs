//! The solution space of local histogram equalization.
//!
//! Sorting a sliding window and keeping the rank of the center pixel is
//! ambiguous when the window contains ties: the center pixel may legally
//! take any rank inside an interval. Mapped to output gray levels, that
//! interval becomes a per-pixel range `[lower, upper]` — the degrees of
//! freedom of the LHE result. Any image lying pointwise inside those ranges
//! is a valid LHE output.

use crate::{Error, GrayImage, WindowSpec};

/// Per-pixel integer intervals `[lower, upper]` delimiting all valid output
/// gray levels. `upper` taken alone is the classic (top-rank) LHE result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsField {
    width: usize,
    height: usize,
    levels: u32,
    lower: Vec<u16>,
    upper: Vec<u16>,
}

impl BoundsField {
    pub fn new(
        width: usize,
        height: usize,
        levels: u32,
        lower: Vec<u16>,
        upper: Vec<u16>,
    ) -> Result<Self, Error> {
        if width == 0 || height == 0 || levels < 2 {
            return Err(Error::EmptyImage);
        }
        let expected = width * height;
        if lower.len() != expected || upper.len() != expected {
            return Err(Error::InvalidBounds(format!(
                "expected {expected} entries, got {} lower / {} upper",
                lower.len(),
                upper.len()
            )));
        }
        let max = (levels - 1) as u16;
        for i in 0..expected {
            if lower[i] > upper[i] || upper[i] > max {
                return Err(Error::InvalidBounds(format!(
                    "pixel {i}: [{}, {}] not inside [0, {max}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self {
            width,
            height,
            levels,
            lower,
            upper,
        })
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

    pub fn lower(&self) -> &[u16] {
        &self.lower
    }

    pub fn upper(&self) -> &[u16] {
        &self.upper
    }

    #[inline]
    pub fn lower_at(&self, m: usize, n: usize) -> u16 {
        self.lower[m * self.width + n]
    }

    #[inline]
    pub fn upper_at(&self, m: usize, n: usize) -> u16 {
        self.upper[m * self.width + n]
    }

    pub fn matches_image(&self, image: &GrayImage) -> Result<(), Error> {
        if self.width != image.width() || self.height != image.height() {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                image.width(),
                image.height(),
            ));
        }
        if self.levels != image.levels() {
            return Err(Error::LevelsMismatch(self.levels, image.levels()));
        }
        Ok(())
    }

    /// True when `image` lies pointwise inside the intervals.
    pub fn contains(&self, image: &GrayImage) -> bool {
        self.matches_image(image).is_ok()
            && image
                .pixels()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Every interval collapsed to its upper endpoint, i.e. classic LHE.
    pub fn upper_image(&self) -> GrayImage {
        GrayImage::new(self.width, self.height, self.levels, self.upper.clone())
            .expect("upper bounds are valid pixels")
    }
}

/// Admissible ranks of a center pixel within its window, as the integer
/// interval `(lo_exclusive, hi_inclusive]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRange {
    pub lo_exclusive: u32,
    pub hi_inclusive: u32,
}

impl RankRange {
    /// Smallest admissible rank (1-based).
    pub fn min_rank(&self) -> u32 {
        self.lo_exclusive + 1
    }

    pub fn max_rank(&self) -> u32 {
        self.hi_inclusive
    }

    /// Number of admissible ranks; equals the count of window pixels sharing
    /// the center's gray level.
    pub fn width(&self) -> u32 {
        self.hi_inclusive - self.lo_exclusive
    }
}

/// A spatially uniform target cumulative histogram for local histogram
/// specification. Values must be non-negative and non-decreasing with a
/// positive final entry; any overall scale is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCumHist {
    values: Vec<f64>,
}

impl TargetCumHist {
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::InvalidTarget(
                "need at least two gray levels".into(),
            ));
        }
        let mut prev = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTarget(format!("entry {i} is {v}")));
            }
            if v < prev {
                return Err(Error::InvalidTarget(format!(
                    "entry {i} decreases ({v} < {prev})"
                )));
            }
            prev = v;
        }
        if *values.last().unwrap() <= 0.0 {
            return Err(Error::InvalidTarget("final entry must be positive".into()));
        }
        Ok(Self { values })
    }

    /// Cumulative sum of a (non-normalized) histogram.
    pub fn from_histogram(histogram: &[f64]) -> Result<Self, Error> {
        let mut acc = 0.0;
        let cum = histogram
            .iter()
            .map(|&h| {
                acc += h;
                acc
            })
            .collect();
        Self::new(cum)
    }

    /// The flat (uniform) target: specification with it is equalization.
    pub fn uniform(levels: u32) -> Self {
        Self {
            values: (1..=levels).map(f64::from).collect(),
        }
    }

    pub fn levels(&self) -> u32 {
        self.values.len() as u32
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Smallest gray level whose cumulative fraction strictly exceeds the
    /// rank fraction `count / total_count`; when none exists (fraction 1),
    /// the first level attaining the full mass. Defined this way, the
    /// uniform target reproduces plain equalization exactly, floors and
    /// caps included.
    fn invert(&self, count: u64, total_count: u64) -> u16 {
        let threshold = count as f64 * self.total();
        let scale = total_count as f64;
        for (level, &g) in self.values.iter().enumerate() {
            if g * scale > threshold {
                return level as u16;
            }
        }
        let full = self.total();
        self.values
            .iter()
            .position(|&g| g == full)
            .expect("final entry attains the total") as u16
    }
}

/// Per-row sliding histogram over the clipped window.
struct SlidingHistogram {
    counts: Vec<u32>,
    total: u32,
}

impl SlidingHistogram {
    fn new(levels: u32) -> Self {
        Self {
            counts: vec![0; levels as usize],
            total: 0,
        }
    }

    fn clear(&mut self) {
        self.counts.fill(0);
        self.total = 0;
    }

    fn add_column(&mut self, image: &GrayImage, m0: usize, m1: usize, n: usize) {
        for m in m0..=m1 {
            self.counts[image.get(m, n) as usize] += 1;
            self.total += 1;
        }
    }

    fn remove_column(&mut self, image: &GrayImage, m0: usize, m1: usize, n: usize) {
        for m in m0..=m1 {
            self.counts[image.get(m, n) as usize] -= 1;
            self.total -= 1;
        }
    }

    /// `(H(v - 1), H(v), window count)` for the current window.
    fn cumulative_at(&self, v: u16) -> (u64, u64, u64) {
        let mut below = 0u64;
        for &c in &self.counts[..v as usize] {
            below += u64::from(c);
        }
        let upto = below + u64::from(self.counts[v as usize]);
        (below, upto, u64::from(self.total))
    }
}

/// Runs `emit(m, n, H(v-1), H(v), count)` over every pixel, maintaining the
/// histogram incrementally along each row.
fn for_each_window(
    image: &GrayImage,
    win: WindowSpec,
    mut emit: impl FnMut(usize, usize, u64, u64, u64),
) {
    let (width, height) = (image.width(), image.height());
    let mut hist = SlidingHistogram::new(image.levels());
    for m in 0..height {
        let (m0, m1) = win.clip(m, height);
        hist.clear();
        let (n0, n1) = win.clip(0, width);
        for n in n0..=n1 {
            hist.add_column(image, m0, m1, n);
        }
        let w = win.half_width();
        for n in 0..width {
            if n > 0 {
                // Entering/leaving columns for center n vs n-1.
                let enter = n + w;
                if enter < width {
                    hist.add_column(image, m0, m1, enter);
                }
                if n >= w + 1 {
                    hist.remove_column(image, m0, m1, n - w - 1);
                }
            }
            let (below, upto, total) = hist.cumulative_at(image.get(m, n));
            emit(m, n, below, upto, total);
        }
    }
}

/// Admissible ranks of pixel `(m, n)` in its clipped window: the interval
/// `(H(v-1), H(v)]` of the cumulative local histogram at the center value.
pub fn rank_range(
    image: &GrayImage,
    win: WindowSpec,
    m: usize,
    n: usize,
) -> Result<RankRange, Error> {
    win.check_fits(image.width(), image.height())?;
    if m >= image.height() || n >= image.width() {
        return Err(Error::OutOfBounds {
            m,
            n,
            width: image.width(),
            height: image.height(),
        });
    }
    let (m0, m1) = win.clip(m, image.height());
    let (n0, n1) = win.clip(n, image.width());
    let mut hist = SlidingHistogram::new(image.levels());
    for nn in n0..=n1 {
        hist.add_column(image, m0, m1, nn);
    }
    let (below, upto, _) = hist.cumulative_at(image.get(m, n));
    Ok(RankRange {
        lo_exclusive: below as u32,
        hi_inclusive: upto as u32,
    })
}

#[inline]
fn equalized_level(levels: u32, count: u64, total: u64) -> u16 {
    // floor(L * count / total), capped at L - 1; exact in integers.
    let mapped = (u64::from(levels) * count) / total;
    mapped.min(u64::from(levels) - 1) as u16
}

/// The degrees of freedom of the LHE result: rank endpoints mapped linearly
/// onto `[0, L-1]` with floor and cap applied to both ends.
pub fn dof_bounds(image: &GrayImage, win: WindowSpec) -> BoundsField {
    win.check_fits(image.width(), image.height())
        .expect("window must fit image");
    let levels = image.levels();
    let count = image.width() * image.height();
    let mut lower = vec![0u16; count];
    let mut upper = vec![0u16; count];
    for_each_window(image, win, |m, n, below, upto, total| {
        let i = m * image.width() + n;
        lower[i] = equalized_level(levels, below, total);
        upper[i] = equalized_level(levels, upto, total);
    });
    BoundsField::new(image.width(), image.height(), levels, lower, upper)
        .expect("monotone cumulative histogram yields ordered bounds")
}

/// DoF bounds for local histogram specification: the rank fractions are
/// pushed through the inverse of the target cumulative histogram instead of
/// the linear map of plain equalization.
pub fn dof_bounds_specified(
    image: &GrayImage,
    win: WindowSpec,
    target: &TargetCumHist,
) -> Result<BoundsField, Error> {
    win.check_fits(image.width(), image.height())?;
    if target.levels() != image.levels() {
        return Err(Error::LevelsMismatch(image.levels(), target.levels()));
    }
    let count = image.width() * image.height();
    let mut lower = vec![0u16; count];
    let mut upper = vec![0u16; count];
    for_each_window(image, win, |m, n, below, upto, total| {
        let i = m * image.width() + n;
        lower[i] = target.invert(below, total);
        upper[i] = target.invert(upto, total);
    });
    BoundsField::new(image.width(), image.height(), image.levels(), lower, upper)
}

/// Base-2 logarithm of the solution-space size, i.e. the sum over pixels of
/// `log2(upper - lower + 1)`. The raw product overflows everything for any
/// interesting image, so only the log is offered.
pub fn solution_space_log2(bounds: &BoundsField) -> f64 {
    bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&lo, &hi)| f64::from(hi - lo + 1).log2())
        .sum()
}

/// Classic LHE: the upper endpoint of every DoF interval.
pub fn basic_lhe(image: &GrayImage, win: WindowSpec) -> GrayImage {
    dof_bounds(image, win).upper_image()
}
