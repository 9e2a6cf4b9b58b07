//! Local histogram equalization (LHE) has many valid results: whenever a
//! sliding window contains ties, the rank of the center pixel is ambiguous
//! and the equalized value may be chosen anywhere inside a per-pixel
//! interval. This crate computes those intervals (the degrees of freedom of
//! the LHE result), searches the induced solution space for the image
//! closest to the input in the MSE or SSIM sense, applies the same machinery
//! to Stark's signed power-law enhancement, and measures the
//! contrast/similarity trade-off of the results.
//!
//! Everything here is deterministic: identical inputs produce bit-identical
//! outputs, regardless of build or thread configuration (no threading is
//! used internally).

mod error;
mod image;

pub mod dof;
pub mod harness;
pub mod mse;
pub mod opt;
pub mod pgm;
pub mod ssim;
pub mod stark;
pub mod window;

pub use error::Error;
pub use image::{GrayImage, RealField, WindowSpec};

pub use dof::{BoundsField, RankRange, TargetCumHist};
pub use harness::{SimilarityAxis, SweepMethod, SweepRecord};
pub use opt::{InitStrategy, OptTrace, OptimizerConfig, StepPolicy, Termination, TraceRecord};
pub use ssim::{SsimConfig, SsimEngine, SsimKernel};
pub use stark::{StarkConfig, StarkMetric};
