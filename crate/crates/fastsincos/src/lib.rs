//! Branch-free single-precision sine and cosine pairs.
//!
//! The pipeline computes both functions of one angle at once: scale the
//! angle by 1/2π, snap to the nearest whole turn with round-ties-even and
//! keep the fraction, evaluate a short odd and a short even polynomial on
//! the quarter-angle, apply the double-angle identity twice, then rescale
//! to the unit circle with one of two magnitude fixes. Every step is
//! straight-line float arithmetic (mostly fused multiply-adds), so the
//! same code runs per scalar or per SIMD lane with bitwise-identical
//! results and data-independent timing.
//!
//! Two coefficient sets trade accuracy targets: [`Variant::Normalized`]
//! minimizes component error, [`Variant::AngleAccurate`] minimizes phase
//! error and buys a smaller worst-case combined error for the cost of one
//! division.
//!
//! ```
//! use fastsincos::{sincos, PipelineConfig};
//!
//! let pair = sincos(std::f32::consts::FRAC_PI_6, PipelineConfig::normalized());
//! assert!((pair.s - 0.5).abs() < 1e-6);
//! assert!((pair.c - 0.75f32.sqrt()).abs() < 1e-6);
//! ```
//!
//! Module map: [`kernel`] is the scalar pipeline, [`batch`] its AVX2+FMA
//! lane-parallel form, [`accuracy`] measures error against a double
//! precision reference, [`fit`] regenerates the coefficients, [`bench`]
//! times the paths.
//!
//! Accuracy is quoted for inputs within a few thousand radians of zero;
//! the single-precision turn reduction loses relative precision as |θ|
//! grows, like every f32 sine does.

pub mod accuracy;
pub mod batch;
pub mod bench;
pub mod error;
pub mod fit;
pub mod kernel;

pub use error::Error;
pub use kernel::{
    sincos, CoefficientSet, PipelineConfig, SinCosPair, Stage, Variant, ANGLE_ACCURATE_COEFFS,
    NORMALIZED_COEFFS,
};

/// Default seed for every deterministic random sweep and benchmark in the
/// crate; override per call site or with `SINCOS_SEED` in the CLI.
pub const DEFAULT_SEED: u64 = 0x5EED;
