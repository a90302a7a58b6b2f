//! Error measurement against a double-precision reference.
//!
//! The reference for an angle is the system library's f64 sin/cos of the
//! widened f32 input, with no extra argument reduction, so kernel and
//! reference stand on the same footing for large angles. Two metrics:
//! combined error, the Euclidean distance √((Δsin)² + (Δcos)²), and
//! amplitude error, 1 − √(s² + c²), the pair's deviation from the unit
//! circle. All accumulation happens in double precision, sequentially in
//! index order, so identical specs produce identical stats bit for bit.

use crate::error::Error;
use crate::kernel::{self, CoefficientSet, PipelineConfig};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How sweep sample angles are drawn from [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `samples` equally spaced angles starting at `lo`, excluding `hi`.
    UniformGrid,
    /// `samples` independent uniform draws from a seeded deterministic
    /// stream.
    UniformRandom { seed: u64 },
}

/// A sweep over [lo, hi) with a sample count and sampling mode. The variant
/// under test comes from the [`PipelineConfig`] or [`CoefficientSet`]
/// passed alongside, keeping one source of truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub lo: f32,
    pub hi: f32,
    pub samples: usize,
    pub sampling: Sampling,
}

impl SweepSpec {
    /// The standard accuracy sweep: one full period [−π, π) on a uniform
    /// grid.
    pub fn standard(samples: usize) -> Self {
        Self {
            lo: -std::f32::consts::PI,
            hi: std::f32::consts::PI,
            samples,
            sampling: Sampling::UniformGrid,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidSweep("bounds must be finite".into()));
        }
        if self.lo >= self.hi {
            return Err(Error::InvalidSweep(format!(
                "empty range: lo={} must be strictly below hi={}",
                self.lo, self.hi
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidSweep(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    fn angles(&self) -> AngleIter {
        match self.sampling {
            Sampling::UniformGrid => AngleIter::Grid {
                lo: self.lo as f64,
                step: (self.hi as f64 - self.lo as f64) / self.samples as f64,
                i: 0,
                n: self.samples,
            },
            Sampling::UniformRandom { seed } => AngleIter::Random {
                rng: Box::new(ChaCha8Rng::seed_from_u64(seed)),
                lo: self.lo as f64,
                width: self.hi as f64 - self.lo as f64,
                i: 0,
                n: self.samples,
            },
        }
    }
}

enum AngleIter {
    Grid {
        lo: f64,
        step: f64,
        i: usize,
        n: usize,
    },
    Random {
        rng: Box<ChaCha8Rng>,
        lo: f64,
        width: f64,
        i: usize,
        n: usize,
    },
}

impl Iterator for AngleIter {
    type Item = f32;

    fn next(&mut self) -> Option<f32> {
        match self {
            AngleIter::Grid { lo, step, i, n } => {
                if *i == *n {
                    return None;
                }
                let theta = (*lo + *i as f64 * *step) as f32;
                *i += 1;
                Some(theta)
            }
            AngleIter::Random {
                rng,
                lo,
                width,
                i,
                n,
            } => {
                if *i == *n {
                    return None;
                }
                // Top 24 bits of the stream word give an exact dyadic
                // uniform in [0, 1).
                let u = (rng.next_u32() >> 8) as f64 * (1.0 / (1u32 << 24) as f64);
                *i += 1;
                Some((*lo + u * *width) as f32)
            }
        }
    }
}

/// Error statistics over one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub rms_combined: f64,
    pub max_combined: f64,
    /// Largest |1 − √(s² + c²)| observed.
    pub max_amplitude: f64,
    /// The angle at which `max_combined` occurred.
    pub worst_theta: f32,
}

/// Double-precision reference pair (sin θ, cos θ) for a single-precision
/// angle.
pub fn reference_pair(theta: f32) -> (f64, f64) {
    let t = theta as f64;
    (t.sin(), t.cos())
}

/// Euclidean distance between the kernel pair and the reference pair.
pub fn combined_error(theta: f32, cfg: PipelineConfig) -> f64 {
    combined_error_with(theta, cfg.coefficients())
}

/// [`combined_error`] for an explicit coefficient set.
pub fn combined_error_with(theta: f32, coeffs: &CoefficientSet) -> f64 {
    let p = kernel::sincos_with(theta, coeffs);
    let (rs, rc) = reference_pair(theta);
    (p.s as f64 - rs).hypot(p.c as f64 - rc)
}

/// Deviation of the kernel pair from the unit circle: 1 − √(s² + c²).
pub fn amplitude_error(theta: f32, cfg: PipelineConfig) -> f64 {
    let p = kernel::sincos(theta, cfg);
    1.0 - p.magnitude_squared().sqrt()
}

/// [`amplitude_error`] with the magnitude fix disabled, exposing the raw
/// drift the fix removes.
pub fn amplitude_error_unfixed(theta: f32, cfg: PipelineConfig) -> f64 {
    let p = kernel::sincos_unfixed(theta, cfg);
    1.0 - p.magnitude_squared().sqrt()
}

/// Runs a sweep with the shipped coefficients for `cfg`'s variant.
pub fn sweep(spec: &SweepSpec, cfg: PipelineConfig) -> Result<ErrorStats, Error> {
    sweep_with(spec, cfg.coefficients())
}

/// Runs a sweep with an explicit coefficient set.
pub fn sweep_with(spec: &SweepSpec, coeffs: &CoefficientSet) -> Result<ErrorStats, Error> {
    spec.validate()?;
    let mut sum_sq = 0.0f64;
    let mut max_combined = 0.0f64;
    let mut max_amplitude = 0.0f64;
    let mut worst_theta = spec.lo;
    for theta in spec.angles() {
        let p = kernel::sincos_with(theta, coeffs);
        let (rs, rc) = reference_pair(theta);
        let ds = p.s as f64 - rs;
        let dc = p.c as f64 - rc;
        let combined_sq = ds * ds + dc * dc;
        sum_sq += combined_sq;
        if combined_sq > max_combined {
            max_combined = combined_sq;
            worst_theta = theta;
        }
        let amplitude = (1.0 - p.magnitude_squared().sqrt()).abs();
        if amplitude > max_amplitude {
            max_amplitude = amplitude;
        }
    }
    Ok(ErrorStats {
        rms_combined: (sum_sq / spec.samples as f64).sqrt(),
        max_combined: max_combined.sqrt(),
        max_amplitude,
        worst_theta,
    })
}
