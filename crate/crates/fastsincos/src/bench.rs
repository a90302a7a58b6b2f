//! Wall-clock throughput measurement for the evaluation paths.
//!
//! Methodology: one repetition evaluates a whole pre-generated batch; the
//! reported time is the median over repetitions after discarded warmups,
//! which shrugs off scheduler noise without hiding systematic cost. Inputs
//! and outputs pass through [`std::hint::black_box`] so the compiler cannot
//! hoist or discard the work, and each path's output checksum is kept both
//! as a second dead-code guard and as a cross-check: the three kernel paths
//! must agree bitwise, so their checksums must too.
//!
//! Numbers from this harness are comparable on one machine in one session.
//! Pin the process to a core and use a release build before quoting them.

use crate::batch;
use crate::error::Error;
use crate::kernel::{self, PipelineConfig, Variant};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::hint::black_box;
use std::time::Instant;

/// A repetition must run at least this many times longer than the measured
/// timer granularity to be trusted.
const MIN_TIMER_MULTIPLE: u64 = 100;

/// An evaluation path the harness can time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchPath {
    /// One scalar kernel call per element.
    Scalar,
    /// The lane-parallel batch entry point.
    Batch,
    /// The batch entry point with two lane groups in flight.
    Interleaved,
    /// `f32::sin` and `f32::cos` from the system math library, for scale.
    LibmBaseline,
}

impl BenchPath {
    pub const ALL: [BenchPath; 4] = [
        BenchPath::Scalar,
        BenchPath::Batch,
        BenchPath::Interleaved,
        BenchPath::LibmBaseline,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BenchPath::Scalar => "scalar",
            BenchPath::Batch => "batch",
            BenchPath::Interleaved => "interleaved",
            BenchPath::LibmBaseline => "libm-baseline",
        }
    }

    pub fn parse(s: &str) -> Option<BenchPath> {
        Self::ALL.into_iter().find(|p| p.label() == s)
    }
}

/// What to run: batch size, repetition counts, paths, and which coefficient
/// set the kernel paths use.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub batch_size: usize,
    pub repetitions: usize,
    pub warmup_repetitions: usize,
    pub paths: Vec<BenchPath>,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            batch_size: 65_536,
            repetitions: 9,
            warmup_repetitions: 3,
            paths: BenchPath::ALL.to_vec(),
            variant: Variant::Normalized,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl BenchSpec {
    fn validate(&self) -> Result<(), Error> {
        if self.repetitions < 3 {
            return Err(Error::InvalidBenchSpec(format!(
                "repetitions {} cannot support a median; need at least 3",
                self.repetitions
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidBenchSpec("batch_size must be nonzero".into()));
        }
        if self.paths.is_empty() {
            return Err(Error::InvalidBenchSpec("no paths requested".into()));
        }
        Ok(())
    }
}

/// Median timing for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTiming {
    pub path: BenchPath,
    /// Coefficient set the path ran with; `None` for the libm baseline.
    pub variant: Option<Variant>,
    pub ns_per_pair: f64,
    pub pairs_per_second: f64,
    /// Median TSC cycles per pair on x86-64, `None` elsewhere.
    pub cycles_per_pair: Option<f64>,
    /// Sum of every output component, as a dead-code guard and a bitwise
    /// cross-check between kernel paths.
    pub checksum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// CPU model plus detected features, best effort.
    pub machine: String,
    pub batch_size: usize,
    pub repetitions: usize,
    pub timings: Vec<PathTiming>,
    /// Batch-path cost of the angle-accurate set relative to the normalized
    /// set (the price of the reciprocal magnitude fix).
    pub reciprocal_cost_ratio: Option<f64>,
}

struct Measurement {
    median_ns: f64,
    median_cycles: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(target_arch = "x86_64")]
fn cycle_counter() -> Option<u64> {
    // SAFETY: RDTSC is unprivileged and always present on x86-64.
    Some(unsafe { std::arch::x86_64::_rdtsc() })
}

#[cfg(not(target_arch = "x86_64"))]
fn cycle_counter() -> Option<u64> {
    None
}

/// Smallest nonzero gap between consecutive `Instant::now` readings,
/// floored at 10 ns so an optimistic clock cannot disable the coarseness
/// guard.
fn timer_resolution_ns() -> u64 {
    let mut min_gap = u64::MAX;
    for _ in 0..1000 {
        let a = Instant::now();
        let b = Instant::now();
        let gap = b.duration_since(a).as_nanos() as u64;
        if gap > 0 && gap < min_gap {
            min_gap = gap;
        }
    }
    min_gap.clamp(10, 1_000_000)
}

fn time_reps(
    mut run: impl FnMut(),
    repetitions: usize,
    warmup: usize,
) -> Result<Measurement, Error> {
    for _ in 0..warmup {
        run();
    }
    let mut ns = Vec::with_capacity(repetitions);
    let mut cycles = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let c0 = cycle_counter();
        let t0 = Instant::now();
        run();
        let elapsed = t0.elapsed().as_nanos() as f64;
        let c1 = cycle_counter();
        ns.push(elapsed);
        if let (Some(a), Some(b)) = (c0, c1) {
            cycles.push(b.wrapping_sub(a) as f64);
        }
    }
    let median_ns = median(ns);
    let resolution = timer_resolution_ns();
    if (median_ns as u64) < MIN_TIMER_MULTIPLE * resolution {
        return Err(Error::TimerTooCoarse {
            resolution_ns: resolution,
            sample_ns: median_ns as u64,
        });
    }
    Ok(Measurement {
        median_ns,
        median_cycles: (!cycles.is_empty()).then(|| median(cycles)),
    })
}

fn random_angles(n: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = (rng.next_u32() >> 8) as f64 * (1.0 / (1u64 << 24) as f64);
            (-PI + u * (2.0 * PI)) as f32
        })
        .collect()
}

/// A zeroed buffer of `len` floats whose data starts at byte `page_offset`
/// within a 4 KiB page. Keeping the input and output streams at fixed,
/// well-separated page offsets stops allocator placement from deciding 4K
/// store/load aliasing, which otherwise skews path comparisons by a few
/// percent per process.
fn page_offset_buffer(len: usize, page_offset: usize) -> (Vec<f32>, usize) {
    let v = vec![0.0f32; len + 1024];
    let start = (4096 + page_offset - v.as_ptr() as usize % 4096) % 4096 / 4;
    (v, start)
}

fn checksum(sines: &[f32], cosines: &[f32]) -> f64 {
    sines
        .iter()
        .chain(cosines)
        .map(|&v| v as f64)
        .sum()
}

fn machine_description() -> String {
    let model = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|info| {
            info.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|s| s.trim().to_string())
        })
        .unwrap_or_else(|| std::env::consts::ARCH.to_string());
    #[cfg(target_arch = "x86_64")]
    {
        let wide = std::arch::is_x86_feature_detected!("avx2")
            && std::arch::is_x86_feature_detected!("fma");
        format!(
            "{model} ({})",
            if wide { "avx2+fma" } else { "scalar only" }
        )
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        format!("{model} (scalar only)")
    }
}

fn measure_path(
    path: BenchPath,
    angles: &[f32],
    cfg: PipelineConfig,
    repetitions: usize,
    warmup: usize,
) -> Result<PathTiming, Error> {
    let n = angles.len();
    let (mut sines_buf, s0) = page_offset_buffer(n, 1088);
    let (mut cosines_buf, c0) = page_offset_buffer(n, 2176);
    let m = {
        let run = |sines: &mut [f32], cosines: &mut [f32]| match path {
            BenchPath::Scalar => {
                for (i, &theta) in black_box(angles).iter().enumerate() {
                    let p = kernel::sincos(theta, cfg);
                    sines[i] = p.s;
                    cosines[i] = p.c;
                }
            }
            BenchPath::Batch => {
                batch::sincos_batch_into(black_box(angles), cfg, sines, cosines);
            }
            BenchPath::Interleaved => {
                batch::sincos_batch_interleaved_into(black_box(angles), cfg, sines, cosines);
            }
            BenchPath::LibmBaseline => {
                for (i, &theta) in black_box(angles).iter().enumerate() {
                    sines[i] = theta.sin();
                    cosines[i] = theta.cos();
                }
            }
        };
        time_reps(
            || {
                let sines = &mut sines_buf[s0..s0 + n];
                let cosines = &mut cosines_buf[c0..c0 + n];
                run(sines, cosines);
                black_box((sines.first(), cosines.first()));
            },
            repetitions,
            warmup,
        )?
    };
    let ns_per_pair = m.median_ns / n as f64;
    Ok(PathTiming {
        path,
        variant: match path {
            BenchPath::LibmBaseline => None,
            _ => Some(cfg.variant),
        },
        ns_per_pair,
        pairs_per_second: 1e9 / ns_per_pair,
        cycles_per_pair: m.median_cycles.map(|c| c / n as f64),
        checksum: checksum(&sines_buf[s0..s0 + n], &cosines_buf[c0..c0 + n]),
    })
}

/// Runs every requested path and, independently of the requested paths,
/// prices the reciprocal magnitude fix by timing the batch path under both
/// coefficient sets.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport, Error> {
    spec.validate()?;
    let (mut angle_buf, a0) = page_offset_buffer(spec.batch_size, 0);
    angle_buf[a0..a0 + spec.batch_size]
        .copy_from_slice(&random_angles(spec.batch_size, spec.seed));
    let angles = &angle_buf[a0..a0 + spec.batch_size];
    let cfg = PipelineConfig::for_variant(spec.variant);

    let mut timings = Vec::with_capacity(spec.paths.len());
    for &path in &spec.paths {
        timings.push(measure_path(
            path,
            angles,
            cfg,
            spec.repetitions,
            spec.warmup_repetitions,
        )?);
    }

    let time_variant = |variant| {
        measure_path(
            BenchPath::Batch,
            angles,
            PipelineConfig::for_variant(variant),
            spec.repetitions,
            spec.warmup_repetitions,
        )
        .map(|t| t.ns_per_pair)
    };
    let reciprocal_cost_ratio = match (
        time_variant(Variant::Normalized),
        time_variant(Variant::AngleAccurate),
    ) {
        (Ok(plain), Ok(reciprocal)) if plain > 0.0 => Some(reciprocal / plain),
        _ => None,
    };

    Ok(BenchReport {
        machine: machine_description(),
        batch_size: spec.batch_size,
        repetitions: spec.repetitions,
        timings,
        reciprocal_cost_ratio,
    })
}
