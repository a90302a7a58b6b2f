//! Command-line front end for the fastsincos library.
//!
//! Four subcommands: `eval` prints sin/cos pairs for angles given on the
//! command line, `accuracy` sweeps a variant against the double-precision
//! reference, `bench` times the evaluation paths, and `fit` re-derives
//! coefficient sets. Payloads go to stdout (or `--output`) as CSV or JSON;
//! diagnostics and benchmark metadata go to stderr.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 accuracy check failure,
//! 4 fit non-convergence. The `SINCOS_SEED` environment variable (decimal or
//! 0x-prefixed hex) overrides the default seed for random sampling and
//! benchmark input generation, so every command is deterministic given its
//! flags and environment.

use clap::{Parser, Subcommand, ValueEnum};
use fastsincos::accuracy::{self, Sampling, SweepSpec};
use fastsincos::bench::{run_bench, BenchPath, BenchSpec};
use fastsincos::fit::{self, FitResult, FitSpec};
use fastsincos::{sincos, Error, PipelineConfig, Variant, DEFAULT_SEED};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;
const EXIT_FIT_FAILED: u8 = 4;

/// Branch-free single-precision sine/cosine: evaluation, accuracy sweeps,
/// timing, and coefficient refits.
#[derive(Parser)]
#[command(name = "fastsincos", version, about)]
struct Cli {
    /// Payload format written to stdout or --output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplingMode {
    /// Equally spaced angles over [min, max).
    Grid,
    /// Seeded uniform draws from [min, max).
    Random,
}

#[derive(Subcommand)]
enum Commands {
    /// Evaluate sin/cos pairs for angles given in radians.
    Eval {
        /// Coefficient variant: normalized or accurate.
        #[arg(long, value_parser = parse_variant, default_value = "normalized")]
        variant: Variant,

        /// Angles in radians.
        #[arg(required = true, allow_negative_numbers = true, value_name = "THETA")]
        angles: Vec<String>,
    },

    /// Sweep a variant against the double-precision reference.
    Accuracy {
        /// Coefficient variant: normalized or accurate.
        #[arg(long, value_parser = parse_variant, default_value = "normalized")]
        variant: Variant,

        /// Number of sweep samples.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,

        /// Sweep lower bound in radians (inclusive).
        #[arg(long, default_value_t = -std::f32::consts::PI, allow_negative_numbers = true)]
        min: f32,

        /// Sweep upper bound in radians (exclusive).
        #[arg(long, default_value_t = std::f32::consts::PI, allow_negative_numbers = true)]
        max: f32,

        /// How sample angles are drawn.
        #[arg(long, value_enum, default_value_t = SamplingMode::Grid)]
        sampling: SamplingMode,

        /// Exit 3 unless the stats meet the variant's released bounds.
        #[arg(long)]
        check: bool,
    },

    /// Time the evaluation paths and price the reciprocal magnitude fix.
    Bench {
        /// Coefficient variant the kernel paths use.
        #[arg(long, value_parser = parse_variant, default_value = "normalized")]
        variant: Variant,

        /// Elements evaluated per repetition.
        #[arg(long, default_value_t = 65_536)]
        batch: usize,

        /// Timed repetitions; the median is reported. At least 3.
        #[arg(long, default_value_t = 9)]
        reps: usize,

        /// Untimed warmup repetitions.
        #[arg(long, default_value_t = 3)]
        warmup: usize,

        /// Comma-separated paths: scalar, batch, interleaved, libm-baseline.
        #[arg(long, default_value = "scalar,batch,interleaved,libm-baseline")]
        paths: String,
    },

    /// Refit coefficient sets and arbitrate between published printings.
    Fit {
        /// Coefficient variant: normalized or accurate.
        #[arg(long, value_parser = parse_variant, default_value = "normalized")]
        variant: Variant,

        /// Number of odd (sine) terms; the cosine side gets one fewer.
        #[arg(long, default_value_t = 4)]
        degree: usize,

        /// Doubling steps the fitted pipeline assumes.
        #[arg(long, default_value_t = 2)]
        doublings: u32,

        /// Fit grid size; must be odd and large enough for the degree.
        #[arg(long, default_value_t = 4097)]
        grid_points: usize,

        /// Full-period sweep samples used by --arbitrate-ss2.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,

        /// Compare the two circulating printings of the accurate ss2 term
        /// by full-pipeline sweep error and report the winner.
        #[arg(long)]
        arbitrate_ss2: bool,

        /// Emit the fitted set as a paste-ready Rust constant block.
        #[arg(long)]
        constants: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn check(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CHECK_FAILED,
            message: message.into(),
        }
    }
}

/// Fit breakdowns are runtime failures with their own exit code; everything
/// else a library call can reject is a bad specification, i.e. usage.
fn lib_failure(e: Error) -> Failure {
    let code = match e {
        Error::NonConvergence { .. } | Error::SingularSystem(_) => EXIT_FIT_FAILED,
        _ => EXIT_USAGE,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "normalized" => Ok(Variant::Normalized),
        "accurate" => Ok(Variant::AngleAccurate),
        _ => Err(format!(
            "unknown variant '{s}'; expected 'normalized' or 'accurate'"
        )),
    }
}

fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var("SINCOS_SEED") {
        Ok(raw) => {
            let t = raw.trim();
            let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => t.parse(),
            };
            parsed.map_err(|_| {
                Failure::usage(format!(
                    "cannot parse SINCOS_SEED '{raw}' as a decimal or 0x-prefixed hex integer"
                ))
            })
        }
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(Failure::usage(format!("cannot read SINCOS_SEED: {e}"))),
    }
}

struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    fn emit(&self, payload: &str) -> Result<(), Failure> {
        let mut text = payload.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let seed = seed_from_env()?;
    let out = Output {
        format: cli.format,
        path: cli.output,
    };
    match cli.command {
        Commands::Eval { variant, angles } => cmd_eval(&out, variant, &angles),
        Commands::Accuracy {
            variant,
            samples,
            min,
            max,
            sampling,
            check,
        } => cmd_accuracy(&out, variant, samples, min, max, sampling, check, seed),
        Commands::Bench {
            variant,
            batch,
            reps,
            warmup,
            paths,
        } => cmd_bench(&out, variant, batch, reps, warmup, &paths, seed),
        Commands::Fit {
            variant,
            degree,
            doublings,
            grid_points,
            samples,
            arbitrate_ss2,
            constants,
        } => cmd_fit(
            &out,
            variant,
            degree,
            doublings,
            grid_points,
            samples,
            arbitrate_ss2,
            constants,
        ),
    }
}

fn cmd_eval(out: &Output, variant: Variant, tokens: &[String]) -> Result<(), Failure> {
    let cfg = PipelineConfig::for_variant(variant);
    let mut pairs = Vec::with_capacity(tokens.len());
    for token in tokens {
        let theta: f32 = token.parse().map_err(|_| {
            Failure::usage(format!("cannot parse angle '{token}' as a decimal number"))
        })?;
        if !theta.is_finite() {
            return Err(Failure::usage(format!("angle '{token}' is not finite")));
        }
        let p = sincos(theta, cfg);
        pairs.push((theta, p.s, p.c));
    }
    let payload = match out.format {
        Format::Csv => {
            let mut s = String::from("theta,sin,cos\n");
            for (theta, sin, cos) in &pairs {
                s.push_str(&format!("{theta},{sin},{cos}\n"));
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = pairs
                .iter()
                .map(|(theta, sin, cos)| {
                    json!({
                        "theta": *theta as f64,
                        "sin": *sin as f64,
                        "cos": *cos as f64,
                    })
                })
                .collect();
            pretty(&json!({ "variant": variant.label(), "pairs": rows }))
        }
    };
    out.emit(&payload)
}

/// Released sweep bounds per variant over the standard full-period sweep;
/// `accuracy --check` gates against these.
struct CheckBounds {
    rms: f64,
    max: f64,
    amplitude: f64,
}

fn bounds_for(variant: Variant) -> CheckBounds {
    match variant {
        Variant::Normalized => CheckBounds {
            rms: 1.5e-7,
            max: 5.5e-7,
            amplitude: 2.5e-7,
        },
        Variant::AngleAccurate => CheckBounds {
            rms: 1.3e-7,
            max: 4.5e-7,
            amplitude: 5.0e-7,
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_accuracy(
    out: &Output,
    variant: Variant,
    samples: usize,
    min: f32,
    max: f32,
    sampling: SamplingMode,
    check: bool,
    seed: u64,
) -> Result<(), Failure> {
    let spec = SweepSpec {
        lo: min,
        hi: max,
        samples,
        sampling: match sampling {
            SamplingMode::Grid => Sampling::UniformGrid,
            SamplingMode::Random => Sampling::UniformRandom { seed },
        },
    };
    let stats = accuracy::sweep(&spec, PipelineConfig::for_variant(variant)).map_err(lib_failure)?;

    let payload = match out.format {
        Format::Csv => format!(
            "variant,samples,lo,hi,rms_combined,max_combined,max_amplitude,worst_theta\n\
             {},{},{},{},{},{},{},{}\n",
            variant.label(),
            samples,
            min,
            max,
            stats.rms_combined,
            stats.max_combined,
            stats.max_amplitude,
            stats.worst_theta,
        ),
        Format::Json => pretty(&json!({
            "variant": variant.label(),
            "samples": samples,
            "lo": min as f64,
            "hi": max as f64,
            "rms_combined": stats.rms_combined,
            "max_combined": stats.max_combined,
            "max_amplitude": stats.max_amplitude,
            "worst_theta": stats.worst_theta as f64,
        })),
    };
    out.emit(&payload)?;

    if check {
        let bounds = bounds_for(variant);
        let mut violations = Vec::new();
        if stats.rms_combined > bounds.rms {
            violations.push(format!(
                "rms_combined {:e} exceeds {:e}",
                stats.rms_combined, bounds.rms
            ));
        }
        if stats.max_combined > bounds.max {
            violations.push(format!(
                "max_combined {:e} exceeds {:e}",
                stats.max_combined, bounds.max
            ));
        }
        if stats.max_amplitude > bounds.amplitude {
            violations.push(format!(
                "max_amplitude {:e} exceeds {:e}",
                stats.max_amplitude, bounds.amplitude
            ));
        }
        if !violations.is_empty() {
            return Err(Failure::check(format!(
                "accuracy check failed for {}: {}",
                variant.label(),
                violations.join("; ")
            )));
        }
    }
    Ok(())
}

fn cmd_bench(
    out: &Output,
    variant: Variant,
    batch: usize,
    reps: usize,
    warmup: usize,
    paths_arg: &str,
    seed: u64,
) -> Result<(), Failure> {
    let mut paths = Vec::new();
    for token in paths_arg.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let path = BenchPath::parse(token).ok_or_else(|| {
            Failure::usage(format!(
                "unknown bench path '{token}'; expected scalar, batch, interleaved, or libm-baseline"
            ))
        })?;
        if !paths.contains(&path) {
            paths.push(path);
        }
    }
    let spec = BenchSpec {
        batch_size: batch,
        repetitions: reps,
        warmup_repetitions: warmup,
        paths,
        variant,
        seed,
    };
    let report = run_bench(&spec).map_err(lib_failure)?;

    let payload = match out.format {
        Format::Csv => {
            // Tabular payload stays pure; run metadata goes to stderr.
            eprintln!("machine: {}", report.machine);
            if let Some(ratio) = report.reciprocal_cost_ratio {
                eprintln!("reciprocal_cost_ratio: {ratio}");
            }
            let mut s =
                String::from("path,variant,ns_per_pair,pairs_per_second,cycles_per_pair,checksum\n");
            for t in &report.timings {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t.path.label(),
                    t.variant.map(Variant::label).unwrap_or(""),
                    t.ns_per_pair,
                    t.pairs_per_second,
                    t.cycles_per_pair.map(|c| c.to_string()).unwrap_or_default(),
                    t.checksum,
                ));
            }
            s
        }
        Format::Json => {
            let timings: Vec<_> = report
                .timings
                .iter()
                .map(|t| {
                    json!({
                        "path": t.path.label(),
                        "variant": t.variant.map(Variant::label),
                        "ns_per_pair": t.ns_per_pair,
                        "pairs_per_second": t.pairs_per_second,
                        "cycles_per_pair": t.cycles_per_pair,
                        "checksum": t.checksum,
                    })
                })
                .collect();
            pretty(&json!({
                "machine": report.machine,
                "batch_size": report.batch_size,
                "repetitions": report.repetitions,
                "reciprocal_cost_ratio": report.reciprocal_cost_ratio,
                "timings": timings,
            }))
        }
    };
    out.emit(&payload)
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    out: &Output,
    variant: Variant,
    degree: usize,
    doublings: u32,
    grid_points: usize,
    samples: usize,
    arbitrate_ss2: bool,
    constants: bool,
) -> Result<(), Failure> {
    if arbitrate_ss2 {
        if variant != Variant::AngleAccurate {
            return Err(Failure::usage(
                "--arbitrate-ss2 compares printings of the accurate set; pass --variant accurate",
            ));
        }
        if constants {
            return Err(Failure::usage(
                "--constants does not combine with --arbitrate-ss2",
            ));
        }
        let arb = fit::arbitrate_ss2(samples).map_err(lib_failure)?;
        let payload = match out.format {
            Format::Csv => {
                let mut s = String::from("candidate,ss2,max_combined,chosen\n");
                for i in 0..2 {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        i,
                        arb.candidates[i],
                        arb.max_errors[i],
                        i == arb.chosen_index,
                    ));
                }
                s
            }
            Format::Json => pretty(&json!({
                "samples": samples,
                "candidates": [
                    {
                        "ss2": arb.candidates[0] as f64,
                        "max_combined": arb.max_errors[0],
                        "chosen": arb.chosen_index == 0,
                    },
                    {
                        "ss2": arb.candidates[1] as f64,
                        "max_combined": arb.max_errors[1],
                        "chosen": arb.chosen_index == 1,
                    },
                ],
                "chosen_ss2": arb.chosen as f64,
            })),
        };
        return out.emit(&payload);
    }

    let spec = FitSpec {
        variant,
        degree,
        doublings,
        grid_points,
    };
    let result = match variant {
        Variant::Normalized => fit::fit_normalized(&spec),
        Variant::AngleAccurate => fit::fit_angle_accurate(&spec),
    }
    .map_err(lib_failure)?;

    if constants {
        return out.emit(&constants_block(&result));
    }

    let named = named_coefficients(&result);
    let payload = match out.format {
        Format::Csv => {
            let mut s = String::from("name,value\n");
            s.push_str(&format!("variant,{}\n", result.variant.label()));
            s.push_str(&format!("degree,{}\n", result.degree));
            s.push_str(&format!("doublings,{}\n", result.doublings));
            for (name, value) in &named {
                s.push_str(&format!("{name},{value}\n"));
            }
            s.push_str(&format!("residual_rms,{}\n", result.residual_rms));
            s.push_str(&format!(
                "end_to_end_max_error,{}\n",
                result.end_to_end_max_error
            ));
            s.push_str(&format!("iterations,{}\n", result.iterations));
            s
        }
        Format::Json => {
            let mut coefficients = serde_json::Map::new();
            for (name, value) in &named {
                coefficients.insert(name.clone(), json!(*value as f64));
            }
            pretty(&json!({
                "variant": result.variant.label(),
                "degree": result.degree,
                "doublings": result.doublings,
                "coefficients": coefficients,
                "residual_rms": result.residual_rms,
                "end_to_end_max_error": result.end_to_end_max_error,
                "iterations": result.iterations,
            }))
        }
    };
    out.emit(&payload)
}

/// Coefficient naming used across payloads: odd (sine) terms are ss1..ssN,
/// even (cosine) terms cc1..ccM, lowest power first.
fn named_coefficients(result: &FitResult) -> Vec<(String, f32)> {
    let mut named = Vec::new();
    for (i, c) in result.odd_f32().iter().enumerate() {
        named.push((format!("ss{}", i + 1), *c));
    }
    for (i, c) in result.even_f32().iter().enumerate() {
        named.push((format!("cc{}", i + 1), *c));
    }
    named
}

fn constants_block(result: &FitResult) -> String {
    match result.coefficient_set() {
        Some(set) => format!(
            "pub const FITTED_{}: CoefficientSet = CoefficientSet {{\n    \
             variant: Variant::{:?},\n    \
             ss1: {},\n    ss2: {},\n    ss3: {},\n    ss4: {},\n    \
             cc1: {},\n    cc2: {},\n    cc3: {},\n}};\n",
            set.variant.label().to_uppercase(),
            set.variant,
            set.ss1,
            set.ss2,
            set.ss3,
            set.ss4,
            set.cc1,
            set.cc2,
            set.cc3,
        ),
        None => format!(
            "pub const FITTED_ODD: [f32; {}] = {:?};\npub const FITTED_EVEN: [f32; {}] = {:?};\n",
            result.odd.len(),
            result.odd_f32(),
            result.even.len(),
            result.even_f32(),
        ),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON serialization of plain values cannot fail")
}
