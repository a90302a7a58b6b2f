//! Regenerates the polynomial coefficient sets from first principles,
//! generalized over doubling count and polynomial degree.
//!
//! Two fitters mirror the two shipped variants. The normalized fitter
//! solves two independent weighted linear least-squares problems, odd basis
//! against sin(ωx) and even basis against cos(ωx) − 1, with ω = 2π/2ⁿ the
//! angle the raw polynomial must cover before n doublings. The
//! angle-accurate fitter minimizes the pointwise angle residual
//! atan2(S(x), C(x)) − ωx by Gauss-Newton, seeded from the normalized
//! solution; it lets the pair's magnitude float, which is exactly what the
//! reciprocal magnitude fix absorbs.
//!
//! The grid error weighting is uniform; quadrature weights (composite
//! Simpson) make the discrete sum approximate the continuous integral so
//! the solution stops moving once the grid resolves the integrand. All
//! fitting arithmetic is double precision; only returned coefficients are
//! rounded to single.

use crate::accuracy::{self, SweepSpec};
use crate::error::Error;
use crate::kernel::{self, CoefficientSet, Variant, ANGLE_ACCURATE_COEFFS};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::{PI, TAU};

const GN_MAX_ITERATIONS: usize = 100;
const GN_TOLERANCE: f64 = 1e-14;
const GN_MAX_BACKTRACKS: usize = 30;
/// Singular values below this are treated as zero when solving, which makes
/// each Gauss-Newton step the minimum-norm least-squares step.
const SVD_EPS: f64 = 1e-12;
/// Sample count for the end-to-end error estimate attached to each fit.
const E2E_SAMPLES: usize = 1_000_000;

/// The two circulating printings of the angle-accurate `ss2` constant,
/// one single-precision ULP apart. [`arbitrate_ss2`] measures both.
#[allow(clippy::excessive_precision)]
pub const SS2_CANDIDATES: [f32; 2] = [-0.6466386936, -0.6466386396];

/// What to fit: variant, odd-term count (`degree`), doubling count, and
/// grid resolution over [−0.5, 0.5].
///
/// `degree` counts the odd (sine) terms; the cosine polynomial gets
/// `degree − 1` free terms on top of its fixed constant 1, so the default
/// `degree = 4` reproduces the shipped 4 + 3 coefficient shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitSpec {
    pub variant: Variant,
    pub degree: usize,
    pub doublings: u32,
    pub grid_points: usize,
}

impl FitSpec {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            degree: 4,
            doublings: 2,
            grid_points: 4097,
        }
    }

    fn validate(&self) -> Result<(), Error> {
        if self.degree < 2 {
            return Err(Error::InvalidFitSpec(format!(
                "degree {} is too low; need at least 2 odd terms",
                self.degree
            )));
        }
        if self.doublings > 24 {
            return Err(Error::InvalidFitSpec(format!(
                "doubling count {} leaves no representable quarter angle",
                self.doublings
            )));
        }
        // Odd point counts give a symmetric grid with an exact midpoint and
        // are what composite Simpson weighting needs.
        if self.grid_points.is_multiple_of(2) || self.grid_points < 2 * self.degree + 3 {
            return Err(Error::InvalidFitSpec(format!(
                "grid_points {} must be odd and at least {}",
                self.grid_points,
                2 * self.degree + 3
            )));
        }
        Ok(())
    }

    /// The angle covered by the raw polynomial: ω = 2π/2ⁿ, so that n
    /// doublings expand x ∈ [−0.5, 0.5] to the full circle.
    fn omega(&self) -> f64 {
        TAU / (1u64 << self.doublings) as f64
    }
}

/// A fitted coefficient vector plus its quality measures. Coefficients stay
/// in double precision; [`FitResult::coefficient_set`] rounds them into the
/// shipped seven-constant shape when the fitted shape matches it.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub variant: Variant,
    pub degree: usize,
    pub doublings: u32,
    /// Odd (sine) coefficients, lowest power first.
    pub odd: Vec<f64>,
    /// Even (cosine) coefficients beyond the fixed constant 1, lowest power
    /// first.
    pub even: Vec<f64>,
    /// Weighted RMS of the fit residual (component residual for the
    /// normalized fit, angle residual in radians for the accurate fit).
    pub residual_rms: f64,
    /// Max combined error of the full single-precision pipeline run with
    /// these coefficients over 10⁶ angles in [−π, π).
    pub end_to_end_max_error: f64,
    /// Accepted Gauss-Newton iterations (0 for the linear fit).
    pub iterations: usize,
}

impl FitResult {
    pub fn odd_f32(&self) -> Vec<f32> {
        self.odd.iter().map(|&v| v as f32).collect()
    }

    pub fn even_f32(&self) -> Vec<f32> {
        self.even.iter().map(|&v| v as f32).collect()
    }

    /// The seven-constant set, when this fit has the shipped shape
    /// (degree 4, two doublings); `None` otherwise.
    pub fn coefficient_set(&self) -> Option<CoefficientSet> {
        if self.degree != 4 || self.doublings != 2 {
            return None;
        }
        Some(CoefficientSet {
            variant: self.variant,
            ss1: self.odd[0] as f32,
            ss2: self.odd[1] as f32,
            ss3: self.odd[2] as f32,
            ss4: self.odd[3] as f32,
            cc1: self.even[0] as f32,
            cc2: self.even[1] as f32,
            cc3: self.even[2] as f32,
        })
    }
}

/// Composite Simpson weights for an odd-sized uniform grid; the h/3 scale
/// is dropped because least squares is invariant under a uniform weight
/// scale.
fn simpson_weights(n: usize) -> Vec<f64> {
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut w = vec![1.0; n];
    for (i, wi) in w.iter_mut().enumerate().take(n - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    w
}

fn grid(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n).map(|i| -0.5 + i as f64 * h).collect()
}

/// Weighted linear least squares via SVD; rows of `a` and `b` are expected
/// pre-scaled by √w.
fn solve_least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<Vec<f64>, Error> {
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    if max_sv.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        || svd.singular_values.min() <= 1e-13 * max_sv
    {
        return Err(Error::SingularSystem(
            "design matrix is rank deficient on this grid".into(),
        ));
    }
    let solution = svd
        .solve(&b, SVD_EPS)
        .map_err(|e| Error::SingularSystem(e.to_string()))?;
    Ok(solution.iter().copied().collect())
}

struct LinearFit {
    odd: Vec<f64>,
    even: Vec<f64>,
    residual_rms: f64,
}

/// Core of the normalized fit: two independent weighted least-squares
/// solves. Shared with the angle fitter, which seeds from it.
fn fit_normalized_params(spec: &FitSpec) -> Result<LinearFit, Error> {
    spec.validate()?;
    let xs = grid(spec.grid_points);
    let ws = simpson_weights(spec.grid_points);
    let sqrt_w: Vec<f64> = ws.iter().map(|w| w.sqrt()).collect();
    let omega = spec.omega();
    let n = xs.len();

    let a_odd = DMatrix::from_fn(n, spec.degree, |i, k| {
        sqrt_w[i] * xs[i].powi(2 * k as i32 + 1)
    });
    let b_odd = DVector::from_fn(n, |i, _| sqrt_w[i] * (omega * xs[i]).sin());
    let odd = solve_least_squares(a_odd, b_odd)?;

    let even_terms = spec.degree - 1;
    let a_even = DMatrix::from_fn(n, even_terms, |i, k| {
        sqrt_w[i] * xs[i].powi(2 * k as i32 + 2)
    });
    let b_even = DVector::from_fn(n, |i, _| sqrt_w[i] * ((omega * xs[i]).cos() - 1.0));
    let even = solve_least_squares(a_even, b_even)?;

    let mut ssr = 0.0;
    let mut wsum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let (s, c) = polys_at(&odd, &even, x);
        let rs = s - (omega * x).sin();
        let rc = c - (omega * x).cos();
        ssr += ws[i] * (rs * rs + rc * rc);
        wsum += ws[i];
    }
    Ok(LinearFit {
        odd,
        even,
        residual_rms: (ssr / (2.0 * wsum)).sqrt(),
    })
}

/// Fits the normalized variant: minimizes the weighted sum of squared
/// component residuals of the raw pair against sin(ωx) and cos(ωx).
pub fn fit_normalized(spec: &FitSpec) -> Result<FitResult, Error> {
    if spec.variant != Variant::Normalized {
        return Err(Error::InvalidFitSpec(
            "fit_normalized requires a Normalized spec".into(),
        ));
    }
    let fit = fit_normalized_params(spec)?;
    let e2e = end_to_end_max_error(
        &to_f32(&fit.odd),
        &to_f32(&fit.even),
        spec.doublings,
        false,
    );
    Ok(FitResult {
        variant: spec.variant,
        degree: spec.degree,
        doublings: spec.doublings,
        odd: fit.odd,
        even: fit.even,
        residual_rms: fit.residual_rms,
        end_to_end_max_error: e2e,
        iterations: 0,
    })
}

/// Fits the angle-accurate variant: Gauss-Newton on the pointwise angle
/// residual atan2(S(x), C(x)) − ωx, seeded from the normalized fit.
pub fn fit_angle_accurate(spec: &FitSpec) -> Result<FitResult, Error> {
    fit_angle_accurate_detailed(spec).map(|(result, _)| result)
}

/// [`fit_angle_accurate`] plus the SSR history (seed value first, one entry
/// per accepted iteration).
pub(crate) fn fit_angle_accurate_detailed(
    spec: &FitSpec,
) -> Result<(FitResult, Vec<f64>), Error> {
    if spec.variant != Variant::AngleAccurate {
        return Err(Error::InvalidFitSpec(
            "fit_angle_accurate requires an AngleAccurate spec".into(),
        ));
    }
    let seed_spec = FitSpec {
        variant: Variant::Normalized,
        ..*spec
    };
    let seed = fit_normalized_params(&seed_spec)?;
    let xs = grid(spec.grid_points);
    let ws = simpson_weights(spec.grid_points);
    let omega = spec.omega();
    let degree = spec.degree;

    let mut params: Vec<f64> = seed.odd.iter().chain(seed.even.iter()).copied().collect();
    let mut ssr = angle_ssr(&params, degree, omega, &xs, &ws);
    let mut history = vec![ssr];
    let wsum: f64 = ws.iter().sum();
    let n = xs.len();
    let cols = params.len();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..GN_MAX_ITERATIONS {
        // One Gauss-Newton step: linearize the angle residual. With
        // m² = S² + C², ∂atan2(S,C)/∂S = C/m² and ∂/∂C = −S/m².
        let mut a = DMatrix::zeros(n, cols);
        let mut b = DVector::zeros(n);
        for (i, &x) in xs.iter().enumerate() {
            let sw = ws[i].sqrt();
            let (s, c) = polys_at(&params[..degree], &params[degree..], x);
            let m2 = s * s + c * c;
            for k in 0..degree {
                a[(i, k)] = sw * x.powi(2 * k as i32 + 1) * c / m2;
            }
            for j in 0..cols - degree {
                a[(i, degree + j)] = sw * x.powi(2 * j as i32 + 2) * (-s) / m2;
            }
            b[i] = -sw * wrap_angle(s.atan2(c) - omega * x);
        }
        let step = solve_least_squares(a, b)?;

        // Backtracking line search: halve until the step stops hurting.
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..GN_MAX_BACKTRACKS {
            let trial: Vec<f64> = params
                .iter()
                .zip(&step)
                .map(|(p, d)| p + t * d)
                .collect();
            let trial_ssr = angle_ssr(&trial, degree, omega, &xs, &ws);
            if trial_ssr <= ssr {
                accepted = Some((trial, trial_ssr));
                break;
            }
            t *= 0.5;
        }
        let Some((next, next_ssr)) = accepted else {
            // No step length improves the objective: stationary point.
            converged = true;
            break;
        };
        let decrease = ssr - next_ssr;
        params = next;
        ssr = next_ssr;
        iterations += 1;
        history.push(ssr);
        if decrease < GN_TOLERANCE {
            converged = true;
            break;
        }
    }

    let residual_rms = (ssr / wsum).sqrt();
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            last_residual: residual_rms,
        });
    }

    let (odd, even) = params.split_at(degree);
    let e2e = end_to_end_max_error(&to_f32(odd), &to_f32(even), spec.doublings, true);
    Ok((
        FitResult {
            variant: spec.variant,
            degree: spec.degree,
            doublings: spec.doublings,
            odd: odd.to_vec(),
            even: even.to_vec(),
            residual_rms,
            end_to_end_max_error: e2e,
            iterations,
        },
        history,
    ))
}

/// Raw pair (S(x), C(x)) of the fitted polynomials in double precision.
pub(crate) fn polys_at(odd: &[f64], even: &[f64], x: f64) -> (f64, f64) {
    let q = x * x;
    let mut s = *odd.last().unwrap();
    for &a in odd.iter().rev().skip(1) {
        s = s * q + a;
    }
    let mut c = *even.last().unwrap();
    for &a in even.iter().rev().skip(1) {
        c = c * q + a;
    }
    (s * x, c * q + 1.0)
}

fn wrap_angle(d: f64) -> f64 {
    (d + PI).rem_euclid(TAU) - PI
}

fn angle_ssr(params: &[f64], degree: usize, omega: f64, xs: &[f64], ws: &[f64]) -> f64 {
    let (odd, even) = params.split_at(degree);
    xs.iter()
        .zip(ws)
        .map(|(&x, &w)| {
            let (s, c) = polys_at(odd, even, x);
            let r = wrap_angle(s.atan2(c) - omega * x);
            w * r * r
        })
        .sum()
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

/// Runs the single-precision pipeline with arbitrary-degree coefficient
/// slices and doubling count. At the shipped shape (degree 4, two
/// doublings) this is bitwise identical to [`kernel::sincos_with`].
///
/// With zero doublings no penultimate pair exists, so the magnitude factor
/// comes from the final pair itself: (3 − m)/2 for the normalized fix,
/// 1/m for the reciprocal fix, with m the pair's squared magnitude.
pub fn evaluate_pipeline(
    theta: f32,
    odd: &[f32],
    even: &[f32],
    doublings: u32,
    reciprocal_fix: bool,
) -> (f32, f32) {
    assert!(!odd.is_empty() && !even.is_empty());
    let x = kernel::reduce_turns(theta).0;
    let q = x * x;

    let mut acc = *odd.last().unwrap();
    for &a in odd.iter().rev().skip(1) {
        acc = q.mul_add(acc, a);
    }
    let mut s = acc * x;

    let mut acc = *even.last().unwrap();
    for &a in even.iter().rev().skip(1) {
        acc = q.mul_add(acc, a);
    }
    let mut c = q.mul_add(acc, 1.0);

    let (mut ps, mut pc) = (s, c);
    for _ in 0..doublings {
        ps = s;
        pc = c;
        let doubled_s = 2.0 * (s * c);
        let doubled_c = (-s).mul_add(s, c * c);
        s = doubled_s;
        c = doubled_c;
    }
    let fix = if doublings == 0 {
        let m = s.mul_add(s, c * c);
        if reciprocal_fix {
            1.0 / m
        } else {
            0.5 * (3.0 - m)
        }
    } else if reciprocal_fix {
        1.0 / ps.mul_add(ps, pc * pc)
    } else {
        (-ps).mul_add(ps, (-pc).mul_add(pc, 2.0))
    };
    (s * fix, c * fix)
}

/// Max combined error of [`evaluate_pipeline`] against the double-precision
/// reference over 10⁶ uniform angles in [−π, π).
pub fn end_to_end_max_error(
    odd: &[f32],
    even: &[f32],
    doublings: u32,
    reciprocal_fix: bool,
) -> f64 {
    let n = E2E_SAMPLES;
    let step = TAU / n as f64;
    let mut max_err = 0.0f64;
    for i in 0..n {
        let theta = (-PI + i as f64 * step) as f32;
        let (s, c) = evaluate_pipeline(theta, odd, even, doublings, reciprocal_fix);
        let (rs, rc) = accuracy::reference_pair(theta);
        let err = (s as f64 - rs).hypot(c as f64 - rc);
        if err > max_err {
            max_err = err;
        }
    }
    max_err
}

/// Outcome of measuring both circulating `ss2` printings through the full
/// angle-accurate pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ss2Arbitration {
    pub candidates: [f32; 2],
    /// Max combined sweep error for each candidate, same order.
    pub max_errors: [f64; 2],
    pub chosen: f32,
    pub chosen_index: usize,
}

/// Evaluates the full angle-accurate pipeline with each [`SS2_CANDIDATES`]
/// value over `samples` uniform angles in [−π, π) and picks the one with
/// the smaller maximum combined error (first candidate on an exact tie).
pub fn arbitrate_ss2(samples: usize) -> Result<Ss2Arbitration, Error> {
    let spec = SweepSpec::standard(samples);
    let mut max_errors = [0.0f64; 2];
    for (i, &candidate) in SS2_CANDIDATES.iter().enumerate() {
        let set = CoefficientSet {
            ss2: candidate,
            ..ANGLE_ACCURATE_COEFFS
        };
        max_errors[i] = accuracy::sweep_with(&spec, &set)?.max_combined;
    }
    let chosen_index = usize::from(max_errors[1] < max_errors[0]);
    Ok(Ss2Arbitration {
        candidates: SS2_CANDIDATES,
        max_errors,
        chosen: SS2_CANDIDATES[chosen_index],
        chosen_index,
    })
}
