//! Scalar sincos pipeline: turn-based range reduction, quarter-angle
//! polynomials, two double-angle steps, and a magnitude fix.
//!
//! Every step is straight-line float arithmetic; no branch depends on the
//! input value. NaN flows through, and ±Inf degrades to NaN during
//! reduction (Inf − Inf) without special-casing. The operation sequence
//! here is the ground truth the vector paths in [`crate::batch`] reproduce
//! lane for lane, bitwise.

use crate::error::Error;

/// 1/(2π) rounded to single precision. Multiplying an angle in radians by
/// this constant converts it to turns (fractions of a full circle).
pub const TURNS_PER_RADIAN: f32 = (1.0 / std::f64::consts::TAU) as f32;

/// Selects a coefficient family and the magnitude fix that goes with it.
///
/// `Normalized` polynomials keep the raw pair near the unit circle, so a
/// cheap multiplicative fix suffices. `AngleAccurate` polynomials trade
/// magnitude for angle accuracy; their raw pairs sit visibly off the circle
/// and require the reciprocal fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Normalized,
    AngleAccurate,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Normalized => "normalized",
            Variant::AngleAccurate => "accurate",
        }
    }
}

/// Where a [`SinCosPair`] sits in the pipeline. `double_angle` advances
/// Raw → Doubled1 → Doubled2 (saturating); the magnitude fixes produce
/// `Final`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Raw,
    Doubled1,
    Doubled2,
    Final,
}

impl Stage {
    fn next(self) -> Stage {
        match self {
            Stage::Raw => Stage::Doubled1,
            Stage::Doubled1 | Stage::Doubled2 => Stage::Doubled2,
            Stage::Final => Stage::Final,
        }
    }
}

/// An angle reduced to turns. For finite inputs the value lies in
/// [−0.5, 0.5]; both endpoints are reachable because ties round to even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTurn(pub f32);

/// The seven polynomial constants of one variant: four odd (sine) terms and
/// three even (cosine) terms, with the cosine constant term fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub variant: Variant,
    pub ss1: f32,
    pub ss2: f32,
    pub ss3: f32,
    pub ss4: f32,
    pub cc1: f32,
    pub cc2: f32,
    pub cc3: f32,
}

/// Coefficients fit to keep the raw pair on the unit circle while
/// approximating sin/cos of a quarter turn; pairs them with the
/// multiplicative magnitude fix.
// Decimal printings kept verbatim; they round to the intended f32 values.
#[allow(clippy::excessive_precision)]
pub const NORMALIZED_COEFFS: CoefficientSet = CoefficientSet {
    variant: Variant::Normalized,
    ss1: 1.5707963235,
    ss2: -0.645963615,
    ss3: 0.0796819754,
    ss4: -0.0046075748,
    cc1: -1.2336977925,
    cc2: 0.2536086171,
    cc3: -0.0204391631,
};

/// Coefficients fit to the pair's angle rather than its components; the raw
/// magnitude drifts by design, so this set pairs with the reciprocal fix.
///
/// Two printings of `ss2` circulate, one single-precision ULP apart. This
/// set ships the one whose full-pipeline sweep error is smaller;
/// [`crate::fit::arbitrate_ss2`] reproduces the comparison.
// The leading term is π/2 to full f32 precision by construction, not by
// reference to the constant; printings kept verbatim.
#[allow(clippy::approx_constant, clippy::excessive_precision)]
pub const ANGLE_ACCURATE_COEFFS: CoefficientSet = CoefficientSet {
    variant: Variant::AngleAccurate,
    ss1: 1.5707963268,
    ss2: -0.6466386396,
    ss3: 0.0679105987,
    ss4: -0.0011573807,
    cc1: -1.2341299769,
    cc2: 0.2465220241,
    cc3: -0.0123926179,
};

impl CoefficientSet {
    /// Checks the structure every usable set shares: finite values, leading
    /// sine term within 1e-6 of π/2, and alternating signs (ss: +,−,+,−;
    /// cc: −,+,−).
    pub fn validate(&self) -> Result<(), Error> {
        let all = [
            ("ss1", self.ss1),
            ("ss2", self.ss2),
            ("ss3", self.ss3),
            ("ss4", self.ss4),
            ("cc1", self.cc1),
            ("cc2", self.cc2),
            ("cc3", self.cc3),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(Error::InvalidCoefficients(format!("{name} is not finite")));
            }
        }
        if (self.ss1 - std::f32::consts::FRAC_PI_2).abs() > 1e-6 {
            return Err(Error::InvalidCoefficients(format!(
                "ss1 = {} is not within 1e-6 of pi/2",
                self.ss1
            )));
        }
        let signs = [
            ("ss1", self.ss1, 1.0f32),
            ("ss2", self.ss2, -1.0),
            ("ss3", self.ss3, 1.0),
            ("ss4", self.ss4, -1.0),
            ("cc1", self.cc1, -1.0),
            ("cc2", self.cc2, 1.0),
            ("cc3", self.cc3, -1.0),
        ];
        for (name, v, expected) in signs {
            if v * expected <= 0.0 {
                return Err(Error::InvalidCoefficients(format!(
                    "{name} = {v} breaks the alternating sign pattern"
                )));
            }
        }
        Ok(())
    }
}

/// Variant selector plus the doubling count. The shipped coefficient sets
/// are fit for exactly two doublings, so [`PipelineConfig::new`] rejects any
/// other count; the field stays private to keep that invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PipelineConfig {
    pub variant: Variant,
    doublings: u32,
}

impl PipelineConfig {
    pub fn new(variant: Variant, doublings: u32) -> Result<Self, Error> {
        if doublings != 2 {
            return Err(Error::UnsupportedDoublings {
                requested: doublings,
            });
        }
        Ok(Self { variant, doublings })
    }

    pub fn normalized() -> Self {
        Self {
            variant: Variant::Normalized,
            doublings: 2,
        }
    }

    pub fn angle_accurate() -> Self {
        Self {
            variant: Variant::AngleAccurate,
            doublings: 2,
        }
    }

    pub fn for_variant(variant: Variant) -> Self {
        Self {
            variant,
            doublings: 2,
        }
    }

    pub fn doublings(&self) -> u32 {
        self.doublings
    }

    /// The shipped coefficient set for this config's variant.
    pub fn coefficients(&self) -> &'static CoefficientSet {
        match self.variant {
            Variant::Normalized => &NORMALIZED_COEFFS,
            Variant::AngleAccurate => &ANGLE_ACCURATE_COEFFS,
        }
    }
}

/// A (sin, cos) value pair at some pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCosPair {
    pub s: f32,
    pub c: f32,
    pub stage: Stage,
}

impl SinCosPair {
    /// Squared magnitude s² + c² in double precision (diagnostic).
    pub fn magnitude_squared(&self) -> f64 {
        let (s, c) = (self.s as f64, self.c as f64);
        s * s + c * c
    }
}

/// Test-support model of a perturbed raw pair: s = a·sin(φ+δ),
/// c = a·cos(φ+δ) with φ the quarter angle of the reduced turn. Exercises
/// how the doubling recursion responds to amplitude scale `a` (squares per
/// doubling) versus angle offset `delta` (doubles per doubling, recoverable
/// by atan2).
#[derive(Debug, Clone, Copy)]
pub struct PerturbationModel {
    pub a: f64,
    pub delta: f64,
}

impl PerturbationModel {
    pub fn raw_pair(&self, x: ReducedTurn) -> SinCosPair {
        let phi = x.0 as f64 * std::f64::consts::FRAC_PI_2 + self.delta;
        SinCosPair {
            s: (self.a * phi.sin()) as f32,
            c: (self.a * phi.cos()) as f32,
            stage: Stage::Raw,
        }
    }
}

/// Maps an angle in radians to turns in [−0.5, 0.5]:
/// x = θ·(1/2π) − round_ties_even(θ·(1/2π)), entirely in single precision.
///
/// No extended-precision reduction is attempted, so the absolute error of x
/// grows like |θ|·ulp; accuracy statements hold for |θ| ≤ 2π·2¹⁰. NaN
/// propagates and ±Inf becomes NaN via Inf − Inf.
pub fn reduce_turns(theta: f32) -> ReducedTurn {
    let turns = theta * TURNS_PER_RADIAN;
    ReducedTurn(turns - turns.round_ties_even())
}

/// Evaluates the quarter-angle polynomials at a reduced turn:
/// s = x·(ss1 + q·(ss2 + q·(ss3 + q·ss4))) and
/// c = 1 + q·(cc1 + q·(cc2 + q·cc3)) with q = x², innermost first, one
/// fused multiply-add per step. The pair approximates sin/cos(2πx/4); the
/// doubling steps expand it to the full angle.
pub fn poly_quarter(x: ReducedTurn, coeffs: &CoefficientSet) -> SinCosPair {
    let x = x.0;
    let q = x * x;
    let s = q.mul_add(
        q.mul_add(q.mul_add(coeffs.ss4, coeffs.ss3), coeffs.ss2),
        coeffs.ss1,
    ) * x;
    let c = q.mul_add(
        q.mul_add(q.mul_add(coeffs.cc3, coeffs.cc2), coeffs.cc1),
        1.0,
    );
    SinCosPair {
        s,
        c,
        stage: Stage::Raw,
    }
}

/// One double-angle step: (s, c) → (2sc, c² − s²). The sine update is a
/// product followed by an exact doubling; the cosine update subtracts s²
/// from the plain product c·c in one fused negative-multiply-add. Angle
/// error passes through doubled but otherwise intact; amplitude error
/// squares.
pub fn double_angle(p: SinCosPair) -> SinCosPair {
    SinCosPair {
        s: 2.0 * (p.s * p.c),
        c: (-p.s).mul_add(p.s, p.c * p.c),
        stage: p.stage.next(),
    }
}

/// Rescales the final pair by f = 2 − (s₂² + c₂²), where (s₂, c₂) is the
/// penultimate pair (one doubling before the final one).
///
/// The penultimate pair's squared magnitude equals the final pair's
/// magnitude, so f cancels the amplitude drift to second order. Valid when
/// the raw polynomial keeps the pair near the unit circle, i.e. for the
/// normalized coefficient set.
pub fn fix_magnitude_normalized(final_pair: SinCosPair, penultimate: SinCosPair) -> SinCosPair {
    let f = (-penultimate.s).mul_add(
        penultimate.s,
        (-penultimate.c).mul_add(penultimate.c, 2.0),
    );
    SinCosPair {
        s: final_pair.s * f,
        c: final_pair.c * f,
        stage: Stage::Final,
    }
}

/// Rescales the final pair by f = 1/(s₂² + c₂²), a correctly rounded
/// single-precision divide by the penultimate pair's squared magnitude.
///
/// Because the final magnitude equals that square exactly (up to rounding),
/// the output lands on the unit circle regardless of how far the raw pair
/// drifted, which is what the angle-accurate set needs. A zero-magnitude
/// pair yields NaN/Inf; that cannot occur for the shipped coefficients on
/// reduced inputs.
pub fn fix_magnitude_reciprocal(final_pair: SinCosPair, penultimate: SinCosPair) -> SinCosPair {
    let m = penultimate
        .s
        .mul_add(penultimate.s, penultimate.c * penultimate.c);
    let f = 1.0 / m;
    SinCosPair {
        s: final_pair.s * f,
        c: final_pair.c * f,
        stage: Stage::Final,
    }
}

/// Diagnostic alternative to [`fix_magnitude_normalized`] that derives the
/// factor f = (3 − (s² + c²))/2 from the final pair itself. Agrees with the
/// penultimate form to a couple of ULP per component; the pipeline prefers
/// the penultimate form because those squares are already on hand from the
/// last doubling step.
pub fn fix_magnitude_from_final(final_pair: SinCosPair) -> SinCosPair {
    let m = final_pair
        .s
        .mul_add(final_pair.s, final_pair.c * final_pair.c);
    let f = 0.5 * (3.0 - m);
    SinCosPair {
        s: final_pair.s * f,
        c: final_pair.c * f,
        stage: Stage::Final,
    }
}

/// Full pipeline with the shipped coefficients for `cfg`'s variant: reduce
/// to turns, evaluate the quarter-angle polynomials, apply two double-angle
/// steps, then the variant's magnitude fix.
pub fn sincos(theta: f32, cfg: PipelineConfig) -> SinCosPair {
    debug_assert_eq!(cfg.doublings(), 2);
    sincos_with(theta, cfg.coefficients())
}

/// [`sincos`] with an explicit coefficient set (refit or experimental). The
/// set's variant selects the magnitude fix; the selection depends only on
/// the configuration, never on the input value.
pub fn sincos_with(theta: f32, coeffs: &CoefficientSet) -> SinCosPair {
    let raw = poly_quarter(reduce_turns(theta), coeffs);
    let penultimate = double_angle(raw);
    let final_pair = double_angle(penultimate);
    match coeffs.variant {
        Variant::Normalized => fix_magnitude_normalized(final_pair, penultimate),
        Variant::AngleAccurate => fix_magnitude_reciprocal(final_pair, penultimate),
    }
}

/// Runs the pipeline but stops before the magnitude fix, exposing the
/// amplitude drift the fix removes. Diagnostic path for error measurement.
pub fn sincos_unfixed(theta: f32, cfg: PipelineConfig) -> SinCosPair {
    debug_assert_eq!(cfg.doublings(), 2);
    let raw = poly_quarter(reduce_turns(theta), cfg.coefficients());
    double_angle(double_angle(raw))
}
