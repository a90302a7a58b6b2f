//! Lane-parallel batch evaluation of the kernel pipeline over contiguous
//! arrays.
//!
//! The AVX2+FMA path runs the exact operation sequence of
//! [`crate::kernel::sincos`] on eight lanes at a time, so every element is
//! bitwise identical to the scalar result: the scalar `mul_add`, vector
//! `fmadd`, round-ties-even, and IEEE division all round the same way. Tail
//! elements and CPUs without AVX2 take the scalar kernel. Outputs are
//! structure-of-arrays (separate sine and cosine slices), matching vector
//! consumers; nothing allocates inside the lane loops.

use crate::kernel::{self, CoefficientSet, PipelineConfig};

/// Sine and cosine outputs for a batch; element `i` corresponds to input
/// angle `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub sines: Vec<f32>,
    pub cosines: Vec<f32>,
}

impl PairBatch {
    pub fn len(&self) -> usize {
        self.sines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sines.is_empty()
    }

    fn zeroed(len: usize) -> Self {
        Self {
            sines: vec![0.0; len],
            cosines: vec![0.0; len],
        }
    }
}

/// Evaluates the pipeline for every angle in `thetas`. Arbitrary lengths
/// are accepted; NaN elements produce NaN pairs without affecting their
/// neighbours.
pub fn sincos_batch(thetas: &[f32], cfg: PipelineConfig) -> PairBatch {
    let mut out = PairBatch::zeroed(thetas.len());
    sincos_batch_into(thetas, cfg, &mut out.sines, &mut out.cosines);
    out
}

/// [`sincos_batch`] into caller-provided slices. All three slices must have
/// equal length.
pub fn sincos_batch_into(
    thetas: &[f32],
    cfg: PipelineConfig,
    sines: &mut [f32],
    cosines: &mut [f32],
) {
    assert_eq!(thetas.len(), sines.len());
    assert_eq!(thetas.len(), cosines.len());
    dispatch(thetas, cfg.coefficients(), sines, cosines, false);
}

/// Like [`sincos_batch`], but the vector loop evaluates two independent
/// eight-lane groups per iteration so the second group's work overlaps the
/// first's dependency chain. Numerics are identical to [`sincos_batch`],
/// bitwise; only the schedule differs.
pub fn sincos_batch_interleaved(thetas: &[f32], cfg: PipelineConfig) -> PairBatch {
    let mut out = PairBatch::zeroed(thetas.len());
    sincos_batch_interleaved_into(thetas, cfg, &mut out.sines, &mut out.cosines);
    out
}

/// [`sincos_batch_interleaved`] into caller-provided slices.
pub fn sincos_batch_interleaved_into(
    thetas: &[f32],
    cfg: PipelineConfig,
    sines: &mut [f32],
    cosines: &mut [f32],
) {
    assert_eq!(thetas.len(), sines.len());
    assert_eq!(thetas.len(), cosines.len());
    dispatch(thetas, cfg.coefficients(), sines, cosines, true);
}

/// Forced scalar-fallback evaluation: what every non-SIMD platform runs.
/// Exists so tests can compare the wide path against it on any machine.
pub fn sincos_batch_scalar(thetas: &[f32], cfg: PipelineConfig) -> PairBatch {
    let mut out = PairBatch::zeroed(thetas.len());
    scalar_into(
        thetas,
        cfg.coefficients(),
        &mut out.sines,
        &mut out.cosines,
    );
    out
}

fn dispatch(
    thetas: &[f32],
    coeffs: &CoefficientSet,
    sines: &mut [f32],
    cosines: &mut [f32],
    interleave: bool,
) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2")
            && std::arch::is_x86_feature_detected!("fma")
        {
            // SAFETY: the required CPU features were just detected.
            unsafe { avx2::sincos_into(thetas, coeffs, sines, cosines, interleave) };
            return;
        }
    }
    let _ = interleave;
    scalar_into(thetas, coeffs, sines, cosines);
}

fn scalar_into(thetas: &[f32], coeffs: &CoefficientSet, sines: &mut [f32], cosines: &mut [f32]) {
    for ((theta, s), c) in thetas.iter().zip(sines).zip(cosines) {
        let p = kernel::sincos_with(*theta, coeffs);
        *s = p.s;
        *c = p.c;
    }
}

#[cfg(target_arch = "x86_64")]
mod avx2 {
    use crate::kernel::{self, CoefficientSet, Variant};
    use std::arch::x86_64::*;

    const LANES: usize = 8;

    /// Broadcast constants for the eight-lane pipeline.
    struct Kernel8 {
        turns: __m256,
        ss: [__m256; 4],
        cc: [__m256; 3],
        one: __m256,
        two: __m256,
        reciprocal_fix: bool,
    }

    impl Kernel8 {
        #[target_feature(enable = "avx2", enable = "fma")]
        unsafe fn new(coeffs: &CoefficientSet) -> Self {
            Self {
                turns: _mm256_set1_ps(kernel::TURNS_PER_RADIAN),
                ss: [
                    _mm256_set1_ps(coeffs.ss1),
                    _mm256_set1_ps(coeffs.ss2),
                    _mm256_set1_ps(coeffs.ss3),
                    _mm256_set1_ps(coeffs.ss4),
                ],
                cc: [
                    _mm256_set1_ps(coeffs.cc1),
                    _mm256_set1_ps(coeffs.cc2),
                    _mm256_set1_ps(coeffs.cc3),
                ],
                one: _mm256_set1_ps(1.0),
                two: _mm256_set1_ps(2.0),
                reciprocal_fix: coeffs.variant == Variant::AngleAccurate,
            }
        }

        /// Eight lanes of the scalar pipeline, same operations in the same
        /// order: reduce, Horner with fused multiply-adds, two doublings,
        /// magnitude fix from the penultimate pair.
        #[inline]
        #[target_feature(enable = "avx2", enable = "fma")]
        unsafe fn eval(&self, theta: __m256) -> (__m256, __m256) {
            let scaled = _mm256_mul_ps(theta, self.turns);
            let nearest =
                _mm256_round_ps(scaled, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
            let x = _mm256_sub_ps(scaled, nearest);
            let q = _mm256_mul_ps(x, x);

            let mut s = self.ss[3];
            s = _mm256_fmadd_ps(q, s, self.ss[2]);
            s = _mm256_fmadd_ps(q, s, self.ss[1]);
            s = _mm256_fmadd_ps(q, s, self.ss[0]);
            let s1 = _mm256_mul_ps(s, x);

            let mut c = self.cc[2];
            c = _mm256_fmadd_ps(q, c, self.cc[1]);
            c = _mm256_fmadd_ps(q, c, self.cc[0]);
            let c1 = _mm256_fmadd_ps(q, c, self.one);

            let s2 = _mm256_mul_ps(self.two, _mm256_mul_ps(s1, c1));
            let c2 = _mm256_fnmadd_ps(s1, s1, _mm256_mul_ps(c1, c1));

            let s3 = _mm256_mul_ps(self.two, _mm256_mul_ps(s2, c2));
            let c3 = _mm256_fnmadd_ps(s2, s2, _mm256_mul_ps(c2, c2));

            let fix = if self.reciprocal_fix {
                _mm256_div_ps(
                    self.one,
                    _mm256_fmadd_ps(s2, s2, _mm256_mul_ps(c2, c2)),
                )
            } else {
                _mm256_fnmadd_ps(s2, s2, _mm256_fnmadd_ps(c2, c2, self.two))
            };
            (_mm256_mul_ps(s3, fix), _mm256_mul_ps(c3, fix))
        }
    }

    #[target_feature(enable = "avx2", enable = "fma")]
    pub unsafe fn sincos_into(
        thetas: &[f32],
        coeffs: &CoefficientSet,
        sines: &mut [f32],
        cosines: &mut [f32],
        interleave: bool,
    ) {
        debug_assert_eq!(thetas.len(), sines.len());
        debug_assert_eq!(thetas.len(), cosines.len());
        let k = Kernel8::new(coeffs);
        let n = thetas.len();
        let mut i = 0;

        // SAFETY throughout: every load/store below covers lanes
        // [i, i+LANES) with i+LANES (or i+2*LANES) <= n, checked by the
        // loop conditions; the three slices share that length.
        if interleave {
            while i + 2 * LANES <= n {
                let t0 = _mm256_loadu_ps(thetas.as_ptr().add(i));
                let t1 = _mm256_loadu_ps(thetas.as_ptr().add(i + LANES));
                let (s0, c0) = k.eval(t0);
                let (s1, c1) = k.eval(t1);
                _mm256_storeu_ps(sines.as_mut_ptr().add(i), s0);
                _mm256_storeu_ps(cosines.as_mut_ptr().add(i), c0);
                _mm256_storeu_ps(sines.as_mut_ptr().add(i + LANES), s1);
                _mm256_storeu_ps(cosines.as_mut_ptr().add(i + LANES), c1);
                i += 2 * LANES;
            }
        }
        while i + LANES <= n {
            let t = _mm256_loadu_ps(thetas.as_ptr().add(i));
            let (s, c) = k.eval(t);
            _mm256_storeu_ps(sines.as_mut_ptr().add(i), s);
            _mm256_storeu_ps(cosines.as_mut_ptr().add(i), c);
            i += LANES;
        }
        // Scalar tail: identical numerics by the FMA contract.
        for j in i..n {
            let p = kernel::sincos_with(thetas[j], coeffs);
            sines[j] = p.s;
            cosines[j] = p.c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sincos;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_angles(n: usize, lo: f32, hi: f32, seed: u64) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u = (rng.next_u32() >> 8) as f32 * (1.0 / (1 << 24) as f32);
                lo + u * (hi - lo)
            })
            .collect()
    }

    fn assert_matches_scalar(thetas: &[f32], cfg: PipelineConfig) {
        let batch = sincos_batch(thetas, cfg);
        for (i, theta) in thetas.iter().enumerate() {
            let p = sincos(*theta, cfg);
            assert_eq!(
                batch.sines[i].to_bits(),
                p.s.to_bits(),
                "sine mismatch at {i} (theta={theta})"
            );
            assert_eq!(
                batch.cosines[i].to_bits(),
                p.c.to_bits(),
                "cosine mismatch at {i} (theta={theta})"
            );
        }
    }

    #[test]
    fn quadrant_points() {
        use std::f32::consts::{FRAC_PI_2, PI};
        let thetas = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];
        let expected = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)];
        for cfg in [PipelineConfig::normalized(), PipelineConfig::angle_accurate()] {
            let out = sincos_batch(&thetas, cfg);
            for (i, (es, ec)) in expected.iter().enumerate() {
                assert!((out.sines[i] - es).abs() < 5e-7, "lane {i}");
                assert!((out.cosines[i] - ec).abs() < 5e-7, "lane {i}");
            }
        }
    }

    #[test]
    fn empty_batch() {
        let out = sincos_batch(&[], PipelineConfig::normalized());
        assert!(out.is_empty());
        assert_eq!(out.len(), 0);
    }

    #[test]
    fn single_element_tail_only() {
        assert_matches_scalar(&[0.7], PipelineConfig::normalized());
        let out = sincos_batch_interleaved(&[0.7], PipelineConfig::angle_accurate());
        let p = sincos(0.7, PipelineConfig::angle_accurate());
        assert_eq!(out.sines[0].to_bits(), p.s.to_bits());
        assert_eq!(out.cosines[0].to_bits(), p.c.to_bits());
    }

    #[test]
    fn matches_scalar_across_short_lengths() {
        for cfg in [PipelineConfig::normalized(), PipelineConfig::angle_accurate()] {
            for len in 0..64 {
                let thetas = random_angles(len, -10.0, 10.0, len as u64);
                assert_matches_scalar(&thetas, cfg);
            }
        }
    }

    #[test]
    fn matches_scalar_on_random_angles() {
        for cfg in [PipelineConfig::normalized(), PipelineConfig::angle_accurate()] {
            let thetas = random_angles(20_000, -10.0, 10.0, 42);
            assert_matches_scalar(&thetas, cfg);
        }
    }

    #[test]
    fn interleaved_is_bitwise_equal_to_plain() {
        for cfg in [PipelineConfig::normalized(), PipelineConfig::angle_accurate()] {
            for len in [0, 1, 7, 8, 15, 16, 17, 31, 32, 33, 255, 4096, 4099] {
                let thetas = random_angles(len, -100.0, 100.0, 7 + len as u64);
                let plain = sincos_batch(&thetas, cfg);
                let inter = sincos_batch_interleaved(&thetas, cfg);
                assert_eq!(plain, inter, "len={len}");
            }
        }
    }

    #[test]
    fn wide_path_agrees_with_forced_scalar_fallback() {
        for cfg in [PipelineConfig::normalized(), PipelineConfig::angle_accurate()] {
            let thetas = random_angles(1000, -20.0, 20.0, 99);
            let wide = sincos_batch(&thetas, cfg);
            let scalar = sincos_batch_scalar(&thetas, cfg);
            assert_eq!(wide, scalar);
        }
    }

    #[test]
    fn nan_lane_does_not_disturb_neighbours() {
        let thetas = [1.0, f32::NAN, 2.0, f32::INFINITY, 3.0];
        let cfg = PipelineConfig::normalized();
        let out = sincos_batch(&thetas, cfg);
        for i in [0, 2, 4] {
            let p = sincos(thetas[i], cfg);
            assert_eq!(out.sines[i].to_bits(), p.s.to_bits());
            assert_eq!(out.cosines[i].to_bits(), p.c.to_bits());
        }
        for i in [1, 3] {
            assert!(out.sines[i].is_nan());
            assert!(out.cosines[i].is_nan());
        }
    }
}
