//! Helpers shared by the integration suites.
#![allow(dead_code)]

use fastsincos::{SinCosPair, Stage};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ulp_distance(a: f32, b: f32) -> u32 {
    fn key(x: f32) -> i64 {
        let bits = x.to_bits() as i32;
        (if bits < 0 {
            i32::MIN.wrapping_sub(bits)
        } else {
            bits
        }) as i64
    }
    (key(a) - key(b)).unsigned_abs() as u32
}

/// Whether the scalar and vector paths share one FMA rounding, which is
/// what makes their outputs bitwise identical.
pub fn fma_is_shared() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

/// Bitwise equality when one FMA rounding is shared, ≤ 2 ULP otherwise.
pub fn assert_pairs_match(a: (f32, f32), b: (f32, f32), context: &str) {
    if fma_is_shared() {
        assert_eq!(a.0.to_bits(), b.0.to_bits(), "sin mismatch at {context}");
        assert_eq!(a.1.to_bits(), b.1.to_bits(), "cos mismatch at {context}");
    } else {
        assert!(ulp_distance(a.0, b.0) <= 2, "sin mismatch at {context}");
        assert!(ulp_distance(a.1, b.1) <= 2, "cos mismatch at {context}");
    }
}

/// The rejected doubling recursion s' = 2sc, c' = 1 − 2s². Algebraically
/// equal to the shipped c' = c² − s² only on the exact unit circle; off it,
/// this form converts amplitude error into angle error, which is why it is
/// test-only.
pub fn double_angle_rejected(p: SinCosPair) -> SinCosPair {
    let s = 2.0 * (p.s * p.c);
    let c = (-2.0 * p.s).mul_add(p.s, 1.0);
    SinCosPair {
        s,
        c,
        stage: match p.stage {
            Stage::Raw => Stage::Doubled1,
            Stage::Doubled1 => Stage::Doubled2,
            other => other,
        },
    }
}

/// Deterministic angles: the 24-bit dyadic rationals of a seeded ChaCha8
/// stream mapped onto [lo, hi).
pub fn random_angles(n: usize, seed: u64, lo: f64, hi: f64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u = (rng.next_u32() >> 8) as f64 * (1.0 / (1u64 << 24) as f64);
            (lo + u * (hi - lo)) as f32
        })
        .collect()
}
