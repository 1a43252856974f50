//! Seeded random number generation.
//!
//! The generator is SplitMix64, fixed at build time: the same seed yields the
//! same stream on every platform. Gaussian samples come from Box-Muller on
//! that stream, computed in `f64` and narrowed on request so the draw
//! sequence does not depend on the scalar type.

use crate::scalar::Scalar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Deterministic SplitMix64 generator.
#[derive(Clone, Debug)]
pub struct SeededRng {
    state: u64,
    spare_gaussian: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform<S: Scalar>(&mut self) -> S {
        S::real(self.uniform_f64())
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_in<S: Scalar>(&mut self, lo: S, hi: S) -> S {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via Box-Muller; the spare sample is cached.
    pub fn gaussian<S: Scalar>(&mut self) -> S {
        S::real(self.gaussian_f64())
    }

    fn gaussian_f64(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        let u1 = loop {
            let u = self.uniform_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.uniform_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_gaussian = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        (self.next_u64() % n as u64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }

    /// Child generator seeded from this stream.
    pub fn split(&mut self) -> SeededRng {
        SeededRng::new(self.next_u64())
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a stage seed from a master seed and a label, deterministically.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix(seed ^ h)
}
