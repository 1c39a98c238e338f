//! Counter-based random number generation.
//!
//! Every stream is a pure function `(key, counter) -> u64`: the SplitMix64
//! finalizer applied to a mixed key/counter word. This gives
//!
//! - reproducibility: identical seeds produce bit-identical streams on every
//!   platform and thread count;
//! - random access: coefficient `i` of a disorder sample is read directly from
//!   counter `i`, so sparse and dense sampling of the same seed agree on the
//!   terms they share;
//! - cheap splitting: child streams are derived by re-keying, never by
//!   partitioning a sequential stream.
//!
//! Gaussian variates use the inverse-CDF method with Acklam's rational
//! approximation of the normal quantile (relative error < 1.2e-9), which is
//! far below every statistical tolerance used in this crate.

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold several seed components into one 64-bit key.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        acc = mix64(acc ^ mix64(p.wrapping_mul(0xD1B5_4A32_D192_ED03)));
    }
    acc
}

/// Stateless counter-keyed generator.
#[derive(Clone, Copy, Debug)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ 0x9E37_79B9_7F4A_7C15),
        }
    }

    /// Child stream keyed by `tag`; disjoint from the parent for all practical purposes.
    pub fn derive(&self, tag: u64) -> Self {
        CounterRng {
            key: mix64(
                self.key ^ mix64(tag.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ 0x8CB9_2BA7_2F3D_8DD7,
            ),
        }
    }

    #[inline]
    pub fn u64_at(&self, i: u64) -> u64 {
        mix64(
            self.key
                ^ mix64(
                    i.wrapping_mul(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(0x2545_F491_4F6C_DD1D),
                ),
        )
    }

    /// Uniform double in the open interval (0, 1).
    #[inline]
    pub fn f64_at(&self, i: u64) -> f64 {
        (((self.u64_at(i) >> 11) as f64) + 0.5) / 9_007_199_254_740_992.0
    }

    /// Standard normal variate at counter `i` (inverse-CDF method).
    #[inline]
    pub fn gaussian_at(&self, i: u64) -> f64 {
        normal_inverse_cdf(self.f64_at(i))
    }
}

/// Sequential convenience wrapper over a counter stream.
#[derive(Clone, Debug)]
pub struct SeqRng {
    rng: CounterRng,
    ctr: u64,
}

impl SeqRng {
    pub fn new(seed: u64) -> Self {
        SeqRng {
            rng: CounterRng::new(seed),
            ctr: 0,
        }
    }

    pub fn from_stream(rng: CounterRng) -> Self {
        SeqRng { rng, ctr: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.rng.u64_at(self.ctr);
        self.ctr += 1;
        v
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        let v = self.rng.f64_at(self.ctr);
        self.ctr += 1;
        v
    }

    #[inline]
    pub fn next_gaussian(&mut self) -> f64 {
        let v = self.rng.gaussian_at(self.ctr);
        self.ctr += 1;
        v
    }

    /// Unbiased uniform integer in [0, n) by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below((i + 1) as u64) as usize;
            items.swap(i, j);
        }
    }

    /// Uniform point on the unit sphere in R^3.
    pub fn unit_vector3(&mut self) -> [f64; 3] {
        loop {
            let v = [
                self.next_gaussian(),
                self.next_gaussian(),
                self.next_gaussian(),
            ];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if norm > 1e-8 {
                return [v[0] / norm, v[1] / norm, v[2] / norm];
            }
        }
    }
}

/// Normal quantile function, Acklam's rational approximation.
///
/// Relative error below 1.15e-9 over (0, 1).
pub fn normal_inverse_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0,1)");

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}
