//! Deterministic, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`], a ChaCha8
//! generator (`rand_chacha` 0.3, seeded through `SeedableRng::seed_from_u64`).
//! Independent tasks (replications, bootstrap draws) never share a generator;
//! each derives its own seed with [`child_seed`] from a master seed and a path
//! of indices, so results do not depend on scheduling or thread count.
//!
//! Generator version: `chacha8-v1`. Changing any transform below changes every
//! seeded output and must bump [`GENERATOR_VERSION`].
//!
//! Transforms:
//! * uniform on `[0, 1)`: 53 random mantissa bits, `(u64 >> 11) * 2^-53`;
//! * exponential: inverse CDF `-ln(1 - U)`;
//! * normal: Box–Muller, `sqrt(-2 ln(1 - U1)) * cos(2 pi U2)` with the sine
//!   branch cached for the next call;
//! * chi-square with integer `nu`: sum of `nu` squared normals; otherwise
//!   `2 * Gamma(nu / 2)` via Marsaglia–Tsang;
//! * Student t: `Z / sqrt(chi2_nu / nu)`, redrawing the denominator in the
//!   (measure-zero) event that it is exactly zero.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GENERATOR_VERSION: &str = "chacha8-v1";

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const PATH_SALT: u64 = 0xbb67_ae85_84ca_a73b;
const ROOT_SALT: u64 = 0x6a09_e667_f3bc_c909;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of the stream at `path` below `master`.
///
/// `h0 = mix64(master ^ ROOT_SALT)`, then for each index `i` in order
/// `h = mix64(rotl(h, 23) ^ mix64(i ^ PATH_SALT))`. The rotation makes the
/// result sensitive to index order.
pub fn child_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master ^ ROOT_SALT), |h, &i| {
        mix64(h.rotate_left(23) ^ mix64(i ^ PATH_SALT))
    })
}

/// A seed together with the path that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTree {
    pub master: u64,
    pub path: Vec<u64>,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master, path: Vec::new() }
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self { master: self.master, path }
    }

    pub fn seed(&self) -> u64 {
        child_seed(self.master, &self.path)
    }

    pub fn stream(&self) -> Stream {
        Stream::new(self.seed())
    }
}

/// A value-owned random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare_normal: None }
    }

    /// Stream for `child_seed(master, path)`.
    pub fn child(master: u64, path: &[u64]) -> Self {
        Self::new(child_seed(master, path))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn chi2(&mut self, nu: f64) -> f64 {
        assert!(nu > 0.0 && nu.is_finite(), "chi-square degrees of freedom must be positive");
        if nu.fract() == 0.0 && nu <= 64.0 {
            (0..nu as usize).map(|_| self.normal().powi(2)).sum()
        } else {
            2.0 * self.gamma(nu / 2.0)
        }
    }

    pub fn student_t(&mut self, nu: f64) -> f64 {
        let z = self.normal();
        loop {
            let v = self.chi2(nu);
            if v > 0.0 {
                return z / (v / nu).sqrt();
            }
        }
    }

    /// Gamma(shape, 1) by Marsaglia–Tsang, with the usual boost for shape < 1.
    fn gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let u = 1.0 - self.uniform();
            return self.gamma(shape + 1.0) * u.powf(1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let v = (1.0 + c * x).powi(3);
            if v <= 0.0 {
                continue;
            }
            let u = 1.0 - self.uniform();
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v;
            }
        }
    }
}
