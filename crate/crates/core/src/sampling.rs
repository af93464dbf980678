//! Seeded complex Gaussian draws.
//!
//! Seed to stream mapping (stable across releases): the generator is
//! `ChaCha20Rng::seed_from_u64(seed)`. Each complex sample consumes two
//! `next_u64` outputs `x1, x2`, mapped to `u = 1 - (x >> 11) * 2^-53` in
//! `(0, 1]`, and Box-Muller gives `re = rho cos(2 pi u2)`,
//! `im = rho sin(2 pi u2)` with `rho = sqrt(-ln u1)`, which is the standard
//! complex normal `E|z|^2 = 1`.

use core::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub struct GaussianStream {
    rng: ChaCha20Rng,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    fn unit(&mut self) -> f64 {
        1.0 - (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_complex(&mut self) -> Complex64 {
        let u1 = self.unit();
        let u2 = self.unit();
        let rho = libm::sqrt(-libm::log(u1));
        let theta = 2.0 * PI * u2;
        Complex64::new(rho * libm::cos(theta), rho * libm::sin(theta))
    }
}
