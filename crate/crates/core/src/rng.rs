//! Seed derivation and sampling helpers.
//!
//! Every stochastic unit of work (one outbreak, one training run, one
//! bootstrap) gets its own 64-bit seed derived from a master seed and a
//! stream counter, so results never depend on scheduling or worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Seed for a named sub-stream, e.g. `("train", seed)`.
pub fn derive_named(master: u64, name: &str) -> u64 {
    let mut acc = master;
    for b in name.bytes() {
        acc = splitmix64(acc ^ u64::from(b));
    }
    acc
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Exponential variate by inverse CDF. `rate` must be positive.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}
