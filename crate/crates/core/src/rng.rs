//! Deterministic random streams.
//!
//! Every random quantity in the crate is derived from a `u64` seed through ChaCha8
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). Parallel Monte Carlo splits the work
//! into fixed chunks of [`CHUNK`] samples; chunk `j` reads ChaCha8 stream number `j`
//! of the same key. Results therefore depend on the seed only, never on the number
//! of worker threads.
//!
//! * Uniform reals: `u = (w >> 11) · 2^-53 + 2^-54` for a 64-bit word `w`, so
//!   `u ∈ (0, 1)`.
//! * Standard normals: inverse CDF, `z = -√2 · erfc⁻¹(2u)`, one word per variate.
//! * Geometric(1/2) on `{1, 2, ...}`: one plus the number of leading 1-bits read
//!   from the bit stream (least significant bit of each word first).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc_inv;

pub type Stream = ChaCha8Rng;

/// Samples per parallel chunk.
pub const CHUNK: usize = 4096;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform_open01(rng: &mut impl RngCore) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE + SCALE / 2.0
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    let u = uniform_open01(rng);
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Bit-by-bit reader over a word stream.
pub struct BitStream<R> {
    rng: R,
    word: u64,
    left: u32,
}

impl<R: RngCore> BitStream<R> {
    pub fn new(rng: R) -> Self {
        BitStream {
            rng,
            word: 0,
            left: 0,
        }
    }

    pub fn bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }

    /// Geometric(1/2) on the positive integers: `P(k) = 2^-k`.
    pub fn geometric(&mut self) -> u64 {
        let mut k = 1;
        while self.bit() {
            k += 1;
        }
        k
    }

    pub fn inner(&mut self) -> &mut R {
        &mut self.rng
    }
}

/// Runs `per_sample` for `samples` draws, chunked over substreams, in parallel.
/// Output order is sample order.
pub fn par_samples<T, F>(samples: usize, seed: u64, per_sample: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut rng = substream(seed, j as u64);
            let n = CHUNK.min(samples - j * CHUNK);
            (0..n).map(|_| per_sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}
