//! Random streams and the small set of variates the samplers need.
//!
//! Every stream is a ChaCha8 generator. The 256-bit key is derived from a
//! 64-bit master seed with SplitMix64 (four consecutive outputs, little
//! endian), and the 64-bit ChaCha stream nonce is
//! `(stream_id << 32) | shard`. Streams for distinct `(shard, stream_id)`
//! pairs under the same master seed therefore never overlap, and results do
//! not depend on how shards are scheduled onto threads.

use rand::{Rng, RngCore, SeedableRng};
pub use rand_chacha::ChaCha8Rng as StreamRng;

const SPLITMIX_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the stream for `(master, shard, stream_id)`.
///
/// `shard` and `stream_id` must fit in 32 bits each.
pub fn stream(master: u64, shard: u32, stream_id: u32) -> StreamRng {
    let mut state = master;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = StreamRng::from_seed(key);
    rng.set_stream((u64::from(stream_id) << 32) | u64::from(shard));
    rng
}

/// Uniform variate on the open interval `(0, 1)`, built from the top 53 bits.
#[inline]
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n`.
#[inline]
pub fn index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}

/// `Geom(p)` on `{1, 2, ...}` by inversion, `ceil(ln U / ln(1 - p))`.
///
/// `p = 1` returns 1 without consuming randomness; `p = 0` returns
/// `u64::MAX` (never). Values beyond `u64::MAX` saturate.
#[inline]
pub fn geometric<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    if p <= 0.0 {
        return u64::MAX;
    }
    geometric_with_log_q(rng, libm::log1p(-p))
}

/// Same as [`geometric`] with `ln(1 - p)` precomputed (must be negative and finite).
#[inline]
pub fn geometric_with_log_q<R: RngCore + ?Sized>(rng: &mut R, log_q: f64) -> u64 {
    let x = libm::log(open01(rng)) / log_q;
    if x >= u64::MAX as f64 {
        return u64::MAX;
    }
    // ceil by hand: x is positive, and libm's ceil is slow on some targets
    let t = x as u64;
    let g = if (t as f64) < x { t + 1 } else { t };
    g.max(1)
}

/// Exponential variate with the given rate.
#[inline]
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -libm::log(open01(rng)) / rate
}

/// Bernoulli trial with success probability `p`.
#[inline]
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    p >= 1.0 || (p > 0.0 && open01(rng) < p)
}
