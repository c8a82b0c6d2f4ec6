//! Deterministic, splittable random streams and Poisson arrival generation.
//!
//! Every sampler in this crate draws from an [`RngStream`] that is derived
//! from a `(master_seed, stream_index)` pair. Replication `i` of an
//! experiment owns the stream with `stream_index = i`, so results are
//! bit-identical across runs and across worker counts: no RNG state is ever
//! shared between replications.
//!
//! The generator is a SplitMix-style counter generator. The state advances
//! by a per-stream odd increment and the output is the 64-bit avalanche
//! finalizer
//!
//! ```text
//! z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//! z ^= z >> 27; z *= 0x94D049BB133111EB;
//! z ^= z >> 31;
//! ```
//!
//! Both the initial state and the increment are avalanche mixes of
//! `(master_seed, stream_index)`; forcing the increment odd gives each
//! stream a full-period orbit distinct from every other stream, which is the
//! SplittableRandom recipe for practically independent parallel streams.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit avalanche finalizer (SplitMix64 constants).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic random stream identified by `(master_seed, stream_index)`.
///
/// Streams are single-owner values: samplers take `&mut RngStream` and no
/// stream is ever shared between replications or threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    state: u64,
    increment: u64,
}

impl RngStream {
    /// Derives the stream for `(master_seed, stream_index)`.
    ///
    /// Deterministic and independent of thread scheduling: the same pair
    /// always yields the same draw sequence.
    pub fn derive(master_seed: u64, stream_index: u64) -> Self {
        let state = mix64(master_seed ^ mix64(stream_index.wrapping_mul(GOLDEN_GAMMA)));
        let increment = mix64(mix64(stream_index).wrapping_add(GOLDEN_GAMMA) ^ master_seed) | 1;
        RngStream {
            master_seed,
            stream_index,
            state,
            increment,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.increment);
        mix64(self.state)
    }

    /// Uniform draw on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Standard exponential draw via the inverse CDF.
    #[inline]
    pub fn next_exponential(&mut self) -> f64 {
        exponential_from_uniform(self.next_uniform())
    }
}

/// Inverse-CDF transform `u ↦ −ln(1−u)` for `u ∈ [0, 1)`.
///
/// Kept as a free function so tests can inject uniforms directly.
#[inline]
pub fn exponential_from_uniform(u: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&u));
    -(-u).ln_1p()
}

/// Partial sums `S_i = Σ_{j≤i} E_j` of i.i.d. standard exponentials and the
/// descending Poisson arrivals `t_i = 1/S_i`.
///
/// `S_i` is strictly increasing, so the arrivals are strictly decreasing;
/// the `S_i` form a unit-rate Poisson process on `(0, ∞)` and the `t_i` a
/// Poisson process with intensity `t^{-2} dt`.
#[derive(Debug, Clone, Default)]
pub struct ArrivalSequence {
    partial_sums: Vec<f64>,
}

impl ArrivalSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one exponential increment and returns `(t_i, i)` with
    /// `t_i = 1/S_i` and `i` the 1-based arrival index.
    pub fn push_exponential(&mut self, e: f64) -> (f64, usize) {
        debug_assert!(e >= 0.0);
        let s = self.partial_sums.last().copied().unwrap_or(0.0) + e;
        self.partial_sums.push(s);
        (1.0 / s, self.partial_sums.len())
    }

    /// Draws the next exponential from `stream` and appends it.
    pub fn next_arrival(&mut self, stream: &mut RngStream) -> (f64, usize) {
        self.push_exponential(stream.next_exponential())
    }

    pub fn len(&self) -> usize {
        self.partial_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partial_sums.is_empty()
    }

    /// `S_1, …, S_n` so far.
    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    /// `t_i` for a 1-based index `i ≤ len`.
    pub fn arrival(&self, i: usize) -> f64 {
        1.0 / self.partial_sums[i - 1]
    }
}
