//! Seeded random-number streams with deterministic substream derivation.
//!
//! Every Monte Carlo routine in this crate receives an [`RngStream`] from its
//! caller; there is no global generator. A stream can spawn independent
//! *substreams* keyed by a `(domain, index)` pair, which is how parallel code
//! stays reproducible: task `i` always derives the same substream from the
//! run seed regardless of which worker executes it or in what order.
//!
//! Substream keys are derived with the SplitMix64 finalizer, whose output is
//! well-scrambled even for adjacent inputs, and each key is then expanded
//! into a full 256-bit ChaCha12 seed. Domain constants live next to the code
//! that uses them and must be pairwise distinct; they rule out collisions
//! between substream families that share an index space.

use std::convert::Infallible;

use rand::{Rng, SeedableRng, TryRng};
use rand_chacha::ChaCha12Rng;

/// Central registry of substream domains.
///
/// Every call site that derives substreams uses one of these constants, so
/// no two independent sampling tasks in the crate can ever share a stream
/// by accident.
pub mod domains {
    /// Adaptive pre-burn-in tuner inside `run_chain`.
    pub const TUNER: u64 = 0x01;
    /// Main MCMC run inside `run_chain`.
    pub const MAIN_CHAIN: u64 = 0x02;
    /// Per-outer-draw streams of the θ propagation method.
    pub const THETA_OUTER: u64 = 0x10;
    /// Per-draw streams for the ξ method's posterior-predictive draws.
    pub const XI_DRAW: u64 = 0x11;
    /// Per-sample streams for resampling the binned ξ grid.
    pub const XI_RESAMPLE: u64 = 0x12;
    /// Per-draw streams of the expected-ξ method.
    pub const EXPECTED_XI: u64 = 0x13;
    /// Per-replicate streams of the bootstrapped-means baseline.
    pub const BOOTSTRAP_MEANS: u64 = 0x20;
    /// Per-replicate streams of the bootstrapped-values baseline.
    pub const BOOTSTRAP_VALUES: u64 = 0x21;
    /// Per-date seeds of the rolling harness.
    pub const ROLLING_DATE: u64 = 0x30;
}

/// SplitMix64 step: advances `state` and returns the next scrambled output.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a parent key with a `(domain, index)` pair into a child key.
///
/// Exposed so that higher layers (e.g. per-date seeds in the rolling
/// harness) can derive child seeds without holding an [`RngStream`].
pub fn mix(seed: u64, domain: u64, index: u64) -> u64 {
    let mut state = seed;
    let mut out = splitmix64(&mut state);
    state ^= domain;
    out ^= splitmix64(&mut state);
    state ^= index;
    out ^ splitmix64(&mut state)
}

/// A seeded ChaCha12 stream that remembers its own key so it can derive
/// independent substreams.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    /// Creates the root stream for a run.
    pub fn from_seed(seed: u64) -> Self {
        let mut state = seed;
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        RngStream {
            key: seed,
            rng: ChaCha12Rng::from_seed(bytes),
        }
    }

    /// Key this stream was created with.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Derives an independent stream for `(domain, index)`.
    ///
    /// Derivation depends only on the parent's key, never on how much of the
    /// parent stream has been consumed, so substreams can be created in any
    /// order (or concurrently from clones) with identical results.
    pub fn substream(&self, domain: u64, index: u64) -> RngStream {
        RngStream::from_seed(mix(self.key, domain, index))
    }

    /// Splits off an independent child stream, consuming eight bytes of the
    /// parent's output.
    ///
    /// Unlike [`substream`](Self::substream), forking advances the parent,
    /// so calling the same routine twice on one stream produces different
    /// (but still seed-reproducible) results. Routines that fan out into
    /// parallel tasks fork once up front, then hand each task a
    /// `(domain, index)` substream of the child.
    pub fn fork(&mut self) -> RngStream {
        RngStream::from_seed(self.next_u64())
    }
}

// Implementing the infallible `TryRng` gives `RngStream` the blanket `Rng`
// and `RngExt` impls, so callers use it like any other generator.
impl TryRng for RngStream {
    type Error = Infallible;

    fn try_next_u32(&mut self) -> Result<u32, Infallible> {
        Ok(self.rng.next_u32())
    }

    fn try_next_u64(&mut self) -> Result<u64, Infallible> {
        Ok(self.rng.next_u64())
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Infallible> {
        self.rng.fill_bytes(dest);
        Ok(())
    }
}
