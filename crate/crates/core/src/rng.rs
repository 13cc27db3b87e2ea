//! Seeded random streams.
//!
//! Every replication derives independent child streams from one root seed,
//! so runs reproduce bit-for-bit and never share mutable generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Purpose of a child stream within one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    /// Draws of the random termination index.
    Termination = 0,
    /// Stochastic-oracle noise.
    Oracle = 1,
    /// Sampling of test points (Hölder certificates, diagnostics).
    Sampling = 2,
    /// Generation of problem data.
    Problem = 3,
}

pub fn root_stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child stream for `(replication, role)` under the given root seed.
pub fn child_stream(seed: u64, replication: u64, role: StreamRole) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication.wrapping_mul(4).wrapping_add(role as u64));
    rng
}
