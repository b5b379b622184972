//! Simulation of a two-party quantum key agreement protocol over
//! decoherence-free-subspace logical qubits, together with the
//! fake-permutation attack against it and a countermeasure.

pub mod adversary;
pub mod countermeasure;
pub mod error;
pub mod harness;
pub mod logical;
pub mod protocol;
pub mod statevector;
pub mod symbolic;

pub use error::{Error, Result};

use rand::SeedableRng;

/// Random number generator used for every stochastic choice.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Independent generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
