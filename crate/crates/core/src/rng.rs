//! Deterministic random streams for parallel experiments.
//!
//! Every random stream is a ChaCha8 generator keyed by the experiment's base
//! seed and positioned on a stream id hashed from
//! `(agent, condition, seed index, role)`. ChaCha is counter based, so any
//! cell of a sweep can be regenerated on its own, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for inside one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Env,
    Agent,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Env => 0x65_6e76,
            Role::Agent => 0x61_6765_6e74,
        }
    }
}

/// Identifies one random stream of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey<'a> {
    pub base_seed: u64,
    pub agent: &'a str,
    pub condition: u64,
    pub seed_index: u64,
    pub role: Role,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix64(h ^ splitmix64(v))
}

impl StreamKey<'_> {
    /// Stream id: a SplitMix64 fold over every field but the base seed.
    pub fn stream_id(&self) -> u64 {
        let mut h = 0x5eed_u64;
        for chunk in self.agent.as_bytes().chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            h = mix(h, u64::from_le_bytes(buf));
        }
        h = mix(h, self.agent.len() as u64);
        h = mix(h, self.condition);
        h = mix(h, self.seed_index);
        mix(h, self.role.tag())
    }

    pub fn rng(&self) -> StreamRng {
        let mut key = [0u8; 32];
        let mut s = self.base_seed;
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id());
        rng
    }
}

/// A standalone stream for tests and one-off simulations.
pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
