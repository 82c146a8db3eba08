//! Deterministic random-stream allocation.
//!
//! Every random quantity in a run is drawn from a stream owned by exactly one
//! consumer: the trajectory simulator of a run, or one PE of one filter in a
//! run. Streams are seeded as `seed ^ mix(run, domain, index)`, so results do
//! not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator used for every stream.
pub type Stream = ChaCha8Rng;

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a (run, domain, index) triple.
pub fn mix(run: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(run) ^ domain) ^ index)
}

/// Which consumer a stream belongs to within one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamDomain {
    /// Signal and observation simulation.
    Trajectory,
    /// PE streams of a filter. Different filters run on the same data
    /// (e.g. a DPF and its centralized baseline) use different tags.
    Filter(u32),
}

impl StreamDomain {
    fn code(self) -> u64 {
        match self {
            StreamDomain::Trajectory => 0xA5A5_0000_0000_0001,
            StreamDomain::Filter(tag) => 0x5A5A_0000_0000_0000 | u64::from(tag),
        }
    }
}

/// Base seed from which all streams of an experiment derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPlan {
    pub seed: u64,
}

impl SeedPlan {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, run: u64, domain: StreamDomain, index: u64) -> Stream {
        Stream::seed_from_u64(self.seed ^ mix(run, domain.code(), index))
    }

    pub fn trajectory(&self, run: u64) -> Stream {
        self.stream(run, StreamDomain::Trajectory, 0)
    }

    /// One stream per PE for the filter identified by `tag` in `run`.
    pub fn pe_streams(&self, run: u64, tag: u32, m_pes: usize) -> Vec<Stream> {
        (0..m_pes as u64)
            .map(|pe| self.stream(run, StreamDomain::Filter(tag), pe))
            .collect()
    }
}
