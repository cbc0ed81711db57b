use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A counter-based random stream: identical (seed, stream) pairs reproduce
/// identical draw sequences on every platform, and distinct stream indices
/// give statistically independent streams.
///
/// Parallel Monte Carlo assigns one stream per trial (stream = base + trial
/// index), so results are independent of worker count and scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh stream with the same seed and stream index `self.stream + offset`.
    pub fn split(&self, offset: u64) -> RngStream {
        RngStream::new(self.seed, self.stream.wrapping_add(offset))
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform draw on (0, 1]; safe as a logarithm argument.
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.rng.gen::<f64>()
    }
}
