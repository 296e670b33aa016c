//! Seeded, keyed random streams.
//!
//! Every BRV a synapse consumes is addressed by `(synapse, line, gamma)`
//! rather than drawn from a shared sequential generator, so results do not
//! depend on evaluation order or on how columns are spread over threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::macros::Brv;

// Streams below this id are synapse indices.
const STREAM_INIT_WEIGHTS: u64 = u64::MAX - 1;

// Key tag separating seed derivation from BRV keystreams.
const DERIVE_TAG: [u8; 8] = *b"derive\0\0";

#[derive(Debug, Clone)]
pub struct BrvSource {
    base: ChaCha8Rng,
}

impl BrvSource {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn word(&self, stream: u64, index: u128) -> u64 {
        let mut rng = self.base.clone();
        rng.set_stream(stream);
        rng.set_word_pos(index * 2);
        rng.next_u64()
    }

    /// Uniform sample in `[0, 1)` for the given key.
    pub fn uniform(&self, synapse: u64, line: u32, lines: u32, gamma: u64) -> f64 {
        let index = u128::from(gamma) * u128::from(lines) + u128::from(line);
        (self.word(synapse, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Draws the BRV on `line` of `synapse` for gamma cycle `gamma`.
    pub fn draw(&self, synapse: u64, line: u32, lines: u32, gamma: u64, probability: f64) -> Brv {
        let u = self.uniform(synapse, line, lines, gamma);
        Brv::new(u < probability, probability)
    }

    /// Fills `out` with one BRV per stabilization line of `synapse` for gamma
    /// cycle `gamma`; line `k` has probability `probs[k] * scale`. Identical
    /// to calling [`BrvSource::draw`] per line, in one keystream pass.
    pub fn draw_lines(
        &self,
        synapse: u64,
        gamma: u64,
        probs: &[f64],
        scale: f64,
        out: &mut Vec<Brv>,
    ) {
        let lines = probs.len() as u128;
        let mut rng = self.base.clone();
        rng.set_stream(synapse);
        rng.set_word_pos(u128::from(gamma) * lines * 2);
        out.clear();
        out.extend(probs.iter().map(|&pr| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let prob = pr * scale;
            Brv::new(u < prob, prob)
        }));
    }

    /// Generator for initial weight values.
    pub fn init_rng(&self) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(STREAM_INIT_WEIGHTS);
        rng
    }
}

/// Child seed for a sub-component (e.g. one column of a layer).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut key = [0u8; 32];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut key);
    for (k, t) in key.iter_mut().zip(DERIVE_TAG) {
        *k ^= t;
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(a);
    rng.set_word_pos(u128::from(b) * 2);
    rng.random()
}
