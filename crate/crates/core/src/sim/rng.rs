//! Per-frame random streams.
//!
//! Every frame draws from its own ChaCha stream, selected by the master seed
//! and a `(purpose, point, frame)` triple, so results do not depend on how
//! frames are scheduled across threads. The waveform is not part of the key:
//! different waveforms in one study see the same bits, channel draws and
//! noise sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Data = 0,
    Channel = 1,
    Noise = 2,
}

/// Stream for `frame` (below 2^40) at grid point `point` (below 2^16).
pub fn frame_rng(seed: u64, purpose: Purpose, point: usize, frame: u64) -> ChaCha8Rng {
    debug_assert!(frame < 1 << 40 && point < 1 << 16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | ((point as u64) << 40) | frame);
    rng
}

/// `n` uniform bits.
pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    use rand::Rng;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word: u64 = rng.random();
        for b in 0..64.min(n - out.len()) {
            out.push(((word >> b) & 1) as u8);
        }
    }
    out
}
