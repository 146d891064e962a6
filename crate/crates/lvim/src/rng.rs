//! Counter-based pseudo-random numbers with explicit stream splitting.
//!
//! Every random quantity in the crate is drawn from `CounterRng`, a
//! SplitMix64-style generator: output i is the avalanche mix of
//! `key + (i+1) * GOLDEN`. Because the state is a plain counter, draws are
//! reproducible on any platform and independent streams can be carved out of
//! a single root seed with [`derive_stream`] instead of sharing mutable
//! state across threads.
//!
//! Stream-splitting scheme: each logical task (a replicate, a cross-fitting
//! cell, an inner-CV split) owns the stream `derive_stream(parent, &[tags…])`
//! where the tag list is a fixed, documented path. Sibling tasks therefore
//! never observe each other's draws and results do not depend on scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `root` and a tag path.
///
/// Calls with different paths yield uncorrelated streams; the same path
/// always yields the same stream.
pub fn derive_stream(root: u64, path: &[u64]) -> u64 {
    let mut s = mix(root ^ GOLDEN);
    for &tag in path {
        s = mix(s ^ mix(tag.wrapping_add(GOLDEN)));
    }
    s
}

/// Deterministic counter-based generator.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix(seed ^ GOLDEN), counter: 0 }
    }

    /// Generator positioned at the start of the derived stream
    /// `derive_stream(seed, path)`.
    pub fn from_path(seed: u64, path: &[u64]) -> Self {
        CounterRng { key: derive_stream(seed, path), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw on [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw on the open interval (0, 1); safe as a CDF argument.
    pub fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via the inverse CDF.
    ///
    /// Inversion is used instead of rejection or polar methods so the number
    /// of uniforms consumed per variate is fixed, which keeps streams aligned
    /// across platforms.
    pub fn next_normal(&mut self) -> f64 {
        crate::special::normal_quantile(self.next_open_f64())
    }

    /// Uniform integer in [0, bound) by rejection from the top of the range.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
